#include "adfuse/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "adfuse/io_util.hpp"
#include "adfuse/rng.hpp"

namespace adfuse {

std::string_view to_string(Split split) {
  return split == Split::train ? "train" : "test";
}

std::string_view to_string(Interaction interaction) {
  return interaction == Interaction::additive ? "additive" : "multiplicative";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  throw std::invalid_argument("split must be 'train' or 'test', got '" +
                              std::string(name) + "'");
}

Interaction parse_interaction(std::string_view name) {
  if (name == "additive") return Interaction::additive;
  if (name == "multiplicative") return Interaction::multiplicative;
  throw std::invalid_argument("interaction must be additive or multiplicative");
}

std::vector<std::string> Manifest::labels() const {
  std::set<std::string> unique;
  for (const auto& row : rows) unique.insert(row.label);
  return {unique.begin(), unique.end()};
}

std::vector<std::string> Manifest::ids() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.image_id);
  return out;
}

std::size_t Manifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      rows.begin(), rows.end(), [split](const ManifestRow& r) { return r.split == split; }));
}

Manifest read_manifest(std::istream& in, const std::string& source) {
  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_char(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(source, line_no, "expected 'image_id\\tlabel\\tsplit'");
    }
    ManifestRow row{std::string(fields[0]), std::string(fields[1]), Split::train};
    try {
      row.split = parse_split(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!seen.insert(row.image_id).second) {
      throw ParseError(source, line_no, "duplicate image_id '" + row.image_id + "'");
    }
    manifest.rows.push_back(std::move(row));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_manifest(in, path.string());
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& row : manifest.rows) {
    out << row.image_id << '\t' << row.label << '\t' << to_string(row.split) << '\n';
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  auto out = open_output(path);
  write_manifest(out, manifest);
}

FeatureTable load_features(const std::filesystem::path& path) {
  return read_features(path);
}

void require_features(const Manifest& manifest, const FeatureTable& features,
                      const std::string& what) {
  std::vector<std::string> missing;
  for (const auto& row : manifest.rows) {
    if (!features.contains(row.image_id)) missing.push_back(row.image_id);
  }
  if (missing.empty()) return;
  std::string msg = "manifest ids without " + what + ":";
  for (const auto& id : missing) msg += " " + id;
  throw std::invalid_argument(msg);
}

TranscriptionMap index_transcriptions(std::vector<TranscriptionRecord> records) {
  TranscriptionMap map;
  for (auto& record : records) {
    const std::string id = record.image_id;
    if (!map.emplace(id, std::move(record)).second) {
      throw std::invalid_argument("duplicate transcription for '" + id + "'");
    }
  }
  return map;
}

TranscriptionMap load_transcriptions(const std::filesystem::path& path) {
  return index_transcriptions(read_transcriptions(path));
}

TranscriptionRecord transcription_or_empty(const TranscriptionMap& map,
                                           const std::string& id) {
  const auto it = map.find(id);
  if (it == map.end()) return TranscriptionRecord{id, {}};
  return it->second;
}

std::vector<VqaRecord> read_vqa(std::istream& in, const std::string& source) {
  std::vector<VqaRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    VqaRecord record;
    try {
      const auto obj = nlohmann::json::parse(line);
      record.image_id = obj.at("image_id").get<std::string>();
      record.question = obj.at("question").get<std::string>();
      record.answer = obj.at("answer").get<std::string>();
      if (obj.contains("split")) record.split = parse_split(obj.at("split").get<std::string>());
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (record.image_id.empty() || record.question.empty() || record.answer.empty()) {
      throw ParseError(source, line_no, "image_id, question and answer must be non-empty");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<VqaRecord> load_vqa(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_vqa(in, path.string());
}

void write_vqa(std::ostream& out, const std::vector<VqaRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json obj{
        {"image_id", r.image_id}, {"question", r.question}, {"answer", r.answer}};
    if (r.split) obj["split"] = std::string(to_string(*r.split));
    out << obj.dump() << '\n';
  }
}

nlohmann::ordered_json CleaningReport::to_json() const {
  nlohmann::ordered_json per_image = nlohmann::ordered_json::object();
  for (const auto& [id, removed] : removed_per_image) per_image[id] = removed;
  return {{"threshold", threshold},
          {"records", records},
          {"total_words", total_words},
          {"surviving_words", surviving_words},
          {"removed_words", removed_words},
          {"emptied_records", emptied_records},
          {"removed_per_image", per_image}};
}

CleanedCorpus clean_corpus(const std::vector<TranscriptionRecord>& records,
                           double threshold) {
  CleanedCorpus out;
  out.report.threshold = threshold;
  out.report.records = records.size();
  out.records.reserve(records.size());
  for (const auto& record : records) {
    auto kept = filter_by_confidence(record, threshold);
    const std::size_t removed = record.words.size() - kept.words.size();
    out.report.total_words += record.words.size();
    out.report.surviving_words += kept.words.size();
    out.report.removed_per_image.emplace_back(record.image_id, removed);
    if (kept.words.empty() && !record.words.empty()) ++out.report.emptied_records;
    out.records.push_back(std::move(kept));
  }
  out.report.removed_words = out.report.total_words - out.report.surviving_words;
  return out;
}

void SynthConfig::validate() const {
  if (n_train == 0 || n_test == 0) throw std::invalid_argument("synthetic split sizes must be positive");
  if (dim_a == 0 || dim_b == 0) throw std::invalid_argument("synthetic dims must be positive");
  if (n_classes < 2) throw std::invalid_argument("synthetic data needs at least 2 classes");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("noise sigma must be finite and >= 0");
  }
}

namespace {

Matrix<double> gaussian_rows(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  Matrix<double> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.gaussian();
  }
  return m;
}

FeatureVector noisy(const Matrix<double>& prototypes, std::size_t index, double sigma,
                    SplitMix64& rng) {
  FeatureVector v = prototypes.row(static_cast<Eigen::Index>(index)).transpose();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += sigma * rng.gaussian();
  return v;
}

void draw_split(SynthSplit& split, std::size_t count, const SynthConfig& cfg,
                const Matrix<double>& proto_a, const Matrix<double>& proto_b,
                SplitMix64& rng) {
  const std::size_t n = cfg.n_classes;
  for (std::size_t e = 0; e < count; ++e) {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t label = 0;
    if (cfg.interaction == Interaction::additive) {
      label = rng.below(n);
      i = j = label;
    } else {
      i = rng.below(n);
      j = rng.below(n);
      label = (i + j) % n;
    }
    split.modality_a.push_back(noisy(proto_a, i, cfg.noise_sigma, rng));
    split.modality_b.push_back(noisy(proto_b, j, cfg.noise_sigma, rng));
    split.labels.push_back(label);
    split.prototypes.emplace_back(i, j);
  }
}

}  // namespace

SynthData make_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  const auto proto_a = gaussian_rows(cfg.n_classes, cfg.dim_a, rng);
  const auto proto_b = gaussian_rows(cfg.n_classes, cfg.dim_b, rng);
  SynthData data;
  draw_split(data.train, cfg.n_train, cfg, proto_a, proto_b, rng);
  draw_split(data.test, cfg.n_test, cfg, proto_a, proto_b, rng);
  return data;
}

}  // namespace adfuse
