#include "adfuse/text_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "adfuse/io_util.hpp"

namespace adfuse {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

void EmbeddingTable::insert(std::string token, Eigen::VectorXd vector) {
  if (token.empty()) throw std::invalid_argument("empty embedding token");
  if (static_cast<std::size_t>(vector.size()) != dim_) {
    throw std::invalid_argument("embedding for '" + token + "' has length " +
                                std::to_string(vector.size()) + ", expected " +
                                std::to_string(dim_));
  }
  auto [it, inserted] = entries_.try_emplace(std::move(token), std::move(vector));
  if (!inserted) {
    throw std::invalid_argument("duplicate embedding token '" + it->first + "'");
  }
}

const Eigen::VectorXd* EmbeddingTable::find(std::string_view token) const {
  const auto it = entries_.find(std::string(token));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> EmbeddingTable::tokens() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [token, _] : entries_) out.push_back(token);
  std::sort(out.begin(), out.end());
  return out;
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (dim_ != other.dim_ || entries_.size() != other.entries_.size()) {
    return false;
  }
  for (const auto& [token, vec] : entries_) {
    const auto* rhs = other.find(token);
    if (rhs == nullptr || *rhs != vec) return false;
  }
  return true;
}

double TfIdfModel::idf(std::string_view token) const {
  const auto it = doc_freq.find(token);
  const double df = it == doc_freq.end() ? 1.0 : static_cast<double>(it->second);
  return std::log(static_cast<double>(doc_count) / df);
}

std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TranscriptionRecord normalize_record(const TranscriptionRecord& record) {
  TranscriptionRecord out{record.image_id, {}};
  for (const auto& word : record.words) {
    for (auto& token : tokenize(word.token)) {
      out.words.push_back({std::move(token), word.confidence});
    }
  }
  return out;
}

TfIdfModel fit_tfidf(const std::vector<TranscriptionRecord>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  TfIdfModel model;
  model.doc_count = corpus.size();
  for (const auto& record : corpus) {
    std::set<std::string_view> present;
    for (const auto& word : record.words) present.insert(word.token);
    for (const auto token : present) {
      auto it = model.doc_freq.find(token);
      if (it == model.doc_freq.end()) {
        model.doc_freq.emplace(std::string(token), 1);
      } else {
        ++it->second;
      }
    }
  }
  return model;
}

std::vector<std::string> select_top_k(const TranscriptionRecord& record,
                                      const TfIdfModel& model, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto& word : record.words) ++counts[word.token];

  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(counts.size());
  for (const auto& [token, tf] : counts) {
    scored.emplace_back(static_cast<double>(tf) * model.idf(token), token);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::vector<std::string> top;
  const std::size_t n = std::min(k, scored.size());
  top.reserve(n);
  for (std::size_t i = 0; i < n; ++i) top.push_back(std::move(scored[i].second));
  return top;
}

TextFeature aggregate(const std::vector<std::string>& tokens,
                      const EmbeddingTable& table) {
  if (table.empty()) throw std::invalid_argument("empty embedding table");
  TextFeature feature;
  feature.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim()));
  feature.selected = tokens;

  std::vector<std::string_view> order(tokens.begin(), tokens.end());
  std::sort(order.begin(), order.end());
  for (const auto token : order) {
    if (const auto* vec = table.find(token)) {
      feature.vector += *vec;
    } else {
      ++feature.miss_count;
    }
  }
  return feature;
}

TranscriptionRecord filter_by_confidence(const TranscriptionRecord& record,
                                         double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("confidence threshold must lie in [0, 1]");
  }
  TranscriptionRecord out{record.image_id, {}};
  std::copy_if(record.words.begin(), record.words.end(),
               std::back_inserter(out.words),
               [threshold](const TranscribedWord& w) {
                 return w.confidence >= threshold;
               });
  return out;
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

EmbeddingTable read_embeddings(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  strip_cr(line);
  const auto header = split_spaces(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_size(header[0], count) ||
      !parse_size(header[1], dim) || dim == 0) {
    throw ParseError(source, 1, "expected header '<count> <dim>'");
  }

  EmbeddingTable table(dim);
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1) {
      throw ParseError(source, line_no,
                       "expected token and " + std::to_string(dim) +
                           " values, got " + std::to_string(fields.size()) +
                           " fields");
    }
    Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_real(fields[i + 1], vec[static_cast<Eigen::Index>(i)])) {
        throw ParseError(source, line_no,
                         "bad number '" + std::string(fields[i + 1]) + "'");
      }
    }
    try {
      table.insert(std::string(fields[0]), std::move(vec));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (table.size() != count) {
    throw ParseError(source, line_no,
                     "header declares " + std::to_string(count) +
                         " entries, found " + std::to_string(table.size()));
  }
  return table;
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in, path.string());
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (const auto& token : table.tokens()) {
    out << token;
    for (const double v : *table.find(token)) out << ' ' << format_real(v);
    out << '\n';
  }
}

void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingTable& table) {
  auto out = open_output(path);
  write_embeddings(out, table);
}

std::vector<TranscriptionRecord> read_transcriptions(std::istream& in,
                                                     const std::string& source) {
  std::vector<TranscriptionRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    TranscriptionRecord record;
    try {
      const auto obj = nlohmann::json::parse(line);
      record.image_id = obj.at("image_id").get<std::string>();
      for (const auto& w : obj.at("words")) {
        TranscribedWord word{w.at("token").get<std::string>(),
                             w.at("conf").get<double>()};
        if (word.token.empty()) throw std::invalid_argument("empty token");
        if (!(word.confidence >= 0.0 && word.confidence <= 1.0)) {
          throw std::invalid_argument("confidence outside [0, 1]");
        }
        record.words.push_back(std::move(word));
      }
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (record.image_id.empty()) throw ParseError(source, line_no, "empty image_id");
    if (!seen.insert(record.image_id).second) {
      throw ParseError(source, line_no, "duplicate image_id '" + record.image_id + "'");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<TranscriptionRecord> read_transcriptions(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_transcriptions(in, path.string());
}

void write_transcriptions(std::ostream& out,
                          const std::vector<TranscriptionRecord>& records) {
  for (const auto& record : records) {
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (const auto& w : record.words) {
      words.push_back({{"token", w.token}, {"conf", w.confidence}});
    }
    nlohmann::ordered_json obj{{"image_id", record.image_id}, {"words", words}};
    out << obj.dump() << '\n';
  }
}

void write_transcriptions(const std::filesystem::path& path,
                          const std::vector<TranscriptionRecord>& records) {
  auto out = open_output(path);
  write_transcriptions(out, records);
}

}  // namespace adfuse
