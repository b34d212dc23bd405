#include "adfuse/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "adfuse/io_util.hpp"
#include "adfuse/rng.hpp"

namespace adfuse {

TextFeaturizeResult featurize_text(const std::vector<TranscriptionRecord>& corpus,
                                   const EmbeddingTable& table,
                                   const TextFeaturizeOptions& options) {
  if (options.k == 0) throw std::invalid_argument("k must be positive");
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  auto cleaned = clean_corpus(corpus, options.threshold);

  TextFeaturizeResult result{FeatureTable(table.dim()), std::move(cleaned.report), 0, 0};
  std::vector<TranscriptionRecord> docs;
  docs.reserve(cleaned.records.size());
  for (const auto& record : cleaned.records) {
    auto doc = normalize_record(record);
    if (options.drop_empty && doc.words.empty()) {
      ++result.dropped;
      continue;
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) return result;

  const auto model = fit_tfidf(docs);
  for (const auto& doc : docs) {
    auto feature = aggregate(select_top_k(doc, model, options.k), table);
    result.miss_count += feature.miss_count;
    result.features.add(doc.image_id, std::move(feature.vector));
  }
  return result;
}

FeatureTable fuse_tables(const FeatureTable& a, const FeatureTable& b, const FusionSpec& spec) {
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  for (const auto& id : a.ids()) {
    if (!b.contains(id)) only_a.push_back(id);
  }
  for (const auto& id : b.ids()) {
    if (!a.contains(id)) only_b.push_back(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "feature files do not align;";
    if (!only_a.empty()) {
      msg += " only in first:";
      for (const auto& id : only_a) msg += " " + id;
      if (!only_b.empty()) msg += ";";
    }
    if (!only_b.empty()) {
      msg += " only in second:";
      for (const auto& id : only_b) msg += " " + id;
    }
    throw std::invalid_argument(msg);
  }

  const Fuser fuser(spec, a.dim(), b.dim());
  FeatureTable out(fuser.output_dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& id = a.ids()[i];
    out.add(id, fuser(a.rows()[i], b.at(id)));
  }
  return out;
}

namespace {

nlohmann::ordered_json confusion_json(const Evaluation& ev) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < ev.confusion.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < ev.confusion.cols(); ++c) row.push_back(ev.confusion(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::ordered_json TrainEvalReport::to_json() const {
  return {{"classes", class_names},
          {"n_train", n_train},
          {"n_test", n_test},
          {"accuracy", evaluation.accuracy},
          {"accuracy_percent", format_percent(100.0 * evaluation.accuracy)},
          {"correct", evaluation.correct},
          {"confusion", confusion_json(evaluation)},
          {"epoch_loss", epoch_loss}};
}

TrainEvalReport train_eval(const FeatureTable& features, const Manifest& manifest,
                           const TrainConfig& cfg, std::uint64_t init_seed) {
  require_features(manifest, features);
  TrainEvalReport report;
  report.class_names = manifest.labels();
  std::map<std::string, std::size_t, std::less<>> label_index;
  for (std::size_t i = 0; i < report.class_names.size(); ++i) {
    label_index.emplace(report.class_names[i], i);
  }

  std::vector<FeatureVector> train_rows;
  std::vector<FeatureVector> test_rows;
  std::vector<std::size_t> train_labels;
  std::vector<std::size_t> test_labels;
  for (const auto& row : manifest.rows) {
    const auto label = label_index.at(row.label);
    if (row.split == Split::train) {
      train_rows.push_back(features.at(row.image_id));
      train_labels.push_back(label);
    } else {
      test_rows.push_back(features.at(row.image_id));
      test_labels.push_back(label);
    }
  }
  if (train_rows.empty() || test_rows.empty()) {
    throw std::invalid_argument("manifest needs both train and test rows");
  }
  report.n_train = train_rows.size();
  report.n_test = test_rows.size();
  const auto train_set = LabeledSet<double>::from_rows(train_rows, std::move(train_labels));
  const auto test_set = LabeledSet<double>::from_rows(test_rows, std::move(test_labels));

  auto model = init_model<double>(features.dim(), report.class_names, init_seed);
  auto trained = train(std::move(model), train_set, cfg);
  report.evaluation = evaluate(trained.model, test_set);
  report.epoch_loss = std::move(trained.epoch_loss);
  report.model = std::move(trained.model);
  return report;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", percent);
  return buf;
}

void AccuracyTable::set(std::string_view row, std::string_view column, double percent) {
  auto find_or_add = [](std::vector<std::string>& names, std::string_view name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
    names.emplace_back(name);
    return names.size() - 1;
  };
  const auto r = find_or_add(rows, row);
  const auto c = find_or_add(columns, column);
  cells.resize(rows.size());
  for (auto& cell_row : cells) cell_row.resize(columns.size());
  cells[r][c] = percent;
}

std::string AccuracyTable::render() const {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({corner});
  for (const auto& c : columns) grid.front().push_back(c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<std::string> line{rows[r]};
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& v = cells[r][c];
      line.push_back(v ? format_percent(*v) : "-");
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(columns.size() + 1, 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream out;
  if (!title.empty()) out << title << '\n';
  for (std::size_t r = 0; r < grid.size(); ++r) {
    out << '|';
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      out << ' ' << grid[r][c] << std::string(width[c] - grid[r][c].size(), ' ') << " |";
    }
    out << '\n';
    if (r == 0) {
      out << '|';
      for (const auto w : width) out << std::string(w + 2, '-') << '|';
      out << '\n';
    }
  }
  return out.str();
}

nlohmann::ordered_json AccuracyTable::to_json() const {
  auto json_rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& v = cells[r][c];
      values[columns[c]] = v ? nlohmann::ordered_json(format_percent(*v)) : nlohmann::ordered_json();
    }
    json_rows.push_back({{"name", rows[r]}, {"accuracy_percent", values}});
  }
  return {{"title", title}, {"corner", corner}, {"columns", columns}, {"rows", json_rows}};
}

namespace {

std::string scheme_label(FusionScheme scheme) {
  switch (scheme) {
    case FusionScheme::concat:
      return "Concat";
    case FusionScheme::average:
      return "Average";
    case FusionScheme::mcb:
      break;
  }
  return "MCB";
}

FeatureTable restrict_to(const FeatureTable& table, const std::vector<std::string>& ids) {
  FeatureTable out(table.dim());
  for (const auto& id : ids) out.add(id, table.at(id));
  return out;
}

}  // namespace

TopicGridResult topic_grid(const FeatureTable& image_features,
                           const TranscriptionMap& transcriptions,
                           const EmbeddingTable& embeddings, const Manifest& manifest,
                           const TopicGridOptions& options) {
  if (options.ks.empty()) throw std::invalid_argument("no k values given");
  require_features(manifest, image_features, "image features");

  std::vector<TranscriptionRecord> corpus;
  corpus.reserve(manifest.rows.size());
  for (const auto& row : manifest.rows) {
    corpus.push_back(transcription_or_empty(transcriptions, row.image_id));
  }

  TopicGridResult result;
  result.single.title = "Topic classification accuracy (%), single modality";
  result.single.corner = "";
  result.fused.title = "Topic classification accuracy (%), fused image and text";
  result.fused.corner = "Fusion";

  bool first = true;
  Manifest kept;
  FeatureTable image_kept;
  for (const std::size_t k : options.ks) {
    TextFeaturizeOptions text_options{k, options.threshold, options.drop_empty};
    const auto text = featurize_text(corpus, embeddings, text_options);
    if (first) {
      for (const auto& row : manifest.rows) {
        if (text.features.contains(row.image_id)) kept.rows.push_back(row);
      }
      result.images = kept.rows.size();
      result.dropped = text.dropped;
      image_kept = restrict_to(image_features, text.features.ids());
      const auto image_report = train_eval(image_kept, kept, options.train, options.train.seed);
      result.single.set("Accuracy", "Image", 100.0 * image_report.evaluation.accuracy);
      first = false;
    }
    const std::string k_label = "k=" + std::to_string(k);
    const auto text_report = train_eval(text.features, kept, options.train, options.train.seed);
    result.single.set("Accuracy", "Text " + k_label, 100.0 * text_report.evaluation.accuracy);

    for (const auto scheme : options.schemes) {
      FusionSpec spec = options.fusion;
      spec.scheme = scheme;
      const auto fused = fuse_tables(image_kept, text.features, spec);
      const auto report = train_eval(fused, kept, options.train, options.train.seed);
      result.fused.set(scheme_label(scheme), "Image Text " + k_label,
                       100.0 * report.evaluation.accuracy);
    }
  }
  return result;
}

std::string_view to_string(VqaInputs inputs) {
  switch (inputs) {
    case VqaInputs::question:
      return "question";
    case VqaInputs::question_image:
      return "question_image";
    case VqaInputs::question_image_text:
      break;
  }
  return "question_image_text";
}

VqaInputs parse_vqa_inputs(std::string_view name) {
  if (name == "question") return VqaInputs::question;
  if (name == "question_image") return VqaInputs::question_image;
  if (name == "question_image_text") return VqaInputs::question_image_text;
  throw std::invalid_argument("unknown vqa config '" + std::string(name) +
                              "' (expected question, question_image or question_image_text)");
}

namespace {

std::string vqa_column(VqaInputs inputs) {
  switch (inputs) {
    case VqaInputs::question:
      return "Question";
    case VqaInputs::question_image:
      return "Question Image";
    case VqaInputs::question_image_text:
      break;
  }
  return "Question Image Text";
}

std::vector<Split> assign_vqa_splits(const std::vector<VqaRecord>& records,
                                     double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw std::invalid_argument("test fraction must lie in [0, 1]");
  }
  std::vector<Split> splits(records.size(), Split::train);
  std::vector<std::size_t> unassigned;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split) {
      splits[i] = *records[i].split;
    } else {
      unassigned.push_back(i);
    }
  }
  SplitMix64 rng(seed);
  shuffle(std::span<std::size_t>(unassigned), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(unassigned.size())));
  for (std::size_t i = 0; i < n_test; ++i) splits[unassigned[i]] = Split::test;
  return splits;
}

}  // namespace

VqaResult run_vqa(const std::vector<VqaRecord>& records, const EmbeddingTable& embeddings,
                  const FeatureTable* image_features, const FeatureTable* text_features,
                  const VqaOptions& options) {
  if (records.empty()) throw std::invalid_argument("no VQA records");
  if (options.configs.empty()) throw std::invalid_argument("no VQA configs requested");
  if (options.answer_vocab < 2) throw std::invalid_argument("answer vocabulary must be >= 2");
  const auto splits = assign_vqa_splits(records, options.test_fraction, options.split_seed);

  std::map<std::string, std::size_t> answer_counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (splits[i] == Split::train) ++answer_counts[records[i].answer];
  }
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& [answer, count] : answer_counts) ranked.emplace_back(count, answer);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (ranked.size() > options.answer_vocab) ranked.resize(options.answer_vocab);

  VqaResult result;
  std::map<std::string, std::size_t, std::less<>> answer_index;
  for (const auto& [count, answer] : ranked) {
    answer_index.emplace(answer, result.answers.size());
    result.answers.push_back(answer);
  }
  if (result.answers.size() < 2) {
    throw std::invalid_argument("training answers span fewer than 2 classes");
  }

  std::vector<FeatureVector> questions;
  questions.reserve(records.size());
  for (const auto& r : records) questions.push_back(aggregate(tokenize(r.question), embeddings).vector);

  auto needs_image = [](VqaInputs c) { return c != VqaInputs::question; };
  auto needs_text = [](VqaInputs c) { return c == VqaInputs::question_image_text; };
  const bool any_image = std::any_of(options.configs.begin(), options.configs.end(), needs_image);
  const bool any_text = std::any_of(options.configs.begin(), options.configs.end(), needs_text);
  if (any_image) {
    if (image_features == nullptr) throw std::invalid_argument("image features required");
    std::string missing;
    for (const auto& r : records) {
      if (!image_features->contains(r.image_id)) missing += " " + r.image_id;
    }
    if (!missing.empty()) throw std::invalid_argument("VQA images without features:" + missing);
  }
  if (any_text && text_features == nullptr) throw std::invalid_argument("text features required");

  result.table.title = "VQA answer accuracy (%)";
  result.table.corner = "Fusion";
  const std::string row_name = scheme_label(options.fusion.scheme);

  for (const auto config : options.configs) {
    const std::size_t qdim = embeddings.dim();
    std::size_t context_dim = 0;
    if (needs_image(config)) context_dim += image_features->dim();
    if (needs_text(config)) context_dim += text_features->dim();

    std::optional<Fuser> fuser;
    if (config != VqaInputs::question) fuser.emplace(options.fusion, qdim, context_dim);

    auto feature_for = [&](std::size_t i) -> FeatureVector {
      if (!fuser) return questions[i];
      const auto& id = records[i].image_id;
      FeatureVector context = image_features->at(id);
      if (needs_text(config)) {
        const FeatureVector text = text_features->contains(id)
                                       ? text_features->at(id)
                                       : FeatureVector::Zero(static_cast<Eigen::Index>(text_features->dim()));
        context = concat_fuse(context, text);
      }
      return (*fuser)(questions[i], context);
    };

    VqaRun run;
    run.inputs = config;
    std::vector<FeatureVector> train_rows;
    std::vector<FeatureVector> test_rows;
    std::vector<std::size_t> train_labels;
    std::vector<std::size_t> test_labels;
    std::size_t dropped_train = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto it = answer_index.find(records[i].answer);
      if (splits[i] == Split::train) {
        if (it == answer_index.end()) {
          ++dropped_train;
          continue;
        }
        train_rows.push_back(feature_for(i));
        train_labels.push_back(it->second);
      } else {
        ++run.n_test;
        if (it == answer_index.end()) {
          ++run.test_out_of_vocab;
          continue;
        }
        test_rows.push_back(feature_for(i));
        test_labels.push_back(it->second);
      }
    }
    result.dropped_train = dropped_train;
    run.n_train = train_rows.size();
    if (run.n_test == 0) throw std::invalid_argument("VQA split has no test questions");

    const auto dim = train_rows.front().size();
    auto model = init_model<double>(static_cast<std::size_t>(dim), result.answers, options.train.seed);
    auto trained = train(std::move(model),
                         LabeledSet<double>::from_rows(train_rows, std::move(train_labels)),
                         options.train);
    std::size_t correct = 0;
    if (!test_rows.empty()) {
      correct = evaluate(trained.model,
                         LabeledSet<double>::from_rows(test_rows, std::move(test_labels)))
                    .correct;
    }
    run.accuracy = static_cast<double>(correct) / static_cast<double>(run.n_test);
    result.table.set(row_name, vqa_column(config), 100.0 * run.accuracy);
    result.runs.push_back(run);
  }
  return result;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto dim_a = static_cast<std::size_t>(data.train.modality_a.front().size());
  const auto dim_b = static_cast<std::size_t>(data.train.modality_b.front().size());
  FeatureTable a(dim_a);
  FeatureTable b(dim_b);
  Manifest manifest;
  auto emit = [&](const SynthSplit& split, Split which) {
    for (std::size_t i = 0; i < split.labels.size(); ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_%06zu", which == Split::train ? "train" : "test", i);
      a.add(id, split.modality_a[i]);
      b.add(id, split.modality_b[i]);
      manifest.rows.push_back({id, "class_" + std::to_string(split.labels[i]), which});
    }
  };
  emit(data.train, Split::train);
  emit(data.test, Split::test);
  write_features(dir / "modality_a.txt", a);
  write_features(dir / "modality_b.txt", b);
  write_manifest(dir / "manifest.tsv", manifest);
}

namespace {

using Json = nlohmann::ordered_json;

/// Reads config keys with defaults and records every resolved value.
class ConfigReader {
public:
  explicit ConfigReader(const Json& in) : in_(in), resolved_(Json::object()) {}

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    T value = fallback;
    if (in_.contains(key) && !in_.at(key).is_null()) value = in_.at(key).get<T>();
    resolved_[key] = value;
    return value;
  }

  template <typename T>
  T require(const std::string& key) {
    if (!in_.contains(key) || in_.at(key).is_null()) {
      throw std::invalid_argument("missing required option '" + key + "'");
    }
    T value = in_.at(key).get<T>();
    resolved_[key] = value;
    return value;
  }

  bool has(const std::string& key) const { return in_.contains(key) && !in_.at(key).is_null(); }

  Json take() { return std::move(resolved_); }

private:
  const Json& in_;
  Json resolved_;
};

TrainConfig read_train_config(ConfigReader& cfg, std::uint64_t seed) {
  TrainConfig train;
  train.learning_rate = cfg.get<double>("learning_rate", train.learning_rate);
  train.epochs = cfg.get<std::size_t>("epochs", train.epochs);
  train.batch_size = cfg.get<std::size_t>("batch_size", train.batch_size);
  train.l2 = cfg.get<double>("l2", train.l2);
  train.seed = seed;
  train.validate();
  return train;
}

FusionSpec read_fusion(ConfigReader& cfg, std::uint64_t seed, std::string_view default_scheme) {
  FusionSpec spec;
  spec.scheme = parse_fusion_scheme(cfg.get<std::string>("scheme", std::string(default_scheme)));
  spec.sketch_dim = cfg.get<std::size_t>("sketch_dim", spec.sketch_dim);
  spec.seed_a = cfg.get<std::uint64_t>("seed_a", 2 * seed + 1);
  spec.seed_b = cfg.get<std::uint64_t>("seed_b", 2 * seed + 2);
  spec.normalize = cfg.get<bool>("normalize", true);
  spec.validate();
  return spec;
}

Json make_run_manifest(std::string_view command, Json config, Json metrics) {
  return {{"tool", std::string(kToolName)},
          {"version", std::string(kToolVersion)},
          {"command", std::string(command)},
          {"config", std::move(config)},
          {"metrics", std::move(metrics)}};
}

Json cmd_featurize_text(ConfigReader& cfg, std::ostream& human) {
  const auto transcriptions_path = cfg.require<std::string>("transcriptions");
  const auto embeddings_path = cfg.require<std::string>("embeddings");
  const auto out_path = cfg.require<std::string>("out");
  const auto manifest_path = cfg.get<std::string>("manifest", "");
  const auto report_path = cfg.get<std::string>("cleaning_report", "");
  TextFeaturizeOptions options;
  options.k = cfg.get<std::size_t>("k", options.k);
  options.threshold = cfg.get<double>("threshold", options.threshold);
  options.drop_empty = cfg.get<bool>("drop_empty", options.drop_empty);

  const auto embeddings = read_embeddings(std::filesystem::path(embeddings_path));
  auto records = read_transcriptions(std::filesystem::path(transcriptions_path));
  if (!manifest_path.empty()) {
    const auto map = index_transcriptions(std::move(records));
    const auto manifest = load_manifest(manifest_path);
    records.clear();
    for (const auto& row : manifest.rows) records.push_back(transcription_or_empty(map, row.image_id));
  }
  const auto result = featurize_text(records, embeddings, options);
  write_features(std::filesystem::path(out_path), result.features);
  if (!report_path.empty()) {
    auto out = open_output(report_path);
    out << result.cleaning.to_json().dump(2) << '\n';
  }
  human << "wrote " << result.features.size() << " text features (dim "
        << result.features.dim() << ", k=" << options.k << ") to " << out_path << '\n'
        << "cleaning: " << result.cleaning.removed_words << " of "
        << result.cleaning.total_words << " words below " << options.threshold
        << "; dropped images: " << result.dropped
        << "; lexicon misses: " << result.miss_count << '\n';
  return {{"images", result.features.size()},
          {"dim", result.features.dim()},
          {"dropped", result.dropped},
          {"miss_count", result.miss_count},
          {"cleaning", result.cleaning.to_json()}};
}

Json cmd_fuse(ConfigReader& cfg, std::ostream& human) {
  const auto a_path = cfg.require<std::string>("features_a");
  const auto b_path = cfg.require<std::string>("features_b");
  const auto out_path = cfg.require<std::string>("out");
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  const auto spec = read_fusion(cfg, seed, "mcb");
  const auto a = load_features(a_path);
  const auto b = load_features(b_path);
  const auto fused = fuse_tables(a, b, spec);
  write_features(std::filesystem::path(out_path), fused);
  human << "fused " << fused.size() << " rows with " << to_string(spec.scheme) << ": "
        << a.dim() << " + " << b.dim() << " -> " << fused.dim() << " dims, " << out_path << '\n';
  return {{"rows", fused.size()}, {"dim_a", a.dim()}, {"dim_b", b.dim()}, {"dim_out", fused.dim()}};
}

Json cmd_train_eval(ConfigReader& cfg, std::ostream& human) {
  const auto manifest_path = cfg.require<std::string>("manifest");
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  if (cfg.has("features")) {
    const auto features_path = cfg.require<std::string>("features");
    const auto model_path = cfg.get<std::string>("model_out", "");
    const auto train_cfg = read_train_config(cfg, seed);
    const auto manifest = load_manifest(manifest_path);
    const auto features = load_features(features_path);
    const auto report = train_eval(features, manifest, train_cfg, seed);
    if (!model_path.empty()) write_model(std::filesystem::path(model_path), report.model);
    AccuracyTable table;
    table.title = "Classification accuracy (%)";
    table.set(std::filesystem::path(features_path).filename().string(), "Accuracy",
              100.0 * report.evaluation.accuracy);
    human << table.render() << "train " << report.n_train << ", test " << report.n_test
          << ", classes " << report.class_names.size() << '\n';
    return report.to_json();
  }

  const auto image_path = cfg.require<std::string>("image_features");
  const auto transcriptions_path = cfg.require<std::string>("transcriptions");
  const auto embeddings_path = cfg.require<std::string>("embeddings");
  TopicGridOptions options;
  options.ks = cfg.get<std::vector<std::size_t>>("ks", options.ks);
  std::vector<std::string> scheme_names;
  for (const auto s : options.schemes) scheme_names.emplace_back(to_string(s));
  scheme_names = cfg.get<std::vector<std::string>>("schemes", scheme_names);
  options.schemes.clear();
  for (const auto& s : scheme_names) options.schemes.push_back(parse_fusion_scheme(s));
  options.threshold = cfg.get<double>("threshold", options.threshold);
  options.drop_empty = cfg.get<bool>("drop_empty", options.drop_empty);
  options.fusion = read_fusion(cfg, seed, "mcb");
  options.train = read_train_config(cfg, seed);

  const auto manifest = load_manifest(manifest_path);
  const auto image = load_features(image_path);
  const auto transcriptions = load_transcriptions(transcriptions_path);
  const auto embeddings = read_embeddings(std::filesystem::path(embeddings_path));
  const auto grid = topic_grid(image, transcriptions, embeddings, manifest, options);
  human << grid.single.render() << '\n' << grid.fused.render()
        << "images " << grid.images << " (dropped " << grid.dropped << ")\n";
  return {{"images", grid.images},
          {"dropped", grid.dropped},
          {"single", grid.single.to_json()},
          {"fused", grid.fused.to_json()}};
}

Json cmd_vqa(ConfigReader& cfg, std::ostream& human) {
  const auto questions_path = cfg.require<std::string>("questions");
  const auto embeddings_path = cfg.require<std::string>("embeddings");
  const auto image_path = cfg.get<std::string>("image_features", "");
  const auto text_path = cfg.get<std::string>("text_features", "");
  const auto seed = cfg.get<std::uint64_t>("seed", 0);
  VqaOptions options;
  std::vector<std::string> config_names;
  for (const auto c : options.configs) config_names.emplace_back(to_string(c));
  config_names = cfg.get<std::vector<std::string>>("configs", config_names);
  options.configs.clear();
  for (const auto& c : config_names) options.configs.push_back(parse_vqa_inputs(c));
  options.answer_vocab = cfg.get<std::size_t>("answer_vocab", options.answer_vocab);
  options.test_fraction = cfg.get<double>("test_fraction", options.test_fraction);
  options.split_seed = seed;
  options.fusion = read_fusion(cfg, seed, "concat");
  options.train = read_train_config(cfg, seed);

  const bool need_image = std::any_of(options.configs.begin(), options.configs.end(),
                                      [](VqaInputs c) { return c != VqaInputs::question; });
  const bool need_text = std::any_of(options.configs.begin(), options.configs.end(),
                                     [](VqaInputs c) { return c == VqaInputs::question_image_text; });
  std::optional<FeatureTable> image;
  std::optional<FeatureTable> text;
  if (need_image) {
    if (image_path.empty()) throw std::invalid_argument("this vqa config needs image_features");
    image = load_features(image_path);
  }
  if (need_text) {
    if (text_path.empty()) throw std::invalid_argument("this vqa config needs text_features");
    text = load_features(text_path);
  }
  const auto records = load_vqa(questions_path);
  const auto embeddings = read_embeddings(std::filesystem::path(embeddings_path));
  const auto result = run_vqa(records, embeddings, image ? &*image : nullptr,
                              text ? &*text : nullptr, options);
  human << result.table.render() << "answer vocabulary " << result.answers.size() << '\n';
  auto runs = Json::array();
  for (const auto& run : result.runs) {
    runs.push_back({{"config", std::string(to_string(run.inputs))},
                    {"n_train", run.n_train},
                    {"n_test", run.n_test},
                    {"test_out_of_vocab", run.test_out_of_vocab},
                    {"accuracy", run.accuracy},
                    {"accuracy_percent", format_percent(100.0 * run.accuracy)}});
  }
  return {{"answer_vocab", result.answers.size()},
          {"dropped_train", result.dropped_train},
          {"runs", runs},
          {"table", result.table.to_json()}};
}

Json cmd_synth(ConfigReader& cfg, std::ostream& human) {
  const auto out_dir = cfg.require<std::string>("out");
  SynthConfig synth;
  synth.n_train = cfg.get<std::size_t>("n_train", synth.n_train);
  synth.n_test = cfg.get<std::size_t>("n_test", synth.n_test);
  synth.dim_a = cfg.get<std::size_t>("dim_a", synth.dim_a);
  synth.dim_b = cfg.get<std::size_t>("dim_b", synth.dim_b);
  synth.n_classes = cfg.get<std::size_t>("n_classes", synth.n_classes);
  synth.interaction = parse_interaction(
      cfg.get<std::string>("interaction", std::string(to_string(synth.interaction))));
  synth.noise_sigma = cfg.get<double>("noise_sigma", synth.noise_sigma);
  synth.seed = cfg.get<std::uint64_t>("seed", synth.seed);
  const auto data = make_synthetic(synth);
  write_synthetic(data, out_dir);
  human << "wrote " << synth.n_train << " train / " << synth.n_test << " test "
        << to_string(synth.interaction) << " examples to " << out_dir << '\n';
  return {{"n_train", synth.n_train}, {"n_test", synth.n_test},
          {"files", {"modality_a.txt", "modality_b.txt", "manifest.tsv"}}};
}

template <typename T, typename Read, typename Write>
Json round_trip(const std::string& path, const T& value, Read read, Write write, std::size_t count) {
  std::stringstream buffer;
  write(buffer, value);
  const T again = read(buffer, path + " (rewritten)");
  if (!(again == value)) throw std::runtime_error(path + ": round trip changed the contents");
  return {{"path", path}, {"records", count}, {"round_trip", true}};
}

Json cmd_formats_check(ConfigReader& cfg, std::ostream& human) {
  Json metrics = Json::object();
  const auto embeddings = cfg.get<std::string>("embeddings", "");
  const auto transcriptions = cfg.get<std::string>("transcriptions", "");
  const auto features = cfg.get<std::string>("features", "");
  const auto manifest = cfg.get<std::string>("manifest", "");
  const auto vqa = cfg.get<std::string>("vqa", "");
  const auto model = cfg.get<std::string>("model", "");

  if (!embeddings.empty()) {
    const auto t = read_embeddings(std::filesystem::path(embeddings));
    metrics["embeddings"] = round_trip(
        embeddings, t, [](std::istream& in, const std::string& s) { return read_embeddings(in, s); },
        [](std::ostream& out, const EmbeddingTable& v) { write_embeddings(out, v); }, t.size());
  }
  if (!transcriptions.empty()) {
    const auto t = read_transcriptions(std::filesystem::path(transcriptions));
    metrics["transcriptions"] = round_trip(
        transcriptions, t,
        [](std::istream& in, const std::string& s) { return read_transcriptions(in, s); },
        [](std::ostream& out, const std::vector<TranscriptionRecord>& v) { write_transcriptions(out, v); },
        t.size());
  }
  if (!features.empty()) {
    const auto t = read_features(std::filesystem::path(features));
    metrics["features"] = round_trip(
        features, t, [](std::istream& in, const std::string& s) { return read_features(in, s); },
        [](std::ostream& out, const FeatureTable& v) { write_features(out, v); }, t.size());
  }
  if (!manifest.empty()) {
    const auto t = load_manifest(manifest);
    metrics["manifest"] = round_trip(
        manifest, t, [](std::istream& in, const std::string& s) { return read_manifest(in, s); },
        [](std::ostream& out, const Manifest& v) { write_manifest(out, v); }, t.rows.size());
  }
  if (!vqa.empty()) {
    const auto t = load_vqa(vqa);
    metrics["vqa"] = round_trip(
        vqa, t, [](std::istream& in, const std::string& s) { return read_vqa(in, s); },
        [](std::ostream& out, const std::vector<VqaRecord>& v) { write_vqa(out, v); }, t.size());
  }
  if (!model.empty()) {
    const auto t = read_model(std::filesystem::path(model));
    metrics["model"] = round_trip(
        model, t, [](std::istream& in, const std::string& s) { return read_model(in, s); },
        [](std::ostream& out, const ClassifierModel<double>& v) { write_model(out, v); },
        t.num_classes());
  }
  if (metrics.empty()) throw std::invalid_argument("formats-check: no files given");
  for (const auto& [kind, info] : metrics.items()) {
    human << kind << ": " << info["path"].get<std::string>() << ", "
          << info["records"].get<std::size_t>() << " records, round trip ok\n";
  }
  return metrics;
}

}  // namespace

nlohmann::ordered_json run_command(std::string_view command, const nlohmann::ordered_json& config,
                                   std::ostream& human) {
  ConfigReader cfg(config);
  Json metrics;
  if (command == "featurize-text") {
    metrics = cmd_featurize_text(cfg, human);
  } else if (command == "fuse") {
    metrics = cmd_fuse(cfg, human);
  } else if (command == "train-eval") {
    metrics = cmd_train_eval(cfg, human);
  } else if (command == "vqa") {
    metrics = cmd_vqa(cfg, human);
  } else if (command == "synth") {
    metrics = cmd_synth(cfg, human);
  } else if (command == "formats-check") {
    metrics = cmd_formats_check(cfg, human);
  } else {
    throw std::invalid_argument("unknown command '" + std::string(command) + "'");
  }
  return make_run_manifest(command, cfg.take(), std::move(metrics));
}

nlohmann::ordered_json replay(const nlohmann::ordered_json& run_manifest, std::ostream& human) {
  if (run_manifest.value("tool", "") != kToolName) {
    throw std::invalid_argument("not an adfuse run manifest");
  }
  return run_command(run_manifest.at("command").get<std::string>(), run_manifest.at("config"),
                     human);
}

}  // namespace adfuse
