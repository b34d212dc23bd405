#ifndef ADFUSE_PIPELINE_HPP
#define ADFUSE_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adfuse/classifier.hpp"
#include "adfuse/datasets.hpp"
#include "adfuse/feature_io.hpp"
#include "adfuse/sketch.hpp"
#include "adfuse/text_features.hpp"

namespace adfuse {

inline constexpr std::string_view kToolName = "adfuse";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct TextFeaturizeOptions {
  std::size_t k = 5;
  double threshold = 0.70;
  /// Drop images whose cleaned transcription is empty instead of emitting a
  /// zero vector for them.
  bool drop_empty = false;
};

struct TextFeaturizeResult {
  FeatureTable features;
  CleaningReport cleaning;
  std::size_t miss_count = 0;
  std::size_t dropped = 0;
};

/// clean -> tokenize -> fit tf-idf -> top-k -> embedding sum, per record, in
/// corpus order.
TextFeaturizeResult featurize_text(const std::vector<TranscriptionRecord>& corpus,
                                   const EmbeddingTable& table,
                                   const TextFeaturizeOptions& options);

/// Row-wise fusion in the order of `a`. The id sets must match exactly.
FeatureTable fuse_tables(const FeatureTable& a, const FeatureTable& b, const FusionSpec& spec);

struct TrainEvalReport {
  std::vector<std::string> class_names;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Evaluation evaluation;
  std::vector<double> epoch_loss;
  ClassifierModel<double> model;

  nlohmann::ordered_json to_json() const;
};

/// Builds the class list from the manifest, trains on the train split and
/// reports top-1 on the test split.
TrainEvalReport train_eval(const FeatureTable& features, const Manifest& manifest,
                           const TrainConfig& cfg, std::uint64_t init_seed);

/// Percent accuracies laid out as rows x columns.
struct AccuracyTable {
  std::string title;
  std::string corner;
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> cells;

  void set(std::string_view row, std::string_view column, double percent);
  std::string render() const;
  nlohmann::ordered_json to_json() const;
};

/// Two decimals, e.g. 10.93.
std::string format_percent(double percent);

struct TopicGridOptions {
  std::vector<std::size_t> ks{5, 35, 100};
  std::vector<FusionScheme> schemes{FusionScheme::concat, FusionScheme::mcb};
  double threshold = 0.70;
  bool drop_empty = true;
  FusionSpec fusion;
  TrainConfig train;
};

struct TopicGridResult {
  /// Image alone and text alone per k.
  AccuracyTable single;
  /// Fusion schemes x k.
  AccuracyTable fused;
  std::size_t images = 0;
  std::size_t dropped = 0;
};

TopicGridResult topic_grid(const FeatureTable& image_features,
                           const TranscriptionMap& transcriptions,
                           const EmbeddingTable& embeddings, const Manifest& manifest,
                           const TopicGridOptions& options);

enum class VqaInputs { question, question_image, question_image_text };

std::string_view to_string(VqaInputs inputs);
VqaInputs parse_vqa_inputs(std::string_view name);

struct VqaOptions {
  std::vector<VqaInputs> configs{VqaInputs::question, VqaInputs::question_image,
                                 VqaInputs::question_image_text};
  std::size_t answer_vocab = 1000;
  /// Used for records without an explicit split.
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  FusionSpec fusion{FusionScheme::concat};
  TrainConfig train;
};

struct VqaRun {
  VqaInputs inputs = VqaInputs::question;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t test_out_of_vocab = 0;
  double accuracy = 0.0;
};

struct VqaResult {
  std::vector<std::string> answers;
  std::size_t dropped_train = 0;
  std::vector<VqaRun> runs;
  AccuracyTable table;
};

/// Answer classification over the top answer_vocab training answers. Test
/// questions whose answer is outside the vocabulary count as errors.
/// image/text may be null when no requested config needs them.
VqaResult run_vqa(const std::vector<VqaRecord>& records, const EmbeddingTable& embeddings,
                  const FeatureTable* image_features, const FeatureTable* text_features,
                  const VqaOptions& options);

/// Writes modality_a.txt, modality_b.txt and manifest.tsv into dir.
void write_synthetic(const SynthData& data, const std::filesystem::path& dir);

/// Runs one CLI subcommand from a JSON config (missing keys take their
/// defaults) and returns the run manifest: tool, version, command, the fully
/// resolved config and the metrics. Human-readable tables go to `human`.
nlohmann::ordered_json run_command(std::string_view command,
                                   const nlohmann::ordered_json& config,
                                   std::ostream& human);

/// Re-executes a run manifest produced by run_command.
nlohmann::ordered_json replay(const nlohmann::ordered_json& run_manifest, std::ostream& human);

}  // namespace adfuse

#endif  // ADFUSE_PIPELINE_HPP
