#ifndef ADFUSE_DATASETS_HPP
#define ADFUSE_DATASETS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adfuse/feature_io.hpp"
#include "adfuse/text_features.hpp"

namespace adfuse {

enum class Split { train, test };

struct ManifestRow {
  std::string image_id;
  std::string label;
  Split split = Split::train;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

struct Manifest {
  std::vector<ManifestRow> rows;

  /// Sorted distinct labels across both splits.
  std::vector<std::string> labels() const;
  std::vector<std::string> ids() const;
  std::size_t count(Split split) const;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// TSV, one "image_id\tlabel\tsplit" row per line, split in {train, test}.
Manifest read_manifest(std::istream& in, const std::string& source = "<stream>");
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

FeatureTable load_features(const std::filesystem::path& path);

/// Throws std::invalid_argument naming every manifest id missing from the table.
void require_features(const Manifest& manifest, const FeatureTable& features,
                      const std::string& what = "features");

using TranscriptionMap = std::map<std::string, TranscriptionRecord, std::less<>>;

TranscriptionMap load_transcriptions(const std::filesystem::path& path);
TranscriptionMap index_transcriptions(std::vector<TranscriptionRecord> records);

/// The record for id, or an empty one when the image has no transcription.
TranscriptionRecord transcription_or_empty(const TranscriptionMap& map,
                                           const std::string& id);

struct VqaRecord {
  std::string image_id;
  std::string question;
  std::string answer;
  /// Optional explicit split; records without one are split by seed.
  std::optional<Split> split;

  friend bool operator==(const VqaRecord&, const VqaRecord&) = default;
};

// JSON lines: {"image_id": ..., "question": ..., "answer": ...[, "split": ...]}
std::vector<VqaRecord> read_vqa(std::istream& in, const std::string& source = "<stream>");
std::vector<VqaRecord> load_vqa(const std::filesystem::path& path);
void write_vqa(std::ostream& out, const std::vector<VqaRecord>& records);

struct CleaningReport {
  double threshold = 0.0;
  std::size_t records = 0;
  std::size_t total_words = 0;
  std::size_t surviving_words = 0;
  std::size_t removed_words = 0;
  std::size_t emptied_records = 0;
  /// Words removed per image, in corpus order.
  std::vector<std::pair<std::string, std::size_t>> removed_per_image;

  nlohmann::ordered_json to_json() const;
};

struct CleanedCorpus {
  std::vector<TranscriptionRecord> records;
  CleaningReport report;
};

/// Confidence filter per record. Records left without words are kept.
CleanedCorpus clean_corpus(const std::vector<TranscriptionRecord>& records,
                           double threshold = 0.70);

enum class Interaction { additive, multiplicative };

struct SynthConfig {
  std::size_t n_train = 4000;
  std::size_t n_test = 1000;
  std::size_t dim_a = 32;
  std::size_t dim_b = 32;
  std::size_t n_classes = 8;
  Interaction interaction = Interaction::multiplicative;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthSplit {
  std::vector<FeatureVector> modality_a;
  std::vector<FeatureVector> modality_b;
  std::vector<std::size_t> labels;
  /// Prototype indices (i, j) behind each example.
  std::vector<std::pair<std::size_t, std::size_t>> prototypes;
};

struct SynthData {
  SynthSplit train;
  SynthSplit test;
};

/// Two-modality Gaussian-prototype data. Each modality has n_classes
/// prototypes. Additive: both modalities use prototype c, so either one
/// identifies the class. Multiplicative: prototype indices i, j are uniform
/// and the class is (i + j) mod n_classes, so neither modality alone carries
/// information about it.
SynthData make_synthetic(const SynthConfig& cfg);

std::string_view to_string(Split split);
std::string_view to_string(Interaction interaction);
Split parse_split(std::string_view name);
Interaction parse_interaction(std::string_view name);

}  // namespace adfuse

#endif  // ADFUSE_DATASETS_HPP
