#ifndef ADFUSE_TEXT_FEATURES_HPP
#define ADFUSE_TEXT_FEATURES_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace adfuse {

struct TranscribedWord {
  std::string token;
  double confidence = 1.0;

  friend bool operator==(const TranscribedWord&,
                         const TranscribedWord&) = default;
};

/// OCR output for one image. Words may be empty.
struct TranscriptionRecord {
  std::string image_id;
  std::vector<TranscribedWord> words;

  friend bool operator==(const TranscriptionRecord&,
                         const TranscriptionRecord&) = default;
};

/// Token -> dense vector lexicon of fixed dimension.
class EmbeddingTable {
public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Throws std::invalid_argument on wrong length, duplicate or empty token.
  void insert(std::string token, Eigen::VectorXd vector);

  /// nullptr when the token is out of lexicon.
  const Eigen::VectorXd* find(std::string_view token) const;

  /// Tokens in ascending order.
  std::vector<std::string> tokens() const;

  bool operator==(const EmbeddingTable& other) const;

private:
  std::size_t dim_;
  std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

/// Document frequencies over a transcription corpus.
struct TfIdfModel {
  std::size_t doc_count = 0;
  std::map<std::string, std::size_t, std::less<>> doc_freq;

  /// ln(N / df), with df = 1 for tokens never seen during fitting.
  double idf(std::string_view token) const;
};

struct TextFeature {
  Eigen::VectorXd vector;
  std::vector<std::string> selected;
  std::size_t miss_count = 0;
};

/// Lowercase and split on every non-alphanumeric byte.
std::vector<std::string> tokenize(std::string_view raw);

/// Re-tokenizes each word, so "Wi-Fi" at 0.8 becomes "wi" and "fi" at 0.8.
/// Words that tokenize to nothing are dropped.
TranscriptionRecord normalize_record(const TranscriptionRecord& record);

/// Throws std::invalid_argument("empty corpus") for an empty corpus.
TfIdfModel fit_tfidf(const std::vector<TranscriptionRecord>& corpus);

/// Up to k distinct tokens by descending tf * ln(N/df), ties by ascending
/// token. tf is the raw count within the record.
std::vector<std::string> select_top_k(const TranscriptionRecord& record,
                                      const TfIdfModel& model, std::size_t k);

/// Sums embeddings of the tokens found in the table, in ascending token order
/// so the result does not depend on input order. Misses are counted.
TextFeature aggregate(const std::vector<std::string>& tokens,
                      const EmbeddingTable& table);

/// Keeps words with confidence >= threshold, order preserved.
TranscriptionRecord filter_by_confidence(const TranscriptionRecord& record,
                                         double threshold);

// Embedding table text format: "<count> <dim>" header, then
// "<token> <v1> ... <vdim>" per line.
EmbeddingTable read_embeddings(std::istream& in,
                               const std::string& source = "<stream>");
EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingTable& table);

// Transcriptions as JSON lines:
// {"image_id": "...", "words": [{"token": "...", "conf": 0.9}, ...]}
std::vector<TranscriptionRecord> read_transcriptions(
    std::istream& in, const std::string& source = "<stream>");
std::vector<TranscriptionRecord> read_transcriptions(
    const std::filesystem::path& path);
void write_transcriptions(std::ostream& out,
                          const std::vector<TranscriptionRecord>& records);
void write_transcriptions(const std::filesystem::path& path,
                          const std::vector<TranscriptionRecord>& records);

}  // namespace adfuse

#endif  // ADFUSE_TEXT_FEATURES_HPP
