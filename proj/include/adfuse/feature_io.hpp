#ifndef ADFUSE_FEATURE_IO_HPP
#define ADFUSE_FEATURE_IO_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "adfuse/sketch.hpp"

namespace adfuse {

/// Id-keyed feature vectors of one dimension, kept in file order.
class FeatureTable {
public:
  explicit FeatureTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  /// Throws std::invalid_argument on a duplicate id, wrong length or a
  /// non-finite entry.
  void add(std::string id, FeatureVector values);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  /// Throws std::out_of_range for unknown ids.
  const FeatureVector& at(const std::string& id) const;

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<FeatureVector>& rows() const noexcept { return rows_; }

  bool operator==(const FeatureTable& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && rows_ == other.rows_;
  }

private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<FeatureVector> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// "<count> <dim>" header, then "<image_id>\t<v1> <v2> ... <vdim>" per row.
FeatureTable read_features(std::istream& in, const std::string& source = "<stream>");
FeatureTable read_features(const std::filesystem::path& path);
void write_features(std::ostream& out, const FeatureTable& table);
void write_features(const std::filesystem::path& path, const FeatureTable& table);

}  // namespace adfuse

#endif  // ADFUSE_FEATURE_IO_HPP
