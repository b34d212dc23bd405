#include "adfuse/feature_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "adfuse/io_util.hpp"

namespace adfuse {

void FeatureTable::add(std::string id, FeatureVector values) {
  if (id.empty()) throw std::invalid_argument("empty feature id");
  if (static_cast<std::size_t>(values.size()) != dim_) {
    throw std::invalid_argument("feature '" + id + "' has dim " +
                                std::to_string(values.size()) + ", expected " +
                                std::to_string(dim_));
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("feature '" + id + "' has non-finite entries");
  }
  if (!index_.emplace(id, ids_.size()).second) {
    throw std::invalid_argument("duplicate feature id '" + id + "'");
  }
  ids_.push_back(std::move(id));
  rows_.push_back(std::move(values));
}

const FeatureVector& FeatureTable::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("no feature for id '" + id + "'");
  return rows_[it->second];
}

FeatureTable read_features(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_spaces(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_size(header[0], count) ||
      !parse_size(header[1], dim)) {
    throw ParseError(source, 1, "expected header '<count> <dim>'");
  }

  FeatureTable table(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(source, line_no, "expected '<image_id>\\t<values>'");
    }
    const std::string_view view(line);
    const auto fields = split_spaces(view.substr(tab + 1));
    if (fields.size() != dim) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size()));
    }
    FeatureVector values(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_real(fields[i], values[static_cast<Eigen::Index>(i)])) {
        throw ParseError(source, line_no, "bad number '" + std::string(fields[i]) + "'");
      }
    }
    try {
      table.add(line.substr(0, tab), std::move(values));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (table.size() != count) {
    throw ParseError(source, line_no,
                     "header declares " + std::to_string(count) + " rows, found " +
                         std::to_string(table.size()));
  }
  return table;
}

FeatureTable read_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_features(in, path.string());
}

void write_features(std::ostream& out, const FeatureTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.ids()[r] << '\t';
    const auto& row = table.rows()[r];
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (i > 0) out << ' ';
      out << format_real(row[i]);
    }
    out << '\n';
  }
}

void write_features(const std::filesystem::path& path, const FeatureTable& table) {
  auto out = open_output(path);
  write_features(out, table);
}

}  // namespace adfuse
