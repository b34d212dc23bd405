#include <istream>
#include <ostream>
#include <set>

#include "adfuse/classifier.hpp"
#include "adfuse/io_util.hpp"

namespace adfuse {

void write_model(std::ostream& out, const ClassifierModel<double>& m) {
  out << m.num_classes() << ' ' << m.input_dim() << '\n';
  for (std::size_t c = 0; c < m.class_names.size(); ++c) {
    if (c > 0) out << '\t';
    out << m.class_names[c];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) {
      out << format_real(m.weights(r, c)) << ' ';
    }
    out << format_real(m.bias[r]) << '\n';
  }
}

void write_model(const std::filesystem::path& path, const ClassifierModel<double>& m) {
  auto out = open_output(path);
  write_model(out, m);
}

ClassifierModel<double> read_model(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  const auto header = split_spaces(line);
  std::size_t classes = 0;
  std::size_t dim = 0;
  if (header.size() != 2 || !parse_size(header[0], classes) ||
      !parse_size(header[1], dim) || classes < 2 || dim == 0) {
    throw ParseError(source, 1, "expected header 'C D' with C >= 2, D >= 1");
  }
  if (!std::getline(in, line)) throw ParseError(source, 2, "missing class names");
  ClassifierModel<double> m;
  for (const auto name : split_char(line, '\t')) m.class_names.emplace_back(name);
  if (m.class_names.size() != classes) {
    throw ParseError(source, 2, "expected " + std::to_string(classes) + " class names");
  }
  if (std::set<std::string>(m.class_names.begin(), m.class_names.end()).size() != classes) {
    throw ParseError(source, 2, "duplicate class names");
  }
  const auto rows = static_cast<Eigen::Index>(classes);
  const auto cols = static_cast<Eigen::Index>(dim);
  m.weights.resize(rows, cols);
  m.bias.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t line_no = 3 + static_cast<std::size_t>(r);
    if (!std::getline(in, line)) throw ParseError(source, line_no, "missing weight row");
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1) {
      throw ParseError(source, line_no, "expected " + std::to_string(dim + 1) + " values");
    }
    for (std::size_t c = 0; c <= dim; ++c) {
      double v = 0.0;
      if (!parse_real(fields[c], v) || !std::isfinite(v)) {
        throw ParseError(source, line_no, "bad number '" + std::string(fields[c]) + "'");
      }
      if (c < dim) {
        m.weights(r, static_cast<Eigen::Index>(c)) = v;
      } else {
        m.bias[r] = v;
      }
    }
  }
  return m;
}

ClassifierModel<double> read_model(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_model(in, path.string());
}

}  // namespace adfuse
