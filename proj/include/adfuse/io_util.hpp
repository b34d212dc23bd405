#ifndef ADFUSE_IO_UTIL_HPP
#define ADFUSE_IO_UTIL_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adfuse {

/// Malformed input file. what() carries "<source>:<line>: <message>".
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " +
                           message),
        source_(source),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string source_;
  std::size_t line_;
};

/// Decimal with 17 significant digits; parses back to the same double.
std::string format_real(double value);

/// Strict decimal parse of the whole field.
bool parse_real(std::string_view text, double& out);
bool parse_size(std::string_view text, std::size_t& out);

/// Split on runs of ' ' (empty fields dropped).
std::vector<std::string_view> split_spaces(std::string_view line);
std::vector<std::string_view> split_char(std::string_view line, char sep);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace adfuse

#endif  // ADFUSE_IO_UTIL_HPP
