#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relscope {

std::vector<std::string_view> split_tabs(std::string_view line);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);
/// Fixed 17 significant digits (`%.17g`).
std::string format_double17(double v);

/// Throws InputError on anything other than a complete, finite number.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

/// Line-oriented TSV reader that tracks 1-based line numbers and validates
/// the header row. Blank lines are skipped.
class TsvReader {
 public:
  /// Throws IoError when the file cannot be opened, ParseError when the
  /// header does not start with `expected_header`.
  TsvReader(const std::filesystem::path& path, std::span<const std::string_view> expected_header);

  /// Header columns as read.
  const std::vector<std::string>& header() const { return header_; }

  /// Advances to the next non-blank row; false at end of file.
  bool next();
  std::size_t line_number() const { return line_no_; }
  const std::vector<std::string_view>& fields() const { return fields_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string line_;
  std::vector<std::string> header_;
  std::vector<std::string_view> fields_;
  std::size_t line_no_ = 0;
};

/// Output stream that throws IoError on open failure and on close if any
/// write failed.
class OutputFile {
 public:
  explicit OutputFile(const std::filesystem::path& path);
  std::ofstream& stream() { return out_; }
  void close();
  ~OutputFile();

  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool closed_ = false;
};

std::string read_text_file(const std::filesystem::path& path);

}  // namespace relscope
