#include "relscope/tsv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "relscope/errors.hpp"

namespace relscope {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_double17(double v) {
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != last)
    throw InputError("not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v)) throw InputError("non-finite value: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InputError("not an integer: '" + std::string(s) + "'");
  return v;
}

TsvReader::TsvReader(const std::filesystem::path& path,
                     std::span<const std::string_view> expected_header)
    : path_(path), in_(path) {
  if (!in_) throw IoError("cannot open " + path.string());
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.empty()) continue;
    for (auto f : split_tabs(line_)) header_.emplace_back(f);
    break;
  }
  if (header_.size() < expected_header.size())
    throw ParseError(path.string() + ": line " + std::to_string(line_no_) + ": expected header with " +
                     std::to_string(expected_header.size()) + " columns");
  for (std::size_t i = 0; i < expected_header.size(); ++i)
    if (header_[i] != expected_header[i])
      throw ParseError(path.string() + ": line " + std::to_string(line_no_) + ": header column " +
                       std::to_string(i + 1) + " is '" + header_[i] + "', expected '" +
                       std::string(expected_header[i]) + "'");
}

bool TsvReader::next() {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.empty()) continue;
    fields_ = split_tabs(line_);
    return true;
  }
  return false;
}

OutputFile::OutputFile(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path, std::ios::binary);
  if (!out_) throw IoError("cannot write " + path.string());
}

void OutputFile::close() {
  if (closed_) return;
  closed_ = true;
  out_.flush();
  const bool ok = static_cast<bool>(out_);
  out_.close();
  if (!ok) throw IoError("write failed for " + path_.string());
}

OutputFile::~OutputFile() {
  if (!closed_) out_.close();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace relscope
