#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace glidernav::detail {

/// Iterates LF-terminated lines. `terminated()` reports whether the most
/// recent line ended with LF (a torn trailing line did not).
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line);
  bool terminated() const { return terminated_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  bool terminated_ = true;
};

std::vector<std::string_view> split_ws(std::string_view s);
std::string_view trim(std::string_view s);

/// Whole-token numeric parsing; throws ParseError on junk.
double to_double(std::string_view s);
std::size_t to_size(std::string_view s);
long long to_int(std::string_view s);

std::string read_file(const std::string& path);
/// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::string& path, std::string_view bytes);

/// 64-bit FNV-1a.
unsigned long long fnv1a(std::string_view s);

}  // namespace glidernav::detail
