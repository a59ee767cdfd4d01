#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace nfvs {

// %.17g keeps doubles round-trip exact, so repeated runs produce
// byte-identical files.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_num(std::int64_t v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }

// Row-oriented CSV buffer with LF line ends.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::string header) { buf_ = std::move(header) += '\n'; }

  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((append_cell(cells, first), first = false), ...);
    buf_ += '\n';
  }

  const std::string& str() const { return buf_; }

 private:
  void append_cell(const std::string& s, bool first) {
    if (!first) buf_ += ',';
    buf_ += s;
  }
  void append_cell(const char* s, bool first) {
    if (!first) buf_ += ',';
    buf_ += s;
  }
  void append_cell(double v, bool first) { append_cell(csv_num(v), first); }
  void append_cell(std::int64_t v, bool first) { append_cell(csv_num(v), first); }
  void append_cell(int v, bool first) { append_cell(csv_num(v), first); }

  std::string buf_;
};

}  // namespace nfvs
