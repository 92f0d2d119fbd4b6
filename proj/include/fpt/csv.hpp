#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace fpt {

/// Comma-separated writer with a fixed header. Doubles are written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string> header);

  template <class... Ts>
  void row(const Ts&... fields) {
    std::ostringstream line;
    line.precision(17);
    bool first = true;
    ((line << (first ? "" : ","), put(line, fields), first = false), ...);
    out_ << line.str() << '\n';
  }

 private:
  template <class T>
  static void put(std::ostringstream& line, const T& v) {
    line << v;
  }
  static void put(std::ostringstream& line, const std::string& v) { line << quote(v); }
  static void put(std::ostringstream& line, const char* v) { line << quote(v); }
  /// RFC 4180 quoting for fields with separators or quotes.
  static std::string quote(const std::string& v);

  std::ofstream out_;
};

}  // namespace fpt
