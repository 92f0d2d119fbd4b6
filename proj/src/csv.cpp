#include "fpt/csv.hpp"

#include "fpt/errors.hpp"

namespace fpt {

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<std::string> header) : out_(path) {
  if (!out_) throw ConfigError("out: cannot open " + path + " for writing");
  bool first = true;
  for (const auto& h : header) {
    out_ << (first ? "" : ",") << quote(h);
    first = false;
  }
  out_ << '\n';
}

std::string CsvWriter::quote(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace fpt
