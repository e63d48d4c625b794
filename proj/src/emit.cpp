#include "stefan/emit.hpp"

#include <charconv>
#include <fstream>

#include "stefan/errors.hpp"

namespace stefan {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failure: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string body;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) body += ',';
    body += header[i];
  }
  body += '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) body += ',';
      body += row[i];
    }
    body += '\n';
  }
  write_text_file(path, body);
}

} // namespace stefan
