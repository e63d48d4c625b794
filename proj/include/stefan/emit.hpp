#pragma once

#include <string>
#include <vector>

namespace stefan {

// Shortest decimal form that round-trips to the same double, so repeated
// runs with identical inputs produce byte-identical files.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace stefan
