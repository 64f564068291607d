#pragma once

#include <string>
#include <vector>

#include "inkscore/errors.hpp"

namespace inkscore {

// RFC-4180 flavoured: comma separated, double quotes around fields that need
// them, quotes doubled inside, newlines allowed inside quoted fields. LF and
// CRLF records both accepted.
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace inkscore
