// Small text-output helpers shared by persistence, reports, and the CLI.
#pragma once

#include <string>
#include <vector>

namespace dc {

// Shortest decimal form that parses back to the same double (std::to_chars).
std::string format_double(double v);

// Fixed 17-significant-digit decimal form; also round-trips bit-exactly.
std::string format_double17(double v);

// Writes via a temp file + rename so partially written artifacts never
// appear under the final name.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

// One CSV row; no quoting (emitted values never contain commas).
std::string csv_row(const std::vector<std::string>& cells);

}  // namespace dc
