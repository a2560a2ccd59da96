#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace handover {

// Shortest fixed-width decimal form that round-trips a double exactly
// (17 significant digits).
std::string format_double(double v);

// Comma-joined format_double of every entry.
std::string format_vector(const Eigen::VectorXd& v);

double parse_double(std::string_view s);

// FNV-1a over the bytes of a string; used for config fingerprints.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::string> split_lines(const std::string& text);

}  // namespace handover
