#pragma once

#include "lowrank/common.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lowrank {

using Sample2D = std::vector<std::pair<double, double>>;

/// Matrix text format: first line "d1 d2", then d1 rows of d2
/// space-separated decimals. Readers throw ParseError with the offending
/// line and field on malformed input.
Matrix read_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix_file(const std::string& path, const Matrix& m);

/// Sample text format: one point per line, two space-separated decimals.
Sample2D read_sample(std::istream& in);
Sample2D read_sample_file(const std::string& path);
void write_sample(std::ostream& out, const Sample2D& pts);
void write_sample_file(const std::string& path, const Sample2D& pts);

/// Shortest round-trippable decimal representation of a double.
std::string format_double(double x);

} // namespace lowrank
