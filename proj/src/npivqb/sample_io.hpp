#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "npivqb/design.hpp"

namespace npivqb {

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Reads a CSV whose header is exactly `y,x,w`. Distinct error codes for an
// empty file, a missing header, malformed rows and out-of-range x/w.
Sample load_csv(const std::string& path);
void save_csv(const Sample& sample, const std::string& path);

// One row per draw, header b1,...,bd.
void save_draws_csv(const Eigen::MatrixXd& draws, const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace npivqb
