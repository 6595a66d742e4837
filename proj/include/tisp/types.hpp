#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tisp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Sorted 0-based column indices.
using Support = std::vector<Index>;

} // namespace tisp
