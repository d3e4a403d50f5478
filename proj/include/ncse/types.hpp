#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace ncse {

// All numerics are 64-bit; gradient checks and serialization depend on it.
using Scalar = double;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

using RngSeed = std::uint64_t;

}  // namespace ncse
