#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

#include "latentedit/error.hpp"

namespace latentedit {

/// Dense row-major matrix; rows are samples throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
    return x.allFinite();
}

inline void require_dim(Index got, Index want, const char* what) {
    if (got != want) {
        fail(ErrorCode::DimensionMismatch,
             std::string(what) + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
    }
}

}  // namespace latentedit
