#pragma once

#include "acl/types.hpp"

#include <string_view>
#include <utility>

namespace acl::linalg {

/// Cholesky factorization; throws std::invalid_argument naming `what` if `a`
/// is not symmetric positive definite.
Eigen::LLT<Matrix> cholesky(const Matrix& a, std::string_view what = "matrix");

bool is_spd(const Matrix& a);

/// (a + a^T) / 2
Matrix symmetrize(const Matrix& a);

/// Inverse of an SPD matrix via a Cholesky solve against the identity.
Matrix spd_inverse(const Matrix& a, std::string_view what = "matrix");

/// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> eig_extremes(const Matrix& a);

/// Principal square root of a symmetric PSD matrix; eigenvalues below
/// `clamp` are raised to `clamp` first.
Matrix sym_sqrt(const Matrix& a, double clamp = 1e-12);

}  // namespace acl::linalg
