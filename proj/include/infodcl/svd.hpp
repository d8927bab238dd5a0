#pragma once

#include <vector>

#include "infodcl/common.hpp"

namespace infodcl {

// Rank-d factorization y ~= u * diag(sigma) * v^T.
//   u: batch x d row coefficients
//   sigma: d singular values, descending, non-negative
//   v: D x d orthonormal columns
struct SVDFactors {
    Mat u;
    std::vector<double> sigma;
    Mat v;

    std::vector<double> top_right_singular_vector() const;
    Mat reconstruct() const;
};

// Truncated SVD via one-sided Jacobi rotations. Best rank-d approximation in
// the Frobenius sense; ranks below d are padded with zero singular values.
SVDFactors truncated_svd(const Mat& y, int rank);

}  // namespace infodcl
