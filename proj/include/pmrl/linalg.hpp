#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pmrl/matrix.hpp"

namespace pmrl {

// Singular values below this are treated as exactly zero (pseudo-inverse,
// null-space completion of U).
inline constexpr double kNullThreshold = 1e-10;

// Clamp for the 1/(sigma_j^2 - sigma_i^2) denominators in the SVD backward.
// Exact spectral crossings occur at initialization and at full alignment.
inline constexpr double kDegenerateGap = 1e-8;

// Thin SVD factors with canonicalized singular-vector signs: for each j the
// entries of v_j sum to a nonnegative value; when that sum is ~0 the first
// significant entry of u_j is nonnegative instead.
struct SvdResult {
  Matrix u;                   // d x k, orthonormal columns
  std::vector<double> sigma;  // length k, descending, nonnegative
  Matrix v;                   // k x k, orthonormal columns
};

struct GramMatrix {
  Matrix g;  // k x k, symmetric; unit diagonal when built from unit columns
};

struct SymEigResult {
  std::vector<double> values;  // descending
  Matrix vectors;              // orthonormal columns, vectors.col(j) <-> values[j]
};

// Rescale each column to unit Euclidean norm. Throws ZeroColumn when a
// column norm is below 1e-12.
Matrix normalize_columns(const Matrix& m);

// G = Z^T Z, built exactly symmetric. Throws DimensionMismatch for fewer
// than 2 columns.
GramMatrix gram(const Matrix& z);

// Cyclic Jacobi eigendecomposition for small symmetric matrices (k <= 16).
// Throws NotSymmetric (asymmetry above 1e-10) and NotConverged (more than
// 100 sweeps).
SymEigResult sym_eig(const Matrix& s);

// Thin SVD of a d x k matrix (d >= k >= 2) via Jacobi on the Gram matrix.
// sigma_j = sqrt(lambda_j); U columns for sigma below kNullThreshold are
// completed by Gram-Schmidt against a fixed cycle of basis vectors.
SvdResult svd_thin(const Matrix& z);

// Matrix backpropagation through the thin SVD:
//   dZ = U [ (F o (U^T dU - dU^T U)) S + S (F o (V^T dV - dV^T V)) + diag(ds) ] V^T
//        + (I - U U^T) dU S^+ V^T
// with F_ij = 1/(sigma_j^2 - sigma_i^2) off the diagonal, denominators
// clamped to +-kDegenerateGap with sign preserved, and S^+ thresholded at
// kNullThreshold. Throws NonFinite if the result contains NaN/Inf.
Matrix svd_backward(const SvdResult& svd, const Matrix& grad_u,
                    std::span<const double> grad_sigma, const Matrix& grad_v);

// |{ j : sigma_j > threshold * sigma_1 }|; 0 when sigma_1 <= 0.
std::size_t effective_rank(std::span<const double> sigma, double threshold);

}  // namespace pmrl
