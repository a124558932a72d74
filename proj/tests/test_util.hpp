#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pmrl/linalg.hpp"
#include "pmrl/matrix.hpp"
#include "pmrl/rng.hpp"

namespace pmrl::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

inline Matrix random_unit_columns(Rng& rng, std::size_t rows, std::size_t cols) {
  return normalize_columns(random_matrix(rng, rows, cols));
}

// Pairwise sigma gaps at least `gap`, and v-column sums away from the sign
// canonicalization boundary so finite differences stay smooth.
inline bool well_separated(const SvdResult& svd, double gap = 1e-3) {
  for (std::size_t i = 0; i + 1 < svd.sigma.size(); ++i) {
    if (svd.sigma[i] - svd.sigma[i + 1] < gap) return false;
  }
  const std::size_t k = svd.sigma.size();
  for (std::size_t j = 0; j < k; ++j) {
    double vsum = 0.0;
    for (std::size_t m = 0; m < k; ++m) vsum += svd.v(m, j);
    if (std::abs(vsum) < 1e-2) return false;
  }
  return true;
}

inline Matrix random_separated_unit_columns(Rng& rng, std::size_t rows,
                                            std::size_t cols, double gap = 1e-3) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix z = random_unit_columns(rng, rows, cols);
    if (well_separated(svd_thin(z), gap)) return z;
  }
  throw std::runtime_error("could not sample a well-separated matrix");
}

// Batch of unit-column matrices with nondegenerate spectra.
inline std::vector<Matrix> random_separated_batch(Rng& rng, std::size_t n,
                                                  std::size_t rows, std::size_t cols,
                                                  double gap = 1e-3) {
  std::vector<Matrix> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.push_back(random_separated_unit_columns(rng, rows, cols, gap));
  }
  return batch;
}

// d x k matrix whose columns all equal one random unit vector.
inline Matrix aligned_instance(Rng& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> dir(rows);
  for (auto& x : dir) x = rng.normal();
  const double nrm = norm(dir);
  for (auto& x : dir) x /= nrm;
  Matrix z(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) z.set_column(c, dir);
  return z;
}

}  // namespace pmrl::testing
