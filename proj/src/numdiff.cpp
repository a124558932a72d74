#include "pmrl/numdiff.hpp"

#include <cmath>

namespace pmrl {

Matrix central_difference(const std::function<double(const Matrix&)>& f,
                          const Matrix& at, double step) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (std::size_t r = 0; r < at.rows(); ++r) {
    for (std::size_t c = 0; c < at.cols(); ++c) {
      const double saved = probe(r, c);
      probe(r, c) = saved + step;
      const double hi = f(probe);
      probe(r, c) = saved - step;
      const double lo = f(probe);
      probe(r, c) = saved;
      grad(r, c) = (hi - lo) / (2.0 * step);
    }
  }
  return grad;
}

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> at, double step) {
  std::vector<double> probe(at.begin(), at.end());
  std::vector<double> grad(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double hi = f(probe);
    probe[i] = saved - step;
    const double lo = f(probe);
    probe[i] = saved;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

double relative_error(const Matrix& a, const Matrix& b, double floor) {
  Matrix diff = a;
  diff -= b;
  return diff.frobenius_norm() / std::max(b.frobenius_norm(), floor);
}

double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor) {
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    diff_sq += d * d;
    ref_sq += b[i] * b[i];
  }
  return std::sqrt(diff_sq) / std::max(std::sqrt(ref_sq), floor);
}

}  // namespace pmrl
