#include "pmrl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmrl {

namespace {

constexpr std::size_t kMaxJacobiDim = 16;
constexpr int kMaxJacobiSweeps = 100;

double offdiag_sq(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t q = p + 1; q < a.cols(); ++q) sum += a(p, q) * a(p, q);
  }
  return sum;
}

}  // namespace

Matrix normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double nrm = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) nrm += m(r, c) * m(r, c);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) {
      throw Error(ErrorCode::ZeroColumn,
                  "column " + std::to_string(c) + " has norm " + std::to_string(nrm));
    }
    const double inv = 1.0 / nrm;
    for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = m(r, c) * inv;
  }
  return out;
}

GramMatrix gram(const Matrix& z) {
  if (z.cols() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "gram needs at least 2 columns");
  }
  const std::size_t k = z.cols();
  Matrix g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < z.rows(); ++r) sum += z(r, i) * z(r, j);
      g(i, j) = sum;
      g(j, i) = sum;
    }
  }
  return GramMatrix{std::move(g)};
}

SymEigResult sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "sym_eig needs a square matrix");
  }
  const std::size_t k = s.rows();
  if (k > kMaxJacobiDim) {
    throw Error(ErrorCode::DimensionMismatch,
                "sym_eig supports k <= " + std::to_string(kMaxJacobiDim));
  }
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = p + 1; q < k; ++q) {
      if (std::abs(s(p, q) - s(q, p)) > 1e-10) {
        throw Error(ErrorCode::NotSymmetric,
                    "entry (" + std::to_string(p) + "," + std::to_string(q) +
                        ") differs from its mirror");
      }
    }
  }

  Matrix a = s;
  // Symmetrize exactly so rotations keep both triangles in lockstep.
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = p + 1; q < k; ++q) {
      const double avg = 0.5 * (a(p, q) + a(q, p));
      a(p, q) = avg;
      a(q, p) = avg;
    }
  }
  Matrix q_mat = Matrix::identity(k);

  const double frob = a.frobenius_norm();
  const double stop = 1e-30 * std::max(1.0, frob * frob);

  int sweeps = 0;
  while (offdiag_sq(a) > stop) {
    if (++sweeps > kMaxJacobiSweeps) {
      throw Error(ErrorCode::NotConverged,
                  "Jacobi sweep count exceeded " + std::to_string(kMaxJacobiSweeps));
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
          if (r != p && r != q) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = arp - sn * (arq + tau * arp);
            a(p, r) = a(r, p);
            a(r, q) = arq + sn * (arp - tau * arq);
            a(q, r) = a(r, q);
          }
          const double qrp = q_mat(r, p);
          const double qrq = q_mat(r, q);
          q_mat(r, p) = qrp - sn * (qrq + tau * qrp);
          q_mat(r, q) = qrq + sn * (qrp - tau * qrq);
        }
      }
    }
  }

  // Sort descending; stable so equal eigenvalues keep rotation order.
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEigResult result;
  result.values.resize(k);
  result.vectors = Matrix(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    result.values[j] = a(order[j], order[j]);
    for (std::size_t r = 0; r < k; ++r) result.vectors(r, j) = q_mat(r, order[j]);
  }
  return result;
}

namespace {

// Deterministic replacement column: next basis vector from a rolling cycle,
// orthogonalized against the accepted columns of u.
void complete_column(Matrix& u, std::size_t j, std::size_t& basis_cursor) {
  const std::size_t d = u.rows();
  for (std::size_t attempt = 0; attempt < d; ++attempt) {
    const std::size_t e = (basis_cursor + attempt) % d;
    std::vector<double> cand(d, 0.0);
    cand[e] = 1.0;
    for (std::size_t l = 0; l < j; ++l) {
      double proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += u(r, l) * cand[r];
      for (std::size_t r = 0; r < d; ++r) cand[r] -= proj * u(r, l);
    }
    const double nrm = norm(cand);
    if (nrm > 0.5) {
      for (std::size_t r = 0; r < d; ++r) u(r, j) = cand[r] / nrm;
      basis_cursor = (e + 1) % d;
      return;
    }
  }
  throw Error(ErrorCode::NotConverged, "basis completion exhausted all directions");
}

void canonicalize_signs(SvdResult& svd) {
  const std::size_t d = svd.u.rows();
  const std::size_t k = svd.sigma.size();
  for (std::size_t j = 0; j < k; ++j) {
    double vsum = 0.0;
    for (std::size_t m = 0; m < k; ++m) vsum += svd.v(m, j);
    bool flip = false;
    if (std::abs(vsum) >= 1e-12) {
      flip = vsum < 0.0;
    } else {
      for (std::size_t r = 0; r < d; ++r) {
        if (std::abs(svd.u(r, j)) > 1e-12) {
          flip = svd.u(r, j) < 0.0;
          break;
        }
      }
    }
    if (flip) {
      for (std::size_t r = 0; r < d; ++r) svd.u(r, j) = -svd.u(r, j);
      for (std::size_t m = 0; m < k; ++m) svd.v(m, j) = -svd.v(m, j);
    }
  }
}

}  // namespace

SvdResult svd_thin(const Matrix& z) {
  const std::size_t d = z.rows();
  const std::size_t k = z.cols();
  if (k < 2 || d < k) {
    throw Error(ErrorCode::DimensionMismatch,
                "svd_thin needs d >= k >= 2, got " + std::to_string(d) + "x" +
                    std::to_string(k));
  }

  const SymEigResult eig = sym_eig(gram(z).g);

  SvdResult svd;
  svd.sigma.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    svd.sigma[j] = std::sqrt(std::max(eig.values[j], 0.0));
  }
  svd.v = eig.vectors;
  svd.u = Matrix(d, k);

  std::size_t basis_cursor = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (svd.sigma[j] < kNullThreshold) {
      complete_column(svd.u, j, basis_cursor);
      continue;
    }
    const double inv = 1.0 / svd.sigma[j];
    for (std::size_t r = 0; r < d; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += z(r, c) * svd.v(c, j);
      svd.u(r, j) = sum * inv;
    }
    // Near-null columns lose orthogonality to rounding; one Gram-Schmidt
    // pass restores it without disturbing well-conditioned columns.
    for (std::size_t l = 0; l < j; ++l) {
      double proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += svd.u(r, l) * svd.u(r, j);
      for (std::size_t r = 0; r < d; ++r) svd.u(r, j) -= proj * svd.u(r, l);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < d; ++r) nrm += svd.u(r, j) * svd.u(r, j);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) {
      complete_column(svd.u, j, basis_cursor);
    } else {
      const double scale = 1.0 / nrm;
      for (std::size_t r = 0; r < d; ++r) svd.u(r, j) *= scale;
    }
  }

  canonicalize_signs(svd);
  return svd;
}

Matrix svd_backward(const SvdResult& svd, const Matrix& grad_u,
                    std::span<const double> grad_sigma, const Matrix& grad_v) {
  const std::size_t d = svd.u.rows();
  const std::size_t k = svd.sigma.size();
  if (grad_u.rows() != d || grad_u.cols() != k || grad_sigma.size() != k ||
      grad_v.rows() != k || grad_v.cols() != k) {
    throw Error(ErrorCode::ShapeMismatch, "svd_backward: upstream gradient shapes");
  }

  // F_ij = 1 / (sigma_j^2 - sigma_i^2), sign-preserving clamp, zero diagonal.
  Matrix f(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double den = svd.sigma[j] * svd.sigma[j] - svd.sigma[i] * svd.sigma[i];
      if (std::abs(den) < kDegenerateGap) {
        den = den < 0.0 ? -kDegenerateGap : kDegenerateGap;
      }
      f(i, j) = 1.0 / den;
    }
  }

  const Matrix ut_du = matmul(svd.u.transposed(), grad_u);  // k x k
  const Matrix vt_dv = matmul(svd.v.transposed(), grad_v);  // k x k

  Matrix inner(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) {
        inner(i, j) = grad_sigma[i];
      } else {
        const double u_term = f(i, j) * (ut_du(i, j) - ut_du(j, i)) * svd.sigma[j];
        const double v_term = svd.sigma[i] * f(i, j) * (vt_dv(i, j) - vt_dv(j, i));
        inner(i, j) = u_term + v_term;
      }
    }
  }

  Matrix grad_z = matmul(matmul(svd.u, inner), svd.v.transposed());

  // Null-space term: (I - U U^T) dU S^+ V^T.
  Matrix residual = grad_u;
  residual -= matmul(svd.u, ut_du);
  for (std::size_t j = 0; j < k; ++j) {
    const double inv = svd.sigma[j] >= kNullThreshold ? 1.0 / svd.sigma[j] : 0.0;
    for (std::size_t r = 0; r < d; ++r) residual(r, j) *= inv;
  }
  grad_z += matmul(residual, svd.v.transposed());

  if (!grad_z.all_finite()) {
    throw Error(ErrorCode::NonFinite, "svd_backward produced NaN/Inf");
  }
  return grad_z;
}

std::size_t effective_rank(std::span<const double> sigma, double threshold) {
  if (sigma.empty() || sigma[0] <= 0.0) return 0;
  const double cut = threshold * sigma[0];
  std::size_t count = 0;
  for (double s : sigma) {
    if (s > cut) ++count;
  }
  return count;
}

}  // namespace pmrl
