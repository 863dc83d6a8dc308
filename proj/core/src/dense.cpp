#include "moldflux/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace moldflux {

DenseMatrix matmul_at_b(const DenseMatrix& A, const DenseMatrix& B) {
  if (A.rows != B.rows) throw InvalidArgument("matmul_at_b: dimension mismatch");
  DenseMatrix C(A.cols, B.cols);
  for (std::size_t k = 0; k < A.rows; ++k) {
    for (std::size_t i = 0; i < A.cols; ++i) {
      const double a = A.at(k, i);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) {
        C.at(i, j) += a * B.at(k, j);
      }
    }
  }
  return C;
}

std::vector<double> matvec(const DenseMatrix& A, const std::vector<double>& x) {
  if (A.cols != x.size()) throw InvalidArgument("matvec: dimension mismatch");
  std::vector<double> y(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) acc += A.at(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_transposed(const DenseMatrix& A, const std::vector<double>& x) {
  if (A.rows != x.size()) throw InvalidArgument("matvec_transposed: dimension mismatch");
  std::vector<double> y(A.cols, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < A.cols; ++j) y[j] += A.at(i, j) * xi;
  }
  return y;
}

LuFactors lu_factor_full_pivot(const DenseMatrix& K) {
  if (K.rows != K.cols) throw InvalidArgument("lu_factor_full_pivot: matrix must be square");
  const std::size_t n = K.rows;

  LuFactors f;
  f.lu = K;
  DenseMatrix& M = f.lu;
  f.row_perm.resize(n);
  f.col_perm.resize(n);
  std::iota(f.row_perm.begin(), f.row_perm.end(), 0);
  std::iota(f.col_perm.begin(), f.col_perm.end(), 0);

  double pivot_max = 0.0, pivot_min = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t pr = s, pc = s;
    double best = 0.0;
    for (std::size_t i = s; i < n; ++i)
      for (std::size_t j = s; j < n; ++j) {
        const double v = std::abs(M.at(i, j));
        if (v > best) {
          best = v;
          pr = i;
          pc = j;
        }
      }
    if (s == 0) {
      pivot_max = best;
      pivot_min = best;
      if (best == 0.0) throw SingularMatrix("lu_factor_full_pivot: zero matrix");
    }
    if (best == 0.0 || best <= pivot_max * 1e-300) {
      throw SingularMatrix("lu_factor_full_pivot: exactly singular matrix");
    }
    pivot_min = std::min(pivot_min, best);
    if (pr != s) {
      for (std::size_t j = 0; j < n; ++j) std::swap(M.at(s, j), M.at(pr, j));
      std::swap(f.row_perm[s], f.row_perm[pr]);
    }
    if (pc != s) {
      for (std::size_t i = 0; i < n; ++i) std::swap(M.at(i, s), M.at(i, pc));
      std::swap(f.col_perm[s], f.col_perm[pc]);
    }
    const double piv = M.at(s, s);
    for (std::size_t i = s + 1; i < n; ++i) {
      const double l = M.at(i, s) / piv;
      M.at(i, s) = l;
      if (l == 0.0) continue;
      for (std::size_t j = s + 1; j < n; ++j) M.at(i, j) -= l * M.at(s, j);
    }
  }
  f.condition_estimate = (pivot_min > 0.0) ? pivot_max / pivot_min : 0.0;
  return f;
}

std::vector<double> LuFactors::solve(const std::vector<double>& c) const {
  const std::size_t n = lu.rows;
  if (c.size() != n) throw InvalidArgument("LuFactors::solve: rhs size mismatch");

  // Forward substitution on the permuted rhs, then back substitution.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = c[row_perm[i]];
    for (std::size_t j = 0; j < i; ++j) acc -= lu.at(i, j) * y[j];
    y[i] = acc;
  }
  std::vector<double> z(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= lu.at(ii, j) * z[j];
    z[ii] = acc / lu.at(ii, ii);
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) x[col_perm[j]] = z[j];
  return x;
}

LuResult lu_solve_full_pivot(const DenseMatrix& K, const std::vector<double>& c) {
  if (K.rows != K.cols) throw InvalidArgument("lu_solve_full_pivot: matrix must be square");
  if (c.size() != K.rows) throw InvalidArgument("lu_solve_full_pivot: rhs size mismatch");
  const LuFactors f = lu_factor_full_pivot(K);
  LuResult result;
  result.x = f.solve(c);
  result.condition_estimate = f.condition_estimate;
  return result;
}

SvdResult svd(const DenseMatrix& K, double rank_tol) {
  const std::size_t m = K.rows, n = K.cols;
  if (m == 0 || n == 0) throw InvalidArgument("svd: empty matrix");
  if (m < n) throw InvalidArgument("svd: requires rows >= cols");

  // One-sided Jacobi: rotate column pairs of W until mutually orthogonal,
  // accumulating the rotations in V.  Then W = U*diag(sigma).
  DenseMatrix W = K;
  DenseMatrix V(n, n);
  for (std::size_t j = 0; j < n; ++j) V.at(j, j) = 1.0;

  const double tol = 1e-15;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = W.at(i, p), wq = W.at(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = W.at(i, p), wq = W.at(i, q);
          W.at(i, p) = cs * wp - sn * wq;
          W.at(i, q) = sn * wp + cs * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = V.at(i, p), vq = V.at(i, q);
          V.at(i, p) = cs * vp - sn * vq;
          V.at(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += W.at(i, j) * W.at(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult r;
  r.U = DenseMatrix(m, n);
  r.V = DenseMatrix(n, n);
  r.sigma.resize(n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t src = order[jj];
    r.sigma[jj] = sigma[src];
    const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
    for (std::size_t i = 0; i < m; ++i) r.U.at(i, jj) = W.at(i, src) * inv;
    for (std::size_t i = 0; i < n; ++i) r.V.at(i, jj) = V.at(i, src);
  }
  r.rank = 0;
  const double s0 = r.sigma.empty() ? 0.0 : r.sigma[0];
  for (double s : r.sigma) {
    if (s > rank_tol * s0 && s > 0.0) ++r.rank;
  }
  return r;
}

std::vector<double> tsvd_solve(const SvdResult& d, const std::vector<double>& c,
                               std::size_t alpha) {
  if (alpha < 1) throw InvalidArgument("tsvd_solve: alpha must be >= 1");
  if (d.U.rows != c.size()) throw InvalidArgument("tsvd_solve: rhs size mismatch");
  if (d.rank == 0) throw SingularMatrix("tsvd_solve: zero matrix");
  if (alpha > d.rank) throw InvalidArgument("tsvd_solve: alpha exceeds the numerical rank");
  const std::size_t cut = alpha;
  std::vector<double> x(d.V.rows, 0.0);
  for (std::size_t i = 0; i < cut; ++i) {
    double ui_c = 0.0;
    for (std::size_t r = 0; r < c.size(); ++r) ui_c += d.U.at(r, i) * c[r];
    const double scale = ui_c / d.sigma[i];
    for (std::size_t r = 0; r < x.size(); ++r) x[r] += scale * d.V.at(r, i);
  }
  return x;
}

std::vector<double> tsvd_solve(const DenseMatrix& K, const std::vector<double>& c,
                               std::size_t alpha) {
  return tsvd_solve(svd(K), c, alpha);
}

std::size_t pick_alpha_by_spectrum_gap(const SvdResult& d, double min_ratio) {
  if (d.rank == 0) throw SingularMatrix("pick_alpha_by_spectrum_gap: zero matrix");
  std::size_t alpha = d.rank;
  double best = min_ratio;
  for (std::size_t i = 0; i + 1 < d.rank; ++i) {
    const double ratio = d.sigma[i] / d.sigma[i + 1];
    if (ratio > best) {
      best = ratio;
      alpha = i + 1;
    }
  }
  return alpha;
}

}  // namespace moldflux
