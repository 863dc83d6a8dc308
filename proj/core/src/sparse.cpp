#include "moldflux/sparse.hpp"

#include <cmath>
#include <sstream>

namespace moldflux {

void CsrMatrix::multiply(const Field& x, Field& y) const {
  y.assign(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::int64_t p = row_ptr[static_cast<std::size_t>(i)];
         p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      acc += vals[static_cast<std::size_t>(p)] *
             x[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(p)])];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
}

Field CsrMatrix::diagonal() const {
  Field d(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t p = row_ptr[static_cast<std::size_t>(i)];
         p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      if (col_idx[static_cast<std::size_t>(p)] == i) {
        d[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(p)];
      }
    }
  }
  return d;
}

namespace {

double dot_v(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(const Field& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

CgResult cg_solve(const CsrMatrix& A, const Field& b, Field& x, const CgOptions& opts) {
  const auto n = static_cast<std::size_t>(A.n);
  if (b.size() != n || x.size() != n) {
    throw InvalidArgument("cg_solve: dimension mismatch");
  }
  if (!all_finite(b) || !all_finite(x)) {
    throw SolverError("cg_solve: non-finite input");
  }

  const std::int64_t max_iter = opts.max_iter >= 0 ? opts.max_iter : 10 * A.n;
  const double b_norm = std::sqrt(dot_v(b, b));
  CgResult res;
  if (b_norm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }

  Field inv_diag = A.diagonal();
  for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  Field r(n), z(n), p(n), Ap(n);
  A.multiply(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot_v(r, z);
  double r_norm = std::sqrt(dot_v(r, r));
  double best = r_norm;
  std::int64_t stagnant = 0;

  while (res.iterations < max_iter && r_norm > opts.tol * b_norm) {
    A.multiply(p, Ap);
    const double pAp = dot_v(p, Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) {
      throw SolverError("cg_solve: matrix not positive definite or non-finite data");
    }
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot_v(r, z);
    const double beta = rz_new / rz;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
    r_norm = std::sqrt(dot_v(r, r));
    ++res.iterations;
    // Roundoff floor guard: bail out if the residual stops improving.
    if (r_norm < best * 0.999) {
      best = r_norm;
      stagnant = 0;
    } else if (++stagnant >= 100) {
      break;
    }
  }

  res.rel_residual = r_norm / b_norm;
  res.converged = r_norm <= opts.tol * b_norm;
  if (!res.converged) {
    std::ostringstream os;
    os << "cg_solve: no convergence after " << res.iterations
       << " iterations, relative residual " << res.rel_residual << " (target " << opts.tol << ")";
    throw SolverError(os.str());
  }
  return res;
}

}  // namespace moldflux
