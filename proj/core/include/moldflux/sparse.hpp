#pragma once

#include <cstdint>
#include <vector>

#include "moldflux/errors.hpp"

namespace moldflux {

using Field = std::vector<double>;

struct CsrMatrix {
  std::int64_t n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> vals;

  // y = A x
  void multiply(const Field& x, Field& y) const;
  Field diagonal() const;
};

struct CgOptions {
  double tol = 1e-10;          // relative residual target, ||r|| <= tol*||b||
  std::int64_t max_iter = -1;  // <0: 10*n
};

struct CgResult {
  std::int64_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Preconditioned conjugate gradient with Jacobi preconditioning for SPD
// systems.  x is both the initial guess and the result.  Throws SolverError
// (with the residual in the message) when the tolerance is not reached.
CgResult cg_solve(const CsrMatrix& A, const Field& b, Field& x, const CgOptions& opts);

}  // namespace moldflux
