#pragma once

#include <cstdint>
#include <vector>

#include "moldflux/errors.hpp"

namespace moldflux {

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

DenseMatrix matmul_at_b(const DenseMatrix& A, const DenseMatrix& B);  // A^T B
std::vector<double> matvec(const DenseMatrix& A, const std::vector<double>& x);
std::vector<double> matvec_transposed(const DenseMatrix& A, const std::vector<double>& x);

struct LuResult {
  std::vector<double> x;
  // max/min pivot magnitude ratio, a cheap condition indicator.
  double condition_estimate = 0.0;
};

// LU decomposition with full pivoting, factored once and reusable for many
// right-hand sides.  Throws SingularMatrix only on exact singularity; callers
// judge ill-conditioning via condition_estimate.
struct LuFactors {
  DenseMatrix lu;                      // L below the diagonal, U on and above
  std::vector<std::size_t> row_perm;
  std::vector<std::size_t> col_perm;
  double condition_estimate = 0.0;     // max/min pivot magnitude ratio

  std::vector<double> solve(const std::vector<double>& c) const;
};

LuFactors lu_factor_full_pivot(const DenseMatrix& K);

// One-shot convenience wrapper around factor + solve.
LuResult lu_solve_full_pivot(const DenseMatrix& K, const std::vector<double>& c);

struct SvdResult {
  DenseMatrix U;               // rows x rank_full columns
  DenseMatrix V;               // cols x rank_full columns
  std::vector<double> sigma;   // descending
  std::size_t rank = 0;        // sigma_i > rank_tol * sigma_0
};

// One-sided Jacobi SVD for small dense matrices, singular values sorted
// descending.  rank counts sigma_i > rank_tol*sigma_0 (default 1e-14).
SvdResult svd(const DenseMatrix& K, double rank_tol = 1e-14);

// Truncated-SVD solution sum_{i<alpha} (u_i.c/sigma_i) v_i.  alpha is clamped
// to the numerical rank; alpha < 1 is invalid.
std::vector<double> tsvd_solve(const SvdResult& decomposition, const std::vector<double>& c,
                               std::size_t alpha);
std::vector<double> tsvd_solve(const DenseMatrix& K, const std::vector<double>& c,
                               std::size_t alpha);

// Truncation index at the largest consecutive drop sigma_i/sigma_{i+1} within
// the numerical rank; full rank when no drop exceeds min_ratio.
std::size_t pick_alpha_by_spectrum_gap(const SvdResult& decomposition, double min_ratio = 5.0);

}  // namespace moldflux
