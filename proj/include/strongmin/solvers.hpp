#pragma once

#include "strongmin/measure_ops.hpp"

namespace strongmin {

struct SolverConfig {
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int max_iter = 50000;
  double step = 1.0;  // multiplier on the self-scaled prox step
};

struct SolveResult {
  Mat x_opt;
  double objective = 0.0;  // norm recomputed from x_opt, never solver state
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  Mat dual_certificate;        // element of Im op^* paired with x_opt
  double kkt_violation = 0.0;  // subdifferential-membership violation of the pair
};

/// Singular-value soft thresholding.
Mat prox_nuclear(const Mat& x, double lambda);

/// Euclidean projection onto {||Z||_* <= radius} via sorted simplex projection
/// of the singular values.
Mat project_nuclear_ball(const Mat& x, double radius);

/// Prox of lambda*||.|| (spectral) via the Moreau identity against the
/// nuclear-ball projection.
Mat prox_spectral(const Mat& x, double lambda);

/// Euclidean projection of a nonincreasing nonnegative vector onto
/// {s >= 0, sum(s) <= radius}; exact sort-based method.
Vec simplex_cap_sorted(const Vec& sorted_desc, double radius);

/// min ||X||_* subject to op(X) = m0. Douglas-Rachford between the nuclear
/// prox and the cached affine projection; returns a feasible iterate together
/// with the dual certificate recovered from the splitting.
SolveResult solve_nuclear_affine(const LinOp& op, const Vec& m0,
                                 const SolverConfig& cfg = {});

struct SpectralAffineResult {
  Mat z_opt;
  Vec slack_coeffs;  // coefficients on the slack basis (empty without slack)
  double value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool local_opt_ok = true;  // feasible 20% perturbation sweep found no improvement
};

/// min ||Z|| (spectral) over Z in span(z_basis), optional slack W in
/// span(slack_basis), subject to n_mat * vec(Z + W) = rhs. The z subspace must
/// be closed under the spectral prox (true for the T0-perp family used here).
SpectralAffineResult solve_spectral_affine(const SubspaceBasis& z_basis,
                                           const Mat& n_mat, const Vec& rhs,
                                           const SubspaceBasis* slack_basis,
                                           const SolverConfig& cfg = {});

/// min 0.5*||op(X) - m||^2 + mu*||X||_*.
SolveResult solve_regularized(const LinOp& op, const Vec& m, double mu,
                              const SolverConfig& cfg = {});

/// Closed form pinv(L)*M0 for min ||X||_* s.t. LX = M0; checks consistency.
Mat lrr_closed_form(const Mat& l_mat, const Mat& m0_mat);

}  // namespace strongmin
