#pragma once

#include "strongmin/solvers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace strongmin {

struct ProblemInstance {
  LinOp op;
  Mat x0;
  Vec m0;
  std::optional<double> mu;  // regularized variant; ignored by classify

  /// Checks shape agreement and op(x0) == m0 to near machine precision.
  void validate() const;
};

struct Thresholds {
  double recovery = 1e-3;
  double tau_sharp = 0.99;
  double rho_sharp = 0.95;
  double zeta_strong = 0.95;
  double rho_band_lo = 0.95;
  double rho_band_hi = 1.05;
  double tol_p = kPTol;
  double geometric_margin = 1e-6;
};

struct CertifyOptions {
  Thresholds thresholds;
  SolverConfig solver;
  bool retry_certificates = false;  // experimental certificate blending sweep
};

enum class Label { Sharp, StrongNotSharp, UniqueUnknown, NotRecovered, Inconclusive };

const char* label_name(Label l);

struct RetryResult {
  double theta = 0.0;
  int p = 0;
  bool strong_ri = false;
  std::optional<double> zeta;
};

struct CertifyReport {
  bool recovered = false;
  bool ri = false;
  bool strict_ri = false;
  bool strong_ri = false;
  bool ssc = false;
  std::optional<double> tau, rho, zeta, gamma, ic;
  int p_of_y0 = 0;
  Label label = Label::Inconclusive;
  Label label_experiment = Label::Inconclusive;  // banded experiment protocol
  Mat dual_certificate;
  bool dual_certificate_valid = false;
  bool geometric = false;            // strong_ri && zeta < 1 - margin
  int q_heuristic = 0;               // p of the spectral-minimizer certificate
  std::string q_heuristic_provenance = "rho_minimizer_p";
  double recovery_error = 0.0;       // ||x_solver - x0||_F / ||x0||_F
  int solver_iterations = 0;
  bool solver_converged = false;
  double solver_kkt_violation = 0.0;
  Thresholds thresholds;
  std::vector<RetryResult> experimental_retries;
};

/// Rank test of the measurement operator over the model tangent subspace.
bool restricted_injectivity(const ProblemInstance& inst);

/// Rank test over the r(r+1)/2-dimensional symmetric subspace.
bool strict_restricted_injectivity(const ProblemInstance& inst);

bool strong_restricted_injectivity(const ProblemInstance& inst, const SimulSVD& ss);
bool strong_sufficient_condition(const ProblemInstance& inst, const SimulSVD& ss);

/// Spectral norm of the minimum-Frobenius-norm correction; absent when
/// restricted injectivity fails (the defining inverse does not exist).
std::optional<double> coeff_tau(const ProblemInstance& inst);

/// Completion-only alternate route for the same coefficient via the masked
/// frame products; used to cross-check coeff_tau.
std::optional<double> coeff_tau_mask_route(const ProblemInstance& inst);

struct RhoResult {
  double value = 0.0;
  Mat z_opt;
  Mat y0;  // dual certificate candidate e0 + z_opt
  bool converged = false;
  int iterations = 0;
};

/// Source coefficient: minimum spectral norm correction on T0-perp; absent
/// when the constraint system is infeasible (x0 is then not a solution).
std::optional<RhoResult> coeff_rho(const ProblemInstance& inst,
                                   const SolverConfig& cfg = {});

std::optional<double> coeff_ic(const ProblemInstance& inst);

std::optional<double> coeff_zeta(const ProblemInstance& inst, const SimulSVD& ss,
                                 const SolverConfig& cfg = {});

/// Closed-form quantitative bound; absent unless strong restricted injectivity
/// holds with margin (the inverse on Im M is otherwise unreliable).
std::optional<double> coeff_gamma(const ProblemInstance& inst, const SimulSVD& ss);

bool geometric_check(const ProblemInstance& inst, const SimulSVD& ss,
                     const CertifyOptions& opts = {});

CertifyReport classify(const ProblemInstance& inst, const CertifyOptions& opts = {});

enum class OracleVerdict { Supports, Refutes, Inconclusive };

const char* oracle_verdict_name(OracleVerdict v);

/// Brute-force growth oracle over kernel directions: quadratic growth ratios
/// on a t-grid, random directions plus subgradient-polished minimizers.
OracleVerdict oracle_strong(const ProblemInstance& inst, int n_dirs = 500,
                            std::vector<double> t_grid = {1e-3, 1e-2, 1e-1},
                            std::uint64_t seed = 2027);

/// First-order growth oracle; never inconclusive.
OracleVerdict oracle_sharp(const ProblemInstance& inst, int n_dirs = 500,
                           std::uint64_t seed = 2027);

}  // namespace strongmin
