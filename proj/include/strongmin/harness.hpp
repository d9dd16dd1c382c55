#pragma once

#include "strongmin/certify.hpp"

#include <string>
#include <vector>

namespace strongmin {

enum class Ensemble { Gaussian, Completion };

struct ExperimentConfig {
  Ensemble ensemble = Ensemble::Gaussian;
  int n = 12;
  std::vector<int> rank_list = {2};
  std::vector<int> m_grid;
  int trials = 50;
  std::uint64_t seed = 1;
  Thresholds thresholds;
  SolverConfig solver;
  std::string output_path;

  void validate() const;
};

struct TrialRow {
  std::uint64_t seed = 0;
  int n = 0, r = 0, m = 0;
  int recovered = 0, sharp = 0, strong_not_sharp = 0;
  int strong_banded = 0;  // banded-protocol label; summary only, not in the CSV
  std::optional<double> tau, rho, zeta, ic;
  int solver_iters = 0;
  long long wall_ms = 0;
};

inline constexpr const char* kCsvHeader =
    "seed,n,r,m,recovered,sharp,strong_not_sharp,tau,rho,zeta,ic,solver_iters,"
    "wall_ms";

/// Trials run in parallel (STRONGMIN_THREADS overrides the width); every trial
/// derives its own generator from (seed, r, m, trial), so output bytes do not
/// depend on the thread count.
std::vector<TrialRow> run_exp_gaussian(const ExperimentConfig& cfg);
std::vector<TrialRow> run_exp_completion(const ExperimentConfig& cfg);

std::string rows_to_csv(const std::vector<TrialRow>& rows);

/// Per-m aggregates; one flat block per rank in rank_list.
std::string summary_to_json(const ExperimentConfig& cfg,
                            const std::vector<TrialRow>& rows);

/// Classify one instance into a row (used for fixed fixture trials).
TrialRow classify_to_row(const ProblemInstance& inst, const CertifyOptions& opts,
                         std::uint64_t seed);

/// Random rank-r target measured by the minimal symmetric-subspace family
/// (m = r(r+1)/2); asserts recovered and strong. With drop_one the last
/// measurement is removed and the report will show strict RI failing.
CertifyReport demo_minimal(int n, int r, std::uint64_t seed, bool drop_one = false);

/// Random consistent left-multiplication instance; checks the solver against
/// the closed form, certifies strong, and runs the regularized variant's
/// stationarity test.
CertifyReport demo_lrr(int q, int n1, int n2, int r, std::uint64_t seed);

/// Built-in golden instances.
ProblemInstance fixture_diag2_completion();
ProblemInstance fixture_rank1_3x3_completion();
ProblemInstance fixture_lrr_1x2();

struct FixtureResult {
  std::string name;
  bool pass = false;
  std::string details;
};

std::vector<FixtureResult> run_fixtures();

}  // namespace strongmin
