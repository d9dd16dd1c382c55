#include "strongmin/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace strongmin {

namespace {

struct GrowthProbe {
  const ProblemInstance& inst;
  Mat kernel_stack;  // D x kd, orthonormal columns
  double nn0;
  double scale;  // 1 + ||x0||_*

  explicit GrowthProbe(const ProblemInstance& i)
      : inst(i), nn0(nuclear_norm(i.x0)), scale(1.0 + nuclear_norm(i.x0)) {
    SubspaceBasis kb = kernel_basis(i.op);
    kernel_stack = kb.stacked();
  }

  Index dim() const { return kernel_stack.cols(); }

  Mat direction(const Vec& coeffs) const {
    return unvec(kernel_stack * coeffs, inst.op.n1(), inst.op.n2());
  }

  double growth(double t, const Mat& w) const {
    return nuclear_norm(inst.x0 + t * w) - nn0;
  }

  /// Subgradient of w -> ||x0 + t*w||_* pulled back to kernel coefficients
  /// (dropping the factor t, which only rescales the step).
  Vec growth_subgrad_coeffs(double t, const Vec& coeffs) const {
    Mat m = inst.x0 + t * direction(coeffs);
    SvdResult f = svd_full(m);
    const double cut = f.sigma.size() > 0 ? 1e-12 * std::max(f.sigma(0), 1.0) : 0.0;
    int k = 0;
    while (k < f.sigma.size() && f.sigma(k) > cut) ++k;
    Mat g = f.u.leftCols(k) * f.v.leftCols(k).transpose();
    return kernel_stack.transpose() * vec(g);
  }

  /// Projected subgradient descent on the growth at fixed t over the unit
  /// sphere of kernel coefficients. Polyak steps with target zero: converges
  /// fast when a flat direction exists and stalls at the true positive minimum
  /// otherwise, which is exactly the distinction the oracle needs.
  Vec polish(double t, Vec coeffs, int steps) const {
    Vec best = coeffs;
    double best_val = growth(t, direction(coeffs));
    for (int k = 0; k < steps; ++k) {
      const double val = growth(t, direction(coeffs));
      if (val < best_val) {
        best_val = val;
        best = coeffs;
      }
      if (val <= 0.0) break;
      Vec g = t * growth_subgrad_coeffs(t, coeffs);
      // remove the radial component; the objective is evaluated on the sphere
      g -= g.dot(coeffs) * coeffs;
      const double gn2 = g.squaredNorm();
      if (gn2 < 1e-24) break;
      coeffs -= std::min(val / gn2, 2.0 / std::sqrt(gn2)) * g;
      const double cn = coeffs.norm();
      if (cn < 1e-14) break;
      coeffs /= cn;
    }
    return best;
  }

  std::vector<Vec> candidates(int n_dirs, std::uint64_t seed) const {
    std::vector<Vec> out;
    const Index kd = dim();
    for (Index i = 0; i < kd; ++i) {
      Vec e = Vec::Zero(kd);
      e(i) = 1.0;
      out.push_back(e);
      out.push_back(-e);
    }
    Rng rng = Rng(seed).split(0x0acc1eULL);
    for (int k = static_cast<int>(out.size()); k < n_dirs; ++k) {
      Vec g(kd);
      for (Index i = 0; i < kd; ++i) g(i) = rng.normal();
      const double gn = g.norm();
      if (gn < 1e-14) continue;
      out.push_back(g / gn);
    }
    return out;
  }
};

}  // namespace

OracleVerdict oracle_strong(const ProblemInstance& inst, int n_dirs,
                            std::vector<double> t_grid, std::uint64_t seed) {
  inst.validate();
  GrowthProbe probe(inst);
  if (probe.dim() == 0) return OracleVerdict::Supports;  // feasible set is {x0}
  std::sort(t_grid.begin(), t_grid.end());

  auto q_min = [&](const Vec& coeffs, bool* negative) {
    Mat w = probe.direction(coeffs);
    double qm = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
      const double g = probe.growth(t, w);
      // refutation floor: stated tolerance plus the SVD noise amplified by 1/t^2
      if (g / (t * t) < -(1e-9 + 1e-13 / (t * t)) * probe.scale) *negative = true;
      qm = std::min(qm, g / (t * t));
    }
    return qm;
  };

  bool negative = false;
  double inf_q = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> ranked;
  for (const Vec& cand : probe.candidates(n_dirs, seed)) {
    const double qm = q_min(cand, &negative);
    if (negative) return OracleVerdict::Refutes;
    inf_q = std::min(inf_q, qm);
    ranked.emplace_back(qm, cand);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n_polish = std::min<std::size_t>(6, ranked.size());
  for (std::size_t i = 0; i < n_polish; ++i) {
    for (double t_polish : {t_grid.front(), t_grid[t_grid.size() / 2]}) {
      Vec refined = probe.polish(t_polish, ranked[i].second, 300);
      const double qm = q_min(refined, &negative);
      if (negative) return OracleVerdict::Refutes;
      inf_q = std::min(inf_q, qm);
    }
  }
  if (inf_q >= 1e-6 * probe.scale) return OracleVerdict::Supports;
  return OracleVerdict::Inconclusive;
}

OracleVerdict oracle_sharp(const ProblemInstance& inst, int n_dirs,
                           std::uint64_t seed) {
  inst.validate();
  GrowthProbe probe(inst);
  if (probe.dim() == 0) return OracleVerdict::Supports;
  const double t = 1e-4;

  auto ratio = [&](const Vec& coeffs) {
    return probe.growth(t, probe.direction(coeffs)) / t;
  };

  double min_ratio = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> ranked;
  for (const Vec& cand : probe.candidates(n_dirs, seed)) {
    const double r = ratio(cand);
    min_ratio = std::min(min_ratio, r);
    ranked.emplace_back(r, cand);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n_polish = std::min<std::size_t>(6, ranked.size());
  for (std::size_t i = 0; i < n_polish; ++i) {
    Vec refined = probe.polish(t, ranked[i].second, 300);
    min_ratio = std::min(min_ratio, ratio(refined));
  }
  return min_ratio >= 1e-3 * probe.scale ? OracleVerdict::Supports
                                         : OracleVerdict::Refutes;
}

}  // namespace strongmin
