#include "strongmin/certify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace strongmin {

namespace {

int rank_of(const Mat& a, double tol_rel = kRankTol) {
  if (a.size() == 0) return 0;
  Vec s = singular_values(a);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int r = 0;
  while (r < s.size() && s(r) > tol_rel * s(0)) ++r;
  return r;
}

bool full_rank_over(const LinOp& op, const SubspaceBasis& basis) {
  if (basis.dim() == 0) return true;
  Mat cols(op.m(), basis.dim());
  for (int k = 0; k < basis.dim(); ++k)
    cols.col(k) = op.apply(basis.elems[static_cast<std::size_t>(k)]);
  return rank_of(cols) == basis.dim();
}

Mat e0_of(const CompactSVD& c) { return c.u * c.v.transpose(); }

}  // namespace

const char* label_name(Label l) {
  switch (l) {
    case Label::Sharp: return "sharp";
    case Label::StrongNotSharp: return "strong_not_sharp";
    case Label::UniqueUnknown: return "unique_unknown";
    case Label::NotRecovered: return "not_recovered";
    case Label::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* oracle_verdict_name(OracleVerdict v) {
  switch (v) {
    case OracleVerdict::Supports: return "supports";
    case OracleVerdict::Refutes: return "refutes";
    case OracleVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void ProblemInstance::validate() const {
  if (x0.rows() != op.n1() || x0.cols() != op.n2())
    throw Error(ErrorKind::InvalidArgument, "instance: x0 shape mismatch");
  require_finite(x0, "instance.x0");
  if (m0.size() != op.m())
    throw Error(ErrorKind::InvalidArgument, "instance: m0 size mismatch");
  if ((op.apply(x0) - m0).norm() > 1e-10 * (1.0 + m0.norm()))
    throw Error(ErrorKind::InvalidArgument, "instance: op(x0) != m0");
  if (mu && *mu <= 0)
    throw Error(ErrorKind::InvalidArgument, "instance: mu must be > 0");
}

bool restricted_injectivity(const ProblemInstance& inst) {
  CompactSVD c = compact_svd(inst.x0);
  return full_rank_over(inst.op, basis_T0(c));
}

bool strict_restricted_injectivity(const ProblemInstance& inst) {
  CompactSVD c = compact_svd(inst.x0);
  return full_rank_over(inst.op, basis_UsrV(c));
}

bool strong_restricted_injectivity(const ProblemInstance& inst, const SimulSVD& ss) {
  EBasis e = basis_E(ss);
  Mat psi = build_psi(inst.op, e);
  return rank_of(psi.leftCols(e.s)) == e.s;
}

bool strong_sufficient_condition(const ProblemInstance& inst, const SimulSVD& ss) {
  EBasis e = basis_E(ss);
  Mat psi = build_psi(inst.op, e);
  return rank_of(psi.leftCols(e.l)) == e.l;
}

std::optional<double> coeff_tau(const ProblemInstance& inst) {
  if (!restricted_injectivity(inst)) return std::nullopt;
  CompactSVD c = compact_svd(inst.x0);
  AnnihilatorN nop = annihilator(inst.op);
  if (nop.n.rows() == 0) return 0.0;
  SubspaceBasis tperp = basis_T0perp(c);
  if (tperp.dim() == 0) return 0.0;
  Mat a = nop.n * tperp.stacked();
  Vec rhs = -(nop.n * vec(e0_of(c)));
  Vec z = pinv(a) * rhs;
  return spectral_norm(unvec(tperp.stacked() * z, inst.op.n1(), inst.op.n2()));
}

std::optional<double> coeff_tau_mask_route(const ProblemInstance& inst) {
  if (inst.op.kind() != OpKind::EntryMask)
    throw Error(ErrorKind::InvalidArgument,
                "coeff_tau_mask_route: entry-mask operators only");
  if (!restricted_injectivity(inst)) return std::nullopt;
  CompactSVD c = compact_svd(inst.x0);
  const Index n1 = inst.op.n1(), n2 = inst.op.n2();
  const int r = c.r;
  Mat u_full(n1, n1), v_full(n2, n2);
  u_full << c.u, complete_frame(c.u);
  v_full << c.v, complete_frame(c.v);

  // index set of the tangent-subspace frame products, column-major order
  std::vector<std::pair<Index, Index>> gamma;
  for (Index j = 0; j < n2; ++j)
    for (Index i = 0; i < n1; ++i)
      if (i < r || j < r) gamma.emplace_back(i, j);
  const auto dt = static_cast<Index>(gamma.size());

  auto pack = [&](const Mat& m) {
    // coefficients of P_Gamma(m) in the gamma ordering
    Vec out(dt);
    for (Index k = 0; k < dt; ++k) out(k) = m(gamma[k].first, gamma[k].second);
    return out;
  };

  Mat mask = Mat::Zero(n1, n2);
  for (auto [i, j] : inst.op.mask()) mask(i, j) = 1.0;

  Mat sys(dt, dt);
  std::vector<Mat> b_ij(static_cast<std::size_t>(dt));
  for (Index k = 0; k < dt; ++k) {
    Mat outer = u_full.col(gamma[k].first) * v_full.col(gamma[k].second).transpose();
    b_ij[static_cast<std::size_t>(k)] = (mask.array() * outer.array()).matrix();
    sys.col(k) = pack(u_full.transpose() * b_ij[static_cast<std::size_t>(k)] * v_full);
  }
  Vec rhs = Vec::Zero(dt);
  for (Index k = 0; k < dt; ++k)
    if (gamma[k].first == gamma[k].second && gamma[k].first < r) rhs(k) = 1.0;

  Vec alpha = pinv(sys) * rhs;
  if ((sys * alpha - rhs).norm() > 1e-6 * (1.0 + rhs.norm()))
    throw Error(ErrorKind::NumericalFailure,
                "coeff_tau_mask_route: frame system not solvable");
  Mat y = Mat::Zero(n1, n2);
  for (Index k = 0; k < dt; ++k) y += alpha(k) * b_ij[static_cast<std::size_t>(k)];
  return spectral_norm(y - e0_of(c));
}

std::optional<RhoResult> coeff_rho(const ProblemInstance& inst,
                                   const SolverConfig& cfg) {
  CompactSVD c = compact_svd(inst.x0);
  Mat e0 = e0_of(c);
  AnnihilatorN nop = annihilator(inst.op);
  RhoResult out;
  if (nop.n.rows() == 0) {
    out.value = 0.0;
    out.z_opt = Mat::Zero(inst.op.n1(), inst.op.n2());
    out.y0 = e0;
    out.converged = true;
    return out;
  }
  SubspaceBasis tperp = basis_T0perp(c);
  try {
    // the returned iterate is exactly feasible, so its value is always a
    // certified upper bound; converged marks whether the gap closed
    SpectralAffineResult r =
        solve_spectral_affine(tperp, nop.n, -(nop.n * vec(e0)), nullptr, cfg);
    out.value = r.value;
    out.z_opt = r.z_opt;
    out.y0 = e0 + r.z_opt;
    out.converged = r.converged;
    out.iterations = r.iterations;
    return out;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible) return std::nullopt;
    throw;
  }
}

std::optional<double> coeff_ic(const ProblemInstance& inst) {
  if (!restricted_injectivity(inst)) return std::nullopt;
  CompactSVD c = compact_svd(inst.x0);
  SubspaceBasis t0 = basis_T0(c);
  Mat at(inst.op.m(), t0.dim());
  for (int k = 0; k < t0.dim(); ++k)
    at.col(k) = inst.op.apply(t0.elems[static_cast<std::size_t>(k)]);
  Vec e0_coords = t0.stacked().transpose() * vec(e0_of(c));
  Vec lambda = pinv(at).transpose() * e0_coords;
  Mat y_full = inst.op.adjoint_apply(lambda);
  return spectral_norm(proj_Tperp(y_full, c));
}

std::optional<double> coeff_zeta(const ProblemInstance& inst, const SimulSVD& ss,
                                 const SolverConfig& cfg) {
  CompactSVD c = compact_svd(inst.x0);
  Mat e0 = e0_of(c);
  AnnihilatorN nop = annihilator(inst.op);
  if (nop.n.rows() == 0) return 0.0;
  SubspaceBasis tperp = basis_T0perp(c);
  SubspaceBasis eperp = basis_Eperp(ss);
  try {
    // feasible-iterate value: a certified upper bound even short of the gap
    // tolerance, which is the conservative direction for this certificate
    SpectralAffineResult r = solve_spectral_affine(
        tperp, nop.n, -(nop.n * vec(e0)), eperp.dim() > 0 ? &eperp : nullptr, cfg);
    return r.value;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Infeasible) return std::nullopt;
    throw;
  }
}

std::optional<double> coeff_gamma(const ProblemInstance& inst, const SimulSVD& ss) {
  CompactSVD c = compact_svd(inst.x0);
  EBasis e = basis_E(ss);
  Mat psi = build_psi(inst.op, e);
  // strong restricted injectivity with margin, else the inverse is unreliable
  {
    Vec s = singular_values(psi.leftCols(e.s));
    if (e.s > 0 && (s.size() < e.s || s(0) <= 0.0 || s(e.s - 1) < 1e-8 * s(0)))
      return std::nullopt;
  }
  OperatorM mop = build_m(inst.op, e);
  if (mop.codim() == 0) return 0.0;

  const int q = e.basis.dim();
  Mat wt_stack(inst.op.n1() * inst.op.n2(), q);
  for (int k = 0; k < q; ++k)
    wt_stack.col(k) =
        vec(proj_Tperp(e.basis.elems[static_cast<std::size_t>(k)], c));
  Mat gram = wt_stack.transpose() * wt_stack;
  Mat s_mat = mop.v_g.transpose() * gram * mop.v_g;
  Vec me = mop.apply(e0_of(c));
  Vec g = pinv(s_mat) * me;
  Vec coeff = mop.v_g * g;
  Vec yhat = wt_stack * coeff;
  return spectral_norm(unvec(yhat, inst.op.n1(), inst.op.n2()));
}

bool geometric_check(const ProblemInstance& inst, const SimulSVD& ss,
                     const CertifyOptions& opts) {
  if (!strong_restricted_injectivity(inst, ss)) return false;
  auto z = coeff_zeta(inst, ss, opts.solver);
  return z && *z < 1.0 - opts.thresholds.geometric_margin;
}

CertifyReport classify(const ProblemInstance& inst, const CertifyOptions& opts) {
  inst.validate();
  const Thresholds& th = opts.thresholds;
  CertifyReport rep;
  rep.thresholds = th;

  CompactSVD c = compact_svd(inst.x0);  // rejects x0 == 0
  Mat e0 = e0_of(c);

  SolveResult sol = solve_nuclear_affine(inst.op, inst.m0, opts.solver);
  rep.solver_iterations = sol.iterations;
  rep.solver_converged = sol.converged;
  rep.solver_kkt_violation = sol.kkt_violation;
  rep.recovery_error = (sol.x_opt - inst.x0).norm() / inst.x0.norm();
  rep.recovered = sol.converged && rep.recovery_error < th.recovery;

  rep.ri = restricted_injectivity(inst);
  rep.strict_ri = strict_restricted_injectivity(inst);
  if (rep.ri) {
    rep.tau = coeff_tau(inst);
    rep.ic = coeff_ic(inst);
  }

  auto rho_res = coeff_rho(inst, opts.solver);
  if (rho_res) {
    rep.rho = rho_res->value;
    rep.dual_certificate = rho_res->y0;
    // validity is decided by the exact subgradient test; the solver's gap flag
    // only affects how tight the (upper-bound) value is
    rep.dual_certificate_valid =
        in_subdifferential(inst.x0, rho_res->y0, th.tol_p);
  }

  if (rep.dual_certificate_valid) {
    SimulSVD ss = simultaneous_svd(inst.x0, rep.dual_certificate, th.tol_p);
    rep.p_of_y0 = ss.p;
    rep.q_heuristic = ss.p;
    rep.strong_ri = strong_restricted_injectivity(inst, ss);
    rep.ssc = strong_sufficient_condition(inst, ss);
    rep.zeta = coeff_zeta(inst, ss, opts.solver);
    rep.gamma = coeff_gamma(inst, ss);
    rep.geometric = rep.strong_ri && rep.zeta &&
                    *rep.zeta < 1.0 - th.geometric_margin;

    if (opts.retry_certificates && !(rep.strong_ri && rep.zeta &&
                                     *rep.zeta < th.zeta_strong)) {
      for (double theta : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        Mat y_blend = rep.dual_certificate +
                      theta * (e0 - rep.dual_certificate);
        if (!in_subdifferential(inst.x0, y_blend, th.tol_p)) continue;
        SimulSVD ssb = simultaneous_svd(inst.x0, y_blend, th.tol_p);
        RetryResult rr;
        rr.theta = theta;
        rr.p = ssb.p;
        rr.strong_ri = strong_restricted_injectivity(inst, ssb);
        rr.zeta = coeff_zeta(inst, ssb, opts.solver);
        rep.experimental_retries.push_back(std::move(rr));
      }
    }
  }

  const bool solver_ok = sol.converged;
  const bool sharp = rep.recovered && rep.ri &&
                     ((rep.tau && *rep.tau < th.tau_sharp) ||
                      (rep.rho && *rep.rho < th.rho_sharp));
  const bool strong_cert = rep.recovered && rep.strong_ri && rep.zeta &&
                           *rep.zeta < th.zeta_strong;

  if (!solver_ok) {
    rep.label = Label::Inconclusive;
  } else if (!rep.recovered) {
    rep.label = Label::NotRecovered;
  } else if (sharp) {
    rep.label = Label::Sharp;
  } else if (strong_cert) {
    rep.label = Label::StrongNotSharp;
  } else {
    rep.label = Label::UniqueUnknown;
  }

  // banded protocol: strong additionally requires tau > tau_sharp (when
  // defined) and rho inside the band
  const bool band_ok = (!rep.tau || *rep.tau > th.tau_sharp) && rep.rho &&
                       *rep.rho > th.rho_band_lo && *rep.rho < th.rho_band_hi;
  if (!solver_ok) {
    rep.label_experiment = Label::Inconclusive;
  } else if (!rep.recovered) {
    rep.label_experiment = Label::NotRecovered;
  } else if (sharp) {
    rep.label_experiment = Label::Sharp;
  } else if (strong_cert && band_ok) {
    rep.label_experiment = Label::StrongNotSharp;
  } else {
    rep.label_experiment = Label::UniqueUnknown;
  }
  return rep;
}

}  // namespace strongmin
