#include "strongmin/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace strongmin {

namespace {

double subdiff_violation(const Mat& x, const Mat& y) {
  const double nn = nuclear_norm(x);
  const double spec_excess = std::max(0.0, spectral_norm(y) - 1.0);
  const double fenchel = std::abs((y.array() * x.array()).sum() - nn) / (1.0 + nn);
  return std::max(spec_excess, fenchel);
}

}  // namespace

Vec simplex_cap_sorted(const Vec& sorted_desc, double radius) {
  if (radius < 0)
    throw Error(ErrorKind::InvalidArgument, "simplex_cap_sorted: radius < 0");
  const Index k = sorted_desc.size();
  if (sorted_desc.sum() <= radius) return sorted_desc;
  // active case: project onto {sum = radius, s >= 0}
  double cum = 0.0;
  double theta = 0.0;
  Index rho = 0;
  for (Index i = 0; i < k; ++i) {
    cum += sorted_desc(i);
    const double cand = (cum - radius) / static_cast<double>(i + 1);
    if (sorted_desc(i) - cand > 0) {
      rho = i + 1;
      theta = cand;
    }
  }
  return (sorted_desc.array() - theta).max(0.0).matrix();
}

Mat prox_nuclear(const Mat& x, double lambda) {
  if (lambda < 0)
    throw Error(ErrorKind::InvalidArgument, "prox_nuclear: lambda < 0");
  if (lambda == 0.0 || x.size() == 0) return x;
  SvdResult f = svd_full(x);
  Vec s = (f.sigma.array() - lambda).max(0.0).matrix();
  const Index k = s.size();
  return f.u.leftCols(k) * s.asDiagonal() * f.v.leftCols(k).transpose();
}

Mat project_nuclear_ball(const Mat& x, double radius) {
  if (radius < 0)
    throw Error(ErrorKind::InvalidArgument, "project_nuclear_ball: radius < 0");
  if (x.size() == 0) return x;
  if (radius == 0.0) return Mat::Zero(x.rows(), x.cols());
  SvdResult f = svd_full(x);
  if (f.sigma.sum() <= radius) return x;
  Vec s = simplex_cap_sorted(f.sigma, radius);
  const Index k = s.size();
  return f.u.leftCols(k) * s.asDiagonal() * f.v.leftCols(k).transpose();
}

Mat prox_spectral(const Mat& x, double lambda) {
  if (lambda < 0)
    throw Error(ErrorKind::InvalidArgument, "prox_spectral: lambda < 0");
  if (lambda == 0.0 || x.size() == 0) return x;
  return x - project_nuclear_ball(x, lambda);
}

SolveResult solve_nuclear_affine(const LinOp& op, const Vec& m0,
                                 const SolverConfig& cfg) {
  if (m0.size() != op.m())
    throw Error(ErrorKind::InvalidArgument, "solve_nuclear_affine: m0 size mismatch");
  const Index n1 = op.n1(), n2 = op.n2();
  SolveResult res;
  if (op.m() == 0) {
    res.x_opt = Mat::Zero(n1, n2);
    res.dual_certificate = Mat::Zero(n1, n2);
    res.converged = true;
    return res;
  }

  const Mat& a = op.dense_matrix();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  const Mat apinv = cod.pseudoInverse();

  Vec x_ls = apinv * m0;
  const double consistency = (a * x_ls - m0).norm();
  if (consistency > 1e-8 * (1.0 + m0.norm()))
    throw Error(ErrorKind::Infeasible, "solve_nuclear_affine: inconsistent system");

  Mat x = unvec(x_ls, n1, n2);
  const double scale = std::max(spectral_norm(x), 1e-12);
  const double t = cfg.step * 0.5 * scale;

  Mat s = x;
  Mat y = x;
  double gap_rel = 0.0;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    x = s - unvec(apinv * (a * vec(s) - m0), n1, n2);
    y = prox_nuclear(2.0 * x - s, t);
    const double gap = (y - x).norm();
    gap_rel = gap / (1.0 + x.norm());
    if (gap_rel <= cfg.tol_dual) {
      ++it;
      break;
    }
    s += y - x;
  }

  Mat y_raw = (2.0 * x - s - y) / t;
  Vec y_proj = apinv * (a * vec(y_raw));  // projection onto Im op^*
  res.dual_certificate = unvec(y_proj, n1, n2);
  res.x_opt = x;
  res.objective = nuclear_norm(x);
  res.primal_residual = (a * vec(x) - m0).norm() / (1.0 + m0.norm());
  res.dual_residual = gap_rel;
  res.iterations = it;
  res.converged = gap_rel <= cfg.tol_dual && res.primal_residual <= cfg.tol_primal;
  res.kkt_violation = subdiff_violation(res.x_opt, res.dual_certificate);
  return res;
}

SpectralAffineResult solve_spectral_affine(const SubspaceBasis& z_basis,
                                           const Mat& n_mat, const Vec& rhs,
                                           const SubspaceBasis* slack_basis,
                                           const SolverConfig& cfg) {
  const Index n1 = z_basis.rows, n2 = z_basis.cols;
  const Index d1 = z_basis.dim();
  const Index d2 = slack_basis ? slack_basis->dim() : 0;
  if (n_mat.cols() != n1 * n2)
    throw Error(ErrorKind::InvalidArgument, "solve_spectral_affine: N shape mismatch");
  if (n_mat.rows() != rhs.size())
    throw Error(ErrorKind::InvalidArgument, "solve_spectral_affine: rhs size mismatch");

  SpectralAffineResult res;
  res.slack_coeffs = Vec::Zero(d2);
  if (n_mat.rows() == 0) {
    res.z_opt = Mat::Zero(n1, n2);
    res.converged = true;
    return res;
  }
  if (d1 + d2 == 0) {
    if (rhs.norm() > 1e-8 * (1.0 + rhs.norm()))
      throw Error(ErrorKind::Infeasible,
                  "solve_spectral_affine: no variables but nonzero rhs");
    res.z_opt = Mat::Zero(n1, n2);
    res.converged = true;
    return res;
  }

  const Mat bz = z_basis.stacked();
  Mat ab(n_mat.rows(), d1 + d2);
  ab.leftCols(d1) = n_mat * bz;
  Mat bw;
  if (d2 > 0) {
    bw = slack_basis->stacked();
    ab.rightCols(d2) = n_mat * bw;
  }

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(ab);
  const Mat abpinv = cod.pseudoInverse();
  Vec zeta_ls = abpinv * rhs;
  if ((ab * zeta_ls - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
    throw Error(ErrorKind::Infeasible, "solve_spectral_affine: inconsistent system");

  auto z_mat_of = [&](const Vec& zeta) { return unvec(bz * zeta.head(d1), n1, n2); };

  // value zero is attainable iff the system is consistent with z = 0; handling
  // it up front spares the splitting its slowest (kink at zero) regime
  if (d2 > 0) {
    Eigen::CompleteOrthogonalDecomposition<Mat> wcod(ab.rightCols(d2));
    Vec w_only = wcod.solve(rhs);
    if ((ab.rightCols(d2) * w_only - rhs).norm() <= 1e-10 * (1.0 + rhs.norm())) {
      res.z_opt = Mat::Zero(n1, n2);
      res.slack_coeffs = w_only;
      res.converged = true;
      return res;
    }
  } else if (rhs.norm() <= 1e-10) {
    res.z_opt = Mat::Zero(n1, n2);
    res.converged = true;
    return res;
  }

  const double ls_scale = std::max(spectral_norm(z_mat_of(zeta_ls)), 1e-12);

  // the z subspace must be invariant under the spectral prox
  {
    Mat p = prox_spectral(z_mat_of(zeta_ls), 0.5 * ls_scale);
    if ((vec(p) - bz * (bz.transpose() * vec(p))).norm() > 1e-8 * (1.0 + p.norm()))
      throw Error(ErrorKind::ContractViolation,
                  "solve_spectral_affine: z basis not prox-invariant");
  }

  // relaxed splitting with periodic step rescaling to the current value
  const double relax = 1.7;
  double t = cfg.step * 0.5 * ls_scale;
  Vec s = zeta_ls, x = zeta_ls, y = zeta_ls;
  double gap_rel = 0.0;
  int it = 0;
  const int phase_len = std::max(1, cfg.max_iter / 5);
  while (it < cfg.max_iter) {
    const int phase_end = std::min(cfg.max_iter, it + phase_len);
    for (; it < phase_end; ++it) {
      x = s - abpinv * (ab * s - rhs);
      Mat p = prox_spectral(z_mat_of(2.0 * x - s), t);
      y = 2.0 * x - s;
      y.head(d1) = bz.transpose() * vec(p);
      const double gap = (y - x).norm();
      gap_rel = gap / (1.0 + x.norm());
      if (gap_rel <= cfg.tol_dual) {
        ++it;
        break;
      }
      s += relax * (y - x);
    }
    if (gap_rel <= cfg.tol_dual) break;
    const double current = spectral_norm(z_mat_of(x));
    t = cfg.step * 0.5 * std::max(current, 1e-6 * ls_scale);
  }

  res.z_opt = z_mat_of(x);
  res.slack_coeffs = x.tail(d2);
  res.value = spectral_norm(res.z_opt);
  res.primal_residual = (ab * x - rhs).norm() / (1.0 + rhs.norm());
  res.dual_residual = gap_rel;
  res.iterations = it;
  res.converged = gap_rel <= cfg.tol_dual && res.primal_residual <= cfg.tol_primal;

  // cheap local certificate: feasible perturbations at 20% scale must not improve
  Rng probe_rng(0x9e3779b9u ^ static_cast<std::uint64_t>(d1 + 7 * d2));
  const double radius = 0.2 * (1.0 + x.norm());
  for (int k = 0; k < 20; ++k) {
    Vec g(d1 + d2);
    for (Index i = 0; i < g.size(); ++i) g(i) = probe_rng.normal();
    Vec dir = g - abpinv * (ab * g);
    const double nd = dir.norm();
    if (nd < 1e-14) continue;
    Vec cand = x + (radius / nd) * dir;
    if (spectral_norm(z_mat_of(cand)) < res.value - 1e-6 * (1.0 + res.value)) {
      res.local_opt_ok = false;
      break;
    }
  }
  return res;
}

SolveResult solve_regularized(const LinOp& op, const Vec& m, double mu,
                              const SolverConfig& cfg) {
  if (mu <= 0)
    throw Error(ErrorKind::InvalidArgument, "solve_regularized: mu must be > 0");
  if (m.size() != op.m())
    throw Error(ErrorKind::InvalidArgument, "solve_regularized: m size mismatch");
  const Index n1 = op.n1(), n2 = op.n2();
  SolveResult res;
  if (op.m() == 0) {
    res.x_opt = Mat::Zero(n1, n2);
    res.dual_certificate = Mat::Zero(n1, n2);
    res.converged = true;
    return res;
  }

  const Mat& a = op.dense_matrix();
  const Index d = a.cols(), mm = a.rows();
  Vec sv = singular_values(a);
  const double lmax = sv.size() > 0 ? sv(0) : 0.0;
  const double t = cfg.step / std::max(lmax * lmax, 1e-12);

  // prox of 0.5*||A x - m||^2: solve (I + t A^T A) x = x0 + t A^T m,
  // factoring whichever Gram side is smaller
  const bool small_side_m = mm < d;
  Eigen::LLT<Mat> llt;
  if (small_side_m)
    llt.compute(Mat::Identity(mm, mm) + t * (a * a.transpose()));
  else
    llt.compute(Mat::Identity(d, d) + t * (a.transpose() * a));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalFailure, "solve_regularized: factorization failed");
  const Vec atm = a.transpose() * m;
  auto prox_f = [&](const Vec& x0) -> Vec {
    Vec b = x0 + t * atm;
    if (small_side_m) return b - t * (a.transpose() * llt.solve(a * b));
    return llt.solve(b);
  };

  // the fixed-point gap controls the stationarity error only up to a factor
  // (||A||^2 + 1/t)/mu, so convergence is decided on the certificate itself
  auto stationarity = [&](const Vec& y) {
    Vec grad = a.transpose() * (a * y - m);
    return subdiff_violation(unvec(y, n1, n2), unvec(-grad / mu, n1, n2));
  };

  Vec s = Vec::Zero(d), x = s, y = s;
  double gap_rel = 0.0, kkt = 1.0;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    x = prox_f(s);
    Mat ym = prox_nuclear(unvec(2.0 * x - s, n1, n2), t * mu);
    y = vec(ym);
    const double gap = (y - x).norm();
    gap_rel = gap / (1.0 + x.norm());
    if (gap_rel <= cfg.tol_dual && it % 25 == 0) {
      kkt = stationarity(y);
      if (kkt <= 1e-6) {
        ++it;
        break;
      }
    }
    s += y - x;
  }

  res.x_opt = unvec(y, n1, n2);  // the low-rank iterate
  res.objective = nuclear_norm(res.x_opt);
  Vec grad = a.transpose() * (a * y - m);
  res.dual_certificate = unvec(-grad / mu, n1, n2);
  res.kkt_violation = subdiff_violation(res.x_opt, res.dual_certificate);
  res.primal_residual = res.kkt_violation;
  res.dual_residual = gap_rel;
  res.iterations = it;
  res.converged = gap_rel <= cfg.tol_dual && res.kkt_violation <= 1e-5;
  return res;
}

Mat lrr_closed_form(const Mat& l_mat, const Mat& m0_mat) {
  if (l_mat.size() == 0 || m0_mat.size() == 0 || l_mat.rows() != m0_mat.rows())
    throw Error(ErrorKind::InvalidArgument, "lrr_closed_form: shape mismatch");
  Mat x = pinv(l_mat) * m0_mat;
  if ((l_mat * x - m0_mat).norm() > 1e-8 * (1.0 + m0_mat.norm()))
    throw Error(ErrorKind::Infeasible, "lrr_closed_form: LX = M0 is inconsistent");
  return x;
}

}  // namespace strongmin
