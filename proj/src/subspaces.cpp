#include "strongmin/subspaces.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace strongmin {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Mat outer(const Mat& u_frame, Index i, const Mat& v_frame, Index j) {
  return u_frame.col(i) * v_frame.col(j).transpose();
}

// (u_i v_j^T + u_j v_i^T)/sqrt(2), or u_i v_i^T when i == j
Mat sym_pair(const Mat& u, const Mat& v, Index i, Index j) {
  if (i == j) return outer(u, i, v, i);
  return kInvSqrt2 * (outer(u, i, v, j) + outer(u, j, v, i));
}

Mat skew_pair(const Mat& u, const Mat& v, Index i, Index j) {
  return kInvSqrt2 * (outer(u, i, v, j) - outer(u, j, v, i));
}

void append_sym_block(std::vector<Mat>& out, const Mat& u, const Mat& v,
                      Index lo, Index hi) {
  for (Index i = lo; i < hi; ++i) out.push_back(sym_pair(u, v, i, i));
  for (Index i = lo; i < hi; ++i)
    for (Index j = i + 1; j < hi; ++j) out.push_back(sym_pair(u, v, i, j));
}

void append_skew_block(std::vector<Mat>& out, const Mat& u, const Mat& v,
                       Index lo, Index hi) {
  for (Index i = lo; i < hi; ++i)
    for (Index j = i + 1; j < hi; ++j) out.push_back(skew_pair(u, v, i, j));
}

void append_units(std::vector<Mat>& out, const Mat& u, const Mat& v,
                  Index row_lo, Index row_hi, Index col_lo, Index col_hi) {
  for (Index j = col_lo; j < col_hi; ++j)
    for (Index i = row_lo; i < row_hi; ++i) out.push_back(outer(u, i, v, j));
}

}  // namespace

Mat SubspaceBasis::stacked() const {
  Mat s(rows * cols, static_cast<Index>(elems.size()));
  for (std::size_t k = 0; k < elems.size(); ++k)
    s.col(static_cast<Index>(k)) = vec(elems[k]);
  return s;
}

CompactSVD compact_svd(const Mat& x, double tol_rel) {
  if (x.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "compact_svd: empty matrix");
  SvdResult f = svd_full(x);
  const double cut = f.sigma.size() > 0 ? tol_rel * f.sigma(0) : 0.0;
  int r = 0;
  while (r < f.sigma.size() && f.sigma(r) > cut) ++r;
  if (r == 0)
    throw Error(ErrorKind::DegenerateInput, "compact_svd: zero matrix");
  return {f.u.leftCols(r), f.sigma.head(r), f.v.leftCols(r), r};
}

bool in_subdifferential(const Mat& x, const Mat& y, double tol) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error(ErrorKind::InvalidArgument, "in_subdifferential: shape mismatch");
  const double nn = nuclear_norm(x);
  if (spectral_norm(y) > 1.0 + tol) return false;
  const double fenchel_gap = std::abs((y.array() * x.array()).sum() - nn);
  return fenchel_gap <= tol * (1.0 + nn);
}

int p_count(const Mat& y, double tol_p) {
  Vec s = singular_values(y);
  int p = 0;
  while (p < s.size() && s(p) >= 1.0 - tol_p) ++p;
  return p;
}

Mat complete_frame(const Mat& q1) {
  const Index n = q1.rows(), k = q1.cols();
  if (k == 0) return Mat::Identity(n, n);
  if (k >= n) return Mat(n, 0);
  Eigen::HouseholderQR<Mat> qr(q1);
  Mat q = qr.householderQ();
  return q.rightCols(n - k);
}

SimulSVD simultaneous_svd(const Mat& x0, const Mat& y0, double tol_p,
                          double rank_tol_rel) {
  if (!in_subdifferential(x0, y0, tol_p))
    throw Error(ErrorKind::ContractViolation,
                "simultaneous_svd: y0 is not a subgradient of the nuclear norm at x0");
  CompactSVD c = compact_svd(x0, rank_tol_rel);
  const Index n1 = x0.rows(), n2 = x0.cols();
  const int r = c.r;
  const Mat u_j = complete_frame(c.u);
  const Mat v_k = complete_frame(c.v);

  Mat u_bar(n1, n1), v_bar(n2, n2);
  u_bar.leftCols(r) = c.u;
  v_bar.leftCols(r) = c.v;
  Vec sigma_w;
  if (n1 - r > 0 && n2 - r > 0) {
    SvdResult wsvd = svd_full(u_j.transpose() * y0 * v_k);
    u_bar.rightCols(n1 - r) = u_j * wsvd.u;
    v_bar.rightCols(n2 - r) = v_k * wsvd.v;
    sigma_w = wsvd.sigma;
  } else {
    u_bar.rightCols(n1 - r) = u_j;
    v_bar.rightCols(n2 - r) = v_k;
    sigma_w = Vec(0);
  }

  const Index nmin = std::min(n1, n2);
  Vec sigma_x = Vec::Zero(nmin), sigma_y = Vec::Zero(nmin);
  sigma_x.head(r) = c.sigma;
  sigma_y.head(r).setOnes();
  sigma_y.segment(r, sigma_w.size()) = sigma_w;

  int p = r;
  for (Index i = 0; i < sigma_w.size(); ++i)
    if (sigma_w(i) >= 1.0 - tol_p) ++p;
  return {std::move(u_bar), std::move(v_bar), std::move(sigma_x),
          std::move(sigma_y), r, p};
}

Mat proj_Tperp(const Mat& w, const CompactSVD& c) {
  if (w.rows() != c.u.rows() || w.cols() != c.v.rows())
    throw Error(ErrorKind::InvalidArgument, "proj_Tperp: shape mismatch");
  Mat tmp = w - c.u * (c.u.transpose() * w);
  return tmp - (tmp * c.v) * c.v.transpose();
}

Mat proj_T(const Mat& w, const CompactSVD& c) {
  return w - proj_Tperp(w, c);
}

SubspaceBasis basis_T0(const CompactSVD& c) {
  const Index n1 = c.u.rows(), n2 = c.v.rows(), r = c.r;
  Mat u_full(n1, n1), v_full(n2, n2);
  u_full << c.u, complete_frame(c.u);
  v_full << c.v, complete_frame(c.v);
  SubspaceBasis b{n1, n2, {}, SubspaceLabel::T0};
  for (Index j = 0; j < n2; ++j)
    for (Index i = 0; i < n1; ++i)
      if (i < r || j < r) b.elems.push_back(outer(u_full, i, v_full, j));
  return b;
}

SubspaceBasis basis_T0perp(const CompactSVD& c) {
  const Index n1 = c.u.rows(), n2 = c.v.rows(), r = c.r;
  const Mat u_j = complete_frame(c.u);
  const Mat v_k = complete_frame(c.v);
  SubspaceBasis b{n1, n2, {}, SubspaceLabel::T0perp};
  append_units(b.elems, u_j, v_k, 0, n1 - r, 0, n2 - r);
  return b;
}

SubspaceBasis basis_EcapT(const SimulSVD& ss) {
  const Index n1 = ss.u_bar.rows(), n2 = ss.v_bar.rows();
  const Index r = ss.r, p = ss.p;
  SubspaceBasis b{n1, n2, {}, SubspaceLabel::EcapT};
  append_sym_block(b.elems, ss.u_bar, ss.v_bar, 0, r);
  for (Index i = 0; i < r; ++i)
    for (Index k = r; k < p; ++k)
      b.elems.push_back(sym_pair(ss.u_bar, ss.v_bar, i, k));
  return b;
}

EBasis basis_E(const SimulSVD& ss) {
  const Index n1 = ss.u_bar.rows(), n2 = ss.v_bar.rows();
  const Index r = ss.r, p = ss.p;
  EBasis e;
  SubspaceBasis cap = basis_EcapT(ss);
  e.basis.rows = n1;
  e.basis.cols = n2;
  e.basis.label = SubspaceLabel::E;
  e.basis.elems = std::move(cap.elems);
  e.s = e.basis.dim();
  // symmetric part of the (p-r) x (p-r) block completes the p x p symmetric
  // subspace; everything after index l lives in T0-perp
  append_sym_block(e.basis.elems, ss.u_bar, ss.v_bar, r, p);
  e.l = e.basis.dim();
  append_skew_block(e.basis.elems, ss.u_bar, ss.v_bar, r, p);
  append_units(e.basis.elems, ss.u_bar, ss.v_bar, r, p, p, n2);
  append_units(e.basis.elems, ss.u_bar, ss.v_bar, p, n1, r, n2);
  return e;
}

SubspaceBasis basis_Eperp(const SimulSVD& ss) {
  const Index n1 = ss.u_bar.rows(), n2 = ss.v_bar.rows();
  const Index r = ss.r, p = ss.p;
  SubspaceBasis b{n1, n2, {}, SubspaceLabel::Eperp};
  append_skew_block(b.elems, ss.u_bar, ss.v_bar, 0, r);
  for (Index i = 0; i < r; ++i)
    for (Index k = r; k < p; ++k)
      b.elems.push_back(skew_pair(ss.u_bar, ss.v_bar, i, k));
  append_units(b.elems, ss.u_bar, ss.v_bar, 0, r, p, n2);
  append_units(b.elems, ss.u_bar, ss.v_bar, p, n1, 0, r);
  return b;
}

SubspaceBasis basis_UsrV(const CompactSVD& c) {
  SubspaceBasis b{c.u.rows(), c.v.rows(), {}, SubspaceLabel::UsrV};
  append_sym_block(b.elems, c.u, c.v, 0, c.r);
  return b;
}

SubspaceBasis basis_SuffSp(const SimulSVD& ss) {
  SubspaceBasis b{ss.u_bar.rows(), ss.v_bar.rows(), {}, SubspaceLabel::SuffSp};
  append_sym_block(b.elems, ss.u_bar, ss.v_bar, 0, ss.p);
  return b;
}

bool tangent_cone_member(const Mat& w, const SimulSVD& ss, double tol) {
  const Index n1 = ss.u_bar.rows(), n2 = ss.v_bar.rows();
  if (w.rows() != n1 || w.cols() != n2)
    throw Error(ErrorKind::InvalidArgument, "tangent_cone_member: shape mismatch");
  const Index r = ss.r, p = ss.p;
  const double eff = tol * (1.0 + w.norm());
  Mat m = ss.u_bar.transpose() * w * ss.v_bar;

  double outside = 0.0;
  if (n2 > p) outside += m.block(0, p, n1, n2 - p).squaredNorm();
  if (n1 > p) outside += m.block(p, 0, n1 - p, p).squaredNorm();
  if (std::sqrt(outside) > eff) return false;

  Mat a = m.block(0, 0, r, r);
  if ((a - a.transpose()).norm() > eff) return false;
  if (p > r) {
    Mat b12 = m.block(0, r, r, p - r);
    Mat b21 = m.block(r, 0, p - r, r);
    if ((b12 - b21.transpose()).norm() > eff) return false;
    Mat cblk = m.block(r, r, p - r, p - r);
    Mat csym = 0.5 * (cblk + cblk.transpose());
    if ((cblk - cblk.transpose()).norm() > eff) return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(csym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eff) return false;
  }
  return true;
}

bool critical_cone_member(const Mat& w, const SimulSVD& ss, const CompactSVD& c,
                          double tol) {
  const Index r = ss.r, p = ss.p;
  const double eff = tol * (1.0 + w.norm());
  Mat z = proj_Tperp(w, c);
  if (p == r) return z.norm() <= eff;
  Mat uh = ss.u_bar.middleCols(r, p - r);
  Mat vh = ss.v_bar.middleCols(r, p - r);
  Mat b = uh.transpose() * z * vh;
  if ((z - uh * b * vh.transpose()).norm() > eff) return false;
  if ((b - b.transpose()).norm() > eff) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b + b.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -eff;
}

}  // namespace strongmin
