#include "strongmin/measure_ops.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace strongmin {

namespace {

Index linear_index(Index i, Index j, Index n1) { return j * n1 + i; }

}  // namespace

LinOp LinOp::dense(Mat a, Index n1, Index n2) {
  if (n1 <= 0 || n2 <= 0 || a.cols() != n1 * n2)
    throw Error(ErrorKind::InvalidArgument, "LinOp::dense: bad shape");
  require_finite(a, "LinOp::dense");
  LinOp op;
  op.kind_ = OpKind::Dense;
  op.n1_ = n1;
  op.n2_ = n2;
  op.dense_ = std::move(a);
  return op;
}

LinOp LinOp::entry_mask(std::vector<std::pair<Index, Index>> omega, Index n1,
                        Index n2) {
  if (n1 <= 0 || n2 <= 0)
    throw Error(ErrorKind::InvalidArgument, "LinOp::entry_mask: bad shape");
  std::vector<char> seen(static_cast<std::size_t>(n1 * n2), 0);
  for (auto [i, j] : omega) {
    if (i < 0 || i >= n1 || j < 0 || j >= n2)
      throw Error(ErrorKind::InvalidArgument,
                  "LinOp::entry_mask: index out of range");
    auto lin = static_cast<std::size_t>(linear_index(i, j, n1));
    if (seen[lin])
      throw Error(ErrorKind::InvalidArgument,
                  "LinOp::entry_mask: duplicate index");
    seen[lin] = 1;
  }
  LinOp op;
  op.kind_ = OpKind::EntryMask;
  op.n1_ = n1;
  op.n2_ = n2;
  op.dense_ = Mat::Zero(static_cast<Index>(omega.size()), n1 * n2);
  for (std::size_t k = 0; k < omega.size(); ++k)
    op.dense_(static_cast<Index>(k),
              linear_index(omega[k].first, omega[k].second, n1)) = 1.0;
  op.omega_ = std::move(omega);
  return op;
}

LinOp LinOp::left_mult(Mat l, Index n1, Index n2) {
  if (n1 <= 0 || n2 <= 0 || l.cols() != n1)
    throw Error(ErrorKind::InvalidArgument, "LinOp::left_mult: bad shape");
  require_finite(l, "LinOp::left_mult");
  const Index q = l.rows();
  LinOp op;
  op.kind_ = OpKind::LeftMult;
  op.n1_ = n1;
  op.n2_ = n2;
  // vec(L X) = (I_{n2} ⊗ L) vec(X)
  op.dense_ = Mat::Zero(q * n2, n1 * n2);
  for (Index j = 0; j < n2; ++j)
    op.dense_.block(j * q, j * n1, q, n1) = l;
  op.left_ = std::move(l);
  return op;
}

LinOp LinOp::inner_family(std::vector<Mat> mats, Index n1, Index n2) {
  if (n1 <= 0 || n2 <= 0)
    throw Error(ErrorKind::InvalidArgument, "LinOp::inner_family: bad shape");
  LinOp op;
  op.kind_ = OpKind::InnerFamily;
  op.n1_ = n1;
  op.n2_ = n2;
  op.dense_ = Mat::Zero(static_cast<Index>(mats.size()), n1 * n2);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (mats[k].rows() != n1 || mats[k].cols() != n2)
      throw Error(ErrorKind::InvalidArgument,
                  "LinOp::inner_family: element shape mismatch");
    require_finite(mats[k], "LinOp::inner_family");
    op.dense_.row(static_cast<Index>(k)) = vec(mats[k]).transpose();
  }
  op.family_ = std::move(mats);
  return op;
}

Vec LinOp::apply(const Mat& x) const {
  if (x.rows() != n1_ || x.cols() != n2_)
    throw Error(ErrorKind::InvalidArgument, "LinOp::apply: shape mismatch");
  switch (kind_) {
    case OpKind::EntryMask: {
      Vec y(static_cast<Index>(omega_.size()));
      for (std::size_t k = 0; k < omega_.size(); ++k)
        y(static_cast<Index>(k)) = x(omega_[k].first, omega_[k].second);
      return y;
    }
    case OpKind::LeftMult:
      return vec(left_ * x);
    default:
      return dense_ * vec(x);
  }
}

Mat LinOp::adjoint_apply(const Vec& y) const {
  if (y.size() != m())
    throw Error(ErrorKind::InvalidArgument, "LinOp::adjoint_apply: size mismatch");
  switch (kind_) {
    case OpKind::EntryMask: {
      Mat x = Mat::Zero(n1_, n2_);
      for (std::size_t k = 0; k < omega_.size(); ++k)
        x(omega_[k].first, omega_[k].second) = y(static_cast<Index>(k));
      return x;
    }
    case OpKind::LeftMult:
      return left_.transpose() * unvec(y, left_.rows(), n2_);
    default:
      return unvec(dense_.transpose() * y, n1_, n2_);
  }
}

SubspaceBasis kernel_basis(const LinOp& op, double tol_rel) {
  const Index d = op.n1() * op.n2();
  SubspaceBasis b{op.n1(), op.n2(), {}, SubspaceLabel::Kernel};
  if (op.m() == 0) {
    for (Index j = 0; j < op.n2(); ++j)
      for (Index i = 0; i < op.n1(); ++i) {
        Mat e = Mat::Zero(op.n1(), op.n2());
        e(i, j) = 1.0;
        b.elems.push_back(std::move(e));
      }
    return b;
  }
  Eigen::BDCSVD<Mat> svd(op.dense_matrix(), Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cut = s.size() > 0 ? tol_rel * std::max(s(0), 0.0) : 0.0;
  Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  for (Index j = rank; j < d; ++j)
    b.elems.push_back(unvec(svd.matrixV().col(j), op.n1(), op.n2()));
  return b;
}

AnnihilatorN annihilator(const LinOp& op, double tol_rel) {
  AnnihilatorN a;
  a.n1 = op.n1();
  a.n2 = op.n2();
  const Index d = op.n1() * op.n2();
  if (op.kind() == OpKind::EntryMask) {
    // rows pick the unobserved coordinates
    std::vector<char> observed(static_cast<std::size_t>(d), 0);
    for (auto [i, j] : op.mask())
      observed[static_cast<std::size_t>(linear_index(i, j, op.n1()))] = 1;
    const Index rows = d - static_cast<Index>(op.mask().size());
    a.n = Mat::Zero(rows, d);
    Index rr = 0;
    for (Index k = 0; k < d; ++k)
      if (!observed[static_cast<std::size_t>(k)]) a.n(rr++, k) = 1.0;
    return a;
  }
  SubspaceBasis kb = kernel_basis(op, tol_rel);
  a.n = Mat(kb.dim(), d);
  for (int k = 0; k < kb.dim(); ++k)
    a.n.row(k) = vec(kb.elems[static_cast<std::size_t>(k)]).transpose();
  return a;
}

Mat build_psi(const LinOp& op, const EBasis& e) {
  const int q = e.basis.dim();
  if (e.s <= 0 || e.l < e.s || e.l > q)
    throw Error(ErrorKind::ContractViolation,
                "build_psi: E-basis ordering contract violated");
  Mat psi(op.m(), q);
  for (int k = 0; k < q; ++k)
    psi.col(k) = op.apply(e.basis.elems[static_cast<std::size_t>(k)]);
  return psi;
}

Vec OperatorM::apply(const Mat& x) const {
  Vec inner(static_cast<Index>(basis_e.size()));
  for (std::size_t k = 0; k < basis_e.size(); ++k)
    inner(static_cast<Index>(k)) = (basis_e[k].array() * x.array()).sum();
  return v_g.transpose() * inner;
}

Mat OperatorM::adjoint_apply(const Vec& y) const {
  Vec coeff = v_g * y;
  Mat x = Mat::Zero(n1, n2);
  for (std::size_t k = 0; k < basis_e.size(); ++k)
    x += coeff(static_cast<Index>(k)) * basis_e[k];
  return x;
}

OperatorM build_m(const LinOp& op, const EBasis& e, double tol_rel) {
  Mat psi = build_psi(op, e);
  const Index q = psi.cols();
  OperatorM m;
  m.basis_e = e.basis.elems;
  m.n1 = op.n1();
  m.n2 = op.n2();
  if (op.m() == 0) {
    m.v_g = Mat::Identity(q, q);
    return m;
  }
  Eigen::BDCSVD<Mat> svd(psi, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cut = s.size() > 0 ? tol_rel * std::max(s(0), 0.0) : 0.0;
  Index k = 0;
  while (k < s.size() && s(k) > cut) ++k;
  m.v_g = svd.matrixV().rightCols(q - k);
  return m;
}

LinOp minimal_phi(const CompactSVD& c, Rng& rng) {
  SubspaceBasis sym = basis_UsrV(c);
  const int s = sym.dim();
  // random invertible mix of the symmetric basis, re-orthonormalized
  Mat coeffs = gaussian_mat(rng, s, s);
  std::vector<Mat> mixed;
  mixed.reserve(static_cast<std::size_t>(s));
  for (int k = 0; k < s; ++k) {
    Mat a = Mat::Zero(sym.rows, sym.cols);
    for (int i = 0; i < s; ++i)
      a += coeffs(i, k) * sym.elems[static_cast<std::size_t>(i)];
    mixed.push_back(std::move(a));
  }
  std::vector<Mat> basis = orthonormalize(mixed);
  if (static_cast<int>(basis.size()) != s)
    throw Error(ErrorKind::NumericalFailure,
                "minimal_phi: random mix lost rank");
  return LinOp::inner_family(std::move(basis), sym.rows, sym.cols);
}

}  // namespace strongmin
