#pragma once

#include "strongmin/subspaces.hpp"

#include <utility>
#include <vector>

namespace strongmin {

enum class OpKind { Dense, EntryMask, LeftMult, InnerFamily };

/// Measurement operator R^{n1 x n2} -> R^m in one of four concrete forms.
/// Immutable after construction; the dense m x (n1*n2) representation on vec
/// coordinates is built eagerly so instances are safe to share across threads.
class LinOp {
 public:
  static LinOp dense(Mat a, Index n1, Index n2);
  static LinOp entry_mask(std::vector<std::pair<Index, Index>> omega, Index n1,
                          Index n2);
  static LinOp left_mult(Mat l, Index n1, Index n2);
  static LinOp inner_family(std::vector<Mat> mats, Index n1, Index n2);

  Vec apply(const Mat& x) const;
  Mat adjoint_apply(const Vec& y) const;

  OpKind kind() const { return kind_; }
  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  Index m() const { return dense_.rows(); }
  /// m x (n1*n2) matrix acting on vec(X).
  const Mat& dense_matrix() const { return dense_; }

  const std::vector<std::pair<Index, Index>>& mask() const { return omega_; }
  const Mat& left_factor() const { return left_; }
  const std::vector<Mat>& family() const { return family_; }

 private:
  LinOp() = default;
  OpKind kind_ = OpKind::Dense;
  Index n1_ = 0, n2_ = 0;
  Mat dense_;
  std::vector<std::pair<Index, Index>> omega_;
  Mat left_;
  std::vector<Mat> family_;
};

/// Orthonormal basis of Ker(op) as matrices.
SubspaceBasis kernel_basis(const LinOp& op, double tol_rel = kRankTol);

/// Operator N with Ker N = Im op^*, stored as a d x (n1*n2) matrix of
/// orthonormal rows acting on vec coordinates. For entry masks the rows are
/// the unobserved coordinate selectors.
struct AnnihilatorN {
  Mat n;
  Index n1 = 0, n2 = 0;
  Vec apply_vec(const Vec& x) const { return n * x; }
};

AnnihilatorN annihilator(const LinOp& op, double tol_rel = kRankTol);

/// m x q matrix whose k-th column is op applied to the k-th ordered E-basis
/// element.
Mat build_psi(const LinOp& op, const EBasis& e);

/// Operator M with Im M^* = Ker op ∩ span(E-basis), codomain dimension q - k.
struct OperatorM {
  Mat v_g;                   // q x (q-k)
  std::vector<Mat> basis_e;  // the ordered E basis
  Index n1 = 0, n2 = 0;

  Index codim() const { return v_g.cols(); }
  Vec apply(const Mat& x) const;
  Mat adjoint_apply(const Vec& y) const;
};

OperatorM build_m(const LinOp& op, const EBasis& e, double tol_rel = kRankTol);

/// Inner-product family with m = r(r+1)/2 measurements spanning the symmetric
/// subspace attached to the compact SVD; a random orthonormal basis of it, so
/// distinct seeds give distinct operators with the same guarantees.
LinOp minimal_phi(const CompactSVD& c, Rng& rng);

}  // namespace strongmin
