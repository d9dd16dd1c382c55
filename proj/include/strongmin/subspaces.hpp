#pragma once

#include "strongmin/numkernel.hpp"

#include <vector>

namespace strongmin {

enum class SubspaceLabel {
  T0,
  T0perp,
  E,
  EcapT,
  Eperp,
  UsrV,
  SuffSp,
  Kernel,
  Custom,
};

/// Ordered orthonormal list of n1 x n2 matrices spanning a named subspace.
struct SubspaceBasis {
  Index rows = 0;
  Index cols = 0;
  std::vector<Mat> elems;
  SubspaceLabel label = SubspaceLabel::Custom;

  int dim() const { return static_cast<int>(elems.size()); }
  /// rows*cols x dim matrix whose columns are vec(elems[k]).
  Mat stacked() const;
};

struct CompactSVD {
  Mat u;      // n1 x r, orthonormal columns
  Vec sigma;  // length r, positive
  Mat v;      // n2 x r, orthonormal columns
  int r = 0;
};

/// Compact SVD at the rank tolerance; rejects the zero matrix.
CompactSVD compact_svd(const Mat& x, double tol_rel = kRankTol);

/// Membership test for the nuclear-norm subdifferential at x:
/// sigma_1(y) <= 1 + tol and <y,x> == ||x||_* within tol*(1+||x||_*).
bool in_subdifferential(const Mat& x, const Mat& y, double tol = 1e-8);

/// Number of singular values of y within tol_p of 1 (requires sigma_1 <= 1+tol_p).
int p_count(const Mat& y, double tol_p = kPTol);

/// One orthogonal pair diagonalizing both x0 and a subgradient y0 of it.
struct SimulSVD {
  Mat u_bar;    // n1 x n1
  Mat v_bar;    // n2 x n2
  Vec sigma_x;  // min(n1,n2)
  Vec sigma_y;  // min(n1,n2)
  int r = 0;    // rank of x0
  int p = 0;    // number of unit singular values of y0
};

SimulSVD simultaneous_svd(const Mat& x0, const Mat& y0, double tol_p = kPTol,
                          double rank_tol_rel = kRankTol);

/// Projections onto the model tangent subspace of the compact SVD and its
/// orthogonal complement; complementary, idempotent, self-adjoint.
Mat proj_T(const Mat& w, const CompactSVD& c);
Mat proj_Tperp(const Mat& w, const CompactSVD& c);

/// Deterministic orthonormal completion: n x (n-k) columns orthogonal to the
/// k orthonormal columns of q1.
Mat complete_frame(const Mat& q1);

SubspaceBasis basis_T0(const CompactSVD& c);
SubspaceBasis basis_T0perp(const CompactSVD& c);

/// Ordered basis of the subspace E attached to a simultaneous SVD: the first
/// s elements span E ∩ T and the first l span the p x p symmetric-block
/// subspace used by the sufficient-condition rank test.
struct EBasis {
  SubspaceBasis basis;
  int s = 0;
  int l = 0;
};

SubspaceBasis basis_EcapT(const SimulSVD& ss);
EBasis basis_E(const SimulSVD& ss);
SubspaceBasis basis_Eperp(const SimulSVD& ss);
SubspaceBasis basis_UsrV(const CompactSVD& c);
SubspaceBasis basis_SuffSp(const SimulSVD& ss);

/// Block test for membership in the tangent cone attached to (x0, y0): in the
/// (u_bar, v_bar) frame the leading r x r block is symmetric, the mixed blocks
/// are mirrored, the (p-r) x (p-r) block is symmetric PSD, and everything
/// outside the leading p x p block vanishes.
bool tangent_cone_member(const Mat& w, const SimulSVD& ss, double tol = 1e-8);

/// Membership in the critical cone: the T-perp part lies in the PSD cone
/// spanned by the frame columns r+1..p.
bool critical_cone_member(const Mat& w, const SimulSVD& ss, const CompactSVD& c,
                          double tol = 1e-8);

}  // namespace strongmin
