#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace strongmin {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used by every rank decision.
inline constexpr double kRankTol = 1e-9;
/// Tolerance for deciding sigma_i(Y) == 1 on unit-spectral-norm subgradients.
inline constexpr double kPTol = 1e-6;

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Infeasible,
  NumericalFailure,
  ContractViolation,
  DegenerateInput,
  AssertionFailure,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Throws InvalidArgument if the matrix holds NaN/Inf. Call at every boundary
/// that admits external data.
void require_finite(const Mat& a, const char* what);

struct SvdResult {
  Mat u;      // n1 x n1 orthogonal
  Vec sigma;  // min(n1,n2), nonincreasing
  Mat v;      // n2 x n2 orthogonal
};

SvdResult svd_full(const Mat& a);

/// Singular values only (no U/V), nonincreasing.
Vec singular_values(const Mat& a);

double nuclear_norm(const Mat& a);
double spectral_norm(const Mat& a);

/// Count of sigma_i > tol_rel * sigma_1; 0 for the zero matrix.
int rank_tol(const Mat& a, double tol_rel = kRankTol);

/// Moore-Penrose pseudo-inverse with relative cutoff on singular values.
Mat pinv(const Mat& a, double tol_rel = kRankTol);

/// Column-major flattening and its inverse; bitwise round trips.
Vec vec(const Mat& a);
Mat unvec(const Vec& v, Index rows, Index cols);

/// Orthonormal basis (Frobenius inner product) of span(mats); linearly
/// dependent inputs are dropped at the rank tolerance. Sign-canonicalized so
/// the output is deterministic.
std::vector<Mat> orthonormalize(const std::vector<Mat>& mats,
                                double tol_rel = kRankTol);

/// Counter-based generator: the stream is a pure function of (seed, counter),
/// so identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on (0, 1].
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

  /// Independent stream derived from (seed, stream); the parent is untouched.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// rows x cols matrix of i.i.d. standard normals, deterministic per rng state.
Mat gaussian_mat(Rng& rng, Index rows, Index cols);

}  // namespace strongmin
