#include "strongmin/numkernel.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace strongmin {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::BDCSVD<Mat> full_svd_of(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalFailure, "svd_full: did not converge");
  return svd;
}

}  // namespace

void require_finite(const Mat& a, const char* what) {
  if (!a.allFinite())
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": non-finite entries");
}

SvdResult svd_full(const Mat& a) {
  if (a.size() == 0)
    throw Error(ErrorKind::InvalidArgument, "svd_full: empty matrix");
  auto svd = full_svd_of(a);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vec singular_values(const Mat& a) {
  if (a.size() == 0) return Vec(0);
  Eigen::BDCSVD<Mat> svd(a);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalFailure, "singular_values: did not converge");
  return svd.singularValues();
}

double nuclear_norm(const Mat& a) {
  return a.size() == 0 ? 0.0 : singular_values(a).sum();
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Vec s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

int rank_tol(const Mat& a, double tol_rel) {
  if (tol_rel <= 0)
    throw Error(ErrorKind::InvalidArgument, "rank_tol: tol_rel must be > 0");
  if (a.size() == 0) return 0;
  Vec s = singular_values(a);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = tol_rel * s(0);
  int r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

Mat pinv(const Mat& a, double tol_rel) {
  if (tol_rel <= 0)
    throw Error(ErrorKind::InvalidArgument, "pinv: tol_rel must be > 0");
  if (a.size() == 0) return Mat(a.cols(), a.rows());
  auto svd = full_svd_of(a);
  const Vec& s = svd.singularValues();
  const double cut = s.size() > 0 ? tol_rel * s(0) : 0.0;
  Vec inv = Vec::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV().leftCols(s.size()) * inv.asDiagonal() *
         svd.matrixU().leftCols(s.size()).transpose();
}

Vec vec(const Mat& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

Mat unvec(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw Error(ErrorKind::InvalidArgument, "unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

std::vector<Mat> orthonormalize(const std::vector<Mat>& mats, double tol_rel) {
  if (mats.empty()) return {};
  const Index rows = mats[0].rows(), cols = mats[0].cols();
  Mat stacked(rows * cols, static_cast<Index>(mats.size()));
  for (std::size_t k = 0; k < mats.size(); ++k) {
    if (mats[k].rows() != rows || mats[k].cols() != cols)
      throw Error(ErrorKind::InvalidArgument, "orthonormalize: shape mismatch");
    stacked.col(static_cast<Index>(k)) = vec(mats[k]);
  }
  Eigen::BDCSVD<Mat> svd(stacked, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double cut = s.size() > 0 ? tol_rel * s(0) : 0.0;
  std::vector<Mat> out;
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) <= cut) break;
    Vec col = svd.matrixU().col(j);
    // deterministic sign: largest-magnitude coefficient positive
    Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0) col = -col;
    out.push_back(unvec(col, rows, cols));
  }
  return out;
}

std::uint64_t Rng::next_u64() {
  return mix64(seed_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
}

double Rng::uniform() {
  // (0,1]: never returns 0, safe for log()
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  cached_normal_ = rad * std::sin(ang);
  has_cached_normal_ = true;
  return rad * std::cos(ang);
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix64(seed_ ^ mix64(stream ^ 0xd6e8feb86659fd93ULL)));
}

Mat gaussian_mat(Rng& rng, Index rows, Index cols) {
  Mat a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = rng.normal();
  return a;
}

}  // namespace strongmin
