#include "strongmin/subspaces.hpp"

#include <doctest.h>

#include <cmath>

using namespace strongmin;

namespace {

Mat fixture_x0_3x3() {
  Mat x0(3, 3);
  x0 << 4, 2, 4, 2, 1, 2, 4, 2, 4;
  return x0;
}

Mat fixture_y0_3x3() {
  Mat y0(3, 3);
  y0 << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  return y0;
}

// random (x0, y0) pair with y0 a subgradient at x0 and p = r + extra_units
struct Pair {
  Mat x0, y0;
  int r, p;
};

Pair random_pair(Rng& rng, Index n1, Index n2, int r, int extra_units) {
  Mat x0 = gaussian_mat(rng, n1, r) * gaussian_mat(rng, r, n2);
  CompactSVD c = compact_svd(x0);
  Mat u_j = complete_frame(c.u);
  Mat v_k = complete_frame(c.v);
  const Index f1 = u_j.cols(), f2 = v_k.cols();
  const int extra = std::min<int>(extra_units, static_cast<int>(std::min(f1, f2)));
  Mat w = Mat::Zero(f1, f2);
  for (int k = 0; k < extra; ++k) w(k, k) = 1.0;
  for (Index k = extra; k < std::min(f1, f2); ++k) w(k, k) = 0.4 * rng.uniform();
  Mat y0 = c.u * c.v.transpose() + u_j * w * v_k.transpose();
  return {x0, y0, c.r, c.r + extra};
}

bool orthonormal(const SubspaceBasis& b, double tol = 1e-10) {
  for (int i = 0; i < b.dim(); ++i)
    for (int j = 0; j < b.dim(); ++j) {
      const double ip = (b.elems[static_cast<std::size_t>(i)].array() *
                         b.elems[static_cast<std::size_t>(j)].array())
                            .sum();
      if (std::abs(ip - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("compact_svd basics") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  CompactSVD c = compact_svd(d);
  CHECK(c.r == 1);
  CHECK(c.sigma(0) == doctest::Approx(1.0));

  Rng rng(3);
  Vec u = gaussian_mat(rng, 5, 1);
  Vec v = gaussian_mat(rng, 4, 1);
  u.normalize();
  v.normalize();
  CompactSVD c2 = compact_svd(9.0 * u * v.transpose());
  CHECK(c2.r == 1);
  CHECK(c2.sigma(0) == doctest::Approx(9.0));

  CompactSVD c3 = compact_svd(fixture_x0_3x3());
  CHECK(c3.r == 1);
  Vec expected(3);
  expected << 2.0 / 3, 1.0 / 3, 2.0 / 3;
  CHECK(c3.u.col(0).cwiseAbs().isApprox(expected, 1e-10));
  CHECK(c3.v.col(0).cwiseAbs().isApprox(expected, 1e-10));

  CHECK_THROWS_AS(compact_svd(Mat::Zero(3, 3)), Error);
}

TEST_CASE("in_subdifferential on diagonal and fixture pairs") {
  Mat x = Mat::Zero(2, 2);
  x(0, 0) = 1.0;
  for (double t : {-1.0, -0.5, 0.0, 0.7, 1.0}) {
    Mat y = Mat::Zero(2, 2);
    y(0, 0) = 1.0;
    y(1, 1) = t;
    CHECK(in_subdifferential(x, y));
  }
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = 1.0;
  bad(1, 1) = 1.5;
  CHECK_FALSE(in_subdifferential(x, bad));

  CHECK(in_subdifferential(fixture_x0_3x3(), fixture_y0_3x3()));
}

TEST_CASE("subgradient from any compact SVD") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n1 = 2 + static_cast<Index>(rng.next_u64() % 6);
    const Index n2 = 2 + static_cast<Index>(rng.next_u64() % 6);
    const int r = 1 + static_cast<int>(rng.next_u64() %
                                       static_cast<std::uint64_t>(std::min(n1, n2)));
    Mat x0 = gaussian_mat(rng, n1, r) * gaussian_mat(rng, r, n2);
    CompactSVD c = compact_svd(x0);
    CHECK(in_subdifferential(x0, c.u * c.v.transpose(), 1e-8));
  }
}

TEST_CASE("p_count") {
  CHECK(p_count(fixture_y0_3x3()) == 3);
  Mat y = Mat::Zero(2, 2);
  y(0, 0) = 1.0;
  y(1, 1) = 0.3;
  CHECK(p_count(y) == 1);

  Rng rng(9);
  Mat x0 = gaussian_mat(rng, 5, 2) * gaussian_mat(rng, 2, 4);
  CompactSVD c = compact_svd(x0);
  CHECK(p_count(c.u * c.v.transpose()) == c.r);
}

TEST_CASE("simultaneous_svd aligned and fixture cases") {
  Mat x0 = Mat::Zero(2, 2), y0 = Mat::Zero(2, 2);
  x0(0, 0) = 1.0;
  y0(0, 0) = 1.0;
  SimulSVD ss = simultaneous_svd(x0, y0);
  CHECK(ss.r == 1);
  CHECK(ss.p == 1);
  CHECK(ss.u_bar.cwiseAbs().isApprox(Mat::Identity(2, 2), 1e-10));

  // the unit block is fully degenerate, so frames are free up to a joint
  // rotation; check the invariant parts: rank, p, leading column, and the
  // simultaneous diagonalization itself
  SimulSVD ssf = simultaneous_svd(fixture_x0_3x3(), fixture_y0_3x3());
  CHECK(ssf.r == 1);
  CHECK(ssf.p == 3);
  Vec leading(3);
  leading << 2.0 / 3, 1.0 / 3, 2.0 / 3;
  CHECK(ssf.u_bar.col(0).cwiseAbs().isApprox(leading, 1e-9));
  Mat dx = Mat::Zero(3, 3), dy = Mat::Zero(3, 3);
  dx.diagonal() = ssf.sigma_x;
  dy.diagonal() = ssf.sigma_y;
  CHECK((ssf.u_bar * dx * ssf.v_bar.transpose() - fixture_x0_3x3()).norm() <= 1e-8 * 10);
  CHECK((ssf.u_bar * dy * ssf.v_bar.transpose() - fixture_y0_3x3()).norm() <= 1e-8 * 2);

  Mat not_subgrad = 2.0 * fixture_y0_3x3();
  CHECK_THROWS_AS(simultaneous_svd(fixture_x0_3x3(), not_subgrad), Error);
}

TEST_CASE("simultaneous_svd reconstruction identities on random pairs") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n1 = 2 + static_cast<Index>(rng.next_u64() % 6);
    const Index n2 = 2 + static_cast<Index>(rng.next_u64() % 6);
    const int rmax = static_cast<int>(std::min(n1, n2));
    const int r = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(rmax));
    const int extra = static_cast<int>(rng.next_u64() % 3);
    Pair pair = random_pair(rng, n1, n2, r, extra);
    SimulSVD ss = simultaneous_svd(pair.x0, pair.y0);
    CHECK(ss.r == pair.r);
    CHECK(ss.p == pair.p);
    CHECK(ss.r <= ss.p);
    CHECK(ss.p <= std::min(n1, n2));
    Mat dx = Mat::Zero(n1, n2), dy = Mat::Zero(n1, n2);
    dx.diagonal() = ss.sigma_x;
    dy.diagonal() = ss.sigma_y;
    CHECK((ss.u_bar * dx * ss.v_bar.transpose() - pair.x0).norm() <=
          1e-8 * (1.0 + pair.x0.norm()));
    CHECK((ss.u_bar * dy * ss.v_bar.transpose() - pair.y0).norm() <=
          1e-8 * (1.0 + pair.y0.norm()));
    for (int i = 0; i < ss.r; ++i)
      CHECK(ss.sigma_y(i) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("projections onto the tangent space and its complement") {
  Mat x0 = Mat::Zero(2, 2);
  x0(0, 0) = 3.0;
  CompactSVD c = compact_svd(x0);
  Mat w(2, 2);
  w << 1, 2, 3, 4;
  Mat pt = proj_T(w, c);
  Mat ptp = proj_Tperp(w, c);
  CHECK(std::abs(pt(1, 1)) <= 1e-12);
  CHECK(ptp.cwiseAbs().sum() == doctest::Approx(4.0));
  CHECK((pt + ptp - w).norm() <= 1e-12);

  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Mat x = gaussian_mat(rng, 6, 5) * gaussian_mat(rng, 5, 4);
    CompactSVD cx = compact_svd(x);
    Mat probe = gaussian_mat(rng, 6, 4);
    Mat a = proj_T(probe, cx), b = proj_Tperp(probe, cx);
    CHECK(std::abs((a.array() * b.array()).sum()) <= 1e-10 * (1 + probe.squaredNorm()));
    CHECK((proj_T(a, cx) - a).norm() <= 1e-10 * (1 + a.norm()));
    CHECK((proj_Tperp(b, cx) - b).norm() <= 1e-10 * (1 + b.norm()));
    Mat probe2 = gaussian_mat(rng, 6, 4);
    const double lhs = (proj_T(probe, cx).array() * probe2.array()).sum();
    const double rhs = (probe.array() * proj_T(probe2, cx).array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }

  Mat x = fixture_x0_3x3();
  CompactSVD cf = compact_svd(x);
  SubspaceBasis t0 = basis_T0(cf);
  Mat w_in = 0.7 * t0.elems[0] - 1.3 * t0.elems[2];
  CHECK(proj_Tperp(w_in, cf).norm() <= 1e-10);
}

TEST_CASE("tangent basis dimensions") {
  Mat x0 = Mat::Zero(2, 2);
  x0(0, 0) = 1.0;
  CompactSVD c = compact_svd(x0);
  CHECK(basis_T0(c).dim() == 3);
  CHECK(basis_T0perp(c).dim() == 1);

  Rng rng(41);
  Mat big = gaussian_mat(rng, 40, 3) * gaussian_mat(rng, 3, 40);
  CompactSVD cb = compact_svd(big);
  CHECK(basis_T0(cb).dim() == 231);  // r(n1+n2-r)
  CHECK(basis_T0(cb).dim() + basis_T0perp(cb).dim() == 40 * 40);
}

TEST_CASE("E-family dimensions and orthogonality") {
  SimulSVD ssf = simultaneous_svd(fixture_x0_3x3(), fixture_y0_3x3());
  CHECK(basis_EcapT(ssf).dim() == 3);
  CHECK(basis_Eperp(ssf).dim() == 2);
  EBasis ef = basis_E(ssf);
  CHECK(ef.s == 3);
  CHECK(ef.l == 6);
  CHECK(ef.basis.dim() == 7);
  CHECK(basis_SuffSp(ssf).dim() == 6);

  Rng rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n1 = 2 + static_cast<Index>(rng.next_u64() % 5);
    const Index n2 = 2 + static_cast<Index>(rng.next_u64() % 5);
    const int r = 1 + static_cast<int>(
                          rng.next_u64() %
                          static_cast<std::uint64_t>(std::min(n1, n2)));
    const int extra = static_cast<int>(rng.next_u64() % 3);
    Pair pair = random_pair(rng, n1, n2, r, extra);
    SimulSVD ss = simultaneous_svd(pair.x0, pair.y0);
    const int n1i = static_cast<int>(n1), n2i = static_cast<int>(n2);
    const int rr = ss.r, pp = ss.p;
    SubspaceBasis cap = basis_EcapT(ss);
    EBasis e = basis_E(ss);
    SubspaceBasis eperp = basis_Eperp(ss);
    CHECK(cap.dim() == rr * (rr + 1) / 2 + rr * (pp - rr));
    CHECK(e.basis.dim() ==
          rr * (rr + 1) / 2 + rr * (pp - rr) + (n1i - rr) * (n2i - rr));
    CHECK(eperp.dim() == rr * (rr - 1) / 2 + rr * (n1i + n2i - pp - rr));
    CHECK(e.basis.dim() + eperp.dim() == n1i * n2i);
    CHECK(e.s == cap.dim());
    CHECK(e.l == pp * (pp + 1) / 2);
    CHECK(orthonormal(e.basis));
    CHECK(orthonormal(eperp));
    for (const Mat& a : e.basis.elems)
      for (const Mat& b : eperp.elems)
        CHECK(std::abs((a.array() * b.array()).sum()) <= 1e-10);
    if (pp == rr) {
      CompactSVD c = compact_svd(pair.x0);
      CHECK(cap.dim() == basis_UsrV(c).dim());
    }
  }
}

TEST_CASE("symmetric subspace bases") {
  Rng rng(61);
  Mat x1 = gaussian_mat(rng, 4, 1) * gaussian_mat(rng, 1, 4);
  CHECK(basis_UsrV(compact_svd(x1)).dim() == 1);
  Mat x3 = gaussian_mat(rng, 5, 3) * gaussian_mat(rng, 3, 5);
  CHECK(basis_UsrV(compact_svd(x3)).dim() == 6);
}

TEST_CASE("tangent cone membership block tests") {
  SimulSVD ssf = simultaneous_svd(fixture_x0_3x3(), fixture_y0_3x3());
  CHECK(tangent_cone_member(fixture_x0_3x3(), ssf));

  // diagonal pair with p = 1: cone is the top-left entry only
  Mat x0 = Mat::Zero(2, 2), y0 = Mat::Zero(2, 2);
  x0(0, 0) = 1.0;
  y0(0, 0) = 1.0;
  SimulSVD ss = simultaneous_svd(x0, y0);
  Mat w = Mat::Zero(2, 2);
  w(1, 1) = 1.0;
  CHECK_FALSE(tangent_cone_member(w, ss));
  Mat wa = Mat::Zero(2, 2);
  wa(0, 0) = -2.5;
  CHECK(tangent_cone_member(wa, ss));

  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    Pair pair = random_pair(rng, 5, 5, 1, 2);
    SimulSVD s2 = simultaneous_svd(pair.x0, pair.y0);
    if (s2.p <= s2.r) continue;
    const int h = s2.p - s2.r;
    Mat g = gaussian_mat(rng, h, h);
    Mat psd = g * g.transpose();
    Mat member = s2.u_bar.middleCols(s2.r, h) * psd *
                 s2.v_bar.middleCols(s2.r, h).transpose();
    CHECK(tangent_cone_member(member, s2));
    CHECK_FALSE(tangent_cone_member(-member, s2));
  }
}

TEST_CASE("critical cone membership") {
  Rng rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    Pair pair = random_pair(rng, 5, 4, 2, 1);
    SimulSVD ss = simultaneous_svd(pair.x0, pair.y0);
    CompactSVD c = compact_svd(pair.x0);
    SubspaceBasis t0 = basis_T0(c);
    Mat w_t = 1.7 * t0.elems[1] - 0.4 * t0.elems[3];
    CHECK(critical_cone_member(w_t, ss, c));
    if (ss.p > ss.r) {
      const int h = ss.p - ss.r;
      Mat g = gaussian_mat(rng, h, h);
      Mat psd = g * g.transpose();
      Mat w_in = w_t + ss.u_bar.middleCols(ss.r, h) * psd *
                           ss.v_bar.middleCols(ss.r, h).transpose();
      CHECK(critical_cone_member(w_in, ss, c));
    }
  }
  Pair pair = random_pair(rng, 4, 4, 2, 0);
  SimulSVD ss = simultaneous_svd(pair.x0, pair.y0);
  CompactSVD c = compact_svd(pair.x0);
  SubspaceBasis tp = basis_T0perp(c);
  CHECK_FALSE(critical_cone_member(tp.elems[0], ss, c));
}

TEST_CASE("tangent cone implies critical cone on random probes") {
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 4;
    Pair pair = random_pair(rng, n, n, 1 + static_cast<int>(rng.next_u64() % 2),
                            static_cast<int>(rng.next_u64() % 2));
    SimulSVD ss = simultaneous_svd(pair.x0, pair.y0);
    CompactSVD c = compact_svd(pair.x0);
    Mat w = gaussian_mat(rng, n, n);
    if (tangent_cone_member(w, ss)) CHECK(critical_cone_member(w, ss, c));
    if (ss.p > ss.r) {
      const int h = ss.p - ss.r;
      Mat g = gaussian_mat(rng, h, h);
      Mat member = ss.u_bar.middleCols(ss.r, h) * (g * g.transpose()) *
                   ss.v_bar.middleCols(ss.r, h).transpose();
      CHECK(critical_cone_member(member, ss, c));
    }
  }
}

TEST_CASE("tangent cone classification invariant under frame ambiguity") {
  // the fixture has a fully degenerate unit block, so the decomposition is
  // free up to a joint rotation; both frames must classify probes identically
  Mat x0 = fixture_x0_3x3();
  Mat y0 = fixture_y0_3x3();
  SimulSVD a = simultaneous_svd(x0, y0);
  SimulSVD b = a;
  Mat rot(2, 2);
  const double th = 0.81;
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  b.u_bar.middleCols(1, 2) = a.u_bar.middleCols(1, 2) * rot;
  b.v_bar.middleCols(1, 2) = a.v_bar.middleCols(1, 2) * rot;
  Mat dx = Mat::Zero(3, 3), dy = Mat::Zero(3, 3);
  dx.diagonal() = b.sigma_x;
  dy.diagonal() = b.sigma_y;
  REQUIRE((b.u_bar * dx * b.v_bar.transpose() - x0).norm() <= 1e-8 * (1 + x0.norm()));
  REQUIRE((b.u_bar * dy * b.v_bar.transpose() - y0).norm() <= 1e-8 * (1 + y0.norm()));

  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    Mat w = gaussian_mat(rng, 3, 3);
    if (trial % 3 == 0) {
      Mat g = gaussian_mat(rng, 2, 2);
      w = 0.3 * w.norm() * a.u_bar.middleCols(1, 2) * (g * g.transpose()) *
              a.v_bar.middleCols(1, 2).transpose() +
          1e-3 * w;
    }
    CHECK(tangent_cone_member(w, a, 1e-6) == tangent_cone_member(w, b, 1e-6));
  }
}
