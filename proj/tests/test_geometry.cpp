#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "panocalib/errors.hpp"
#include "panocalib/geometry.hpp"

using namespace panocalib;

namespace {

constexpr double kPi = std::numbers::pi;

// Elementary rotations built from Eigen's axis-angle type, independent of the
// hand-written matrices in the library.
Mat3 reference_rotation(double a, double b, double g) {
  return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitX()) *
          Eigen::AngleAxisd(g, Vec3::UnitZ()))
      .toRotationMatrix();
}

}  // namespace

TEST_CASE("rotation_matrix: identity and single-axis cases") {
  CHECK(rotation_matrix({0, 0, 0}).isApprox(Mat3::Identity(), 1e-15));

  const Vec3 a = rotation_matrix({kPi / 2, 0, 0}) * Vec3(1, 0, 0);
  CHECK((a - Vec3(0, 1, 0)).norm() < 1e-15);

  const Vec3 b = rotation_matrix({0, kPi / 2, 0}) * Vec3(0, 1, 0);
  CHECK((b - Vec3(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("rotation_matrix: reference pose entries") {
  // Frozen from an independent numpy evaluation of Rz(a) Rx(b) Rz(g).
  Mat3 expected;
  expected << 0.6043257248527513, -0.16680136212189106, -0.7790813332865052,
      0.26717296597264534, 0.963648145433729, 0.0009263128598574261,
      0.7506057717168024, -0.20870926523855235, 0.6269221786386306;
  const Mat3 r = rotation_matrix(reference_pose().rotation);
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
}

TEST_CASE("rotation_matrix: orthonormal with det +1 over random angles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const EulerZXZ e{angle(rng), angle(rng), angle(rng)};
    const Mat3 r = rotation_matrix(e);
    REQUIRE((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(std::abs(r.determinant() - 1.0) < 1e-10);
    REQUIRE((r - reference_rotation(e.alpha, e.beta, e.gamma)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rotation_matrix: non-finite angle is rejected") {
  CHECK_THROWS_AS(rotation_matrix({NAN, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(rotation_matrix({0, INFINITY, 0}), InvalidArgument);
}

TEST_CASE("rotation_matrix_derivatives match central differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  for (int i = 0; i < 100; ++i) {
    const EulerZXZ e{angle(rng), angle(rng), angle(rng)};
    const auto d = rotation_matrix_derivatives(e);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      EulerZXZ plus = e;
      EulerZXZ minus = e;
      double* pp[] = {&plus.alpha, &plus.beta, &plus.gamma};
      double* pm[] = {&minus.alpha, &minus.beta, &minus.gamma};
      *pp[k] += h;
      *pm[k] -= h;
      const Mat3 fd = (rotation_matrix(plus) - rotation_matrix(minus)) / (2 * h);
      REQUIRE((fd - d[k]).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("EulerZXZ::normalized keeps the rotation and lands in range") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const EulerZXZ e{angle(rng), angle(rng), angle(rng)};
    const EulerZXZ n = e.normalized();
    REQUIRE(n.alpha >= 0.0);
    REQUIRE(n.alpha < 2 * kPi);
    REQUIRE(n.gamma >= 0.0);
    REQUIRE(n.gamma < 2 * kPi);
    REQUIRE(n.beta >= 0.0);
    REQUIRE(n.beta <= kPi);
    REQUIRE((rotation_matrix(e) - rotation_matrix(n)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Negative beta flips to the equivalent positive-beta triple.
  const EulerZXZ flipped = EulerZXZ{4.7112 - kPi, -0.8932, 1.8420 + kPi}.normalized();
  CHECK(flipped.alpha == doctest::Approx(4.7112).epsilon(1e-14));
  CHECK(flipped.beta == doctest::Approx(0.8932).epsilon(1e-14));
  CHECK(flipped.gamma == doctest::Approx(1.8420).epsilon(1e-14));
}

TEST_CASE("transform: identity, translation, reference pose at the origin") {
  const ExtrinsicPose identity{};
  CHECK((transform(Vec3(1, 2, 3), identity) - Vec3(1, 2, 3)).norm() == 0.0);

  const ExtrinsicPose shift{{0, 0, 0}, Vec3(1, 2, 3)};
  CHECK((transform(Vec3::Zero(), shift) - Vec3(1, 2, 3)).norm() == 0.0);

  const Vec3 t = transform(Vec3::Zero(), reference_pose());
  CHECK(t.x() == 2.8673);
  CHECK(t.y() == 0.6389);
  CHECK(t.z() == -1.7732);
}

TEST_CASE("transform is inverted by (R^T, -R^T T)") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  for (int i = 0; i < 5000; ++i) {
    const ExtrinsicPose pose{{angle(rng), angle(rng), angle(rng)},
                             Vec3(coord(rng), coord(rng), coord(rng))};
    const Vec3 p(coord(rng), coord(rng), coord(rng));
    REQUIRE((inverse_transform(transform(p, pose), pose) - p).norm() < 1e-10);
  }
}

TEST_CASE("project: axis cases") {
  PanoPixelRatio px = project(Vec3(1, 0, 0));
  CHECK(px.u == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(px.v == doctest::Approx(0.5).epsilon(1e-15));

  px = project(Vec3(0, 1, 0));
  CHECK(px.u == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(px.v == doctest::Approx(0.5).epsilon(1e-15));

  px = project(Vec3(1, 0, 1));
  CHECK(px.u == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(px.v == doctest::Approx(0.25).epsilon(1e-15));

  CHECK_THROWS_AS(project(Vec3(0, 0, 1)), PoleSingularity);
  CHECK_THROWS_AS(project(Vec3(1e-7, 0, 1)), PoleSingularity);
}

TEST_CASE("project: the seam behind the camera maps into [0, 1)") {
  CHECK(project(Vec3(-1, 0.0, 0)).u == 0.0);
  CHECK(project(Vec3(-1, -0.0, 0)).u == 0.0);
  CHECK(project(Vec3(-1, -1e-300, 0)).u < 1.0);
}

TEST_CASE("unproject: axis cases") {
  CHECK((unproject({0.5, 0.5}) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((unproject({0.25, 0.5}) - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(unproject({1.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(unproject({0.5, 0.0}), InvalidArgument);
}

TEST_CASE("project(unproject(px)) round trip") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> v(1e-6, 1.0 - 1e-6);
  for (int i = 0; i < 20000; ++i) {
    const PanoPixelRatio px{u(rng), v(rng)};
    const Vec3 d = unproject(px);
    REQUIRE(std::abs(d.norm() - 1.0) < 1e-14);
    const PanoPixelRatio back = project(d);
    REQUIRE(std::abs(back.u - px.u) < 1e-12);
    REQUIRE(std::abs(back.v - px.v) < 1e-12);
  }
}

TEST_CASE("project is invariant under positive scaling") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 p(coord(rng), coord(rng), coord(rng));
    if (p.head<2>().squaredNorm() < 1e-6) continue;
    const double s = scale(rng);
    const PanoPixelRatio a = project(p);
    const PanoPixelRatio b = project(s * p);
    REQUIRE(std::abs(a.u - b.u) < 1e-12);
    REQUIRE(std::abs(a.v - b.v) < 1e-12);
  }
}

TEST_CASE("h_form: examples and branch errors") {
  HForm h = h_form(Vec3(1, 1, 0), HVariant::Squared);
  CHECK(h.h1 == 1.0);
  CHECK(h.h2 == 0.0);
  h = h_form(Vec3(1, 0, 1), HVariant::Squared);
  CHECK(h.h1 == 0.0);
  CHECK(h.h2 == 1.0);
  h = h_form(Vec3(3, 0, -4), HVariant::Signed);
  CHECK(h.h2 == doctest::Approx(-4.0 / 3.0));

  CHECK_THROWS_AS(h_form(Vec3(0, 1, 0), HVariant::Squared), BranchDomain);
  CHECK_THROWS_AS(h_form(Vec3(1e-10, 1, 0), HVariant::Signed), BranchDomain);
}

TEST_CASE("h_form matches the tangent identities of the pixel ratios") {
  // For x > 0, z > 0: h1 = tan(pi - 2 pi u) and h2 = tan^2(pi/2 - pi v).
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> fwd(0.1, 10.0);
  std::uniform_real_distribution<double> lat(-10.0, 10.0);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 p(fwd(rng), lat(rng), fwd(rng));
    const PanoPixelRatio px = project(p);
    const HForm h = h_form(p, HVariant::Squared);
    const double h1 = std::tan(kPi - 2 * kPi * px.u);
    const double t = std::tan(kPi / 2 - kPi * px.v);
    REQUIRE(std::abs(h.h1 - h1) <= 1e-10 * std::max(1.0, std::abs(h1)));
    REQUIRE(std::abs(h.h2 - t * t) <= 1e-10 * std::max(1.0, t * t));
  }
}

TEST_CASE("reconstruct_uv: examples") {
  const PanoPixelRatio px = reconstruct_uv({0.0, 0.0, HVariant::Squared});
  CHECK(px.u == doctest::Approx(0.5));
  CHECK(px.v == doctest::Approx(0.5));
  CHECK_THROWS_AS(reconstruct_uv({0.0, -1.0, HVariant::Squared}), InvalidArgument);
  CHECK_NOTHROW(reconstruct_uv({0.0, -1.0, HVariant::Signed}));
}

TEST_CASE("branch agreement of the h-form with the full model") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> fwd(0.01, 20.0);
  std::uniform_real_distribution<double> lat(-20.0, 20.0);
  for (int i = 0; i < 20000; ++i) {
    const Vec3 upper(fwd(rng), lat(rng), fwd(rng));
    const PanoPixelRatio direct = project(upper);
    for (HVariant variant : {HVariant::Squared, HVariant::Signed}) {
      const PanoPixelRatio via_h = reconstruct_uv(h_form(upper, variant));
      REQUIRE(std::abs(via_h.u - direct.u) < 1e-12);
      REQUIRE(std::abs(via_h.v - direct.v) < 1e-12);
    }

    // Lower hemisphere: only the signed form keeps the sign of z.
    const Vec3 lower(upper.x(), upper.y(), -upper.z());
    const PanoPixelRatio below = project(lower);
    const PanoPixelRatio signed_uv = reconstruct_uv(h_form(lower, HVariant::Signed));
    REQUIRE(std::abs(signed_uv.u - below.u) < 1e-12);
    REQUIRE(std::abs(signed_uv.v - below.v) < 1e-12);
    const PanoPixelRatio squared_uv = reconstruct_uv(h_form(lower, HVariant::Squared));
    REQUIRE(std::abs(squared_uv.v - below.v) > 1e-6);
    REQUIRE(std::abs(squared_uv.v - (1.0 - below.v)) < 1e-12);
  }
}

TEST_CASE("passes_branch_guard") {
  CHECK(passes_branch_guard(Vec3(1, 0, 1), HVariant::Squared));
  CHECK_FALSE(passes_branch_guard(Vec3(1, 0, -1), HVariant::Squared));
  CHECK(passes_branch_guard(Vec3(1, 0, -1), HVariant::Signed));
  CHECK_FALSE(passes_branch_guard(Vec3(-1, 0, 1), HVariant::Signed));
  CHECK_FALSE(passes_branch_guard(Vec3(0, 1, 1), HVariant::Signed));
  CHECK_FALSE(passes_branch_guard(Vec3(NAN, 1, 1), HVariant::Signed));
}

TEST_CASE("variant names round trip") {
  CHECK(parse_variant(to_string(HVariant::Signed)) == HVariant::Signed);
  CHECK(parse_variant(to_string(HVariant::Squared)) == HVariant::Squared);
  CHECK_THROWS_AS(parse_variant("cubic"), InvalidArgument);
}
