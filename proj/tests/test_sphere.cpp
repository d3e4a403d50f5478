#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ncse/error.hpp"
#include "ncse/sphere.hpp"
#include "ncse/special.hpp"
#include "oracles.hpp"

using namespace ncse;

namespace {

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("normalize scales and rejects degenerate input") {
  const UnitVector a = normalize(make_vec({3, 0, 0, 0}));
  CHECK(a.vec()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.vec().tail(3).norm() == doctest::Approx(0.0));

  const UnitVector b = normalize(make_vec({1, 1}));
  CHECK(b.vec()[0] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(b.vec()[1] == doctest::Approx(0.70710678).epsilon(1e-8));

  CHECK_THROWS_WITH_AS(normalize(make_vec({0, 0, 0})), doctest::Contains("ZeroVector"),
                       Error);
}

TEST_CASE("uniform sphere samples have unit norm and matching moments") {
  const auto samples = sample_uniform_sphere(3, 10000, RngSeed(7));
  Vec mean = Vec::Zero(3);
  Vec second = Vec::Zero(3);
  for (const UnitVector& z : samples) {
    CHECK(std::fabs(z.vec().norm() - 1.0) <= 1e-9);
    mean += z.vec();
    second += z.vec().cwiseProduct(z.vec());
  }
  mean /= static_cast<double>(samples.size());
  second /= static_cast<double>(samples.size());
  for (int i = 0; i < 3; ++i) {
    CHECK(std::fabs(mean[i]) < 0.05);              // analytic mean 0
    CHECK(std::fabs(second[i] - 1.0 / 3.0) < 0.02);  // analytic variance 1/p
  }
}

TEST_CASE("uniform sphere samples in high dimension are orthogonal to any direction") {
  const Index p = 64;
  const auto samples = sample_uniform_sphere(p, 123000, RngSeed(11));
  Vec direction = Vec::Zero(p);
  direction[0] = 1.0;
  double mean_dot = 0.0;
  for (const UnitVector& z : samples) mean_dot += z.vec().dot(direction);
  mean_dot /= static_cast<double>(samples.size());
  CHECK(std::fabs(mean_dot) < 0.01);
}

TEST_CASE("log normalizer at kappa=0 is the inverse sphere area") {
  CHECK(vmf_log_normalizer(3, 0.0) ==
        doctest::Approx(-std::log(4.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("log normalizer matches the closed form for p=3") {
  // C_3(k) = k / (4 pi sinh k), evaluated directly.
  for (double kappa : {1e-3, 0.5, 1.0, 10.0, 50.0, 300.0}) {
    const double expected =
        std::log(kappa) - std::log(4.0 * M_PI) - (kappa + std::log1p(-std::exp(-2.0 * kappa)) - std::log(2.0));
    CHECK(vmf_log_normalizer(3, kappa) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK(vmf_log_normalizer(3, 1.0) ==
        doctest::Approx(std::log(1.0 / (4.0 * M_PI * std::sinh(1.0)))).epsilon(1e-10));
}

TEST_CASE("log normalizer agrees with the quadrature oracle") {
  for (int p : {3, 16, 64}) {
    for (double kappa : {0.0, 1.0, 50.0, 500.0}) {
      const double oracle = oracles::log_vmf_normalizer_quadrature(p, kappa);
      const double got = vmf_log_normalizer(p, kappa);
      CHECK(std::fabs(got - oracle) <=
            1e-6 * std::max(1.0, std::fabs(oracle)));
    }
  }
}

TEST_CASE("log normalizer stays finite across the documented range") {
  for (Index p : {2, 3, 64, 512, 4096}) {
    for (double kappa : {0.0, 1e-6, 1.0, 700.0, 1e4, 1e6}) {
      CHECK(std::isfinite(vmf_log_normalizer(p, kappa)));
    }
  }
}

TEST_CASE("vmf log density constants and symmetry") {
  const UnitVector u = normalize(make_vec({1, 0, 0}));
  SUBCASE("kappa=0 is constant over the sphere") {
    const VonMisesFisher uniform(u, 0.0);
    for (const UnitVector& z : sample_uniform_sphere(3, 32, RngSeed(5))) {
      CHECK(vmf_log_density(uniform, z) ==
            doctest::Approx(vmf_log_normalizer(3, 0.0)).epsilon(1e-12));
    }
  }
  SUBCASE("density at the mean matches the closed form") {
    const VonMisesFisher dist(u, 1.0);
    const double expected = std::log(1.0 / (4.0 * M_PI * std::sinh(1.0))) + 1.0;
    CHECK(vmf_log_density(dist, u) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("depends on z only through the dot product") {
    const VonMisesFisher dist(u, 7.5);
    const UnitVector z1 = normalize(make_vec({0.5, std::sqrt(0.75), 0}));
    const UnitVector z2 = normalize(make_vec({0.5, 0, -std::sqrt(0.75)}));
    CHECK(vmf_log_density(dist, z1) == doctest::Approx(vmf_log_density(dist, z2)).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch is rejected") {
    const VonMisesFisher dist(u, 1.0);
    CHECK_THROWS_AS(vmf_log_density(dist, normalize(make_vec({1, 0, 0, 0}))), Error);
  }
}

TEST_CASE("vmf density integrates to one (uniform-proposal Monte Carlo)") {
  // Importance weights from the uniform proposal are only well-behaved for
  // moderate kappa relative to p; larger combinations are covered by the
  // quadrature comparison above.
  struct GridPoint {
    Index p;
    double kappa;
  };
  for (const GridPoint g : {GridPoint{3, 1.0}, GridPoint{8, 4.0}, GridPoint{16, 8.0}}) {
    Vec e1 = Vec::Zero(g.p);
    e1[0] = 1.0;
    const VonMisesFisher dist(UnitVector(e1), g.kappa);
    const double log_uniform = -log_unit_sphere_area(g.p);
    double acc = 0.0;
    const int count = 100000;
    Rng rng(RngSeed(17));
    for (const UnitVector& z : sample_uniform_sphere(g.p, count, rng)) {
      acc += std::exp(vmf_log_density(dist, z) - log_uniform);
    }
    CHECK(std::fabs(acc / count - 1.0) < 0.02);
  }
}

TEST_CASE("vmf samples match the Bessel-ratio resultant length") {
  struct Config {
    Index p;
    double kappa;
  };
  for (const Config c : {Config{3, 1.0}, Config{16, 10.0}, Config{64, 50.0}}) {
    Vec e1 = Vec::Zero(c.p);
    e1[0] = 1.0;
    const VonMisesFisher dist(UnitVector(e1), c.kappa);
    const auto samples = vmf_sample(dist, 20000, RngSeed(23));
    Vec mean = Vec::Zero(c.p);
    for (const UnitVector& z : samples) {
      CHECK(std::fabs(z.vec().norm() - 1.0) <= 1e-9);
      mean += z.vec();
    }
    mean /= static_cast<double>(samples.size());
    CHECK(std::fabs(mean.norm() - vmf_mean_resultant_length(c.p, c.kappa)) < 0.01);
  }
}

TEST_CASE("vmf sampling at kappa=0 reduces to the uniform distribution") {
  Vec e1 = Vec::Zero(8);
  e1[0] = 1.0;
  const UnitVector u(e1);
  const auto samples = vmf_sample(VonMisesFisher(u, 0.0), 10000, RngSeed(29));
  double mean_dot = 0.0;
  for (const UnitVector& z : samples) mean_dot += u.dot(z);
  CHECK(std::fabs(mean_dot / static_cast<double>(samples.size())) < 0.02);
}

TEST_CASE("vmf sampling is bit-reproducible per seed") {
  Vec e1 = Vec::Zero(16);
  e1[0] = 1.0;
  const VonMisesFisher dist(UnitVector(e1), 50.0);  // operating-point kappa
  const auto a = vmf_sample(dist, 64, RngSeed(31));
  const auto b = vmf_sample(dist, 64, RngSeed(31));
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].vec() == b[i].vec());  // bit-identical
  }
}

TEST_CASE("resultant length grows with concentration") {
  Vec e1 = Vec::Zero(64);
  e1[0] = 1.0;
  const UnitVector u(e1);
  double previous = -1.0;
  for (double kappa : {0.0, 1.0, 10.0, 50.0, 200.0}) {
    const auto samples = vmf_sample(VonMisesFisher(u, kappa), 20000, RngSeed(37));
    Vec mean = Vec::Zero(64);
    for (const UnitVector& z : samples) mean += z.vec();
    const double r = (mean / static_cast<double>(samples.size())).norm();
    CHECK(r >= previous);
    previous = r;
  }
}

TEST_CASE("cosine distance endpoints") {
  const UnitVector a = normalize(make_vec({1, 0, 0}));
  const UnitVector b = normalize(make_vec({-1, 0, 0}));
  const UnitVector c = normalize(make_vec({0, 1, 0}));
  CHECK(cosine_distance(a, a) == doctest::Approx(0.0));
  CHECK(cosine_distance(a, b) == doctest::Approx(2.0));
  CHECK(cosine_distance(a, c) == doctest::Approx(1.0));
}

TEST_CASE("simplex ETF pairwise structure") {
  SUBCASE("regular tetrahedron") {
    const SimplexEtf etf = make_simplex_etf(4, 3, RngSeed(41));
    for (Index i = 0; i < 4; ++i) {
      CHECK(std::fabs(etf.centers[static_cast<size_t>(i)].vec().norm() - 1.0) <= 1e-9);
      for (Index j = i + 1; j < 4; ++j) {
        CHECK(std::fabs(etf.centers[static_cast<size_t>(i)].dot(
                  etf.centers[static_cast<size_t>(j)]) +
                        1.0 / 3.0) <= 1e-9);
      }
    }
  }
  SUBCASE("antipodal pair") {
    const SimplexEtf etf = make_simplex_etf(2, 2, RngSeed(43));
    CHECK(etf.centers[0].dot(etf.centers[1]) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("dimension too small") {
    CHECK_THROWS_WITH_AS(make_simplex_etf(87, 64, RngSeed(1)),
                         doctest::Contains("DimensionTooSmall"), Error);
  }
  SUBCASE("gram matrix is seed-invariant") {
    const SimplexEtf a = make_simplex_etf(9, 32, RngSeed(1));
    const SimplexEtf b = make_simplex_etf(9, 32, RngSeed(999));
    for (size_t i = 0; i < a.centers.size(); ++i) {
      for (size_t j = 0; j < a.centers.size(); ++j) {
        CHECK(std::fabs(a.centers[i].dot(a.centers[j]) - b.centers[i].dot(b.centers[j])) <=
              1e-9);
      }
    }
  }
}

TEST_CASE("pca recovers an exact 2-plane") {
  Rng rng(RngSeed(47));
  Vec b1 = rng.normal_vec(64);
  b1 /= b1.norm();
  Vec b2 = rng.normal_vec(64);
  b2 -= b1.dot(b2) * b1;
  b2 /= b2.norm();
  std::vector<Vec> points;
  for (int i = 0; i < 40; ++i) {
    points.push_back(rng.uniform(-2.0, 2.0) * b1 + rng.uniform(-2.0, 2.0) * b2);
  }
  const PcaResult pca = pca_project(points, 2);
  CHECK(std::fabs(pca.basis[0].norm() - 1.0) <= 1e-8);
  CHECK(std::fabs(pca.basis[1].norm() - 1.0) <= 1e-8);
  CHECK(std::fabs(pca.basis[0].dot(pca.basis[1])) <= 1e-8);
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec rebuilt =
        pca.mean + pca.projected[i][0] * pca.basis[0] + pca.projected[i][1] * pca.basis[1];
    CHECK((rebuilt - points[i]).norm() <= 1e-8);
  }
}

TEST_CASE("pca of a 3-center simplex projects to 120 degree angles") {
  const SimplexEtf etf = make_simplex_etf(3, 8, RngSeed(53));
  std::vector<Vec> points;
  for (const UnitVector& c : etf.centers) points.push_back(c.vec());
  const PcaResult pca = pca_project(points, 2);
  for (size_t i = 0; i < 3; ++i) {
    const Vec& a = pca.projected[i];
    const Vec& b = pca.projected[(i + 1) % 3];
    const double angle = std::acos(a.dot(b) / (a.norm() * b.norm())) * 180.0 / M_PI;
    CHECK(std::fabs(angle - 120.0) < 0.1);
  }
}

TEST_CASE("pca explained variance is complete at full rank") {
  Rng rng(RngSeed(59));
  std::vector<Vec> points;
  for (int i = 0; i < 50; ++i) points.push_back(rng.normal_vec(6));
  const PcaResult pca = pca_project(points, 6);
  Mat centered(50, 6);
  Vec mean = Vec::Zero(6);
  for (const Vec& v : points) mean += v;
  mean /= 50.0;
  for (int i = 0; i < 50; ++i) centered.row(i) = (points[static_cast<size_t>(i)] - mean).transpose();
  const double total = (centered.transpose() * centered / 49.0).trace();
  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (double ev : pca.explained_variance) {
    CHECK(ev <= previous + 1e-12);
    previous = ev;
    sum += ev;
  }
  CHECK(sum == doctest::Approx(total).epsilon(1e-8));
}

TEST_CASE("pca rejects identical points") {
  std::vector<Vec> points(5, Vec::Ones(4));
  CHECK_THROWS_WITH_AS(pca_project(points, 2), doctest::Contains("DegenerateCovariance"),
                       Error);
}
