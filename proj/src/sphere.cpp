#include "ncse/sphere.hpp"

#include <cmath>
#include <utility>

#include "ncse/error.hpp"
#include "ncse/special.hpp"

namespace ncse {

namespace {

constexpr double kUnitNormTolerance = 1e-9;

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

UnitVector::UnitVector(Vec v) : v_(std::move(v)) {
  if (v_.size() < 2) {
    throw Error(ErrorCode::DimensionTooSmall, "unit vectors need dimension >= 2");
  }
  if (std::fabs(v_.norm() - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::ZeroVector, "vector is not unit-norm");
  }
}

double UnitVector::dot(const UnitVector& other) const {
  require_same_dim(dim(), other.dim(), "unit vector dot product");
  return v_.dot(other.v_);
}

UnitVector normalize(const Vec& v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::DimensionTooSmall, "normalize needs dimension >= 2");
  }
  const double n = v.norm();
  if (n < 1e-12) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  return UnitVector(Vec(v / n));
}

double cosine_distance(const UnitVector& a, const UnitVector& b) {
  return 1.0 - a.dot(b);
}

VonMisesFisher::VonMisesFisher(UnitVector mean, double kappa)
    : mean_direction(std::move(mean)), concentration(kappa) {
  if (kappa < 0.0) {
    throw Error(ErrorCode::BadArgument, "vMF concentration must be >= 0");
  }
}

double vmf_log_normalizer(Index p, double kappa) {
  if (p < 2) throw Error(ErrorCode::DimensionTooSmall, "vMF needs p >= 2");
  if (kappa < 0.0) throw Error(ErrorCode::BadArgument, "kappa must be >= 0");
  if (kappa == 0.0) return -log_unit_sphere_area(p);
  const double half_p = 0.5 * static_cast<double>(p);
  const double result = (half_p - 1.0) * std::log(kappa) -
                        half_p * std::log(2.0 * 3.14159265358979323846) -
                        log_bessel_i(half_p - 1.0, kappa);
  if (!std::isfinite(result)) {
    throw Error(ErrorCode::NumericOverflow, "vmf_log_normalizer lost finiteness");
  }
  return result;
}

double vmf_log_density(const VonMisesFisher& dist, const UnitVector& z) {
  require_same_dim(dist.mean_direction.dim(), z.dim(), "vmf_log_density");
  return vmf_log_normalizer(z.dim(), dist.concentration) +
         dist.concentration * dist.mean_direction.dot(z);
}

double vmf_mean_resultant_length(Index p, double kappa) {
  if (kappa == 0.0) return 0.0;
  const double half_p = 0.5 * static_cast<double>(p);
  return std::exp(log_bessel_i(half_p, kappa) - log_bessel_i(half_p - 1.0, kappa));
}

std::vector<UnitVector> sample_uniform_sphere(Index p, int count, Rng& rng) {
  if (p < 2) throw Error(ErrorCode::DimensionTooSmall, "sphere sampling needs p >= 2");
  if (count < 1) throw Error(ErrorCode::BadArgument, "count must be >= 1");
  std::vector<UnitVector> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vec g = rng.normal_vec(p);
    while (g.norm() < 1e-12) g = rng.normal_vec(p);
    out.push_back(normalize(g));
  }
  return out;
}

std::vector<UnitVector> sample_uniform_sphere(Index p, int count, RngSeed seed) {
  Rng rng(seed);
  return sample_uniform_sphere(p, count, rng);
}

namespace {

// Marsaglia-Tsang gamma sampler, shape >= 1. For shape < 1 the standard
// boost gamma(a) = gamma(a+1) * U^{1/a} applies.
double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, rng);
  const double y = sample_gamma(b, rng);
  return x / (x + y);
}

// One draw of the axial coordinate w = u.z for vMF(u, kappa) on S^{p-1},
// by Wood's envelope rejection.
double sample_vmf_axial(Index p, double kappa, Rng& rng) {
  const double d = static_cast<double>(p - 1);
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + d * d)) / d;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + d * std::log(1.0 - x0 * x0);
  for (;;) {
    const double z = sample_beta(0.5 * d, 0.5 * d, rng);
    const double u = rng.uniform();
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (kappa * w + d * std::log(1.0 - x0 * w) - c >= std::log(u)) return w;
  }
}

}  // namespace

std::vector<UnitVector> vmf_sample(const VonMisesFisher& dist, int count, Rng& rng) {
  if (count < 1) throw Error(ErrorCode::BadArgument, "count must be >= 1");
  const Index p = dist.mean_direction.dim();
  if (dist.concentration == 0.0) return sample_uniform_sphere(p, count, rng);

  const Vec& u = dist.mean_direction.vec();
  std::vector<UnitVector> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double w = sample_vmf_axial(p, dist.concentration, rng);
    // Uniform direction in the orthogonal complement of u.
    Vec v = rng.normal_vec(p);
    v -= v.dot(u) * u;
    while (v.norm() < 1e-12) {
      v = rng.normal_vec(p);
      v -= v.dot(u) * u;
    }
    v /= v.norm();
    Vec z = w * u + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
    out.push_back(normalize(z));
  }
  return out;
}

std::vector<UnitVector> vmf_sample(const VonMisesFisher& dist, int count, RngSeed seed) {
  Rng rng(seed);
  return vmf_sample(dist, count, rng);
}

namespace {

// Orthonormal columns from a seeded Gaussian matrix, by modified
// Gram-Schmidt. rows >= cols.
Mat seeded_orthonormal_map(Index rows, Index cols, Rng& rng) {
  Mat q(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    Vec v = rng.normal_vec(rows);
    for (int attempt = 0;; ++attempt) {
      Vec w = v;
      for (Index i = 0; i < j; ++i) w -= q.col(i).dot(w) * q.col(i);
      const double n = w.norm();
      if (n > 1e-8) {
        q.col(j) = w / n;
        break;
      }
      v = rng.normal_vec(rows);
      (void)attempt;
    }
  }
  return q;
}

}  // namespace

SimplexEtf make_simplex_etf(Index n, Index p, RngSeed seed) {
  if (n < 2) throw Error(ErrorCode::BadArgument, "simplex ETF needs n >= 2");
  if (p < n - 1) {
    throw Error(ErrorCode::DimensionTooSmall,
                "simplex ETF with n centers needs dimension >= n - 1");
  }
  // Centered, normalized standard basis: rows of (I - 11^T/n) scaled to unit
  // norm have pairwise dot exactly -1/(n-1).
  Mat simplex = Mat::Identity(n, n);
  simplex.array() -= 1.0 / static_cast<double>(n);
  simplex *= std::sqrt(static_cast<double>(n) / (static_cast<double>(n) - 1.0));

  // Helmert-style orthonormal basis of the hyperplane orthogonal to the
  // all-ones vector; expresses each vertex in n-1 coordinates.
  Mat helmert(n, n - 1);
  helmert.setZero();
  for (Index k = 0; k < n - 1; ++k) {
    const double kk = static_cast<double>(k + 1);
    const double scale = 1.0 / std::sqrt(kk * (kk + 1.0));
    for (Index i = 0; i <= k; ++i) helmert(i, k) = scale;
    helmert(k + 1, k) = -kk * scale;
  }
  Mat coords = simplex * helmert;  // n x (n-1)

  Rng rng(seed);
  Mat embed = seeded_orthonormal_map(p, n - 1, rng);  // p x (n-1)

  SimplexEtf etf;
  etf.centers.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    etf.centers.push_back(normalize(Vec(embed * coords.row(i).transpose())));
  }
  return etf;
}

PcaResult pca_project(const std::vector<Vec>& points, Index k) {
  if (points.size() < 2) {
    throw Error(ErrorCode::BadArgument, "pca_project needs at least 2 points");
  }
  const Index dim = points.front().size();
  if (k < 1 || k > dim) {
    throw Error(ErrorCode::BadArgument, "pca_project target dimension out of range");
  }
  const Index count = static_cast<Index>(points.size());
  Mat data(count, dim);
  for (Index i = 0; i < count; ++i) {
    if (points[static_cast<size_t>(i)].size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "pca_project points differ in dimension");
    }
    data.row(i) = points[static_cast<size_t>(i)].transpose();
  }
  const Vec mean = data.colwise().mean().transpose();
  data.rowwise() -= mean.transpose();
  Mat cov = data.transpose() * data / static_cast<double>(count - 1);
  if (cov.cwiseAbs().maxCoeff() < 1e-24) {
    throw Error(ErrorCode::DegenerateCovariance, "all points identical");
  }

  constexpr double kTol = 1e-10;
  constexpr int kMaxIters = 10'000;
  // Fixed internal seed: pca_project takes no RNG yet must be deterministic.
  Rng rng(0x9E3779B97F4A7C15ULL);

  PcaResult result;
  result.mean = mean;
  result.basis.reserve(static_cast<size_t>(k));
  result.explained_variance.reserve(static_cast<size_t>(k));
  for (Index comp = 0; comp < k; ++comp) {
    Vec v = rng.normal_vec(dim);
    v /= v.norm();
    double lambda = 0.0;
    for (int it = 0; it < kMaxIters; ++it) {
      Vec w = cov * v;
      // Re-orthogonalize against previous components for stability.
      for (const Vec& b : result.basis) w -= b.dot(w) * b;
      const double n = w.norm();
      if (n < 1e-30) break;  // exhausted variance; keep current direction
      w /= n;
      const double delta = (w - v * (w.dot(v) >= 0.0 ? 1.0 : -1.0)).norm();
      v = w;
      lambda = v.dot(cov * v);
      if (delta < kTol) break;
    }
    // Deterministic sign: largest-magnitude entry positive.
    Index arg_max = 0;
    v.cwiseAbs().maxCoeff(&arg_max);
    if (v[arg_max] < 0.0) v = -v;
    lambda = v.dot(cov * v);
    cov -= lambda * v * v.transpose();
    result.basis.push_back(v);
    result.explained_variance.push_back(lambda);
  }
  result.projected.reserve(points.size());
  for (Index i = 0; i < count; ++i) {
    Vec proj(k);
    for (Index j = 0; j < k; ++j) proj[j] = data.row(i).dot(result.basis[static_cast<size_t>(j)]);
    result.projected.push_back(std::move(proj));
  }
  return result;
}

}  // namespace ncse
