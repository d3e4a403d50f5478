#pragma once

#include <vector>

#include "ncse/rng.hpp"
#include "ncse/types.hpp"

namespace ncse {

// A point on the unit hypersphere S^{p-1}. The constructor validates the
// norm; use normalize() to project an arbitrary vector.
class UnitVector {
 public:
  explicit UnitVector(Vec v);

  const Vec& vec() const { return v_; }
  Index dim() const { return v_.size(); }
  double dot(const UnitVector& other) const;

 private:
  Vec v_;
};

// v / ||v||. Throws ZeroVector when ||v|| < 1e-12, DimensionTooSmall for p < 2.
UnitVector normalize(const Vec& v);

double cosine_distance(const UnitVector& a, const UnitVector& b);  // 1 - a.b

struct VonMisesFisher {
  UnitVector mean_direction;
  double concentration;  // kappa >= 0; 0 is the uniform distribution

  VonMisesFisher(UnitVector mean, double kappa);
};

// log C_p(kappa), the log normalization constant of the vMF density
// C_p(k) exp(k u.z). At kappa = 0 this is -log(area of S^{p-1}).
double vmf_log_normalizer(Index p, double kappa);

double vmf_log_density(const VonMisesFisher& dist, const UnitVector& z);

// Mean resultant length I_{p/2}(kappa) / I_{p/2-1}(kappa); the expected norm
// of the sample mean of vMF draws.
double vmf_mean_resultant_length(Index p, double kappa);

// count i.i.d. points uniform on S^{p-1} (normalized Gaussians).
std::vector<UnitVector> sample_uniform_sphere(Index p, int count, RngSeed seed);
std::vector<UnitVector> sample_uniform_sphere(Index p, int count, Rng& rng);

// Wood's rejection sampler on the axial coordinate; exact, expected
// acceptance rate above ~0.65 for all (p, kappa). kappa = 0 falls back to
// the uniform sampler.
std::vector<UnitVector> vmf_sample(const VonMisesFisher& dist, int count, RngSeed seed);
std::vector<UnitVector> vmf_sample(const VonMisesFisher& dist, int count, Rng& rng);

// n unit vectors in R^p with all pairwise dot products -1/(n-1): the
// vertices of a regular simplex, embedded by a seeded random isometry.
struct SimplexEtf {
  std::vector<UnitVector> centers;

  Index count() const { return static_cast<Index>(centers.size()); }
  Index dim() const { return centers.empty() ? 0 : centers.front().dim(); }
};

// Requires 2 <= n <= p + 1; throws DimensionTooSmall when p < n - 1.
SimplexEtf make_simplex_etf(Index n, Index p, RngSeed seed);

struct PcaResult {
  std::vector<Vec> basis;          // k orthonormal directions, ambient dim
  std::vector<Vec> projected;      // one k-vector per input point
  std::vector<double> explained_variance;  // non-increasing
  Vec mean;                        // centering offset
};

// Top-k principal components by power iteration with deflation
// (tolerance 1e-10, at most 1e4 iterations per component).
PcaResult pca_project(const std::vector<Vec>& points, Index k);

}  // namespace ncse
