#pragma once

// Sample-based distances between particle marginals and the limit density.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "landau/limit_solver.hpp"
#include "landau/rng.hpp"

namespace landau {

/// m points in R^d stored contiguously.
struct SampleSet {
  int d = 2;
  std::vector<double> points;
  std::string source;

  std::size_t size() const { return points.size() / static_cast<std::size_t>(d); }
  const double* point(std::size_t k) const { return &points[k * d]; }
  void push_back(const Vec& v) {
    for (int a = 0; a < d; ++a) points.push_back(v[a]);
  }
};

struct FieldSamples {
  SampleSet samples;
  double acceptance_rate = 0.0;
};

/// Rejection sampling of the bilinear interpolant with a centred Gaussian
/// proposal whose variances are 1.5x the grid second moments. Throws
/// NumericalFailure when the acceptance rate drops below 1%.
FieldSamples sample_from_field(const DensityField& field, std::size_t m,
                               NoiseSource& noise);

/// Exact squared 1D Wasserstein-2 distance between two empirical measures
/// given their sorted supports (unequal sizes allowed).
double w2_squared_sorted(const std::vector<double>& a,
                         const std::vector<double>& b);

/// sqrt of the mean, over n_proj uniform directions, of the squared 1D W2
/// between the projected samples. n_proj must be >= 32.
double sliced_w2(const SampleSet& a, const SampleSet& b, int n_proj,
                 NoiseSource& noise);

inline constexpr int kKnnDefaultK = 5;
inline constexpr double kKnnDistanceFloor = 1e-12;

/// k-nearest-neighbour estimate of KL(P || Q):
///   (d/n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1)),
/// rho_k within P (self excluded), nu_k into Q. May be slightly negative.
double knn_kl(const SampleSet& p, const SampleSet& q, int k = kKnnDefaultK);

/// Histogram estimate of || sample law - field ||_{L1} with `bins` bins per
/// axis over the field's grid. Two-dimensional samples only.
double l1_to_field(const SampleSet& samples, const DensityField& field,
                   int bins);

/// sqrt(2 k max(kl, 0)) - l1.
double ckp_check(double kl_est, double l1_est, int k = 1);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Ordinary least squares on (ln N, ln value). Needs >= 3 points with
/// distinct N and strictly positive values.
RateFit convergence_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace landau
