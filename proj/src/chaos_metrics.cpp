#include "landau/chaos_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace landau {

FieldSamples sample_from_field(const DensityField& field, std::size_t m,
                               NoiseSource& noise) {
  const Grid2D& g = field.grid();
  const Mat e = second_moments(field);
  const double mass = conserved_quantities(field).mass;
  double sd[2];
  for (int a = 0; a < 2; ++a) sd[a] = std::sqrt(1.5 * std::max(e(a, a) / mass, 1e-6));

  auto log_q = [&](double v1, double v2) {
    const double z1 = v1 / sd[0], z2 = v2 / sd[1];
    return -0.5 * (z1 * z1 + z2 * z2) -
           std::log(2.0 * std::numbers::pi * sd[0] * sd[1]);
  };
  // Envelope: on every cell the bilinear interpolant is at most its largest
  // corner, the proposal at least its smallest corner.
  double log_envelope = -std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < g.n; ++i)
    for (int j = 0; j + 1 < g.n; ++j) {
      const double fmax = std::max({field.at(i, j), field.at(i + 1, j),
                                    field.at(i, j + 1), field.at(i + 1, j + 1)});
      if (fmax <= 0.0) continue;
      const double qmin = std::min({log_q(g.coord(i), g.coord(j)),
                                    log_q(g.coord(i + 1), g.coord(j)),
                                    log_q(g.coord(i), g.coord(j + 1)),
                                    log_q(g.coord(i + 1), g.coord(j + 1))});
      log_envelope = std::max(log_envelope, std::log(fmax) - qmin);
    }
  if (!std::isfinite(log_envelope))
    throw std::invalid_argument("cannot sample from an empty field");

  FieldSamples out;
  out.samples.d = 2;
  out.samples.source = "limit";
  out.samples.points.reserve(2 * m);
  std::size_t proposals = 0;
  while (out.samples.size() < m) {
    const double v1 = sd[0] * noise.normal();
    const double v2 = sd[1] * noise.normal();
    const double u = noise.uniform();
    ++proposals;
    const double f = field.interpolate(v1, v2);
    if (f > 0.0 && std::log(u) < std::log(f) - log_envelope - log_q(v1, v2))
      out.samples.push_back(Vec(v1, v2));
    if (proposals >= 1000 && out.samples.size() * 100 < proposals) {
      std::ostringstream msg;
      msg << "rejection sampler acceptance rate "
          << static_cast<double>(out.samples.size()) / proposals
          << " is below 1%";
      throw NumericalFailure(msg.str());
    }
  }
  out.acceptance_rate = static_cast<double>(m) / static_cast<double>(proposals);
  return out;
}

double w2_squared_sorted(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("w2 needs nonempty samples");
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s / static_cast<double>(a.size());
  }
  // Integrate (F_a^{-1}(u) - F_b^{-1}(u))^2 over the merged breakpoints.
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double u = 0.0, s = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double ua = (ia + 1) / na, ub = (ib + 1) / nb;
    const double next = std::min(ua, ub);
    const double diff = a[ia] - b[ib];
    s += (next - u) * diff * diff;
    u = next;
    if (ua <= next) ++ia;
    if (ub <= next) ++ib;
  }
  return s;
}

double sliced_w2(const SampleSet& a, const SampleSet& b, int n_proj,
                 NoiseSource& noise) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("sliced_w2: empty sample set");
  if (a.d != b.d) throw std::invalid_argument("sliced_w2: dimension mismatch");
  if (n_proj < 32) throw std::invalid_argument("sliced_w2: n_proj must be >= 32");
  const int d = a.d;
  std::vector<double> pa(a.size()), pb(b.size());
  double total = 0.0;
  for (int p = 0; p < n_proj; ++p) {
    Vec theta(d);
    for (int c = 0; c < d; ++c) theta[c] = noise.normal();
    theta *= 1.0 / theta.norm();
    for (std::size_t k = 0; k < a.size(); ++k) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += theta[c] * a.point(k)[c];
      pa[k] = s;
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += theta[c] * b.point(k)[c];
      pb[k] = s;
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    total += w2_squared_sorted(pa, pb);
  }
  return std::sqrt(total / n_proj);
}

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

template <int D>
double knn_kl_impl(const SampleSet& p, const SampleSet& q, int k) {
  using Point = bg::model::point<double, D, bg::cs::cartesian>;
  using Value = std::pair<Point, std::size_t>;
  auto make_point = [](const double* x) {
    Point pt;
    bg::set<0>(pt, x[0]);
    bg::set<1>(pt, x[1]);
    if constexpr (D == 3) bg::set<2>(pt, x[2]);
    return pt;
  };
  auto build = [&](const SampleSet& s) {
    std::vector<Value> values;
    values.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      values.emplace_back(make_point(s.point(i)), i);
    return bgi::rtree<Value, bgi::rstar<16>>(values.begin(), values.end());
  };
  const auto tree_p = build(p);
  const auto tree_q = build(q);

  std::vector<Value> hits;
  std::vector<double> dist;
  auto kth = [&](const auto& tree, const Point& pt, int count,
                 std::size_t skip) {
    hits.clear();
    tree.query(bgi::nearest(pt, count), std::back_inserter(hits));
    dist.clear();
    bool skipped = false;
    for (const Value& h : hits) {
      if (!skipped && h.second == skip) {
        skipped = true;
        continue;
      }
      dist.push_back(bg::distance(pt, h.first));
    }
    std::sort(dist.begin(), dist.end());
    return std::max(dist[static_cast<std::size_t>(k) - 1], kKnnDistanceFloor);
  };

  const std::size_t n = p.size(), m = q.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point pt = make_point(p.point(i));
    const double rho = kth(tree_p, pt, k + 1, i);
    const double nu = kth(tree_q, pt, k, static_cast<std::size_t>(-1));
    sum += std::log(nu / rho);
  }
  return D * sum / static_cast<double>(n) +
         std::log(static_cast<double>(m) / static_cast<double>(n - 1));
}

}  // namespace

double knn_kl(const SampleSet& p, const SampleSet& q, int k) {
  if (k < 1) throw std::invalid_argument("knn_kl: k must be >= 1");
  if (p.d != q.d) throw std::invalid_argument("knn_kl: dimension mismatch");
  if (p.size() < static_cast<std::size_t>(k) + 1 ||
      q.size() < static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument("knn_kl: each sample needs at least k+1 points");
  switch (p.d) {
    case 2: return knn_kl_impl<2>(p, q, k);
    case 3: return knn_kl_impl<3>(p, q, k);
  }
  throw std::invalid_argument("knn_kl: dimension must be 2 or 3");
}

double l1_to_field(const SampleSet& samples, const DensityField& field,
                   int bins) {
  if (samples.d != 2) throw std::invalid_argument("l1_to_field: d must be 2");
  if (bins < 1) throw std::invalid_argument("l1_to_field: bins must be >= 1");
  if (samples.size() == 0) throw std::invalid_argument("l1_to_field: no samples");
  const Grid2D& g = field.grid();
  const double width = 2.0 * g.L / bins;

  // Bin probabilities of the interpolant by an 8x8 midpoint rule per bin.
  constexpr int kSub = 8;
  std::vector<double> prob(static_cast<std::size_t>(bins) * bins, 0.0);
  double total = 0.0;
  for (int bi = 0; bi < bins; ++bi)
    for (int bj = 0; bj < bins; ++bj) {
      double s = 0.0;
      for (int si = 0; si < kSub; ++si)
        for (int sj = 0; sj < kSub; ++sj)
          s += field.interpolate(-g.L + (bi + (si + 0.5) / kSub) * width,
                                 -g.L + (bj + (sj + 0.5) / kSub) * width);
      s *= width * width / (kSub * kSub);
      prob[static_cast<std::size_t>(bi) * bins + bj] = s;
      total += s;
    }
  for (double& p : prob) p /= total;

  std::vector<double> counts(prob.size(), 0.0);
  std::size_t outside = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double* x = samples.point(k);
    const int bi = static_cast<int>(std::floor((x[0] + g.L) / width));
    const int bj = static_cast<int>(std::floor((x[1] + g.L) / width));
    if (bi < 0 || bj < 0 || bi >= bins || bj >= bins) {
      ++outside;
      continue;
    }
    counts[static_cast<std::size_t>(bi) * bins + bj] += 1.0;
  }
  const double m = static_cast<double>(samples.size());
  double l1 = static_cast<double>(outside) / m;
  for (std::size_t b = 0; b < prob.size(); ++b) l1 += std::abs(counts[b] / m - prob[b]);
  return l1;
}

double ckp_check(double kl_est, double l1_est, int k) {
  return std::sqrt(2.0 * k * std::max(kl_est, 0.0)) - l1_est;
}

RateFit convergence_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("convergence_slope needs at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [n, value] : points) {
    if (!(value > 0.0))
      throw std::invalid_argument("convergence_slope: values must be positive");
    if (!(n > 0.0))
      throw std::invalid_argument("convergence_slope: N must be positive");
    xs.push_back(std::log(n));
    ys.push_back(std::log(value));
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("convergence_slope: N values must be distinct");

  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = points;
  return fit;
}

}  // namespace landau
