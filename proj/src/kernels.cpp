#include "landau/kernels.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace landau {

void require_dim(int d) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("dimension must be 2 or 3, got " +
                                std::to_string(d));
}

Mat coeff_a(const Vec& z) {
  const int d = z.dim();
  const double r2 = z.norm2();
  Mat m(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      m(a, b) = (a == b ? r2 : 0.0) - z[a] * z[b];
  return m;
}

Vec coeff_b(const Vec& z) { return -static_cast<double>(z.dim() - 1) * z; }

double coeff_c(int d) {
  if (d < 2) throw std::invalid_argument("coeff_c requires d >= 2");
  return -static_cast<double>(d) * (d - 1);
}

Vec xi_field(const Vec& z, int alpha, int beta) {
  if (alpha < 0 || beta >= z.dim() || alpha >= beta)
    throw std::invalid_argument("xi_field requires 0 <= alpha < beta < d");
  Vec out(z.dim());
  out[alpha] = -z[beta];
  out[beta] = z[alpha];
  return out;
}

std::array<int, 2> pair_at(int d, int p) {
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      if (p == 0) return {a, b};
      --p;
    }
  throw std::out_of_range("pair index out of range");
}

namespace {

SymEigen eigen2(const Mat& m) {
  const double a = m(0, 0), b = 0.5 * (m(0, 1) + m(1, 0)), c = m(1, 1);
  const double mean = 0.5 * (a + c);
  const double half = 0.5 * (a - c);
  const double rad = std::hypot(half, b);
  SymEigen out{Vec(2), Mat(2)};
  out.values[0] = mean - rad;
  out.values[1] = mean + rad;
  // Rotation angle that diagonalizes the matrix.
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  const double cs = std::cos(theta), sn = std::sin(theta);
  // (cs, sn) belongs to mean + rad, (-sn, cs) to mean - rad.
  out.vectors(0, 1) = cs;
  out.vectors(1, 1) = sn;
  out.vectors(0, 0) = -sn;
  out.vectors(1, 0) = cs;
  return out;
}

SymEigen eigen_jacobi(const Mat& m) {
  const int d = m.dim();
  Mat a(d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = 0.5 * (m(r, c) + m(c, r));
  Mat v = Mat::identity(d);

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0) break;
    double scale = 0.0;
    for (int p = 0; p < d; ++p) scale += a(p, p) * a(p, p);
    if (off <= 1e-36 * (scale + off)) break;

    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::array<int, kMaxDim> order{0, 1, 2};
  std::sort(order.begin(), order.begin() + d,
            [&](int i, int j) { return a(i, i) < a(j, j); });
  SymEigen out{Vec(d), Mat(d)};
  for (int k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int r = 0; r < d; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace

SymEigen sym_eigen(const Mat& m) {
  require_dim(m.dim());
  return m.dim() == 2 ? eigen2(m) : eigen_jacobi(m);
}

Mat psd_sqrt(const Mat& m, double tol) {
  const int d = m.dim();
  require_dim(d);
  double asym = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      const double diff = m(r, c) - m(c, r);
      asym += 2.0 * diff * diff;
    }
  if (std::sqrt(asym) > tol)
    throw std::domain_error("psd_sqrt: matrix is not symmetric within tol");

  const SymEigen eig = sym_eigen(m);
  if (eig.values[0] < -tol)
    throw std::domain_error("psd_sqrt: eigenvalue " +
                            std::to_string(eig.values[0]) + " below -tol");

  Mat s(d);
  for (int k = 0; k < d; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    if (root == 0.0) continue;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        s(r, c) += root * eig.vectors(r, k) * eig.vectors(c, k);
  }
  return s;
}

}  // namespace landau
