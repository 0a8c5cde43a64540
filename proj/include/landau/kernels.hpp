#pragma once

// Landau-Maxwellian coefficient fields and small dense linear algebra.
//
// Everything here works on fixed-capacity vectors/matrices whose runtime
// dimension is 2 or 3. All functions are pure.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace landau {

inline constexpr int kMaxDim = 3;

/// Throws std::invalid_argument unless d is 2 or 3.
void require_dim(int d);

/// Velocity-space vector of dimension 2 or 3.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int d) : dim_(d) {}
  Vec(double x, double y) : x_{x, y, 0.0}, dim_(2) {}
  Vec(double x, double y, double z) : x_{x, y, z}, dim_(3) {}

  static Vec from(std::span<const double> c) {
    Vec v(static_cast<int>(c.size()));
    for (std::size_t a = 0; a < c.size(); ++a) v.x_[a] = c[a];
    return v;
  }

  int dim() const { return dim_; }
  double& operator[](int a) { return x_[a]; }
  double operator[](int a) const { return x_[a]; }

  double norm2() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += x_[a] * x_[a];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  Vec& operator+=(const Vec& o) {
    for (int a = 0; a < dim_; ++a) x_[a] += o.x_[a];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int a = 0; a < dim_; ++a) x_[a] -= o.x_[a];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int a = 0; a < dim_; ++a) x_[a] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }

  friend double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int k = 0; k < a.dim_; ++k) s += a.x_[k] * b.x_[k];
    return s;
  }

 private:
  std::array<double, kMaxDim> x_{};
  int dim_ = 0;
};

/// Dense d x d matrix, row-major. Symmetry is not enforced here.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int d) : dim_(d) {}

  static Mat identity(int d) {
    Mat m(d);
    for (int a = 0; a < d; ++a) m(a, a) = 1.0;
    return m;
  }
  static Mat diag(const Vec& v) {
    Mat m(v.dim());
    for (int a = 0; a < v.dim(); ++a) m(a, a) = v[a];
    return m;
  }
  static Mat outer(const Vec& u, const Vec& v) {
    Mat m(u.dim());
    for (int a = 0; a < u.dim(); ++a)
      for (int b = 0; b < u.dim(); ++b) m(a, b) = u[a] * v[b];
    return m;
  }

  int dim() const { return dim_; }
  double& operator()(int r, int c) { return e_[r * kMaxDim + c]; }
  double operator()(int r, int c) const { return e_[r * kMaxDim + c]; }

  double trace() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += (*this)(a, a);
    return s;
  }
  double frobenius() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) s += (*this)(a, b) * (*this)(a, b);
    return std::sqrt(s);
  }

  Mat& operator+=(const Mat& o) {
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) (*this)(a, b) += o(a, b);
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) (*this)(a, b) -= o(a, b);
    return *this;
  }
  Mat& operator*=(double s) {
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) (*this)(a, b) *= s;
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(double s, Mat a) { return a *= s; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    Mat m(a.dim_);
    for (int r = 0; r < a.dim_; ++r)
      for (int c = 0; c < a.dim_; ++c) {
        double s = 0.0;
        for (int k = 0; k < a.dim_; ++k) s += a(r, k) * b(k, c);
        m(r, c) = s;
      }
    return m;
  }
  friend Vec operator*(const Mat& a, const Vec& v) {
    Vec out(a.dim_);
    for (int r = 0; r < a.dim_; ++r) {
      double s = 0.0;
      for (int k = 0; k < a.dim_; ++k) s += a(r, k) * v[k];
      out[r] = s;
    }
    return out;
  }

 private:
  std::array<double, kMaxDim * kMaxDim> e_{};
  int dim_ = 0;
};

/// a(z) = |z|^2 Id - z (x) z. Total function; a(0) = 0.
Mat coeff_a(const Vec& z);

/// b(z) = div a = -(d-1) z.
Vec coeff_b(const Vec& z);

/// c = div b = -d(d-1). Rejects d < 2.
double coeff_c(int d);

/// Rotation field with -z_beta in slot alpha and z_alpha in slot beta.
/// Indices are zero-based and must satisfy alpha < beta < d.
Vec xi_field(const Vec& z, int alpha, int beta);

/// Number of (alpha < beta) pairs in dimension d.
inline int pair_count(int d) { return d * (d - 1) / 2; }

/// The p-th (alpha, beta) pair in lexicographic order.
std::array<int, 2> pair_at(int d, int p);

/// Eigendecomposition of a symmetric matrix: values ascending, vectors in
/// the columns of `vectors`. Closed form for d = 2, cyclic Jacobi for d = 3.
struct SymEigen {
  Vec values;
  Mat vectors;
};
SymEigen sym_eigen(const Mat& m);

inline constexpr double kPsdSqrtTol = 1e-10;

/// Symmetric square root of a symmetric positive semidefinite matrix.
/// Eigenvalues in [-tol, 0) are clamped to zero; asymmetry beyond tol or an
/// eigenvalue below -tol throws std::domain_error.
Mat psd_sqrt(const Mat& m, double tol = kPsdSqrtTol);

}  // namespace landau
