#pragma once

// Small dense linear algebra, norms, exact trigonometric quadrature and
// first-order dual numbers. Dimensions here are tiny (m, n <= 8), so every
// container is a plain heap vector with explicit, checked dimensions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace holo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vec(std::initializer_list<double> values) : data_(values) {}
  explicit Vec(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double s);

  bool operator==(const Vec&) const = default;

 private:
  std::vector<double> data_;
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double s, Vec a);
double dot(const Vec& a, const Vec& b);

/// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Mat identity(std::size_t n);
  static Mat from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  Vec row(std::size_t r) const;
  Vec col(std::size_t c) const;
  void set_col(std::size_t c, const Vec& v);
  /// Copy with column c removed.
  Mat without_col(std::size_t c) const;
  Vec operator*(const Vec& v) const;
  Mat operator*(const Mat& o) const;

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Target-space norm: max |v_i|, and 0 on the zero-dimensional space.
double sup_norm(std::span<const double> v);
inline double sup_norm(const Vec& v) { return sup_norm(v.span()); }
/// Source-space norm.
double euclid_norm(std::span<const double> v);
inline double euclid_norm(const Vec& v) { return euclid_norm(v.span()); }

/// m^T (I + y y^T)^{-1} m  =  |m|^2 - <m,y>^2 / (1 + |y|^2).
///
/// This is the square of the largest value of <m,u> / sqrt(|u|^2 + <y,u>^2),
/// i.e. the operator norm of the form m restricted to the graph of y.
template <typename T>
T rank_one_inverse_quadratic(std::span<const T> m, std::span<const T> y) {
  if (m.size() != y.size()) {
    throw DimensionError("rank_one_inverse_quadratic: dimension mismatch " +
                         std::to_string(m.size()) + " vs " + std::to_string(y.size()));
  }
  T mm = T(0.0), my = T(0.0), yy = T(0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    mm = mm + m[i] * m[i];
    my = my + m[i] * y[i];
    yy = yy + y[i] * y[i];
  }
  return mm - my * my / (yy + 1.0);
}

double rank_one_inverse_quadratic(const Vec& m, const Vec& y);

/// c0 + sum_l a_l cos(2 pi l t) + b_l sin(2 pi l t), period 1.
/// cos_coeffs[l-1] = a_l, sin_coeffs[l-1] = b_l.
struct TrigPoly {
  double c0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double operator()(double t) const;
  /// Antiderivative vanishing at t = 0.
  double primitive(double t) const;
  std::size_t degree() const;
};

double integrate_trigpoly(const TrigPoly& p, double a, double b);

/// Composite Simpson rule; `nodes` is rounded up to an even number of panels.
double integrate_simpson(const std::function<double(double)>& f, double a, double b,
                         std::size_t nodes = std::size_t{1} << 14);

/// Forward-mode dual number with one partial per active variable.
class Dual {
 public:
  Dual() = default;
  Dual(double value) : value_(value) {}  // NOLINT: constants promote implicitly
  Dual(double value, std::vector<double> partials)
      : value_(value), partials_(std::move(partials)) {}
  static Dual variable(double value, std::size_t index, std::size_t count);

  double value() const { return value_; }
  /// Partial w.r.t. variable i; constants report 0.
  double partial(std::size_t i) const { return i < partials_.size() ? partials_[i] : 0.0; }
  const std::vector<double>& partials() const { return partials_; }

  Dual operator-() const;
  Dual& operator+=(const Dual& o);
  Dual& operator-=(const Dual& o);
  Dual& operator*=(const Dual& o);
  Dual& operator/=(const Dual& o);

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

 private:
  // Applies the chain rule: value <- f, partials <- df * partials.
  Dual& chain(double f, double df);
  friend Dual sin(Dual);
  friend Dual cos(Dual);
  friend Dual exp(Dual);
  friend Dual log(Dual);
  friend Dual sqrt(Dual);
  friend Dual abs(Dual);
  friend Dual pow(Dual, double);

  double value_ = 0.0;
  std::vector<double> partials_;
};

Dual sin(Dual x);
Dual cos(Dual x);
Dual exp(Dual x);
Dual log(Dual x);
Dual sqrt(Dual x);
Dual abs(Dual x);
Dual pow(Dual x, double p);
inline double value_of(const Dual& d) { return d.value(); }
inline double value_of(double d) { return d; }

}  // namespace holo
