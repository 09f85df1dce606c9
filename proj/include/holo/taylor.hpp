#pragma once

// Truncated multivariate Taylor polynomials.
//
// A Taylor value carries every Taylor coefficient of a function of `nvars`
// variables up to total degree `order` at one expansion point. Arithmetic and
// the elementary functions propagate them exactly (up to rounding), which is
// how the solver obtains analytic derivatives of its closed forms: a layer that
// needs first derivatives of the previous layer simply evaluates that layer one
// order higher and differentiates the polynomial.

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace holo {

struct TaylorTable;

class Taylor {
 public:
  using Coeffs = boost::container::small_vector<double, 16>;

  /// An exact constant; combines with any shape.
  Taylor(double value = 0.0);  // NOLINT: constants promote implicitly
  static Taylor constant(double value, int nvars, int order);
  static Taylor variable(double value, int index, int nvars, int order);

  int nvars() const;
  int order() const;
  /// True for the shapeless constants produced by the converting constructor.
  bool shapeless() const { return table_ == nullptr; }
  std::size_t size() const { return coeffs_.size(); }

  double value() const { return coeffs_[0]; }
  /// First partial derivative w.r.t. variable i (0 when not tracked).
  double partial(int i) const;
  /// Taylor coefficient of the monomial x^alpha.
  double coefficient(std::span<const int> alpha) const;
  /// Mixed partial derivative d^alpha at the expansion point.
  double derivative_value(std::span<const int> alpha) const;

  /// d/dx_i, with order reduced by one.
  Taylor derivative(int i) const;
  Taylor truncated(int order) const;
  /// Re-expresses this polynomial in a larger variable set: old variable i
  /// becomes new variable var_map[i].
  Taylor embedded(int nvars, std::span<const int> var_map) const;

  Taylor operator-() const;
  Taylor& operator+=(const Taylor& o);
  Taylor& operator-=(const Taylor& o);
  Taylor& operator*=(const Taylor& o);
  Taylor& operator/=(const Taylor& o);
  Taylor& operator+=(double c) { coeffs_[0] += c; return *this; }
  Taylor& operator-=(double c) { coeffs_[0] -= c; return *this; }
  Taylor& operator*=(double c);

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(const Taylor& a, const Taylor& b);
  friend Taylor operator/(const Taylor& a, const Taylor& b);
  friend Taylor operator+(Taylor a, double b) { return a += b; }
  friend Taylor operator+(double a, Taylor b) { return b += a; }
  friend Taylor operator-(Taylor a, double b) { return a -= b; }
  friend Taylor operator-(double a, const Taylor& b) { return (-b) += a; }
  friend Taylor operator*(Taylor a, double b) { return a *= b; }
  friend Taylor operator*(double a, Taylor b) { return b *= a; }
  friend Taylor operator/(Taylor a, double b) { return a *= (1.0 / b); }

  /// Composes a scalar function with this value given the normalized
  /// derivatives f^(k)(value)/k!, k = 0..order.
  Taylor compose(std::span<const double> scaled_derivatives) const;

 private:
  Taylor(const TaylorTable* table, Coeffs coeffs) : table_(table), coeffs_(std::move(coeffs)) {}
  static const TaylorTable* common_table(const Taylor& a, const Taylor& b);
  Taylor reshaped(const TaylorTable* table) const;

  const TaylorTable* table_ = nullptr;
  Coeffs coeffs_;
};

Taylor sin(const Taylor& x);
Taylor cos(const Taylor& x);
Taylor exp(const Taylor& x);
Taylor log(const Taylor& x);
Taylor sqrt(const Taylor& x);
Taylor abs(const Taylor& x);
/// Real power; the base must be positive unless p is a non-negative integer.
Taylor pow(const Taylor& x, double p);
Taylor ipow(const Taylor& x, int p);
inline double value_of(const Taylor& t) { return t.value(); }

/// Number of monomials of total degree <= order in nvars variables.
std::size_t taylor_size(int nvars, int order);

}  // namespace holo
