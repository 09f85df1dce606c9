#include "holo/numcore.hpp"

#include <algorithm>
#include <numbers>

namespace holo {

namespace {

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

Vec& Vec::operator+=(const Vec& o) {
  check_same(size(), o.size(), "Vec +");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& o) {
  check_same(size(), o.size(), "Vec -");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Vec& Vec::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double s, Vec a) { return a *= s; }

double dot(const Vec& a, const Vec& b) {
  check_same(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Mat m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    check_same(rows[r].size(), m.cols(), "Mat::from_rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Vec Mat::row(std::size_t r) const {
  Vec v(cols_);
  for (std::size_t c = 0; c < cols_; ++c) v[c] = (*this)(r, c);
  return v;
}

Vec Mat::col(std::size_t c) const {
  Vec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Mat::set_col(std::size_t c, const Vec& v) {
  check_same(v.size(), rows_, "Mat::set_col");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Mat Mat::without_col(std::size_t c) const {
  if (c >= cols_) throw DimensionError("Mat::without_col: column out of range");
  Mat out(rows_, cols_ - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0, o = 0; k < cols_; ++k) {
      if (k != c) out(r, o++) = (*this)(r, k);
    }
  }
  return out;
}

Vec Mat::operator*(const Vec& v) const {
  check_same(cols_, v.size(), "Mat * Vec");
  Vec out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

Mat Mat::operator*(const Mat& o) const {
  check_same(cols_, o.rows_, "Mat * Mat");
  Mat out(rows_, o.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k)
      for (std::size_t c = 0; c < o.cols_; ++c) out(r, c) += (*this)(r, k) * o(k, c);
  return out;
}

double sup_norm(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

double euclid_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double rank_one_inverse_quadratic(const Vec& m, const Vec& y) {
  // Clamp tiny negative round-off; the exact value is >= 0.
  return std::max(0.0, rank_one_inverse_quadratic<double>(m.span(), y.span()));
}

double TrigPoly::operator()(double t) const {
  double s = c0;
  const double w = 2.0 * std::numbers::pi * t;
  for (std::size_t l = 0; l < cos_coeffs.size(); ++l) s += cos_coeffs[l] * std::cos(w * double(l + 1));
  for (std::size_t l = 0; l < sin_coeffs.size(); ++l) s += sin_coeffs[l] * std::sin(w * double(l + 1));
  return s;
}

double TrigPoly::primitive(double t) const {
  double s = c0 * t;
  const double w = 2.0 * std::numbers::pi * t;
  for (std::size_t l = 0; l < cos_coeffs.size(); ++l) {
    const double k = 2.0 * std::numbers::pi * double(l + 1);
    s += cos_coeffs[l] * std::sin(w * double(l + 1)) / k;
  }
  for (std::size_t l = 0; l < sin_coeffs.size(); ++l) {
    const double k = 2.0 * std::numbers::pi * double(l + 1);
    s += sin_coeffs[l] * (1.0 - std::cos(w * double(l + 1))) / k;
  }
  return s;
}

std::size_t TrigPoly::degree() const { return std::max(cos_coeffs.size(), sin_coeffs.size()); }

double integrate_trigpoly(const TrigPoly& p, double a, double b) {
  return p.primitive(b) - p.primitive(a);
}

double integrate_simpson(const std::function<double(double)>& f, double a, double b,
                         std::size_t nodes) {
  std::size_t panels = std::max<std::size_t>(2, nodes);
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / double(panels);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) s += f(a + h * double(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Dual Dual::variable(double value, std::size_t index, std::size_t count) {
  std::vector<double> p(count, 0.0);
  p.at(index) = 1.0;
  return {value, std::move(p)};
}

Dual Dual::operator-() const {
  Dual r = *this;
  r.value_ = -r.value_;
  for (double& p : r.partials_) p = -p;
  return r;
}

Dual& Dual::operator+=(const Dual& o) {
  value_ += o.value_;
  if (partials_.size() < o.partials_.size()) partials_.resize(o.partials_.size(), 0.0);
  for (std::size_t i = 0; i < o.partials_.size(); ++i) partials_[i] += o.partials_[i];
  return *this;
}

Dual& Dual::operator-=(const Dual& o) {
  value_ -= o.value_;
  if (partials_.size() < o.partials_.size()) partials_.resize(o.partials_.size(), 0.0);
  for (std::size_t i = 0; i < o.partials_.size(); ++i) partials_[i] -= o.partials_[i];
  return *this;
}

Dual& Dual::operator*=(const Dual& o) {
  const std::size_t n = std::max(partials_.size(), o.partials_.size());
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[i] = partial(i) * o.value_ + value_ * o.partial(i);
  value_ *= o.value_;
  partials_ = std::move(p);
  return *this;
}

Dual& Dual::operator/=(const Dual& o) {
  const std::size_t n = std::max(partials_.size(), o.partials_.size());
  const double q = value_ / o.value_;
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[i] = (partial(i) - q * o.partial(i)) / o.value_;
  value_ = q;
  partials_ = std::move(p);
  return *this;
}

Dual& Dual::chain(double f, double df) {
  value_ = f;
  for (double& p : partials_) p *= df;
  return *this;
}

Dual sin(Dual x) { return x.chain(std::sin(x.value_), std::cos(x.value_)); }
Dual cos(Dual x) { return x.chain(std::cos(x.value_), -std::sin(x.value_)); }
Dual exp(Dual x) {
  const double e = std::exp(x.value_);
  return x.chain(e, e);
}
Dual log(Dual x) { return x.chain(std::log(x.value_), 1.0 / x.value_); }
Dual sqrt(Dual x) {
  const double s = std::sqrt(x.value_);
  return x.chain(s, 0.5 / s);
}
Dual abs(Dual x) {
  const double sign = x.value_ > 0 ? 1.0 : (x.value_ < 0 ? -1.0 : 0.0);
  return x.chain(std::abs(x.value_), sign);
}
Dual pow(Dual x, double p) {
  return x.chain(std::pow(x.value_, p), p * std::pow(x.value_, p - 1.0));
}

}  // namespace holo
