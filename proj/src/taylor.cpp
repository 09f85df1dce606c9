#include "holo/taylor.hpp"

#include "holo/numcore.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <array>
#include <atomic>
#include <mutex>

namespace holo {

struct TaylorTable {
  struct Product {
    std::uint16_t a, b, out;
  };

  int nvars = 0;
  int order = 0;
  std::size_t count = 0;
  std::vector<int> exps;    // count x nvars, graded by total degree
  std::vector<int> degree;  // per monomial
  std::vector<double> factorial_weight;  // alpha!
  std::vector<int> shift;   // nvars x count: index of alpha + e_v, or -1
  std::vector<Product> products;
  std::map<std::vector<int>, int> index;
  const TaylorTable* lower = nullptr;  // same nvars, order - 1

  int exponent(std::size_t mono, int var) const { return exps[mono * nvars + var]; }
};

namespace {

std::mutex table_mutex;
std::map<std::pair<int, int>, std::unique_ptr<TaylorTable>> table_cache;

void enumerate_degree(int nvars, int degree, std::vector<int>& current, int var,
                      std::vector<std::vector<int>>& out) {
  if (var == nvars - 1) {
    current[var] = degree;
    out.push_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    enumerate_degree(nvars, degree - e, current, var + 1, out);
  }
}

const TaylorTable* table_locked(int nvars, int order) {
  auto key = std::make_pair(nvars, order);
  auto it = table_cache.find(key);
  if (it != table_cache.end()) return it->second.get();

  auto t = std::make_unique<TaylorTable>();
  t->nvars = nvars;
  t->order = order;
  t->lower = order > 0 ? table_locked(nvars, order - 1) : nullptr;

  std::vector<std::vector<int>> monos;
  monos.push_back(std::vector<int>(nvars, 0));
  for (int d = 1; d <= order && nvars > 0; ++d) {
    std::vector<int> cur(nvars, 0);
    enumerate_degree(nvars, d, cur, 0, monos);
  }
  t->count = monos.size();
  if (t->count > 65535) throw Error("Taylor: expansion too large");
  for (std::size_t i = 0; i < monos.size(); ++i) {
    int deg = 0;
    double w = 1.0;
    for (int v = 0; v < nvars; ++v) {
      t->exps.push_back(monos[i][v]);
      deg += monos[i][v];
      for (int k = 2; k <= monos[i][v]; ++k) w *= k;
    }
    t->degree.push_back(deg);
    t->factorial_weight.push_back(w);
    t->index.emplace(monos[i], int(i));
  }
  t->shift.assign(std::size_t(nvars) * t->count, -1);
  for (int v = 0; v < nvars; ++v) {
    for (std::size_t i = 0; i < t->count; ++i) {
      std::vector<int> up = monos[i];
      ++up[v];
      auto f = t->index.find(up);
      if (f != t->index.end()) t->shift[std::size_t(v) * t->count + i] = f->second;
    }
  }
  for (std::size_t i = 0; i < t->count; ++i) {
    for (std::size_t j = 0; j < t->count; ++j) {
      if (t->degree[i] + t->degree[j] > order) continue;
      std::vector<int> sum(nvars);
      for (int v = 0; v < nvars; ++v) sum[v] = monos[i][v] + monos[j][v];
      t->products.push_back({std::uint16_t(i), std::uint16_t(j),
                             std::uint16_t(t->index.at(sum))});
    }
  }
  const TaylorTable* raw = t.get();
  table_cache.emplace(key, std::move(t));
  return raw;
}

constexpr int kFastVars = 10, kFastOrder = 16;
std::array<std::atomic<const TaylorTable*>, kFastVars * kFastOrder> fast_tables{};

const TaylorTable* get_table(int nvars, int order) {
  if (nvars < 0 || order < 0) throw Error("Taylor: negative shape");
  const bool fast = nvars < kFastVars && order < kFastOrder;
  if (fast) {
    if (const TaylorTable* t = fast_tables[std::size_t(nvars * kFastOrder + order)].load(std::memory_order_acquire))
      return t;
  }
  std::lock_guard<std::mutex> lock(table_mutex);
  const TaylorTable* t = table_locked(nvars, order);
  if (fast) fast_tables[std::size_t(nvars * kFastOrder + order)].store(t, std::memory_order_release);
  return t;
}

}  // namespace

std::size_t taylor_size(int nvars, int order) { return get_table(nvars, order)->count; }

Taylor::Taylor(double value) { coeffs_.push_back(value); }

Taylor Taylor::constant(double value, int nvars, int order) {
  const TaylorTable* t = get_table(nvars, order);
  Coeffs c(t->count, 0.0);
  c[0] = value;
  return Taylor(t, std::move(c));
}

Taylor Taylor::variable(double value, int index, int nvars, int order) {
  if (index < 0 || index >= nvars) throw DimensionError("Taylor::variable: index out of range");
  Taylor r = constant(value, nvars, order);
  if (order >= 1) r.coeffs_[std::size_t(1 + index)] = 1.0;
  return r;
}

int Taylor::nvars() const { return table_ ? table_->nvars : 0; }
int Taylor::order() const { return table_ ? table_->order : 0; }

double Taylor::partial(int i) const {
  if (!table_ || table_->order < 1 || i < 0 || i >= table_->nvars) return 0.0;
  return coeffs_[std::size_t(1 + i)];
}

double Taylor::coefficient(std::span<const int> alpha) const {
  int deg = 0;
  for (int a : alpha) deg += a;
  if (!table_) return deg == 0 ? coeffs_[0] : 0.0;
  if (int(alpha.size()) != table_->nvars) throw DimensionError("Taylor::coefficient: bad multi-index");
  if (deg > table_->order) throw Error("Taylor::coefficient: degree exceeds order");
  return coeffs_[std::size_t(table_->index.at(std::vector<int>(alpha.begin(), alpha.end())))];
}

double Taylor::derivative_value(std::span<const int> alpha) const {
  double w = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) w *= k;
  return coefficient(alpha) * w;
}

Taylor Taylor::derivative(int i) const {
  if (!table_) return Taylor(0.0);
  if (table_->order == 0) throw Error("Taylor::derivative: order 0 has no derivative");
  if (i < 0 || i >= table_->nvars) throw DimensionError("Taylor::derivative: index out of range");
  const TaylorTable* lo = table_->lower;
  Coeffs c(lo->count, 0.0);
  const int* shift = &table_->shift[std::size_t(i) * table_->count];
  for (std::size_t q = 0; q < lo->count; ++q) {
    c[q] = double(table_->exponent(q, i) + 1) * coeffs_[std::size_t(shift[q])];
  }
  return Taylor(lo, std::move(c));
}

Taylor Taylor::truncated(int order) const {
  if (!table_ || order >= table_->order) return *this;
  return reshaped(get_table(table_->nvars, order));
}

Taylor Taylor::reshaped(const TaylorTable* table) const {
  if (table == table_) return *this;
  Coeffs c(table->count, 0.0);
  if (!table_) {
    c[0] = coeffs_[0];
  } else {
    // Lower orders are a prefix of the graded enumeration.
    for (std::size_t q = 0; q < table->count; ++q) c[q] = coeffs_[q];
  }
  return Taylor(table, std::move(c));
}

Taylor Taylor::embedded(int nvars, std::span<const int> var_map) const {
  if (!table_) return *this;
  if (int(var_map.size()) != table_->nvars) throw DimensionError("Taylor::embedded: bad map");
  const TaylorTable* t = get_table(nvars, table_->order);
  Coeffs c(t->count, 0.0);
  std::vector<int> alpha(nvars);
  for (std::size_t q = 0; q < table_->count; ++q) {
    std::fill(alpha.begin(), alpha.end(), 0);
    for (int v = 0; v < table_->nvars; ++v) alpha[var_map[v]] += table_->exponent(q, v);
    c[std::size_t(t->index.at(alpha))] += coeffs_[q];
  }
  return Taylor(t, std::move(c));
}

const TaylorTable* Taylor::common_table(const Taylor& a, const Taylor& b) {
  if (!a.table_) return b.table_;
  if (!b.table_) return a.table_;
  if (a.table_ == b.table_) return a.table_;
  if (a.table_->nvars != b.table_->nvars) throw DimensionError("Taylor: variable count mismatch");
  return a.table_->order < b.table_->order ? a.table_ : b.table_;
}

Taylor Taylor::operator-() const {
  Taylor r = *this;
  for (double& c : r.coeffs_) c = -c;
  return r;
}

Taylor& Taylor::operator+=(const Taylor& o) {
  const TaylorTable* t = common_table(*this, o);
  if (t != table_) *this = reshaped(t);
  if (!o.table_) {
    coeffs_[0] += o.coeffs_[0];
  } else {
    for (std::size_t q = 0; q < coeffs_.size(); ++q) coeffs_[q] += o.coeffs_[q];
  }
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& o) {
  const TaylorTable* t = common_table(*this, o);
  if (t != table_) *this = reshaped(t);
  if (!o.table_) {
    coeffs_[0] -= o.coeffs_[0];
  } else {
    for (std::size_t q = 0; q < coeffs_.size(); ++q) coeffs_[q] -= o.coeffs_[q];
  }
  return *this;
}

Taylor& Taylor::operator*=(double c) {
  for (double& v : coeffs_) v *= c;
  return *this;
}

Taylor operator*(const Taylor& a, const Taylor& b) {
  if (!a.table_) return b * a.coeffs_[0];
  if (!b.table_) return a * b.coeffs_[0];
  const TaylorTable* t = Taylor::common_table(a, b);
  Taylor::Coeffs c(t->count, 0.0);
  for (const auto& p : t->products) c[p.out] += a.coeffs_[p.a] * b.coeffs_[p.b];
  return Taylor(t, std::move(c));
}

Taylor& Taylor::operator*=(const Taylor& o) { return *this = *this * o; }

Taylor Taylor::compose(std::span<const double> d) const {
  if (!table_ || table_->order == 0) return Taylor(table_, Coeffs(coeffs_.size(), 0.0)) += d[0];
  const int r = table_->order;
  if (int(d.size()) < r + 1) throw Error("Taylor::compose: not enough derivatives");
  Taylor tail = *this;
  tail.coeffs_[0] = 0.0;
  Taylor acc = Taylor::constant(d[std::size_t(r)], table_->nvars, r);
  for (int k = r - 1; k >= 0; --k) {
    acc = acc * tail;
    acc.coeffs_[0] += d[std::size_t(k)];
  }
  return acc;
}

Taylor operator/(const Taylor& a, const Taylor& b) {
  if (!b.table_) return a * (1.0 / b.coeffs_[0]);
  const int r = b.order();
  std::vector<double> d(std::size_t(r) + 1);
  const double inv = 1.0 / b.value();
  double p = inv;
  for (int k = 0; k <= r; ++k) {
    d[std::size_t(k)] = (k % 2 ? -p : p);
    p *= inv;
  }
  return a * b.compose(d);
}

Taylor& Taylor::operator/=(const Taylor& o) { return *this = *this / o; }

Taylor sin(const Taylor& x) {
  if (x.shapeless()) return Taylor(std::sin(x.value()));
  const int r = x.order();
  const double s = std::sin(x.value()), c = std::cos(x.value());
  std::vector<double> d(std::size_t(r) + 1);
  const double cyc[4] = {s, c, -s, -c};
  double fact = 1.0;
  for (int k = 0; k <= r; ++k) {
    if (k > 1) fact *= k;
    d[std::size_t(k)] = cyc[k % 4] / fact;
  }
  return x.compose(d);
}

Taylor cos(const Taylor& x) {
  if (x.shapeless()) return Taylor(std::cos(x.value()));
  const int r = x.order();
  const double s = std::sin(x.value()), c = std::cos(x.value());
  std::vector<double> d(std::size_t(r) + 1);
  const double cyc[4] = {c, -s, -c, s};
  double fact = 1.0;
  for (int k = 0; k <= r; ++k) {
    if (k > 1) fact *= k;
    d[std::size_t(k)] = cyc[k % 4] / fact;
  }
  return x.compose(d);
}

Taylor exp(const Taylor& x) {
  if (x.shapeless()) return Taylor(std::exp(x.value()));
  const int r = x.order();
  const double e = std::exp(x.value());
  std::vector<double> d(std::size_t(r) + 1);
  double fact = 1.0;
  for (int k = 0; k <= r; ++k) {
    if (k > 1) fact *= k;
    d[std::size_t(k)] = e / fact;
  }
  return x.compose(d);
}

Taylor log(const Taylor& x) {
  if (x.shapeless()) return Taylor(std::log(x.value()));
  const int r = x.order();
  const double v = x.value();
  std::vector<double> d(std::size_t(r) + 1);
  d[0] = std::log(v);
  double p = 1.0;
  for (int k = 1; k <= r; ++k) {
    p /= v;
    d[std::size_t(k)] = (k % 2 ? 1.0 : -1.0) * p / k;
  }
  return x.compose(d);
}

Taylor pow(const Taylor& x, double p) {
  if (x.shapeless()) return Taylor(std::pow(x.value(), p));
  if (p >= 0 && p == std::floor(p) && p <= 64) return ipow(x, int(p));
  const int r = x.order();
  const double v = x.value();
  std::vector<double> d(std::size_t(r) + 1);
  double binom = 1.0;
  for (int k = 0; k <= r; ++k) {
    d[std::size_t(k)] = binom * std::pow(v, p - k);
    binom *= (p - k) / (k + 1);
  }
  return x.compose(d);
}

Taylor sqrt(const Taylor& x) { return pow(x, 0.5); }

Taylor ipow(const Taylor& x, int p) {
  if (p < 0) return Taylor(1.0) / ipow(x, -p);
  Taylor result(1.0);
  Taylor base = x;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p) base = base * base;
  }
  return result;
}

Taylor abs(const Taylor& x) { return x.value() < 0 ? -x : x; }

}  // namespace holo
