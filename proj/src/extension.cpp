#include "holo/extension.hpp"

#include <algorithm>
#include <cmath>

namespace holo {

std::vector<Taylor> Extension::field(std::span<const double> x, int order) const {
  return field_from(pair_.evaluate(x, order + 1), x, order);
}

std::vector<Taylor> Extension::field_from(const std::vector<Taylor>& p, std::span<const double> x, int order) const {
  const Dims& d = sigma_->dims();
  const int m = d.m, src = d.source();
  std::vector<Taylor> grad;
  Taylor denom = Taylor::constant(1.0, m, order);
  for (int i = 0; i < m; ++i) {
    grad.push_back(p[0].derivative(i).truncated(order));
    denom += grad.back() * grad.back();
  }
  std::vector<Taylor> slots;
  for (int i = 0; i < m; ++i) slots.push_back(Taylor::variable(x[std::size_t(i)], i, m, order));
  slots.push_back(p[0].truncated(order));
  for (int i = 0; i < d.k; ++i) slots.push_back(Taylor::constant(0.0, m, order));
  const auto phi = sigma_->phi_at<Taylor>(slots);

  std::vector<Taylor> g;
  for (int r = 0; r < d.n; ++r) {
    Taylor num = phi[std::size_t(r * src + m)];  // -phi(-d_y)
    for (int i = 0; i < m; ++i)
      num += (p[std::size_t(r + 1)].derivative(i).truncated(order) - phi[std::size_t(r * src + i)]) * grad[std::size_t(i)];
    g.push_back(num / denom);
  }
  return g;
}

FiberData Extension::fiber(std::span<const double> x) const {
  const Dims& d = sigma_->dims();
  const int m = d.m;
  if (int(x.size()) != m) throw DimensionError("Extension::fiber: x must have m coordinates");
  const std::vector<Taylor> p = pair_.evaluate(x, 2);
  const std::vector<Taylor> g = field_from(p, x, 1);
  FiberData f;
  f.x = Vec(std::vector<double>(x.begin(), x.end()));
  f.delta = p[0].value();
  f.grad_delta = Vec(static_cast<std::size_t>(m));
  f.h = Vec(static_cast<std::size_t>(d.n));
  f.g = Vec(static_cast<std::size_t>(d.n));
  f.dh = Mat(std::size_t(d.n), std::size_t(m));
  f.dg = Mat(std::size_t(d.n), std::size_t(m));
  for (int i = 0; i < m; ++i) f.grad_delta[std::size_t(i)] = p[0].partial(i);
  for (int r = 0; r < d.n; ++r) {
    f.h[std::size_t(r)] = p[std::size_t(r + 1)].value();
    f.g[std::size_t(r)] = g[std::size_t(r)].value();
    for (int i = 0; i < m; ++i) {
      f.dh(std::size_t(r), std::size_t(i)) = p[std::size_t(r + 1)].partial(i);
      f.dg(std::size_t(r), std::size_t(i)) = g[std::size_t(r)].partial(i);
    }
  }
  return f;
}

ExtensionJet Extension::jet(const FiberData& f, std::span<const double> point) const {
  const Dims& d = sigma_->dims();
  const int m = d.m, src = d.source();
  if (int(point.size()) != src) throw DimensionError("Extension: point must have m+1+k coordinates");
  const double t = point[std::size_t(m)] - f.delta;
  ExtensionJet j;
  j.value = Vec(static_cast<std::size_t>(d.n));
  j.differential = Mat(std::size_t(d.n), std::size_t(src));
  std::vector<Taylor> slots;
  if (d.k > 0)
    for (int i = 0; i < src; ++i) slots.push_back(Taylor::variable(point[std::size_t(i)], i, src, 1));
  for (int r = 0; r < d.n; ++r) {
    const auto R = std::size_t(r);
    j.value[R] = f.h[R] + t * f.g[R];
    for (int i = 0; i < m; ++i) {
      const auto I = std::size_t(i);
      j.differential(R, I) = f.dh(R, I) + t * f.dg(R, I) - f.g[R] * f.grad_delta[I];
    }
    j.differential(R, std::size_t(m)) = f.g[R];
    for (int c = m + 1; c < src; ++c) {
      Taylor term = sigma_->phi(r, c).eval<Taylor>(std::span<const Taylor>(slots)) * slots[std::size_t(c)];
      j.value[R] += term.value();
      if (term.shapeless()) continue;
      for (int q = 0; q < src; ++q) j.differential(R, std::size_t(q)) += term.partial(q);
    }
  }
  return j;
}

std::vector<Taylor> Extension::expand(std::span<const double> point, int order) const {
  const Dims& d = sigma_->dims();
  const int m = d.m, src = d.source();
  if (int(point.size()) != src) throw DimensionError("Extension: point must have m+1+k coordinates");
  const std::span<const double> x = point.first(std::size_t(m));
  std::vector<int> map(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) map[std::size_t(i)] = i;

  const std::vector<Taylor> full = pair_.evaluate(x, order + 1);
  const std::vector<Taylor> g = field_from(full, x, order);
  std::vector<Taylor> p;
  for (const Taylor& t : full) p.push_back(t.truncated(order));
  std::vector<Taylor> slots;
  for (int i = 0; i < src; ++i) slots.push_back(Taylor::variable(point[std::size_t(i)], i, src, order));
  const auto phi = sigma_->phi_at<Taylor>(slots);
  const Taylor dy = slots[std::size_t(m)] - p[0].embedded(src, map);

  std::vector<Taylor> out;
  for (int r = 0; r < d.n; ++r) {
    Taylor v = p[std::size_t(r + 1)].embedded(src, map) + dy * g[std::size_t(r)].embedded(src, map);
    for (int c = m + 1; c < src; ++c) v += phi[std::size_t(r * src + c)] * slots[std::size_t(c)];
    out.push_back(std::move(v));
  }
  return out;
}

Vec Extension::value(std::span<const double> point) const {
  const auto e = expand(point, 0);
  Vec out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i].value();
  return out;
}

ExtensionJet Extension::jet(std::span<const double> point) const {
  const auto e = expand(point, 1);
  const int src = sigma_->dims().source();
  ExtensionJet j;
  j.value = Vec(e.size());
  j.differential = Mat(e.size(), std::size_t(src));
  for (std::size_t r = 0; r < e.size(); ++r) {
    j.value[r] = e[r].value();
    for (int c = 0; c < src; ++c) j.differential(r, std::size_t(c)) = e[r].partial(c);
  }
  return j;
}

Extension extend(std::shared_ptr<const JetSection> sigma, HolonomicPair pair) {
  if (pair.m() != sigma->dims().m || pair.n() != sigma->dims().n)
    throw DimensionError("extend: pair dimensions do not match the section");
  return Extension(std::move(sigma), std::move(pair));
}

Vec extension_field(const JetSection& sigma, const HolonomicPair& pair, std::span<const double> x) {
  // The section is only read, never owned.
  const std::shared_ptr<const JetSection> view(&sigma, [](const JetSection*) {});
  const auto g = Extension(view, pair).field(x, 0);
  Vec out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i].value();
  return out;
}

JetDistance jet_distance_on_fiber(const JetSection& sigma, const ExtensionJet& jet, std::span<const double> point) {
  const Vec f = sigma.f_value(point);
  const Mat phi = sigma.phi_value(point);
  JetDistance d;
  d.value = sup_norm(jet.value - f);
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < phi.cols(); ++c) {
      const double e = jet.differential(r, c) - phi(r, c);
      s += e * e;
    }
    d.derivative = std::max(d.derivative, std::sqrt(s));
  }
  return d;
}

JetDistance jet_distance_on_fiber(const Extension& ext, std::span<const double> point) {
  return jet_distance_on_fiber(ext.section(), ext.jet(point), point);
}

HolonomicPair expression_pair(int m, const std::string& delta, const std::vector<std::string>& h) {
  std::vector<std::string> vars;
  for (int i = 1; i <= m; ++i) vars.push_back("x" + std::to_string(i));
  auto bind = [&](const std::string& src, const std::string& what) {
    try {
      return BoundExpr(Expr::parse(src), vars);
    } catch (const Error& e) {
      throw InputError(what + ": " + e.what());
    }
  };
  auto exprs = std::make_shared<std::vector<BoundExpr>>();
  exprs->push_back(bind(delta, "delta"));
  for (std::size_t i = 0; i < h.size(); ++i) exprs->push_back(bind(h[i], "h" + std::to_string(i + 1)));
  return HolonomicPair(m, int(h.size()), [exprs, m](std::span<const double> x, int order) {
    std::vector<Taylor> slots;
    for (int i = 0; i < m; ++i) slots.push_back(Taylor::variable(x[std::size_t(i)], i, m, order));
    std::vector<Taylor> out;
    for (const BoundExpr& e : *exprs) {
      Taylor v = e.eval<Taylor>(slots);
      if (v.shapeless()) v = Taylor::constant(v.value(), m, order);
      out.push_back(std::move(v));
    }
    return out;
  });
}

}  // namespace holo
