#include "holo/jetmodel.hpp"

#include <cmath>
#include <limits>

namespace holo {

void Dims::validate() const {
  if (m < 1) throw InputError("dims: m must be >= 1");
  if (k < 0) throw InputError("dims: k must be >= 0");
  if (n < 1) throw InputError("dims: n must be >= 1");
  if (m > 8 || n > 8 || k > 8) throw InputError("dims: m, n, k above 8 are not supported");
}

namespace {

BoundExpr bind_source(const std::string& src, const std::vector<std::string>& vars,
                      const std::string& what) {
  Expr e;
  try {
    e = Expr::parse(src);
  } catch (const ParseError& err) {
    throw InputError(what + ": " + err.what());
  }
  try {
    return BoundExpr(e, vars);
  } catch (const EvalError& err) {
    throw InputError(what + ": " + err.what());
  }
}

}  // namespace

JetSection::JetSection(Dims dims, const std::vector<std::string>& f,
                       const std::vector<std::vector<std::string>>& phi, double margin)
    : dims_(dims), margin_(margin) {
  dims_.validate();
  if (!(margin > 0.0)) throw InputError("section margin must be positive");
  if (int(f.size()) != dims_.n) {
    throw InputError("section: expected " + std::to_string(dims_.n) + " components of f, got " +
                     std::to_string(f.size()));
  }
  if (int(phi.size()) != dims_.n) throw InputError("section: phi must have n rows");
  const auto vars = jet_variable_names(dims_.m, dims_.k);
  for (int i = 0; i < dims_.n; ++i) {
    f_.push_back(bind_source(f[std::size_t(i)], vars, "f" + std::to_string(i + 1)));
  }
  for (int i = 0; i < dims_.n; ++i) {
    if (int(phi[std::size_t(i)].size()) != dims_.source()) {
      throw InputError("section: phi row " + std::to_string(i + 1) + " must have " +
                       std::to_string(dims_.source()) + " entries");
    }
    for (int c = 0; c < dims_.source(); ++c) {
      phi_.push_back(bind_source(phi[std::size_t(i)][std::size_t(c)], vars,
                                 "phi" + std::to_string(i + 1) + "_" + std::to_string(c + 1)));
    }
  }
}

Vec JetSection::f_value(std::span<const double> point) const { return Vec(f_at<double>(point)); }

Mat JetSection::phi_value(std::span<const double> point) const {
  const auto v = phi_at<double>(point);
  Mat out(std::size_t(dims_.n), std::size_t(dims_.source()));
  for (int i = 0; i < dims_.n; ++i)
    for (int c = 0; c < dims_.source(); ++c) out(std::size_t(i), std::size_t(c)) = v[std::size_t(i * dims_.source() + c)];
  return out;
}

std::vector<std::string> JetSection::f_sources() const {
  std::vector<std::string> out;
  for (const auto& e : f_) out.push_back(e.expr().to_string());
  return out;
}

std::vector<std::vector<std::string>> JetSection::phi_sources() const {
  std::vector<std::vector<std::string>> out(std::size_t(dims_.n));
  for (int i = 0; i < dims_.n; ++i)
    for (int c = 0; c < dims_.source(); ++c) out[std::size_t(i)].push_back(phi(i, c).expr().to_string());
  return out;
}

double HolonomicPair::delta(std::span<const double> x) const { return evaluate(x, 0)[0].value(); }

Vec HolonomicPair::h(std::span<const double> x) const {
  const auto v = evaluate(x, 0);
  Vec out(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) out[std::size_t(i)] = v[std::size_t(i + 1)].value();
  return out;
}

Vec HolonomicPair::grad_delta(std::span<const double> x) const {
  const auto v = evaluate(x, 1);
  Vec out(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) out[std::size_t(i)] = v[0].partial(i);
  return out;
}

Mat HolonomicPair::dh(std::span<const double> x) const {
  const auto v = evaluate(x, 1);
  Mat out(static_cast<std::size_t>(n_), static_cast<std::size_t>(m_));
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < m_; ++c) out(std::size_t(r), std::size_t(c)) = v[std::size_t(r + 1)].partial(c);
  return out;
}

Vec DeformedCube::point(std::span<const double> x) const {
  Vec p(x.size() + 1 + std::size_t(k_), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i];
  p[x.size()] = pair_.delta(x);
  return p;
}

std::vector<Vec> tangent_space(const DeformedCube& cube, std::span<const double> x) {
  const Vec g = cube.pair().grad_delta(x);
  const std::size_t m = x.size();
  std::vector<Vec> basis;
  for (std::size_t i = 0; i < m; ++i) {
    Vec v(m + 1 + std::size_t(cube.k()), 0.0);
    v[i] = 1.0;
    v[m] = g[i];
    basis.push_back(std::move(v));
  }
  return basis;
}

HolonomicPair FormalSolutionState::as_pair() const {
  StateEvaluator eval = eval_;
  return HolonomicPair(dims().m, dims().n, [eval](std::span<const double> x, int order) {
    return eval(x, order).value;
  });
}

FormalSolutionState canonical_formal_solution(std::shared_ptr<const JetSection> section) {
  StateEvaluator eval = [s = section](std::span<const double> x, int order) {
    const Dims& d = s->dims();
    std::vector<Taylor> slots;
    slots.reserve(std::size_t(d.source()));
    for (int i = 0; i < d.m; ++i) slots.push_back(Taylor::variable(x[std::size_t(i)], i, d.m, order));
    for (int i = 0; i <= d.k; ++i) slots.push_back(Taylor::constant(0.0, d.m, order));
    StateJet jet;
    jet.value.push_back(Taylor::constant(0.0, d.m, order));
    for (Taylor& v : s->f_at<Taylor>(slots)) jet.value.push_back(std::move(v));
    const auto phi = s->phi_at<Taylor>(slots);
    jet.formal.assign(std::size_t((1 + d.n) * d.m), Taylor::constant(0.0, d.m, order));
    for (int r = 0; r < d.n; ++r)
      for (int c = 0; c < d.m; ++c)
        jet.formal[std::size_t((r + 1) * d.m + c)] = phi[std::size_t(r * d.source() + c)];
    return jet;
  };
  return FormalSolutionState(std::move(section), std::move(eval));
}

Grid::Grid(Vec lower, Vec upper, std::vector<std::size_t> counts)
    : lower_(std::move(lower)), upper_(std::move(upper)), counts_(std::move(counts)) {
  if (lower_.size() != upper_.size() || lower_.size() != counts_.size())
    throw DimensionError("Grid: bounds and counts disagree");
  strides_.resize(counts_.size());
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    if (counts_[a] == 0) throw DimensionError("Grid: zero points on an axis");
    strides_[a] = size_;
    size_ *= counts_[a];
  }
}

Grid Grid::uniform(int dim, double lo, double hi, double spacing) {
  const auto count = std::size_t(std::ceil((hi - lo) / spacing - 1e-9)) + 1;
  return Grid(Vec(std::size_t(dim), lo), Vec(std::size_t(dim), hi),
              std::vector<std::size_t>(std::size_t(dim), std::max<std::size_t>(count, 2)));
}

double Grid::spacing(int axis) const {
  const auto a = std::size_t(axis);
  return counts_[a] > 1 ? (upper_[a] - lower_[a]) / double(counts_[a] - 1) : 0.0;
}

double Grid::max_spacing() const {
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) s = std::max(s, spacing(a));
  return s;
}

void Grid::point(std::size_t index, std::span<double> out) const {
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    const std::size_t i = (index / strides_[a]) % counts_[a];
    out[a] = counts_[a] > 1 ? lower_[a] + (upper_[a] - lower_[a]) * double(i) / double(counts_[a] - 1)
                            : lower_[a];
  }
}

Vec Grid::point(std::size_t index) const {
  Vec p(counts_.size());
  point(index, std::span<double>(p.data(), p.size()));
  return p;
}

namespace {

// Calls body(i, k) for every grid index i, k being its index along `axis`,
// without divisions.
template <typename Body>
void along_axis(const Grid& grid, int axis, Body&& body) {
  const std::size_t stride = grid.stride(axis), count = grid.counts()[std::size_t(axis)];
  const std::size_t block = stride * count, size = grid.size();
  for (std::size_t o = 0; o < size; o += block)
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t i = o + k * stride, e = i + stride; i < e; ++i) body(i, k);
}

}  // namespace

LipschitzReport lipschitz_certify(const Grid& grid, std::span<const double> values, double safety) {
  if (values.size() != grid.size()) throw DimensionError("lipschitz_certify: one value per grid point expected");
  const int dim = grid.dim();
  const std::size_t size = grid.size();
  const auto& counts = grid.counts();
  LipschitzReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size; ++i) {
    if (values[i] < rep.worst) {
      rep.worst = values[i];
      rep.worst_index = i;
    }
  }
  rep.lipschitz = Vec(static_cast<std::size_t>(dim));

  // Cells are indexed by their lowest corner; degenerate axes (one point)
  // contribute a single layer. Each cell subtracts safety/2 * sum_a L_a s_a
  // from its smallest corner value, where L_a is the largest edge slope
  // along axis a in the 3^dim neighbourhood of the cell. Corner minima and
  // neighbourhood maxima are separable and computed axis by axis.
  std::vector<double> low(values.begin(), values.end());
  for (int b = 0; b < dim; ++b) {
    const std::size_t count = counts[std::size_t(b)], stride = grid.stride(b);
    if (count < 2) continue;
    along_axis(grid, b, [&](std::size_t i, std::size_t k) {
      if (k + 1 < count) low[i] = std::min(low[i], low[i + stride]);
    });
  }
  std::vector<double> budget(size, 0.0), field(size), tmp(size);
  for (int a = 0; a < dim; ++a) {
    const double s = grid.spacing(a);
    if (s <= 0.0) continue;
    // Slope of the edge from i to i + e_a.
    const std::size_t count_a = counts[std::size_t(a)], stride_a = grid.stride(a);
    std::fill(field.begin(), field.end(), 0.0);
    along_axis(grid, a, [&](std::size_t i, std::size_t k) {
      if (k + 1 < count_a) field[i] = std::abs(values[i + stride_a] - values[i]) / s;
    });
    for (double v : field) rep.lipschitz[std::size_t(a)] = std::max(rep.lipschitz[std::size_t(a)], v);
    for (int b = 0; b < dim; ++b) {
      const std::size_t count = counts[std::size_t(b)], stride = grid.stride(b);
      if (count < 2) continue;
      tmp = field;
      along_axis(grid, b, [&](std::size_t i, std::size_t k) {
        double v = tmp[i];
        if (k > 0) v = std::max(v, tmp[i - stride]);
        if (k + 1 < count) v = std::max(v, tmp[i + stride]);
        field[i] = v;
      });
    }
    for (std::size_t i = 0; i < size; ++i) budget[i] += 0.5 * safety * field[i] * s;
  }
  // A point is a cell origin unless it is last on some non-degenerate axis.
  std::vector<char> origin(size, 1);
  for (int b = 0; b < dim; ++b) {
    const std::size_t count = counts[std::size_t(b)];
    if (count < 2) continue;
    along_axis(grid, b, [&](std::size_t i, std::size_t k) {
      if (k + 1 == count) origin[i] = 0;
    });
  }
  rep.certified = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size; ++i)
    if (origin[i]) rep.certified = std::min(rep.certified, low[i] - budget[i]);
  if (!std::isfinite(rep.certified)) rep.certified = rep.worst;
  rep.passed = rep.certified > 0.0;
  return rep;
}

}  // namespace holo
