#pragma once

// Geometric data model: the cube A = [0,1]^m x {0} x {0} in R^m x R x R^k,
// sections of the 1-jet bundle over a neighborhood of A, pairs (delta, h),
// deformed cubes A_delta, formal solutions and sampling grids.

#include "holo/expr.hpp"
#include "holo/numcore.hpp"
#include "holo/taylor.hpp"

#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace holo {

/// Raised for malformed user input (expressions, dimensions, configuration).
class InputError : public Error {
 public:
  using Error::Error;
};

struct Dims {
  int m = 1;  ///< cube dimension
  int k = 0;  ///< extra normal dimensions
  int n = 1;  ///< target dimension

  int source() const { return m + 1 + k; }
  void validate() const;
  bool operator==(const Dims&) const = default;
};

/// sigma = (f, phi): f has n components, phi is n x (m+1+k), all expressions
/// in x1..xm, y, z1..zk.
class JetSection {
 public:
  JetSection(Dims dims, const std::vector<std::string>& f,
             const std::vector<std::vector<std::string>>& phi, double margin = 0.1);

  const Dims& dims() const { return dims_; }
  double margin() const { return margin_; }
  const BoundExpr& f(int i) const { return f_[std::size_t(i)]; }
  const BoundExpr& phi(int i, int c) const { return phi_[std::size_t(i * dims_.source() + c)]; }

  /// f at the point given as slots (x..., y, z...).
  template <typename T>
  std::vector<T> f_at(std::span<const T> point) const {
    std::vector<T> out;
    out.reserve(f_.size());
    for (const BoundExpr& e : f_) out.push_back(e.eval<T>(point));
    return out;
  }
  /// phi at the point, row-major n x (m+1+k).
  template <typename T>
  std::vector<T> phi_at(std::span<const T> point) const {
    std::vector<T> out;
    out.reserve(phi_.size());
    for (const BoundExpr& e : phi_) out.push_back(e.eval<T>(point));
    return out;
  }
  double f_component(int i, std::span<const double> point) const { return f_[std::size_t(i)].eval<double>(point); }
  Vec f_value(std::span<const double> point) const;
  Mat phi_value(std::span<const double> point) const;

  /// Source text of the inputs, for reports.
  std::vector<std::string> f_sources() const;
  std::vector<std::vector<std::string>> phi_sources() const;

 private:
  Dims dims_;
  double margin_;
  std::vector<BoundExpr> f_;
  std::vector<BoundExpr> phi_;
};

/// (delta, h1..hn) evaluated at x as Taylor expansions of the given order in
/// the m variables x1..xm.
using PairEvaluator = std::function<std::vector<Taylor>(std::span<const double> x, int order)>;

/// The pair (delta, h) of maps R^m -> R and R^m -> R^n with analytic
/// derivatives of every order the evaluator supports.
class HolonomicPair {
 public:
  HolonomicPair() = default;
  HolonomicPair(int m, int n, PairEvaluator eval) : m_(m), n_(n), eval_(std::move(eval)) {}

  int m() const { return m_; }
  int n() const { return n_; }
  std::vector<Taylor> evaluate(std::span<const double> x, int order) const { return eval_(x, order); }

  double delta(std::span<const double> x) const;
  Vec h(std::span<const double> x) const;
  Vec grad_delta(std::span<const double> x) const;
  /// n x m Jacobian of h.
  Mat dh(std::span<const double> x) const;

 private:
  int m_ = 0;
  int n_ = 0;
  PairEvaluator eval_;
};

/// The graph A_delta = {(x, delta(x), 0)}.
class DeformedCube {
 public:
  DeformedCube(HolonomicPair pair, int k) : pair_(std::move(pair)), k_(k) {}
  Vec point(std::span<const double> x) const;
  const HolonomicPair& pair() const { return pair_; }
  int k() const { return k_; }

 private:
  HolonomicPair pair_;
  int k_;
};

/// Basis (e_i, d_i delta(x), 0) of the tangent space of A_delta at x.
std::vector<Vec> tangent_space(const DeformedCube& cube, std::span<const double> x);

/// Zeroth-order value and formal first derivative of a formal solution of
/// the relation on J^1(R^m, R x R^n), expanded at one point.
struct StateJet {
  std::vector<Taylor> value;   ///< 1+n entries: (delta part, h part)
  std::vector<Taylor> formal;  ///< (1+n) x m, row-major
  const Taylor& formal_at(int row, int col, int m) const { return formal[std::size_t(row * m + col)]; }
};

using StateEvaluator = std::function<StateJet(std::span<const double> x, int order)>;

/// A formal solution together with the directions already made holonomic.
class FormalSolutionState {
 public:
  FormalSolutionState(std::shared_ptr<const JetSection> section, StateEvaluator eval,
                      std::set<int> holonomic = {})
      : section_(std::move(section)), eval_(std::move(eval)), holonomic_(std::move(holonomic)) {}

  const JetSection& section() const { return *section_; }
  std::shared_ptr<const JetSection> section_ptr() const { return section_; }
  const Dims& dims() const { return section_->dims(); }
  const std::set<int>& holonomic_directions() const { return holonomic_; }
  StateJet evaluate(std::span<const double> x, int order) const { return eval_(x, order); }
  const StateEvaluator& evaluator() const { return eval_; }

  /// Zeroth-order part as a pair (delta, h).
  HolonomicPair as_pair() const;

 private:
  std::shared_ptr<const JetSection> section_;
  StateEvaluator eval_;
  std::set<int> holonomic_;
};

/// x -> ((0, f(x,0,0)), (0, phi(x,0,0) restricted to R^m)).
FormalSolutionState canonical_formal_solution(std::shared_ptr<const JetSection> section);

/// Tensor grid on a box, counts[i] >= 1 points per axis (endpoints included).
class Grid {
 public:
  Grid(Vec lower, Vec upper, std::vector<std::size_t> counts);
  /// Axis-aligned grid with the same spacing bound h on [lo, hi]^dim.
  static Grid uniform(int dim, double lo, double hi, double spacing);

  int dim() const { return int(counts_.size()); }
  std::size_t size() const { return size_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  double spacing(int axis) const;
  double max_spacing() const;
  /// Coordinates of point `index` (axis 0 varies fastest).
  void point(std::size_t index, std::span<double> out) const;
  Vec point(std::size_t index) const;
  std::size_t stride(int axis) const { return strides_[std::size_t(axis)]; }
  std::size_t axis_index(std::size_t index, int axis) const {
    return (index / strides_[std::size_t(axis)]) % counts_[std::size_t(axis)];
  }

 private:
  Vec lower_, upper_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

struct LipschitzReport {
  double worst = 0.0;       ///< smallest sampled value
  std::size_t worst_index = 0;
  double certified = 0.0;   ///< min over cells of (min corner value - sum_i L_i s_i)
  Vec lipschitz;            ///< global per-axis finite-difference slopes
  bool passed = false;      ///< certified > 0
};

/// Certifies that `values` (sampled on `grid`) stays positive on the whole
/// box. Each cell uses per-axis slopes estimated from finite differences on
/// its edges and on the edges of its neighbours; the bound subtracts
/// safety/2 * sum_i L_i s_i from the smallest corner value.
LipschitzReport lipschitz_certify(const Grid& grid, std::span<const double> values, double safety = 2.0);

}  // namespace holo
