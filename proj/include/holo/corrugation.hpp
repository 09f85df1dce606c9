#pragma once

// Loops with prescribed base point and average inside a slice, the
// one-dimensional corrugation step and the iterated solver.

#include "holo/jetmodel.hpp"
#include "holo/numcore.hpp"
#include "holo/relation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace holo {

/// Loop synthesis failed; the message names the violated condition.
class LoopError : public Error {
 public:
  using Error::Error;
};

/// The solver could not produce a verified pair.
class SolveError : public Error {
 public:
  using Error::Error;
};

/// Period-1 loop in slice coordinates (a, b_1..b_n), one trig polynomial per
/// component.
struct Loop {
  std::vector<TrigPoly> components;

  Vec operator()(double t) const;
  Vec base() const { return (*this)(0.0); }
  /// Exact mean over one period.
  Vec average() const;
};

/// t -> (4 sin(2 pi t)/eps, 2 sin^2(2 pi t)).
Loop mountain_loop(double eps);

/// Worst-case data entering the two sufficient conditions of the loop ansatz.
struct LoopBounds {
  double B = 0.0;       ///< max |beta'_b|_sup
  double c = 0.0;       ///< max |beta_a| + 2 |Delta a|
  double Db = 0.0;      ///< max |Delta b|_sup
  double kappa = 0.0;   ///< min kappa
  double eta = 0.0;     ///< min eta
};

struct LoopShape {
  double S = 0.0;   ///< sine amplitude of the a-component
  double s0 = 0.0;  ///< duty threshold on |sin 2 pi t|
  double S_required = 0.0;
};

struct LoopOptions {
  double safety = 2.0;
  double S_cap = 1e6;
  int samples = 10000;  ///< containment samples in t
};

/// Picks (S, s0) satisfying
///   (i)   B + 2 Db s0^2 < eta
///   (ii)  S > (B + 2 Db s^2 + kappa c) / (kappa s) for s in {s0, 1}.
LoopShape choose_loop_shape(const LoopBounds& bounds, const LoopOptions& options);

/// The ansatz a(t) = beta_a + Da (1 - cos 2 pi t) + S sin 2 pi t,
/// b'(t) = beta'_b + Db 2 sin^2(2 pi t), b = b' + a m0.
Loop make_loop(const Vec& m0, double base_a, const Vec& base_b, double avg_a, const Vec& avg_b, double S);

struct SynthesizedLoop {
  Loop loop;
  LoopShape shape;
  LoopBounds bounds;
};

/// Loop in the slice described by `geometry` based at `base` with mean
/// `average`, both given as (a, b_1..b_n). Containment is checked at
/// `options.samples` values of t.
SynthesizedLoop synthesize_loop(const SliceGeometry& geometry, const Vec& base, const Vec& average,
                                const LoopOptions& options = {});

enum class LoopMode { Synthesized, Mountain };

/// One loop per x for direction j, as a function of the state. The shape
/// constants are global; the x-dependence enters through the base point,
/// the average and the slice data.
struct LoopFamily {
  int direction = 0;
  double eps = 1.0;
  LoopShape shape;
  LoopBounds bounds;
  LoopMode mode = LoopMode::Synthesized;
  double amplitude = 0.0;  ///< max over the grid of sup_t |gamma - gbar|_sup
  StateEvaluator source;   ///< state the family was built from

  /// Loop at x in slice coordinates of that state.
  Loop at_slice(const JetSection& sigma, std::span<const double> x) const;
  /// Loop at x in jet coordinates (column j of (Y, W)), as trig polynomials.
  Loop at_jet(const JetSection& sigma, std::span<const double> x) const;
};

struct FamilyOptions {
  LoopMode mode = LoopMode::Synthesized;
  LoopOptions loop;
  int containment_samples = 64;  ///< t samples per grid point
};

/// Sweeps `grid`, collects LoopBounds, chooses the shape and checks loop
/// containment at every grid point.
LoopFamily build_loop_family(const FormalSolutionState& state, double eps, int j, const Grid& grid,
                             const FamilyOptions& options = {});

/// F_new(x) = F(x) + (1/N) int_0^{N x_j} (gamma_x(s) - gbar(x)) ds with column j
/// of the formal derivative replaced by gamma_x(N x_j).
FormalSolutionState corrugate(const FormalSolutionState& state, const LoopFamily& family, int N);

/// Jet used for verification: actual partials in holonomic directions (and
/// `extra`, if set), formal columns elsewhere.
JetPoint mixed_jet(const FormalSolutionState& state, std::span<const double> x, int extra = -1);

struct MarginSweep {
  double worst = 0.0;
  Vec worst_x;
  Clause worst_clause = Clause::Height;
  double certified = 0.0;  ///< cellwise Lipschitz lower bound of the margin
  Vec lipschitz;           ///< global per-axis slope estimates
  Vec spacing;             ///< grid spacing per axis
  bool passed = false;
};

/// R_ha margins of the mixed jet over the grid with Lipschitz inflation.
MarginSweep sweep_margins(const FormalSolutionState& state, double eps, const Grid& grid);

/// max over the grid of |d_j F - gamma_x(N x_j)| (the part of the new
/// formal column that is not yet holonomic).
double formal_residual(const FormalSolutionState& corrugated, int j, const Grid& grid);

struct SolveOptions {
  LoopMode mode = LoopMode::Synthesized;
  LoopOptions loop;
  int N_cap = 1 << 16;
  double frequency_ratio = 4.0;
  std::vector<int> fixed_N;     ///< per direction; empty means search
  bool minimize = true;         ///< bisect down after doubling
  double spacing = 0.0;         ///< base grid spacing; 0 picks 2^-(9 - 3(m - 1))
  int samples_per_period = 24;
  int refinements = 6;          ///< axis halvings allowed for the Lipschitz rule
  std::size_t max_grid_points = 2'000'000;
  int containment_samples = 64;
};

struct Attempt {
  int N = 0;
  double margin = 0.0;
  double certified = 0.0;
  bool passed = false;
};

struct DirectionReport {
  int direction = 0;
  int N = 0;
  LoopShape shape;
  LoopBounds bounds;
  MarginSweep margins;
  std::vector<std::size_t> grid_counts;
  std::vector<Attempt> attempts;
  double c0_bound = 0.0;        ///< (2/N) max |gamma - gbar|
  double displacement = 0.0;    ///< measured max |F_new - F|
  double formal_residual = 0.0;
  LoopFamily family;            ///< loops used for this direction
};

struct SolveResult {
  FormalSolutionState state;
  HolonomicPair pair;
  std::vector<DirectionReport> directions;
  double eps = 1.0;
};

/// Canonical formal solution, then one verified corrugation per direction.
SolveResult solve(std::shared_ptr<const JetSection> sigma, double eps, const SolveOptions& options = {});

/// Verification grid for direction frequencies N (0 for untouched axes);
/// axis i is additionally halved levels[i] times.
Grid verification_grid(const JetSection& sigma, const std::vector<int>& frequencies,
                       const SolveOptions& options, const std::vector<int>& levels = {});

}  // namespace holo
