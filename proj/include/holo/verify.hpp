#pragma once

// Certification of solutions (delta, f1) on grids, and brute-force oracles
// used to cross-check the closed forms. Oracles never feed the solver.

#include "holo/extension.hpp"
#include "holo/jetmodel.hpp"
#include "holo/relation.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace holo {

inline constexpr const char* kCertificateSchema = "holonomic-certificate/1";

struct ClauseReport {
  double worst_margin = 0.0;  ///< eps minus the largest sampled value
  double certified = 0.0;     ///< cellwise Lipschitz lower bound
  Vec worst_point;
  bool passed = false;
};

struct GridSpec {
  Vec lower, upper;
  std::vector<std::size_t> counts;
};

struct OracleStats {
  std::size_t points = 0;
  double fd_max_deviation = 0.0;      ///< analytic df1 vs Richardson differences
  double norm_max_deviation = 0.0;    ///< closed-form vs sampled operator norm
  double tolerance = 1e-6;
  bool passed = false;
};

struct Certificate {
  double eps = 0.0;
  Dims dims;
  std::vector<int> frequencies;
  ClauseReport delta;       ///< |delta| < eps on [0,1]^m
  ClauseReport on_cube;     ///< j^1 f1 vs sigma on A_delta itself
  ClauseReport value;       ///< |f1 - f| < eps on the verified tube
  ClauseReport derivative;  ///< |df1 - phi| < eps on the verified tube
  GridSpec core_grid;
  GridSpec tube_grid;
  double requested_radius = 0.0;
  double tube_radius = 0.0;  ///< largest verified radius, 0 if none
  OracleStats oracle;
  bool passed = false;
  std::string failure;  ///< first violated condition, localized

  nlohmann::json to_json() const;
};

struct CertifyOptions {
  std::vector<int> frequencies;  ///< refine the grids to resolve these (per axis)
  double spacing = 0.0;          ///< core spacing; 0 picks 2^-(10 - 3(m - 1))
  int samples_per_period = 24;
  double tube_radius = 0.0;      ///< requested radius; 0 uses the section margin
  int fiber_steps = 2;           ///< samples on each side of A_delta along y
  int z_steps = 1;               ///< samples on each side along every z axis
  int max_halvings = 24;         ///< radius halvings before giving up
  int bisection_steps = 4;       ///< refinement steps once a radius passed
  int refinements = 6;           ///< axis halvings allowed for the Lipschitz rule
  std::size_t max_fibers = 200'000;       ///< cap on x lattice refinement
  std::size_t max_tube_points = 2'000'000;  ///< cap on fiber-axis refinement
  int oracle_points = 32;
  std::uint64_t seed = 1;
};

Certificate certify_solution(std::shared_ptr<const JetSection> sigma, double eps, const HolonomicPair& pair,
                             const CertifyOptions& options = {});

// ---------------------------------------------------------------------------
// Oracles

using Rng = std::mt19937_64;

/// sup over sampled u of <r,u> / sqrt(|u|^2 + <Y,u>^2), with local ascent
/// from the best samples.
double sampled_restricted_norm(const Vec& r, const Vec& Y, std::size_t samples, Rng& rng);

/// sup over sampled (u, u') of |psi_j u + u' b_j| / sqrt(|u|^2 + u'^2 + (lambda u + a u')^2),
/// maximized over j; (a, b) is in the slice iff this is < eps.
double sampled_slice_ratio(const SliceSpec& spec, double a, const Vec& b, std::size_t samples, Rng& rng);

/// Central differences with one Richardson step (error O(h^4)).
Vec richardson_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                        double h);

struct OracleReport {
  std::uint64_t seed = 0;
  int trials = 0;
  double restricted_norm_max_rel = 0.0;
  int slice_checked = 0;
  int slice_disagreements = 0;
  int slice_in_band = 0;
  double K_max_dev = 0.0;
  double dual_fd_max_rel = 0.0;
  int hull_checked = 0;
  int hull_failures = 0;

  nlohmann::json to_json() const;
  bool passed() const;
};

/// Runs every oracle on `trials` random instances; deterministic in `seed`.
OracleReport oracle_suite(std::uint64_t seed, int trials, std::size_t samples = 100000);

}  // namespace holo
