#pragma once

// Config-driven command surface. Exit codes: 0 PASS, 1 FAIL, 2 input error,
// 3 solver error.

#include "holo/corrugation.hpp"
#include "holo/extension.hpp"
#include "holo/verify.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace holo {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInput = 2, kExitSolver = 3 };

struct Config {
  Dims dims;
  double eps = 1.0;
  double margin = 0.1;
  std::vector<std::string> f;
  std::vector<std::vector<std::string>> phi;
  SolveOptions solver;
  CertifyOptions certify;
  std::string output_dir;  ///< empty: next to the config
  int core_points = 0;     ///< per axis; 0 picks a default for m
  int tube_points = 0;

  std::shared_ptr<const JetSection> section() const;
};

/// INI text with sections [dims], [sigma], [solver], [grid], [output].
/// Throws InputError on anything malformed.
Config parse_config(std::istream& in);
Config load_config(const std::string& path);

/// Parses "1, 2.5, -3" into numbers; throws InputError.
std::vector<double> parse_numbers(const std::string& text);

/// Sign changes of d/dx1 f1 minus its mean along the core curve
/// x -> (x, delta(x)) for m = 1, sampled at `samples` + 1 points.
int corrugation_count(const Extension& ext, int samples);

struct MeshOptions {
  int N = 6;
  double eps = 1.0;
  double width = 0.1;  ///< half-width of the strip around the core curve
  int res = 512;       ///< samples along x
  int fiber_res = 16;  ///< samples across the strip
};

struct MeshSummary {
  bool obj = false;  ///< false when the dims forced the CSV fallback
  std::size_t vertices = 0;
  std::size_t faces = 0;
  int corrugations = 0;
};

/// Solves with the frequency fixed to options.N in every direction, extends
/// and writes the graph of f1 (OBJ) or a tube point cloud (CSV).
MeshSummary write_mesh(const Config& config, const MeshOptions& options, std::ostream& out);

/// Entry point of the `holo` tool; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace holo
