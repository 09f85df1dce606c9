#include "holo/cli.hpp"

#include "holo/parallel.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace holo {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using nlohmann::json;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T get_number(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  const std::string text = unquote(*v);
  std::istringstream in(text);
  T out{};
  std::string rest;
  const bool ok = static_cast<bool>(in >> out);
  in >> rest;
  if (!ok || !rest.empty()) throw InputError("config: '" + key + "' is not a number: " + text);
  return out;
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  const std::string t = unquote(*v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InputError("config: '" + key + "' is not a boolean: " + t);
}

void write_csv_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
  out << '\n';
}

json trig_json(const TrigPoly& p) { return {{"c0", p.c0}, {"cos", p.cos_coeffs}, {"sin", p.sin_coeffs}}; }

// Increment (1/N) int_0^{N x_j} (gamma - mean) ds of one component, as
// coefficients of sin(2 pi k N x_j) and 1 - cos(2 pi k N x_j).
json increment_json(const TrigPoly& p, int N) {
  std::vector<double> s, c;
  for (std::size_t k = 0; k < p.cos_coeffs.size(); ++k)
    s.push_back(p.cos_coeffs[k] / (2.0 * std::numbers::pi * double(k + 1) * N));
  for (std::size_t k = 0; k < p.sin_coeffs.size(); ++k)
    c.push_back(p.sin_coeffs[k] / (2.0 * std::numbers::pi * double(k + 1) * N));
  return {{"sin", s}, {"one_minus_cos", c}};
}

bool same_loop(const Loop& a, const Loop& b) {
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    const TrigPoly& p = a.components[i];
    const TrigPoly& q = b.components[i];
    if (std::abs(p.c0 - q.c0) > 1e-12 || p.cos_coeffs.size() != q.cos_coeffs.size() ||
        p.sin_coeffs.size() != q.sin_coeffs.size())
      return false;
    for (std::size_t k = 0; k < p.cos_coeffs.size(); ++k)
      if (std::abs(p.cos_coeffs[k] - q.cos_coeffs[k]) > 1e-12) return false;
    for (std::size_t k = 0; k < p.sin_coeffs.size(); ++k)
      if (std::abs(p.sin_coeffs[k] - q.sin_coeffs[k]) > 1e-12) return false;
  }
  return true;
}

json coefficients_json(const Config& config, const SolveResult& result) {
  const JetSection& sigma = result.state.section();
  const int m = config.dims.m;
  json dirs = json::array();
  for (const DirectionReport& d : result.directions) {
    const LoopFamily& fam = d.family;
    const Vec center(static_cast<std::size_t>(m), 0.5);
    const Loop loop = fam.at_jet(sigma, center.span());
    // The loop is x-independent when it agrees at the center and all corners.
    bool constant = true;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m) && constant; ++mask) {
      Vec corner(static_cast<std::size_t>(m));
      for (int a = 0; a < m; ++a) corner[std::size_t(a)] = double((mask >> a) & 1U);
      constant = same_loop(loop, fam.at_jet(sigma, corner.span()));
    }
    json comps = json::array(), incs = json::array();
    for (const TrigPoly& p : loop.components) {
      comps.push_back(trig_json(p));
      incs.push_back(increment_json(p, d.N));
    }
    dirs.push_back({{"direction", d.direction + 1},
                    {"N", d.N},
                    {"mode", fam.mode == LoopMode::Mountain ? "mountain" : "synthesized"},
                    {"S", d.shape.S},
                    {"s0", d.shape.s0},
                    {"S_required", d.shape.S_required},
                    {"bounds",
                     {{"B", d.bounds.B}, {"c", d.bounds.c}, {"Db", d.bounds.Db}, {"kappa", d.bounds.kappa}, {"eta", d.bounds.eta}}},
                    {"x_independent", constant},
                    {"loop_at", center.values()},
                    {"loop_components", "delta, h1..hn (column j of the formal derivative)"},
                    {"loop", comps},
                    {"increment", incs},
                    {"c0_bound", d.c0_bound},
                    {"displacement", d.displacement},
                    {"formal_residual", d.formal_residual},
                    {"margin", d.margins.worst},
                    {"certified_margin", d.margins.certified}});
  }
  return {{"schema", "holonomic-coefficients/1"},
          {"eps", result.eps},
          {"dims", {{"m", m}, {"k", config.dims.k}, {"n", config.dims.n}}},
          {"f", config.f},
          {"phi", config.phi},
          {"directions", dirs}};
}

int default_points(int m) { return m == 1 ? 513 : (m == 2 ? 65 : 17); }

void write_core_csv(const Config& config, const HolonomicPair& pair, std::ostream& out) {
  const int m = config.dims.m, n = config.dims.n;
  const int pts = config.core_points > 1 ? config.core_points : default_points(m);
  const Grid grid(Vec(static_cast<std::size_t>(m), 0.0), Vec(static_cast<std::size_t>(m), 1.0),
                  std::vector<std::size_t>(std::size_t(m), std::size_t(pts)));
  for (int a = 0; a < m; ++a) out << "x" << a + 1 << ',';
  out << "delta";
  for (int r = 0; r < n; ++r) out << ",h" << r + 1;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.point(i);
    std::vector<double> row = x.values();
    row.push_back(pair.delta(x.span()));
    for (double v : pair.h(x.span())) row.push_back(v);
    write_csv_row(out, row);
  }
}

void write_tube_csv(const Config& config, const Extension& ext, double radius, std::ostream& out) {
  const int m = config.dims.m, k = config.dims.k, n = config.dims.n;
  const int pts = config.tube_points > 1 ? config.tube_points : (m == 1 ? 257 : 33);
  std::vector<double> lo, hi;
  std::vector<std::size_t> counts;
  for (int a = 0; a < m; ++a) {
    lo.push_back(0.0);
    hi.push_back(1.0);
    counts.push_back(std::size_t(pts));
  }
  const std::size_t across = radius > 0.0 ? 5 : 1;
  lo.push_back(-radius);
  hi.push_back(radius);
  counts.push_back(across);
  for (int c = 0; c < k; ++c) {
    lo.push_back(-radius);
    hi.push_back(radius);
    counts.push_back(radius > 0.0 ? 3 : 1);
  }
  const Grid grid(Vec(lo), Vec(hi), counts);
  for (int a = 0; a < m; ++a) out << "x" << a + 1 << ',';
  out << 'y';
  for (int c = 0; c < k; ++c) out << ",z" << c + 1;
  for (int r = 0; r < n; ++r) out << ",f1_" << r + 1;
  out << '\n';
  out << std::setprecision(17);
  std::vector<std::vector<double>> rows(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    Vec p = grid.point(i);
    p[std::size_t(m)] += ext.pair().delta(std::span<const double>(p.data(), std::size_t(m)));
    std::vector<double> row = p.values();
    for (double v : ext.value(p.span())) row.push_back(v);
    rows[i] = std::move(row);
  });
  for (const auto& row : rows) write_csv_row(out, row);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  body(out);
  if (!out) throw InputError("failed writing " + path.string());
}

CertifyOptions certify_options(const Config& config, const SolveResult& result) {
  CertifyOptions c = config.certify;
  c.frequencies.clear();
  for (const DirectionReport& d : result.directions) c.frequencies.push_back(d.N);
  return c;
}

int cmd_solve(const std::string& path, const std::string& out_dir, double eps_override, std::ostream& out) {
  Config config = load_config(path);
  if (eps_override > 0.0) config.eps = eps_override;
  const auto sigma = config.section();
  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult result = solve(sigma, config.eps, config.solver);
  const Certificate cert = certify_solution(sigma, config.eps, result.pair, certify_options(config, result));
  const Extension ext = extend(sigma, result.pair);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::path dir = out_dir.empty() ? fs::path(config.output_dir) : fs::path(out_dir);
  if (dir.empty()) dir = fs::path(path).parent_path() / (fs::path(path).stem().string() + "_out");
  fs::create_directories(dir);
  write_file(dir / "core.csv", [&](std::ostream& o) { write_core_csv(config, result.pair, o); });
  write_file(dir / "tube.csv", [&](std::ostream& o) { write_tube_csv(config, ext, cert.tube_radius, o); });
  write_file(dir / "coefficients.json", [&](std::ostream& o) { o << coefficients_json(config, result).dump(2) << '\n'; });
  write_file(dir / "certificate.json", [&](std::ostream& o) { o << cert.to_json().dump(2) << '\n'; });

  out << "eps " << config.eps << ", dims m=" << config.dims.m << " k=" << config.dims.k << " n=" << config.dims.n
      << '\n';
  for (const DirectionReport& d : result.directions) {
    out << "direction " << d.direction + 1 << ": N = " << d.N << ", S = " << d.shape.S << ", margin "
        << d.margins.worst << " (certified " << d.margins.certified << "), " << d.attempts.size() << " attempts\n";
  }
  out << "delta margin " << cert.delta.worst_margin << ", value margin " << cert.value.worst_margin
      << ", derivative margin " << cert.derivative.worst_margin << ", tube radius " << cert.tube_radius << '\n';
  out << "oracle: fd " << cert.oracle.fd_max_deviation << ", norm " << cert.oracle.norm_max_deviation << '\n';
  out << "outputs in " << dir.string() << " (" << std::fixed << std::setprecision(2) << secs << " s)\n";
  out << (cert.passed ? "PASS" : "FAIL") << '\n';
  if (!cert.passed) out << cert.failure << '\n';
  return cert.passed ? kExitPass : kExitFail;
}

int cmd_slice(const std::string& lambda_text, const std::vector<std::string>& psi_rows, double eps,
              const std::string& target_text, double radius, std::ostream& out) {
  if (!(eps > 0.0)) throw InputError("--eps must be positive");
  if (psi_rows.empty()) throw InputError("--psi needs at least one row");
  SliceSpec spec;
  spec.eps = eps;
  spec.lambda = Vec(parse_numbers(lambda_text));
  spec.psi = Mat(psi_rows.size(), spec.lambda.size());
  for (std::size_t r = 0; r < psi_rows.size(); ++r) {
    const std::vector<double> row = parse_numbers(psi_rows[r]);
    if (row.size() != spec.lambda.size())
      throw InputError("psi row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                       " entries, lambda has " + std::to_string(spec.lambda.size()));
    for (std::size_t c = 0; c < row.size(); ++c) spec.psi(r, c) = row[c];
  }
  const SliceGeometry g = slice_geometry(spec);
  const double K = 1.0 / (1.0 + dot(spec.lambda, spec.lambda));
  out << "slice: " << (g.empty ? "empty" : "nonempty") << '\n';
  out << std::setprecision(6);
  out << "component\tm0\tkappa\teta\tK\tbranch\n";
  for (std::size_t j = 0; j < g.components.size(); ++j) {
    const HyperbolaParams& h = g.components[j];
    static const char* names[] = {"trivial", "zero-lambda", "collinear", "independent"};
    out << j + 1 << '\t';
    if (h.empty) {
      out << "-\t-\t-\t" << K << '\t' << names[int(h.branch)] << "\tempty\n";
    } else {
      out << h.m0 << '\t' << h.kappa << '\t' << h.eta << '\t' << h.K << '\t' << names[int(h.branch)] << '\n';
    }
  }
  if (g.empty) return kExitPass;
  Vec target(g.components.size() + 1);
  if (!target_text.empty()) {
    target = Vec(parse_numbers(target_text));
    if (target.size() != g.components.size() + 1) throw InputError("--target must list a, b_1..b_n");
  }
  if (!(radius >= 0.0)) throw InputError("--radius must be non-negative");
  const AmplenessCertificate cert = ampleness_certificate(spec, target, radius);
  out << "ampleness: ball of radius " << radius << " around (";
  for (std::size_t i = 0; i < target.size(); ++i) out << (i ? ", " : "") << target[i];
  out << ") in the hull of " << cert.points.size() << " points with half-length " << cert.half_length
      << "; points in slice: " << (cert.points_in_slice ? "yes" : "no")
      << "; hull check: " << (cert.hull_verified ? "verified" : "failed") << " (" << cert.lp_checks
      << " LP checks)\n";
  return kExitPass;
}

int cmd_oracle(std::uint64_t seed, int trials, std::size_t samples, std::ostream& out) {
  const OracleReport rep = oracle_suite(seed, trials, samples);
  out << rep.to_json().dump(2) << '\n';
  return rep.passed() ? kExitPass : kExitFail;
}

int cmd_mesh(const std::string& path, const MeshOptions& options, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
  const Config config = load_config(path);
  const bool obj = config.dims.m == 1 && config.dims.k == 0 && config.dims.n == 1;
  if (!obj) err << "warning: OBJ export needs m = 1, k = 0, n = 1; writing a CSV point cloud\n";
  std::string target = out_path;
  if (target.empty()) target = obj ? "mesh.obj" : "mesh.csv";
  std::ofstream file(target);
  if (!file) throw InputError("cannot write " + target);
  const MeshSummary s = write_mesh(config, options, file);
  out << "wrote " << target << ": " << s.vertices << " vertices, " << s.faces << " faces";
  if (s.obj) out << ", " << s.corrugations << " corrugations along the core";
  out << '\n';
  return kExitPass;
}

}  // namespace

std::shared_ptr<const JetSection> Config::section() const {
  return std::make_shared<JetSection>(dims, f, phi, margin);
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  const std::string t = trim(text);
  if (t.empty()) return out;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v)) throw InputError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

Config parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  Config c;
  const auto dims = tree.get_child_optional("dims");
  const auto sigma = tree.get_child_optional("sigma");
  if (!dims) throw InputError("config: missing [dims]");
  if (!sigma) throw InputError("config: missing [sigma]");
  c.dims.m = get_number<int>(*dims, "m", 1);
  c.dims.k = get_number<int>(*dims, "k", 0);
  c.dims.n = get_number<int>(*dims, "n", 1);
  c.dims.validate();
  if (!sigma->get_optional<std::string>("eps")) throw InputError("config: [sigma] needs eps");
  c.eps = get_number<double>(*sigma, "eps", 1.0);
  if (!(c.eps > 0.0)) throw InputError("config: eps must be positive");
  c.margin = get_number<double>(*sigma, "margin", 0.1);
  const int src = c.dims.source();
  for (int r = 1; r <= c.dims.n; ++r) {
    const auto f = sigma->get_optional<std::string>("f" + std::to_string(r));
    if (!f) throw InputError("config: [sigma] needs f" + std::to_string(r));
    c.f.push_back(unquote(*f));
    std::vector<std::string> row;
    for (int col = 1; col <= src; ++col) {
      const auto p = sigma->get_optional<std::string>("phi" + std::to_string(r) + "_" + std::to_string(col));
      row.push_back(p ? unquote(*p) : "0");
    }
    c.phi.push_back(std::move(row));
  }
  for (const auto& [key, value] : *sigma) {
    const bool known = key == "eps" || key == "margin" || key.starts_with("f") || key.starts_with("phi");
    if (!known) throw InputError("config: unknown key [sigma] " + key);
  }

  pt::ptree empty;
  const pt::ptree& solver = tree.get_child("solver", empty);
  const std::string mode = unquote(solver.get<std::string>("mode", "synthesized"));
  if (mode == "synthesized") c.solver.mode = LoopMode::Synthesized;
  else if (mode == "mountain") c.solver.mode = LoopMode::Mountain;
  else throw InputError("config: [solver] mode must be synthesized or mountain");
  c.solver.loop.safety = get_number<double>(solver, "safety", c.solver.loop.safety);
  c.solver.loop.S_cap = get_number<double>(solver, "S_cap", c.solver.loop.S_cap);
  c.solver.loop.samples = get_number<int>(solver, "loop_samples", c.solver.loop.samples);
  c.solver.N_cap = get_number<int>(solver, "N_cap", c.solver.N_cap);
  c.solver.frequency_ratio = get_number<double>(solver, "frequency_ratio", c.solver.frequency_ratio);
  c.solver.minimize = get_bool(solver, "minimize", c.solver.minimize);
  c.solver.containment_samples = get_number<int>(solver, "containment_samples", c.solver.containment_samples);
  if (const auto fixed = solver.get_optional<std::string>("fixed_N")) {
    for (double v : parse_numbers(unquote(*fixed))) {
      if (v < 1 || v != std::floor(v)) throw InputError("config: fixed_N entries must be positive integers");
      c.solver.fixed_N.push_back(int(v));
    }
    if (int(c.solver.fixed_N.size()) != c.dims.m) throw InputError("config: fixed_N needs one entry per direction");
  }
  if (!(c.solver.loop.safety > 1.0)) throw InputError("config: safety must exceed 1");
  if (c.solver.N_cap < 1) throw InputError("config: N_cap must be positive");

  const pt::ptree& grid = tree.get_child("grid", empty);
  c.solver.spacing = get_number<double>(grid, "spacing", 0.0);
  c.solver.samples_per_period = get_number<int>(grid, "samples_per_period", c.solver.samples_per_period);
  c.solver.refinements = get_number<int>(grid, "refinements", c.solver.refinements);
  c.solver.max_grid_points = get_number<std::size_t>(grid, "max_points", c.solver.max_grid_points);
  c.certify.spacing = get_number<double>(grid, "core_spacing", 0.0);
  c.certify.samples_per_period = c.solver.samples_per_period;
  c.certify.tube_radius = get_number<double>(grid, "tube_radius", 0.0);
  c.certify.fiber_steps = get_number<int>(grid, "fiber_steps", c.certify.fiber_steps);
  c.certify.z_steps = get_number<int>(grid, "z_steps", c.certify.z_steps);
  c.certify.bisection_steps = get_number<int>(grid, "bisection_steps", c.certify.bisection_steps);
  c.certify.max_halvings = get_number<int>(grid, "max_halvings", c.certify.max_halvings);
  c.certify.oracle_points = get_number<int>(grid, "oracle_points", c.certify.oracle_points);
  c.certify.seed = get_number<std::uint64_t>(grid, "seed", c.certify.seed);
  if (c.solver.samples_per_period < 2) throw InputError("config: samples_per_period must be >= 2");

  const pt::ptree& output = tree.get_child("output", empty);
  c.output_dir = unquote(output.get<std::string>("dir", ""));
  c.core_points = get_number<int>(output, "core_points", 0);
  c.tube_points = get_number<int>(output, "tube_points", 0);

  // Fail early on bad expressions.
  (void)c.section();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  Config c = parse_config(in);
  if (!c.output_dir.empty() && fs::path(c.output_dir).is_relative())
    c.output_dir = (fs::path(path).parent_path() / c.output_dir).string();
  return c;
}

int corrugation_count(const Extension& ext, int samples) {
  if (ext.pair().m() != 1) throw InputError("corrugation count needs m = 1");
  std::vector<double> slope(std::size_t(samples) + 1);
  for (int i = 0; i <= samples; ++i) {
    const double x = double(i) / samples;
    const double p[2] = {x, ext.pair().delta(std::span<const double>(&x, 1))};
    slope[std::size_t(i)] = ext.jet(std::span<const double>(p, 2)).differential(0, 0);
  }
  // Trapezoidal mean over [0, 1].
  double mean = 0.0;
  for (int i = 0; i <= samples; ++i) mean += (i == 0 || i == samples ? 0.5 : 1.0) * slope[std::size_t(i)];
  mean /= samples;
  int count = 0;
  double prev = 0.0;
  for (double s : slope) {
    const double v = s - mean;
    if (std::abs(v) < 1e-9) continue;
    if (prev != 0.0 && (v > 0.0) != (prev > 0.0)) ++count;
    prev = v;
  }
  return count;
}

MeshSummary write_mesh(const Config& config, const MeshOptions& options, std::ostream& out) {
  if (options.N < 1) throw InputError("--N must be >= 1");
  if (!(options.eps > 0.0)) throw InputError("--eps must be positive");
  if (!(options.width >= 0.0)) throw InputError("--width must be non-negative");
  if (options.res < 1 || options.fiber_res < 1) throw InputError("--res must be >= 1");
  const auto sigma = config.section();
  SolveOptions so = config.solver;
  so.fixed_N.assign(std::size_t(config.dims.m), options.N);
  const SolveResult result = solve(sigma, options.eps, so);
  const Extension ext = extend(sigma, result.pair);
  MeshSummary s;
  out << std::setprecision(17);

  if (config.dims.m != 1 || config.dims.k != 0 || config.dims.n != 1) {
    Config c = config;
    c.tube_points = options.res + 1;
    write_tube_csv(c, ext, options.width, out);
    s.vertices = 0;
    return s;
  }

  s.obj = true;
  const int nx = options.res + 1;
  const int ny = options.width > 0.0 ? options.fiber_res + 1 : 1;
  out << "# graph of f1 over the strip |y - delta(x)| <= " << options.width << ", N = " << options.N
      << ", eps = " << options.eps << '\n';
  out << "o f1\n";
  for (int i = 0; i < nx; ++i) {
    const double x = double(i) / options.res;
    const double d = ext.pair().delta(std::span<const double>(&x, 1));
    for (int l = 0; l < ny; ++l) {
      const double t = ny > 1 ? -options.width + 2.0 * options.width * double(l) / (ny - 1) : 0.0;
      const double p[2] = {x, d + t};
      out << "v " << x << ' ' << p[1] << ' ' << ext.value(std::span<const double>(p, 2))[0] << '\n';
      ++s.vertices;
    }
  }
  if (ny > 1) {
    for (int i = 0; i + 1 < nx; ++i) {
      for (int l = 0; l + 1 < ny; ++l) {
        const int a = i * ny + l + 1, b = (i + 1) * ny + l + 1;
        out << "f " << a << ' ' << b << ' ' << b + 1 << ' ' << a + 1 << '\n';
        ++s.faces;
      }
    }
  } else {
    out << 'l';
    for (int i = 1; i <= nx; ++i) out << ' ' << i;
    out << '\n';
  }
  out << "o reference\n";
  const std::size_t base = s.vertices;
  for (int i = 0; i < nx; ++i) {
    const double x = double(i) / options.res;
    out << "v " << x << " 0 " << x << '\n';
    ++s.vertices;
  }
  out << 'l';
  for (int i = 1; i <= nx; ++i) out << ' ' << base + std::size_t(i);
  out << '\n';
  s.corrugations = corrugation_count(ext, std::max(options.res, 64 * options.N));
  return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical holonomic approximation by corrugation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  double solve_eps = 0.0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve, certify and write sample tables");
  solve_cmd->add_option("config", config_path, "Config file")->required();
  solve_cmd->add_option("--out", out_dir, "Output directory (default: <config>_out)");
  solve_cmd->add_option("--eps", solve_eps, "Override eps from the config");

  std::string lambda_text, target_text;
  std::vector<std::string> psi_rows;
  double slice_eps = 1.0, radius = 0.5;
  auto* slice_cmd = app.add_subcommand("slice", "Analyze one slice");
  slice_cmd->add_option("--lambda", lambda_text, "Comma-separated lambda (empty for m = 1)")->required();
  slice_cmd->add_option("--psi", psi_rows, "One comma-separated row of psi per component")->required();
  slice_cmd->add_option("--eps", slice_eps, "eps")->required();
  slice_cmd->add_option("--target", target_text, "Center (a, b_1..b_n) of the ampleness ball");
  slice_cmd->add_option("--radius", radius, "Radius of the ampleness ball");

  std::string mesh_config, mesh_out;
  MeshOptions mesh;
  auto* mesh_cmd = app.add_subcommand("mesh", "Export the extended solution as OBJ");
  mesh_cmd->add_option("config", mesh_config, "Config file")->required();
  mesh_cmd->add_option("--N", mesh.N, "Frequency used in every direction");
  mesh_cmd->add_option("--eps", mesh.eps, "eps");
  mesh_cmd->add_option("--width", mesh.width, "Half-width of the strip around the core");
  mesh_cmd->add_option("--res", mesh.res, "Samples along x");
  mesh_cmd->add_option("--fiber-res", mesh.fiber_res, "Samples across the strip");
  mesh_cmd->add_option("-o,--out", mesh_out, "Output file");

  std::uint64_t seed = 1;
  int trials = 100;
  std::size_t samples = 100000;
  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check closed forms against sampling oracles");
  oracle_cmd->add_option("--seed", seed, "Random seed");
  oracle_cmd->add_option("--trials", trials, "Random instances per oracle")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--samples", samples, "Directions sampled per instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(config_path, out_dir, solve_eps, out);
    if (*slice_cmd) return cmd_slice(lambda_text, psi_rows, slice_eps, target_text, radius, out);
    if (*mesh_cmd) return cmd_mesh(mesh_config, mesh, mesh_out, out, err);
    if (*oracle_cmd) return cmd_oracle(seed, trials, samples, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitInput;
}

}  // namespace holo
