#pragma once

// Serializable experiment configurations and the runner behind every CLI
// subcommand. A config plus the library version reproduces a run exactly.

#include <filesystem>
#include <iomanip>
#include <ostream>

#include "graphpot/graphpot.hpp"

namespace graphpot::experiment {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kIdentityFailure = 1, kInputError = 2 };

struct GraphSource {
  enum class Kind { none, file, lattice, random };
  Kind kind = Kind::none;
  std::string path;
  Index rows = 20;
  Index cols = 20;
  RingSpec rings;
  double sigma = 1.0;
  RandomGraphSpec random;
};

struct ExperimentConfig {
  std::string command;
  GraphSource graph;
  // Unset: 0.5, or the per-edge values stored in a graph file.
  std::optional<double> pou_fraction;
  double tolerance = kIdentityTolerance;
  std::uint64_t seed = 42;
  std::string out_dir;
  bool json_output = false;
  json params = json::object();
};

inline json to_json(const GraphSource& g) {
  switch (g.kind) {
    case GraphSource::Kind::none: return nullptr;
    case GraphSource::Kind::file: return {{"file", g.path}};
    case GraphSource::Kind::lattice:
      return {{"lattice",
               {{"rows", g.rows},
                {"cols", g.cols},
                {"rings", {g.rings.b, g.rings.omega_plus, g.rings.boundary}},
                {"sigma", g.sigma}}}};
    case GraphSource::Kind::random:
      return {{"random",
               {{"nodes", g.random.nodes},
                {"seed", g.random.seed},
                {"sigma_min", g.random.sigma_min},
                {"sigma_max", g.random.sigma_max},
                {"extra_edge_ratio", g.random.extra_edge_ratio},
                {"side_connected", g.random.side_connected},
                {"random_pou", g.random.random_pou}}}};
  }
  return nullptr;
}

inline GraphSource graph_source_from_json(const json& j) {
  GraphSource g;
  if (j.is_null()) return g;
  if (j.contains("file")) {
    g.kind = GraphSource::Kind::file;
    g.path = j.at("file").get<std::string>();
  } else if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    g.kind = GraphSource::Kind::lattice;
    g.rows = l.value("rows", Index{20});
    g.cols = l.value("cols", g.rows);
    if (l.contains("rings")) {
      auto r = l.at("rings").get<std::vector<Index>>();
      if (r.size() != 3) fail(ErrorKind::InvalidInput, "rings must list three widths");
      g.rings = {r[0], r[1], r[2]};
    }
    g.sigma = l.value("sigma", 1.0);
  } else if (j.contains("random")) {
    const auto& r = j.at("random");
    g.kind = GraphSource::Kind::random;
    g.random.nodes = r.value("nodes", g.random.nodes);
    g.random.seed = r.value("seed", g.random.seed);
    g.random.sigma_min = r.value("sigma_min", g.random.sigma_min);
    g.random.sigma_max = r.value("sigma_max", g.random.sigma_max);
    g.random.extra_edge_ratio = r.value("extra_edge_ratio", g.random.extra_edge_ratio);
    g.random.side_connected = r.value("side_connected", g.random.side_connected);
    g.random.random_pou = r.value("random_pou", g.random.random_pou);
  } else {
    fail(ErrorKind::InvalidInput, "graph source must be one of file, lattice, random");
  }
  return g;
}

inline json to_json(const ExperimentConfig& c) {
  json j{{"command", c.command},
         {"graph", to_json(c.graph)},
         {"tolerance", c.tolerance},
         {"seed", c.seed},
         {"params", c.params}};
  j["pou_fraction"] = c.pou_fraction ? json(*c.pou_fraction) : json(nullptr);
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig c;
    c.command = j.at("command").get<std::string>();
    c.graph = graph_source_from_json(j.value("graph", json(nullptr)));
    if (j.contains("pou_fraction") && !j.at("pou_fraction").is_null()) c.pou_fraction = j.at("pou_fraction").get<double>();
    c.tolerance = j.value("tolerance", c.tolerance);
    c.seed = j.value("seed", c.seed);
    c.params = j.value("params", json::object());
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("malformed config: ") + e.what());
  }
}

inline ProblemGraph load_problem(const ExperimentConfig& c) {
  const double fraction = c.pou_fraction.value_or(kDefaultBoundaryFraction);
  switch (c.graph.kind) {
    case GraphSource::Kind::none: fail(ErrorKind::InvalidInput, "no graph given (use --graph or a generator)");
    case GraphSource::Kind::file: return io::load_graph(c.graph.path, fraction);
    case GraphSource::Kind::lattice: return build_lattice(c.graph.rows, c.graph.cols, c.graph.rings, c.graph.sigma, fraction);
    case GraphSource::Kind::random: {
      auto spec = c.graph.random;
      spec.pou_fraction = fraction;
      return random_graph(spec);
    }
  }
  fail(ErrorKind::InvalidInput, "unknown graph source");
}

// ---------------------------------------------------------------------------

struct Context {
  const ExperimentConfig& config;
  std::ostream& out;
  json results = json::object();

  std::filesystem::path out_path(const std::string& name) const { return std::filesystem::path(config.out_dir) / name; }

  void require_out_dir() const {
    if (config.out_dir.empty()) fail(ErrorKind::InvalidInput, "--out-dir is required for " + config.command);
  }

  // Explicit path from params[key], else out_dir/fallback, else empty.
  std::string output_file(const std::string& key, const std::string& fallback) const {
    if (config.params.contains(key) && !config.params.at(key).get<std::string>().empty()) {
      return config.params.at(key).get<std::string>();
    }
    if (!config.out_dir.empty()) return out_path(fallback).string();
    return {};
  }

  void write(const std::string& path, const std::string& text) const {
    if (path.empty()) return;
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    io::write_text(path, text);
  }
};

inline std::string param_string(const json& p, const char* key, std::string fallback = {}) {
  return p.contains(key) && p.at(key).is_string() ? p.at(key).get<std::string>() : fallback;
}

inline Side parse_variant(const std::string& s) {
  if (s == "plus") return Side::plus;
  if (s == "minus") return Side::minus;
  fail(ErrorKind::InvalidInput, "variant must be plus or minus, got '" + s + "'");
}

inline ProblemSide parse_side(const std::string& s) {
  if (s == "interior") return ProblemSide::interior;
  if (s == "exterior") return ProblemSide::exterior;
  fail(ErrorKind::InvalidInput, "side must be interior or exterior, got '" + s + "'");
}

inline CloakMode parse_mode(const std::string& s) {
  if (s == "interior") return CloakMode::interior;
  if (s == "exterior") return CloakMode::exterior;
  fail(ErrorKind::InvalidInput, "mode must be interior or exterior, got '" + s + "'");
}

inline json check_json(const IdentityCheck& c) {
  return {{"identity", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"relative", c.relative},
          {"passed", c.passed}};
}

inline void print_checks(std::ostream& out, const std::vector<IdentityCheck>& checks) {
  std::size_t width = 8;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "identity" << "  " << std::setw(12) << "residual"
      << "  " << std::setw(10) << "tolerance" << "  result\n";
  for (const auto& c : checks) {
    out << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(12) << std::setprecision(3)
        << std::scientific << c.residual << "  " << std::setw(10) << c.tolerance << std::defaultfloat << "  "
        << (c.passed ? "PASS" : "FAIL") << "\n";
  }
}

// Random graphs for the identity sweep: sizes in [8, max_nodes], random
// per-edge partition of unity, both sides connected.
inline RandomGraphSpec sweep_graph_spec(std::uint64_t seed, std::uint64_t k, Index max_nodes) {
  std::mt19937_64 rng(detail::splitmix64(seed + k));
  RandomGraphSpec spec;
  spec.nodes = std::uniform_int_distribution<Index>(8, std::max<Index>(8, max_nodes))(rng);
  spec.seed = rng();
  spec.random_pou = true;
  spec.side_connected = true;
  return spec;
}

inline int cmd_verify(Context& ctx) {
  const auto& c = ctx.config;
  const auto count = c.params.value("random", std::uint64_t{0});
  const auto max_nodes = c.params.value("max_nodes", Index{200});
  SuiteOptions opt;
  opt.tolerance = c.tolerance;
  opt.seed = c.seed;
  std::vector<IdentityReport> reports;
  if (count > 0) {
    for (std::uint64_t k = 0; k < count; ++k) {
      auto problem = random_graph(sweep_graph_spec(c.seed, k, max_nodes));
      reports.push_back(verify_identities(PotentialTheory::build(problem), opt));
    }
  } else {
    reports.push_back(verify_identities(PotentialTheory::build(load_problem(c)), opt));
  }
  auto worst = worst_per_identity(reports);
  bool passed = std::all_of(worst.begin(), worst.end(), [](const IdentityCheck& x) { return x.passed; });
  json list = json::array();
  for (const auto& w : worst) list.push_back(check_json(w));
  ctx.results = {{"graphs", reports.size()}, {"passed", passed}, {"identities", list}};
  if (c.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << "graphs checked: " << reports.size() << "\n";
    print_checks(ctx.out, worst);
    ctx.out << (passed ? "all identities hold\n" : "identity failures\n");
  }
  if (!c.out_dir.empty()) ctx.write(ctx.out_path("report.json").string(), io::dump(ctx.results));
  return passed ? kPass : kIdentityFailure;
}

inline int cmd_generate(Context& ctx) {
  auto problem = load_problem(ctx.config);
  auto path = ctx.output_file("out", "graph.json");
  auto text = io::dump(io::graph_to_json(problem));
  if (path.empty()) {
    ctx.out << text;
  } else {
    ctx.write(path, text);
    if (!ctx.config.json_output) ctx.out << "wrote " << path << " (" << problem.graph.num_nodes() << " nodes)\n";
  }
  ctx.results = {{"nodes", problem.graph.num_nodes()}, {"edges", problem.graph.num_edges()}};
  return kPass;
}

inline int cmd_solve(Context& ctx) {
  const auto& p = ctx.config.params;
  const auto problem_kind = param_string(p, "problem");
  const auto side = parse_side(param_string(p, "side", "interior"));
  const auto data_path = param_string(p, "data");
  if (data_path.empty()) fail(ErrorKind::InvalidInput, "--data is required");
  auto t = PotentialTheory::build(load_problem(ctx.config));
  const auto bd = t.split.layout.boundary();
  BoundaryDensity data = io::load_field(t.graph, data_path, bd);
  NodeField u;
  double residual = 0.0;
  double allowed = ctx.config.tolerance;
  if (problem_kind == "dirichlet") {
    u = solve_dirichlet(t.ops, t.potentials, data);
    residual = dirichlet_residual(t.split, u, data, side);
  } else if (problem_kind == "neumann") {
    u = side == ProblemSide::interior ? solve_neumann_interior(t.ops, t.potentials, t.split.layout, data, t.connectivity)
                                      : solve_neumann_exterior(t.ops, t.potentials, data, t.connectivity);
    residual = neumann_residual(t.traces, u, data, side);
    allowed = std::max(allowed, 1e-9);
  } else {
    fail(ErrorKind::InvalidInput, "solve needs dirichlet or neumann");
  }
  ctx.write(ctx.output_file("out", "u.csv"), io::field_csv(t.graph, u));
  ctx.results = {{"problem", problem_kind}, {"side", to_string(side)}, {"residual", residual}, {"allowed", allowed}};
  if (ctx.config.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << problem_kind << " " << to_string(side) << " residual " << residual << "\n";
    if (ctx.output_file("out", "u.csv").empty()) ctx.out << io::field_csv(t.graph, u);
  }
  return residual <= allowed ? kPass : kIdentityFailure;
}

inline int cmd_dtn(Context& ctx) {
  const auto side = trace_side(parse_side(param_string(ctx.config.params, "side", "interior")));
  auto t = PotentialTheory::build(load_problem(ctx.config));
  auto maps = dtn_maps(t.ops, std::max(ctx.config.tolerance, kRepresentationTolerance));
  Eigen::MatrixXd schur = dtn_schur(t.split, side);
  double schur_gap = relative_residual(maps.lambda(side), schur);
  const auto bd = t.split.layout.boundary();
  auto csv = io::matrix_csv(t.graph, maps.lambda(side), bd, bd);
  auto path = ctx.output_file("out", "lambda.csv");
  ctx.write(path, csv);
  ctx.results = {{"side", to_string(side)},
                 {"representation_disagreement", maps.max_disagreement},
                 {"schur_disagreement", schur_gap}};
  if (ctx.config.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << "representations agree to " << maps.max_disagreement << ", Schur complement to " << schur_gap << "\n";
    if (path.empty()) ctx.out << csv;
  }
  return schur_gap <= ctx.config.tolerance ? kPass : kIdentityFailure;
}

inline int cmd_np_spectrum(Context& ctx) {
  auto t = PotentialTheory::build(load_problem(ctx.config));
  auto spec = np_spectrum(t.ops, t.connectivity);
  auto report = verify_spectrum_bounds(spec, t.ops);
  std::string csv = "index,eigenvalue\n";
  for (Index k = 0; k < spec.eigenvalues.size(); ++k) {
    csv += std::to_string(k) + "," + io::format_number(spec.eigenvalues[k]) + "\n";
  }
  ctx.write(ctx.output_file("out", "spectrum.csv"), csv);
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back(check_json(c));
  ctx.results = {{"eigenvalues", std::vector<double>(spec.eigenvalues.begin(), spec.eigenvalues.end())},
                 {"interior_connected", spec.connectivity.interior},
                 {"exterior_connected", spec.connectivity.exterior},
                 {"checks", checks},
                 {"passed", report.passed()}};
  if (ctx.config.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << "eigenvalues of D':";
    for (double v : spec.eigenvalues) ctx.out << " " << v;
    ctx.out << "\n";
    print_checks(ctx.out, report.checks);
  }
  return report.passed() ? kPass : kIdentityFailure;
}

// B data: --boundary file, else the lattice pattern (interior) / zeros.
inline Eigen::VectorXd boundary_data(const Context& ctx, const ProblemGraph& problem, bool grounded_default) {
  const auto& c = ctx.config;
  const auto b = problem.graph.layout().range(Region::B);
  auto path = param_string(c.params, "boundary");
  if (!path.empty()) return io::load_field(problem.graph, path, b);
  if (grounded_default) return Eigen::VectorXd::Zero(b.size());
  if (c.graph.kind == GraphSource::Kind::lattice) {
    return lattice_top_bottom_data(problem.graph, c.graph.rows, c.graph.cols, c.params.value("bottom", 0.0),
                                   c.params.value("top", 2.0), c.params.value("sides", 1.0));
  }
  // Uniform U(0,1) data drawn from the run seed.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd f(b.size());
  for (Index k = 0; k < f.size(); ++k) f[k] = unit(rng);
  return f;
}

inline int cmd_cloak(Context& ctx) {
  ctx.require_out_dir();
  const auto& c = ctx.config;
  const auto mode = parse_mode(param_string(c.params, "mode", "interior"));
  const auto variant = parse_variant(param_string(c.params, "variant", "plus"));
  auto problem = load_problem(c);
  Anomaly anomaly;
  auto anomaly_path = param_string(c.params, "anomaly");
  if (!anomaly_path.empty()) {
    anomaly = io::anomaly_from_json(io::parse_json(io::read_text(anomaly_path), anomaly_path));
  } else if (c.graph.kind == GraphSource::Kind::lattice) {
    NodeId center = lattice_center_id(c.graph.rows, c.graph.cols);
    anomaly = mode == CloakMode::interior ? Anomaly::pinned({center}, {0.0}) : Anomaly::source({center}, {1.0});
  }
  auto f = boundary_data(ctx, problem, mode == CloakMode::exterior);
  auto ex = run_cloak_experiment(problem, f, mode, variant, anomaly);
  const auto& g = problem.graph;
  ctx.write(ctx.out_path("u.csv").string(), io::field_csv(g, ex.u));
  ctx.write(ctx.out_path("u_star.csv").string(), io::field_csv(g, ex.u_star));
  ctx.write(ctx.out_path("u_tot.csv").string(), io::field_csv(g, ex.u_tot));
  ctx.write(ctx.out_path("currents.csv").string(), io::field_csv(g, ex.cloak.plan.currents));
  const auto& m = ex.metrics;
  const bool passed = m.outside_error <= c.tolerance && m.cancel_error <= c.tolerance && m.support_exact;
  json injection = json::array();
  for (Index i : ex.cloak.plan.injection_nodes) injection.push_back(g.id(i));
  ctx.results = {{"mode", to_string(mode)},
                 {"variant", to_string(variant)},
                 {"anomaly", io::anomaly_to_json(anomaly)},
                 {"reference_scale", m.reference_scale},
                 {"outside_error", m.outside_error},
                 {"cancel_error", m.cancel_error},
                 {"support_exact", m.support_exact},
                 {"net_current", m.net_current},
                 {"injection_nodes", injection},
                 {"passed", passed}};
  ctx.write(ctx.out_path("metrics.json").string(), io::dump(ctx.results));
  if (c.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << to_string(mode) << " cloak (" << to_string(variant) << "): outside error " << m.outside_error
            << ", cancellation error " << m.cancel_error << ", support " << (m.support_exact ? "exact" : "LEAKS")
            << " [" << m.seconds << " s]\n";
  }
  return passed ? kPass : kIdentityFailure;
}

inline WalkOptions walk_options(const ExperimentConfig& c) {
  WalkOptions o;
  o.walks = c.params.value("walks", o.walks);
  o.workers = c.params.value("workers", 1u);
  o.seed = c.seed;
  return o;
}

inline int cmd_random_walk(Context& ctx) {
  const auto& c = ctx.config;
  auto problem = load_problem(c);
  const auto& g = problem.graph;
  Eigen::VectorXd q_hat;
  auto charges = param_string(c.params, "charges");
  if (!charges.empty()) {
    q_hat = io::load_field(g, charges, {0, g.num_nodes()}, 0.0);
  } else {
    q_hat = boundary_charges(g, boundary_data(ctx, problem, false));
  }
  auto support = charge_support(q_hat);
  if (support.empty()) fail(ErrorKind::InvalidInput, "all launch charges are zero");
  auto model = walk_model(g, support, q_hat);
  auto opt = walk_options(c);
  auto cmp = compare_walks(g, model, opt);
  std::string csv = "node_id,q_tilde,u_tilde,q_exact,u_exact\n";
  for (Index i = 0; i < g.num_nodes(); ++i) {
    csv += std::to_string(g.id(i)) + "," + io::format_number(cmp.estimate.q_tilde[i]) + "," +
           io::format_number(cmp.estimate.u_tilde[i]) + "," + io::format_number(cmp.u[i] * model.c[i]) + "," +
           io::format_number(cmp.u[i]) + "\n";
  }
  auto path = ctx.output_file("out", "estimate.csv");
  ctx.write(path, csv);
  ctx.results = {{"walks", opt.walks}, {"seed", opt.seed}, {"relative_error", cmp.error}};
  if (c.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << opt.walks << " walks, relative error E(u, u~; V) = " << cmp.error << "\n";
    if (path.empty()) ctx.out << csv;
  }
  return kPass;
}

// Interior current sources for exterior experiments: --anomaly (a
// current_source), else a unit source at the lattice center.
inline NodeField source_field(const Context& ctx, const ProblemGraph& problem) {
  const auto& c = ctx.config;
  const auto& g = problem.graph;
  Anomaly a;
  auto path = param_string(c.params, "anomaly");
  if (!path.empty()) {
    a = io::anomaly_from_json(io::parse_json(io::read_text(path), path));
  } else if (c.graph.kind == GraphSource::Kind::lattice) {
    a = Anomaly::source({lattice_center_id(c.graph.rows, c.graph.cols)}, {1.0});
  } else {
    fail(ErrorKind::InvalidInput, "exterior experiments need --anomaly with a current source");
  }
  if (a.kind != AnomalyKind::current_source) fail(ErrorKind::InvalidInput, "exterior experiments need a current source");
  validate_anomaly(g, a);
  NodeField phi = NodeField::Zero(g.num_nodes());
  for (std::size_t k = 0; k < a.nodes.size(); ++k) phi[g.index_of(a.nodes[k])] += a.values[k];
  return phi;
}

inline int cmd_cloak_walks(Context& ctx) {
  ctx.require_out_dir();
  const auto& c = ctx.config;
  auto problem = load_problem(c);
  const auto& g = problem.graph;
  const auto variant = parse_variant(param_string(c.params, "variant", "plus"));
  const auto mode = parse_mode(param_string(c.params, "mode", "interior"));
  WalkCloakOptions opt;
  opt.walks = walk_options(c);
  opt.frames = c.params.value("frames", std::uint64_t{0});
  WalkCloakResult r;
  if (mode == CloakMode::interior) {
    r = cloak_via_walks(problem, boundary_data(ctx, problem, false), variant, opt);
  } else {
    r = exterior_cloak_via_walks(problem, source_field(ctx, problem), variant, opt);
  }

  auto error_or_zero = [](const WalkComparison& w) { return w.error; };
  ctx.results = {{"mode", to_string(mode)},
                 {"variant", to_string(variant)},
                 {"walks", opt.walks.walks},
                 {"seed", opt.walks.seed},
                 {"error_background", error_or_zero(r.background)},
                 {"error_cloak", error_or_zero(r.cloak)},
                 {"error_total", error_or_zero(r.total)}};
  std::string exact = "node_id,background,cloak,total\n";
  for (Index i = 0; i < g.num_nodes(); ++i) {
    exact += std::to_string(g.id(i)) + "," + io::format_number(r.background.u[i]) + "," +
             io::format_number(r.cloak.u[i]) + "," + io::format_number(r.total.u[i]) + "\n";
  }
  ctx.write(ctx.out_path("exact.csv").string(), exact);
  auto frame_csv = [&](const ChargeEstimate& a, const ChargeEstimate& b, const ChargeEstimate& t) {
    std::string s = "node_id,background,cloak,total\n";
    for (Index i = 0; i < g.num_nodes(); ++i) {
      s += std::to_string(g.id(i)) + "," + io::format_number(a.q_tilde[i]) + "," + io::format_number(b.q_tilde[i]) +
           "," + io::format_number(t.q_tilde[i]) + "\n";
    }
    return s;
  };
  const std::size_t frames = std::max({r.background_frames.size(), r.cloak_frames.size(), r.total_frames.size()});
  for (std::size_t k = 0; k < frames; ++k) {
    auto pick = [&](const std::vector<ChargeEstimate>& v, const WalkComparison& w) -> const ChargeEstimate& {
      return v.empty() ? w.estimate : v[std::min(k, v.size() - 1)];
    };
    char name[48];
    std::snprintf(name, sizeof name, "frames/frame_%04zu.csv", k);
    ctx.write(ctx.out_path(name).string(), frame_csv(pick(r.background_frames, r.background),
                                                     pick(r.cloak_frames, r.cloak), pick(r.total_frames, r.total)));
  }
  ctx.results["frames"] = frames;
  ctx.write(ctx.out_path("summary.json").string(), io::dump(ctx.results));
  if (c.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << "relative errors at " << opt.walks.walks << " walks: background " << r.background.error << ", cloak "
            << r.cloak.error << ", total " << r.total.error << "\n";
  }
  return kPass;
}

inline int cmd_export(Context& ctx) {
  ctx.require_out_dir();
  const auto& c = ctx.config;
  const auto format = param_string(c.params, "format", "csv");
  if (format != "csv" && format != "json") fail(ErrorKind::InvalidInput, "format must be csv or json");
  std::vector<std::string> what;
  if (c.params.contains("what")) what = c.params.at("what").get<std::vector<std::string>>();
  if (what.empty()) what = {"G", "L", "L_plus", "L_minus", "S", "D", "D_adj", "H", "C", "lambda_plus", "lambda_minus"};
  auto t = PotentialTheory::build(load_problem(c));
  const auto& lay = t.split.layout;
  const IndexRange all{0, lay.num_nodes()};
  const auto bd = lay.boundary();
  const Index m = bd.size();
  std::optional<DtNMaps> maps;
  json written = json::array();
  for (const auto& name : what) {
    Eigen::MatrixXd mat;
    IndexRange rows = bd, cols = bd;
    if (name == "G") {
      mat = t.green.matrix(), rows = cols = all;
    } else if (name == "G_dagger") {
      mat = green_pseudoinverse(t.split), rows = cols = all;
    } else if (name == "L") {
      mat = t.split.L, rows = cols = all;
    } else if (name == "L_plus") {
      mat = t.split.L_plus, rows = cols = all;
    } else if (name == "L_minus") {
      mat = t.split.L_minus, rows = cols = all;
    } else if (name == "S") {
      mat = t.ops.S;
    } else if (name == "D") {
      mat = t.ops.D;
    } else if (name == "D_adj") {
      mat = t.ops.D_adj;
    } else if (name == "H") {
      mat = t.ops.H;
    } else if (name == "lambda_plus" || name == "lambda_minus") {
      if (!maps) maps = dtn_maps(t.ops, std::max(c.tolerance, kRepresentationTolerance));
      mat = name == "lambda_plus" ? maps->lambda_plus : maps->lambda_minus;
    } else if (name == "C") {
      // Block rows/columns: Dirichlet then Neumann halves, both over ∂Ω.
      std::string csv = "block_row";
      for (Index k = 0; k < 2 * m; ++k) csv += "," + std::to_string(k);
      csv += "\n";
      for (Index r = 0; r < 2 * m; ++r) {
        csv += std::to_string(r);
        for (Index k = 0; k < 2 * m; ++k) csv += "," + io::format_number(t.ops.C(r, k));
        csv += "\n";
      }
      json j = json::array();
      for (Index r = 0; r < 2 * m; ++r) {
        json row = json::array();
        for (Index k = 0; k < 2 * m; ++k) row.push_back(t.ops.C(r, k));
        j.push_back(row);
      }
      ctx.write(ctx.out_path("C." + format).string(), format == "csv" ? csv : io::dump(json{{"data", j}}));
      written.push_back(name);
      continue;
    } else {
      fail(ErrorKind::InvalidInput, "unknown export '" + name + "'");
    }
    ctx.write(ctx.out_path(name + "." + format).string(),
              format == "csv" ? io::matrix_csv(t.graph, mat, rows, cols) : io::dump(io::matrix_json(t.graph, mat, rows, cols)));
    written.push_back(name);
  }
  ctx.results = {{"exported", written}, {"format", format}};
  if (c.json_output) {
    ctx.out << ctx.results.dump(2) << "\n";
  } else {
    ctx.out << "exported " << written.size() << " matrices to " << c.out_dir << "\n";
  }
  return kPass;
}

inline void write_manifest(const Context& ctx) {
  if (ctx.config.out_dir.empty()) return;
  json manifest{{"version", kVersion}, {"config", to_json(ctx.config)}, {"results", ctx.results}};
  ctx.write(ctx.out_path("manifest.json").string(), io::dump(manifest));
}

// Run one configured command. Library errors map to exit code 2 except the
// self-consistency failures, which count as identity failures.
inline int execute(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  Context ctx{config, out};
  try {
    int code = kInputError;
    const auto& cmd = config.command;
    if (cmd == "verify-identities") {
      code = cmd_verify(ctx);
    } else if (cmd == "generate") {
      code = cmd_generate(ctx);
    } else if (cmd == "solve") {
      code = cmd_solve(ctx);
    } else if (cmd == "dtn") {
      code = cmd_dtn(ctx);
    } else if (cmd == "np-spectrum") {
      code = cmd_np_spectrum(ctx);
    } else if (cmd == "cloak") {
      code = cmd_cloak(ctx);
    } else if (cmd == "random-walk") {
      code = cmd_random_walk(ctx);
    } else if (cmd == "cloak-walks") {
      code = cmd_cloak_walks(ctx);
    } else if (cmd == "export") {
      code = cmd_export(ctx);
    } else {
      fail(ErrorKind::InvalidInput, "unknown command '" + cmd + "'");
    }
    write_manifest(ctx);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::HDisagreement:
      case ErrorKind::RepresentationMismatch: return kIdentityFailure;
      default: return kInputError;
    }
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace graphpot::experiment
