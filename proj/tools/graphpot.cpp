// graphpot: command-line front end for the potential-theory toolkit.
//
// Every subcommand is turned into an ExperimentConfig and executed by the
// shared runner, so `graphpot run --config out/manifest.json` replays a run.

#include <iostream>

#include <CLI11.hpp>

#include "graphpot/experiment.hpp"

namespace gx = graphpot::experiment;

namespace {

struct GraphFlags {
  std::string file;
  graphpot::Index lattice = 0;
  graphpot::Index rows = 0;
  graphpot::Index cols = 0;
  std::vector<graphpot::Index> rings;
  double sigma = 1.0;
  graphpot::Index random_nodes = 0;
  bool random_pou = false;
};

gx::GraphSource graph_source(const GraphFlags& f, std::uint64_t seed) {
  gx::GraphSource g;
  int given = !f.file.empty() + (f.lattice > 0 || f.rows > 0) + (f.random_nodes > 0);
  if (given > 1) graphpot::fail(graphpot::ErrorKind::InvalidInput, "give only one of --graph, --lattice, --random-graph");
  if (!f.file.empty()) {
    g.kind = gx::GraphSource::Kind::file;
    g.path = f.file;
  } else if (f.lattice > 0 || f.rows > 0) {
    g.kind = gx::GraphSource::Kind::lattice;
    g.rows = f.rows > 0 ? f.rows : f.lattice;
    g.cols = f.cols > 0 ? f.cols : g.rows;
    if (!f.rings.empty()) {
      if (f.rings.size() != 3) graphpot::fail(graphpot::ErrorKind::InvalidInput, "--rings takes three widths");
      g.rings = {f.rings[0], f.rings[1], f.rings[2]};
    }
    g.sigma = f.sigma;
  } else if (f.random_nodes > 0) {
    g.kind = gx::GraphSource::Kind::random;
    g.random.nodes = f.random_nodes;
    g.random.seed = seed;
    g.random.random_pou = f.random_pou;
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete potential theory, boundary value problems and cloaking on partitioned graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(gx::kVersion));

  gx::ExperimentConfig cfg;
  GraphFlags gf;
  double pou = -1.0;
  app.add_option("--graph", gf.file, "graph JSON file")->check(CLI::ExistingFile);
  app.add_option("--lattice", gf.lattice, "use an N x N lattice");
  app.add_option("--rows", gf.rows, "lattice rows");
  app.add_option("--cols", gf.cols, "lattice columns");
  app.add_option("--rings", gf.rings, "ring widths for B, omega_plus, boundary")->expected(3);
  app.add_option("--sigma", gf.sigma, "uniform lattice conductance");
  app.add_option("--random-graph", gf.random_nodes, "use a random graph with N nodes");
  app.add_flag("--random-pou", gf.random_pou, "random partition of unity on boundary edges");
  app.add_option("--pou-fraction", pou, "p_plus on boundary edges")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--tol", cfg.tolerance, "identity tolerance");
  app.add_option("--out-dir", cfg.out_dir, "output directory");
  app.add_flag("--json", cfg.json_output, "machine-readable output");

  auto& p = cfg.params;
  std::string s_out, s_side = "interior", s_data, s_mode = "interior", s_variant = "plus", s_anomaly, s_boundary,
                     s_charges, s_format = "csv", s_config, s_problem;
  std::vector<std::string> what;
  std::uint64_t walks = 100000, count = 0, frames = 0;
  unsigned workers = 1;
  graphpot::Index max_nodes = 200, size = 0, nodes = 0;

  auto* gen = app.add_subcommand("generate", "write a generated graph as JSON");
  gen->require_subcommand(1);
  auto* gen_lattice = gen->add_subcommand("lattice", "square lattice with concentric rings");
  gen_lattice->add_option("--size", size, "lattice side length")->required();
  gen_lattice->add_option("--out", s_out, "output file");
  auto* gen_random = gen->add_subcommand("random", "random connected graph");
  gen_random->add_option("--nodes", nodes, "node count")->required();
  gen_random->add_option("--out", s_out, "output file");

  auto* verify = app.add_subcommand("verify-identities", "check every identity on one or many graphs");
  verify->add_option("--random", count, "number of random graphs instead of --graph");
  verify->add_option("--max-nodes", max_nodes, "largest random graph");

  auto* solve = app.add_subcommand("solve", "Dirichlet or Neumann problem via boundary integral equations");
  solve->add_option("problem", s_problem, "dirichlet or neumann")->required()->check(CLI::IsMember({"dirichlet", "neumann"}));
  solve->add_option("--side", s_side, "interior or exterior")->check(CLI::IsMember({"interior", "exterior"}));
  solve->add_option("--data", s_data, "boundary data CSV")->required();
  solve->add_option("--out", s_out, "solution CSV");

  auto* dtn = app.add_subcommand("dtn", "Dirichlet-to-Neumann map");
  dtn->add_option("--side", s_side, "interior or exterior")->check(CLI::IsMember({"interior", "exterior"}));
  dtn->add_option("--out", s_out, "matrix CSV");

  auto* np = app.add_subcommand("np-spectrum", "Neumann-Poincare spectrum and its bounds");
  np->add_option("--out", s_out, "eigenvalue CSV");

  auto* cloak = app.add_subcommand("cloak", "active cloaking experiment");
  cloak->add_option("--mode", s_mode, "interior or exterior")->check(CLI::IsMember({"interior", "exterior"}));
  cloak->add_option("--variant", s_variant, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  cloak->add_option("--anomaly", s_anomaly, "anomaly JSON");
  cloak->add_option("--boundary", s_boundary, "data on B as CSV");

  auto* walk = app.add_subcommand("random-walk", "Monte Carlo charge estimate");
  walk->add_option("--charges", s_charges, "launch charges CSV (missing nodes are 0)");
  walk->add_option("--boundary", s_boundary, "data on B as CSV, used when --charges is absent");
  walk->add_option("--walks", walks, "number of walks");
  walk->add_option("--workers", workers, "worker threads");
  walk->add_option("--out", s_out, "estimate CSV");

  auto* cwalk = app.add_subcommand("cloak-walks", "cloaking experiments reproduced with random walks");
  cwalk->add_option("--mode", s_mode, "interior or exterior")->check(CLI::IsMember({"interior", "exterior"}));
  cwalk->add_option("--variant", s_variant, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
  cwalk->add_option("--anomaly", s_anomaly, "current source JSON (exterior mode)");
  cwalk->add_option("--frames", frames, "snapshot count");
  cwalk->add_option("--walks", walks, "walks per field");
  cwalk->add_option("--workers", workers, "worker threads");
  cwalk->add_option("--boundary", s_boundary, "data on B as CSV");

  auto* exp = app.add_subcommand("export", "dump operators as CSV or JSON");
  exp->add_option("--what", what, "matrices to export (default: all)");
  exp->add_option("--format", s_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* run = app.add_subcommand("run", "replay a config or manifest file");
  run->add_option("--config", s_config, "config JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? gx::kPass : gx::kInputError;
  }

  try {
    if (run->parsed()) {
      if (cfg.out_dir.empty()) graphpot::fail(graphpot::ErrorKind::InvalidInput, "run requires --out-dir");
      auto j = graphpot::io::parse_json(graphpot::io::read_text(s_config), s_config);
      if (j.contains("config")) j = j.at("config");
      auto replay = gx::config_from_json(j);
      replay.out_dir = cfg.out_dir;
      replay.json_output = cfg.json_output;
      return gx::execute(replay, std::cout, std::cerr);
    }

    if (pou >= 0.0) cfg.pou_fraction = pou;
    if (gen_lattice->parsed()) gf.lattice = size;
    if (gen_random->parsed()) gf.random_nodes = nodes;
    cfg.graph = graph_source(gf, cfg.seed);

    if (gen->parsed()) {
      cfg.command = "generate";
      p["out"] = s_out;
    } else if (verify->parsed()) {
      cfg.command = "verify-identities";
      p["random"] = count;
      p["max_nodes"] = max_nodes;
    } else if (solve->parsed()) {
      cfg.command = "solve";
      p = {{"problem", s_problem}, {"side", s_side}, {"data", s_data}, {"out", s_out}};
    } else if (dtn->parsed()) {
      cfg.command = "dtn";
      p = {{"side", s_side}, {"out", s_out}};
    } else if (np->parsed()) {
      cfg.command = "np-spectrum";
      p = {{"out", s_out}};
    } else if (cloak->parsed()) {
      cfg.command = "cloak";
      p = {{"mode", s_mode}, {"variant", s_variant}, {"anomaly", s_anomaly}, {"boundary", s_boundary}};
    } else if (walk->parsed()) {
      cfg.command = "random-walk";
      p = {{"charges", s_charges}, {"boundary", s_boundary}, {"walks", walks}, {"workers", workers}, {"out", s_out}};
    } else if (cwalk->parsed()) {
      cfg.command = "cloak-walks";
      p = {{"mode", s_mode},       {"variant", s_variant}, {"frames", frames},    {"walks", walks},
           {"workers", workers}, {"boundary", s_boundary}, {"anomaly", s_anomaly}};
    } else if (exp->parsed()) {
      cfg.command = "export";
      p = {{"what", what}, {"format", s_format}};
    }
  } catch (const graphpot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gx::kInputError;
  }
  return gx::execute(cfg, std::cout, std::cerr);
}
