#pragma once

// Charged-particle random walks absorbed at B: transition model, exact
// expected charges, Monte Carlo estimates and the cloaking-by-walks runs.

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "graphpot/cloaking.hpp"

namespace graphpot {

struct WalkModel {
  Eigen::VectorXd c;           // c(x) = Σ_z σ({x,z})
  std::vector<char> absorbing;  // B
  NodeSet initial_set;          // 𝒰
  Eigen::VectorXd q_hat;        // zero off 𝒰
  // Per-node neighbor lists with cumulative weights for sampling.
  std::vector<Index> offsets;
  std::vector<Index> targets;
  std::vector<double> cumulative;

  Index num_nodes() const { return c.size(); }

  // Dense p(x, y) = σ({x,y})/c(x).
  Eigen::MatrixXd transition() const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(num_nodes(), num_nodes());
    for (Index x = 0; x < num_nodes(); ++x) {
      double prev = 0.0;
      for (Index k = offsets[static_cast<std::size_t>(x)]; k < offsets[static_cast<std::size_t>(x) + 1]; ++k) {
        double cum = cumulative[static_cast<std::size_t>(k)];
        p(x, targets[static_cast<std::size_t>(k)]) = (cum - prev) / c[x];
        prev = cum;
      }
    }
    return p;
  }
};

inline WalkModel walk_model(const PartitionedGraph& graph, NodeSet initial_set, const Eigen::VectorXd& q_hat) {
  const Index n = graph.num_nodes();
  if (q_hat.size() != n) fail(ErrorKind::DimensionMismatch, "initial charges must have one value per node");
  if (initial_set.empty()) fail(ErrorKind::InvalidInput, "initial set is empty");
  std::sort(initial_set.begin(), initial_set.end());
  initial_set.erase(std::unique(initial_set.begin(), initial_set.end()), initial_set.end());
  std::vector<char> in_u(static_cast<std::size_t>(n), 0);
  for (Index i : initial_set) {
    if (i < 0 || i >= n) fail(ErrorKind::UnknownNode, "initial node index out of range");
    in_u[static_cast<std::size_t>(i)] = 1;
  }
  for (Index i = 0; i < n; ++i) {
    if (!in_u[static_cast<std::size_t>(i)] && q_hat[i] != 0.0) {
      fail(ErrorKind::InvalidInput, "charge given outside the initial set at node " + std::to_string(graph.id(i)));
    }
  }
  WalkModel m;
  m.initial_set = std::move(initial_set);
  m.q_hat = q_hat;
  m.c = Eigen::VectorXd::Zero(n);
  m.absorbing.assign(static_cast<std::size_t>(n), 0);
  for (Index i : graph.layout().range(Region::B).to_set()) m.absorbing[static_cast<std::size_t>(i)] = 1;
  m.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index x = 0; x < n; ++x) {
    double running = 0.0;
    for (const auto& inc : graph.neighbors(x)) {
      running += graph.edge(inc.edge).sigma;
      m.targets.push_back(inc.neighbor);
      m.cumulative.push_back(running);
    }
    m.c[x] = running;
    m.offsets[static_cast<std::size_t>(x) + 1] = static_cast<Index>(m.targets.size());
  }
  return m;
}

// c(x) = Σ_z σ({x,z})
inline Eigen::VectorXd node_weights(const PartitionedGraph& graph) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(graph.num_nodes());
  for (const auto& e : graph.edges()) {
    c[e.a] += e.sigma;
    c[e.b] += e.sigma;
  }
  return c;
}

// Charges for walks launched from B carrying c|_B f, so that q/c = f on B.
inline Eigen::VectorXd boundary_charges(const PartitionedGraph& graph, const Eigen::VectorXd& f_b) {
  const auto b = graph.layout().range(Region::B);
  if (f_b.size() != b.size()) fail(ErrorKind::DimensionMismatch, "Dirichlet data must have one value per B node");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(graph.num_nodes());
  q.segment(b.begin, b.size()) = node_weights(graph).segment(b.begin, b.size()).cwiseProduct(f_b);
  return q;
}

// Nodes where q̂ is nonzero (a natural 𝒰 for a given charge vector).
inline NodeSet charge_support(const Eigen::VectorXd& q_hat) {
  NodeSet out;
  for (Index i = 0; i < q_hat.size(); ++i) {
    if (q_hat[i] != 0.0) out.push_back(i);
  }
  return out;
}

// q = c·u with (L u)|_{𝒱°} = q̂|_{𝒱°}, u|_B = q̂|_B / c|_B.
inline NodeField expected_charge_exact(const PartitionedGraph& graph, const WalkModel& model) {
  const auto& lay = graph.layout();
  const auto b = lay.range(Region::B);
  const auto vo = lay.interior_nodes();
  Eigen::MatrixXd L = weighted_laplacian(graph, graph.sigma());
  NodeField u = NodeField::Zero(lay.num_nodes());
  u.segment(b.begin, b.size()) = model.q_hat.segment(b.begin, b.size()).cwiseQuotient(model.c.segment(b.begin, b.size()));
  Eigen::LLT<Eigen::MatrixXd> llt(L.block(vo.begin, vo.begin, vo.size(), vo.size()));
  if (llt.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "L[V°,V°] is not positive definite");
  Eigen::VectorXd rhs = model.q_hat.segment(vo.begin, vo.size()) - L.block(vo.begin, b.begin, vo.size(), b.size()) *
                                                                         u.segment(b.begin, b.size());
  u.segment(vo.begin, vo.size()) = llt.solve(rhs);
  return model.c.cwiseProduct(u);
}

// max over x of |q(x) − q̂(x) − Σ_y p(y,x) q(y)| on 𝒱° and |q(x) − q̂(x)| on B.
inline double recursion_residual(const WalkModel& model, const NodeField& q) {
  const Eigen::MatrixXd p = model.transition();
  NodeField r = q - model.q_hat;
  double worst = 0.0;
  const NodeField inflow = p.transpose() * q;
  for (Index x = 0; x < q.size(); ++x) {
    // A walk launched from B still takes its first step, so B neighbors
    // feed 𝒱° nodes as well.
    double in = model.absorbing[static_cast<std::size_t>(x)] ? 0.0 : inflow[x];
    worst = std::max(worst, std::abs(r[x] - in));
  }
  return worst;
}

struct WalkOptions {
  std::uint64_t walks = 100000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  std::uint64_t max_steps = 1000000000ULL;
};

struct ChargeEstimate {
  NodeField q_tilde;
  NodeField u_tilde;  // q_tilde / c
  std::uint64_t walks = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Walk k draws from its own generator, a pure function of (seed, k).
inline std::mt19937_64 walk_rng(std::uint64_t seed, std::uint64_t k) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ k));
}

inline constexpr std::uint64_t kBlockSize = 1024;

// Add q̂(X₀) at X₀, …, X_{τ_B−1} for walks [first, last) into `acc`.
inline void run_walks(const WalkModel& m, std::uint64_t seed, std::uint64_t first, std::uint64_t last,
                      std::uint64_t max_steps, Eigen::VectorXd& acc) {
  const std::size_t count = m.initial_set.size();
  for (std::uint64_t k = first; k < last; ++k) {
    auto rng = walk_rng(seed, k);
    Index x = m.initial_set[std::uniform_int_distribution<std::size_t>(0, count - 1)(rng)];
    const double charge = m.q_hat[x];
    std::uint64_t steps = 0;
    while (true) {
      acc[x] += charge;
      const auto lo = m.offsets[static_cast<std::size_t>(x)];
      const auto hi = m.offsets[static_cast<std::size_t>(x) + 1];
      const double total = m.cumulative[static_cast<std::size_t>(hi - 1)];
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      auto begin = m.cumulative.begin() + lo;
      auto end = m.cumulative.begin() + hi;
      auto it = std::upper_bound(begin, end, r);
      if (it == end) --it;
      x = m.targets[static_cast<std::size_t>(it - m.cumulative.begin())];
      if (m.absorbing[static_cast<std::size_t>(x)]) break;
      if (++steps >= max_steps) fail(ErrorKind::NoAbsorption, "walk exceeded the step cap without reaching B");
    }
  }
}

// Σ over walks [first, last) of the per-walk accumulations. Walks are grouped
// into fixed blocks whose partial sums are added in block order, so the
// result does not depend on the number of workers.
inline Eigen::VectorXd accumulate_walks(const WalkModel& m, std::uint64_t seed, std::uint64_t first,
                                        std::uint64_t last, unsigned workers, std::uint64_t max_steps) {
  const Index n = m.num_nodes();
  const std::uint64_t total = last > first ? last - first : 0;
  const std::uint64_t blocks = (total + kBlockSize - 1) / kBlockSize;
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(blocks), Eigen::VectorXd::Zero(n));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (std::uint64_t blk = next++; blk < blocks && !failed; blk = next++) {
        std::uint64_t a = first + blk * kBlockSize;
        std::uint64_t b = std::min(last, a + kBlockSize);
        run_walks(m, seed, a, b, max_steps, partial[static_cast<std::size_t>(blk)]);
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(blocks, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  for (const auto& p : partial) sum += p;
  return sum;
}

inline ChargeEstimate make_estimate(const WalkModel& m, const Eigen::VectorXd& sum, std::uint64_t walks,
                                    std::uint64_t seed) {
  ChargeEstimate e;
  e.walks = walks;
  e.seed = seed;
  e.q_tilde = sum * (static_cast<double>(m.initial_set.size()) / static_cast<double>(walks));
  e.u_tilde = e.q_tilde.cwiseQuotient(m.c);
  return e;
}

}  // namespace detail

inline ChargeEstimate simulate_walks(const WalkModel& model, const WalkOptions& opt) {
  if (opt.walks == 0) fail(ErrorKind::InvalidInput, "need at least one walk");
  auto sum = detail::accumulate_walks(model, opt.seed, 0, opt.walks, opt.workers, opt.max_steps);
  return detail::make_estimate(model, sum, opt.walks, opt.seed);
}

// Cumulative estimates after each of `frames` equal batches of walks. The
// last frame uses all opt.walks walks.
inline std::vector<ChargeEstimate> simulate_walk_frames(const WalkModel& model, const WalkOptions& opt,
                                                        std::uint64_t frames) {
  if (opt.walks == 0 || frames == 0) fail(ErrorKind::InvalidInput, "need at least one walk and one frame");
  frames = std::min(frames, opt.walks);
  std::vector<ChargeEstimate> out;
  Eigen::VectorXd running = Eigen::VectorXd::Zero(model.num_nodes());
  std::uint64_t done = 0;
  for (std::uint64_t f = 1; f <= frames; ++f) {
    std::uint64_t upto = opt.walks * f / frames;
    running += detail::accumulate_walks(model, opt.seed, done, upto, opt.workers, opt.max_steps);
    done = upto;
    out.push_back(detail::make_estimate(model, running, done, opt.seed));
  }
  return out;
}

// E(f, g; A) = ‖(f−g)|_A‖₂ / ‖f|_A‖₂
inline double relative_error(const NodeField& f, const NodeField& g, std::span<const Index> nodes) {
  double num = 0.0;
  double den = 0.0;
  for (Index i : nodes) {
    double d = f[i] - g[i];
    num += d * d;
    den += f[i] * f[i];
  }
  if (den == 0.0) fail(ErrorKind::ZeroReference, "reference field vanishes on the comparison set");
  return std::sqrt(num / den);
}

inline double relative_error(const NodeField& f, const NodeField& g) {
  if (f.size() != g.size()) fail(ErrorKind::DimensionMismatch, "field lengths differ");
  NodeSet all(static_cast<std::size_t>(f.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return relative_error(f, g, all);
}

// Exact vs empirical fields for one set of launched charges.
struct WalkComparison {
  NodeField u;        // exact q/c
  ChargeEstimate estimate;
  double error = 0.0;  // E(u, ũ; 𝒱)
};

inline WalkComparison compare_walks(const PartitionedGraph& graph, const WalkModel& model, const WalkOptions& opt) {
  WalkComparison w;
  w.u = expected_charge_exact(graph, model).cwiseQuotient(model.c);
  w.estimate = simulate_walks(model, opt);
  w.error = relative_error(w.u, w.estimate.u_tilde);
  return w;
}

// Launch sets: particles from B carrying c|_B f, particles from the cloak
// injection nodes carrying the cloak currents, and both together.
struct WalkCloakResult {
  WalkComparison background;
  WalkComparison cloak;
  WalkComparison total;
  std::vector<ChargeEstimate> background_frames, cloak_frames, total_frames;
};

struct WalkCloakOptions {
  WalkOptions walks;
  std::uint64_t frames = 0;
};

// Background charges q_b (any q̂) and cloak currents φ (zero on B). Each of
// the three runs uses a distinct seed stream derived from opt.walks.seed.
inline WalkCloakResult walk_cloak_experiment(const PartitionedGraph& graph, const NodeField& background_charges,
                                             const NodeField& cloak_currents, const WalkCloakOptions& opt) {
  auto run = [&](const NodeField& q, std::uint64_t stream, std::vector<ChargeEstimate>& frames) {
    if (q.isZero(0.0)) {
      // Nothing to launch: every field is identically zero.
      WalkComparison none;
      none.u = NodeField::Zero(q.size());
      none.estimate = {none.u, none.u, opt.walks.walks, opt.walks.seed};
      return none;
    }
    auto model = walk_model(graph, charge_support(q), q);
    WalkOptions o = opt.walks;
    o.seed = detail::splitmix64(opt.walks.seed + stream);
    auto cmp = compare_walks(graph, model, o);
    if (opt.frames > 0) frames = simulate_walk_frames(model, o, opt.frames);
    return cmp;
  };
  WalkCloakResult r;
  r.background = run(background_charges, 0, r.background_frames);
  r.cloak = run(cloak_currents, 1, r.cloak_frames);
  r.total = run(background_charges + cloak_currents, 2, r.total_frames);
  return r;
}

// Interior cloak of the Dirichlet solution with data f on B, checked by walks.
inline WalkCloakResult cloak_via_walks(const ProblemGraph& problem, const Eigen::VectorXd& f_b, Side variant,
                                       const WalkCloakOptions& opt) {
  auto split = split_laplacian(problem.graph, problem.pou);
  auto green = assemble_green(split);
  NodeField u = solve_full_dirichlet(split, f_b);
  auto cloak = interior_cloak(split, green, u, variant);
  return walk_cloak_experiment(problem.graph, boundary_charges(problem.graph, f_b), cloak.plan.currents, opt);
}

// Exterior cloak of interior sources φ (B grounded), checked by walks.
inline WalkCloakResult exterior_cloak_via_walks(const ProblemGraph& problem, const NodeField& sources, Side variant,
                                                const WalkCloakOptions& opt) {
  auto split = split_laplacian(problem.graph, problem.pou);
  auto green = assemble_green(split);
  NodeField u_star = solve_source_problem(green, sources);
  auto cloak = exterior_cloak(split, green, u_star, variant);
  return walk_cloak_experiment(problem.graph, sources, cloak.plan.currents, opt);
}

}  // namespace graphpot
