#pragma once

// Cube-and-conquer: lookahead splitting with eliminated-variable stopping,
// a conquer worker pool, re-cubing of oversized leaves and certificate
// bundles.

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ramsey/bundle.hpp"
#include "ramsey/cnf.hpp"
#include "ramsey/encode.hpp"
#include "ramsey/orderly.hpp"
#include "ramsey/proofcheck.hpp"
#include "ramsey/solver.hpp"

namespace ramsey {

struct CncConfig {
  // Unset: chosen per instance by resolve().
  std::optional<int> elim_threshold;
  int recube_extra = 40;
  std::uint64_t proof_cap = std::uint64_t{7} << 30;
  std::uint64_t proof_check_interval = DratWriter::kCapCheckInterval;
  std::uint64_t simplify_budget = 10000;
  unsigned workers = 0;  // 0 = available CPUs
  int candidate_pool = 0;  // 0 = 3n
  bool cas = true;
  CanonicityMode canonicity = CanonicityMode::kFull;
  MinimizationRule rule = MinimizationRule::kWitnessPrefix;
  std::uint64_t seed = 0;
  std::optional<std::chrono::milliseconds> time_budget;
  bool verify = true;
  std::optional<fs::path> scratch;

  void validate() const {
    if (elim_threshold && *elim_threshold < 0) throw std::invalid_argument("config: elim_threshold must be >= 0");
    if (recube_extra <= 0) throw std::invalid_argument("config: recube_extra must be positive");
    if (proof_cap == 0) throw std::invalid_argument("config: proof_cap must be positive");
    if (proof_check_interval == 0) throw std::invalid_argument("config: proof_check_interval must be positive");
    if (simplify_budget == 0) throw std::invalid_argument("config: simplify_budget must be positive");
    if (candidate_pool < 0) throw std::invalid_argument("config: candidate_pool must be >= 0");
    if (time_budget && time_budget->count() <= 0) throw std::invalid_argument("config: time budget must be positive");
  }

  unsigned worker_count() const { return workers ? workers : std::max(1u, std::thread::hardware_concurrency()); }

  static int default_threshold(const RamseyInstanceSpec& spec) {
    const bool r93 = spec.p == 8 && spec.q == 3;
    if (r93 && spec.n == 28 && !spec.edge_count) return 120;
    if (r93 && spec.n == 27 && spec.edge_count == 271) return 100;
    return num_edges(spec.n) / 3;
  }

  // Copy with per-instance defaults filled in.
  CncConfig resolve(const RamseyInstanceSpec& spec) const {
    CncConfig c = *this;
    if (!c.elim_threshold) c.elim_threshold = default_threshold(spec);
    if (c.candidate_pool == 0) c.candidate_pool = 3 * spec.n;
    return c;
  }

  static CncConfig for_instance(const RamseyInstanceSpec& spec) { return CncConfig{}.resolve(spec); }
};

enum class CubeStatus { kOpen, kUnsat, kSat, kRecube, kUnknown };

inline const char* cube_status_name(CubeStatus s) {
  switch (s) {
    case CubeStatus::kOpen: return "open";
    case CubeStatus::kUnsat: return "unsat";
    case CubeStatus::kSat: return "sat";
    case CubeStatus::kRecube: return "recube";
    case CubeStatus::kUnknown: return "unknown";
  }
  return "?";
}

struct CubeNode {
  Clause literals;
  std::optional<std::size_t> parent;
  std::optional<std::array<std::size_t, 2>> children;
  int eliminated = 0;
  int threshold = 0;
  CubeStatus status = CubeStatus::kOpen;
  // Settled by simplification during cubing; still certified by conquer.
  bool refuted = false;
  bool sat_hint = false;
  std::uint64_t proof_bytes = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t trusted = 0;
  double seconds = 0;
};

struct CubeTree {
  std::vector<CubeNode> nodes;
  bool root_unsat = false;
  std::size_t recubes = 0;

  bool is_leaf(std::size_t id) const { return !nodes[id].children.has_value(); }

  // Leaves in depth-first order, first child first.
  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    if (nodes.empty()) return out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const std::size_t id = stack.back();
      stack.pop_back();
      if (is_leaf(id)) {
        out.push_back(id);
      } else {
        stack.push_back((*nodes[id].children)[1]);
        stack.push_back((*nodes[id].children)[0]);
      }
    }
    return out;
  }

  std::vector<Clause> cubes() const {
    std::vector<Clause> out;
    for (std::size_t id : leaves()) out.push_back(nodes[id].literals);
    return out;
  }
};

namespace detail {

inline void inject_units(Solver& s, const Clause& cube) {
  for (Literal l : cube) s.inject_external_clause(std::span<const Literal>(&l, 1), false);
}

inline OrderlyOptions orderly_options(const CncConfig& cfg) {
  OrderlyOptions oo;
  oo.mode = cfg.canonicity;
  oo.rule = cfg.rule;
  return oo;
}

inline SolverOptions solver_options(const CncConfig& cfg, int n) {
  SolverOptions so;
  so.hook_vars = cfg.cas ? num_edges(n) : 0;
  so.seed = cfg.seed;
  return so;
}

}  // namespace detail

// Propagation lookahead over both polarities. Returns nothing when some
// candidate fails in both polarities (the node is unsatisfiable) or the
// probes refute the root.
inline std::optional<int> choose_split_var(Solver& s, std::span<const int> candidates, int count_upto) {
  if (candidates.empty()) throw std::invalid_argument("choose_split_var: no candidates");
  std::optional<int> best;
  long long best_min = -1, best_prod = -1;
  const long long all = count_upto + 1;
  for (int v : candidates) {
    if (s.root_value(v) != 0) continue;
    const auto a = s.probe(Literal::pos(v), count_upto);
    const auto b = s.probe(Literal::neg(v), count_upto);
    if (s.known_unsat() || (!a && !b)) return std::nullopt;
    const long long ca = a ? *a : all, cb = b ? *b : all;
    const long long mn = std::min(ca, cb), prod = ca * cb;
    if (mn > best_min || (mn == best_min && prod > best_prod)) {
      best = v;
      best_min = mn;
      best_prod = prod;
    }
  }
  if (!best) {
    // Every candidate became fixed while probing; pick any free one.
    for (int v : candidates)
      if (s.root_value(v) == 0) return v;
  }
  return best;
}

namespace detail {

class Cuber {
 public:
  Cuber(const CnfFormula& f, int n, const CncConfig& cfg, const std::atomic<bool>* stop)
      : f_(f), n_(n), cfg_(cfg), stop_(stop) {}

  // Splits `id` recursively; `force` splits it even when over threshold.
  void expand(CubeTree& tree, std::size_t id, int threshold, const std::vector<Clause>& carried, bool force) {
    tree.nodes[id].threshold = threshold;
    std::vector<Clause> derived;
    std::optional<int> split;
    {
      Solver s(f_, solver_options(cfg_, n_));
      OrderlyHook hook(n_, orderly_options(cfg_));
      if (cfg_.cas) s.connect_hook(&hook);
      if (stop_) s.set_interrupt(stop_);
      inject_units(s, tree.nodes[id].literals);
      for (const Clause& c : carried) s.inject_external_clause(c, false);
      const SolveResult r = s.solve(cfg_.simplify_budget);
      CubeNode& node = tree.nodes[id];
      if (r.status == SolveStatus::kUnsat) {
        node.refuted = true;
        node.eliminated = num_edges(n_);
        return;
      }
      if (r.status == SolveStatus::kSat) {
        node.sat_hint = true;
        node.eliminated = num_edges(n_);
        return;
      }
      node.eliminated = s.count_fixed(num_edges(n_));
      if (r.reason == StopReason::kInterrupted) return;
      if (!force && (threshold == 0 || node.eliminated > threshold)) return;
      std::vector<int> cands;
      for (int v = 1; v <= num_edges(n_) && static_cast<int>(cands.size()) < cfg_.candidate_pool; ++v)
        if (s.root_value(v) == 0) cands.push_back(v);
      if (cands.empty()) return;
      split = choose_split_var(s, cands, num_edges(n_));
      if (!split) {
        node.refuted = true;
        return;
      }
      for (const auto& e : s.export_clauses())
        if (!e.original) derived.push_back(e.literals);
    }
    if (stop_ && stop_->load()) return;
    std::array<std::size_t, 2> kids{};
    for (int side = 0; side < 2; ++side) {
      CubeNode child;
      child.literals = tree.nodes[id].literals;
      child.literals.push_back(Literal::make(*split, side == 0));
      child.parent = id;
      kids[static_cast<std::size_t>(side)] = tree.nodes.size();
      tree.nodes.push_back(std::move(child));
    }
    tree.nodes[id].children = kids;
    for (std::size_t k : kids) expand(tree, k, threshold, derived, false);
  }

 private:
  const CnfFormula& f_;
  int n_;
  const CncConfig& cfg_;
  const std::atomic<bool>* stop_;
};

}  // namespace detail

// Builds the split tree for an order-n instance. Refuting the root gives a
// single leaf and sets root_unsat.
inline CubeTree cube(const CnfFormula& f, int n, const CncConfig& cfg, const std::atomic<bool>* stop = nullptr) {
  if (!cfg.elim_threshold || cfg.candidate_pool <= 0) throw std::invalid_argument("cube: unresolved config");
  CubeTree tree;
  tree.nodes.emplace_back();
  detail::Cuber(f, n, cfg, stop).expand(tree, 0, *cfg.elim_threshold, {}, false);
  tree.root_unsat = tree.nodes[0].refuted;
  return tree;
}

// Replaces a leaf by a subtree built with a raised threshold.
inline void recube(CubeTree& tree, std::size_t leaf, const CnfFormula& f, int n, const CncConfig& cfg,
                   const std::atomic<bool>* stop = nullptr) {
  if (!tree.is_leaf(leaf)) throw std::invalid_argument("recube: node is not a leaf");
  CubeNode& node = tree.nodes[leaf];
  const int threshold = node.threshold + cfg.recube_extra;
  node.status = CubeStatus::kRecube;
  node.refuted = node.sat_hint = false;
  detail::Cuber(f, n, cfg, stop).expand(tree, leaf, threshold, {}, true);
  // A leaf that could not be split again stays unresolved.
  if (tree.is_leaf(leaf)) tree.nodes[leaf].status = CubeStatus::kUnknown;
  ++tree.recubes;
}

struct LeafFiles {
  fs::path proof, witnesses, model;
};

struct LeafOutcome {
  SolveStatus status = SolveStatus::kUnknown;
  StopReason reason = StopReason::kNone;
  Assignment model;
  std::uint64_t proof_bytes = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t trusted = 0;
  double seconds = 0;
};

// Solves f ∧ cube with the orderly hook, streaming the proof and witness log.
inline LeafOutcome solve_leaf(const CnfFormula& f, int n, const Clause& cube_lits, const CncConfig& cfg,
                              const LeafFiles& files, const std::atomic<bool>* stop) {
  const auto t0 = std::chrono::steady_clock::now();
  LeafOutcome out;
  std::ofstream proof_os(files.proof, std::ios::binary);
  std::ofstream wit_os(files.witnesses, std::ios::binary);
  if (!proof_os || !wit_os) throw std::runtime_error("cannot create leaf output in " + files.proof.parent_path().string());
  {
    DratWriter proof(proof_os, cfg.proof_cap, cfg.proof_check_interval);
    WitnessLog log(wit_os, cfg.rule);
    Solver s(f, detail::solver_options(cfg, n));
    OrderlyHook hook(n, detail::orderly_options(cfg), &log);
    if (cfg.cas) s.connect_hook(&hook);
    s.connect_proof(&proof);
    if (stop) s.set_interrupt(stop);
    detail::inject_units(s, cube_lits);
    SolveResult r = s.solve();
    proof.flush();
    log.flush();
    out.status = r.status;
    out.reason = r.reason;
    out.conflicts = r.conflicts;
    out.proof_bytes = proof.bytes();
    out.trusted = hook.stats().blocked;
    if (r.status == SolveStatus::kSat) {
      for (Literal l : cube_lits)
        if (!literal_true(r.model, l)) throw std::logic_error("leaf model contradicts its cube");
      out.model = std::move(r.model);
      std::ofstream m(files.model);
      write_model(m, out.model);
      if (!m) throw std::runtime_error("cannot write " + files.model.string());
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct ConquerResult {
  SolveStatus status = SolveStatus::kUnknown;
  std::optional<std::size_t> sat_leaf;  // node id
  Assignment model;
};

inline LeafFiles node_files(const fs::path& work, std::size_t id) {
  const std::string base = "node_" + std::to_string(id);
  return {work / (base + ".drat"), work / (base + ".wit"), work / (base + ".model")};
}

// Solves every open leaf on a worker pool. Leaves over the proof cap are
// re-cubed and their partial files dropped. Results land in `work`.
inline ConquerResult conquer(CubeTree& tree, const CnfFormula& f, int n, const CncConfig& cfg, const fs::path& work,
                             std::atomic<bool>* stop = nullptr) {
  std::atomic<bool> local_stop{false};
  if (!stop) stop = &local_stop;
  fs::create_directories(work);
  ConquerResult res;
  std::mutex mu;
  for (;;) {
    std::vector<std::size_t> todo;
    for (std::size_t id : tree.leaves())
      if (tree.nodes[id].status == CubeStatus::kOpen) todo.push_back(id);
    if (todo.empty()) break;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto work_fn = [&]() {
      for (std::size_t i; (i = next++) < todo.size();) {
        const std::size_t id = todo[i];
        CubeNode& node = tree.nodes[id];
        if (stop->load()) {
          node.status = CubeStatus::kUnknown;
          continue;
        }
        LeafOutcome out;
        for (int attempt = 0;; ++attempt) {
          try {
            out = solve_leaf(f, n, node.literals, cfg, node_files(work, id), stop);
            break;
          } catch (...) {
            if (attempt == 1) {
              std::lock_guard<std::mutex> lock(mu);
              if (!failure) failure = std::current_exception();
              stop->store(true);
              out = {};
              break;
            }
          }
        }
        node.proof_bytes = out.proof_bytes;
        node.conflicts = out.conflicts;
        node.trusted = out.trusted;
        node.seconds = out.seconds;
        if (out.status != SolveStatus::kSat && out.proof_bytes > cfg.proof_cap) {
          node.status = CubeStatus::kRecube;
        } else if (out.status == SolveStatus::kUnsat) {
          node.status = CubeStatus::kUnsat;
        } else if (out.status == SolveStatus::kSat) {
          node.status = CubeStatus::kSat;
          std::lock_guard<std::mutex> lock(mu);
          if (!res.sat_leaf) {
            res.sat_leaf = id;
            res.model = out.model;
          }
          stop->store(true);
        } else if (out.reason == StopReason::kProofCap) {
          node.status = CubeStatus::kRecube;
        } else {
          node.status = CubeStatus::kUnknown;
        }
      }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.worker_count(), todo.size()));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work_fn);
    work_fn();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    bool recubed = false;
    for (std::size_t id : todo) {
      if (tree.nodes[id].status != CubeStatus::kRecube || stop->load()) continue;
      const LeafFiles lf = node_files(work, id);
      fs::remove(lf.proof);
      fs::remove(lf.witnesses);
      recube(tree, id, f, n, cfg, stop);
      recubed = true;
    }
    if (!recubed) break;
  }
  bool all_unsat = true;
  for (std::size_t id : tree.leaves()) {
    if (tree.nodes[id].status == CubeStatus::kRecube) tree.nodes[id].status = CubeStatus::kUnknown;
    all_unsat = all_unsat && tree.nodes[id].status == CubeStatus::kUnsat;
  }
  if (res.sat_leaf) {
    res.status = SolveStatus::kSat;
  } else if (all_unsat) {
    res.status = SolveStatus::kUnsat;
  }
  return res;
}

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageTime {
  double wall = 0;
  double cpu = 0;
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kNames{"encode", "cube", "conquer", "verify", "total"};
  return kNames;
}

struct PipelineResult {
  std::string verdict = "unknown";  // exists | not-exists | unknown
  fs::path bundle;
  std::size_t cubes = 0;
  std::size_t recubes = 0;
  std::uint64_t proof_bytes = 0;
  std::map<std::string, StageTime> times;
  std::optional<BundleReport> check;
  std::optional<AdjMatrix> graph;
};

namespace detail {

class StageClock {
 public:
  StageClock() : wall_(std::chrono::steady_clock::now()), cpu_(std::clock()) {}
  StageTime elapsed() const {
    return {std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_).count(),
            static_cast<double>(std::clock() - cpu_) / CLOCKS_PER_SEC};
  }

 private:
  std::chrono::steady_clock::time_point wall_;
  std::clock_t cpu_;
};

// Sets `flag` once the budget elapses; stops early on destruction.
class Deadline {
 public:
  Deadline(std::optional<std::chrono::milliseconds> budget, std::atomic<bool>& flag) {
    if (!budget) return;
    thread_ = std::thread([this, budget, &flag] {
      std::unique_lock<std::mutex> lock(mu_);
      if (!cv_.wait_for(lock, *budget, [this] { return done_; })) flag.store(true);
    });
  }
  ~Deadline() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool done_ = false;
  std::thread thread_;
};

inline void move_file(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::rename(from, to, ec);
  if (!ec) return;
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
  fs::remove(from);
}

inline std::string format_seconds(double s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << s;
  return os.str();
}

inline fs::path scratch_root(const CncConfig& cfg, const fs::path& out) {
  if (cfg.scratch) return *cfg.scratch;
  if (const char* env = std::getenv("RAMSEY_SCRATCH"); env && *env) return fs::path(env);
  return out / ".work";
}

}  // namespace detail

inline void write_spec(Manifest& m, const RamseyInstanceSpec& spec) {
  m.set("spec.p", std::to_string(spec.p));
  m.set("spec.q", std::to_string(spec.q));
  m.set("spec.n", std::to_string(spec.n));
  m.set("spec.edges", spec.edge_count ? std::to_string(*spec.edge_count) : "none");
  m.set("spec.degree",
        spec.degree ? std::to_string(spec.degree->lo) + ":" + std::to_string(spec.degree->hi) : "none");
  m.set("spec.lex_sb", spec.enable_lex_sb ? "1" : "0");
  m.set("spec.cardinality", spec.enable_cardinality ? "1" : "0");
}

inline void write_config(Manifest& m, const CncConfig& cfg) {
  m.set("config.elim_threshold", std::to_string(cfg.elim_threshold.value_or(-1)));
  m.set("config.recube_extra", std::to_string(cfg.recube_extra));
  m.set("config.proof_cap", std::to_string(cfg.proof_cap));
  m.set("config.proof_check_interval", std::to_string(cfg.proof_check_interval));
  m.set("config.simplify_budget", std::to_string(cfg.simplify_budget));
  m.set("config.workers", std::to_string(cfg.worker_count()));
  m.set("config.candidate_pool", std::to_string(cfg.candidate_pool));
  m.set("config.cas", cfg.cas ? "on" : "off");
  m.set("config.canonicity", cfg.canonicity == CanonicityMode::kFull ? "full" : "pseudo");
  m.set("config.rule", rule_name(cfg.rule));
  m.set("config.seed", std::to_string(cfg.seed));
  m.set("config.time_budget_ms", cfg.time_budget ? std::to_string(cfg.time_budget->count()) : "none");
}

// Rebuilds the split tree of a cube list forming an exact binary cover.
inline CubeTree tree_from_cubes(const std::vector<Clause>& cubes, int threshold) {
  if (Verdict v = verify_cube_cover(cubes); !v.accepted()) throw std::invalid_argument("cubes: " + v.detail);
  CubeTree tree;
  tree.nodes.emplace_back();
  tree.nodes[0].threshold = threshold;
  for (const Clause& c : cubes) {
    std::size_t cur = 0;
    for (std::size_t d = 0; d < c.size(); ++d) {
      if (!tree.nodes[cur].children) {
        std::array<std::size_t, 2> kids{};
        for (int side = 0; side < 2; ++side) {
          CubeNode child;
          child.literals.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(d) + 1);
          if (side == 1) child.literals.back() = ~child.literals.back();
          child.parent = cur;
          child.threshold = threshold;
          kids[static_cast<std::size_t>(side)] = tree.nodes.size();
          tree.nodes.push_back(std::move(child));
        }
        tree.nodes[cur].children = kids;
      }
      const auto kids = *tree.nodes[cur].children;
      cur = tree.nodes[kids[0]].literals.back() == c[d] ? kids[0] : kids[1];
    }
  }
  return tree;
}

namespace detail {

inline PipelineResult run_pipeline(const RamseyInstanceSpec& spec, const CncConfig& user_cfg, const fs::path& out,
                                   const CnfFormula* given_f, const std::vector<Clause>* given_cubes) {
  spec.validate();
  user_cfg.validate();
  const CncConfig cfg = user_cfg.resolve(spec);
  PipelineResult res;
  res.bundle = out;
  const StageClock total;
  std::atomic<bool> stop{false};
  Deadline deadline(cfg.time_budget, stop);

  for (const char* sub : {"cnf", "cubes", "proofs", "witnesses"}) fs::remove_all(out / sub);
  fs::remove(out / BundlePaths::kManifest);
  for (const char* sub : {"cnf", "cubes", "proofs", "witnesses"}) fs::create_directories(out / sub);

  detail::StageClock clock;
  const CnfFormula f = given_f ? *given_f : encode_ramsey(spec);
  {
    std::ofstream cnf(out / BundlePaths::kCnf);
    write_dimacs(cnf, f);
    std::ofstream meta(out / BundlePaths::kMeta);
    write_metadata(meta, spec, f);
    if (!cnf || !meta) throw PipelineError("encode", "cannot write CNF to " + out.string());
  }
  res.times["encode"] = clock.elapsed();

  clock = {};
  CubeTree tree = given_cubes ? tree_from_cubes(*given_cubes, *cfg.elim_threshold) : cube(f, spec.n, cfg, &stop);
  res.times["cube"] = clock.elapsed();

  clock = {};
  const fs::path work = scratch_root(cfg, out) / ("run_" + sha256_hex(fs::absolute(out).string()).substr(0, 16));
  fs::remove_all(work);
  ConquerResult cr = conquer(tree, f, spec.n, cfg, work, &stop);
  res.times["conquer"] = clock.elapsed();

  const std::vector<std::size_t> leaves = tree.leaves();
  res.cubes = leaves.size();
  res.recubes = tree.recubes;
  res.verdict = cr.status == SolveStatus::kSat ? "exists" : cr.status == SolveStatus::kUnsat ? "not-exists" : "unknown";
  if (cr.status == SolveStatus::kSat) res.graph = AdjMatrix::from_bits(spec.n, [&] {
    std::vector<std::uint8_t> bits;
    for (int v = 1; v <= num_edges(spec.n); ++v) bits.push_back(cr.model[static_cast<std::size_t>(v)] > 0 ? 1 : 0);
    return bits;
  }());

  {
    std::ofstream cubes_os(out / BundlePaths::kCubes);
    write_cubes(cubes_os, tree.cubes());
    if (!cubes_os) throw PipelineError("package", "cannot write cubes");
  }
  Manifest m;
  m.set("format", "ramsey-bundle 1");
  m.set("label", spec.label());
  write_spec(m, spec);
  write_config(m, cfg);
  m.set("verdict", res.verdict);
  m.set("leaves", std::to_string(leaves.size()));
  m.set("recubes", std::to_string(tree.recubes));
  m.set("nodes", std::to_string(tree.nodes.size()));
  std::vector<std::string> artifacts{BundlePaths::kCnf, BundlePaths::kMeta, BundlePaths::kCubes};
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const CubeNode& node = tree.nodes[leaves[i]];
    const std::string key = "leaf." + std::to_string(i);
    m.set(key + ".status", cube_status_name(node.status));
    m.set(key + ".eliminated", std::to_string(node.eliminated));
    m.set(key + ".conflicts", std::to_string(node.conflicts));
    m.set(key + ".proof_bytes", std::to_string(node.proof_bytes));
    m.set(key + ".trusted", std::to_string(node.trusted));
    m.set(key + ".seconds", detail::format_seconds(node.seconds));
    const LeafFiles lf = node_files(work, leaves[i]);
    if (node.status == CubeStatus::kUnsat) {
      detail::move_file(lf.proof, out / BundlePaths::proof(i));
      detail::move_file(lf.witnesses, out / BundlePaths::witnesses(i));
      artifacts.push_back(BundlePaths::proof(i));
      artifacts.push_back(BundlePaths::witnesses(i));
      res.proof_bytes += node.proof_bytes;
    } else if (node.status == CubeStatus::kSat) {
      detail::move_file(lf.model, out / BundlePaths::model(i));
      artifacts.push_back(BundlePaths::model(i));
    }
  }
  fs::remove_all(work);
  if (!cfg.scratch && !std::getenv("RAMSEY_SCRATCH")) {
    std::error_code ec;
    fs::remove(out / ".work", ec);
  }
  for (const auto& rel : artifacts) m.set("artifact." + rel, "sha256:" + sha256_file(out / rel));
  m.set("stats.cubes", std::to_string(res.cubes));
  m.set("stats.proof_bytes", std::to_string(res.proof_bytes));
  auto put_times = [&] {
    for (const auto& [stage, t] : res.times) {
      m.set("time." + stage + ".wall", detail::format_seconds(t.wall));
      m.set("time." + stage + ".cpu", detail::format_seconds(t.cpu));
    }
  };
  put_times();
  m.save(out / BundlePaths::kManifest);

  clock = {};
  if (cfg.verify) {
    if (res.verdict == "unknown") {
      Verdict cover = verify_cube_cover(tree.cubes());
      if (!cover.accepted()) throw PipelineError("verify", cover.describe());
    } else {
      BundleCheckOptions bo;
      bo.workers = cfg.worker_count();
      BundleReport br = verify_bundle(out, bo);
      if (!br.verdict.accepted()) throw PipelineError("verify", br.verdict.describe());
      res.check = br;
    }
  }
  res.times["verify"] = clock.elapsed();
  res.times["total"] = total.elapsed();
  put_times();
  m.save(out / BundlePaths::kManifest);
  return res;
}

}  // namespace detail

// Encode, cube, conquer, package and verify one instance into `out`.
inline PipelineResult ramsey_pipeline(const RamseyInstanceSpec& spec, const CncConfig& cfg, const fs::path& out) {
  return detail::run_pipeline(spec, cfg, out, nullptr, nullptr);
}

// Conquers a given formula and cube list into a bundle.
inline PipelineResult conquer_bundle(const RamseyInstanceSpec& spec, const CnfFormula& f,
                                     const std::vector<Clause>& cubes, const CncConfig& cfg, const fs::path& out) {
  if (f.num_vars() < num_edges(spec.n)) throw std::invalid_argument("conquer: formula smaller than the edge set");
  return detail::run_pipeline(spec, cfg, out, &f, &cubes);
}

struct RamseySearchResult {
  int p = 0, q = 0;
  std::optional<int> value;
  std::optional<int> largest_exists;
  std::vector<std::pair<int, PipelineResult>> runs;
};

// Runs the pipeline for n = max(p,q)-1, max(p,q), ... until the first
// not-exists verdict. Keeps out/n<N-1> and out/n<N>.
inline RamseySearchResult ramsey_search(int p, int q, const CncConfig& cfg, const fs::path& out, int n_max = 64,
                                        const std::function<void(int, const PipelineResult&)>& progress = {}) {
  RamseySearchResult sr;
  sr.p = p;
  sr.q = q;
  fs::create_directories(out);
  const detail::StageClock total;
  for (int n = std::max(2, std::max(p, q) - 1); n <= n_max; ++n) {
    const RamseyInstanceSpec spec = make_instance(p, q, n);
    PipelineResult r = ramsey_pipeline(spec, cfg, out / ("n" + std::to_string(n)));
    if (progress) progress(n, r);
    const std::string verdict = r.verdict;
    sr.runs.emplace_back(n, std::move(r));
    if (verdict == "exists") {
      sr.largest_exists = n;
      continue;
    }
    if (verdict == "not-exists" && sr.largest_exists == n - 1) sr.value = n;
    break;
  }
  for (const auto& [n, r] : sr.runs) {
    const bool keep = sr.runs.size() < 2 || n >= sr.runs.back().first - 1;
    if (!keep) fs::remove_all(out / ("n" + std::to_string(n)));
  }
  Manifest top;
  top.set("format", "ramsey-search 1");
  top.set("p", std::to_string(p));
  top.set("q", std::to_string(q));
  top.set("value", sr.value ? std::to_string(*sr.value) : "unknown");
  if (sr.largest_exists) top.set("exists_bundle", "n" + std::to_string(*sr.largest_exists));
  if (sr.value) top.set("not_exists_bundle", "n" + std::to_string(*sr.value));
  for (const auto& [n, r] : sr.runs) top.set("run.n" + std::to_string(n), r.verdict);
  top.set("time.total.wall", detail::format_seconds(total.elapsed().wall));
  top.save(out / BundlePaths::kManifest);
  return sr;
}

struct RunReport {
  std::string label;
  std::string verdict;
  std::size_t cubes = 0;
  std::uint64_t proof_bytes = 0;
  std::map<std::string, StageTime> times;
};

inline RunReport load_report(const fs::path& bundle) {
  const fs::path mp = bundle / BundlePaths::kManifest;
  if (!fs::exists(mp)) throw std::runtime_error("no manifest in " + bundle.string());
  const Manifest m = Manifest::load(mp);
  RunReport r;
  r.label = m.require("label");
  r.verdict = m.require("verdict");
  r.cubes = std::stoul(m.require("leaves"));
  r.proof_bytes = std::stoull(m.get("stats.proof_bytes").value_or("0"));
  for (const auto& stage : stage_names()) {
    StageTime t;
    t.wall = std::stod(m.get("time." + stage + ".wall").value_or("0"));
    t.cpu = std::stod(m.get("time." + stage + ".cpu").value_or("0"));
    r.times[stage] = t;
  }
  return r;
}

// Plain-text table followed by key=value records.
inline void write_report(std::ostream& os, const RunReport& r) {
  os << r.label << "  verdict " << r.verdict << "  cubes " << r.cubes << "  proof bytes " << r.proof_bytes << '\n';
  os << "stage      wall(s)     cpu(s)\n";
  for (const auto& stage : stage_names()) {
    const StageTime& t = r.times.at(stage);
    std::string row = stage;
    row.resize(8, ' ');
    std::string w = detail::format_seconds(t.wall), c = detail::format_seconds(t.cpu);
    os << row << std::string(11 - std::min<std::size_t>(11, w.size()), ' ') << w
       << std::string(11 - std::min<std::size_t>(11, c.size()), ' ') << c << '\n';
  }
  os << "report.label=" << r.label << '\n'
     << "report.verdict=" << r.verdict << '\n'
     << "report.cubes=" << r.cubes << '\n'
     << "report.proof_bytes=" << r.proof_bytes << '\n';
  for (const auto& stage : stage_names()) {
    os << "report.time." << stage << ".wall=" << detail::format_seconds(r.times.at(stage).wall) << '\n'
       << "report.time." << stage << ".cpu=" << detail::format_seconds(r.times.at(stage).cpu) << '\n';
  }
}

}  // namespace ramsey
