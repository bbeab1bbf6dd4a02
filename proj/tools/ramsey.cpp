// Command-line front end: encode, solve, cube, conquer, verify, ramsey and
// report subcommands.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ramsey/ramsey.hpp"

using namespace ramsey;

namespace {

constexpr int kExitUnknown = 0;
constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstanceArgs {
  int p = 0, q = 0, n = 0;
  std::optional<int> edges;
  std::string deg = "auto";
  bool no_lex_sb = false;
  bool no_cardinality = false;

  void add(CLI::App* app, bool need_n) {
    app->add_option("--p", p, "blue clique size to avoid")->check(CLI::Range(2, 64));
    app->add_option("--q", q, "red clique size to avoid")->check(CLI::Range(2, 64));
    if (need_n) app->add_option("--n", n, "number of vertices")->check(CLI::Range(2, 64));
    app->add_option("--edges", edges, "exact blue edge count");
    app->add_option("--deg", deg, "blue degree bounds: auto, none or lo:hi");
    app->add_flag("--no-lex-sb", no_lex_sb, "omit the static lex symmetry-breaking clauses");
    app->add_flag("--no-cardinality", no_cardinality, "omit degree and edge-count constraints");
  }

  bool given() const { return p > 0 && q > 0 && n > 0; }

  RamseyInstanceSpec spec() const {
    if (!given()) throw UsageError("--p, --q and --n are required");
    RamseyInstanceSpec s = make_instance(p, q, n, !no_cardinality);
    if (deg == "none") {
      s.degree.reset();
    } else if (deg != "auto") {
      const auto colon = deg.find(':');
      if (colon == std::string::npos) throw UsageError("--deg expects auto, none or lo:hi");
      try {
        s.degree = DegreeBounds{std::stoi(deg.substr(0, colon)), std::stoi(deg.substr(colon + 1))};
      } catch (const std::logic_error&) {
        throw UsageError("--deg expects auto, none or lo:hi");
      }
    }
    s.edge_count = edges;
    s.enable_lex_sb = !no_lex_sb;
    if (no_cardinality && (s.degree || s.edge_count)) {
      throw UsageError("--no-cardinality conflicts with explicit degree or edge bounds");
    }
    s.enable_cardinality = !no_cardinality;
    try {
      s.validate();
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
    return s;
  }
};

struct CncArgs {
  std::optional<int> threshold;
  int recube_extra = 40;
  std::uint64_t proof_cap = std::uint64_t{7} << 30;
  std::uint64_t simplify_budget = 10000;
  unsigned workers = 0;
  int pool = 0;
  std::string cas = "on";
  std::string canonicity = "full";
  std::string rule = "witness-prefix";
  std::uint64_t seed = 0;
  std::optional<double> time_budget;
  bool no_verify = false;

  void add(CLI::App* app) {
    app->add_option("--threshold", threshold, "eliminated edge variables that stop cubing");
    app->add_option("--recube-extra", recube_extra, "threshold increase when a leaf is re-cubed");
    app->add_option("--proof-cap", proof_cap, "per-leaf proof size limit in bytes");
    app->add_option("--simplify-budget", simplify_budget, "conflicts of simplification per cube node");
    app->add_option("--workers", workers, "conquer worker threads (0 = all CPUs)");
    app->add_option("--pool", pool, "split candidates per node (0 = 3n)");
    add_cas(app);
    app->add_option("--seed", seed, "solver seed");
    app->add_option("--time-budget", time_budget, "wall-clock limit in seconds");
    app->add_flag("--no-verify", no_verify, "skip bundle verification");
  }

  void add_cas(CLI::App* app) {
    app->add_option("--cas", cas, "orderly isomorph blocking")->check(CLI::IsMember({"on", "off"}));
    app->add_option("--canonicity", canonicity, "canonicity check mode")->check(CLI::IsMember({"full", "pseudo"}));
    app->add_option("--rule", rule, "blocking clause rule")->check(CLI::IsMember({"full", "witness-prefix"}));
  }

  CncConfig config() const {
    CncConfig c;
    c.elim_threshold = threshold;
    c.recube_extra = recube_extra;
    c.proof_cap = proof_cap;
    c.simplify_budget = simplify_budget;
    c.workers = workers;
    c.candidate_pool = pool;
    c.cas = cas == "on";
    c.canonicity = canonicity == "full" ? CanonicityMode::kFull : CanonicityMode::kPseudo;
    c.rule = parse_rule(rule);
    c.seed = seed;
    if (time_budget) c.time_budget = std::chrono::milliseconds(static_cast<long long>(*time_budget * 1000));
    c.verify = !no_verify;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

fs::path sidecar(const fs::path& cnf) {
  fs::path m = cnf;
  return m.replace_extension(".meta");
}

struct LoadedInstance {
  RamseyInstanceSpec spec;
  CnfFormula f;
};

// Instance from --cnf (with its sidecar) or from the instance flags.
LoadedInstance load_instance(const std::string& cnf, const InstanceArgs& ia) {
  LoadedInstance li;
  if (cnf.empty()) {
    li.spec = ia.spec();
    li.f = encode_ramsey(li.spec);
    return li;
  }
  std::ifstream in(cnf);
  if (!in) throw std::runtime_error("cannot open " + cnf);
  li.f = read_dimacs(in);
  std::ifstream meta(sidecar(cnf));
  if (meta) {
    li.spec = read_metadata(meta);
  } else if (ia.given()) {
    li.spec = ia.spec();
  } else {
    throw UsageError("no sidecar " + sidecar(cnf).string() + "; pass --p, --q and --n");
  }
  if (li.f.num_vars() < num_edges(li.spec.n)) throw UsageError("CNF has fewer variables than edges of K_n");
  li.f.set_edge_vars(num_edges(li.spec.n));
  return li;
}

void print_graph(const AdjMatrix& g) {
  std::cout << "c graph " << g.order() << " vertices " << g.edge_count() << " edges\n";
  for (auto [i, j] : g.edges()) std::cout << "e " << i << ' ' << j << '\n';
}

AdjMatrix graph_of(const Assignment& model, int n) {
  AdjMatrix g(n);
  for (int v = 1; v <= num_edges(n); ++v) g.set_var_bit(v, model[static_cast<std::size_t>(v)] > 0);
  return g;
}

int cmd_encode(const InstanceArgs& ia, const std::string& out) {
  const RamseyInstanceSpec spec = ia.spec();
  const CnfFormula f = encode_ramsey(spec);
  std::ofstream cnf(out);
  write_dimacs(cnf, f);
  std::ofstream meta(sidecar(out));
  write_metadata(meta, spec, f);
  if (!cnf || !meta) throw std::runtime_error("cannot write " + out);
  std::cout << "c " << spec.label() << " vars " << f.num_vars() << " clauses " << f.num_clauses() << '\n';
  for (const auto& r : f.family_ranges()) std::cout << "c family " << family_name(r.family) << ' ' << r.end - r.begin << '\n';
  return 0;
}

struct SolveArgs {
  std::string cnf, proof, witnesses, model;
  std::optional<std::uint64_t> budget;
};

int cmd_solve(const SolveArgs& sa, const InstanceArgs& ia, const CncArgs& ca) {
  const LoadedInstance li = load_instance(sa.cnf, ia);
  const CncConfig cfg = ca.config();
  const int n = li.spec.n;
  std::optional<std::ofstream> proof_os, wit_os;
  std::optional<DratWriter> proof;
  std::optional<WitnessLog> log;
  if (!sa.proof.empty()) {
    proof_os.emplace(sa.proof, std::ios::binary);
    if (!*proof_os) throw std::runtime_error("cannot write " + sa.proof);
    proof.emplace(*proof_os);
  }
  if (!sa.witnesses.empty()) {
    wit_os.emplace(sa.witnesses, std::ios::binary);
    if (!*wit_os) throw std::runtime_error("cannot write " + sa.witnesses);
    log.emplace(*wit_os, cfg.rule);
  }
  SolverOptions so;
  so.hook_vars = cfg.cas ? num_edges(n) : 0;
  so.seed = cfg.seed;
  Solver s(li.f, so);
  OrderlyOptions oo;
  oo.mode = cfg.canonicity;
  oo.rule = cfg.rule;
  OrderlyHook hook(n, oo, log ? &*log : nullptr);
  if (cfg.cas) s.connect_hook(&hook);
  if (proof) s.connect_proof(&*proof);
  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult r = s.solve(sa.budget);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (proof) proof->flush();
  if (log) log->flush();
  std::cout << "c " << li.spec.label() << " cas=" << (cfg.cas ? "on" : "off") << " conflicts " << r.conflicts
            << " blocked " << hook.stats().blocked << " time " << secs << '\n';
  switch (r.status) {
    case SolveStatus::kSat: {
      std::cout << "s SATISFIABLE\n";
      print_graph(graph_of(r.model, n));
      if (!sa.model.empty()) {
        std::ofstream m(sa.model);
        write_model(m, r.model);
      }
      return kExitSat;
    }
    case SolveStatus::kUnsat:
      std::cout << "s UNSATISFIABLE\n";
      return kExitUnsat;
    case SolveStatus::kUnknown:
      std::cout << "s UNKNOWN\n";
      return kExitUnknown;
  }
  return kExitUnknown;
}

int cmd_cube(const std::string& cnf, const std::string& out, const InstanceArgs& ia, const CncArgs& ca) {
  const LoadedInstance li = load_instance(cnf, ia);
  const CncConfig cfg = ca.config().resolve(li.spec);
  std::atomic<bool> stop{false};
  const CubeTree tree = cube(li.f, li.spec.n, cfg, &stop);
  std::ofstream os(out);
  write_cubes(os, tree.cubes());
  if (!os) throw std::runtime_error("cannot write " + out);
  std::cout << "c cubes " << tree.leaves().size() << " nodes " << tree.nodes.size()
            << (tree.root_unsat ? " root refuted" : "") << '\n';
  return 0;
}

void print_pipeline(const PipelineResult& r) {
  std::cout << "c bundle " << r.bundle.string() << " cubes " << r.cubes << " recubes " << r.recubes << '\n';
  std::cout << "verdict " << r.verdict << '\n';
  if (r.graph) print_graph(*r.graph);
}

int verdict_exit(const std::string& v) { return v == "exists" ? kExitSat : v == "not-exists" ? kExitUnsat : kExitUnknown; }

int cmd_conquer(const std::string& cnf, const std::string& cubes_path, const std::string& out, const InstanceArgs& ia,
                const CncArgs& ca) {
  const LoadedInstance li = load_instance(cnf, ia);
  std::ifstream cin_cubes(cubes_path);
  if (!cin_cubes) throw std::runtime_error("cannot open " + cubes_path);
  const std::vector<Clause> cubes = read_cubes(cin_cubes);
  const PipelineResult r = conquer_bundle(li.spec, li.f, cubes, ca.config(), out);
  print_pipeline(r);
  return verdict_exit(r.verdict);
}

int cmd_verify(const std::string& bundle, bool no_hashes, unsigned workers) {
  BundleCheckOptions bo;
  bo.check_hashes = !no_hashes;
  bo.workers = workers;
  const BundleReport r = verify_bundle(bundle, bo);
  std::cout << "c leaves " << r.leaves << " unsat " << r.unsat_leaves << " sat " << r.sat_leaves << '\n';
  std::cout << r.verdict.describe();
  if (r.verdict.accepted()) std::cout << " verdict " << r.claimed;
  std::cout << '\n';
  return exit_code(r.verdict);
}

int cmd_ramsey(const InstanceArgs& ia, const CncArgs& ca, const std::string& out, int n_max) {
  if (ia.p < 2 || ia.q < 2) throw UsageError("--p and --q are required");
  const CncConfig cfg = ca.config();
  RamseySearchResult r = ramsey_search(ia.p, ia.q, cfg, out, n_max, [](int n, const PipelineResult& pr) {
    std::cout << "c n=" << n << " " << pr.verdict << " cubes " << pr.cubes << " time "
              << pr.times.at("total").wall << "s\n";
  });
  const std::string name = "R(" + std::to_string(ia.p) + "," + std::to_string(ia.q) + ")";
  if (r.value) {
    std::cout << name << "=" << *r.value << '\n';
  } else {
    std::cout << name << " unknown\n";
  }
  std::cout << "c certificates in " << out << '\n';
  return 0;
}

int cmd_report(const std::string& bundle) {
  const fs::path mp = fs::path(bundle) / BundlePaths::kManifest;
  if (!fs::exists(mp)) throw std::runtime_error("no manifest in " + bundle);
  const Manifest m = Manifest::load(mp);
  if (m.get("format").value_or("").rfind("ramsey-search", 0) == 0) {
    std::cout << "search R(" << m.require("p") << "," << m.require("q") << ")=" << m.require("value") << '\n';
    for (const auto& key : {"exists_bundle", "not_exists_bundle"}) {
      if (auto sub = m.get(key)) write_report(std::cout, load_report(fs::path(bundle) / *sub));
    }
    return 0;
  }
  write_report(std::cout, load_report(bundle));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ramsey number search with certified SAT solving"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML or INI file; flags take precedence");
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "more output");

  InstanceArgs enc_ia;
  std::string enc_out = "instance.cnf";
  auto* enc = app.add_subcommand("encode", "write the DIMACS encoding and its sidecar");
  enc_ia.add(enc, true);
  enc->add_option("-o,--out", enc_out, "output CNF path");

  InstanceArgs solve_ia;
  CncArgs solve_ca;
  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "sequential solve with optional certificates");
  solve_ia.add(solve, true);
  solve_ca.add_cas(solve);
  solve->add_option("--cnf", sa.cnf, "input CNF (sidecar .meta next to it)");
  solve->add_option("--proof", sa.proof, "DRAT proof output");
  solve->add_option("--witnesses", sa.witnesses, "witness log output");
  solve->add_option("--model", sa.model, "model output");
  solve->add_option("--budget", sa.budget, "conflict budget");
  solve->add_option("--seed", solve_ca.seed, "solver seed");

  InstanceArgs cube_ia;
  CncArgs cube_ca;
  std::string cube_cnf, cube_out = "instance.icnf";
  auto* cube_cmd = app.add_subcommand("cube", "split an instance into cubes");
  cube_ia.add(cube_cmd, true);
  cube_ca.add(cube_cmd);
  cube_cmd->add_option("--cnf", cube_cnf, "input CNF");
  cube_cmd->add_option("-o,--out", cube_out, "output cube file");

  InstanceArgs conq_ia;
  CncArgs conq_ca;
  std::string conq_cnf, conq_cubes, conq_out = "out";
  auto* conq = app.add_subcommand("conquer", "solve every cube and write a certificate bundle");
  conq_ia.add(conq, true);
  conq_ca.add(conq);
  conq->add_option("--cnf", conq_cnf, "input CNF");
  conq->add_option("--cubes", conq_cubes, "cube file")->required();
  conq->add_option("-o,--out", conq_out, "bundle directory");

  std::string ver_bundle;
  bool ver_no_hashes = false;
  unsigned ver_workers = 0;
  auto* ver = app.add_subcommand("verify", "check a certificate bundle");
  ver->add_option("--bundle", ver_bundle, "bundle directory")->required();
  ver->add_flag("--no-hashes", ver_no_hashes, "skip content hashes and check semantics only");
  ver->add_option("--workers", ver_workers, "checker threads (0 = all CPUs)");

  InstanceArgs ram_ia;
  CncArgs ram_ca;
  std::string ram_out = "out";
  int ram_max = 64;
  auto* ram = app.add_subcommand("ramsey", "find R(p,q) with certificates for both sides");
  ram_ia.add(ram, false);
  ram_ca.add(ram);
  ram->add_option("-o,--out", ram_out, "output directory");
  ram->add_option("--max-n", ram_max, "largest order to try")->check(CLI::Range(2, 64));

  std::string rep_bundle;
  auto* rep = app.add_subcommand("report", "timing and size summary of a bundle");
  rep->add_option("--bundle", rep_bundle, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*enc) return cmd_encode(enc_ia, enc_out);
    if (*solve) return cmd_solve(sa, solve_ia, solve_ca);
    if (*cube_cmd) return cmd_cube(cube_cnf, cube_out, cube_ia, cube_ca);
    if (*conq) return cmd_conquer(conq_cnf, conq_cubes, conq_out, conq_ia, conq_ca);
    if (*ver) return cmd_verify(ver_bundle, ver_no_hashes, ver_workers);
    if (*ram) return cmd_ramsey(ram_ia, ram_ca, ram_out, ram_max);
    if (*rep) return cmd_report(rep_bundle);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PipelineError& e) {
    std::cerr << "pipeline error in stage " << e.stage() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
