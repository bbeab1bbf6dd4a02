#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ramsey/cnc.hpp"

using namespace ramsey;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("ramsey_cnc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

CncConfig small_config(int threshold, std::uint64_t simplify = 10000) {
  CncConfig c;
  c.elim_threshold = threshold;
  c.simplify_budget = simplify;
  c.workers = 2;
  return c;
}

struct Instance {
  RamseyInstanceSpec spec;
  CnfFormula f;
};

Instance instance(int p, int q, int n) {
  Instance i{make_instance(p, q, n), {}};
  i.f = encode_ramsey(i.spec);
  return i;
}

SolveStatus direct(const CnfFormula& f, int n) {
  SolverOptions so;
  so.hook_vars = num_edges(n);
  Solver s(f, so);
  OrderlyHook hook(n);
  s.connect_hook(&hook);
  return s.solve().status;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ChooseSplit, DominantScoreWins) {
  // Variable 1 fixes ten others in each polarity, variable 2 fixes two.
  CnfFormula f;
  f.ensure_vars(30);
  for (int i = 0; i < 10; ++i) {
    f.add_clause(make_clause({-1, 3 + i}));
    f.add_clause(make_clause({1, 13 + i}));
  }
  f.add_clause(make_clause({-2, 23}));
  f.add_clause(make_clause({-2, 24}));
  f.add_clause(make_clause({2, 25}));
  f.add_clause(make_clause({2, 26}));
  Solver s(f);
  const std::vector<int> both{2, 1};
  EXPECT_EQ(choose_split_var(s, both, 30), 1);
  const std::vector<int> one{2};
  EXPECT_EQ(choose_split_var(s, one, 30), 2);
}

TEST(ChooseSplit, TiesGoToLowestIndex) {
  CnfFormula f;
  f.ensure_vars(8);
  f.add_clause(make_clause({-5, 6}));
  f.add_clause(make_clause({-3, 4}));
  Solver s(f);
  const std::vector<int> cands{1, 2, 7};
  EXPECT_EQ(choose_split_var(s, cands, 8), 1);
  const std::vector<int> cands2{5, 3};
  EXPECT_EQ(choose_split_var(s, cands2, 8), 5);
}

TEST(ChooseSplit, DoubleFailureRefutesNode) {
  CnfFormula f;
  f.ensure_vars(2);
  for (auto c : {make_clause({1, 2}), make_clause({1, -2}), make_clause({-1, 2}), make_clause({-1, -2})}) {
    f.add_clause(c);
  }
  Solver s(f);
  const std::vector<int> cands{1};
  EXPECT_FALSE(choose_split_var(s, cands, 2).has_value());
}

TEST(Cube, ZeroThresholdGivesEmptyCube) {
  Instance in = instance(3, 5, 14);
  CncConfig cfg = small_config(0, 1).resolve(in.spec);
  CubeTree t = cube(in.f, 14, cfg);
  ASSERT_EQ(t.cubes().size(), 1u);
  EXPECT_TRUE(t.cubes()[0].empty());
}

TEST(Cube, R35On14LeavesExceedThreshold) {
  Instance in = instance(3, 5, 14);
  CncConfig cfg = small_config(20, 1).resolve(in.spec);
  CubeTree t = cube(in.f, 14, cfg);
  EXPECT_GT(t.leaves().size(), 1u);
  for (std::size_t id : t.leaves()) {
    const CubeNode& node = t.nodes[id];
    EXPECT_TRUE(node.refuted || node.sat_hint || node.eliminated > 20) << node.eliminated;
  }
  EXPECT_TRUE(verify_cube_cover(t.cubes()).accepted());
}

TEST(Cube, TreeInvariants) {
  for (auto [p, q, n, th] : std::vector<std::array<int, 4>>{{3, 4, 8, 6}, {3, 4, 9, 8}, {3, 5, 13, 15}, {4, 3, 8, 6}}) {
    Instance in = instance(p, q, n);
    CncConfig cfg = small_config(th, 2).resolve(in.spec);
    CubeTree t = cube(in.f, n, cfg);
    EXPECT_TRUE(verify_cube_cover(t.cubes()).accepted()) << in.spec.label();
    for (std::size_t id = 0; id < t.nodes.size(); ++id) {
      const CubeNode& node = t.nodes[id];
      for (Literal l : node.literals) EXPECT_LE(l.var(), num_edges(n));
      if (!node.children) continue;
      const auto& a = t.nodes[(*node.children)[0]];
      const auto& b = t.nodes[(*node.children)[1]];
      EXPECT_EQ(a.literals.back(), ~b.literals.back());
      EXPECT_GE(a.eliminated, node.eliminated);
      EXPECT_GE(b.eliminated, node.eliminated);
    }
  }
}

TEST(Cube, Deterministic) {
  Instance in = instance(3, 5, 13);
  CncConfig cfg = small_config(15, 2).resolve(in.spec);
  std::ostringstream a, b;
  write_cubes(a, cube(in.f, 13, cfg).cubes());
  write_cubes(b, cube(in.f, 13, cfg).cubes());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Cube, RefutedRootIsSingleLeaf) {
  Instance in = instance(3, 3, 6);
  CncConfig cfg = small_config(3).resolve(in.spec);
  CubeTree t = cube(in.f, 6, cfg);
  EXPECT_TRUE(t.root_unsat);
  EXPECT_EQ(t.leaves().size(), 1u);
}

TEST(Conquer, LeafVerdictsMatchDirectSolve) {
  for (auto [p, q, n] : std::vector<std::array<int, 3>>{{3, 4, 8}, {3, 4, 9}, {3, 5, 13}}) {
    Instance in = instance(p, q, n);
    CncConfig cfg = small_config(n, 2).resolve(in.spec);
    CubeTree t = cube(in.f, n, cfg);
    TempDir work;
    ConquerResult r = conquer(t, in.f, n, cfg, work.path());
    EXPECT_EQ(r.status, direct(in.f, n)) << in.spec.label();
    if (r.status == SolveStatus::kSat) {
      EXPECT_TRUE(satisfies(in.f, r.model));
      for (Literal l : t.nodes[*r.sat_leaf].literals) EXPECT_TRUE(literal_true(r.model, l));
      AdjMatrix g = AdjMatrix::from_bits(n, [&] {
        std::vector<std::uint8_t> bits;
        for (int v = 1; v <= num_edges(n); ++v) bits.push_back(r.model[static_cast<std::size_t>(v)] > 0);
        return bits;
      }());
      EXPECT_TRUE(oracle::is_ramsey_good(g, p, q));
    }
  }
}

TEST(Conquer, ProofCapTriggersRecube) {
  Instance in = instance(3, 5, 14);
  CncConfig cfg = small_config(20, 1).resolve(in.spec);
  cfg.proof_cap = 100;
  cfg.proof_check_interval = 1;
  cfg.recube_extra = 6;
  TempDir out;
  PipelineResult r = ramsey_pipeline(in.spec, cfg, out.path());
  EXPECT_GT(r.recubes, 0u);
  EXPECT_EQ(r.verdict, "not-exists");
  ASSERT_TRUE(r.check);
  EXPECT_TRUE(r.check->verdict.accepted());
  for (std::size_t i = 0; i < r.cubes; ++i) {
    EXPECT_LE(fs::file_size(out.path() / BundlePaths::proof(i)), cfg.proof_cap);
  }
}

TEST(Pipeline, R34On9NotExists) {
  Instance in = instance(3, 4, 9);
  TempDir out;
  PipelineResult r = ramsey_pipeline(in.spec, small_config(10, 2), out.path());
  EXPECT_EQ(r.verdict, "not-exists");
  ASSERT_TRUE(r.check);
  EXPECT_TRUE(r.check->verdict.accepted());
  EXPECT_EQ(r.check->unsat_leaves, r.cubes);
  for (const char* rel : {BundlePaths::kManifest, BundlePaths::kCnf, BundlePaths::kMeta, BundlePaths::kCubes})
    EXPECT_TRUE(fs::exists(out.path() / rel)) << rel;
  EXPECT_FALSE(fs::exists(out.path() / ".work"));
  BundleReport again = verify_bundle(out.path());
  EXPECT_TRUE(again.verdict.accepted()) << again.verdict.describe();
}

TEST(Pipeline, R34On8ExistsWithModel) {
  Instance in = instance(3, 4, 8);
  TempDir out;
  PipelineResult r = ramsey_pipeline(in.spec, small_config(8, 2), out.path());
  EXPECT_EQ(r.verdict, "exists");
  ASSERT_TRUE(r.graph);
  EXPECT_TRUE(oracle::is_ramsey_good(*r.graph, 3, 4));
  ASSERT_TRUE(r.check);
  EXPECT_GE(r.check->sat_leaves, 1u);
}

TEST(Pipeline, TruncatedProofRejected) {
  Instance in = instance(3, 4, 9);
  TempDir out;
  PipelineResult r = ramsey_pipeline(in.spec, small_config(10, 2), out.path());
  ASSERT_EQ(r.verdict, "not-exists");
  const fs::path proof = out.path() / BundlePaths::proof(0);
  const std::string text = slurp(proof);
  {
    std::ofstream o(proof, std::ios::binary | std::ios::trunc);
    o << text.substr(0, text.size() / 2);
  }
  EXPECT_EQ(verify_bundle(out.path()).verdict.status, VerdictStatus::kRejected);
  BundleCheckOptions semantic;
  semantic.check_hashes = false;
  EXPECT_EQ(verify_bundle(out.path(), semantic).verdict.status, VerdictStatus::kRejected);
}

TEST(Pipeline, MissingFileIsError) {
  Instance in = instance(3, 3, 6);
  TempDir out;
  ramsey_pipeline(in.spec, small_config(3), out.path());
  fs::remove(out.path() / BundlePaths::witnesses(0));
  EXPECT_EQ(verify_bundle(out.path()).verdict.status, VerdictStatus::kError);
  EXPECT_EQ(exit_code(verify_bundle(out.path()).verdict), 2);
}

TEST(Pipeline, TimeBudgetGivesUnknownWithValidCover) {
  Instance in = instance(3, 7, 23);
  CncConfig cfg = small_config(60, 200);
  cfg.time_budget = std::chrono::milliseconds(1500);
  TempDir out;
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult r = ramsey_pipeline(in.spec, cfg, out.path());
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
  EXPECT_EQ(r.verdict, "unknown");
  std::ifstream cubes(out.path() / BundlePaths::kCubes);
  EXPECT_TRUE(verify_cube_cover(read_cubes(cubes)).accepted());
}

TEST(Search, R33IsSix) {
  TempDir out;
  RamseySearchResult r = ramsey_search(3, 3, small_config(3), out.path());
  ASSERT_TRUE(r.value);
  EXPECT_EQ(*r.value, 6);
  EXPECT_TRUE(fs::exists(out.path() / "n5" / BundlePaths::kManifest));
  EXPECT_TRUE(fs::exists(out.path() / "n6" / BundlePaths::kManifest));
  EXPECT_FALSE(fs::exists(out.path() / "n4"));
  EXPECT_EQ(Manifest::load(out.path() / BundlePaths::kManifest).require("value"), "6");
}

TEST(Report, FiveStagesAndErrors) {
  Instance in = instance(3, 4, 9);
  TempDir out;
  ramsey_pipeline(in.spec, small_config(10, 2), out.path());
  RunReport rep = load_report(out.path());
  EXPECT_EQ(rep.times.size(), 5u);
  std::ostringstream os;
  write_report(os, rep);
  EXPECT_NE(os.str().find("report.time.verify.wall="), std::string::npos);
  TempDir empty;
  EXPECT_THROW(load_report(empty.path()), std::runtime_error);
}

TEST(Config, Defaults) {
  EXPECT_EQ(CncConfig::for_instance(make_instance(8, 3, 28)).elim_threshold, 120);
  EXPECT_EQ(CncConfig::for_instance(make_r93_subproblem()).elim_threshold, 100);
  CncConfig c;
  EXPECT_EQ(c.recube_extra, 40);
  EXPECT_EQ(c.proof_cap, std::uint64_t{7} << 30);
  EXPECT_EQ(c.simplify_budget, 10000u);
  EXPECT_EQ(c.resolve(make_instance(3, 5, 14)).candidate_pool, 42);
  c.recube_extra = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Pipeline, PlainEncodingCarriesTrustedClauses) {
  RamseyInstanceSpec spec = make_instance(3, 4, 9, false);
  spec.enable_lex_sb = false;
  TempDir out;
  PipelineResult r = ramsey_pipeline(spec, small_config(8, 50), out.path());
  EXPECT_EQ(r.verdict, "not-exists");
  ASSERT_TRUE(r.check);
  EXPECT_TRUE(r.check->verdict.accepted());
  const Manifest m = Manifest::load(out.path() / BundlePaths::kManifest);
  std::uint64_t trusted = 0;
  for (std::size_t i = 0; i < r.cubes; ++i) trusted += std::stoull(m.require("leaf." + std::to_string(i) + ".trusted"));
  EXPECT_GT(trusted, 0u);
  EXPECT_GT(r.cubes, 1u);
}
