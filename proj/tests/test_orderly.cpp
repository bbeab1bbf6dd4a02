#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "oracles.hpp"
#include "ramsey/encode.hpp"
#include "ramsey/orderly.hpp"

using namespace ramsey;

namespace {

bool clause_satisfied(const Clause& c, const AdjMatrix& m) {
  for (Literal l : c)
    if (l.var() <= num_edges(m.order()) && m.var_bit(l.var()) == l.positive()) return true;
  return false;
}

std::vector<AdjMatrix> enumerate(int p, int q, int n, bool pseudo = false) {
  RamseyInstanceSpec spec = make_instance(p, q, n);
  CnfFormula f = encode_ramsey(spec);
  SolverOptions so;
  so.hook_vars = num_edges(n);
  Solver s(f, so);
  OrderlyOptions oo;
  oo.enumerate = true;
  if (pseudo) oo.mode = CanonicityMode::kPseudo;
  OrderlyHook hook(n, oo);
  s.connect_hook(&hook);
  EXPECT_EQ(s.solve().status, SolveStatus::kUnsat);
  return hook.solutions();
}

}  // namespace

TEST(Detect, ThreeColumnsOfFour) {
  std::vector<Literal> lits;
  for (int v = 1; v <= 3; ++v) lits.push_back(Literal::pos(v));
  lits.push_back(Literal::neg(4));
  auto m = detect_complete_submatrix(lits, 4, 1);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->order(), 3);
  EXPECT_EQ(m->edge_count(), 3);
  EXPECT_FALSE(detect_complete_submatrix(lits, 4, 3));
}

TEST(Detect, NothingAssigned) {
  EXPECT_FALSE(detect_complete_submatrix(std::vector<Literal>{}, 5, 1));
}

TEST(Detect, FullAssignment) {
  std::vector<Literal> lits;
  for (int v = 1; v <= 10; ++v) lits.push_back(Literal::make(v, v % 3 == 0));
  auto m = detect_complete_submatrix(lits, 5, 1);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->order(), 5);
}

TEST(Canonical, SingleEdgeOnFour) {
  AdjMatrix m = AdjMatrix::from_edges(4, {{1, 2}});
  CanonicityResult r = is_canonical(m);
  ASSERT_FALSE(r.canonical);
  ASSERT_TRUE(r.witness);
  AdjMatrix img = apply_perm(m, *r.witness);
  EXPECT_LT(lex_key(img), lex_key(m));
  ASSERT_TRUE(r.first_diff_pos);
  EXPECT_EQ(lex_key(m).bit(static_cast<std::size_t>(*r.first_diff_pos)), true);
  EXPECT_EQ(lex_key(img).bit(static_cast<std::size_t>(*r.first_diff_pos)), false);
  // The lex-least relabeling puts the edge at (3,4).
  EXPECT_EQ(oracle::min_key(m), "000001");
}

TEST(Canonical, EmptyGraph) {
  for (int k = 1; k <= 12; ++k) EXPECT_TRUE(is_canonical(AdjMatrix(k)).canonical);
}

TEST(Canonical, FiveCycleLexLeast) {
  AdjMatrix c5 = AdjMatrix::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  const std::string best = oracle::min_key(c5);
  std::vector<std::uint8_t> bits;
  for (char ch : best) bits.push_back(ch == '1');
  AdjMatrix least = AdjMatrix::from_bits(5, bits);
  EXPECT_TRUE(is_canonical(least).canonical);
  EXPECT_FALSE(is_canonical(c5).canonical);
}

TEST(Canonical, AgreesWithBruteForceUpToFive) {
  for (int k = 2; k <= 5; ++k) {
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(k)); ++mask) {
      AdjMatrix m = oracle::from_mask(k, mask);
      CanonicityResult r = is_canonical(m);
      ASSERT_EQ(r.canonical, oracle::canonical(m)) << k << " " << mask;
      if (!r.canonical) {
        ASSERT_LT(lex_key(apply_perm(m, *r.witness)), lex_key(m));
      }
    }
  }
}

TEST(Canonical, LargeStructuredGraphs) {
  // Complete, empty and highly symmetric graphs exercise automorphism pruning.
  for (int k : {16, 24, 32}) {
    AdjMatrix full(k);
    for (int j = 2; j <= k; ++j)
      for (int i = 1; i < j; ++i) full.set(i, j, true);
    EXPECT_TRUE(is_canonical(AdjMatrix(k)).canonical);
    EXPECT_TRUE(is_canonical(full).canonical);
    // Two disjoint cliques: the labeling grouping each clique is not least.
    AdjMatrix two(k);
    for (int j = 2; j <= k; ++j)
      for (int i = 1; i < j; ++i) two.set(i, j, (i <= k / 2) == (j <= k / 2));
    CanonicityResult r = is_canonical(two);
    ASSERT_FALSE(r.canonical);
    EXPECT_LT(lex_key(apply_perm(two, *r.witness)), lex_key(two));
  }
}

TEST(Canonical, ExactlyOnePerClassAndParentsCanonical) {
  for (int k = 2; k <= 5; ++k) {
    std::map<std::string, int> canon_per_class;
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(k)); ++mask) {
      AdjMatrix m = oracle::from_mask(k, mask);
      const std::string cls = oracle::min_key(m);
      canon_per_class[cls] += 0;
      if (is_canonical(m).canonical) {
        ++canon_per_class[cls];
        EXPECT_TRUE(is_canonical(m.submatrix(k - 1)).canonical);
      }
    }
    for (const auto& [cls, count] : canon_per_class) EXPECT_EQ(count, 1) << cls;
  }
}

TEST(Blocking, RejectsCanonical) {
  AdjMatrix m(4);
  EXPECT_THROW(blocking_clause(m, is_canonical(m), EdgeVariableMap(4)), std::domain_error);
}

TEST(Blocking, SingleEdgeClause) {
  AdjMatrix m = AdjMatrix::from_edges(4, {{1, 2}});
  CanonicityResult r = is_canonical(m);
  Clause full = blocking_clause(m, r, EdgeVariableMap(4), MinimizationRule::kFull);
  EXPECT_EQ(full.size(), 6u);
  EXPECT_EQ(full.front(), Literal::neg(1));
  Clause small = blocking_clause(m, r, EdgeVariableMap(4));
  EXPECT_LE(small.size(), full.size());
  EXPECT_FALSE(clause_satisfied(small, m));
  EXPECT_FALSE(clause_satisfied(full, m));
  // The canonical single-edge graph survives.
  EXPECT_TRUE(clause_satisfied(small, AdjMatrix::from_edges(4, {{3, 4}})));
  EXPECT_TRUE(clause_satisfied(small, AdjMatrix(4)));
}

TEST(Blocking, SoundAgainstCanonicalMatricesUpToFive) {
  std::vector<std::vector<AdjMatrix>> canon(6);
  for (int n = 2; n <= 5; ++n)
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(n)); ++mask) {
      AdjMatrix m = oracle::from_mask(n, mask);
      if (oracle::canonical(m)) canon[static_cast<std::size_t>(n)].push_back(m);
    }
  for (int k = 2; k <= 5; ++k) {
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(k)); ++mask) {
      AdjMatrix m = oracle::from_mask(k, mask);
      CanonicityResult r = is_canonical(m);
      if (r.canonical) continue;
      for (auto rule : {MinimizationRule::kFull, MinimizationRule::kWitnessPrefix}) {
        Clause c = blocking_clause(m, r, EdgeVariableMap(5), rule);
        EXPECT_FALSE(clause_satisfied(c, m));
        for (int n = k; n <= 5; ++n)
          for (const auto& g : canon[static_cast<std::size_t>(n)]) ASSERT_TRUE(clause_satisfied(c, g));
      }
    }
  }
}

TEST(Blocking, DescendantsOfBlockedMatrixFalsify) {
  AdjMatrix m = AdjMatrix::from_edges(4, {{1, 2}});
  Clause c = blocking_clause(m, is_canonical(m), EdgeVariableMap(6));
  for (std::uint64_t ext = 0; ext < (1u << 9); ++ext) {
    AdjMatrix g(6);
    for (int v = 1; v <= 6; ++v) g.set_var_bit(v, m.var_bit(v));
    for (int v = 7; v <= 15; ++v) g.set_var_bit(v, (ext >> (v - 7)) & 1);
    EXPECT_FALSE(clause_satisfied(c, g));
  }
}

TEST(Blocking, ReinjectedClauseConflicts) {
  AdjMatrix m = AdjMatrix::from_edges(5, {{1, 2}, {2, 3}});
  CanonicityResult r = is_canonical(m);
  ASSERT_FALSE(r.canonical);
  CnfFormula f(10, 10);
  for (int v = 1; v <= 10; ++v) f.add_clause({Literal::make(v, m.var_bit(v))});
  f.add_clause(blocking_clause(m, r, EdgeVariableMap(5)));
  Solver s(f);
  EXPECT_EQ(s.solve().status, SolveStatus::kUnsat);
}

TEST(Hook, R33On6IsUnsatWithTrustedClauses) {
  RamseyInstanceSpec spec = make_instance(3, 3, 6);
  spec.enable_lex_sb = false;
  CnfFormula f = encode_ramsey(spec);
  SolverOptions so;
  so.hook_vars = 15;
  Solver s(f, so);
  std::ostringstream wit;
  WitnessLog log(wit, MinimizationRule::kWitnessPrefix);
  OrderlyOptions oo;
  oo.keep_records = true;
  OrderlyHook hook(6, oo, &log);
  s.connect_hook(&hook);
  ProofRecorder proof;
  s.connect_proof(&proof);
  EXPECT_EQ(s.solve().status, SolveStatus::kUnsat);
  std::size_t trusted = 0;
  for (const auto& e : proof.events()) trusted += e.kind == ProofEventKind::kAddTrusted;
  EXPECT_GE(trusted, 1u);
  EXPECT_EQ(trusted, hook.records().size());
  for (const auto& rec : hook.records()) {
    EXPECT_LT(lex_key(apply_perm(rec.matrix, rec.perm)), lex_key(rec.matrix));
  }
  std::istringstream lines(wit.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "c rule=witness-prefix");
  std::size_t records = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.rfind("w ", 0), 0u);
    EXPECT_NE(line.find(" k="), std::string::npos);
    EXPECT_NE(line.find(" perm="), std::string::npos);
    EXPECT_NE(line.find(" clause="), std::string::npos);
    EXPECT_NE(line.find(" 0 key="), std::string::npos);
    ++records;
  }
  EXPECT_EQ(records, trusted);
}

TEST(Hook, CanonicalFullAssignmentInjectsNothing) {
  OrderlyHook hook(5);
  AdjMatrix c5 = AdjMatrix::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  const std::string best = oracle::min_key(c5);
  std::vector<Literal> lits;
  for (int v = 1; v <= 10; ++v) lits.push_back(Literal::make(v, best[static_cast<std::size_t>(v - 1)] == '1'));
  hook.on_assign(lits, 0);
  EXPECT_FALSE(hook.provide_external_clause().has_value());
  EXPECT_EQ(hook.stats().blocked, 0u);
}

TEST(Hook, BacktrackReopensColumns) {
  OrderlyHook hook(4);
  std::vector<Literal> a{Literal::pos(1), Literal::neg(2), Literal::neg(3)};
  hook.on_assign(a, 1);
  auto c = hook.provide_external_clause();
  ASSERT_TRUE(c);  // edge (1,2) alone on 3 vertices is not lex-least
  hook.on_backtrack(0);
  std::vector<Literal> b{Literal::neg(1), Literal::neg(2), Literal::pos(3)};
  hook.on_assign(b, 1);
  EXPECT_FALSE(hook.provide_external_clause().has_value());
}

TEST(Enumerate, R33On5IsFiveCycle) {
  auto sols = enumerate(3, 3, 5);
  ASSERT_EQ(sols.size(), 1u);
  AdjMatrix c5 = AdjMatrix::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  EXPECT_EQ(oracle::min_key(sols[0]), oracle::min_key(c5));
}

TEST(Enumerate, PairwiseNonIsomorphicAndComplete) {
  for (auto [p, q, n] : {std::tuple{3, 3, 4}, std::tuple{3, 4, 6}, std::tuple{3, 4, 7}}) {
    auto sols = enumerate(p, q, n);
    std::set<std::string> keys;
    for (const auto& g : sols) {
      EXPECT_TRUE(oracle::is_ramsey_good(g, p, q));
      keys.insert(oracle::min_key(g));
    }
    EXPECT_EQ(keys.size(), sols.size());
    EXPECT_EQ(sols.size(), oracle::ramsey_classes(p, q, n).size()) << p << q << n;
  }
}

TEST(Enumerate, PseudoModeStillComplete) {
  auto sols = enumerate(3, 4, 6, true);
  std::set<std::string> keys;
  for (const auto& g : sols) keys.insert(oracle::min_key(g));
  EXPECT_EQ(keys.size(), oracle::ramsey_classes(3, 4, 6).size());
}

TEST(WitnessFormat, Line) {
  WitnessRecord r;
  r.witness_id = 7;
  r.k = 3;
  r.perm = Permutation({3, 1, 2});
  r.clause = make_clause({-1, 2});
  r.matrix = AdjMatrix::from_edges(3, {{1, 2}});
  EXPECT_EQ(format_witness(r), "w 7 k=3 perm=3 1 2 clause=-1 2 0 key=8");
}

TEST(WitnessLog, WriteFailureThrows) {
  std::ostringstream os;
  WitnessLog log(os, MinimizationRule::kFull);
  os.setstate(std::ios::badbit);
  WitnessRecord r;
  r.k = 2;
  r.perm = Permutation({2, 1});
  r.matrix = AdjMatrix(2);
  EXPECT_THROW(log.append(r), std::runtime_error);
}
