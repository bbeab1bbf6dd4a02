#include <gtest/gtest.h>

#include <bit>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "ramsey/encode.hpp"
#include "ramsey/solver.hpp"

using namespace ramsey;

namespace {

Assignment edges_only(const AdjMatrix& m, int num_vars) {
  Assignment a(static_cast<std::size_t>(num_vars) + 1, 0);
  for (int v = 1; v <= num_edges(m.order()); ++v) a[static_cast<std::size_t>(v)] = m.var_bit(v) ? 1 : -1;
  return a;
}

bool solve_sat(const CnfFormula& f) {
  Solver s(f);
  return s.solve().status == SolveStatus::kSat;
}

}  // namespace

TEST(Clique, CountsAndWidths) {
  const RamseyInstanceSpec spec = make_instance(3, 3, 6, false);
  EdgeVariableMap map(6);
  CnfFormula f = build_clique_clauses(spec, map);
  EXPECT_EQ(f.num_clauses(), 40u);
  EXPECT_EQ(f.count_family(ClauseFamily::kCliqueBlue), 20u);
  EXPECT_EQ(f.count_family(ClauseFamily::kCliqueRed), 20u);
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    EXPECT_EQ(f.clause(i).size(), 3u);
    for (auto l : f.clause(i)) EXPECT_EQ(l.positive(), f.family(i) == ClauseFamily::kCliqueRed);
  }
}

TEST(Clique, ClosedFormCounts) {
  for (int n = 4; n <= 10; ++n)
    for (int p = 2; p <= 5; ++p)
      for (int q = 2; q <= 5; ++q) {
        RamseyInstanceSpec s;
        s.p = p;
        s.q = q;
        s.n = n;
        CnfFormula f = build_clique_clauses(s, EdgeVariableMap(n));
        EXPECT_EQ(f.num_clauses(), binomial(n, p) + binomial(n, q));
      }
}

TEST(Clique, OversizedCliqueIsVacuous) {
  RamseyInstanceSpec s;
  s.p = 5;
  s.q = 3;
  s.n = 4;
  CnfFormula f = build_clique_clauses(s, EdgeVariableMap(4));
  EXPECT_EQ(f.count_family(ClauseFamily::kCliqueBlue), 0u);
  EXPECT_EQ(f.count_family(ClauseFamily::kCliqueRed), 4u);
}

TEST(Clique, FiveCycleSatisfies) {
  RamseyInstanceSpec s = make_instance(3, 3, 5, false);
  s.enable_lex_sb = false;
  CnfFormula f = encode_ramsey(s);
  AdjMatrix c5 = AdjMatrix::from_edges(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  EXPECT_TRUE(satisfies(f, edges_only(c5, f.num_vars())));
}

TEST(Clique, R22IsUnsat) {
  RamseyInstanceSpec s;
  s.p = 2;
  s.q = 2;
  s.n = 3;
  s.enable_lex_sb = false;
  EXPECT_FALSE(oracle::dpll(encode_ramsey(s)));
}

TEST(Clique, MatchesBruteForceGoodness) {
  for (int n = 4; n <= 5; ++n) {
    RamseyInstanceSpec s = make_instance(3, 3, n, false);
    s.enable_lex_sb = false;
    CnfFormula f = encode_ramsey(s);
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(n)); ++mask) {
      AdjMatrix m = oracle::from_mask(n, mask);
      EXPECT_EQ(satisfies(f, edges_only(m, f.num_vars())), oracle::is_ramsey_good(m, 3, 3));
    }
  }
}

TEST(LexSb, ThreeVerticesGivesThreeImplications) {
  EdgeVariableMap map(3);
  CnfFormula f = build_lex_sb_clauses(3, map);
  EXPECT_EQ(f.num_clauses(), 3u);
  EXPECT_EQ(f.num_vars(), 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(f.clause(i).size(), 2u);
}

TEST(LexSb, AuxiliaryCountIsCubic) {
  for (int n = 3; n <= 12; ++n) {
    CnfFormula f = build_lex_sb_clauses(n, EdgeVariableMap(n));
    const int pairs = n * (n - 1) / 2;
    EXPECT_EQ(f.num_vars() - num_edges(n), pairs * (n - 3));
    EXPECT_EQ(f.num_clauses(), static_cast<std::size_t>(pairs * (3 * (n - 2) - 2)));
  }
}

// Direct check of the lex condition on a full matrix.
static bool lex_ok(const AdjMatrix& m) {
  const int n = m.order();
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k) {
        if (k == i || k == j) continue;
        const bool x = m.adjacent(i, k), y = m.adjacent(j, k);
        if (x != y) {
          if (x && !y) return false;
          break;
        }
      }
  return true;
}

TEST(LexSb, SingleEdgeOnFourViolates) {
  AdjMatrix m = AdjMatrix::from_edges(4, {{1, 2}});
  EXPECT_FALSE(lex_ok(m));
  CnfFormula f = build_lex_sb_clauses(4, EdgeVariableMap(4));
  EXPECT_FALSE(oracle::dpll(f, edges_only(m, f.num_vars())));
  EXPECT_TRUE(oracle::dpll(f, edges_only(AdjMatrix(4), f.num_vars())));
}

TEST(LexSb, ClausesMatchDirectCondition) {
  for (int n = 3; n <= 5; ++n) {
    CnfFormula f = build_lex_sb_clauses(n, EdgeVariableMap(n));
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(n)); ++mask) {
      AdjMatrix m = oracle::from_mask(n, mask);
      EXPECT_EQ(oracle::dpll(f, edges_only(m, f.num_vars())), lex_ok(m)) << "n=" << n << " mask=" << mask;
    }
  }
}

// Every isomorphism class keeps at least one member; canonical members
// always satisfy the constraint.
TEST(LexSb, SoundUpToIsomorphism) {
  for (int n = 3; n <= 6; ++n) {
    std::map<std::string, bool> class_ok;
    for (std::uint64_t mask = 0; mask < (1ull << num_edges(n)); ++mask) {
      AdjMatrix m = oracle::from_mask(n, mask);
      const std::string key = oracle::min_key(m);
      const bool ok = lex_ok(m);
      class_ok[key] = class_ok[key] || ok;
      if (oracle::key_string(m) == key) {
        EXPECT_TRUE(ok);
      }
    }
    for (const auto& [key, ok] : class_ok) EXPECT_TRUE(ok) << "n=" << n << " class " << key;
  }
}

TEST(Totalizer, SingleInput) {
  std::vector<int> in{1};
  CnfFormula f = build_totalizer(in, 1, 1, 2);
  ASSERT_EQ(f.num_clauses(), 1u);
  EXPECT_EQ(f.clause(0)[0], Literal::pos(1));
}

TEST(Totalizer, RejectsBadBounds) {
  std::vector<int> in{1, 2, 3};
  EXPECT_THROW(build_totalizer(in, 2, 1, 4), std::domain_error);
  EXPECT_THROW(build_totalizer(in, 0, 4, 4), std::domain_error);
  EXPECT_THROW(build_totalizer(in, -1, 2, 4), std::domain_error);
  EXPECT_THROW(build_totalizer(in, 0, 2, 3), std::domain_error);
}

TEST(Totalizer, ExhaustiveSmall) {
  for (int m = 1; m <= 6; ++m)
    for (int lo = 0; lo <= m; ++lo)
      for (int hi = lo; hi <= m; ++hi) {
        std::vector<int> in(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) in[static_cast<std::size_t>(i)] = i + 1;
        CnfFormula f = build_totalizer(in, lo, hi, m + 1);
        for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
          Assignment a(static_cast<std::size_t>(f.num_vars()) + 1, 0);
          for (int i = 0; i < m; ++i) a[static_cast<std::size_t>(i + 1)] = (bits >> i) & 1 ? 1 : -1;
          const int pc = std::popcount(bits);
          EXPECT_EQ(oracle::dpll(f, a), pc >= lo && pc <= hi) << m << " " << lo << " " << hi << " " << bits;
        }
      }
}

TEST(Totalizer, AuxiliaryCountIsQuasiLinear) {
  for (int m = 2; m <= 64; ++m) {
    std::vector<int> in(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) in[static_cast<std::size_t>(i)] = i + 1;
    CnfFormula f = build_totalizer(in, 0, m, m + 1);
    int depth = 0;
    while ((1 << depth) < m) ++depth;
    EXPECT_LE(f.num_vars() - m, m * depth);
  }
}

TEST(Degree, GraverYackelBounds) {
  EXPECT_EQ(graver_yackel_bounds(3, 8, 28), (DegreeBounds{5, 7}));
  EXPECT_EQ(graver_yackel_bounds(8, 3, 28), (DegreeBounds{20, 22}));
  EXPECT_EQ(make_r93_subproblem().degree, (DegreeBounds{19, 22}));
  EXPECT_EQ(make_r39_subproblem().degree, (DegreeBounds{4, 7}));
  EXPECT_FALSE(graver_yackel_bounds(3, 3, 6).has_value());
}

TEST(Degree, OneTotalizerPerVertex) {
  RamseyInstanceSpec s = make_instance(3, 4, 8);
  ASSERT_TRUE(s.degree);
  CnfFormula f = build_degree_bounds(s, EdgeVariableMap(8));
  EXPECT_GT(f.count_family(ClauseFamily::kDegree), 0u);
  // Check against direct degree test over sampled graphs.
  for (std::uint64_t mask = 0; mask < 2000; ++mask) {
    const std::uint64_t x = mask * 0x9E3779B97F4A7C15ull;
    AdjMatrix m = oracle::from_mask(8, x >> 36);
    bool ok = true;
    for (int v = 1; v <= 8; ++v) ok = ok && m.degree(v) >= s.degree->lo && m.degree(v) <= s.degree->hi;
    CnfFormula g = f;
    for (int v = 1; v <= 28; ++v) g.add_clause({Literal::make(v, m.var_bit(v))});
    EXPECT_EQ(solve_sat(g), ok);
  }
}

TEST(Degree, InfeasibleBoundsRejected) {
  RamseyInstanceSpec s;
  s.p = 3;
  s.q = 3;
  s.n = 4;
  s.degree = DegreeBounds{4, 4};
  EXPECT_THROW(s.validate(), std::domain_error);
  EXPECT_THROW(build_degree_bounds(s, EdgeVariableMap(4)), std::domain_error);
}

TEST(EdgeCount, ForcesAllFalseOrTrue) {
  for (int e : {0, 6}) {
    RamseyInstanceSpec s;
    s.p = 5;
    s.q = 5;
    s.n = 4;
    s.edge_count = e;
    CnfFormula f = build_edge_count(s, EdgeVariableMap(4));
    Solver solver(f);
    solver.solve(0);
    auto fixed = solver.fixed_literals();
    int count = 0;
    for (auto l : fixed)
      if (l.var() <= 6) {
        EXPECT_EQ(l.positive(), e == 6);
        ++count;
      }
    EXPECT_EQ(count, 6);
  }
}

TEST(EdgeCount, R93Subproblem) {
  RamseyInstanceSpec s = make_r93_subproblem();
  EXPECT_EQ(s.n, 27);
  EXPECT_EQ(*s.edge_count, 271);
  EXPECT_EQ(EdgeVariableMap(27).total_vars(), 351);
  EXPECT_EQ(s.label(), "(8,3;27;271)");
  EXPECT_EQ(make_r39_subproblem().label(), "(3,8;27;80)");
  RamseyInstanceSpec bad = s;
  bad.edge_count = 352;
  EXPECT_THROW(bad.validate(), std::domain_error);
}

TEST(Encode, FamilyOrderAndNumbering) {
  RamseyInstanceSpec s = make_instance(3, 4, 8);
  s.edge_count = 10;
  CnfFormula f = encode_ramsey(s);
  std::vector<ClauseFamily> order;
  for (const auto& r : f.family_ranges()) order.push_back(r.family);
  EXPECT_EQ(order, (std::vector<ClauseFamily>{ClauseFamily::kCliqueBlue, ClauseFamily::kCliqueRed,
                                              ClauseFamily::kLexSb, ClauseFamily::kDegree,
                                              ClauseFamily::kEdgeCount}));
  EXPECT_EQ(f.edge_vars(), 28);
  std::ostringstream a, b;
  write_dimacs(a, f);
  write_dimacs(b, encode_ramsey(s));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Encode, DimacsRoundTrip) {
  CnfFormula f = encode_ramsey(make_instance(3, 4, 7));
  std::stringstream ss;
  write_dimacs(ss, f);
  CnfFormula g = read_dimacs(ss);
  ASSERT_EQ(g.num_clauses(), f.num_clauses());
  EXPECT_EQ(g.num_vars(), f.num_vars());
  for (std::size_t i = 0; i < f.num_clauses(); ++i)
    EXPECT_TRUE(std::equal(f.clause(i).begin(), f.clause(i).end(), g.clause(i).begin(), g.clause(i).end()));
  std::stringstream bad("p cnf 2 2\n1 0\n");
  EXPECT_THROW(read_dimacs(bad), std::invalid_argument);
}

TEST(Encode, MetadataListsFamilies) {
  RamseyInstanceSpec s = make_r93_subproblem();
  s.n = 9;
  s.edge_count = 20;
  s.degree = DegreeBounds{3, 6};
  CnfFormula f = encode_ramsey(s);
  std::ostringstream os;
  write_metadata(os, s, f);
  EXPECT_NE(os.str().find("family.card-edges="), std::string::npos);
  EXPECT_NE(os.str().find("edge_vars=36"), std::string::npos);
}

TEST(Encode, SmallVerdicts) {
  EXPECT_TRUE(solve_sat(encode_ramsey(make_instance(3, 3, 5))));
  EXPECT_FALSE(solve_sat(encode_ramsey(make_instance(3, 3, 6))));
  EXPECT_TRUE(solve_sat(encode_ramsey(make_instance(3, 5, 13))));
  EXPECT_FALSE(solve_sat(encode_ramsey(make_instance(3, 5, 14))));
  EXPECT_FALSE(solve_sat(encode_ramsey(make_instance(5, 3, 14))));
}

TEST(Encode, SymmetricSatisfiability) {
  for (int n = 2; n <= 9; ++n)
    for (int p = 2; p <= 4; ++p)
      for (int q = p + 1; q <= 4; ++q) {
        const bool a = solve_sat(encode_ramsey(make_instance(p, q, n)));
        const bool b = solve_sat(encode_ramsey(make_instance(q, p, n)));
        EXPECT_EQ(a, b) << p << "," << q << ";" << n;
        const auto r = known_ramsey_bounds(p, q);
        EXPECT_EQ(a, n < r->first) << p << "," << q << ";" << n;
      }
}
