#pragma once

// CNF encodings of Ramsey (p,q;n) and (p,q;n;e) graph existence.
//
// Edge variable true means the edge is blue (present in the graph). Blue
// p-cliques and red q-cliques are forbidden. Clause families are emitted in
// a fixed order (clique-blue, clique-red, lex-sb, degree, edge-count) and
// auxiliary variables are numbered in the same order, so encodings are
// reproducible bit for bit.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ramsey/cnf.hpp"
#include "ramsey/graph.hpp"

namespace ramsey {

struct DegreeBounds {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const DegreeBounds&, const DegreeBounds&) = default;
};

struct RamseyInstanceSpec {
  int p = 3;
  int q = 3;
  int n = 2;
  std::optional<DegreeBounds> degree;
  std::optional<int> edge_count;
  bool enable_lex_sb = true;
  bool enable_cardinality = true;

  void validate() const {
    if (p < 2 || q < 2) throw std::domain_error("spec: p and q must be >= 2");
    if (n < 2) throw std::domain_error("spec: n must be >= 2");
    if (degree && (degree->lo < 0 || degree->lo > degree->hi || degree->hi > n - 1)) {
      throw std::domain_error("spec: degree bounds must satisfy 0 <= lo <= hi <= n-1");
    }
    if (edge_count && (*edge_count < 0 || *edge_count > num_edges(n))) {
      throw std::domain_error("spec: edge count must lie in [0, n(n-1)/2]");
    }
  }

  std::string label() const {
    std::string s = "(" + std::to_string(p) + "," + std::to_string(q) + ";" + std::to_string(n);
    if (edge_count) s += ";" + std::to_string(*edge_count);
    return s + ")";
  }
};

// Known values and bounds [lo, hi] of R(p,q) for 2 <= p,q <= 9 with p or q
// at most 5; R(2,q) = q.
inline std::optional<std::pair<int, int>> known_ramsey_bounds(int p, int q) {
  if (p > q) std::swap(p, q);
  if (p < 2) return std::nullopt;
  if (p == 2) return std::pair{q, q};
  struct Entry {
    int p, q, lo, hi;
  };
  static constexpr Entry kTable[] = {
      {3, 3, 6, 6},     {3, 4, 9, 9},     {3, 5, 14, 14},   {3, 6, 18, 18},
      {3, 7, 23, 23},   {3, 8, 28, 28},   {3, 9, 36, 36},   {4, 4, 18, 18},
      {4, 5, 25, 25},   {4, 6, 36, 40},   {4, 7, 49, 58},   {4, 8, 59, 79},
      {4, 9, 73, 105},  {5, 5, 43, 46},   {5, 6, 59, 85},   {5, 7, 80, 133},
      {5, 8, 101, 193}, {5, 9, 133, 282},
  };
  for (const auto& e : kTable)
    if (e.p == p && e.q == q) return std::pair{e.lo, e.hi};
  return std::nullopt;
}

// Blue-degree bounds every vertex of a (p,q;n)-graph satisfies:
// n - R(p,q-1) <= deg(v) <= R(p-1,q) - 1, computed from upper bounds on the
// Ramsey numbers and clipped to [0, n-1]. Empty when a needed value is
// unknown or the interval is empty (the instance is then trivially
// unsatisfiable and is left to the clique clauses).
inline std::optional<DegreeBounds> graver_yackel_bounds(int p, int q, int n) {
  const auto rq = known_ramsey_bounds(p, q - 1);
  const auto rp = known_ramsey_bounds(p - 1, q);
  if (!rq || !rp) return std::nullopt;
  DegreeBounds b{std::max(0, n - rq->second), std::min(n - 1, rp->second - 1)};
  if (b.lo > b.hi) return std::nullopt;
  return b;
}

inline RamseyInstanceSpec make_instance(int p, int q, int n, bool cardinality = true) {
  RamseyInstanceSpec s;
  s.p = p;
  s.q = q;
  s.n = n;
  s.enable_cardinality = cardinality;
  if (cardinality) s.degree = graver_yackel_bounds(p, q, n);
  s.validate();
  return s;
}

namespace detail {

template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k > n || k < 1) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
  for (;;) {
    fn(std::span<const int>(idx));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i + 1) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace detail

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

inline void add_clique_clauses(CnfFormula& f, const RamseyInstanceSpec& spec,
                               const EdgeVariableMap& map) {
  Clause c;
  auto emit = [&](int size, bool blue) {
    const ClauseFamily fam = blue ? ClauseFamily::kCliqueBlue : ClauseFamily::kCliqueRed;
    detail::for_each_subset(spec.n, size, [&](std::span<const int> s) {
      c.clear();
      for (std::size_t b = 1; b < s.size(); ++b)
        for (std::size_t a = 0; a < b; ++a) {
          const int v = map.var(s[a], s[b]);
          c.push_back(blue ? Literal::neg(v) : Literal::pos(v));
        }
      f.add_clause(c, fam);
    });
  };
  emit(spec.p, true);
  emit(spec.q, false);
}

inline CnfFormula build_clique_clauses(const RamseyInstanceSpec& spec, const EdgeVariableMap& map) {
  CnfFormula f(map.total_vars(), map.total_vars());
  add_clique_clauses(f, spec, map);
  return f;
}

// Row i without columns i,j is lexicographically <= row j without columns
// i,j, for every i < j. eq_t means the rows agree on the first t-1
// compared positions; eq_1 is implicitly true.
inline void add_lex_sb_clauses(CnfFormula& f, int n, const EdgeVariableMap& map) {
  std::vector<int> xs, ys;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      xs.clear();
      ys.clear();
      for (int k = 1; k <= n; ++k) {
        if (k == i || k == j) continue;
        xs.push_back(map.var(i, k));
        ys.push_back(map.var(j, k));
      }
      std::optional<Literal> eq;
      for (std::size_t t = 0; t < xs.size(); ++t) {
        const Literal x = Literal::pos(xs[t]);
        const Literal y = Literal::pos(ys[t]);
        Clause c;
        if (eq) c.push_back(~*eq);
        c.push_back(~x);
        c.push_back(y);
        f.add_clause(c, ClauseFamily::kLexSb);
        if (t + 1 == xs.size()) break;
        const Literal next = Literal::pos(f.new_var());
        c.clear();
        if (eq) c.push_back(~*eq);
        c.insert(c.end(), {~x, ~y, next});
        f.add_clause(c, ClauseFamily::kLexSb);
        c.clear();
        if (eq) c.push_back(~*eq);
        c.insert(c.end(), {x, y, next});
        f.add_clause(c, ClauseFamily::kLexSb);
        eq = next;
      }
    }
  }
}

inline CnfFormula build_lex_sb_clauses(int n, const EdgeVariableMap& map) {
  CnfFormula f(map.total_vars(), map.total_vars());
  add_lex_sb_clauses(f, n, map);
  return f;
}

namespace detail {

// Returns the count variables r_1..r_m of the node covering `inputs`.
inline std::vector<int> totalizer_node(CnfFormula& f, std::span<const int> inputs,
                                       ClauseFamily fam) {
  if (inputs.size() == 1) return {inputs[0]};
  const std::size_t left = (inputs.size() + 1) / 2;
  const std::vector<int> a = totalizer_node(f, inputs.first(left), fam);
  const std::vector<int> b = totalizer_node(f, inputs.subspan(left), fam);
  const int m1 = static_cast<int>(a.size());
  const int m2 = static_cast<int>(b.size());
  const int m0 = m1 + m2;
  std::vector<int> r(static_cast<std::size_t>(m0));
  for (auto& v : r) v = f.new_var();
  auto at = [](const std::vector<int>& vs, int i) { return vs[static_cast<std::size_t>(i - 1)]; };
  Clause c;
  for (int alpha = 0; alpha <= m1; ++alpha) {
    for (int beta = 0; beta <= m2; ++beta) {
      const int sigma = alpha + beta;
      // a_alpha & b_beta -> r_sigma, with a_0 = b_0 = r_0 = true.
      if (sigma > 0) {
        c.clear();
        if (alpha > 0) c.push_back(Literal::neg(at(a, alpha)));
        if (beta > 0) c.push_back(Literal::neg(at(b, beta)));
        c.push_back(Literal::pos(at(r, sigma)));
        f.add_clause(c, fam);
      }
      // r_{sigma+1} -> a_{alpha+1} | b_{beta+1}, with index m+1 false.
      if (sigma < m0) {
        c.clear();
        if (alpha < m1) c.push_back(Literal::pos(at(a, alpha + 1)));
        if (beta < m2) c.push_back(Literal::pos(at(b, beta + 1)));
        c.push_back(Literal::neg(at(r, sigma + 1)));
        f.add_clause(c, fam);
      }
    }
  }
  return r;
}

}  // namespace detail

// Between lo and hi of `inputs` are true. Returns the root count variables.
inline std::vector<int> add_totalizer(CnfFormula& f, std::span<const int> inputs, int lo, int hi,
                                      ClauseFamily fam = ClauseFamily::kOther) {
  const int m = static_cast<int>(inputs.size());
  if (lo < 0 || lo > hi || hi > m) {
    throw std::domain_error("totalizer: need 0 <= lo <= hi <= m (lo=" + std::to_string(lo) +
                            ", hi=" + std::to_string(hi) + ", m=" + std::to_string(m) + ")");
  }
  if (m == 0) return {};
  std::vector<int> root = detail::totalizer_node(f, inputs, fam);
  for (int i = 1; i <= lo; ++i) f.add_clause({Literal::pos(root[static_cast<std::size_t>(i - 1)])}, fam);
  for (int i = hi + 1; i <= m; ++i) f.add_clause({Literal::neg(root[static_cast<std::size_t>(i - 1)])}, fam);
  return root;
}

// Standalone totalizer over `inputs`; auxiliaries start at next_free_var.
inline CnfFormula build_totalizer(std::span<const int> inputs, int lo, int hi, int next_free_var) {
  for (int v : inputs) {
    if (v < 1 || v >= next_free_var) {
      throw std::domain_error("totalizer: input variables must lie below next_free_var");
    }
  }
  CnfFormula f(next_free_var - 1);
  add_totalizer(f, inputs, lo, hi);
  return f;
}

inline void add_degree_bounds(CnfFormula& f, const RamseyInstanceSpec& spec,
                              const EdgeVariableMap& map) {
  if (!spec.degree) throw std::domain_error("degree bounds: spec has no degree bounds");
  const int n = spec.n;
  if (spec.degree->lo > n - 1) throw std::domain_error("degree bounds: lower bound exceeds n-1");
  const int hi = std::min(spec.degree->hi, n - 1);
  std::vector<int> inputs;
  for (int v = 1; v <= n; ++v) {
    inputs.clear();
    for (int u = 1; u <= n; ++u)
      if (u != v) inputs.push_back(map.var(u, v));
    add_totalizer(f, inputs, spec.degree->lo, hi, ClauseFamily::kDegree);
  }
}

inline CnfFormula build_degree_bounds(const RamseyInstanceSpec& spec, const EdgeVariableMap& map) {
  CnfFormula f(map.total_vars(), map.total_vars());
  add_degree_bounds(f, spec, map);
  return f;
}

inline void add_edge_count(CnfFormula& f, const RamseyInstanceSpec& spec,
                           const EdgeVariableMap& map) {
  if (!spec.edge_count) throw std::domain_error("edge count: spec has no edge count");
  const int e = *spec.edge_count;
  if (e < 0 || e > map.total_vars()) throw std::domain_error("edge count exceeds n(n-1)/2");
  std::vector<int> inputs(static_cast<std::size_t>(map.total_vars()));
  for (int v = 1; v <= map.total_vars(); ++v) inputs[static_cast<std::size_t>(v - 1)] = v;
  add_totalizer(f, inputs, e, e, ClauseFamily::kEdgeCount);
}

inline CnfFormula build_edge_count(const RamseyInstanceSpec& spec, const EdgeVariableMap& map) {
  CnfFormula f(map.total_vars(), map.total_vars());
  add_edge_count(f, spec, map);
  return f;
}

inline CnfFormula encode_ramsey(const RamseyInstanceSpec& spec) {
  spec.validate();
  const EdgeVariableMap map(spec.n);
  CnfFormula f(map.total_vars(), map.total_vars());
  add_clique_clauses(f, spec, map);
  if (spec.enable_lex_sb) add_lex_sb_clauses(f, spec.n, map);
  if (spec.enable_cardinality) {
    if (spec.degree) add_degree_bounds(f, spec, map);
    if (spec.edge_count) add_edge_count(f, spec, map);
  }
  return f;
}

// A (9,3;36)-graph contains an (8,3;27;271)-graph: C(27,2) - 80 = 271.
inline RamseyInstanceSpec make_r93_subproblem() {
  RamseyInstanceSpec s;
  s.p = 8;
  s.q = 3;
  s.n = 27;
  s.edge_count = num_edges(27) - 80;
  s.degree = DegreeBounds{19, 22};
  s.validate();
  return s;
}

// The complementary form: a (3,9;36)-graph contains a (3,8;27;80)-graph.
inline RamseyInstanceSpec make_r39_subproblem() {
  RamseyInstanceSpec s;
  s.p = 3;
  s.q = 8;
  s.n = 27;
  s.edge_count = 80;
  s.degree = DegreeBounds{4, 7};
  s.validate();
  return s;
}

// Sidecar metadata: key=value lines describing the spec and the clause
// index ranges [begin,end) of each family.
inline void write_metadata(std::ostream& os, const RamseyInstanceSpec& spec, const CnfFormula& f) {
  os << "p=" << spec.p << '\n'
     << "q=" << spec.q << '\n'
     << "n=" << spec.n << '\n'
     << "degree=" << (spec.degree ? std::to_string(spec.degree->lo) + ":" + std::to_string(spec.degree->hi) : "none") << '\n'
     << "edges=" << (spec.edge_count ? std::to_string(*spec.edge_count) : "none") << '\n'
     << "lex_sb=" << (spec.enable_lex_sb ? 1 : 0) << '\n'
     << "cardinality=" << (spec.enable_cardinality ? 1 : 0) << '\n'
     << "edge_vars=" << f.edge_vars() << '\n'
     << "num_vars=" << f.num_vars() << '\n'
     << "num_clauses=" << f.num_clauses() << '\n';
  for (const auto& r : f.family_ranges()) {
    os << "family." << family_name(r.family) << '=' << r.begin << ':' << r.end << '\n';
  }
}

// Recovers the instance spec from sidecar metadata.
inline RamseyInstanceSpec read_metadata(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("metadata: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument("metadata: missing key '" + k + "'");
    return it->second;
  };
  RamseyInstanceSpec s;
  s.p = std::stoi(need("p"));
  s.q = std::stoi(need("q"));
  s.n = std::stoi(need("n"));
  if (const std::string& d = need("degree"); d != "none") {
    const auto colon = d.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("metadata: degree must be lo:hi");
    s.degree = DegreeBounds{std::stoi(d.substr(0, colon)), std::stoi(d.substr(colon + 1))};
  }
  if (const std::string& e = need("edges"); e != "none") s.edge_count = std::stoi(e);
  s.enable_lex_sb = need("lex_sb") == "1";
  s.enable_cardinality = need("cardinality") == "1";
  s.validate();
  return s;
}

}  // namespace ramsey
