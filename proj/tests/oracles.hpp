#pragma once

// Brute-force reference implementations used to pin expected values.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "ramsey/graph.hpp"

namespace oracle {

using ramsey::AdjMatrix;
using ramsey::LexKey;
using ramsey::Permutation;

inline std::string key_string(const AdjMatrix& m) { return ramsey::lex_key(m).to_string(); }

// Lex-least key over all k! relabelings.
inline std::string min_key(const AdjMatrix& m) {
  std::vector<int> img(static_cast<std::size_t>(m.order()));
  std::iota(img.begin(), img.end(), 1);
  std::string best = key_string(m);
  do {
    const std::string k = key_string(ramsey::apply_perm(m, Permutation(img)));
    if (k < best) best = k;
  } while (std::next_permutation(img.begin(), img.end()));
  return best;
}

inline bool canonical(const AdjMatrix& m) { return min_key(m) == key_string(m); }

inline AdjMatrix from_mask(int n, std::uint64_t mask) {
  AdjMatrix m(n);
  for (int t = 0; t < ramsey::num_edges(n); ++t) m.set_var_bit(t + 1, (mask >> t) & 1);
  return m;
}

inline bool has_clique(const AdjMatrix& m, int size, bool color) {
  const int n = m.order();
  std::vector<int> pick;
  auto rec = [&](auto&& self, int start) -> bool {
    if (static_cast<int>(pick.size()) == size) return true;
    for (int v = start; v <= n; ++v) {
      bool ok = true;
      for (int u : pick)
        if (m.adjacent(u, v) != color) {
          ok = false;
          break;
        }
      if (!ok) continue;
      pick.push_back(v);
      if (self(self, v + 1)) return true;
      pick.pop_back();
    }
    return false;
  };
  return rec(rec, 1);
}

// Blue (edge true) p-clique or red q-clique absent.
inline bool is_ramsey_good(const AdjMatrix& m, int p, int q) {
  return !has_clique(m, p, true) && !has_clique(m, q, false);
}

// Non-isomorphic (p,q;n)-graphs, grown one vertex at a time from the
// good graphs of order n-1 and deduplicated by min_key.
inline std::vector<AdjMatrix> ramsey_classes(int p, int q, int n) {
  std::vector<AdjMatrix> level{AdjMatrix(1)};
  for (int k = 2; k <= n; ++k) {
    std::set<std::string> seen;
    std::vector<AdjMatrix> next;
    for (const auto& g : level) {
      for (std::uint32_t nb = 0; nb < (1u << (k - 1)); ++nb) {
        AdjMatrix h(k);
        for (auto [i, j] : g.edges()) h.set(i, j, true);
        for (int i = 1; i < k; ++i)
          if ((nb >> (i - 1)) & 1) h.set(i, k, true);
        if (!is_ramsey_good(h, p, q)) continue;
        const std::string key = min_key(h);
        if (seen.insert(key).second) next.push_back(h);
      }
    }
    level = std::move(next);
  }
  return level;
}

}  // namespace oracle

#include "ramsey/cnf.hpp"

namespace oracle {

// Plain recursive DPLL with naive unit propagation.
inline bool dpll(const ramsey::CnfFormula& f, ramsey::Assignment a) {
  for (;;) {
    bool changed = false;
    for (std::size_t i = 0; i < f.num_clauses(); ++i) {
      int unassigned = 0;
      ramsey::Literal last;
      bool sat = false;
      for (auto l : f.clause(i)) {
        const int v = a[static_cast<std::size_t>(l.var())];
        if (v == 0) {
          ++unassigned;
          last = l;
        } else if ((v > 0) == l.positive()) {
          sat = true;
          break;
        }
      }
      if (sat) continue;
      if (unassigned == 0) return false;
      if (unassigned == 1) {
        a[static_cast<std::size_t>(last.var())] = last.positive() ? 1 : -1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (int v = 1; v <= f.num_vars(); ++v) {
    if (a[static_cast<std::size_t>(v)] != 0) continue;
    a[static_cast<std::size_t>(v)] = 1;
    if (dpll(f, a)) return true;
    a[static_cast<std::size_t>(v)] = -1;
    return dpll(f, a);
  }
  return true;
}

inline bool dpll(const ramsey::CnfFormula& f) {
  return dpll(f, ramsey::Assignment(static_cast<std::size_t>(f.num_vars()) + 1, 0));
}

}  // namespace oracle
