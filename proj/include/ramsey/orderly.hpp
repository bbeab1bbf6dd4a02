#pragma once

// Orderly generation inside the solver: when an upper-left submatrix of the
// adjacency matrix becomes fully assigned, test whether it is lex-least
// among all vertex relabelings and, if not, block it with a clause backed
// by a permutation witness.

#include <bit>
#include <chrono>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ramsey/cnf.hpp"
#include "ramsey/graph.hpp"
#include "ramsey/solver.hpp"

namespace ramsey {

struct CanonicityResult {
  bool canonical = true;
  std::optional<Permutation> witness;
  // Edge variable where the permuted key first drops below the original.
  std::optional<int> first_diff_pos;
  // The search stopped early (pseudo mode); canonical is then true.
  bool timed_out = false;
};

enum class MinimizationRule { kFull, kWitnessPrefix };

inline const char* rule_name(MinimizationRule r) {
  return r == MinimizationRule::kFull ? "full" : "witness-prefix";
}

inline MinimizationRule parse_rule(std::string_view s) {
  if (s == "full") return MinimizationRule::kFull;
  if (s == "witness-prefix") return MinimizationRule::kWitnessPrefix;
  throw std::invalid_argument("unknown minimization rule '" + std::string(s) + "'");
}

struct WitnessRecord {
  std::uint64_t witness_id = 0;
  int k = 0;
  Clause clause;
  Permutation perm;
  IntermediateMatrix matrix;
};

// Largest k > last_k whose columns 2..k are fully assigned, as a matrix.
// `values` holds +1/-1/0 per edge variable, index 0 unused.
inline std::optional<IntermediateMatrix> detect_complete_submatrix(std::span<const std::int8_t> values, int n,
                                                                   int last_k) {
  int k = 1;
  for (int j = 2; j <= n; ++j) {
    bool full = true;
    for (int i = 1; i < j && full; ++i) full = values[static_cast<std::size_t>(edge_var(i, j, n))] != 0;
    if (!full) break;
    k = j;
  }
  if (k <= last_k || k < 2) return std::nullopt;
  IntermediateMatrix m(k);
  for (int v = 1; v <= num_edges(k); ++v) m.set_var_bit(v, values[static_cast<std::size_t>(v)] > 0);
  return m;
}

inline std::optional<IntermediateMatrix> detect_complete_submatrix(std::span<const Literal> assigned, int n,
                                                                   int last_k) {
  std::vector<std::int8_t> values(static_cast<std::size_t>(num_edges(n)) + 1, 0);
  for (Literal l : assigned) {
    if (l.var() > num_edges(n)) continue;
    values[static_cast<std::size_t>(l.var())] = l.positive() ? 1 : -1;
  }
  return detect_complete_submatrix(values, n, last_k);
}

// Branch and bound over the vertex placed at each position. Column b of the
// relabeled matrix is compared with column b of the original as soon as
// positions 1..b are placed. Automorphisms met at equal leaves prune
// equivalent siblings.
class CanonicityChecker {
 public:
  static constexpr int kMaxOrder = 64;

  // node_limit_time: wall budget per check; zero disables the limit.
  explicit CanonicityChecker(std::chrono::microseconds time_cap = std::chrono::microseconds::zero())
      : time_cap_(time_cap) {}

  CanonicityResult check(const IntermediateMatrix& m) {
    k_ = m.order();
    if (k_ > kMaxOrder) throw std::domain_error("canonicity check supports order <= 64");
    CanonicityResult res;
    if (k_ <= 1) return res;
    adj_.assign(static_cast<std::size_t>(k_), 0);
    for (int j = 2; j <= k_; ++j)
      for (int i = 1; i < j; ++i)
        if (m.adjacent(i, j)) {
          adj_[static_cast<std::size_t>(i - 1)] |= bit(j - 1);
          adj_[static_cast<std::size_t>(j - 1)] |= bit(i - 1);
        }
    sigma_.assign(static_cast<std::size_t>(k_), -1);
    posadj_.assign(static_cast<std::size_t>(k_), 0);
    autos_.clear();
    first_leaf_.clear();
    nodes_ = 0;
    timed_out_ = false;
    if (time_cap_.count() > 0) deadline_ = std::chrono::steady_clock::now() + time_cap_;
    const Outcome out = search(0, 0);
    if (out == Outcome::kLess) {
      res.canonical = false;
      std::vector<int> inv(static_cast<std::size_t>(k_));
      for (int b = 0; b < k_; ++b) inv[static_cast<std::size_t>(sigma_[static_cast<std::size_t>(b)])] = b + 1;
      res.witness = Permutation(std::move(inv));
      res.first_diff_pos = diff_pos_;
    } else if (out == Outcome::kTimeout) {
      res.timed_out = true;
    }
    return res;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  enum class Outcome { kNotLess, kLess, kTimeout, kJump };
  static constexpr std::size_t kMaxAutos = 64;

  static std::uint64_t bit(int i) { return std::uint64_t{1} << i; }

  Outcome search(int b, std::uint64_t used) {
    if (b == k_) {
      if (first_leaf_.empty()) {
        first_leaf_ = sigma_;
        first_inv_.assign(static_cast<std::size_t>(k_), 0);
        for (int r = 0; r < k_; ++r) first_inv_[static_cast<std::size_t>(sigma_[static_cast<std::size_t>(r)])] = r;
        return Outcome::kNotLess;
      }
      // sigma o first^-1 is an automorphism; the subtree where sigma left
      // the first path mirrors one already explored.
      std::vector<int> alpha(static_cast<std::size_t>(k_));
      for (int v = 0; v < k_; ++v) {
        alpha[static_cast<std::size_t>(v)] = sigma_[static_cast<std::size_t>(first_inv_[static_cast<std::size_t>(v)])];
      }
      if (autos_.size() < kMaxAutos) autos_.push_back(std::move(alpha));
      jump_to_ = 0;
      while (sigma_[static_cast<std::size_t>(jump_to_)] == first_leaf_[static_cast<std::size_t>(jump_to_)]) ++jump_to_;
      return Outcome::kJump;
    }
    if ((++nodes_ & 4095) == 0 && time_cap_.count() > 0 && std::chrono::steady_clock::now() > deadline_) {
      return Outcome::kTimeout;
    }
    const std::uint64_t all = k_ == 64 ? ~std::uint64_t{0} : bit(k_) - 1;
    const std::uint64_t col_m = adj_[static_cast<std::size_t>(b)] & (bit(b) - 1);
    std::uint64_t tried = 0;
    std::size_t autos_seen = 0;
    std::vector<int> orbit;
    for (std::uint64_t cand = all & ~used; cand != 0; cand &= cand - 1) {
      const int x = std::countr_zero(cand);
      if (autos_.size() != autos_seen) {
        autos_seen = autos_.size();
        build_orbits(b, orbit);
      }
      if (!orbit.empty()) {
        bool equivalent = false;
        for (std::uint64_t t = tried; t != 0 && !equivalent; t &= t - 1) {
          equivalent = orbit[static_cast<std::size_t>(std::countr_zero(t))] == orbit[static_cast<std::size_t>(x)];
        }
        if (equivalent) continue;
      }
      tried |= bit(x);
      const std::uint64_t col_b = posadj_[static_cast<std::size_t>(x)];
      const std::uint64_t diff = col_b ^ col_m;
      if (diff != 0) {
        const int a = std::countr_zero(diff);
        if (col_m & bit(a)) {
          sigma_[static_cast<std::size_t>(b)] = x;
          for (int r = b + 1; r < k_; ++r) sigma_[static_cast<std::size_t>(r)] = -1;
          complete_sigma(b + 1, used | bit(x));
          diff_pos_ = edge_var(a + 1, b + 1, k_);
          return Outcome::kLess;
        }
        continue;
      }
      sigma_[static_cast<std::size_t>(b)] = x;
      for (std::uint64_t nb = adj_[static_cast<std::size_t>(x)]; nb != 0; nb &= nb - 1) {
        posadj_[static_cast<std::size_t>(std::countr_zero(nb))] |= bit(b);
      }
      const Outcome out = search(b + 1, used | bit(x));
      if (out == Outcome::kLess) return out;
      for (std::uint64_t nb = adj_[static_cast<std::size_t>(x)]; nb != 0; nb &= nb - 1) {
        posadj_[static_cast<std::size_t>(std::countr_zero(nb))] &= ~bit(b);
      }
      if (out == Outcome::kTimeout) return out;
      if (out == Outcome::kJump && jump_to_ < b) return out;
    }
    return Outcome::kNotLess;
  }

  // Orbits of the stored automorphisms that fix positions 0..b-1.
  void build_orbits(int b, std::vector<int>& orbit) {
    orbit.clear();
    bool any = false;
    std::vector<int> parent(static_cast<std::size_t>(k_));
    for (int v = 0; v < k_; ++v) parent[static_cast<std::size_t>(v)] = v;
    auto find = [&](int v) {
      while (parent[static_cast<std::size_t>(v)] != v) {
        parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        v = parent[static_cast<std::size_t>(v)];
      }
      return v;
    };
    for (const auto& s : autos_) {
      bool fixes = true;
      for (int r = 0; r < b && fixes; ++r) {
        const int v = sigma_[static_cast<std::size_t>(r)];
        fixes = s[static_cast<std::size_t>(v)] == v;
      }
      if (!fixes) continue;
      any = true;
      for (int v = 0; v < k_; ++v) {
        const int a = find(v), c = find(s[static_cast<std::size_t>(v)]);
        if (a != c) parent[static_cast<std::size_t>(std::max(a, c))] = std::min(a, c);
      }
    }
    if (!any) return;
    orbit.resize(static_cast<std::size_t>(k_));
    for (int v = 0; v < k_; ++v) orbit[static_cast<std::size_t>(v)] = find(v);
  }

  void complete_sigma(int from, std::uint64_t used) {
    for (int r = from; r < k_; ++r) {
      const int x = std::countr_zero(~used);
      sigma_[static_cast<std::size_t>(r)] = x;
      used |= bit(x);
    }
  }

  std::chrono::microseconds time_cap_;
  std::chrono::steady_clock::time_point deadline_;
  int k_ = 0;
  std::vector<std::uint64_t> adj_;
  std::vector<std::uint64_t> posadj_;
  std::vector<int> sigma_;
  std::vector<std::vector<int>> autos_;
  std::vector<int> first_leaf_;
  std::vector<int> first_inv_;
  int jump_to_ = 0;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;
  int diff_pos_ = 0;
};

inline CanonicityResult is_canonical(const IntermediateMatrix& m) {
  CanonicityChecker checker;
  return checker.check(m);
}

// Edge variables (of the order-k matrix) the blocking clause mentions.
// kWitnessPrefix keeps the key prefix 1..t of m together with the
// variables that the witness maps onto positions 1..t; any matrix agreeing
// with m there is still sent below itself by the same permutation.
inline std::vector<int> blocking_support(const IntermediateMatrix& m, const CanonicityResult& res,
                                         MinimizationRule rule) {
  if (res.canonical || !res.witness || !res.first_diff_pos) {
    throw std::domain_error("blocking_clause: matrix is canonical");
  }
  const int k = m.order();
  const int total = num_edges(k);
  std::vector<int> vars;
  if (rule == MinimizationRule::kFull) {
    for (int v = 1; v <= total; ++v) vars.push_back(v);
    return vars;
  }
  const int t = *res.first_diff_pos;
  std::vector<bool> in(static_cast<std::size_t>(total) + 1, false);
  const Permutation inv = res.witness->inverse();
  for (int s = 1; s <= t; ++s) {
    in[static_cast<std::size_t>(s)] = true;
    auto [a, b] = var_edge(s, k);
    const int u = inv(a), w = inv(b);
    in[static_cast<std::size_t>(edge_var(std::min(u, w), std::max(u, w), k))] = true;
  }
  for (int v = 1; v <= total; ++v)
    if (in[static_cast<std::size_t>(v)]) vars.push_back(v);
  return vars;
}

// Negates m's value on the support. Variable numbering of the order-k
// matrix coincides with the order-n numbering (column-wise layout).
inline Clause blocking_clause(const IntermediateMatrix& m, const CanonicityResult& res,
                              const EdgeVariableMap& map,
                              MinimizationRule rule = MinimizationRule::kWitnessPrefix) {
  if (m.order() > map.order()) throw std::domain_error("blocking_clause: matrix larger than map order");
  Clause c;
  for (int v : blocking_support(m, res, rule)) c.push_back(Literal::make(v, !m.var_bit(v)));
  return c;
}

inline std::string format_witness(const WitnessRecord& r) {
  std::string s = "w " + std::to_string(r.witness_id) + " k=" + std::to_string(r.k) + " perm=";
  for (std::size_t i = 0; i < r.perm.image().size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(r.perm.image()[i]);
  }
  s += " clause=";
  for (Literal l : r.clause) {
    s += std::to_string(l.dimacs());
    s += ' ';
  }
  s += "0 key=" + lex_key(r.matrix).to_hex();
  return s;
}

// Witness log sink shared by the hooks of one run; appends are atomic per
// record.
class WitnessLog {
 public:
  explicit WitnessLog(std::ostream& os, MinimizationRule rule) : os_(os) {
    os_ << "c rule=" << rule_name(rule) << '\n';
    check();
  }
  void append(const WitnessRecord& r) {
    const std::string line = format_witness(r) + '\n';
    std::lock_guard<std::mutex> lock(mu_);
    os_ << line;
    check();
  }
  void flush() {
    std::lock_guard<std::mutex> lock(mu_);
    os_.flush();
    check();
  }

 private:
  void check() {
    if (!os_) throw std::runtime_error("witness log: write failed");
  }
  std::ostream& os_;
  std::mutex mu_;
};

enum class CanonicityMode { kFull, kPseudo };

struct OrderlyOptions {
  CanonicityMode mode = CanonicityMode::kFull;
  std::chrono::microseconds pseudo_cap{1000};
  MinimizationRule rule = MinimizationRule::kWitnessPrefix;
  std::size_t cache_entries = std::size_t{1} << 20;
  // Record every full solution, reject it and continue.
  bool enumerate = false;
  bool keep_records = false;
};

struct OrderlyStats {
  std::uint64_t checks = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t blocked = 0;
  std::uint64_t timeouts = 0;
};

class OrderlyHook : public PropagatorHook {
 public:
  OrderlyHook(int n, OrderlyOptions opts = {}, WitnessLog* log = nullptr)
      : n_(n),
        map_(n),
        opts_(opts),
        log_(log),
        checker_(opts.mode == CanonicityMode::kPseudo ? opts.pseudo_cap : std::chrono::microseconds::zero()),
        values_(static_cast<std::size_t>(num_edges(n)) + 1, 0),
        column_of_(static_cast<std::size_t>(num_edges(n)) + 1, 0),
        col_count_(static_cast<std::size_t>(n) + 1, 0) {
    for (int v = 1; v <= num_edges(n); ++v) column_of_[static_cast<std::size_t>(v)] = var_edge(v, n).second;
  }

  void on_assign(std::span<const Literal> lits, int level) override {
    for (Literal l : lits) {
      const int v = l.var();
      if (v > num_edges(n_)) continue;
      values_[static_cast<std::size_t>(v)] = l.positive() ? 1 : -1;
      ++col_count_[static_cast<std::size_t>(column_of_[static_cast<std::size_t>(v)])];
      trail_.push_back({v, level});
    }
  }

  void on_backtrack(int level) override {
    while (!trail_.empty() && trail_.back().level > level) {
      const int v = trail_.back().var;
      trail_.pop_back();
      values_[static_cast<std::size_t>(v)] = 0;
      const int col = column_of_[static_cast<std::size_t>(v)];
      --col_count_[static_cast<std::size_t>(col)];
      if (col <= canonical_upto_) canonical_upto_ = col - 1;
    }
  }

  std::optional<ExternalClause> provide_external_clause() override {
    if (!queued_.empty()) {
      ExternalClause c = std::move(queued_.front());
      queued_.erase(queued_.begin());
      return c;
    }
    for (int k = canonical_upto_ + 1; k <= n_; ++k) {
      if (col_count_[static_cast<std::size_t>(k)] != k - 1) break;
      if (k < 2) {
        canonical_upto_ = k;
        continue;
      }
      IntermediateMatrix m(k);
      for (int v = 1; v <= num_edges(k); ++v) m.set_var_bit(v, values_[static_cast<std::size_t>(v)] > 0);
      const CanonicityResult res = lookup(m);
      if (res.canonical) {
        canonical_upto_ = k;
        continue;
      }
      return block(m, res);
    }
    return std::nullopt;
  }

  bool on_solution(const Assignment& model) override {
    if (!opts_.enumerate) return true;
    AdjMatrix g(n_);
    Clause c;
    for (int v = 1; v <= num_edges(n_); ++v) {
      const bool t = model[static_cast<std::size_t>(v)] > 0;
      g.set_var_bit(v, t);
      c.push_back(Literal::make(v, !t));
    }
    solutions_.push_back(std::move(g));
    queued_.push_back({std::move(c), false, std::nullopt});
    return false;
  }

  const std::vector<AdjMatrix>& solutions() const { return solutions_; }
  const std::vector<WitnessRecord>& records() const { return records_; }
  const OrderlyStats& stats() const { return stats_; }
  std::uint64_t next_witness_id() const { return next_id_; }

 private:
  struct Entry {
    int var;
    int level;
  };
  struct Cached {
    bool canonical;
    std::vector<int> perm;
    int first_diff_pos;
  };

  static std::string cache_key(const IntermediateMatrix& m) {
    std::string key(1, static_cast<char>(m.order()));
    const auto& bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); i += 8) {
      unsigned char byte = 0;
      for (std::size_t b = 0; b < 8 && i + b < bits.size(); ++b) byte |= static_cast<unsigned char>(bits[i + b] << b);
      key.push_back(static_cast<char>(byte));
    }
    return key;
  }

  CanonicityResult lookup(const IntermediateMatrix& m) {
    std::string key;
    if (opts_.cache_entries > 0) {
      key = cache_key(m);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ++stats_.cache_hits;
        lru_.splice(lru_.begin(), lru_, it->second.second);
        const Cached& c = it->second.first;
        CanonicityResult r;
        r.canonical = c.canonical;
        if (!c.canonical) {
          r.witness = Permutation(c.perm);
          r.first_diff_pos = c.first_diff_pos;
        }
        return r;
      }
    }
    ++stats_.checks;
    CanonicityResult r = checker_.check(m);
    if (r.timed_out) {
      ++stats_.timeouts;
      return r;
    }
    if (opts_.cache_entries > 0) {
      if (cache_.size() >= opts_.cache_entries) {
        cache_.erase(lru_.back());
        lru_.pop_back();
      }
      lru_.push_front(key);
      Cached c{r.canonical, r.witness ? r.witness->image() : std::vector<int>{}, r.first_diff_pos.value_or(0)};
      cache_.emplace(std::move(key), std::make_pair(std::move(c), lru_.begin()));
    }
    return r;
  }

  ExternalClause block(const IntermediateMatrix& m, const CanonicityResult& res) {
    ++stats_.blocked;
    WitnessRecord rec;
    rec.witness_id = next_id_++;
    rec.k = m.order();
    rec.clause = blocking_clause(m, res, map_, opts_.rule);
    rec.perm = *res.witness;
    rec.matrix = m;
    if (log_) log_->append(rec);
    ExternalClause ec{rec.clause, true, rec.witness_id};
    if (opts_.keep_records) records_.push_back(std::move(rec));
    return ec;
  }

  int n_;
  EdgeVariableMap map_;
  OrderlyOptions opts_;
  WitnessLog* log_;
  CanonicityChecker checker_;
  std::vector<std::int8_t> values_;
  std::vector<int> column_of_;
  std::vector<int> col_count_;
  std::vector<Entry> trail_;
  int canonical_upto_ = 1;
  std::vector<ExternalClause> queued_;
  std::vector<AdjMatrix> solutions_;
  std::vector<WitnessRecord> records_;
  std::uint64_t next_id_ = 1;
  OrderlyStats stats_;
  std::list<std::string> lru_;
  std::unordered_map<std::string, std::pair<Cached, std::list<std::string>::iterator>> cache_;
};

inline OrderlyHook make_hook(int n, OrderlyOptions opts = {}, WitnessLog* log = nullptr) {
  return OrderlyHook(n, opts, log);
}

}  // namespace ramsey
