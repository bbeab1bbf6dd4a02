#pragma once

// CDCL SAT solver with an external propagator hook and DRAT proof logging.
//
// Two-watched-literal propagation, 1UIP learning with recursive
// minimization, VSIDS branching with phase saving, Luby restarts and
// LBD-based learned clause reduction. External clauses supplied by a
// PropagatorHook are logged as trusted ('t') proof lines.

#include <algorithm>
#include <atomic>
#include <cassert>
#include <charconv>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramsey/cnf.hpp"

namespace ramsey {

enum class SolveStatus { kSat, kUnsat, kUnknown };
enum class StopReason { kNone, kBudget, kProofCap, kInterrupted };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kSat: return "SAT";
    case SolveStatus::kUnsat: return "UNSAT";
    case SolveStatus::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

struct ExternalClause {
  Clause literals;
  bool trusted = true;
  std::optional<std::uint64_t> witness_id;
};

// Callbacks run synchronously on the solver's thread. Only variables
// 1..SolverOptions::hook_vars are reported.
class PropagatorHook {
 public:
  virtual ~PropagatorHook() = default;
  // Literals fixed since the previous notification; all belong to `level`.
  virtual void on_assign(std::span<const Literal> lits, int level) = 0;
  // Every assignment above `level` has been undone.
  virtual void on_backtrack(int level) = 0;
  // Polled at each propagation fixpoint until it returns nothing.
  virtual std::optional<ExternalClause> provide_external_clause() = 0;
  // Full assignment reached. Returning false rejects it; the hook must then
  // supply a clause excluding it on the next poll.
  virtual bool on_solution(const Assignment& /*model*/) { return true; }
};

enum class ProofEventKind { kAdd, kAddTrusted, kDelete };

struct ProofEvent {
  ProofEventKind kind;
  Clause literals;
  std::optional<std::uint64_t> witness_id;
  friend bool operator==(const ProofEvent&, const ProofEvent&) = default;
};

class ProofSink {
 public:
  virtual ~ProofSink() = default;
  virtual void add(std::span<const Literal> c) = 0;
  virtual void add_trusted(std::span<const Literal> c, std::optional<std::uint64_t> witness_id) = 0;
  virtual void remove(std::span<const Literal> c) = 0;
  virtual bool over_cap() const { return false; }
};

// In-memory proof, mostly for tests and small instances.
class ProofRecorder : public ProofSink {
 public:
  void add(std::span<const Literal> c) override {
    events_.push_back({ProofEventKind::kAdd, Clause(c.begin(), c.end()), std::nullopt});
  }
  void add_trusted(std::span<const Literal> c, std::optional<std::uint64_t> id) override {
    events_.push_back({ProofEventKind::kAddTrusted, Clause(c.begin(), c.end()), id});
  }
  void remove(std::span<const Literal> c) override {
    events_.push_back({ProofEventKind::kDelete, Clause(c.begin(), c.end()), std::nullopt});
  }
  const std::vector<ProofEvent>& events() const { return events_; }

 private:
  std::vector<ProofEvent> events_;
};

// Text DRAT: "<lits> 0" additions, "d <lits> 0" deletions and
// "t <lits> 0" trusted additions. The byte cap is checked every
// kCapCheckInterval events.
class DratWriter : public ProofSink {
 public:
  static constexpr std::uint64_t kCapCheckInterval = 10000;

  explicit DratWriter(std::ostream& os, std::uint64_t byte_cap = std::numeric_limits<std::uint64_t>::max(),
                      std::uint64_t check_interval = kCapCheckInterval)
      : os_(os), cap_(byte_cap), interval_(check_interval) {
    buf_.reserve(kFlushAt + 256);
  }
  ~DratWriter() override {
    try {
      flush();
    } catch (...) {
    }
  }
  DratWriter(const DratWriter&) = delete;
  DratWriter& operator=(const DratWriter&) = delete;

  void add(std::span<const Literal> c) override { line(nullptr, c); }
  void add_trusted(std::span<const Literal> c, std::optional<std::uint64_t>) override { line("t ", c); }
  void remove(std::span<const Literal> c) override { line("d ", c); }
  bool over_cap() const override { return over_cap_; }

  std::uint64_t bytes() const { return bytes_; }
  std::uint64_t events() const { return events_; }

  void flush() {
    if (buf_.empty()) return;
    os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
    if (!os_) throw std::runtime_error("proof output: write failed");
  }

 private:
  static constexpr std::size_t kFlushAt = 1 << 16;

  void line(const char* prefix, std::span<const Literal> c) {
    const std::size_t before = buf_.size();
    if (prefix) buf_ += prefix;
    char tmp[16];
    for (Literal l : c) {
      auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, l.dimacs());
      buf_.append(tmp, ptr);
      buf_ += ' ';
    }
    buf_ += "0\n";
    bytes_ += buf_.size() - before;
    if (++events_ % interval_ == 0 && bytes_ > cap_) over_cap_ = true;
    if (buf_.size() >= kFlushAt) flush();
  }

  std::ostream& os_;
  std::string buf_;
  std::uint64_t cap_;
  std::uint64_t interval_;
  std::uint64_t bytes_ = 0;
  std::uint64_t events_ = 0;
  bool over_cap_ = false;
};

struct SolverOptions {
  // Variables 1..hook_vars are visible to the hook (the edge variables).
  int hook_vars = 0;
  bool default_phase = false;
  int restart_base = 100;
  double var_decay = 0.95;
  int reduce_first = 2000;
  int reduce_inc = 300;
  std::uint64_t seed = 0;
  double random_decision_freq = 0.0;
  // Attach the clause database export to UNKNOWN results.
  bool export_on_unknown = false;
};

struct ExportedClause {
  Clause literals;
  bool learned = false;
  bool trusted = false;
  bool original = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kUnknown;
  StopReason reason = StopReason::kNone;
  Assignment model;            // valid for kSat
  std::vector<Literal> fixed;  // root-level literals, valid for kUnknown
  std::vector<ExportedClause> exported;
  std::uint64_t conflicts = 0;
};

struct SolverStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t reductions = 0;
  std::uint64_t external_clauses = 0;
  std::uint64_t learned_literals = 0;
};

class Solver {
 public:
  // `formula` must outlive the solver; it is used for model checking.
  explicit Solver(const CnfFormula& formula, SolverOptions opts = {}) : formula_(&formula), opts_(opts) {
    rng_state_ = opts_.seed * 6364136223846793005ULL + 1442695040888963407ULL;
    resize(formula.num_vars());
    Clause buf;
    for (std::size_t i = 0; i < formula.num_clauses() && !unsat_; ++i) {
      auto c = formula.clause(i);
      buf.assign(c.begin(), c.end());
      add_original(buf);
    }
  }

  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  void connect_hook(PropagatorHook* hook) { hook_ = hook; }
  void connect_proof(ProofSink* proof) {
    proof_ = proof;
    if (unsat_ && proof_) proof_->add({});
  }
  void set_interrupt(const std::atomic<bool>* flag) { interrupt_ = flag; }

  int num_vars() const { return nvars_; }
  const SolverStats& stats() const { return stats_; }
  bool known_unsat() const { return unsat_; }

  // Queues an external clause. Safe to call from hook callbacks; the clause
  // takes effect at the next propagation fixpoint.
  void inject_external_clause(std::span<const Literal> c, bool trusted,
                              std::optional<std::uint64_t> witness_id = std::nullopt) {
    pending_.push_back({Clause(c.begin(), c.end()), trusted, witness_id});
  }

  SolveResult solve(std::optional<std::uint64_t> conflict_budget = std::nullopt) {
    SolveResult res;
    const std::uint64_t start_conflicts = stats_.conflicts;
    auto finish_unknown = [&](StopReason why) {
      backtrack(0);
      res.status = SolveStatus::kUnknown;
      res.reason = why;
      res.fixed = fixed_literals();
      if (opts_.export_on_unknown) res.exported = export_clauses();
      res.conflicts = stats_.conflicts - start_conflicts;
      return res;
    };
    if (unsat_) {
      res.status = SolveStatus::kUnsat;
      return res;
    }
    if (conflict_budget && *conflict_budget == 0) {
      // Root propagation only.
      backtrack(0);
      for (;;) {
        CRef confl = propagate();
        if (confl == kNoRef && (hook_ || !pending_.empty()) && external_round(confl) && !unsat_ &&
            confl == kNoRef) {
          continue;
        }
        if (confl != kNoRef) mark_unsat();
        break;
      }
      if (unsat_) {
        res.status = SolveStatus::kUnsat;
        return res;
      }
      return finish_unknown(StopReason::kBudget);
    }
    bool expect_clause = false;
    for (;;) {
      CRef confl = propagate();
      if (confl == kNoRef && (hook_ || !pending_.empty())) {
        bool changed = external_round(confl);
        if (unsat_) break;
        if (changed || confl != kNoRef) {
          expect_clause = false;
          if (confl == kNoRef) continue;
        } else if (expect_clause) {
          throw std::logic_error("propagator rejected a solution without supplying a clause");
        }
      }
      if (confl != kNoRef) {
        ++stats_.conflicts;
        if (decision_level() == 0) {
          mark_unsat();
          break;
        }
        handle_conflict(confl);
        if (unsat_) break;
        if (conflict_budget && stats_.conflicts - start_conflicts >= *conflict_budget) {
          return finish_unknown(StopReason::kBudget);
        }
        if (proof_ && proof_->over_cap()) return finish_unknown(StopReason::kProofCap);
        if (interrupt_ && interrupt_->load(std::memory_order_relaxed)) {
          return finish_unknown(StopReason::kInterrupted);
        }
        continue;
      }
      if (conflicts_since_restart_ >= restart_limit_) {
        ++stats_.restarts;
        ++luby_index_;
        restart_limit_ = static_cast<std::uint64_t>(luby(luby_index_) * opts_.restart_base);
        conflicts_since_restart_ = 0;
        backtrack(0);
        continue;
      }
      if (stats_.conflicts >= next_reduce_) {
        next_reduce_ = stats_.conflicts + static_cast<std::uint64_t>(opts_.reduce_first) +
                       static_cast<std::uint64_t>(opts_.reduce_inc) * (stats_.reductions + 1);
        reduce_db();
      }
      const Lit next = pick_branch();
      if (next == kNoLit) {
        Assignment model = current_model();
        if (hook_ && !hook_->on_solution(model)) {
          expect_clause = true;
          continue;
        }
        if (!satisfies(*formula_, model)) {
          throw std::logic_error("solver produced a model violating the input formula");
        }
        res.status = SolveStatus::kSat;
        res.model = std::move(model);
        res.conflicts = stats_.conflicts - start_conflicts;
        backtrack(0);
        return res;
      }
      if (interrupt_ && (stats_.decisions & 1023) == 0 && interrupt_->load(std::memory_order_relaxed)) {
        return finish_unknown(StopReason::kInterrupted);
      }
      ++stats_.decisions;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      assign(next, kNoRef);
    }
    res.status = SolveStatus::kUnsat;
    res.conflicts = stats_.conflicts - start_conflicts;
    return res;
  }

  std::vector<Literal> fixed_literals() const {
    std::vector<Literal> out;
    const std::size_t end = trail_lim_.empty() ? trail_.size() : static_cast<std::size_t>(trail_lim_[0]);
    for (std::size_t i = 0; i < end; ++i) out.push_back(to_literal(trail_[i]));
    return out;
  }

  // Root-level assigned variables among 1..max_var.
  int count_fixed(int max_var) const {
    int n = 0;
    const std::size_t end = trail_lim_.empty() ? trail_.size() : static_cast<std::size_t>(trail_lim_[0]);
    for (std::size_t i = 0; i < end; ++i) n += static_cast<int>(trail_[i] >> 1) <= max_var ? 1 : 0;
    return n;
  }

  // Value at the root level: +1, -1 or 0.
  int root_value(int var) const {
    const Lit p = 2 * static_cast<Lit>(var);
    if (val_[p] == 0 || level_[static_cast<std::size_t>(var)] != 0) return 0;
    return val_[p];
  }

  // Assigns `lit` at a fresh decision level on top of the root state and
  // propagates, consulting the hook. Returns the number of root-or-probe
  // assigned variables among 1..count_upto, or nothing when the probe
  // conflicts. Clauses the hook produces are kept and added at the root.
  std::optional<int> probe(Literal lit, int count_upto) {
    if (unsat_) return std::nullopt;
    backtrack(0);
    if (propagate() != kNoRef) {
      mark_unsat();
      return std::nullopt;
    }
    const Lit p = to_lit(lit);
    if (val_[p] != 0) {
      if (val_[p] < 0) return std::nullopt;
      return count_fixed(count_upto);
    }
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    assign(p, kNoRef);
    bool failed = propagate() != kNoRef;
    std::vector<ExternalClause> learned;
    if (!failed && hook_) {
      notify_hook();
      while (auto ec = hook_->provide_external_clause()) {
        bool falsified = true;
        for (Literal l : ec->literals)
          if (val_[to_lit(l)] >= 0) falsified = false;
        learned.push_back(std::move(*ec));
        if (falsified) {
          failed = true;
          break;
        }
      }
    }
    int count = 0;
    if (!failed)
      for (Lit q : trail_) count += static_cast<int>(q >> 1) <= count_upto ? 1 : 0;
    backtrack(0);
    for (auto& ec : learned) pending_.push_back(std::move(ec));
    if (!pending_.empty()) {
      CRef confl = kNoRef;
      external_round(confl);
      if (!unsat_ && (confl != kNoRef || propagate() != kNoRef)) mark_unsat();
    }
    if (failed) return std::nullopt;
    return count;
  }

  // Original, external and learned clauses plus root units.
  std::vector<ExportedClause> export_clauses() const {
    std::vector<ExportedClause> out;
    auto put = [&](CRef c, bool learned, bool trusted, bool original = false) {
      const std::uint32_t* h = &arena_[c];
      if (h[1] & kDeleted) return;
      ExportedClause e;
      e.learned = learned;
      e.trusted = trusted;
      e.original = original;
      for (std::uint32_t i = 0; i < h[0]; ++i) e.literals.push_back(to_literal(h[kHeader + i]));
      out.push_back(std::move(e));
    };
    for (CRef c : originals_) put(c, false, false, true);
    for (CRef c : externals_) put(c, false, (arena_[c + 1] & kTrusted) != 0);
    for (CRef c : learnts_) put(c, true, false);
    for (Literal l : fixed_literals()) out.push_back({{l}, false, false});
    return out;
  }

 private:
  using Lit = std::uint32_t;
  using CRef = std::uint32_t;
  static constexpr CRef kNoRef = std::numeric_limits<CRef>::max();
  static constexpr Lit kNoLit = std::numeric_limits<Lit>::max();
  static constexpr std::uint32_t kHeader = 3;
  static constexpr std::uint32_t kLearned = 1;
  static constexpr std::uint32_t kTrusted = 2;
  static constexpr std::uint32_t kDeleted = 4;
  static constexpr std::uint32_t kReloced = 8;

  struct Watcher {
    CRef cref;
    Lit blocker;
  };

  static Lit to_lit(Literal l) { return 2 * static_cast<Lit>(l.var()) + (l.positive() ? 0 : 1); }
  static Literal to_literal(Lit p) { return Literal::make(static_cast<int>(p >> 1), (p & 1) == 0); }
  static std::size_t var_of(Lit p) { return p >> 1; }

  // --- clause arena -------------------------------------------------------
  std::uint32_t csize(CRef c) const { return arena_[c]; }
  Lit* clits(CRef c) { return &arena_[c + kHeader]; }
  std::uint32_t& cflags(CRef c) { return arena_[c + 1]; }
  std::uint32_t lbd(CRef c) const { return arena_[c + 1] >> 8; }
  float& cactivity(CRef c) { return *reinterpret_cast<float*>(&arena_[c + 2]); }

  CRef alloc_clause(std::span<const Lit> lits, std::uint32_t flags, std::uint32_t lbd_value) {
    const CRef c = static_cast<CRef>(arena_.size());
    arena_.push_back(static_cast<std::uint32_t>(lits.size()));
    arena_.push_back(flags | (lbd_value << 8));
    arena_.push_back(0);
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    return c;
  }

  void attach(CRef c) {
    Lit* l = clits(c);
    watches_[l[0] ^ 1].push_back({c, l[1]});
    watches_[l[1] ^ 1].push_back({c, l[0]});
  }

  // --- setup --------------------------------------------------------------
  void resize(int n) {
    nvars_ = n;
    const std::size_t nv = static_cast<std::size_t>(n) + 1;
    val_.assign(2 * nv, 0);
    level_.assign(nv, 0);
    reason_.assign(nv, kNoRef);
    seen_.assign(nv, 0);
    activity_.assign(nv, 0.0);
    phase_.assign(nv, opts_.default_phase ? 1 : 0);
    watches_.assign(2 * nv, {});
    heap_pos_.assign(nv, -1);
    level_stamp_.assign(nv + 1, 0);
    for (int v = 1; v <= n; ++v) heap_insert(v);
  }

  void add_original(Clause& c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i].var() == c[i - 1].var()) return;  // tautology
    std::vector<Lit> lits;
    lits.reserve(c.size());
    for (Literal l : c) lits.push_back(to_lit(l));
    if (lits.size() == 1) {
      const Lit p = lits[0];
      if (val_[p] < 0) {
        mark_unsat();
      } else if (val_[p] == 0) {
        assign(p, kNoRef);
      }
      return;
    }
    const CRef cr = alloc_clause(lits, 0, 0);
    originals_.push_back(cr);
    attach(cr);
  }

  void mark_unsat() {
    if (!unsat_ && proof_) proof_->add({});
    unsat_ = true;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void assign(Lit p, CRef from) {
    const std::size_t v = var_of(p);
    val_[p] = 1;
    val_[p ^ 1] = -1;
    level_[v] = decision_level();
    reason_[v] = from;
    trail_.push_back(p);
  }

  void backtrack(int level) {
    if (decision_level() <= level) return;
    const std::size_t stop = static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(level)]);
    for (std::size_t i = trail_.size(); i-- > stop;) {
      const Lit p = trail_[i];
      const std::size_t v = var_of(p);
      val_[p] = 0;
      val_[p ^ 1] = 0;
      reason_[v] = kNoRef;
      phase_[v] = (p & 1) == 0 ? 1 : 0;
      if (heap_pos_[v] < 0) heap_insert(static_cast<int>(v));
    }
    trail_.resize(stop);
    trail_lim_.resize(static_cast<std::size_t>(level));
    qhead_ = std::min(qhead_, trail_.size());
    if (hook_) {
      if (notified_ > trail_.size()) notified_ = trail_.size();
      hook_->on_backtrack(level);
    }
  }

  // --- propagation --------------------------------------------------------
  CRef propagate() {
    CRef confl = kNoRef;
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];
      const Lit false_lit = p ^ 1;
      std::vector<Watcher>& ws = watches_[p];
      ++stats_.propagations;
      std::size_t i = 0, j = 0;
      const std::size_t end = ws.size();
      while (i < end) {
        const Watcher w = ws[i];
        if (val_[w.blocker] > 0) {
          ws[j++] = ws[i++];
          continue;
        }
        Lit* c = clits(w.cref);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        const Lit first = c[0];
        if (first != w.blocker && val_[first] > 0) {
          ws[j++] = {w.cref, first};
          continue;
        }
        const std::uint32_t sz = csize(w.cref);
        bool moved = false;
        for (std::uint32_t k = 2; k < sz; ++k) {
          if (val_[c[k]] >= 0) {
            std::swap(c[1], c[k]);
            watches_[c[1] ^ 1].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (val_[first] < 0) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < end) ws[j++] = ws[i++];
        } else {
          assign(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoRef) break;
    }
    return confl;
  }

  // --- conflict analysis --------------------------------------------------
  void handle_conflict(CRef confl) {
    ++conflicts_since_restart_;
    int bt_level = 0;
    analyze(confl, bt_level);
    backtrack(bt_level);
    if (proof_) {
      tmp_clause_.clear();
      for (Lit p : learnt_) tmp_clause_.push_back(to_literal(p));
      proof_->add(tmp_clause_);
    }
    stats_.learned_literals += learnt_.size();
    if (learnt_.size() == 1) {
      assign(learnt_[0], kNoRef);
    } else {
      const CRef cr = alloc_clause(learnt_, kLearned, compute_lbd(learnt_));
      learnts_.push_back(cr);
      attach(cr);
      bump_clause(cr);
      assign(learnt_[0], cr);
    }
    var_inc_ /= opts_.var_decay;
    clause_inc_ /= 0.999;
  }

  void analyze(CRef confl, int& bt_level) {
    learnt_.clear();
    learnt_.push_back(kNoLit);
    int path = 0;
    Lit p = kNoLit;
    std::size_t idx = trail_.size();
    do {
      if (cflags(confl) & kLearned) bump_clause(confl);
      const Lit* c = clits(confl);
      const std::uint32_t sz = csize(confl);
      for (std::uint32_t k = (p == kNoLit ? 0 : 1); k < sz; ++k) {
        const Lit q = c[k];
        const std::size_t v = var_of(q);
        if (!seen_[v] && level_[v] > 0) {
          seen_[v] = 1;
          bump_var(v);
          if (level_[v] >= decision_level()) {
            ++path;
          } else {
            learnt_.push_back(q);
          }
        }
      }
      do {
        --idx;
      } while (!seen_[var_of(trail_[idx])]);
      p = trail_[idx];
      confl = reason_[var_of(p)];
      seen_[var_of(p)] = 0;
      --path;
    } while (path > 0);
    learnt_[0] = p ^ 1;

    // Recursive minimization.
    to_clear_.assign(learnt_.begin(), learnt_.end());
    std::uint32_t abstract = 0;
    for (std::size_t k = 1; k < learnt_.size(); ++k) abstract |= abstract_level(var_of(learnt_[k]));
    std::size_t keep = 1;
    for (std::size_t k = 1; k < learnt_.size(); ++k) {
      const std::size_t v = var_of(learnt_[k]);
      if (reason_[v] == kNoRef || !lit_redundant(learnt_[k], abstract)) learnt_[keep++] = learnt_[k];
    }
    learnt_.resize(keep);
    for (Lit q : to_clear_) seen_[var_of(q)] = 0;

    if (learnt_.size() == 1) {
      bt_level = 0;
    } else {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < learnt_.size(); ++k)
        if (level_[var_of(learnt_[k])] > level_[var_of(learnt_[max_i])]) max_i = k;
      std::swap(learnt_[1], learnt_[max_i]);
      bt_level = level_[var_of(learnt_[1])];
    }
  }

  std::uint32_t abstract_level(std::size_t v) const {
    return 1u << (static_cast<std::uint32_t>(level_[v]) & 31u);
  }

  bool lit_redundant(Lit p, std::uint32_t abstract) {
    stack_.clear();
    stack_.push_back(p);
    const std::size_t top = to_clear_.size();
    while (!stack_.empty()) {
      const Lit q = stack_.back();
      stack_.pop_back();
      const CRef r = reason_[var_of(q)];
      const Lit* c = clits(r);
      const std::uint32_t sz = csize(r);
      for (std::uint32_t k = 1; k < sz; ++k) {
        const Lit x = c[k];
        const std::size_t v = var_of(x);
        if (!seen_[v] && level_[v] > 0) {
          if (reason_[v] != kNoRef && (abstract_level(v) & abstract) != 0) {
            seen_[v] = 1;
            stack_.push_back(x);
            to_clear_.push_back(x);
          } else {
            for (std::size_t j = top; j < to_clear_.size(); ++j) seen_[var_of(to_clear_[j])] = 0;
            to_clear_.resize(top);
            return false;
          }
        }
      }
    }
    return true;
  }

  std::uint32_t compute_lbd(std::span<const Lit> lits) {
    ++stamp_;
    std::uint32_t n = 0;
    for (Lit p : lits) {
      const auto l = static_cast<std::size_t>(level_[var_of(p)]);
      if (level_stamp_[l] != stamp_) {
        level_stamp_[l] = stamp_;
        ++n;
      }
    }
    return std::min<std::uint32_t>(n, (1u << 24) - 1);
  }

  // --- external clauses ---------------------------------------------------
  void notify_hook() {
    if (!hook_ || notified_ >= trail_.size()) {
      notified_ = trail_.size();
      return;
    }
    hook_buf_.clear();
    for (std::size_t i = notified_; i < trail_.size(); ++i) {
      if (static_cast<int>(var_of(trail_[i])) <= opts_.hook_vars) hook_buf_.push_back(to_literal(trail_[i]));
    }
    notified_ = trail_.size();
    if (!hook_buf_.empty()) hook_->on_assign(hook_buf_, decision_level());
  }

  // Returns true if the solver state changed (backtrack, assignment or
  // conflict); `confl` is set when a conflict must be analyzed.
  bool external_round(CRef& confl) {
    notify_hook();
    for (;;) {
      std::optional<ExternalClause> ec;
      if (!pending_.empty()) {
        ec = std::move(pending_.front());
        pending_.pop_front();
      } else if (hook_) {
        ec = hook_->provide_external_clause();
      }
      if (!ec) return false;
      if (add_external(*ec, confl)) return true;
      if (unsat_) return true;
    }
  }

  bool add_external(ExternalClause& ec, CRef& confl) {
    Clause& c = ec.literals;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].var() == c[i - 1].var()) throw std::domain_error("external clause is tautological");
    }
    for (Literal l : c) {
      if (l.var() > nvars_) throw std::domain_error("external clause mentions unknown variable");
    }
    ++stats_.external_clauses;
    if (proof_) {
      if (ec.trusted) proof_->add_trusted(c, ec.witness_id);
      else proof_->add(c);
    }
    if (c.empty()) {
      mark_unsat();
      return true;
    }
    std::vector<Lit> lits;
    lits.reserve(c.size());
    for (Literal l : c) lits.push_back(to_lit(l));
    // Non-false literals first, then false literals by decreasing level.
    std::stable_sort(lits.begin(), lits.end(), [&](Lit a, Lit b) {
      const bool fa = val_[a] < 0, fb = val_[b] < 0;
      if (fa != fb) return !fa;
      if (fa) return level_[var_of(a)] > level_[var_of(b)];
      return false;
    });
    const std::uint32_t flags = ec.trusted ? kTrusted : 0;
    std::size_t nonfalse = 0;
    while (nonfalse < lits.size() && val_[lits[nonfalse]] >= 0) ++nonfalse;

    auto store = [&]() {
      const CRef cr = alloc_clause(lits, flags, 0);
      externals_.push_back(cr);
      return cr;
    };

    if (nonfalse >= 2) {
      attach(store());
      return false;
    }
    if (nonfalse == 1) {
      const Lit u = lits[0];
      const int lf = lits.size() > 1 ? level_[var_of(lits[1])] : 0;
      if (val_[u] > 0 && level_[var_of(u)] <= lf) {
        if (lits.size() > 1) attach(store());
        return false;
      }
      backtrack(lf);
      if (lits.size() == 1) {
        if (val_[u] == 0) assign(u, kNoRef);
        return true;
      }
      const CRef cr = store();
      attach(cr);
      assign(u, cr);
      return true;
    }
    // Falsified.
    const int l1 = level_[var_of(lits[0])];
    if (l1 == 0) {
      mark_unsat();
      return true;
    }
    const int l2 = lits.size() > 1 ? level_[var_of(lits[1])] : 0;
    if (l2 < l1) {
      backtrack(l2);
      if (lits.size() == 1) {
        assign(lits[0], kNoRef);
        return true;
      }
      const CRef cr = store();
      attach(cr);
      assign(lits[0], cr);
      return true;
    }
    backtrack(l1);
    const CRef cr = store();
    attach(cr);
    confl = cr;
    return true;
  }

  // --- branching ----------------------------------------------------------
  bool heap_less(int a, int b) const {
    const double aa = activity_[static_cast<std::size_t>(a)], ab = activity_[static_cast<std::size_t>(b)];
    return aa > ab || (aa == ab && a < b);
  }
  void heap_up(std::size_t i) {
    const int v = heap_[i];
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  void heap_down(std::size_t i) {
    const int v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    heap_pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  void heap_insert(int v) {
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
  }
  int heap_pop() {
    const int top = heap_[0];
    heap_pos_[static_cast<std::size_t>(top)] = -1;
    const int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_down(0);
    }
    return top;
  }

  void bump_var(std::size_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[v]));
  }

  void bump_clause(CRef c) {
    float& a = cactivity(c);
    a += static_cast<float>(clause_inc_);
    if (a > 1e20f) {
      for (CRef l : learnts_) cactivity(l) *= 1e-20f;
      clause_inc_ *= 1e-20;
    }
  }

  std::uint64_t next_random() {
    rng_state_ = rng_state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return rng_state_ >> 33;
  }

  Lit pick_branch() {
    int v = 0;
    if (opts_.random_decision_freq > 0 && !heap_.empty() &&
        static_cast<double>(next_random() % 1000000) / 1e6 < opts_.random_decision_freq) {
      v = heap_[next_random() % heap_.size()];
      if (val_[2 * static_cast<Lit>(v)] != 0) v = 0;
    }
    while (v == 0 || val_[2 * static_cast<Lit>(v)] != 0) {
      if (heap_.empty()) return kNoLit;
      v = heap_pop();
    }
    return 2 * static_cast<Lit>(v) + (phase_[static_cast<std::size_t>(v)] ? 0 : 1);
  }

  static double luby(std::uint64_t i) {
    std::uint64_t size = 1, seq = 0;
    while (size < i + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    double y = 1;
    while (size - 1 != i) {
      size = (size - 1) >> 1;
      --seq;
      i = i % size;
    }
    for (std::uint64_t k = 0; k < seq; ++k) y *= 2;
    return y;
  }

  // --- learned clause reduction -------------------------------------------
  bool locked(CRef c) {
    const Lit p = clits(c)[0];
    return val_[p] > 0 && reason_[var_of(p)] == c;
  }

  void reduce_db() {
    ++stats_.reductions;
    std::vector<CRef> cand;
    std::vector<CRef> keep;
    for (CRef c : learnts_) {
      if (lbd(c) <= 2 || locked(c)) keep.push_back(c);
      else cand.push_back(c);
    }
    std::sort(cand.begin(), cand.end(), [&](CRef a, CRef b) {
      if (lbd(a) != lbd(b)) return lbd(a) > lbd(b);
      return cactivity(a) < cactivity(b);
    });
    const std::size_t remove = cand.size() / 2;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (i < remove) {
        delete_clause(cand[i]);
      } else {
        keep.push_back(cand[i]);
      }
    }
    std::sort(keep.begin(), keep.end());
    learnts_ = std::move(keep);
    for (auto& ws : watches_) {
      ws.erase(std::remove_if(ws.begin(), ws.end(),
                              [&](const Watcher& w) { return (arena_[w.cref + 1] & kDeleted) != 0; }),
               ws.end());
    }
    if (wasted_ * 2 > arena_.size()) collect_garbage();
  }

  void delete_clause(CRef c) {
    if (proof_) {
      tmp_clause_.clear();
      for (std::uint32_t k = 0; k < csize(c); ++k) tmp_clause_.push_back(to_literal(clits(c)[k]));
      proof_->remove(tmp_clause_);
    }
    cflags(c) |= kDeleted;
    wasted_ += kHeader + csize(c);
  }

  void collect_garbage() {
    std::vector<std::uint32_t> fresh;
    fresh.reserve(arena_.size() - wasted_);
    auto move = [&](CRef c) -> CRef {
      if (arena_[c + 1] & kReloced) return arena_[c + 2];
      const CRef nc = static_cast<CRef>(fresh.size());
      fresh.insert(fresh.end(), arena_.begin() + c, arena_.begin() + c + kHeader + arena_[c]);
      arena_[c + 1] |= kReloced;
      arena_[c + 2] = nc;
      return nc;
    };
    for (auto& c : originals_) c = move(c);
    for (auto& c : externals_) c = move(c);
    for (auto& c : learnts_) c = move(c);
    for (Lit p : trail_) {
      CRef& r = reason_[var_of(p)];
      if (r != kNoRef) r = arena_[r + 2];
    }
    arena_ = std::move(fresh);
    wasted_ = 0;
    for (auto& ws : watches_) ws.clear();
    for (CRef c : originals_) attach(c);
    for (CRef c : externals_)
      if (csize(c) >= 2) attach(c);
    for (CRef c : learnts_) attach(c);
  }

  Assignment current_model() const {
    Assignment m(static_cast<std::size_t>(nvars_) + 1, 0);
    for (int v = 1; v <= nvars_; ++v) m[static_cast<std::size_t>(v)] = val_[2 * static_cast<Lit>(v)];
    return m;
  }

  const CnfFormula* formula_;
  SolverOptions opts_;
  PropagatorHook* hook_ = nullptr;
  ProofSink* proof_ = nullptr;
  const std::atomic<bool>* interrupt_ = nullptr;

  int nvars_ = 0;
  bool unsat_ = false;
  std::vector<std::uint32_t> arena_;
  std::size_t wasted_ = 0;
  std::vector<CRef> originals_;
  std::vector<CRef> externals_;
  std::vector<CRef> learnts_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<std::int8_t> val_;
  std::vector<int> level_;
  std::vector<CRef> reason_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::size_t notified_ = 0;

  std::vector<double> activity_;
  std::vector<std::uint8_t> phase_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;

  std::vector<std::uint8_t> seen_;
  std::vector<Lit> learnt_;
  std::vector<Lit> to_clear_;
  std::vector<Lit> stack_;
  std::vector<std::uint64_t> level_stamp_;
  std::uint64_t stamp_ = 0;
  Clause tmp_clause_;
  std::vector<Literal> hook_buf_;
  std::deque<ExternalClause> pending_;

  std::uint64_t conflicts_since_restart_ = 0;
  std::uint64_t restart_limit_ = 100;
  std::uint64_t luby_index_ = 0;
  std::uint64_t next_reduce_ = 2000;
  std::uint64_t rng_state_ = 0;
  SolverStats stats_;
};

}  // namespace ramsey
