#pragma once

// Independent certificate checking. Uses only the graph/CNF primitives and
// its own unit propagation; it never calls the solver or the canonicity
// search.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ramsey/bundle.hpp"
#include "ramsey/cnf.hpp"
#include "ramsey/graph.hpp"

namespace ramsey {

enum class VerdictStatus { kAccepted, kRejected, kError };

struct Verdict {
  VerdictStatus status = VerdictStatus::kAccepted;
  std::string stage;
  std::string detail;

  bool accepted() const { return status == VerdictStatus::kAccepted; }
  static Verdict accept() { return {}; }
  static Verdict reject(std::string stage, std::string detail) {
    return {VerdictStatus::kRejected, std::move(stage), std::move(detail)};
  }
  static Verdict error(std::string stage, std::string detail) {
    return {VerdictStatus::kError, std::move(stage), std::move(detail)};
  }
  std::string describe() const {
    if (accepted()) return "accepted";
    return std::string(status == VerdictStatus::kRejected ? "rejected" : "error") + " [" + stage + "] " + detail;
  }
};

// 0 accepted, 1 rejected, 2 I/O or parse error.
inline int exit_code(const Verdict& v) {
  switch (v.status) {
    case VerdictStatus::kAccepted: return 0;
    case VerdictStatus::kRejected: return 1;
    case VerdictStatus::kError: return 2;
  }
  return 2;
}

struct DratReport {
  Verdict verdict;
  std::vector<Clause> trusted;  // in proof order
  std::uint64_t lemmas = 0;
  std::uint64_t deletions = 0;
  std::uint64_t ignored_deletions = 0;
};

namespace detail {

// Forward RUP checker over a growing clause database with two watched
// literals and a persistent root trail.
class RupChecker {
 public:
  explicit RupChecker(int num_vars) { grow(num_vars); }

  bool inconsistent() const { return inconsistent_; }

  void add(const Clause& c) {
    if (inconsistent_) return;
    std::vector<Lit> lits = encode(c);
    if (lits.empty()) return;  // tautology
    const std::uint32_t id = static_cast<std::uint32_t>(clauses_.size());
    // Non-false literals first.
    std::stable_partition(lits.begin(), lits.end(), [&](Lit p) { return val_[p] >= 0; });
    clauses_.push_back({lits, false});
    index_[key(lits)].push_back(id);
    if (lits.size() == 1) {
      if (val_[lits[0]] < 0) {
        inconsistent_ = true;
      } else if (val_[lits[0]] == 0) {
        assign(lits[0]);
        if (!propagate()) inconsistent_ = true;
      }
      return;
    }
    watch(id);
    if (val_[lits[0]] < 0) {
      inconsistent_ = true;
    } else if (val_[lits[1]] < 0 && val_[lits[0]] == 0) {
      assign(lits[0]);
      if (!propagate()) inconsistent_ = true;
    }
  }

  // Returns false when the clause is not in the database.
  bool remove(const Clause& c) {
    std::vector<Lit> lits = encode(c);
    if (lits.empty()) return true;
    auto it = index_.find(key(lits));
    if (it == index_.end() || it->second.empty()) return false;
    const std::uint32_t id = it->second.back();
    it->second.pop_back();
    // Unit and reason clauses keep their root implications; dropping the
    // clause itself only weakens the database.
    clauses_[id].deleted = true;
    return true;
  }

  bool rup(const Clause& c) {
    if (inconsistent_) return true;
    const std::size_t mark = trail_.size();
    bool conflict = false;
    for (Literal l : c) {
      grow(l.var());
      const Lit p = code(l);
      if (val_[p] > 0) {
        conflict = true;
        break;
      }
      if (val_[p] == 0) assign(p ^ 1);
    }
    if (!conflict) conflict = !propagate();
    undo(mark);
    return conflict;
  }

 private:
  using Lit = std::uint32_t;
  struct StoredClause {
    std::vector<Lit> lits;
    bool deleted;
  };

  static Lit code(Literal l) { return 2 * static_cast<Lit>(l.var()) + (l.positive() ? 0 : 1); }

  void grow(int var) {
    const std::size_t need = 2 * (static_cast<std::size_t>(var) + 1);
    if (val_.size() < need) {
      val_.resize(need, 0);
      watches_.resize(need);
    }
  }

  std::vector<Lit> encode(const Clause& c) {
    std::vector<Lit> lits;
    lits.reserve(c.size());
    for (Literal l : c) {
      grow(l.var());
      lits.push_back(code(l));
    }
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
      if ((lits[i] ^ 1) == lits[i - 1]) return {};
    return lits;
  }

  static std::string key(std::vector<Lit> lits) {
    std::sort(lits.begin(), lits.end());
    return std::string(reinterpret_cast<const char*>(lits.data()), lits.size() * sizeof(Lit));
  }

  void watch(std::uint32_t id) {
    const auto& l = clauses_[id].lits;
    watches_[l[0] ^ 1].push_back(id);
    watches_[l[1] ^ 1].push_back(id);
  }

  void assign(Lit p) {
    val_[p] = 1;
    val_[p ^ 1] = -1;
    trail_.push_back(p);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const Lit p = trail_.back();
      trail_.pop_back();
      val_[p] = 0;
      val_[p ^ 1] = 0;
    }
    qhead_ = std::min(qhead_, trail_.size());
  }

  // False on conflict.
  bool propagate() {
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];
      auto& ws = watches_[p];
      std::size_t i = 0, j = 0;
      bool ok = true;
      for (; i < ws.size(); ++i) {
        const std::uint32_t id = ws[i];
        StoredClause& c = clauses_[id];
        if (c.deleted) continue;
        auto& l = c.lits;
        const Lit false_lit = p ^ 1;
        if (l[0] == false_lit) std::swap(l[0], l[1]);
        if (val_[l[0]] > 0) {
          ws[j++] = id;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < l.size(); ++k) {
          if (val_[l[k]] >= 0) {
            std::swap(l[1], l[k]);
            watches_[l[1] ^ 1].push_back(id);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = id;
        if (val_[l[0]] < 0) {
          ok = false;
          for (++i; i < ws.size(); ++i) ws[j++] = ws[i];
          break;
        }
        assign(l[0]);
      }
      ws.resize(j);
      if (!ok) {
        qhead_ = trail_.size();
        return false;
      }
    }
    return true;
  }

  std::vector<StoredClause> clauses_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> index_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<std::int8_t> val_;
  std::vector<Lit> trail_;
  std::size_t qhead_ = 0;
  bool inconsistent_ = false;
};

enum class LineKind { kAdd, kTrusted, kDelete };

// Parses "[t |d ]<lits> 0". Returns false with `err` set on bad syntax.
inline bool parse_proof_line(std::string_view line, LineKind& kind, Clause& lits, std::string& err) {
  lits.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end && (*p == ' ' || *p == '\t')) ++p;
  kind = LineKind::kAdd;
  if (p < end && (*p == 'd' || *p == 't')) {
    kind = *p == 'd' ? LineKind::kDelete : LineKind::kTrusted;
    ++p;
    if (p < end && *p != ' ' && *p != '\t') {
      err = "unexpected character after prefix";
      return false;
    }
  }
  bool terminated = false;
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    if (terminated) {
      err = "data after terminating 0";
      return false;
    }
    long long v = 0;
    auto [q, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t' && *q != '\r')) {
      err = "bad literal";
      return false;
    }
    if (v > 1000000000LL || v < -1000000000LL) {
      err = "literal out of range";
      return false;
    }
    p = q;
    if (v == 0) {
      terminated = true;
    } else {
      lits.emplace_back(static_cast<int>(v));
    }
  }
  if (!terminated) {
    err = "missing terminating 0";
    return false;
  }
  return true;
}

}  // namespace detail

// Checks every added clause by RUP, adds 't' clauses unchecked and applies
// deletions; accepted once the empty clause is derived.
inline DratReport verify_drat(const CnfFormula& f, std::istream& proof) {
  DratReport rep;
  detail::RupChecker checker(f.num_vars());
  Clause c;
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    auto cl = f.clause(i);
    c.assign(cl.begin(), cl.end());
    checker.add(c);
  }
  std::string line, err;
  std::uint64_t lineno = 0, step = 0;
  detail::LineKind kind;
  while (std::getline(proof, line)) {
    ++lineno;
    if (line.empty() || line[0] == 'c') continue;
    if (!detail::parse_proof_line(line, kind, c, err)) {
      rep.verdict = Verdict::reject("drat", "line " + std::to_string(lineno) + ": " + err);
      return rep;
    }
    ++step;
    switch (kind) {
      case detail::LineKind::kDelete:
        ++rep.deletions;
        if (!checker.remove(c)) ++rep.ignored_deletions;
        break;
      case detail::LineKind::kTrusted:
        if (c.empty()) {
          rep.verdict = Verdict::reject("drat", "line " + std::to_string(lineno) + ": trusted empty clause");
          return rep;
        }
        rep.trusted.push_back(c);
        checker.add(c);
        break;
      case detail::LineKind::kAdd:
        ++rep.lemmas;
        if (!checker.rup(c)) {
          rep.verdict = Verdict::reject("drat", "step " + std::to_string(step) + " (line " + std::to_string(lineno) +
                                                    "): lemma is not RUP");
          return rep;
        }
        if (c.empty()) {
          rep.verdict = Verdict::accept();
          return rep;
        }
        checker.add(c);
        break;
    }
  }
  if (proof.bad()) {
    rep.verdict = Verdict::error("drat", "read error");
    return rep;
  }
  rep.verdict = Verdict::reject("drat", "proof ends without deriving the empty clause");
  return rep;
}

struct ParsedWitness {
  std::uint64_t id = 0;
  int k = 0;
  std::vector<int> perm;
  Clause clause;
  std::string key_hex;
  std::size_t line = 0;
};

struct WitnessFile {
  std::string rule = "full";
  std::vector<ParsedWitness> records;
};

inline WitnessFile parse_witness_log(std::istream& is) {
  WitnessFile wf;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("witness log line " + std::to_string(lineno) + ": " + why);
  };
  auto to_int = [&](std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v > 1000000000LL || v < -1000000000LL) {
      fail("bad integer '" + std::string(s) + "'");
    }
    return v;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == 'c') {
      if (line.rfind("c rule=", 0) == 0) wf.rule = line.substr(7);
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.size() < 5 || tok[0] != "w") fail("expected witness record");
    ParsedWitness w;
    w.line = lineno;
    if (tok[1].empty() || tok[1][0] == '-') fail("bad witness id");
    w.id = static_cast<std::uint64_t>(to_int(tok[1]));
    if (tok[2].rfind("k=", 0) != 0) fail("expected k=");
    w.k = static_cast<int>(to_int(std::string_view(tok[2]).substr(2)));
    std::size_t i = 3;
    if (tok[i].rfind("perm=", 0) != 0) fail("expected perm=");
    std::string first = tok[i].substr(5);
    if (!first.empty()) w.perm.push_back(static_cast<int>(to_int(first)));
    for (++i; i < tok.size() && tok[i].rfind("clause=", 0) != 0; ++i) {
      w.perm.push_back(static_cast<int>(to_int(tok[i])));
    }
    if (i == tok.size()) fail("expected clause=");
    std::string lit0 = tok[i].substr(7);
    bool terminated = false;
    auto take = [&](std::string_view s) {
      const long long v = to_int(s);
      if (v == 0) {
        terminated = true;
      } else {
        w.clause.emplace_back(static_cast<int>(v));
      }
    };
    if (!lit0.empty()) take(lit0);
    for (++i; i < tok.size() && !terminated; ++i) take(tok[i]);
    if (!terminated) fail("clause not terminated by 0");
    if (i != tok.size() - 1 || tok[i].rfind("key=", 0) != 0) fail("expected trailing key=");
    w.key_hex = tok[i].substr(4);
    wf.records.push_back(std::move(w));
  }
  return wf;
}

namespace detail {

inline Clause sorted_clause(Clause c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

// Validates one record against its paired trusted clause.
inline std::optional<std::string> check_witness(const ParsedWitness& w, const Clause& trusted, int n,
                                                const std::string& rule) {
  if (sorted_clause(w.clause) != sorted_clause(trusted)) return "clause differs from paired trusted proof clause";
  if (w.k < 2 || w.k > n) return "order k out of range";
  const int total = num_edges(w.k);
  if (static_cast<int>(w.perm.size()) != w.k) return "permutation length differs from k";
  std::vector<int> inv(static_cast<std::size_t>(w.k) + 1, 0);
  for (int i = 1; i <= w.k; ++i) {
    const int img = w.perm[static_cast<std::size_t>(i - 1)];
    if (img < 1 || img > w.k || inv[static_cast<std::size_t>(img)] != 0) return "permutation is not a bijection";
    inv[static_cast<std::size_t>(img)] = i;
  }
  LexKey key;
  try {
    key = LexKey::from_hex(w.key_hex, static_cast<std::size_t>(total));
  } catch (const std::exception&) {
    return "malformed key";
  }
  // The clause negates the matrix on its variables.
  std::vector<bool> in(static_cast<std::size_t>(total) + 1, false);
  for (Literal l : w.clause) {
    if (l.var() > total) return "clause mentions a variable outside the order-k matrix";
    if (key.bit(static_cast<std::size_t>(l.var())) == l.positive()) return "clause does not negate the matrix";
    in[static_cast<std::size_t>(l.var())] = true;
  }
  // Position s = (a,b) of the relabeled matrix reads entry
  // (inv(a), inv(b)) of the original.
  auto pre = [&](int s) {
    auto [a, b] = var_edge(s, w.k);
    const int u = inv[static_cast<std::size_t>(a)], v = inv[static_cast<std::size_t>(b)];
    return edge_var(std::min(u, v), std::max(u, v), w.k);
  };
  int t = 0;
  for (int s = 1; s <= total; ++s) {
    const bool orig = key.bit(static_cast<std::size_t>(s));
    const bool img = key.bit(static_cast<std::size_t>(pre(s)));
    if (orig != img) {
      if (img && !orig) return "relabeled key is not smaller";
      t = s;
      break;
    }
  }
  if (t == 0) return "relabeled key is not smaller";
  // Every completion of the blocked assignment stays non-minimal.
  std::vector<bool> want(static_cast<std::size_t>(total) + 1, false);
  for (int s = 1; s <= t; ++s) {
    want[static_cast<std::size_t>(s)] = true;
    want[static_cast<std::size_t>(pre(s))] = true;
  }
  for (int s = 1; s <= total; ++s) {
    if (want[static_cast<std::size_t>(s)] && !in[static_cast<std::size_t>(s)]) {
      return "clause does not fix the entries deciding the comparison";
    }
  }
  if (rule == "full") {
    for (int s = 1; s <= total; ++s)
      if (!in[static_cast<std::size_t>(s)]) return "clause is not the full negation";
  } else if (rule == "witness-prefix") {
    for (int s = 1; s <= total; ++s)
      if (in[static_cast<std::size_t>(s)] != want[static_cast<std::size_t>(s)]) {
        return "clause differs from the witness-prefix derivation";
      }
  } else {
    return "unknown minimization rule '" + rule + "'";
  }
  return std::nullopt;
}

}  // namespace detail

// Pairs the i-th trusted clause with the i-th record.
inline Verdict verify_witnesses(const WitnessFile& log, const std::vector<Clause>& trusted, int n) {
  if (log.records.size() != trusted.size()) {
    return Verdict::reject("witness", "record count " + std::to_string(log.records.size()) +
                                          " differs from trusted clause count " + std::to_string(trusted.size()));
  }
  for (std::size_t i = 0; i < trusted.size(); ++i) {
    const auto& w = log.records[i];
    if (auto why = detail::check_witness(w, trusted[i], n, log.rule)) {
      return Verdict::reject("witness", "witness " + std::to_string(w.id) + " (line " + std::to_string(w.line) +
                                            "): " + *why);
    }
  }
  return Verdict::accept();
}

inline Verdict verify_witnesses(std::istream& log, const std::vector<Clause>& trusted, int n) {
  try {
    return verify_witnesses(parse_witness_log(log), trusted, n);
  } catch (const std::invalid_argument& e) {
    return Verdict::reject("witness", e.what());
  }
}

// Accepts exactly the leaf sets of binary split trees: every internal node
// splits on one variable with both polarities present.
inline Verdict verify_cube_cover(const std::vector<Clause>& cubes) {
  if (cubes.empty()) return Verdict::reject("cover", "no cubes");
  struct Node {
    std::map<int, std::size_t> child;  // dimacs literal -> node
    bool leaf = false;
  };
  std::vector<Node> nodes(1);
  auto path_string = [](const Clause& c, std::size_t len) {
    std::string s = "[";
    for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + std::to_string(c[i].dimacs());
    return s + "]";
  };
  for (std::size_t ci = 0; ci < cubes.size(); ++ci) {
    const Clause& c = cubes[ci];
    std::vector<int> vars;
    for (Literal l : c) vars.push_back(l.var());
    std::sort(vars.begin(), vars.end());
    if (std::adjacent_find(vars.begin(), vars.end()) != vars.end()) {
      return Verdict::reject("cover", "cube " + std::to_string(ci + 1) + " repeats a variable");
    }
    std::size_t cur = 0;
    for (Literal l : c) {
      if (nodes[cur].leaf) {
        return Verdict::reject("cover", "cube " + std::to_string(ci + 1) + " extends another cube");
      }
      auto it = nodes[cur].child.find(l.dimacs());
      if (it == nodes[cur].child.end()) {
        nodes.push_back({});
        it = nodes[cur].child.emplace(l.dimacs(), nodes.size() - 1).first;
      }
      cur = it->second;
    }
    if (nodes[cur].leaf) return Verdict::reject("cover", "duplicate cube " + std::to_string(ci + 1));
    if (!nodes[cur].child.empty()) {
      return Verdict::reject("cover", "cube " + std::to_string(ci + 1) + " is a prefix of another cube");
    }
    nodes[cur].leaf = true;
  }
  // Walk the tree, tracking the path for error messages.
  Clause path;
  std::string problem;
  auto walk = [&](auto&& self, std::size_t id) -> bool {
    const Node& nd = nodes[id];
    if (nd.leaf) return true;
    if (nd.child.size() == 1) {
      const int lit = nd.child.begin()->first;
      path.emplace_back(-lit);
      problem = "uncovered branch " + path_string(path, path.size());
      return false;
    }
    if (nd.child.size() != 2 || nd.child.begin()->first != -std::prev(nd.child.end())->first) {
      problem = "node " + path_string(path, path.size()) + " does not split on a single variable";
      return false;
    }
    for (const auto& [lit, next] : nd.child) {
      path.emplace_back(lit);
      if (!self(self, next)) return false;
      path.pop_back();
    }
    return true;
  };
  if (!walk(walk, 0)) return Verdict::reject("cover", problem);
  return Verdict::accept();
}

struct BundleCheckOptions {
  bool check_hashes = true;
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct BundleReport {
  Verdict verdict;
  std::string claimed;  // manifest verdict
  std::size_t leaves = 0;
  std::size_t sat_leaves = 0;
  std::size_t unsat_leaves = 0;
};

namespace detail {

inline Verdict check_unsat_leaf(const fs::path& dir, const CnfFormula& base, const Clause& cube, int n,
                                const std::string& proof_rel, const std::string& wit_rel) {
  CnfFormula f = base;
  for (Literal l : cube) {
    if (l.var() > f.num_vars()) return Verdict::reject("cube", "cube literal beyond formula variables");
    f.add_clause({l}, ClauseFamily::kUnit);
  }
  std::ifstream proof(dir / proof_rel);
  if (!proof) return Verdict::error("drat", "missing " + proof_rel);
  DratReport rep = verify_drat(f, proof);
  if (!rep.verdict.accepted()) {
    rep.verdict.detail = proof_rel + ": " + rep.verdict.detail;
    return rep.verdict;
  }
  std::ifstream wit(dir / wit_rel);
  if (!wit) return Verdict::error("witness", "missing " + wit_rel);
  Verdict wv = verify_witnesses(wit, rep.trusted, n);
  if (!wv.accepted()) wv.detail = wit_rel + ": " + wv.detail;
  return wv;
}

inline Verdict check_sat_leaf(const fs::path& dir, const CnfFormula& f, const Clause& cube,
                              const std::string& model_rel) {
  std::ifstream in(dir / model_rel);
  if (!in) return Verdict::error("model", "missing " + model_rel);
  Assignment a;
  try {
    a = read_model(in, f.num_vars());
  } catch (const std::exception& e) {
    return Verdict::reject("model", model_rel + ": " + e.what());
  }
  for (int v = 1; v <= f.num_vars(); ++v) {
    if (a[static_cast<std::size_t>(v)] == 0) return Verdict::reject("model", model_rel + ": model is partial");
  }
  if (!satisfies(f, a)) return Verdict::reject("model", model_rel + ": model falsifies the formula");
  for (Literal l : cube)
    if (!literal_true(a, l)) return Verdict::reject("model", model_rel + ": model contradicts its cube");
  return Verdict::accept();
}

}  // namespace detail

inline BundleReport verify_bundle(const fs::path& dir, BundleCheckOptions opts = {}) {
  BundleReport rep;
  Manifest m;
  try {
    m = Manifest::load(dir / BundlePaths::kManifest);
  } catch (const std::exception& e) {
    rep.verdict = Verdict::error("manifest", e.what());
    return rep;
  }
  rep.claimed = m.get("verdict").value_or("");
  if (rep.claimed != "exists" && rep.claimed != "not-exists") {
    rep.verdict = Verdict::reject("manifest", "verdict must be exists or not-exists");
    return rep;
  }
  // Stage 1: content hashes.
  if (opts.check_hashes) {
    const auto artifacts = m.with_prefix("artifact.");
    if (artifacts.empty()) {
      rep.verdict = Verdict::reject("hash", "manifest lists no artifacts");
      return rep;
    }
    for (const auto& [rel, value] : artifacts) {
      if (value.rfind("sha256:", 0) != 0) {
        rep.verdict = Verdict::reject("hash", rel + ": unsupported digest");
        return rep;
      }
      if (!fs::exists(dir / rel)) {
        rep.verdict = Verdict::error("hash", rel + ": missing file");
        return rep;
      }
      if (sha256_file(dir / rel) != value.substr(7)) {
        rep.verdict = Verdict::reject("hash", rel + ": content hash mismatch");
        return rep;
      }
    }
  }
  CnfFormula f;
  std::vector<Clause> cubes;
  int n = 0;
  std::size_t leaves = 0;
  try {
    std::ifstream cnf(dir / BundlePaths::kCnf);
    if (!cnf) {
      rep.verdict = Verdict::error("cnf", "missing " + std::string(BundlePaths::kCnf));
      return rep;
    }
    f = read_dimacs(cnf);
    std::ifstream cf(dir / BundlePaths::kCubes);
    if (!cf) {
      rep.verdict = Verdict::error("cubes", "missing " + std::string(BundlePaths::kCubes));
      return rep;
    }
    cubes = read_cubes(cf);
    n = std::stoi(m.require("spec.n"));
    leaves = static_cast<std::size_t>(std::stoul(m.require("leaves")));
  } catch (const std::exception& e) {
    rep.verdict = Verdict::reject("parse", e.what());
    return rep;
  }
  rep.leaves = leaves;
  if (leaves != cubes.size()) {
    rep.verdict = Verdict::reject("cubes", "manifest leaf count differs from cube file");
    return rep;
  }
  std::vector<std::string> status(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    status[i] = m.get("leaf." + std::to_string(i) + ".status").value_or("");
    if (status[i] == "sat") ++rep.sat_leaves;
    if (status[i] == "unsat") ++rep.unsat_leaves;
  }
  if (rep.claimed == "not-exists" && rep.unsat_leaves != leaves) {
    rep.verdict = Verdict::reject("verdict", "not-exists claimed but some leaf is not unsat");
    return rep;
  }
  if (rep.claimed == "exists" && rep.sat_leaves == 0) {
    rep.verdict = Verdict::reject("verdict", "exists claimed without a sat leaf");
    return rep;
  }
  // Stage 2: per-leaf proofs and witnesses, checked concurrently.
  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  std::vector<Verdict> results(leaves);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i; (i = next++) < leaves;) {
      if (status[i] != "unsat") continue;
      try {
        results[i] = detail::check_unsat_leaf(dir, f, cubes[i], n, BundlePaths::proof(i), BundlePaths::witnesses(i));
      } catch (const std::exception& e) {
        results[i] = Verdict::error("leaf", std::string("leaf ") + std::to_string(i) + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < std::min<std::size_t>(workers, leaves); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& r : results) {
    if (!r.accepted()) {
      rep.verdict = r;
      return rep;
    }
  }
  // Stage 3: the cubes partition the search space.
  Verdict cover = verify_cube_cover(cubes);
  if (!cover.accepted()) {
    rep.verdict = cover;
    return rep;
  }
  // Stage 4: models of satisfiable leaves.
  for (std::size_t i = 0; i < leaves; ++i) {
    if (status[i] != "sat") continue;
    Verdict v = detail::check_sat_leaf(dir, f, cubes[i], BundlePaths::model(i));
    if (!v.accepted()) {
      rep.verdict = v;
      return rep;
    }
  }
  rep.verdict = Verdict::accept();
  return rep;
}

}  // namespace ramsey
