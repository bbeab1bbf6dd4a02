#pragma once

// Literals, flat clause database and DIMACS text I/O.

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ramsey {

// A DIMACS literal: +v or -v with v >= 1.
class Literal {
 public:
  constexpr Literal() = default;
  constexpr explicit Literal(int dimacs) : value_(dimacs) {
    if (dimacs == 0) throw std::domain_error("Literal: variable index must be >= 1");
  }
  static constexpr Literal pos(int var) { return Literal(checked(var)); }
  static constexpr Literal neg(int var) { return Literal(-checked(var)); }
  static constexpr Literal make(int var, bool positive) {
    return positive ? pos(var) : neg(var);
  }

  constexpr int var() const { return value_ < 0 ? -value_ : value_; }
  constexpr bool positive() const { return value_ > 0; }
  constexpr int dimacs() const { return value_; }
  constexpr Literal operator~() const { return Literal(-value_); }

  friend constexpr bool operator==(Literal, Literal) = default;
  friend constexpr auto operator<=>(Literal a, Literal b) {
    if (a.var() != b.var()) return a.var() <=> b.var();
    return a.value_ <=> b.value_;
  }

 private:
  static constexpr int checked(int var) {
    if (var < 1) throw std::domain_error("Literal: variable index must be >= 1");
    return var;
  }
  int value_ = 0;
};

using Clause = std::vector<Literal>;

inline Clause make_clause(std::initializer_list<int> dimacs) {
  Clause c;
  for (int l : dimacs) c.emplace_back(l);
  return c;
}

enum class ClauseFamily : std::uint8_t {
  kCliqueBlue,
  kCliqueRed,
  kLexSb,
  kDegree,
  kEdgeCount,
  kUnit,
  kOther,
};

inline std::string_view family_name(ClauseFamily f) {
  switch (f) {
    case ClauseFamily::kCliqueBlue: return "clique-blue";
    case ClauseFamily::kCliqueRed: return "clique-red";
    case ClauseFamily::kLexSb: return "lex-sb";
    case ClauseFamily::kDegree: return "card-degree";
    case ClauseFamily::kEdgeCount: return "card-edges";
    case ClauseFamily::kUnit: return "unit";
    case ClauseFamily::kOther: return "other";
  }
  return "other";
}

struct FamilyRange {
  ClauseFamily family;
  std::size_t begin;
  std::size_t end;
};

// Clause database stored flat. Edge variables, when present, occupy
// 1..edge_vars(); auxiliaries follow.
class CnfFormula {
 public:
  CnfFormula() = default;
  explicit CnfFormula(int num_vars, int edge_vars = 0)
      : num_vars_(num_vars), edge_vars_(edge_vars) {}

  int num_vars() const { return num_vars_; }
  int edge_vars() const { return edge_vars_; }
  void set_edge_vars(int e) { edge_vars_ = e; }
  int new_var() { return ++num_vars_; }
  void ensure_vars(int n) {
    if (n > num_vars_) num_vars_ = n;
  }

  std::size_t num_clauses() const { return offsets_.size() - 1; }
  std::size_t num_literals() const { return lits_.size(); }

  std::span<const Literal> clause(std::size_t i) const {
    return {lits_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  void add_clause(std::span<const Literal> c, ClauseFamily family = ClauseFamily::kOther) {
    if (c.empty()) throw std::domain_error("CnfFormula: empty clause at construction");
    for (Literal l : c) {
      if (l.var() > num_vars_) {
        throw std::domain_error("CnfFormula: literal " + std::to_string(l.dimacs()) +
                                " exceeds num_vars " + std::to_string(num_vars_));
      }
    }
    lits_.insert(lits_.end(), c.begin(), c.end());
    offsets_.push_back(lits_.size());
    const std::size_t idx = num_clauses() - 1;
    if (ranges_.empty() || ranges_.back().family != family) {
      ranges_.push_back({family, idx, idx + 1});
    } else {
      ranges_.back().end = idx + 1;
    }
  }
  void add_clause(std::initializer_list<Literal> c, ClauseFamily family = ClauseFamily::kOther) {
    add_clause(std::span<const Literal>(c.begin(), c.size()), family);
  }

  void append(const CnfFormula& other) {
    ensure_vars(other.num_vars());
    for (const auto& r : other.ranges_)
      for (std::size_t i = r.begin; i < r.end; ++i) add_clause(other.clause(i), r.family);
  }

  ClauseFamily family(std::size_t i) const {
    for (const auto& r : ranges_)
      if (i >= r.begin && i < r.end) return r.family;
    throw std::out_of_range("CnfFormula::family: clause index out of range");
  }
  const std::vector<FamilyRange>& family_ranges() const { return ranges_; }

  std::size_t count_family(ClauseFamily f) const {
    std::size_t n = 0;
    for (const auto& r : ranges_)
      if (r.family == f) n += r.end - r.begin;
    return n;
  }

 private:
  int num_vars_ = 0;
  int edge_vars_ = 0;
  std::vector<Literal> lits_;
  std::vector<std::size_t> offsets_{0};
  std::vector<FamilyRange> ranges_;
};

// Per-variable truth values, index 0 unused: +1 true, -1 false, 0 unassigned.
using Assignment = std::vector<std::int8_t>;

inline bool literal_true(const Assignment& a, Literal l) {
  const auto v = static_cast<std::size_t>(l.var());
  if (v >= a.size()) return false;
  return l.positive() ? a[v] > 0 : a[v] < 0;
}

inline bool satisfies(const CnfFormula& f, const Assignment& a) {
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    bool sat = false;
    for (Literal l : f.clause(i)) {
      if (literal_true(a, l)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

namespace detail {

inline void append_int(std::string& buf, int v) {
  char tmp[16];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

// Whitespace-separated integer scanner over a stream with line tracking.
class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  int line() const { return line_; }

  // Skips blanks and full-line comments starting with 'c' or '%'.
  int peek_char() {
    for (;;) {
      int c = is_.peek();
      if (c == EOF) return EOF;
      if (c == '\n') {
        ++line_;
        is_.get();
        at_line_start_ = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        is_.get();
        continue;
      }
      if (at_line_start_ && (c == 'c' || c == '%')) {
        std::string skip;
        std::getline(is_, skip);
        ++line_;
        continue;
      }
      at_line_start_ = false;
      return c;
    }
  }

  std::string word() {
    peek_char();
    std::string w;
    for (;;) {
      int c = is_.peek();
      if (c == EOF || c == ' ' || c == '\t' || c == '\n' || c == '\r') break;
      w.push_back(static_cast<char>(is_.get()));
    }
    return w;
  }

  bool next_int(long long& out) {
    if (peek_char() == EOF) return false;
    const std::string w = word();
    const char* b = w.data();
    const char* e = b + w.size();
    if (!w.empty() && w[0] == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e) {
      throw std::invalid_argument("parse error at line " + std::to_string(line_) +
                                  ": expected integer, got '" + w + "'");
    }
    return true;
  }

 private:
  std::istream& is_;
  int line_ = 1;
  bool at_line_start_ = true;
};

}  // namespace detail

inline void write_dimacs(std::ostream& os, const CnfFormula& f) {
  std::string buf;
  buf.reserve(1 << 16);
  buf += "p cnf ";
  detail::append_int(buf, f.num_vars());
  buf += ' ';
  buf += std::to_string(f.num_clauses());
  buf += '\n';
  for (std::size_t i = 0; i < f.num_clauses(); ++i) {
    for (Literal l : f.clause(i)) {
      detail::append_int(buf, l.dimacs());
      buf += ' ';
    }
    buf += "0\n";
    if (buf.size() > (1 << 16) - 512) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write_dimacs: stream write failed");
}

inline CnfFormula read_dimacs(std::istream& is) {
  detail::TokenReader in(is);
  if (in.peek_char() != 'p') throw std::invalid_argument("DIMACS: missing 'p cnf' header");
  const std::string p = in.word();
  const std::string cnf = in.word();
  long long vars = 0, clauses = 0;
  if (p != "p" || cnf != "cnf" || !in.next_int(vars) || !in.next_int(clauses) || vars < 0 ||
      clauses < 0) {
    throw std::invalid_argument("DIMACS: malformed header");
  }
  CnfFormula f(static_cast<int>(vars));
  Clause c;
  long long lit = 0;
  std::size_t read = 0;
  while (in.next_int(lit)) {
    if (lit == 0) {
      if (c.empty()) throw std::invalid_argument("DIMACS: empty clause at line " + std::to_string(in.line()));
      f.add_clause(c);
      c.clear();
      ++read;
      continue;
    }
    if (std::llabs(lit) > vars) {
      throw std::invalid_argument("DIMACS: literal exceeds declared variables at line " +
                                  std::to_string(in.line()));
    }
    c.emplace_back(static_cast<int>(lit));
  }
  if (!c.empty()) throw std::invalid_argument("DIMACS: unterminated final clause");
  if (read != static_cast<std::size_t>(clauses)) {
    throw std::invalid_argument("DIMACS: header declares " + std::to_string(clauses) +
                                " clauses, found " + std::to_string(read));
  }
  return f;
}

// "v" lines, terminated by "v 0".
inline void write_model(std::ostream& os, const Assignment& a) {
  std::string line = "v";
  for (std::size_t v = 1; v < a.size(); ++v) {
    line += ' ';
    detail::append_int(line, a[v] > 0 ? static_cast<int>(v) : -static_cast<int>(v));
    if (line.size() > 72) {
      os << line << '\n';
      line = "v";
    }
  }
  os << line << " 0\n";
}

inline Assignment read_model(std::istream& is, int num_vars) {
  Assignment a(static_cast<std::size_t>(num_vars) + 1, 0);
  std::string tok;
  bool terminated = false;
  while (is >> tok) {
    if (tok == "v" || tok == "s" || tok == "SATISFIABLE") continue;
    long long lit = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), lit);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw std::invalid_argument("model: bad token '" + tok + "'");
    }
    if (lit == 0) {
      terminated = true;
      break;
    }
    if (std::llabs(lit) > num_vars) throw std::invalid_argument("model: literal out of range");
    a[static_cast<std::size_t>(std::llabs(lit))] = lit > 0 ? 1 : -1;
  }
  if (!terminated) throw std::invalid_argument("model: missing terminating 0");
  return a;
}

// iCNF cube list: one "a <lits> 0" line per cube.
inline void write_cubes(std::ostream& os, const std::vector<Clause>& cubes) {
  std::string line;
  for (const auto& c : cubes) {
    line = "a";
    for (Literal l : c) {
      line += ' ';
      detail::append_int(line, l.dimacs());
    }
    line += " 0\n";
    os << line;
  }
  if (!os) throw std::runtime_error("write_cubes: stream write failed");
}

inline std::vector<Clause> read_cubes(std::istream& is) {
  std::vector<Clause> cubes;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == 'c' || line[0] == 'p') continue;
    if (line[0] != 'a' || (line.size() > 1 && line[1] != ' ')) {
      throw std::invalid_argument("cube file: expected 'a' line at line " + std::to_string(lineno));
    }
    Clause c;
    const char* p = line.data() + 1;
    const char* end = line.data() + line.size();
    bool terminated = false;
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      if (terminated) throw std::invalid_argument("cube file: data after 0 at line " + std::to_string(lineno));
      int v = 0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t' && *q != '\r')) {
        throw std::invalid_argument("cube file: bad literal at line " + std::to_string(lineno));
      }
      p = q;
      if (v == 0) {
        terminated = true;
      } else {
        c.emplace_back(v);
      }
    }
    if (!terminated) throw std::invalid_argument("cube file: missing 0 at line " + std::to_string(lineno));
    cubes.push_back(std::move(c));
  }
  return cubes;
}

}  // namespace ramsey
