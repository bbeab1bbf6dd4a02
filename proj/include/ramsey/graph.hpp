#pragma once

// Graph, edge-variable and permutation primitives.
//
// Vertices are 1-indexed. Edge variables are 1-indexed (DIMACS style) and
// laid out column-wise above the diagonal: var(i, j) for i < j is
// (j-1)(j-2)/2 + i, so every entry of column j precedes every entry of
// column j+1 and rows ascend within a column. The upper-left k x k
// submatrix therefore owns exactly the variables 1..k(k-1)/2.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ramsey {

constexpr int num_edges(int n) { return n * (n - 1) / 2; }

inline int edge_var(int i, int j, int n) {
  if (i < 1 || i >= j || j > n) {
    throw std::domain_error("edge_var: need 1 <= i < j <= n, got (" +
                            std::to_string(i) + "," + std::to_string(j) +
                            ") for n=" + std::to_string(n));
  }
  return (j - 1) * (j - 2) / 2 + i;
}

inline std::pair<int, int> var_edge(int var, int n) {
  if (var < 1 || var > num_edges(n)) {
    throw std::domain_error("var_edge: variable " + std::to_string(var) +
                            " is not an edge variable for n=" +
                            std::to_string(n));
  }
  int j = 2;
  while (j * (j - 1) / 2 < var) ++j;
  return {var - (j - 1) * (j - 2) / 2, j};
}

class EdgeVariableMap {
 public:
  explicit EdgeVariableMap(int n) : n_(n) {
    if (n < 2) throw std::domain_error("EdgeVariableMap: order must be >= 2");
  }

  int order() const { return n_; }
  int total_vars() const { return num_edges(n_); }
  int var(int i, int j) const {
    return i < j ? edge_var(i, j, n_) : edge_var(j, i, n_);
  }
  std::pair<int, int> edge(int var) const { return var_edge(var, n_); }
  bool is_edge_var(int var) const { return var >= 1 && var <= total_vars(); }

  // Number of variables owned by the upper-left k x k submatrix.
  static int prefix_vars(int k) { return num_edges(k); }

 private:
  int n_;
};

// Bitstring compared lexicographically with bit 1 most significant and
// 0 < 1. Position t (1-based) is the entry of edge variable t.
class LexKey {
 public:
  LexKey() = default;
  explicit LexKey(std::size_t size) : bits_(size, false) {}

  std::size_t size() const { return bits_.size(); }
  bool bit(std::size_t t) const { return bits_.at(t - 1); }
  void set(std::size_t t, bool v) { bits_.at(t - 1) = v; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  // Hex with the first bit as the high bit of the first nibble; the tail is
  // zero-padded to a whole nibble.
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < bits_.size(); i += 4) {
      int nib = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        nib <<= 1;
        if (i + b < bits_.size() && bits_[i + b]) nib |= 1;
      }
      s.push_back(kDigits[nib]);
    }
    return s;
  }

  static LexKey from_hex(std::string_view hex, std::size_t size) {
    if (hex.size() != (size + 3) / 4) {
      throw std::invalid_argument("LexKey::from_hex: length mismatch");
    }
    LexKey key(size);
    for (std::size_t i = 0; i < hex.size(); ++i) {
      const char c = hex[i];
      int nib;
      if (c >= '0' && c <= '9') nib = c - '0';
      else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
      else throw std::invalid_argument("LexKey::from_hex: bad digit");
      for (int b = 0; b < 4; ++b) {
        const std::size_t pos = i * 4 + static_cast<std::size_t>(b);
        const bool v = (nib >> (3 - b)) & 1;
        if (pos < size) key.bits_[pos] = v;
        else if (v) throw std::invalid_argument("LexKey::from_hex: nonzero padding");
      }
    }
    return key;
  }

  friend bool operator==(const LexKey&, const LexKey&) = default;
  friend bool operator<(const LexKey& a, const LexKey& b) {
    return a.bits_ < b.bits_;
  }

 private:
  std::vector<bool> bits_;
};

// Simple undirected graph on vertices 1..n, stored as the triangular
// bit-array indexed by edge variable.
class AdjMatrix {
 public:
  AdjMatrix() = default;
  explicit AdjMatrix(int n) : n_(n), bits_(static_cast<std::size_t>(num_edges(n)), 0) {
    if (n < 1) throw std::domain_error("AdjMatrix: order must be >= 1");
  }

  static AdjMatrix from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    AdjMatrix m(n);
    for (auto [i, j] : edges) m.set(i, j, true);
    return m;
  }

  // Bits are the entries of edge variables 1..n(n-1)/2 in order.
  static AdjMatrix from_bits(int n, const std::vector<std::uint8_t>& bits) {
    AdjMatrix m(n);
    if (bits.size() != m.bits_.size()) {
      throw std::domain_error("AdjMatrix::from_bits: size mismatch");
    }
    for (std::size_t t = 0; t < bits.size(); ++t) m.bits_[t] = bits[t] ? 1 : 0;
    return m;
  }

  int order() const { return n_; }

  bool adjacent(int i, int j) const {
    if (i == j) return false;
    return bits_[static_cast<std::size_t>(index(i, j))] != 0;
  }
  void set(int i, int j, bool v) {
    if (i == j) throw std::domain_error("AdjMatrix::set: diagonal entry");
    bits_[static_cast<std::size_t>(index(i, j))] = v ? 1 : 0;
  }

  bool var_bit(int var) const { return bits_.at(static_cast<std::size_t>(var - 1)) != 0; }
  void set_var_bit(int var, bool v) { bits_.at(static_cast<std::size_t>(var - 1)) = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  int degree(int v) const {
    int d = 0;
    for (int u = 1; u <= n_; ++u) d += adjacent(u, v) ? 1 : 0;
    return d;
  }
  int edge_count() const {
    return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
  }
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int j = 2; j <= n_; ++j)
      for (int i = 1; i < j; ++i)
        if (adjacent(i, j)) out.emplace_back(i, j);
    return out;
  }

  // Upper-left k x k submatrix (the order-k intermediate matrix).
  AdjMatrix submatrix(int k) const {
    if (k < 1 || k > n_) throw std::domain_error("AdjMatrix::submatrix: bad order");
    AdjMatrix m(k);
    std::copy_n(bits_.begin(), num_edges(k), m.bits_.begin());
    return m;
  }

  friend bool operator==(const AdjMatrix&, const AdjMatrix&) = default;

 private:
  int index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return edge_var(i, j, n_) - 1;
  }

  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

// An intermediate matrix is a fully defined upper-left submatrix; it is an
// ordinary adjacency matrix of its own order.
using IntermediateMatrix = AdjMatrix;

inline LexKey lex_key(const AdjMatrix& m) {
  LexKey key(m.bits().size());
  for (std::size_t t = 0; t < m.bits().size(); ++t) key.set(t + 1, m.bits()[t] != 0);
  return key;
}

// Vertex relabeling v -> p(v) on 1..n.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size() + 1, false);
    for (int v : image_) {
      if (v < 1 || v > static_cast<int>(image_.size()) || seen[static_cast<std::size_t>(v)]) {
        throw std::domain_error("Permutation: image is not a bijection on 1..n");
      }
      seen[static_cast<std::size_t>(v)] = true;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> img(static_cast<std::size_t>(n));
    std::iota(img.begin(), img.end(), 1);
    return Permutation(std::move(img));
  }

  int order() const { return static_cast<int>(image_.size()); }
  int operator()(int v) const { return image_.at(static_cast<std::size_t>(v - 1)); }
  const std::vector<int>& image() const { return image_; }

  Permutation inverse() const {
    std::vector<int> inv(image_.size());
    for (std::size_t v = 0; v < image_.size(); ++v) {
      inv[static_cast<std::size_t>(image_[v] - 1)] = static_cast<int>(v + 1);
    }
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> image_;
};

// result[p(i)][p(j)] = m[i][j]
inline AdjMatrix apply_perm(const AdjMatrix& m, const Permutation& p) {
  if (p.order() != m.order()) {
    throw std::domain_error("apply_perm: permutation order " + std::to_string(p.order()) +
                            " does not match matrix order " + std::to_string(m.order()));
  }
  AdjMatrix out(m.order());
  for (int j = 2; j <= m.order(); ++j)
    for (int i = 1; i < j; ++i)
      if (m.adjacent(i, j)) out.set(p(i), p(j), true);
  return out;
}

// Edge-list text: header "n <order>", then one "i j" line per edge.
inline void write_edge_list(std::ostream& os, const AdjMatrix& m) {
  os << "n " << m.order() << '\n';
  for (auto [i, j] : m.edges()) os << i << ' ' << j << '\n';
}

inline AdjMatrix read_edge_list(std::istream& is) {
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      if (!(ls >> tag >> n) || tag != "n" || n < 1) {
        throw std::invalid_argument("edge list: expected header 'n <order>' at line " +
                                    std::to_string(lineno));
      }
      continue;
    }
    int i = 0, j = 0;
    if (!(ls >> i >> j) || i < 1 || j < 1 || i > n || j > n || i == j) {
      throw std::invalid_argument("edge list: bad edge at line " + std::to_string(lineno));
    }
    edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  if (n < 0) throw std::invalid_argument("edge list: missing header");
  return AdjMatrix::from_edges(n, edges);
}

}  // namespace ramsey
