#pragma once

// Certificate bundle plumbing: key=value manifests and content hashes.

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ramsey {

namespace fs = std::filesystem;

namespace detail {

inline std::string to_hex(const unsigned char* data, std::size_t len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(kDigits[data[i] >> 4]);
    s.push_back(kDigits[data[i] & 15]);
  }
  return s;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest init failed");
    }
  }
  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_.get(), data, len) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), out, &len) != 1) throw std::runtime_error("sha256: final failed");
    return to_hex(out, len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace detail

inline std::string sha256_hex(std::string_view data) {
  detail::Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  detail::Sha256 h;
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) h.update(buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) throw std::runtime_error("read error on " + path.string());
  return h.hex();
}

// Ordered key=value records; '#' starts a comment line.
class Manifest {
 public:
  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(std::move(key), std::move(value));
  }

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return v;
    return std::nullopt;
  }

  std::string require(std::string_view key) const {
    auto v = get(key);
    if (!v) throw std::invalid_argument("manifest: missing key '" + std::string(key) + "'");
    return *v;
  }

  // Entries whose key starts with `prefix`, with the prefix stripped.
  std::vector<std::pair<std::string, std::string>> with_prefix(std::string_view prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : entries_)
      if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0) {
        out.emplace_back(k.substr(prefix.size()), v);
      }
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << '=' << v << '\n';
  }

  static Manifest parse(std::istream& is) {
    Manifest m;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("manifest: malformed line " + std::to_string(lineno));
      }
      m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
  }

  static Manifest load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    return parse(in);
  }

  void save(const fs::path& path) const {
    std::ofstream out(path);
    write(out);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Fixed bundle layout.
struct BundlePaths {
  static constexpr const char* kManifest = "manifest";
  static constexpr const char* kCnf = "cnf/instance.cnf";
  static constexpr const char* kMeta = "cnf/instance.meta";
  static constexpr const char* kCubes = "cubes/instance.icnf";
  static std::string proof(std::size_t leaf) { return "proofs/leaf_" + std::to_string(leaf) + ".drat"; }
  static std::string model(std::size_t leaf) { return "proofs/leaf_" + std::to_string(leaf) + ".model"; }
  static std::string witnesses(std::size_t leaf) { return "witnesses/leaf_" + std::to_string(leaf) + ".wit"; }
};

}  // namespace ramsey
