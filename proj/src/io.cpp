#include "taxon/io.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "taxon/common.hpp"

namespace taxon::io {

namespace {

// Host is assumed little-endian (x86/ARM builds); byte order is asserted once.
void check_little_endian() {
  static const bool ok = [] {
    std::uint32_t x = 1;
    char c;
    std::memcpy(&c, &x, 1);
    return c == 1;
  }();
  if (!ok) throw Error("matrix io requires a little-endian host");
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::string& magic) {
  check_little_endian();
  if (magic.size() != 4) throw Error("matrix magic must be 4 bytes");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(magic.data(), 4);
  const std::uint32_t n = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t d = static_cast<std::uint32_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  std::vector<float> row(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) row[j] = static_cast<float>(m(i, j));
    out.write(reinterpret_cast<const char*>(row.data()), 4LL * d);
  }
  if (!out) throw Error("write failed: " + path.string());
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path,
                            const std::string& magic) {
  check_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  char got[4];
  in.read(got, 4);
  if (!in || std::string(got, 4) != magic)
    throw Error("bad magic in " + path.string() + " (expected " + magic + ")");
  std::uint32_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  if (!in) throw Error("truncated header in " + path.string());
  Eigen::MatrixXd m(n, d);
  std::vector<float> row(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), 4LL * d);
    if (!in) throw Error("truncated matrix body in " + path.string());
    for (std::uint32_t j = 0; j < d; ++j) m(i, j) = row[j];
  }
  return m;
}

bool has_magic(const std::filesystem::path& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char got[4];
  in.read(got, 4);
  return in && magic.size() == 4 && std::string(got, 4) == magic;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text(path));
}

}  // namespace taxon::io
