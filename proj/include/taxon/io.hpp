#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace taxon::io {

// Binary dense-matrix format: 4-byte magic, u32 rows, u32 cols,
// rows*cols float32 row-major, all little-endian. Embeddings use magic
// "EMB1", consensus matrices "CON1".
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::string& magic = "EMB1");
Eigen::MatrixXd read_matrix(const std::filesystem::path& path,
                            const std::string& magic = "EMB1");

// True when the file starts with the given 4-byte magic.
bool has_magic(const std::filesystem::path& path, const std::string& magic);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace taxon::io
