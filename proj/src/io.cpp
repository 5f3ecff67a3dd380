#include "romkit/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "romkit/errors.hpp"

namespace romkit::io {

namespace {
constexpr char kMagic[4] = {'R', 'O', 'M', 'F'};
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw MissingArtifact("cannot open for writing: " + path);
  const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
  const std::uint32_t dtype = kDtypeF64;
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&rows), 4);
  f.write(reinterpret_cast<const char*>(&cols), 4);
  f.write(reinterpret_cast<const char*>(&dtype), 4);
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!f) throw MissingArtifact("write failed: " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("cannot open: " + path);
  char magic[4];
  std::uint32_t rows = 0, cols = 0, dtype = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&rows), 4);
  f.read(reinterpret_cast<char*>(&cols), 4);
  f.read(reinterpret_cast<char*>(&dtype), 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw MissingArtifact("not a ROMF matrix file: " + path);
  if (dtype != kDtypeF64)
    throw MissingArtifact("unsupported dtype code " + std::to_string(dtype) +
                          " in " + path);
  Eigen::MatrixXd m(rows, cols);
  f.read(reinterpret_cast<char*>(m.data()),
         static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!f) throw MissingArtifact("truncated matrix file: " + path);
  return m;
}

void write_sidecar(const std::string& path, const nlohmann::json& meta) {
  std::ofstream f(path + ".json", std::ios::trunc);
  if (!f) throw MissingArtifact("cannot open for writing: " + path + ".json");
  f << meta.dump(2) << "\n";
}

nlohmann::json read_sidecar(const std::string& path) {
  std::ifstream f(path + ".json");
  if (!f) throw MissingArtifact("cannot open: " + path + ".json");
  nlohmann::json meta;
  try {
    f >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw MissingArtifact("bad sidecar " + path + ".json: " + e.what());
  }
  return meta;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw MissingArtifact("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) f << ',';
    f << header[i];
  }
  f << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw DimensionMismatch("csv row width " + std::to_string(row.size()) +
                              " != header width " + std::to_string(header.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) f << ',';
      f << row[i];
    }
    f << '\n';
  }
}

}  // namespace romkit::io
