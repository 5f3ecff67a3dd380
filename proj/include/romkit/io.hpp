#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "json.hpp"

namespace romkit::io {

// Binary matrix container: 16-byte header (magic "ROMF", u32 rows, u32 cols,
// u32 dtype) followed by column-major float64 payload.  dtype code 1 = f64.
inline constexpr std::uint32_t kDtypeF64 = 1;

void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

// Sidecar metadata lives next to the matrix at <path>.json (times, dt,
// block_layout, index arrays).
void write_sidecar(const std::string& path, const nlohmann::json& meta);
nlohmann::json read_sidecar(const std::string& path);

// Doubles are rendered with 17 significant digits so a value round-trips
// through text exactly.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace romkit::io
