#pragma once

#include <filesystem>
#include <string>

#include "choquard/grid.hpp"

namespace choquard {

/// Raw little-endian doubles in row-major order at `<stem>.bin`, metadata at `<stem>.json`
/// ({dims, n, L, kind, label}, plus `config_hash` when given).
void write_snapshot(const std::filesystem::path& stem, const Field& f, const std::string& config_hash = {});
void write_snapshot(const std::filesystem::path& stem, const RadialField& f, const std::string& config_hash = {});

Field read_snapshot(const std::filesystem::path& stem);
RadialField read_radial_snapshot(const std::filesystem::path& stem);

/// Plain array I/O with the same byte convention.
void write_raw(const std::filesystem::path& file, const Eigen::ArrayXd& v);
Eigen::ArrayXd read_raw(const std::filesystem::path& file, Eigen::Index expected = -1);

}  // namespace choquard
