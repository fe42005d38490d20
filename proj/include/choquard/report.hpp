#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "choquard/bubbles.hpp"
#include "choquard/params.hpp"
#include "choquard/solver.hpp"

namespace choquard {

using json = nlohmann::ordered_json;

json to_json(const EnergyBreakdown& e);
json to_json(const SolveResult& r);
json to_json(const ConstantSet& c);
json to_json(const AsymptoticTable& t);
json to_json(const ValidationReport& v);
json to_json(const SpectralSplit& s);
json to_json(const Eigen::VectorXd& v);

/// Pretty JSON with a trailing newline, written to `<path>.tmp` and renamed into place.
void write_json(const std::filesystem::path& path, const json& doc);

/// CSV table held in memory until write(); every row carries the config hash as its last column.
/// Reals use %.17g so files are bit-reproducible.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvTable(std::vector<std::string> header, std::string config_hash);
  void add(const std::vector<Cell>& row);
  std::string text() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::string hash_;
  std::vector<std::string> rows_;
};

std::string format_real(double x);

}  // namespace choquard
