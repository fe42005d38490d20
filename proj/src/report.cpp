#include "choquard/report.hpp"

#include <cstdio>
#include <fstream>

namespace choquard {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const EnergyBreakdown& e) {
  return {{"dirichlet", e.dirichlet}, {"potential", e.potential}, {"mass", e.mass}, {"nonlocal", e.nonlocal},
          {"A", e.A},                 {"J", e.J},                 {"q", e.q}};
}

json to_json(const SolveResult& r) {
  json j = {{"status", r.status},
            {"converged", r.converged},
            {"iterations", r.iterations},
            {"energy", to_json(r.e)},
            {"nehari_residual", r.nehari_residual},
            {"grad_norm", r.grad_norm},
            {"threshold", r.threshold},
            {"below_threshold", r.below_threshold},
            {"ps_ratio", r.ps_ratio},
            {"barycenter", to_json(r.barycenter)},
            {"truncated_barycenter", to_json(r.truncated_barycenter)}};
  j["pohozaev"] = r.pohozaev ? json(*r.pohozaev) : json(nullptr);
  j["mass_outside"] = r.mass_outside ? json(*r.mass_outside) : json(nullptr);
  if (r.coeffs.size() > 0) {
    j["indefinite"] = {{"coeffs", to_json(r.coeffs)},
                       {"level_reduced", r.e.J},
                       {"level_direct", r.level_direct},
                       {"level_gap", std::abs(r.level_direct - r.e.J) / std::abs(r.e.J)},
                       {"reduction_residual", r.reduction_residual},
                       {"hessian_eigs", to_json(r.hessian_eigs)}};
  }
  return j;
}

json to_json(const ConstantSet& c) {
  return {{"N", c.N},
          {"mu", c.mu},
          {"C_hls", {{"value", c.C_hls}, {"provenance", "closed form (log-gamma)"}}},
          {"hls_ratio", {{"value", c.hls_ratio}, {"provenance", "radial quadrature of the extremal"},
                         {"discrepancy", std::abs(c.hls_ratio - c.C_hls) / c.C_hls}}},
          {"S", {{"value", c.S}, {"provenance", "radial Rayleigh quotient of U"}}},
          {"S_HL", {{"value", c.S_HL}, {"provenance", "relation S / C^{(N-2)/(2N-mu)}"}}},
          {"S_HL_quotient", {{"value", c.S_HL_quotient}, {"provenance", "nonlocal quotient of U"}}},
          {"relation_gap", c.relation_gap()},
          {"c_star", {{"value", c.c_star}, {"provenance", "level_coeff * S_HL^{(2N-mu)/(N+2-mu)}"}}},
          {"tilde", {{"grad_sq", c.grad_tilde},
                     {"D", c.D_tilde},
                     {"target", c.tilde_target},
                     {"grad_gap", std::abs(c.grad_tilde - c.tilde_target) / c.tilde_target},
                     {"D_gap", std::abs(c.D_tilde - c.tilde_target) / c.tilde_target},
                     {"J", c.J_tilde},
                     {"residual", c.residual},
                     {"pohozaev", c.pohozaev}}},
          {"grid", {{"nodes", c.grid_nodes}, {"r_max", c.grid_r_max}, {"scale", c.grid_scale}}}};
}

json to_json(const AsymptoticTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"eps", r.eps},
                    {"grad_sq", r.grad_sq},
                    {"D", r.D},
                    {"l2_sq", r.l2_sq},
                    {"remainder", r.remainder},
                    {"l2_ratio", r.l2_ratio},
                    {"reliable", r.reliable},
                    {"note", r.note}});
  return {{"N", t.N},
          {"mu", t.mu},
          {"delta", t.delta},
          {"target", t.target},
          {"remainder_exponent", t.remainder_exponent},
          {"l2_ratio_variation", t.l2_ratio_variation},
          {"rows", rows}};
}

json to_json(const ValidationReport& v) {
  return {{"min_value", v.min_value},
          {"sublevel_fraction", v.sublevel_fraction},
          {"sublevel_volume", v.sublevel_volume},
          {"shell_min", v.shell_min},
          {"zero_points", static_cast<long long>(v.zero_points)},
          {"origin_in_zero_set", v.origin_in_zero_set},
          {"zero_set", v.zero_set_ok},
          {"sublevel", v.sublevel_ok},
          {"shell", v.shell_ok},
          {"notes", v.notes}};
}

json to_json(const SpectralSplit& s) {
  return {{"lambda", s.lambda},
          {"beta", s.beta},
          {"zeta", to_json(s.zeta)},
          {"residuals", to_json(s.residuals)},
          {"morse_index", s.morse_index},
          {"iterations", s.iterations}};
}

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

CsvTable::CsvTable(std::vector<std::string> header, std::string config_hash)
    : header_(std::move(header)), hash_(std::move(config_hash)) {}

void CsvTable::add(const std::vector<Cell>& row) {
  if (row.size() != header_.size()) throw Error("CSV row has the wrong number of columns");
  std::string line;
  for (const auto& c : row) {
    if (const double* d = std::get_if<double>(&c))
      line += format_real(*d);
    else if (const long long* i = std::get_if<long long>(&c))
      line += std::to_string(*i);
    else
      line += std::get<std::string>(c);
    line += ',';
  }
  rows_.push_back(line + hash_);
}

std::string CsvTable::text() const {
  std::string s;
  for (const auto& h : header_) s += h + ',';
  s += "config_hash\n";
  for (const auto& r : rows_) s += r + '\n';
  return s;
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text();
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace choquard
