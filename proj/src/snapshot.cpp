#include "choquard/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include "json.hpp"

namespace choquard {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

using nlohmann::json;

void write_sidecar(const std::filesystem::path& stem, const json& meta) {
  std::ofstream out(std::filesystem::path(stem).concat(".json"));
  if (!out) throw Error("cannot write " + stem.string() + ".json");
  out << meta.dump(2) << '\n';
}

json read_sidecar(const std::filesystem::path& stem) {
  std::ifstream in(std::filesystem::path(stem).concat(".json"));
  if (!in) throw Error("cannot read " + stem.string() + ".json");
  return json::parse(in);
}

}  // namespace

void write_raw(const std::filesystem::path& file, const Eigen::ArrayXd& v) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::ArrayXd read_raw(const std::filesystem::path& file, Eigen::Index expected) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot read " + file.string());
  const auto bytes = static_cast<Eigen::Index>(in.tellg());
  if (bytes % static_cast<Eigen::Index>(sizeof(double)) != 0) throw Error(file.string() + ": truncated float data");
  const Eigen::Index n = bytes / static_cast<Eigen::Index>(sizeof(double));
  if (expected >= 0 && n != expected) throw GridMismatch(file.string() + ": sample count does not match metadata");
  Eigen::ArrayXd v(n);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(v.data()), bytes);
  return v;
}

void write_snapshot(const std::filesystem::path& stem, const Field& f, const std::string& config_hash) {
  const TensorGrid& g = *f.grid;
  json meta = {{"dims", g.dim()}, {"n", g.n()}, {"L", g.half_width()}, {"kind", "tensor"}, {"label", f.label}};
  if (!config_hash.empty()) meta["config_hash"] = config_hash;
  write_raw(std::filesystem::path(stem).concat(".bin"), f.values);
  write_sidecar(stem, meta);
}

void write_snapshot(const std::filesystem::path& stem, const RadialField& f, const std::string& config_hash) {
  const RadialGrid& g = *f.grid;
  json meta = {{"dims", g.dim()},  {"n", g.size()},       {"L", g.r_max()},
               {"kind", "radial"}, {"scale", g.scale()}, {"label", f.label}};
  if (!config_hash.empty()) meta["config_hash"] = config_hash;
  write_raw(std::filesystem::path(stem).concat(".bin"), f.values);
  write_sidecar(stem, meta);
}

Field read_snapshot(const std::filesystem::path& stem) {
  const json meta = read_sidecar(stem);
  if (meta.at("kind") != "tensor") throw GridMismatch(stem.string() + ": not a tensor-grid snapshot");
  auto g = std::make_shared<const TensorGrid>(meta.at("dims").get<int>(), meta.at("n").get<int>(),
                                              meta.at("L").get<double>());
  Eigen::ArrayXd v = read_raw(std::filesystem::path(stem).concat(".bin"), g->size());
  return Field(g, std::move(v), meta.value("label", std::string{}));
}

RadialField read_radial_snapshot(const std::filesystem::path& stem) {
  const json meta = read_sidecar(stem);
  if (meta.at("kind") != "radial") throw GridMismatch(stem.string() + ": not a radial-grid snapshot");
  auto g = std::make_shared<const RadialGrid>(meta.at("dims").get<int>(), meta.at("L").get<double>(),
                                              meta.at("n").get<int>() - 1, meta.at("scale").get<double>());
  Eigen::ArrayXd v = read_raw(std::filesystem::path(stem).concat(".bin"), g->size());
  return RadialField(g, std::move(v), meta.value("label", std::string{}));
}

}  // namespace choquard
