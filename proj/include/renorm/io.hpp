#pragma once

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "renorm/commutator.hpp"
#include "renorm/solver.hpp"

namespace renorm::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* toolkit_version = "0.1.0";

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigurationError("cannot create directory " + p.string() + ": " + ec.message());
}

inline std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(p, mode);
  if (!os) throw ConfigurationError("cannot write " + p.string());
  return os;
}

inline void write_json(const fs::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

inline json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ConfigurationError("cannot read " + p.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("malformed JSON in " + p.string() + ": " + e.what());
  }
}

/// Writes `<base>.json` (header) and `<base>.bin` (raw little-endian f64) or
/// `<base>.csv` (%.17g, one value per line), samples in row-major order.
inline void write_field(const fs::path& base, const ScalarField& f, const std::string& format = "bin") {
  const auto data = fs::path(base).concat(format == "csv" ? ".csv" : ".bin");
  if (format == "bin") {
    auto os = open_out(data, std::ios::binary);
    for (double v : f.values()) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  } else if (format == "csv") {
    auto os = open_out(data);
    char buf[40];
    for (double v : f.values()) {
      std::snprintf(buf, sizeof buf, "%.17g\n", v);
      os << buf;
    }
  } else {
    throw ConfigurationError("unknown field format '" + format + "' (bin or csv)");
  }
  write_json(fs::path(base).concat(".json"), {{"dim", f.grid().dim()},
                                              {"n", f.grid().n()},
                                              {"mean_zero", f.homogeneous()},
                                              {"format", format},
                                              {"file", data.filename().string()}});
}

/// Reads a field from its JSON header.
inline ScalarField read_field(const fs::path& header) {
  const auto h = read_json(header);
  const Grid g(h.at("dim").get<int>(), h.at("n").get<int>());
  const auto data = header.parent_path() / h.at("file").get<std::string>();
  const auto format = h.at("format").get<std::string>();
  std::vector<double> v(g.size());
  if (format == "bin") {
    std::ifstream is(data, std::ios::binary);
    for (auto& x : v) {
      std::uint64_t bits = 0;
      if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw ConfigurationError("short field file " + data.string());
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      x = std::bit_cast<double>(bits);
    }
  } else if (format == "csv") {
    std::ifstream is(data);
    for (auto& x : v)
      if (!(is >> x)) throw ConfigurationError("short field file " + data.string());
  } else {
    throw ConfigurationError("unknown field format '" + format + "'");
  }
  return {g, std::move(v), h.value("mean_zero", false)};
}

inline void write_norm_csv(std::ostream& os, const RunResult& r) {
  char buf[128];
  os << "t,r,lr_norm_to_r\n";
  for (const auto& s : r.norms) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.r, s.value);
    os << buf;
  }
}

/// Trajectory store: per-snapshot field files under `dir`, a norm CSV and a
/// manifest.json echoing `config`.
inline json write_trajectory(const fs::path& dir, const RunResult& r, const json& config,
                             const std::string& format = "bin") {
  ensure_dir(dir);
  json snaps = json::array();
  for (std::size_t m = 0; m < r.theta.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "theta_%05zu", m);
    write_field(dir / name, r.theta[m], format);
    json s{{"t", r.times[m]}, {"theta", std::string(name) + ".json"}};
    if (m < r.u.size()) {
      json comps = json::array();
      for (std::size_t a = 0; a < r.u[m].size(); ++a) {
        std::snprintf(name, sizeof name, "u%zu_%05zu", a, m);
        write_field(dir / name, r.u[m][a], format);
        comps.push_back(std::string(name) + ".json");
      }
      s["u"] = comps;
    }
    snaps.push_back(s);
  }
  {
    auto os = open_out(dir / "norms.csv");
    write_norm_csv(os, r);
  }
  json status = r.status == RunStatus::completed ? "completed" : r.status == RunStatus::cfl_violation ? "cfl_violation" : "blow_up";
  json man{{"config", config},
           {"version", toolkit_version},
           {"status", status},
           {"failure", r.failure},
           {"failed_step", r.failed_step},
           {"steps", r.steps},
           {"max_cfl", r.max_cfl},
           {"warnings", r.warnings},
           {"times", r.times},
           {"snapshots", snaps},
           {"norm_csv", "norms.csv"}};
  write_json(dir / "manifest.json", man);
  return man;
}

inline SpaceTimeField read_trajectory(const fs::path& dir) {
  const auto man = read_json(dir / "manifest.json");
  std::vector<double> times;
  std::vector<ScalarField> theta;
  std::vector<VectorField> u;
  for (const auto& s : man.at("snapshots")) {
    times.push_back(s.at("t").get<double>());
    theta.push_back(read_field(dir / s.at("theta").get<std::string>()));
    if (s.contains("u")) {
      std::vector<ScalarField> comps;
      for (const auto& c : s.at("u")) comps.push_back(read_field(dir / c.get<std::string>()));
      u.emplace_back(std::move(comps));
    }
  }
  return SpaceTimeField::trajectory(std::move(times), std::move(theta), std::move(u));
}

inline json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r_squared}, {"degenerate", f.degenerate}};
}

}  // namespace renorm::io
