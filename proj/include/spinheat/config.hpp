#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinheat/cache.hpp"
#include "spinheat/errors.hpp"
#include "spinheat/lattice.hpp"

namespace spinheat {

enum class Suite { verify, sweep, rate, locality };

inline const char* to_string(Suite s) {
  switch (s) {
    case Suite::verify: return "verify";
    case Suite::sweep: return "sweep";
    case Suite::rate: return "rate";
    case Suite::locality: return "locality";
  }
  return "?";
}

enum class S0Mode { explicit_sites, block, random };

struct S0Source {
  S0Mode mode = S0Mode::block;
  std::vector<int> sites;  // explicit_sites
  int count = 1;           // random
};

// Linear start:stop:step grid or geometric min..max grid with a point count.
struct MuGrid {
  bool set = false;
  bool geometric = false;
  double start = 0.0, stop = 10.0, step = 0.25;
  double geo_min = 1e-3, geo_max = 1e-1;
  int geo_points = 8;

  std::vector<double> linear_values() const {
    if (geometric) throw config_error("suite needs a linear mu grid");
    if (step <= 0 && stop != start)
      throw config_error("mu grid step must be positive");
    if (stop < start) throw config_error("mu grid stop below start");
    std::vector<double> values;
    const int count =
        stop == start ? 0 : static_cast<int>(std::floor((stop - start) / step + 1e-6));
    for (int k = 0; k <= count; ++k) values.push_back(start + k * step);
    return values;
  }
};

struct ExperimentConfig {
  Suite suite = Suite::verify;
  std::vector<LatticeSpec> lattices;  // empty: suite default family
  int n_up = -1;                      // -1: half the sites, rounded down
  S0Source s0;
  MuGrid mu;
  BackendSettings backend;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  unsigned threads = 0;  // 0: hardware concurrency

  // locality-suite knobs
  int locality_site = 0;
  double locality_mu = 1.0;
  std::vector<int> locality_radii;  // empty: 1..eccentricity
  int locality_samples = 64;

  int n_up_for(const Lattice& lat) const {
    const int n = n_up >= 0 ? n_up : lat.site_count() / 2;
    if (n > lat.site_count())
      throw config_error("n_up exceeds the site count");
    return n;
  }
};

// --- flag/string forms -------------------------------------------------

inline LatticeSpec parse_lattice(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 3)
    throw config_error("lattice spec needs kind:extents...:boundary");

  LatticeSpec spec;
  if (parts.front() == "chain")
    spec.kind = LatticeKind::chain;
  else if (parts.front() == "box2d")
    spec.kind = LatticeKind::box2d;
  else if (parts.front() == "box3d")
    spec.kind = LatticeKind::box3d;
  else
    throw config_error("unknown lattice kind: " + parts.front());

  if (parts.back() == "open")
    spec.boundary = Boundary::open;
  else if (parts.back() == "periodic")
    spec.boundary = Boundary::periodic;
  else
    throw config_error("unknown boundary: " + parts.back());

  for (std::size_t k = 1; k + 1 < parts.size(); ++k) {
    try {
      spec.extents.push_back(std::stoi(parts[k]));
    } catch (const std::exception&) {
      throw config_error("bad lattice extent: " + parts[k]);
    }
  }
  if (static_cast<int>(spec.extents.size()) != spec.dimensions())
    throw config_error("lattice spec needs one extent per axis");
  return spec;
}

inline S0Source parse_s0(const std::string& text) {
  S0Source src;
  if (text == "block") {
    src.mode = S0Mode::block;
  } else if (text == "random") {
    src.mode = S0Mode::random;
  } else if (text.rfind("random:", 0) == 0) {
    src.mode = S0Mode::random;
    src.count = std::stoi(text.substr(7));
  } else {
    src.mode = S0Mode::explicit_sites;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        src.sites.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw config_error("bad site index in s0 list: " + item);
      }
    }
    if (src.sites.empty()) throw config_error("empty s0 site list");
  }
  return src;
}

inline MuGrid parse_mu(const std::string& text) {
  MuGrid grid;
  grid.set = true;
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw config_error("bad mu grid entry: " + item);
    }
  }
  if (parts.size() == 1) {
    grid.start = grid.stop = parts[0];
    grid.step = 1.0;
  } else if (parts.size() == 3) {
    grid.start = parts[0];
    grid.stop = parts[1];
    grid.step = parts[2];
  } else {
    throw config_error("mu grid must be start:stop:step or a single value");
  }
  return grid;
}

inline MuGrid parse_mu_geometric(const std::string& text) {
  MuGrid grid;
  grid.set = true;
  grid.geometric = true;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3)
    throw config_error("geometric mu grid must be min:max:points");
  grid.geo_min = std::stod(parts[0]);
  grid.geo_max = std::stod(parts[1]);
  grid.geo_points = std::stoi(parts[2]);
  return grid;
}

// --- JSON forms ---------------------------------------------------------

inline nlohmann::ordered_json to_json(const LatticeSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"extents", spec.extents},
          {"boundary", to_string(spec.boundary)}};
}

inline LatticeSpec lattice_from_json(const nlohmann::json& j) {
  LatticeSpec spec;
  const std::string kind = j.at("kind");
  if (kind == "chain")
    spec.kind = LatticeKind::chain;
  else if (kind == "box2d")
    spec.kind = LatticeKind::box2d;
  else if (kind == "box3d")
    spec.kind = LatticeKind::box3d;
  else
    throw config_error("unknown lattice kind: " + kind);
  spec.extents = j.at("extents").get<std::vector<int>>();
  const std::string boundary = j.value("boundary", "periodic");
  if (boundary == "open")
    spec.boundary = Boundary::open;
  else if (boundary == "periodic")
    spec.boundary = Boundary::periodic;
  else
    throw config_error("unknown boundary: " + boundary);
  return spec;
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["suite"] = to_string(cfg.suite);
  j["lattices"] = nlohmann::ordered_json::array();
  for (const auto& spec : cfg.lattices) j["lattices"].push_back(to_json(spec));
  j["n_up"] = cfg.n_up;
  switch (cfg.s0.mode) {
    case S0Mode::explicit_sites:
      j["s0"] = {{"mode", "explicit"}, {"sites", cfg.s0.sites}};
      break;
    case S0Mode::block:
      j["s0"] = {{"mode", "block"}};
      break;
    case S0Mode::random:
      j["s0"] = {{"mode", "random"}, {"count", cfg.s0.count}};
      break;
  }
  if (cfg.mu.geometric) {
    j["mu"] = {{"geometric", true},
               {"min", cfg.mu.geo_min},
               {"max", cfg.mu.geo_max},
               {"points", cfg.mu.geo_points}};
  } else {
    j["mu"] = {{"start", cfg.mu.start},
               {"stop", cfg.mu.stop},
               {"step", cfg.mu.step}};
  }
  j["backend"] = {{"mode", to_string(cfg.backend.backend)},
                  {"dense_ceiling", cfg.backend.dense_ceiling},
                  {"krylov_tolerance", cfg.backend.krylov.tolerance},
                  {"krylov_max_subspace", cfg.backend.krylov.max_subspace},
                  {"amplitude_ceiling", cfg.backend.amplitude_ceiling}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  if (cfg.suite == Suite::locality) {
    j["locality"] = {{"site", cfg.locality_site},
                     {"mu", cfg.locality_mu},
                     {"radii", cfg.locality_radii},
                     {"samples", cfg.locality_samples}};
  }
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("suite")) {
    const std::string s = j.at("suite");
    if (s == "verify")
      cfg.suite = Suite::verify;
    else if (s == "sweep")
      cfg.suite = Suite::sweep;
    else if (s == "rate")
      cfg.suite = Suite::rate;
    else if (s == "locality")
      cfg.suite = Suite::locality;
    else
      throw config_error("unknown suite: " + s);
  }
  if (j.contains("lattice")) cfg.lattices.push_back(lattice_from_json(j.at("lattice")));
  if (j.contains("lattices"))
    for (const auto& spec : j.at("lattices"))
      cfg.lattices.push_back(lattice_from_json(spec));
  cfg.n_up = j.value("n_up", -1);
  if (j.contains("s0")) {
    const auto& s0 = j.at("s0");
    const std::string mode = s0.value("mode", "block");
    if (mode == "explicit") {
      cfg.s0.mode = S0Mode::explicit_sites;
      cfg.s0.sites = s0.at("sites").get<std::vector<int>>();
    } else if (mode == "block") {
      cfg.s0.mode = S0Mode::block;
    } else if (mode == "random") {
      cfg.s0.mode = S0Mode::random;
      cfg.s0.count = s0.value("count", 1);
    } else {
      throw config_error("unknown s0 mode: " + mode);
    }
  }
  if (j.contains("mu")) {
    const auto& mu = j.at("mu");
    cfg.mu.set = true;
    if (mu.value("geometric", false)) {
      cfg.mu.geometric = true;
      cfg.mu.geo_min = mu.at("min");
      cfg.mu.geo_max = mu.at("max");
      cfg.mu.geo_points = mu.at("points");
    } else {
      cfg.mu.start = mu.value("start", 0.0);
      cfg.mu.stop = mu.value("stop", 10.0);
      cfg.mu.step = mu.value("step", 0.25);
    }
  }
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    const std::string mode = b.value("mode", "auto");
    if (mode == "auto")
      cfg.backend.backend = EvolveBackend::automatic;
    else if (mode == "dense")
      cfg.backend.backend = EvolveBackend::dense;
    else if (mode == "krylov")
      cfg.backend.backend = EvolveBackend::krylov;
    else
      throw config_error("unknown backend: " + mode);
    cfg.backend.dense_ceiling =
        b.value("dense_ceiling", SectorPropagator::kDefaultDenseCeiling);
    cfg.backend.krylov.tolerance = b.value("krylov_tolerance", 1e-10);
    cfg.backend.krylov.max_subspace = b.value("krylov_max_subspace", 350);
    cfg.backend.amplitude_ceiling = b.value(
        "amplitude_ceiling", MagnonBasis::kDefaultAmplitudeCeiling);
  }
  cfg.seed = j.value("seed", 1ull);
  cfg.threads = j.value("threads", 0u);
  cfg.out_dir = j.value("out_dir", "out");
  if (j.contains("locality")) {
    const auto& l = j.at("locality");
    cfg.locality_site = l.value("site", 0);
    cfg.locality_mu = l.value("mu", 1.0);
    if (l.contains("radii"))
      cfg.locality_radii = l.at("radii").get<std::vector<int>>();
    cfg.locality_samples = l.value("samples", 64);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config field error: ") + e.what());
  }
}

}  // namespace spinheat
