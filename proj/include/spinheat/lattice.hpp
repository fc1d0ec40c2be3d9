#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spinheat/errors.hpp"

namespace spinheat {

enum class LatticeKind { chain, box2d, box3d };
enum class Boundary { open, periodic };

inline const char* to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::chain: return "chain";
    case LatticeKind::box2d: return "box2d";
    case LatticeKind::box3d: return "box3d";
  }
  return "?";
}

inline const char* to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

struct LatticeSpec {
  LatticeKind kind = LatticeKind::chain;
  std::vector<int> extents;  // one entry per axis, each >= 2
  Boundary boundary = Boundary::periodic;

  int dimensions() const {
    switch (kind) {
      case LatticeKind::chain: return 1;
      case LatticeKind::box2d: return 2;
      case LatticeKind::box3d: return 3;
    }
    return 0;
  }

  std::string label() const {
    std::string s = to_string(kind);
    for (int e : extents) s += ":" + std::to_string(e);
    s += ":";
    s += to_string(boundary);
    return s;
  }
};

// Real-valued function on lattice sites (occupation / probability scale).
using SiteField = std::vector<double>;

// Finite nearest-neighbor graph. Sites are the row-major linearization of
// the axis coordinates (last axis fastest). Immutable after construction.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
    const int dims = spec_.dimensions();
    if (static_cast<int>(spec_.extents.size()) != dims)
      throw config_error("lattice spec needs one extent per axis");
    for (int e : spec_.extents)
      if (e < 2) throw config_error("lattice extents must be >= 2");
    if (spec_.kind == LatticeKind::chain &&
        spec_.boundary == Boundary::periodic && spec_.extents[0] < 3)
      throw config_error("periodic chain needs at least 3 sites");

    site_count_ = 1;
    for (int e : spec_.extents) site_count_ *= e;

    // One edge per axis per site toward +1, wrapping on periodic axes.
    // On a periodic axis of extent 2 the wrap edge coincides with the open
    // one and is skipped, keeping the edge list duplicate-free.
    std::vector<int> coord(dims, 0);
    for (int s = 0; s < site_count_; ++s) {
      coords_of(s, coord);
      for (int ax = 0; ax < dims; ++ax) {
        const int e = spec_.extents[ax];
        if (coord[ax] + 1 < e) {
          edges_.emplace_back(s, neighbor(coord, ax, +1));
        } else if (spec_.boundary == Boundary::periodic && e > 2) {
          edges_.emplace_back(neighbor(coord, ax, +1), s);
        }
      }
    }
    for (auto& [a, b] : edges_)
      if (a > b) std::swap(a, b);
    std::sort(edges_.begin(), edges_.end());

    adjacency_.resize(site_count_);
    for (auto [a, b] : edges_) {
      adjacency_[a].push_back(b);
      adjacency_[b].push_back(a);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  }

  const LatticeSpec& spec() const { return spec_; }
  int site_count() const { return site_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int site) const {
    check_site(site);
    return adjacency_[site];
  }

  void coords_of(int site, std::vector<int>& coord) const {
    const int dims = spec_.dimensions();
    coord.resize(dims);
    for (int ax = dims - 1; ax >= 0; --ax) {
      coord[ax] = site % spec_.extents[ax];
      site /= spec_.extents[ax];
    }
  }

  int site_at(const std::vector<int>& coord) const {
    int s = 0;
    for (int ax = 0; ax < spec_.dimensions(); ++ax)
      s = s * spec_.extents[ax] + coord[ax];
    return s;
  }

  // Translation by `amount` along `axis`; defined on periodic lattices only.
  int translate(int site, int axis, int amount) const {
    if (spec_.boundary != Boundary::periodic)
      throw config_error("translation needs a periodic lattice");
    std::vector<int> coord;
    coords_of(site, coord);
    const int e = spec_.extents[axis];
    coord[axis] = ((coord[axis] + amount) % e + e) % e;
    return site_at(coord);
  }

  void check_site(int site) const {
    if (site < 0 || site >= site_count_)
      throw config_error("site index out of range");
  }

 private:
  int neighbor(std::vector<int>& coord, int axis, int step) const {
    const int e = spec_.extents[axis];
    coord[axis] = (coord[axis] + step + e) % e;
    const int s = site_at(coord);
    coord[axis] = (coord[axis] - step + e) % e;
    return s;
  }

  LatticeSpec spec_;
  int site_count_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

inline std::shared_ptr<const Lattice> build_lattice(const LatticeSpec& spec) {
  return std::make_shared<const Lattice>(spec);
}

// Graph Laplacian action (Delta f)(i) = sum_{j~i} (f(j) - f(i)).
inline SiteField laplacian_apply(const Lattice& lat, const SiteField& f) {
  if (static_cast<int>(f.size()) != lat.site_count())
    throw config_error("field length does not match lattice");
  SiteField out(f.size(), 0.0);
  for (auto [a, b] : lat.edges()) {
    out[a] += f[b] - f[a];
    out[b] += f[a] - f[b];
  }
  return out;
}

// Shortest-path edge count by breadth-first search.
inline int graph_distance(const Lattice& lat, int i, int j) {
  lat.check_site(i);
  lat.check_site(j);
  if (i == j) return 0;
  std::vector<int> dist(lat.site_count(), -1);
  dist[i] = 0;
  std::deque<int> queue{i};
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int t : lat.neighbors(s)) {
      if (dist[t] >= 0) continue;
      dist[t] = dist[s] + 1;
      if (t == j) return dist[t];
      queue.push_back(t);
    }
  }
  throw config_error("lattice is not connected");
}

// Distances from one site to every site (single BFS).
inline std::vector<int> distances_from(const Lattice& lat, int i) {
  lat.check_site(i);
  std::vector<int> dist(lat.site_count(), -1);
  dist[i] = 0;
  std::deque<int> queue{i};
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int t : lat.neighbors(s)) {
      if (dist[t] >= 0) continue;
      dist[t] = dist[s] + 1;
      queue.push_back(t);
    }
  }
  return dist;
}

inline int eccentricity(const Lattice& lat, int i) {
  const auto dist = distances_from(lat, i);
  int ecc = 0;
  for (int d : dist) {
    if (d < 0) throw config_error("lattice is not connected");
    ecc = std::max(ecc, d);
  }
  return ecc;
}

}  // namespace spinheat
