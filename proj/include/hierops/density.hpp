#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hierops/error.hpp"

namespace hierops {

/// Probability density sampled on strictly increasing nodes, linear between
/// nodes and zero outside; `tail_mass` is the probability carried outside
/// [front, back] whose shape is not represented.
struct DensityGrid {
  std::vector<double> nodes;
  std::vector<double> values;
  double tail_mass = 0.0;

  std::size_t size() const noexcept { return nodes.size(); }

  double integral() const {
    double acc = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
      acc += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
    return acc;
  }

  double total_mass() const { return integral() + tail_mass; }

  double sup() const {
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  }

  /// Linear interpolation; 0 outside the grid.
  double operator()(double x) const {
    if (nodes.empty() || !(x >= nodes.front()) || !(x <= nodes.back())) return 0.0;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.end()) return values.back();
    const auto i = static_cast<std::size_t>(it - nodes.begin());
    const double t = (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    return values[i - 1] + t * (values[i] - values[i - 1]);
  }

  /// Mass of the represented part on [a, b] (trapezoid on the linear interpolant).
  double mass_between(double a, double b) const {
    if (nodes.size() < 2 || b <= a) return 0.0;
    a = std::max(a, nodes.front());
    b = std::min(b, nodes.back());
    if (b <= a) return 0.0;
    double acc = 0.0;
    double prev_x = a, prev_v = (*this)(a);
    auto it = std::upper_bound(nodes.begin(), nodes.end(), a);
    for (; it != nodes.end() && *it < b; ++it) {
      const auto i = static_cast<std::size_t>(it - nodes.begin());
      acc += 0.5 * (prev_v + values[i]) * (nodes[i] - prev_x);
      prev_x = nodes[i];
      prev_v = values[i];
    }
    acc += 0.5 * (prev_v + (*this)(b)) * (b - prev_x);
    return acc;
  }

  /// Node positions bounding the central (1 - 2 alpha) part of the
  /// represented mass.
  std::pair<double, double> central_region(double alpha) const {
    const double total = integral();
    double acc = 0.0;
    double lo = nodes.front(), hi = nodes.back();
    bool found_lo = false;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      acc += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
      if (!found_lo && acc >= alpha * total) {
        lo = nodes[i - 1];
        found_lo = true;
      }
      if (acc >= (1.0 - alpha) * total) {
        hi = nodes[i];
        break;
      }
    }
    return {lo, hi};
  }
};

inline void validate(const DensityGrid& g, double mass_tolerance = 1e-6) {
  if (g.nodes.size() != g.values.size() || g.nodes.size() < 2)
    throw ArgumentError("density grid needs >= 2 nodes with matching values");
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (!(g.nodes[i] > g.nodes[i - 1])) throw ArgumentError("density nodes must increase strictly");
  for (double v : g.values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("density values must be finite and >= 0");
  if (!(g.tail_mass >= 0.0)) throw ArgumentError("tail mass must be >= 0");
  if (std::abs(g.total_mass() - 1.0) > mass_tolerance)
    throw ArgumentError("density mass " + std::to_string(g.total_mass()) + " != 1");
}

/// Nodes center + scale sinh(u), u uniform on [-U, U], with the outermost
/// node at |x - center| = max_abs. Fine near the center, geometric in the tails.
inline std::vector<double> sinh_nodes(double center, double scale, double max_abs,
                                      std::size_t count) {
  if (count < 2 || !(scale > 0.0) || !(max_abs > 0.0))
    throw ConfigError("sinh grid needs count >= 2 and positive scales");
  const double u_max = std::asinh(max_abs / scale);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = -u_max + 2.0 * u_max * static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = center + scale * std::sinh(u);
  }
  return out;
}

/// Samples `density` on `nodes`; tail_mass is 1 minus the trapezoid integral.
template <class F>
DensityGrid sample_density(std::vector<double> nodes, F&& density) {
  DensityGrid g;
  g.values.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) g.values[i] = density(nodes[i]);
  g.nodes = std::move(nodes);
  g.tail_mass = std::max(0.0, 1.0 - g.integral());
  return g;
}

/// Two-column text: a header line "# tail_mass <value>", then "node value"
/// per line. Numbers use shortest round-trip formatting.
inline void write_density(std::ostream& os, const DensityGrid& g) {
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  os << "# tail_mass " << num(g.tail_mass) << '\n';
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    os << num(g.nodes[i]) << ' ' << num(g.values[i]) << '\n';
}

inline DensityGrid read_density(std::istream& is) {
  DensityGrid g;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty density file");
  {
    std::istringstream head(line);
    std::string hash, key;
    head >> hash >> key >> g.tail_mass;
    if (hash != "#" || key != "tail_mass" || head.fail())
      throw ConfigError("density header must be '# tail_mass <value>'");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0.0, v = 0.0;
    if (!(row >> x >> v)) throw ConfigError("bad density row: " + line);
    g.nodes.push_back(x);
    g.values.push_back(v);
  }
  validate(g, 1e-4);
  return g;
}

}  // namespace hierops
