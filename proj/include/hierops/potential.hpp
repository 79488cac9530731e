#pragma once

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hierops/error.hpp"
#include "hierops/rng.hpp"

namespace hierops {

struct PotentialSpec;

/// Centered normal. sigma = 0 is the degenerate (deterministic zero) case.
struct Gaussian {
  double sigma = 1.0;
};
struct Cauchy {
  double median = 0.0;
  double scale = 1.0;
};
struct Uniform {
  double lo = -1.0;
  double hi = 1.0;
};
struct MixtureComponent;
struct Mixture {
  std::vector<MixtureComponent> components;
};

/// Single-site potential density rho.
struct PotentialSpec {
  std::variant<Gaussian, Cauchy, Uniform, Mixture> kind = Gaussian{};
};

struct MixtureComponent {
  double weight = 0.0;
  PotentialSpec spec;
};

inline void validate(const PotentialSpec& spec) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Gaussian>) {
          if (!(k.sigma >= 0.0) || !std::isfinite(k.sigma))
            throw ConfigError("gaussian sigma must be finite and >= 0");
        } else if constexpr (std::is_same_v<K, Cauchy>) {
          if (!(k.scale > 0.0) || !std::isfinite(k.scale) || !std::isfinite(k.median))
            throw ConfigError("cauchy scale must be finite and > 0");
        } else if constexpr (std::is_same_v<K, Uniform>) {
          if (!(k.lo < k.hi) || !std::isfinite(k.lo) || !std::isfinite(k.hi))
            throw ConfigError("uniform requires finite lo < hi");
        } else {
          if (k.components.empty()) throw ConfigError("mixture has no components");
          double total = 0.0;
          for (const auto& c : k.components) {
            if (!(c.weight >= 0.0)) throw ConfigError("mixture weights must be >= 0");
            total += c.weight;
            validate(c.spec);
          }
          if (std::abs(total - 1.0) > 1e-9)
            throw ConfigError("mixture weights must sum to 1");
        }
      },
      spec.kind);
}

inline double sample_one(const PotentialSpec& spec, Engine& rng) {
  return std::visit(
      [&rng](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Gaussian>) {
          if (k.sigma == 0.0) return 0.0;
          return std::normal_distribution<double>(0.0, k.sigma)(rng);
        } else if constexpr (std::is_same_v<K, Cauchy>) {
          return std::cauchy_distribution<double>(k.median, k.scale)(rng);
        } else if constexpr (std::is_same_v<K, Uniform>) {
          return std::uniform_real_distribution<double>(k.lo, k.hi)(rng);
        } else {
          const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          double acc = 0.0;
          for (const auto& c : k.components) {
            acc += c.weight;
            if (u < acc) return sample_one(c.spec, rng);
          }
          return sample_one(k.components.back().spec, rng);
        }
      },
      spec.kind);
}

/// `count` i.i.d. draws from rho, consumed from `rng` in order.
inline std::vector<double> sample_potential(const PotentialSpec& spec,
                                            std::size_t count, Engine& rng) {
  validate(spec);
  std::vector<double> out(count);
  for (auto& v : out) v = sample_one(spec, rng);
  return out;
}

/// Density value. The degenerate Gaussian has no density.
inline double pdf(const PotentialSpec& spec, double x) {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Gaussian>) {
          if (k.sigma == 0.0) throw ConfigError("degenerate gaussian has no density");
          const double z = x / k.sigma;
          return std::exp(-0.5 * z * z) / (k.sigma * std::sqrt(2.0 * std::numbers::pi));
        } else if constexpr (std::is_same_v<K, Cauchy>) {
          const double z = (x - k.median) / k.scale;
          return 1.0 / (std::numbers::pi * k.scale * (1.0 + z * z));
        } else if constexpr (std::is_same_v<K, Uniform>) {
          return (x >= k.lo && x <= k.hi) ? 1.0 / (k.hi - k.lo) : 0.0;
        } else {
          double acc = 0.0;
          for (const auto& c : k.components) acc += c.weight * pdf(c.spec, x);
          return acc;
        }
      },
      spec.kind);
}

inline double cdf(const PotentialSpec& spec, double x) {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Gaussian>) {
          if (k.sigma == 0.0) return x >= 0.0 ? 1.0 : 0.0;
          return 0.5 * std::erfc(-x / (k.sigma * std::numbers::sqrt2));
        } else if constexpr (std::is_same_v<K, Cauchy>) {
          return 0.5 + std::atan((x - k.median) / k.scale) / std::numbers::pi;
        } else if constexpr (std::is_same_v<K, Uniform>) {
          if (x <= k.lo) return 0.0;
          if (x >= k.hi) return 1.0;
          return (x - k.lo) / (k.hi - k.lo);
        } else {
          double acc = 0.0;
          for (const auto& c : k.components) acc += c.weight * cdf(c.spec, x);
          return acc;
        }
      },
      spec.kind);
}

namespace detail {

inline std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto field = text.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
      throw ConfigError("bad number '" + std::string(field) + "' in distribution");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

/// Parses the CLI form NAME:PARAMS.
///   gaussian:SIGMA  cauchy:MEDIAN,SCALE  uniform:LO,HI
///   mixture:W1*SPEC1;W2*SPEC2;...   (components may not themselves be mixtures)
inline PotentialSpec parse_potential(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError("distribution must look like NAME:PARAMS, got '" + std::string(text) + "'");
  const auto name = text.substr(0, colon);
  const auto params = text.substr(colon + 1);
  PotentialSpec spec;
  if (name == "mixture") {
    Mixture mix;
    std::string_view rest = params;
    while (!rest.empty()) {
      const auto semi = rest.find(';');
      const auto item = rest.substr(0, semi);
      const auto star = item.find('*');
      if (star == std::string_view::npos)
        throw ConfigError("mixture component must be WEIGHT*SPEC");
      const auto w = detail::parse_numbers(item.substr(0, star));
      if (w.size() != 1) throw ConfigError("bad mixture weight");
      mix.components.push_back({w[0], parse_potential(item.substr(star + 1))});
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
    spec.kind = std::move(mix);
  } else {
    const auto p = detail::parse_numbers(params);
    if (name == "gaussian" && p.size() == 1) {
      spec.kind = Gaussian{p[0]};
    } else if (name == "cauchy" && p.size() == 2) {
      spec.kind = Cauchy{p[0], p[1]};
    } else if (name == "uniform" && p.size() == 2) {
      spec.kind = Uniform{p[0], p[1]};
    } else {
      throw ConfigError("unknown distribution or wrong parameter count: '" +
                        std::string(text) + "'");
    }
  }
  validate(spec);
  return spec;
}

inline std::string to_string(const PotentialSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        auto num = [](double v) {
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, res.ptr);
        };
        if constexpr (std::is_same_v<K, Gaussian>) {
          return "gaussian:" + num(k.sigma);
        } else if constexpr (std::is_same_v<K, Cauchy>) {
          return "cauchy:" + num(k.median) + "," + num(k.scale);
        } else if constexpr (std::is_same_v<K, Uniform>) {
          return "uniform:" + num(k.lo) + "," + num(k.hi);
        } else {
          std::string out = "mixture:";
          for (std::size_t i = 0; i < k.components.size(); ++i) {
            if (i) out += ';';
            out += num(k.components[i].weight) + "*" + to_string(k.components[i].spec);
          }
          return out;
        }
      },
      spec.kind);
}

}  // namespace hierops
