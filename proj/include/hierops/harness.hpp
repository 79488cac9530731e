#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hierops/dbm.hpp"
#include "hierops/error.hpp"
#include "hierops/localization.hpp"
#include "hierops/models.hpp"
#include "hierops/rgflow.hpp"
#include "hierops/spectra.hpp"

namespace hierops {

inline constexpr const char* kVersion = "1.0.0";

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "laplacian-exact", "specdim",     "anderson-stats",   "ultrametric-sweep",
      "rp-transition",   "rgflow",      "dbm-check",        "spine-check",
      "trace-norm-check", "ipr-profile", "correlator-profile"};
  return names;
}

/// Unset fields take the preset's smoke-scale default (see resolve()).
struct RunConfig {
  std::string experiment;
  std::optional<unsigned> n;
  std::optional<double> c;
  std::optional<double> eps;
  std::optional<std::string> dist;
  std::optional<std::size_t> reals;
  std::uint64_t seed = 20240101;
  std::optional<double> energy;
  std::optional<double> window;
  std::size_t workers = 1;
  std::string out;
};

/// Every field set.
struct ResolvedConfig {
  std::string experiment;
  unsigned n = 0;
  double c = 0.0;
  double eps = 1.0;
  std::string dist;
  std::size_t reals = 1;
  std::uint64_t seed = 0;
  double energy = 0.0;
  double window = 0.0;
  std::size_t workers = 1;
  std::string out;
};

inline ResolvedConfig resolve(const RunConfig& cfg) {
  struct Defaults {
    unsigned n;
    double c;
    double eps;
    const char* dist;
    std::size_t reals;
    double energy;
    double window;
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Defaults d{};
  const std::string& e = cfg.experiment;
  if (e == "laplacian-exact") d = {6, 1.0, 1.0, "gaussian:0", 1, 0.0, 0.0};
  else if (e == "specdim") d = {0, 1.0, 1.0, "gaussian:0", 1, 0.0, 0.0};
  else if (e == "anderson-stats") d = {6, 1.0, 1.0, "gaussian:1", 20, 0.5, 0.5};
  else if (e == "ultrametric-sweep") d = {6, 1.0, 1.0, "gaussian:0", 20, 0.0, 0.0};
  else if (e == "rp-transition") d = {7, 0.5, 1.0, "gaussian:1", 20, 0.0, 0.0};
  else if (e == "rgflow") d = {4, 1.0, 1.0, "cauchy:0,1", 1, 0.0, 0.0};
  else if (e == "dbm-check") d = {5, 1.0, 1.0, "gaussian:0", 20, 0.0, 0.0};
  else if (e == "spine-check") d = {5, 1.0, 1.0, "gaussian:1", 3, 0.0, 0.0};
  else if (e == "trace-norm-check") d = {6, 2.0, 1.0, "gaussian:0", 50, 0.0, 0.0};
  else if (e == "ipr-profile") d = {6, 0.8, 1.0, "gaussian:0.1", 20, nan, 0.1};
  else if (e == "correlator-profile") d = {6, 1.0, 1.0, "gaussian:1", 20, 0.5, 0.5};
  else throw ConfigError("unknown experiment '" + e + "'");

  ResolvedConfig r;
  r.experiment = e;
  r.n = cfg.n.value_or(d.n);
  r.c = cfg.c.value_or(d.c);
  r.eps = cfg.eps.value_or(d.eps);
  r.dist = cfg.dist.value_or(d.dist);
  r.reals = cfg.reals.value_or(d.reals);
  r.seed = cfg.seed;
  r.energy = cfg.energy.value_or(d.energy);
  r.window = cfg.window.value_or(d.window);
  r.workers = cfg.workers;
  r.out = cfg.out;
  if (r.reals < 1) throw ConfigError("realization count must be >= 1");
  if (r.workers < 1) throw ConfigError("worker count must be >= 1");
  if (!std::isfinite(r.c) || !std::isfinite(r.eps)) throw ConfigError("c and eps must be finite");
  if (!(r.window >= 0.0)) throw ConfigError("window must be >= 0");
  parse_potential(r.dist);
  return r;
}

// ---------------------------------------------------------------- tables

using Cell = std::variant<std::int64_t, double, std::string>;

struct Column {
  std::string name;
  std::string unit;
};

struct ResultTable {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width != schema width");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const ResultTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i].name + " [" + t.columns[i].unit + "]";
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&out](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) out += format_number(v);
            else if constexpr (std::is_same_v<V, std::int64_t>) out += std::to_string(v);
            else out += v;
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json config_echo(const ResolvedConfig& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  j["n"] = r.n;
  j["c"] = r.c;
  j["eps"] = r.eps;
  j["dist"] = r.dist;
  j["reals"] = r.reals;
  j["seed"] = r.seed;
  j["energy"] = std::isfinite(r.energy) ? nlohmann::ordered_json(r.energy) : nlohmann::ordered_json();
  j["window"] = r.window;
  j["workers"] = r.workers;
  return j;
}

// ------------------------------------------------------------- execution

struct RealizationFailure {
  std::size_t index = 0;
  std::string message;
};

/// Runs fn(i, rng_i) for i in [0, count) on `workers` threads. Results are
/// stored by index; numerical failures are recorded and leave an empty slot.
template <class R>
std::vector<std::optional<R>> parallel_realizations(std::size_t count, std::size_t workers, std::uint64_t seed,
                                                    const std::function<R(std::size_t, Engine&)>& fn,
                                                    std::vector<RealizationFailure>& failures) {
  std::vector<std::optional<R>> results(count);
  std::vector<std::optional<std::string>> errors(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        Engine rng = make_stream(seed, i);
        results[i] = fn(i, rng);
      } catch (const NumericalError& e) {
        errors[i] = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next = count;
      }
    }
  };
  const std::size_t threads = std::min(workers, std::max<std::size_t>(count, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);
  for (std::size_t i = 0; i < count; ++i)
    if (errors[i]) failures.push_back({i, *errors[i]});
  return results;
}

struct ExperimentResult {
  ResultTable table;
  ResolvedConfig config;
  std::vector<RealizationFailure> failures;
  std::optional<DensityGrid> density;
  double wall_seconds = 0.0;

  double failure_fraction() const {
    return config.reals == 0 ? 0.0 : static_cast<double>(failures.size()) / static_cast<double>(config.reals);
  }
  /// Above 1% failed realizations the run counts as a numerical failure.
  bool failed() const { return failure_fraction() > 0.01; }
};

namespace presets {

inline LaplacianSpec laplacian_of(const ResolvedConfig& r) {
  LaplacianSpec s;
  s.hierarchy = HierarchySpec(r.n);
  s.eps = r.eps;
  s.c = r.c;
  return s;
}

inline std::vector<double> as_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline void laplacian_exact(const ResolvedConfig& r, ExperimentResult& out) {
  const auto spec = laplacian_of(r);
  validate(spec);
  const Eigen::VectorXd w = eigh(build_laplacian(spec), false).eigenvalues;
  out.table.columns = {{"level", "index"}, {"closed_form_energy", "energy"}, {"multiplicity", "count"},
                       {"max_abs_deviation", "energy"}};
  std::size_t pos = 0;
  double worst_rel = 0.0;
  const auto levels = laplacian_spectrum(spec);
  const double scale = std::max(1.0, levels.back().energy);
  // Sorted closed-form energies line up with the sorted computed spectrum.
  std::vector<LaplacianLevel> sorted = levels;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.energy < b.energy; });
  std::vector<double> deviation(levels.size(), 0.0);
  for (std::size_t l = 0; l < sorted.size(); ++l) {
    for (std::size_t m = 0; m < sorted[l].multiplicity; ++m, ++pos) {
      const double d = std::abs(w(static_cast<Eigen::Index>(pos)) - sorted[l].energy);
      deviation[sorted[l].level] = std::max(deviation[sorted[l].level], d);
    }
  }
  for (const auto& lv : levels) {
    out.table.add_row({static_cast<std::int64_t>(lv.level), lv.energy,
                       static_cast<std::int64_t>(lv.multiplicity), deviation[lv.level]});
    worst_rel = std::max(worst_rel, deviation[lv.level] / scale);
  }
  out.table.metadata["summary"] = {{"max_relative_deviation", worst_rel}, {"passes_1e-9", worst_rel <= 1e-9}};
}

inline void specdim(const ResolvedConfig& r, ExperimentResult& out) {
  const auto spec = laplacian_of(r);
  const auto grid = default_dimension_grid(spec);
  const auto fit = spectral_dimension(spec, grid);
  out.table.columns = {{"lambda", "energy"}, {"band_edge_mass", "dimensionless"}};
  for (std::size_t i = 0; i < grid.size(); ++i) out.table.add_row({grid[i], fit.masses[i]});
  out.table.metadata["summary"] = {{"spectral_dimension", fit.estimate},
                                   {"expected", 2.0 / r.c},
                                   {"fit_residual", fit.residual}};
}

/// Shared gap-ratio preset over one model family.
inline void gap_ratio_preset(const ResolvedConfig& r, ExperimentResult& out, const ModelSpec& model) {
  struct Row {
    double gap_ratio;
    double lo;
    double hi;
  };
  validate(model);
  const auto rows = parallel_realizations<Row>(
      r.reals, r.workers, r.seed,
      [&model](std::size_t, Engine& rng) {
        const auto v = as_vector(eigh(build(model, rng), false).eigenvalues);
        return Row{gap_ratio_mean(std::span<const double>(v)), v.front(), v.back()};
      },
      out.failures);
  out.table.columns = {{"realization", "index"}, {"gap_ratio_mean", "dimensionless"},
                       {"min_eigenvalue", "energy"}, {"max_eigenvalue", "energy"}};
  std::vector<double> g;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) continue;
    out.table.add_row({static_cast<std::int64_t>(i), rows[i]->gap_ratio, rows[i]->lo, rows[i]->hi});
    g.push_back(rows[i]->gap_ratio);
  }
  nlohmann::ordered_json s;
  s["gap_ratio_mean"] = g.empty() ? 0.0 : stats::mean(g);
  s["standard_error"] = g.size() > 1 ? stats::standard_error(g) : 0.0;
  s["poisson_reference"] = kPoissonGapRatio;
  s["goe_reference"] = kGoeGapRatio;
  out.table.metadata["summary"] = s;
}

inline void anderson_stats(const ResolvedConfig& r, ExperimentResult& out) {
  const AndersonModel model{laplacian_of(r), parse_potential(r.dist)};
  validate(ModelSpec{model});
  const EnergyWindow w = EnergyWindow::around(r.energy, r.window);
  struct Row {
    double gap_ratio;
    double mean_ipr;
    std::int64_t in_window;
  };
  const auto rows = parallel_realizations<Row>(
      r.reals, r.workers, r.seed,
      [&](std::size_t, Engine& rng) {
        const auto sd = eigh(build(model, rng));
        const auto v = as_vector(sd.eigenvalues);
        double acc = 0.0;
        std::int64_t count = 0;
        for (std::size_t i = 0; i < sd.dimension(); ++i) {
          if (!w.contains(v[i])) continue;
          acc += ipr(sd.vector(i));
          ++count;
        }
        return Row{gap_ratio_mean(std::span<const double>(v)), count ? acc / static_cast<double>(count) : 0.0,
                   count};
      },
      out.failures);
  out.table.columns = {{"realization", "index"}, {"gap_ratio_mean", "dimensionless"},
                       {"mean_ipr_in_window", "dimensionless"}, {"eigenvalues_in_window", "count"}};
  std::vector<double> g, p;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) continue;
    out.table.add_row({static_cast<std::int64_t>(i), rows[i]->gap_ratio, rows[i]->mean_ipr, rows[i]->in_window});
    g.push_back(rows[i]->gap_ratio);
    if (rows[i]->in_window) p.push_back(rows[i]->mean_ipr);
  }
  out.table.metadata["summary"] = {{"gap_ratio_mean", g.empty() ? 0.0 : stats::mean(g)},
                                   {"mean_ipr_in_window", p.empty() ? 0.0 : stats::mean(p)}};
}

inline void rgflow(const ResolvedConfig& r, ExperimentResult& out) {
  if (r.n < 1) throw ConfigError("rgflow needs n >= 1 steps");
  FlowOptions opt;
  opt.eps = r.eps;
  opt.c = r.c;
  opt.steps = r.n;
  opt.window = EnergyWindow::around(r.energy, r.window);
  const auto rep = flow(discretize(parse_potential(r.dist), opt.transport), opt);
  out.table.columns = {{"step", "index"}, {"shift", "energy"}, {"sup_norm", "1/energy"},
                       {"window_max", "1/energy"}, {"tail_mass", "dimensionless"}};
  for (std::size_t i = 0; i < rep.sup_norms.size(); ++i)
    out.table.add_row({static_cast<std::int64_t>(i + 1), rep.shifts[i], rep.sup_norms[i], rep.window_max[i],
                       rep.tail_mass[i]});
  out.table.metadata["summary"] = {{"growth_exponent", rep.growth_exponent}, {"aborted", rep.aborted}};
  out.density = rep.final_density;
}

inline void dbm_check(const ResolvedConfig& r, ExperimentResult& out) {
  validate(ModelSpec{UltrametricModel{r.n, r.c}});
  struct Row {
    std::vector<double> recursive;
    std::vector<double> direct;
  };
  const auto rows = parallel_realizations<Row>(
      r.reals, r.workers, r.seed,
      [&r](std::size_t, Engine& rng) {
        auto rec = recursive_spectrum(r.n, r.c, rng).eigenvalues;
        auto dir = as_vector(eigh(build_ultrametric(r.n, r.c, rng), false).eigenvalues);
        return Row{std::move(rec), std::move(dir)};
      },
      out.failures);
  const bool ratios = (std::size_t{1} << r.n) >= 12;
  out.table.columns = {{"realization", "index"},           {"recursive_gap_ratio", "dimensionless"},
                       {"direct_gap_ratio", "dimensionless"}, {"recursive_max_eigenvalue", "energy"},
                       {"direct_max_eigenvalue", "energy"}};
  std::vector<double> pooled_rec, pooled_dir, gr, gd;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) continue;
    const auto& row = *rows[i];
    const double a = ratios ? gap_ratio_mean(std::span<const double>(row.recursive)) : 0.0;
    const double b = ratios ? gap_ratio_mean(std::span<const double>(row.direct)) : 0.0;
    out.table.add_row({static_cast<std::int64_t>(i), a, b, row.recursive.back(), row.direct.back()});
    pooled_rec.insert(pooled_rec.end(), row.recursive.begin(), row.recursive.end());
    pooled_dir.insert(pooled_dir.end(), row.direct.begin(), row.direct.end());
    gr.push_back(a);
    gd.push_back(b);
  }
  out.table.metadata["summary"] = {
      {"ks_statistic", pooled_rec.empty() ? 0.0 : stats::ks_two_sample(pooled_rec, pooled_dir)},
      {"recursive_gap_ratio_mean", gr.empty() ? 0.0 : stats::mean(gr)},
      {"direct_gap_ratio_mean", gd.empty() ? 0.0 : stats::mean(gd)}};
}

inline void spine_check(const ResolvedConfig& r, ExperimentResult& out) {
  const auto pot = parse_potential(r.dist);
  const std::vector<std::pair<std::string, ModelSpec>> families{
      {"laplacian", LaplacianModel{laplacian_of(r)}},
      {"anderson", AndersonModel{laplacian_of(r), pot}},
      {"ultrametric", UltrametricModel{r.n, r.c}},
      {"rosenzweig-porter", RosenzweigPorterModel{std::size_t{1} << r.n, r.c, pot}}};
  for (const auto& f : families) validate(f.second);
  struct Row {
    std::vector<double> max_cross;
    std::vector<std::int64_t> rank_excess;
  };
  const std::size_t dim = std::size_t{1} << r.n;
  const auto rows = parallel_realizations<Row>(
      r.reals, r.workers, r.seed,
      [&](std::size_t i, Engine&) {
        Row row;
        for (std::size_t f = 0; f < families.size(); ++f) {
          double worst = 0.0;
          std::int64_t excess = std::numeric_limits<std::int64_t>::min();
          for (std::size_t x = 0; x < dim; ++x) {
            // Same realization for every center.
            Engine rng = make_stream(r.seed, i, 1 + f);
            const auto split = spine_operator(families[f].second, x, rng);
            worst = std::max(worst, max_cross_spine_entry(split.f, split.spine_label));
            std::int64_t bound = 0;
            for (const auto& t : split.center_terms) bound += static_cast<std::int64_t>(numerical_rank(t.block));
            excess = std::max(excess, static_cast<std::int64_t>(numerical_rank(split.s.matrix())) - bound);
          }
          row.max_cross.push_back(worst);
          row.rank_excess.push_back(excess);
        }
        return row;
      },
      out.failures);
  out.table.columns = {{"realization", "index"}, {"family", "label"}, {"max_cross_spine_entry", "energy"},
                       {"max_rank_excess", "count"}};
  double worst = 0.0;
  std::int64_t excess = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) continue;
    for (std::size_t f = 0; f < families.size(); ++f) {
      out.table.add_row({static_cast<std::int64_t>(i), families[f].first, rows[i]->max_cross[f],
                         rows[i]->rank_excess[f]});
      worst = std::max(worst, rows[i]->max_cross[f]);
      excess = std::max(excess, rows[i]->rank_excess[f]);
    }
  }
  out.table.metadata["summary"] = {{"max_cross_spine_entry", worst}, {"max_rank_excess", excess}};
}

inline void trace_norm_check(const ResolvedConfig& r, ExperimentResult& out) {
  const UltrametricModel model{r.n, r.c};
  validate(ModelSpec{model});
  const std::size_t center = 0;
  const auto rows = parallel_realizations<std::vector<double>>(
      r.reals, r.workers, r.seed,
      [&](std::size_t, Engine& rng) {
        std::vector<double> norms(r.n + 1, 0.0);
        for_each_term(ModelSpec{model}, rng, [&](unsigned level, std::size_t offset, const Eigen::MatrixXd& block) {
          if (center >= offset && center < offset + static_cast<std::size_t>(block.rows()))
            norms[level] = trace_norm(block);
        });
        return norms;
      },
      out.failures);
  out.table.columns = {{"level", "index"},        {"block_size", "count"},     {"mean_trace_norm", "energy"},
                       {"standard_error", "energy"}, {"bound", "energy"},      {"within_3_se", "boolean"}};
  bool all = true;
  for (unsigned lv = 1; lv <= r.n; ++lv) {
    std::vector<double> v;
    for (const auto& row : rows)
      if (row) v.push_back((*row)[lv]);
    if (v.size() < 2) throw StatisticsError("trace-norm check needs >= 2 successful realizations");
    const double m = stats::mean(v), se = stats::standard_error(v);
    const double bound = std::exp2(static_cast<double>(lv) * (1.0 - r.c) / 2.0);
    const bool ok = m <= bound + 3.0 * se;
    all = all && ok;
    out.table.add_row({static_cast<std::int64_t>(lv), static_cast<std::int64_t>(std::size_t{1} << lv), m, se,
                       bound, static_cast<std::int64_t>(ok)});
  }
  out.table.metadata["summary"] = {{"all_levels_within_3_se", all}};
}

inline void ipr_profile(const ResolvedConfig& r, ExperimentResult& out) {
  const AndersonModel model{laplacian_of(r), parse_potential(r.dist)};
  validate(ModelSpec{model});
  const double energy = std::isfinite(r.energy) ? r.energy : model.laplacian.total_coupling();
  const double bw = r.window;
  if (!(bw > 0.0)) throw ConfigError("ipr-profile needs window (kernel bandwidth) > 0");
  const auto rows = parallel_realizations<std::pair<double, double>>(
      r.reals, r.workers, r.seed,
      [&](std::size_t, Engine& rng) {
        const std::vector<SpectralData> one{eigh(build(model, rng))};
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < one[0].dimension(); ++i) {
          const double k = triangular_kernel(energy - one[0].eigenvalues(static_cast<Eigen::Index>(i)), bw);
          if (k == 0.0) continue;
          num += k * ipr(one[0].vector(i));
          den += k;
        }
        return std::pair{num, den};
      },
      out.failures);
  out.table.columns = {{"realization", "index"}, {"kernel_weighted_ipr", "1/energy"},
                       {"kernel_weight", "1/energy"}};
  IprAverage avg;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) continue;
    out.table.add_row({static_cast<std::int64_t>(i), rows[i]->first, rows[i]->second});
    avg.numerator.push_back(rows[i]->first);
    avg.denominator.push_back(rows[i]->second);
    num += rows[i]->first;
    den += rows[i]->second;
  }
  nlohmann::ordered_json s;
  s["energy"] = energy;
  s["bandwidth"] = bw;
  if (den > 0.0) {
    avg.value = num / den;
    const auto ci = ipr_average_ci(avg, r.seed);
    s["ipr_average"] = avg.value;
    s["ci95"] = {ci.lo, ci.hi};
  } else {
    s["ipr_average"] = nullptr;
  }
  out.table.metadata["summary"] = s;
}

inline void correlator_profile_preset(const ResolvedConfig& r, ExperimentResult& out) {
  const AndersonModel model{laplacian_of(r), parse_potential(r.dist)};
  validate(ModelSpec{model});
  const auto rows = parallel_realizations<SpectralData>(
      r.reals, r.workers, r.seed, [&](std::size_t, Engine& rng) { return eigh(build(model, rng)); },
      out.failures);
  std::vector<SpectralData> reals;
  for (const auto& row : rows)
    if (row) reals.push_back(*row);
  const auto prof = correlator_profile(reals, EnergyWindow::around(r.energy, r.window), 0,
                                       model.laplacian.hierarchy, r.seed);
  out.table.columns = {{"distance", "level"}, {"mean_correlator", "dimensionless"}};
  for (std::size_t d = 0; d < prof.means.size(); ++d)
    out.table.add_row({static_cast<std::int64_t>(d), prof.means[d]});
  out.table.metadata["summary"] = {{"fitted_rate", prof.fitted_rate},
                                   {"rate_ci95", {prof.rate_ci.lo, prof.rate_ci.hi}},
                                   {"fit_residual", prof.fit_residual}};
}

}  // namespace presets

/// Runs one preset; throws ConfigError for bad configurations. Per-realization
/// numerical failures are collected in the result.
inline ExperimentResult run_experiment(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.config = resolve(cfg);
  const auto& r = out.config;
  const auto& e = r.experiment;
  if (e == "laplacian-exact") presets::laplacian_exact(r, out);
  else if (e == "specdim") presets::specdim(r, out);
  else if (e == "anderson-stats") presets::anderson_stats(r, out);
  else if (e == "ultrametric-sweep") presets::gap_ratio_preset(r, out, UltrametricModel{r.n, r.c});
  else if (e == "rp-transition")
    presets::gap_ratio_preset(r, out, RosenzweigPorterModel{std::size_t{1} << r.n, r.c, parse_potential(r.dist)});
  else if (e == "rgflow") presets::rgflow(r, out);
  else if (e == "dbm-check") presets::dbm_check(r, out);
  else if (e == "spine-check") presets::spine_check(r, out);
  else if (e == "trace-norm-check") presets::trace_norm_check(r, out);
  else if (e == "ipr-profile") presets::ipr_profile(r, out);
  else if (e == "correlator-profile") presets::correlator_profile_preset(r, out);

  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto& meta = out.table.metadata;
  nlohmann::ordered_json full;
  full["version"] = kVersion;
  full["seed"] = r.seed;
  full["config"] = config_echo(r);
  nlohmann::ordered_json schema = nlohmann::ordered_json::array();
  for (const auto& col : out.table.columns) schema.push_back({{"name", col.name}, {"unit", col.unit}});
  full["columns"] = schema;
  full["rows"] = out.table.rows.size();
  full["failures"] = out.failures.size();
  nlohmann::ordered_json fl = nlohmann::ordered_json::array();
  for (const auto& f : out.failures) fl.push_back({{"realization", f.index}, {"error", f.message}});
  full["failed_realizations"] = fl;
  full["wall_seconds"] = out.wall_seconds;
  full["summary"] = meta.contains("summary") ? meta["summary"] : nlohmann::ordered_json::object();
  meta = std::move(full);
  return out;
}

/// Writes PATH (CSV), PATH.json (metadata) and, for rgflow, PATH.density.
inline void write_outputs(const ExperimentResult& res, const std::string& path) {
  auto open = [](const std::string& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + p);
    return os;
  };
  {
    auto os = open(path);
    os << to_csv(res.table);
  }
  {
    auto os = open(path + ".json");
    os << res.table.metadata.dump(2) << '\n';
  }
  if (res.density) {
    auto os = open(path + ".density");
    write_density(os, *res.density);
  }
}

/// Fields from a JSON object; unknown keys are rejected.
inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  RunConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment") cfg.experiment = v.get<std::string>();
      else if (key == "n") cfg.n = v.get<unsigned>();
      else if (key == "c") cfg.c = v.get<double>();
      else if (key == "eps") cfg.eps = v.get<double>();
      else if (key == "dist") cfg.dist = v.get<std::string>();
      else if (key == "reals") cfg.reals = v.get<std::size_t>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "energy") cfg.energy = v.get<double>();
      else if (key == "window") cfg.window = v.get<double>();
      else if (key == "workers") cfg.workers = v.get<std::size_t>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

}  // namespace hierops
