#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfsched/dynamic.hpp"

namespace wfsched {

// ---- generators ------------------------------------------------------------

struct PlatformGenSpec {
  std::size_t min_types = 5, max_types = 15;
  std::size_t min_levels = 4, max_levels = 6;
  double cp_lo = 0.9, cp_hi = 210.0;
  double ghz_lo = 0.12, ghz_hi = 5.5;  // normalized per VM type by its top frequency
  double psi_lo = 3.0, psi_hi = 7.0;
  double r0_lo = 1e-6, r0_hi = 1e-4;   // drawn log-uniformly
  double alpha_lo = 10.0, alpha_hi = 60.0;
  double beta_lo = 50.0, beta_hi = 200.0;
};

Platform generate_platform(std::uint64_t seed, const PlatformGenSpec& spec = {});

struct LayeredSpec {
  std::string name = "layered";
  std::size_t tasks = 50;
  std::size_t layers = 6;
  /// Extra edges: each task in layer k gets, besides one mandatory parent,
  /// every other task of layer k-1 as a parent with this probability.
  double edge_probability = 0.2;
  std::size_t max_fanout = 12;
  double wc_lo = 100.0, wc_hi = 2000.0;
  double deadline_factor = 1.5;
  double reliability = 0.95;
};

/// Layered DAG; the first layer holds a single entry task.
Workflow generate_layered(std::uint64_t seed, const LayeredSpec& spec, const Platform& p);

struct Instance {
  Workflow workflow;
  Platform platform;
};

/// Oracle-sized instance: N in [2, max_tasks], L in [1, 3], S in [2, 3].
Instance generate_small_instance(std::uint64_t seed, double df, double reliability, std::size_t max_tasks = 6);

// ---- sweeps -----------------------------------------------------------------

enum class SweepParam { DeadlineFactor, Reliability, TaskCount, Threshold };

std::string_view to_string(SweepParam p);
std::optional<SweepParam> parse_sweep_param(std::string_view name);

/// Algorithms accepted in a sweep: bcp, lef, ldd, asmfr, dy. "dy" runs the
/// rolling-horizon engine on top of the ASMFR schedule.
struct SweepSpec {
  std::vector<Workflow> workflows;  // ignored for TaskCount sweeps
  Platform platform;
  std::vector<std::string> algorithms{"bcp", "lef", "ldd", "asmfr", "dy"};
  SweepParam param = SweepParam::DeadlineFactor;
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds{1};
  std::size_t trials = 0;  // Monte-Carlo trials per row, 0 = analytic only
  double fraction = 0.75;
  double threshold = kDefaultThreshold;
  std::optional<double> deadline_factor;  // applied when df is not the swept parameter
  std::optional<double> reliability;      // likewise for R_w
  LayeredSpec generator;                  // TaskCount sweeps
  std::size_t workers = 0;                // 0 = hardware concurrency
  bool timing = false;                    // fill wall_time_ms; off keeps output byte-stable
};

void validate(const SweepSpec& spec);

struct ReportRow {
  std::string workflow;
  std::string algorithm;
  std::uint64_t seed = 0;
  double df = 0.0;
  double rw = 0.0;
  std::size_t n = 0;
  double planned_energy = 0.0;
  double realized_energy = 0.0;
  double makespan = 0.0;
  double planned_reliability = 0.0;
  double achieved_reliability = 0.0;
  bool feasible = false;
  double wall_time_ms = 0.0;

  // Not written to the CSV; used for ordering and aggregation.
  std::size_t point = 0;
  double value = 0.0;
};

/// Rows sorted by (workflow, grid point, algorithm position, seed).
std::vector<ReportRow> run_sweep(const SweepSpec& spec);

/// One row per task run. `seed` is the row's RNG seed.
ReportRow make_row(const Workflow& w, const Platform& p, std::string_view algorithm, std::uint64_t seed,
                   std::size_t trials, double fraction, double threshold, bool timing);

std::string csv_header();
std::string csv_field(std::string_view s);
std::string format_fixed(double v);
std::string rows_to_csv(const std::vector<ReportRow>& rows);

/// Mean and min of the energy and reliability columns over feasible rows,
/// grouped by (workflow, grid point, algorithm).
std::string aggregate_csv(const std::vector<ReportRow>& rows, SweepParam param);

/// D_w - A_w divided by the critical-path time on the fastest context.
double effective_deadline_factor(const Workflow& w, const Platform& p);

}  // namespace wfsched
