#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wfsched/rng.hpp"
#include "wfsched/scheduler.hpp"

namespace wfsched {

enum class Rescheduler { None, Lef, Ldd, AsSelected };

struct SimConfig {
  std::uint64_t seed = 1;
  double sample_mean_fraction = 0.75;
  std::size_t trials = 0;  // Monte-Carlo trials; 0 disables the estimate
  bool failure_injection = false;
  Rescheduler reschedule = Rescheduler::AsSelected;
  double threshold = kDefaultThreshold;
  /// Zero-variance mode: every task runs exactly its worst-case time.
  bool worst_case = false;
  /// Optional per-task actual/worst-case ratio in (0, 1]; overrides sampling.
  std::vector<double> actual_fraction;
};

void validate(const SimConfig& cfg);

/// X ~ Exponential(mean = fraction * tau_worst), returned as min(X, tau_worst).
double sample_actual_time(double wc, const Platform& p, ExecContext c, double mean_fraction, RngStream& rng);

struct RollingHorizon {
  std::set<std::size_t> ready;                 // dispatched, running
  std::map<std::size_t, double> completed;     // task -> actual finish
  std::set<std::size_t> pending;               // not yet dispatched
};

/// Pending tasks whose predecessors have all completed, ascending by index.
std::vector<std::size_t> advance_ready(const RollingHorizon& h, const Workflow& w);

enum class EventKind { Dispatch, Complete, Reschedule, Failure };

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Dispatch;
  std::optional<std::size_t> task;
  ExecContext ctx;
  bool backup = false;
  double energy = 0.0;          // realized energy (Complete) or planned residual energy (Reschedule)
  bool accepted = false;        // Reschedule only
  double reliability = 1.0;     // Reschedule: residual plan reliability, completed tasks as 1
};

struct SimTrace {
  std::vector<SimEvent> events;
  std::vector<ScheduleEntry> executed;  // actual start/finish per task
  Schedule dispatched;                  // contexts as dispatched, worst-case timing
  double realized_energy = 0.0;
  double static_energy = 0.0;           // planned energy of the initial schedule
  double makespan = 0.0;
  bool deadline_met = false;
  bool success = true;
  std::size_t reschedules = 0;
  std::size_t accepted_reschedules = 0;
};

/// Rolling-horizon execution of `initial` with stochastic actual times.
/// Completed tasks count as reliability 1 for the residual plan; running
/// tasks are never touched. A residual plan is adopted only if it meets
/// D_w and R_w and no pending task's effective energy increases.
SimTrace run_dynamic(const Workflow& w, const Platform& p, const Schedule& initial, const SimConfig& cfg);

std::string trace_to_jsonl(const Workflow& w, const Platform& p, const SimTrace& trace);

/// Constraint check of an executed trace: precedence, arrival and deadline
/// on actual times, actual duration within the worst case, every task run
/// exactly once on a valid context (the dispatched one). Reliability is
/// checked the way the engine enforces it: every residual plan met R_w.
ConstraintReport check_execution(const Workflow& w, const Platform& p, const Schedule& initial,
                                 const SimTrace& trace);

struct ReliabilityEstimate {
  double estimate = 0.0;
  double lower = 0.0;  // Wilson 95%
  double upper = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
};

/// Wilson score interval for `successes` out of `n` at z standard deviations.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z);

/// Independent failures per executed copy with probability 1 - exp(-r * tau);
/// a task survives if any copy does, the workflow if every task does.
ReliabilityEstimate run_monte_carlo(const Workflow& w, const Platform& p, const Schedule& s, const SimConfig& cfg);

}  // namespace wfsched
