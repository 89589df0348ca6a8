#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wfsched/platform.hpp"
#include "wfsched/workflow.hpp"

namespace wfsched {

enum class Algorithm { Bcp, Lef, Ldd, Asmfr };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Absolute tolerance used for every energy / reliability / time comparison.
inline constexpr double kTolerance = 1e-9;

inline bool meets_reliability(double reliability, double required) {
  return reliability >= required - kTolerance;
}

struct ScheduleEntry {
  std::size_t task = 0;
  ExecContext ctx;
  double start = 0.0;
  double finish = 0.0;
  bool backup = false;  // same-frequency replica on a second instance, same start/finish
};

/// Per-task record of a list-heuristic decision (diagnostics and tests).
struct Decision {
  std::size_t task = 0;
  double start = 0.0;
  double bound = 0.0;  // LFT for LEF, level deadline for LDD
  std::optional<double> need;
  bool changed = false;
};

struct Schedule {
  std::vector<ScheduleEntry> entries;  // one per task, indexed by task
  double total_energy = 0.0;
  double reliability = 1.0;
  double makespan = 0.0;
  bool feasible = false;
  Algorithm algorithm = Algorithm::Bcp;  // as requested
  Algorithm resolved = Algorithm::Bcp;   // LEF/LDD after ASMFR dispatch
  double threshold = 0.75;
  std::string reason;  // why the workflow was rejected, if it was
  std::vector<Decision> decisions;
};

double effective_task_energy(const Workflow& w, const Platform& p, const ScheduleEntry& e);
double effective_task_log_reliability(const Workflow& w, const Platform& p, const ScheduleEntry& e);

/// Recomputes total_energy, reliability and makespan from the entries.
void recompute_totals(const Workflow& w, const Platform& p, Schedule& s);

std::string schedule_to_json(const Workflow& w, const Platform& p, const Schedule& s);

}  // namespace wfsched
