#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfsched/planning.hpp"
#include "wfsched/schedule.hpp"

namespace wfsched {

inline constexpr double kDefaultThreshold = 0.75;

class InfeasibleWindow : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Every task on the best VM at f_max, starting at EST. Rejects on deadline;
/// otherwise replicates in ascending energy order until R(W) >= R_w.
Schedule bcp_schedule(const Workflow& w, const Platform& p);

/// wc / (bound - start); throws InfeasibleWindow when bound <= start.
double min_cpf(double wc, double start, double bound);

/// Over all (VM, level) pairs with CP * f >= need, the one with the least
/// energy per MI; ties go to the level closest to the VM's critical
/// frequency, then to the lower VM index. nullopt if nothing is fast enough.
std::optional<ExecContext> select_context(const Platform& p, double need);

/// (current / old_eff) * new_eff, evaluated in log-space.
double updated_reliability(double current, double old_eff, double new_eff);

class NoReplicationCandidate : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Energy charged for a RET option: doubled for BackupSelf, plus the
/// replica of the previous task for BackupPrev (`prev_energy` required).
double effective_energy(BackupChoice choice, double task_energy, std::optional<double> prev_energy = {});

Schedule lef_schedule(const Workflow& w, const Platform& p);
Schedule ldd_schedule(const Workflow& w, const Platform& p);

/// delta(level) = delta(level - 1) + (D_w - release) * sigma(level) / sigma(W)
/// with delta(0) = release (A_w by default), clamped per task to
/// [EFT, LFT]. Tasks with level 0 in `info` get their LFT.
std::vector<double> level_deadlines(const Workflow& w, const LevelInfo& info, const TimeBounds& bounds,
                                    std::optional<double> release = {});

/// MFR < th -> LEF, else LDD; single-task workflows always get LEF.
Algorithm asmfr_select(const Workflow& w, double threshold);

Schedule schedule_workflow(const Workflow& w, const Platform& p, Algorithm algo,
                           double threshold = kDefaultThreshold);

// ---- independent constraint checker ---------------------------------------

struct ConstraintResult {
  std::string name;
  bool pass = true;
  std::vector<std::string> violating;  // task ids
};

struct ConstraintReport {
  std::vector<ConstraintResult> results;
  bool all_pass() const;
  const ConstraintResult* find(std::string_view name) const;
};

/// Checks reliability, precedence, duration, deadline, arrival, exactly-once
/// assignment and decision-variable domain from the entries alone.
ConstraintReport check_constraints(const Workflow& w, const Platform& p, const Schedule& s);

std::string report_to_json(const ConstraintReport& r);

}  // namespace wfsched
