#pragma once

// Mutable planning state shared by the static list heuristics and the
// rolling-horizon engine. Not part of the C API.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wfsched/schedule.hpp"

namespace wfsched {

enum class Phase { Free, Decided, Running, Completed };

struct TaskPlan {
  ExecContext ctx;
  bool backup = false;
  double start = 0.0;
  double finish = 0.0;
  Phase phase = Phase::Free;
};

class PlanningState {
 public:
  /// All tasks Free on the fastest context, released at A_w.
  PlanningState(const Workflow& w, const Platform& p);

  const Workflow& workflow() const { return *w_; }
  const Platform& platform() const { return *p_; }

  TaskPlan& operator[](std::size_t t) { return plans_[t]; }
  const TaskPlan& operator[](std::size_t t) const { return plans_[t]; }
  std::size_t size() const { return plans_.size(); }

  /// Earliest start for tasks that are not yet running.
  double release() const { return release_; }
  void set_release(double r) { release_ = r; }

  /// Forward pass: St = max(release, preds' Ft), Ft = St + tau(ctx) for
  /// Free/Decided tasks; Running tasks finish at St + worst-case tau;
  /// Completed tasks are left as recorded. Backward pass: LFT from D_w,
  /// where a Decided successor pins LST to its start and a Free successor
  /// contributes LFT - tau(current ctx).
  void refresh();

  double lft(std::size_t t) const { return lft_[t]; }

  double task_energy(std::size_t t) const;       // effective, doubled with backup
  double task_log_reliability(std::size_t t) const;  // 0 for Completed tasks
  double single_log_reliability(std::size_t t, ExecContext c) const;
  double replicated_log_reliability(std::size_t t, ExecContext c) const;

  double log_reliability() const;
  double planned_energy() const;
  double latest_finish() const;
  bool meets_reliability(double log_reliability) const;

  /// Best-context bounds of the residual problem (Free tasks only; others fixed).
  TimeBounds residual_bounds() const;

  Schedule to_schedule() const;

 private:
  const Workflow* w_;
  const Platform* p_;
  std::vector<TaskPlan> plans_;
  std::vector<double> lft_;
  double release_;
};

enum class BackupChoice { NoBackup, BackupSelf, BackupPrev };

struct RetOption {
  BackupChoice choice = BackupChoice::NoBackup;
  bool keep_current = false;
  ExecContext ctx;
  std::optional<std::size_t> prev;  // replicated earlier task for BackupPrev
  double energy = 0.0;              // effective energy per the option
  double log_reliability = 0.0;     // workflow log-reliability if chosen
};

/// H: already-scheduled tasks without a backup, ascending by (wc, id).
class ReplicationLedger {
 public:
  explicit ReplicationLedger(const Workflow& w) : w_(&w) {}
  void insert(std::size_t task);
  void remove(std::size_t task);
  bool contains(std::size_t task) const;
  std::span<const std::size_t> members() const { return h_; }

 private:
  const Workflow* w_;
  std::vector<std::size_t> h_;
};

struct RetDecision {
  RetOption chosen;
  std::vector<RetOption> options;  // the option list O
};

/// One reliability/energy-ensured replication step for task `t`. `need` is
/// its MIN-CPF; nullopt means no window, leaving only keep-current.
RetDecision ret_schedule_task(PlanningState& state, ReplicationLedger& ledger, std::size_t t,
                              std::optional<double> need);

enum class ListOrder { LargestEnergyFirst, LevelDeadline };

/// Runs LEF or LDD over every Free task of the state, leaving them Decided.
/// Returns one Decision per processed task.
std::vector<Decision> run_list_heuristic(PlanningState& state, ListOrder order);

/// Replicates unreplicated non-completed tasks in ascending effective
/// energy until R(W) >= R_w. Returns false if that is not enough.
bool replicate_until_reliable(PlanningState& state);

}  // namespace wfsched
