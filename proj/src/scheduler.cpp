#include "wfsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wfsched {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Bcp: return "bcp";
    case Algorithm::Lef: return "lef";
    case Algorithm::Ldd: return "ldd";
    case Algorithm::Asmfr: return "asmfr";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "bcp") return Algorithm::Bcp;
  if (name == "lef") return Algorithm::Lef;
  if (name == "ldd") return Algorithm::Ldd;
  if (name == "asmfr") return Algorithm::Asmfr;
  return std::nullopt;
}

namespace {

// BCP placement plus the replication pre-pass. Returns an empty reason when
// the workflow is accepted.
std::string prepare_bcp(PlanningState& state) {
  const Workflow& w = state.workflow();
  state.refresh();
  if (state.latest_finish() > w.deadline() + kTolerance) return "deadline infeasible";
  if (!replicate_until_reliable(state)) return "reliability infeasible";
  return {};
}

Schedule finish(const PlanningState& state, Algorithm requested, Algorithm resolved, double threshold,
                std::string reason, std::vector<Decision> decisions = {}) {
  Schedule s = state.to_schedule();
  s.algorithm = requested;
  s.resolved = resolved;
  s.threshold = threshold;
  if (!reason.empty()) {
    s.feasible = false;
    s.reason = std::move(reason);
  } else if (!s.feasible) {
    s.reason = "constraint violated after scheduling";
  }
  s.decisions = std::move(decisions);
  return s;
}

Schedule run_list(const Workflow& w, const Platform& p, ListOrder order, Algorithm requested,
                  Algorithm resolved, double threshold) {
  PlanningState state(w, p);
  std::string reason = prepare_bcp(state);
  if (!reason.empty()) return finish(state, requested, resolved, threshold, std::move(reason));
  auto decisions = run_list_heuristic(state, order);
  return finish(state, requested, resolved, threshold, {}, std::move(decisions));
}

}  // namespace

Schedule bcp_schedule(const Workflow& w, const Platform& p) {
  PlanningState state(w, p);
  std::string reason = prepare_bcp(state);
  return finish(state, Algorithm::Bcp, Algorithm::Bcp, kDefaultThreshold, std::move(reason));
}

double min_cpf(double wc, double start, double bound) {
  if (!(bound > start)) throw InfeasibleWindow("no time window: bound <= start");
  return wc / (bound - start);
}

std::optional<ExecContext> select_context(const Platform& p, double need) {
  std::optional<ExecContext> best;
  double best_epm = std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < p.size(); ++l) {
    const VmType& vm = p.vm(l);
    const double f_cri = critical_frequency(vm);
    // Smallest level with CP * f >= need; every level above it also qualifies.
    auto first = std::lower_bound(vm.freqs.begin(), vm.freqs.end(), need,
                                  [&vm](double f, double n) { return vm.cp * f < n; });
    for (auto it = first; it != vm.freqs.end(); ++it) {
      const double epm = energy_per_mi(vm, *it);
      const double dist = std::abs(*it - f_cri);
      const bool better = epm < best_epm - kTolerance ||
                          (std::abs(epm - best_epm) <= kTolerance && dist < best_dist - kTolerance);
      if (better) {
        best = ExecContext{l, static_cast<std::size_t>(it - vm.freqs.begin())};
        best_epm = epm;
        best_dist = dist;
      }
    }
  }
  return best;
}

double updated_reliability(double current, double old_eff, double new_eff) {
  return std::exp(std::log(current) - std::log(old_eff) + std::log(new_eff));
}

double effective_energy(BackupChoice choice, double task_energy, std::optional<double> prev_energy) {
  switch (choice) {
    case BackupChoice::NoBackup: return task_energy;
    case BackupChoice::BackupSelf: return 2.0 * task_energy;
    case BackupChoice::BackupPrev:
      if (!prev_energy) throw NoReplicationCandidate("BackupPrev needs a replication candidate");
      return task_energy + *prev_energy;
  }
  return task_energy;
}

Schedule lef_schedule(const Workflow& w, const Platform& p) {
  return run_list(w, p, ListOrder::LargestEnergyFirst, Algorithm::Lef, Algorithm::Lef, kDefaultThreshold);
}

Schedule ldd_schedule(const Workflow& w, const Platform& p) {
  return run_list(w, p, ListOrder::LevelDeadline, Algorithm::Ldd, Algorithm::Ldd, kDefaultThreshold);
}

std::vector<double> level_deadlines(const Workflow& w, const LevelInfo& info, const TimeBounds& bounds,
                                    std::optional<double> release) {
  const double start = release.value_or(w.arrival());
  const double horizon = w.deadline() - start;
  std::vector<double> per_level(info.level_work.size());
  double acc = start;
  for (std::size_t l = 0; l < per_level.size(); ++l) {
    acc += horizon * info.level_work[l] / info.total_work;
    per_level[l] = acc;
  }
  std::vector<double> delta(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) {
    const int lvl = info.level[t];
    if (lvl <= 0) {
      delta[t] = bounds.lft[t];
      continue;
    }
    delta[t] = std::clamp(per_level[lvl - 1], bounds.eft[t], std::max(bounds.eft[t], bounds.lft[t]));
  }
  return delta;
}

Algorithm asmfr_select(const Workflow& w, double threshold) {
  if (w.size() < 2) return Algorithm::Lef;
  return max_fanout_ratio(w) < threshold ? Algorithm::Lef : Algorithm::Ldd;
}

Schedule schedule_workflow(const Workflow& w, const Platform& p, Algorithm algo, double threshold) {
  switch (algo) {
    case Algorithm::Bcp: {
      Schedule s = bcp_schedule(w, p);
      s.threshold = threshold;
      return s;
    }
    case Algorithm::Lef:
      return run_list(w, p, ListOrder::LargestEnergyFirst, algo, Algorithm::Lef, threshold);
    case Algorithm::Ldd:
      return run_list(w, p, ListOrder::LevelDeadline, algo, Algorithm::Ldd, threshold);
    case Algorithm::Asmfr: {
      const Algorithm pick = asmfr_select(w, threshold);
      const ListOrder order = pick == Algorithm::Lef ? ListOrder::LargestEnergyFirst : ListOrder::LevelDeadline;
      return run_list(w, p, order, algo, pick, threshold);
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace wfsched
