#include "wfsched/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wfsched/scheduler.hpp"

namespace wfsched {

PlanningState::PlanningState(const Workflow& w, const Platform& p)
    : w_(&w), p_(&p), plans_(w.size()), lft_(w.size(), w.deadline()), release_(w.arrival()) {
  for (auto& plan : plans_) plan.ctx = p.fastest();
  refresh();
}

void PlanningState::refresh() {
  const Workflow& w = *w_;
  for (std::size_t t : w.topo_order()) {
    TaskPlan& plan = plans_[t];
    const double tau = execution_time(w.task(t).wc, *p_, plan.ctx);
    switch (plan.phase) {
      case Phase::Completed:
        break;
      case Phase::Running:
        plan.finish = plan.start + tau;
        break;
      case Phase::Free:
      case Phase::Decided: {
        double st = release_;
        for (std::size_t q : w.task(t).preds) st = std::max(st, plans_[q].finish);
        plan.start = st;
        plan.finish = st + tau;
        break;
      }
    }
  }
  const auto topo = w.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const std::size_t t = *it;
    double lft = w.deadline();
    for (std::size_t s : w.task(t).succs) {
      const TaskPlan& succ = plans_[s];
      double lst = 0.0;
      if (succ.phase == Phase::Free) {
        lst = lft_[s] - execution_time(w.task(s).wc, *p_, succ.ctx);
      } else {
        lst = succ.start;
      }
      lft = std::min(lft, lst);
    }
    lft_[t] = lft;
  }
}

double PlanningState::task_energy(std::size_t t) const {
  const TaskPlan& plan = plans_[t];
  const double e = wfsched::task_energy(w_->task(t).wc, *p_, plan.ctx);
  return plan.backup ? 2.0 * e : e;
}

double PlanningState::single_log_reliability(std::size_t t, ExecContext c) const {
  return wfsched::task_log_reliability(w_->task(t).wc, *p_, c, false);
}

double PlanningState::replicated_log_reliability(std::size_t t, ExecContext c) const {
  return wfsched::task_log_reliability(w_->task(t).wc, *p_, c, true);
}

double PlanningState::task_log_reliability(std::size_t t) const {
  const TaskPlan& plan = plans_[t];
  if (plan.phase == Phase::Completed) return 0.0;
  return wfsched::task_log_reliability(w_->task(t).wc, *p_, plan.ctx, plan.backup);
}

double PlanningState::log_reliability() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < plans_.size(); ++t) sum += task_log_reliability(t);
  return sum;
}

double PlanningState::planned_energy() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < plans_.size(); ++t) sum += task_energy(t);
  return sum;
}

double PlanningState::latest_finish() const {
  double latest = w_->arrival();
  for (const auto& plan : plans_) latest = std::max(latest, plan.finish);
  return latest;
}

bool PlanningState::meets_reliability(double log_rel) const {
  return wfsched::meets_reliability(std::exp(log_rel), w_->reliability_req());
}

TimeBounds PlanningState::residual_bounds() const {
  const ExecContext best = p_->fastest();
  std::vector<double> duration(plans_.size());
  std::vector<std::optional<double>> fixed(plans_.size());
  for (std::size_t t = 0; t < plans_.size(); ++t) {
    if (plans_[t].phase == Phase::Free) {
      duration[t] = execution_time(w_->task(t).wc, *p_, best);
    } else {
      duration[t] = plans_[t].finish - plans_[t].start;
      fixed[t] = plans_[t].finish;
    }
  }
  return propagate_bounds(*w_, duration, fixed, release_);
}

Schedule PlanningState::to_schedule() const {
  Schedule s;
  s.entries.reserve(plans_.size());
  for (std::size_t t = 0; t < plans_.size(); ++t) {
    const TaskPlan& plan = plans_[t];
    s.entries.push_back({t, plan.ctx, plan.start, plan.finish, plan.backup});
  }
  recompute_totals(*w_, *p_, s);
  s.feasible = s.entries.empty() ||
               (latest_finish() <= w_->deadline() + kTolerance && wfsched::meets_reliability(s.reliability, w_->reliability_req()));
  return s;
}

// ---- replication ledger ----------------------------------------------------

void ReplicationLedger::insert(std::size_t task) {
  if (contains(task)) return;
  const Workflow& w = *w_;
  auto before = [&w](std::size_t a, std::size_t b) {
    const double wa = w.task(a).wc, wb = w.task(b).wc;
    if (wa != wb) return wa < wb;
    return w.task(a).id < w.task(b).id;
  };
  h_.insert(std::upper_bound(h_.begin(), h_.end(), task, before), task);
}

void ReplicationLedger::remove(std::size_t task) { std::erase(h_, task); }

bool ReplicationLedger::contains(std::size_t task) const {
  return std::find(h_.begin(), h_.end(), task) != h_.end();
}

// ---- RET -------------------------------------------------------------------

RetDecision ret_schedule_task(PlanningState& state, ReplicationLedger& ledger, std::size_t t,
                              std::optional<double> need) {
  const Workflow& w = state.workflow();
  const Platform& p = state.platform();
  const double wc = w.task(t).wc;
  TaskPlan& plan = state[t];

  const double log_r = state.log_reliability();
  const double old_eff = state.task_log_reliability(t);

  RetDecision d;
  RetOption keep;
  keep.keep_current = true;
  keep.ctx = plan.ctx;
  keep.choice = plan.backup ? BackupChoice::BackupSelf : BackupChoice::NoBackup;
  keep.energy = state.task_energy(t);
  keep.log_reliability = log_r;
  d.options.push_back(keep);

  std::optional<ExecContext> ctx;
  if (need) ctx = select_context(p, *need);
  if (ctx) {
    const double e_new = wfsched::task_energy(wc, p, *ctx);
    const double single = state.single_log_reliability(t, *ctx);
    const double log_nb = log_r - old_eff + single;
    if (state.meets_reliability(log_nb)) {
      d.options.push_back({BackupChoice::NoBackup, false, *ctx, std::nullopt,
                           effective_energy(BackupChoice::NoBackup, e_new), log_nb});
    } else {
      const double log_bs = log_r - old_eff + state.replicated_log_reliability(t, *ctx);
      if (state.meets_reliability(log_bs)) {
        d.options.push_back({BackupChoice::BackupSelf, false, *ctx, std::nullopt,
                             effective_energy(BackupChoice::BackupSelf, e_new), log_bs});
      }
      for (std::size_t prev : ledger.members()) {
        if (prev == t || state[prev].backup) continue;
        const ExecContext pc = state[prev].ctx;
        const double log_bp =
            log_nb - state.single_log_reliability(prev, pc) + state.replicated_log_reliability(prev, pc);
        if (!state.meets_reliability(log_bp)) continue;
        const double e_prev = wfsched::task_energy(w.task(prev).wc, p, pc);
        d.options.push_back({BackupChoice::BackupPrev, false, *ctx, prev,
                             effective_energy(BackupChoice::BackupPrev, e_new, e_prev), log_bp});
      }
    }
  }

  // Options are evaluated in list order; a later option must be cheaper by
  // more than the tolerance to displace an earlier one.
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.options.size(); ++i) {
    if (d.options[i].energy < d.options[best].energy - kTolerance) best = i;
  }
  d.chosen = d.options[best];

  const RetOption& c = d.chosen;
  if (c.keep_current) {
    if (!plan.backup) ledger.insert(t);
  } else {
    plan.ctx = c.ctx;
    switch (c.choice) {
      case BackupChoice::NoBackup:
        plan.backup = false;
        ledger.insert(t);
        break;
      case BackupChoice::BackupSelf:
        plan.backup = true;
        ledger.remove(t);
        break;
      case BackupChoice::BackupPrev:
        plan.backup = false;
        state[*c.prev].backup = true;
        ledger.remove(*c.prev);
        ledger.insert(t);
        break;
    }
  }
  state.refresh();
  return d;
}

bool replicate_until_reliable(PlanningState& state) {
  const Workflow& w = state.workflow();
  double log_r = state.log_reliability();
  if (state.meets_reliability(log_r)) return true;

  std::vector<std::size_t> candidates;
  for (std::size_t t = 0; t < state.size(); ++t) {
    const Phase ph = state[t].phase;
    if ((ph == Phase::Free || ph == Phase::Decided) && !state[t].backup) candidates.push_back(t);
  }
  std::vector<double> energy(state.size());
  for (std::size_t t : candidates) energy[t] = state.task_energy(t);
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (energy[a] != energy[b]) return energy[a] < energy[b];
    return w.task(a).id < w.task(b).id;
  });
  for (std::size_t t : candidates) {
    log_r += state.replicated_log_reliability(t, state[t].ctx) - state.single_log_reliability(t, state[t].ctx);
    state[t].backup = true;
    if (state.meets_reliability(log_r)) return true;
  }
  return state.meets_reliability(log_r);
}

std::vector<Decision> run_list_heuristic(PlanningState& state, ListOrder order) {
  const Workflow& w = state.workflow();
  state.refresh();

  std::vector<std::size_t> list;
  std::vector<bool> active(state.size(), false);
  for (std::size_t t = 0; t < state.size(); ++t) {
    if (state[t].phase == Phase::Free) {
      list.push_back(t);
      active[t] = true;
    }
  }

  std::vector<double> delta;
  if (order == ListOrder::LevelDeadline) {
    const LevelInfo info = compute_levels(w, active);
    delta = level_deadlines(w, info, state.residual_bounds(), state.release());
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      if (delta[a] != delta[b]) return delta[a] < delta[b];
      return w.task(a).id < w.task(b).id;
    });
  } else {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      if (w.task(a).wc != w.task(b).wc) return w.task(a).wc > w.task(b).wc;
      return w.task(a).id < w.task(b).id;
    });
  }

  ReplicationLedger ledger(w);
  std::vector<Decision> decisions;
  decisions.reserve(list.size());
  for (std::size_t t : list) {
    Decision rec;
    rec.task = t;
    rec.start = state[t].start;
    rec.bound = state.lft(t);
    if (order == ListOrder::LevelDeadline) rec.bound = std::min(delta[t], rec.bound);
    try {
      rec.need = min_cpf(w.task(t).wc, rec.start, rec.bound);
    } catch (const InfeasibleWindow&) {
      rec.need.reset();
    }
    const ExecContext before = state[t].ctx;
    const bool had_backup = state[t].backup;
    const RetDecision d = ret_schedule_task(state, ledger, t, rec.need);
    rec.changed = !(state[t].ctx == before) || state[t].backup != had_backup || d.chosen.prev.has_value();
    state[t].phase = Phase::Decided;
    state.refresh();
    decisions.push_back(rec);
  }
  state.refresh();
  replicate_until_reliable(state);
  return decisions;
}

}  // namespace wfsched
