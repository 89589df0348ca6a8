#include "wfsched/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "wfsched/planning.hpp"

namespace wfsched {

void validate(const SimConfig& cfg) {
  if (!(cfg.sample_mean_fraction > 0.0 && cfg.sample_mean_fraction <= 1.0)) {
    throw std::invalid_argument("sample_mean_fraction must lie in (0, 1]");
  }
  for (double f : cfg.actual_fraction) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("actual_fraction entries must lie in (0, 1]");
  }
}

double sample_actual_time(double wc, const Platform& p, ExecContext c, double mean_fraction, RngStream& rng) {
  const double worst = execution_time(wc, p, c);
  return std::min(rng.exponential(mean_fraction * worst), worst);
}

std::vector<std::size_t> advance_ready(const RollingHorizon& h, const Workflow& w) {
  std::vector<std::size_t> out;
  for (std::size_t t : h.pending) {
    const auto& preds = w.task(t).preds;
    const bool ready = std::all_of(preds.begin(), preds.end(),
                                   [&h](std::size_t q) { return h.completed.count(q) > 0; });
    if (ready) out.push_back(t);
  }
  return out;
}

namespace {

ListOrder resolve_order(const Workflow& w, const Schedule& initial, const SimConfig& cfg) {
  switch (cfg.reschedule) {
    case Rescheduler::Lef: return ListOrder::LargestEnergyFirst;
    case Rescheduler::Ldd: return ListOrder::LevelDeadline;
    case Rescheduler::None:
    case Rescheduler::AsSelected: break;
  }
  Algorithm a = initial.resolved;
  if (a != Algorithm::Lef && a != Algorithm::Ldd) a = asmfr_select(w, cfg.threshold);
  return a == Algorithm::Lef ? ListOrder::LargestEnergyFirst : ListOrder::LevelDeadline;
}

bool plan_feasible(const PlanningState& st) {
  return st.latest_finish() <= st.workflow().deadline() + kTolerance && st.meets_reliability(st.log_reliability());
}

}  // namespace

SimTrace run_dynamic(const Workflow& w, const Platform& p, const Schedule& initial, const SimConfig& cfg) {
  validate(cfg);
  if (!initial.feasible) throw std::invalid_argument("dynamic execution needs a feasible initial schedule");
  if (initial.entries.size() != w.size()) throw std::invalid_argument("schedule does not match workflow");
  if (!cfg.actual_fraction.empty() && cfg.actual_fraction.size() != w.size()) {
    throw std::invalid_argument("actual_fraction must have one entry per task");
  }
  const std::size_t n = w.size();
  const ListOrder order = resolve_order(w, initial, cfg);

  SimTrace trace;
  trace.static_energy = initial.total_energy;

  PlanningState st(w, p);
  for (const auto& e : initial.entries) {
    st[e.task].ctx = e.ctx;
    st[e.task].backup = e.backup;
  }

  // Actual/worst-case ratio per task, drawn from the task's own stream.
  std::vector<double> ratio(n, 1.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (!cfg.actual_fraction.empty()) {
      ratio[t] = cfg.actual_fraction[t];
    } else if (!cfg.worst_case) {
      RngStream rng = make_stream(cfg.seed, StreamKind::ActualTime, t);
      ratio[t] = std::min(rng.exponential(cfg.sample_mean_fraction), 1.0);
    }
  }

  RollingHorizon h;
  for (std::size_t t = 0; t < n; ++t) h.pending.insert(t);
  std::vector<double> complete_at(n, 0.0);
  trace.executed.resize(n);

  double now = w.arrival();
  auto dispatch = [&](std::size_t t) {
    TaskPlan& plan = st[t];
    plan.phase = Phase::Running;
    plan.start = now;
    const double worst = execution_time(w.task(t).wc, p, plan.ctx);
    complete_at[t] = now + ratio[t] * worst;
    h.pending.erase(t);
    h.ready.insert(t);
    trace.events.push_back({now, EventKind::Dispatch, t, plan.ctx, plan.backup, 0.0, false});
  };

  st.set_release(now);
  st.refresh();
  for (std::size_t t : advance_ready(h, w)) dispatch(t);
  st.refresh();

  while (!h.ready.empty()) {
    std::size_t j = *h.ready.begin();
    for (std::size_t t : h.ready) {
      if (complete_at[t] < complete_at[j] || (complete_at[t] == complete_at[j] && w.task(t).id < w.task(j).id)) {
        j = t;
      }
    }
    now = complete_at[j];
    TaskPlan& plan = st[j];
    const double copies = plan.backup ? 2.0 : 1.0;
    const double energy = power_draw(p, plan.ctx) * (now - plan.start) * copies;
    trace.realized_energy += energy;
    plan.phase = Phase::Completed;
    plan.finish = now;
    trace.executed[j] = {j, plan.ctx, plan.start, now, plan.backup};
    h.ready.erase(j);
    h.completed[j] = now;
    trace.events.push_back({now, EventKind::Complete, j, plan.ctx, plan.backup, energy, false});

    if (cfg.failure_injection) {
      RngStream rng = make_stream(cfg.seed, StreamKind::Failure, j);
      const double q = copy_failure_probability(w.task(j).wc, p, plan.ctx);
      bool survived = false;
      for (int c = 0; c < static_cast<int>(copies); ++c) {
        if (!(rng.uniform() < q)) survived = true;
      }
      if (!survived) {
        trace.success = false;
        trace.events.push_back({now, EventKind::Failure, j, plan.ctx, plan.backup, 0.0, false});
        break;
      }
    }

    st.set_release(now);
    st.refresh();
    if (!h.pending.empty() && cfg.reschedule != Rescheduler::None) {
      if (!plan_feasible(st)) {
        throw std::logic_error("residual plan became infeasible although actual <= worst case");
      }
      ++trace.reschedules;
      PlanningState candidate = st;
      run_list_heuristic(candidate, order);
      bool accept = plan_feasible(candidate);
      for (std::size_t t : h.pending) {
        if (!accept) break;
        accept = candidate.task_energy(t) <= st.task_energy(t) + kTolerance;
      }
      if (accept) {
        for (std::size_t t : h.pending) candidate[t].phase = Phase::Free;
        st = candidate;
        st.refresh();
        ++trace.accepted_reschedules;
      }
      double residual = 0.0;
      for (std::size_t t : h.pending) residual += st.task_energy(t);
      SimEvent ev{now, EventKind::Reschedule, std::nullopt, {}, false, residual, accept,
                  std::exp(st.log_reliability())};
      trace.events.push_back(ev);
    }

    for (std::size_t t : advance_ready(h, w)) dispatch(t);
    st.refresh();
  }

  double latest = w.arrival();
  for (const auto& e : trace.executed) latest = std::max(latest, e.finish);
  trace.makespan = latest - w.arrival();
  trace.deadline_met = trace.success && h.pending.empty() && latest <= w.deadline() + kTolerance;

  Schedule dispatched;
  for (std::size_t t = 0; t < n; ++t) {
    const ExecContext c = st[t].ctx;
    const double start = trace.executed[t].start;
    dispatched.entries.push_back({t, c, start, start + execution_time(w.task(t).wc, p, c), st[t].backup});
  }
  recompute_totals(w, p, dispatched);
  dispatched.algorithm = initial.algorithm;
  dispatched.resolved = order == ListOrder::LargestEnergyFirst ? Algorithm::Lef : Algorithm::Ldd;
  dispatched.threshold = cfg.threshold;
  dispatched.feasible = trace.deadline_met;
  trace.dispatched = std::move(dispatched);
  return trace;
}

namespace {

std::string_view kind_name(EventKind k) {
  switch (k) {
    case EventKind::Dispatch: return "dispatch";
    case EventKind::Complete: return "complete";
    case EventKind::Reschedule: return "reschedule";
    case EventKind::Failure: return "failure";
  }
  return "?";
}

}  // namespace

std::string trace_to_jsonl(const Workflow& w, const Platform& p, const SimTrace& trace) {
  using nlohmann::json;
  std::string out;
  for (const auto& ev : trace.events) {
    json line{{"time", ev.time}, {"kind", std::string(kind_name(ev.kind))}};
    if (ev.task) {
      line["task"] = w.task(*ev.task).id;
      line["vm"] = p.vm_of(ev.ctx).name;
      line["frequency"] = p.freq(ev.ctx);
      line["backup"] = ev.backup;
    }
    if (ev.kind == EventKind::Complete) line["energy"] = ev.energy;
    if (ev.kind == EventKind::Reschedule) {
      line["accepted"] = ev.accepted;
      line["residual_energy"] = ev.energy;
      line["residual_reliability"] = ev.reliability;
    }
    out += line.dump();
    out += '\n';
  }
  json summary{{"summary", true},
               {"workflow", w.name()},
               {"realized_energy", trace.realized_energy},
               {"static_energy", trace.static_energy},
               {"dispatched_energy", trace.dispatched.total_energy},
               {"makespan", trace.makespan},
               {"deadline_met", trace.deadline_met},
               {"success", trace.success},
               {"reschedules", trace.reschedules},
               {"accepted_reschedules", trace.accepted_reschedules}};
  out += summary.dump();
  out += '\n';
  return out;
}

ConstraintReport check_execution(const Workflow& w, const Platform& p, const Schedule& initial,
                                 const SimTrace& trace) {
  const std::size_t n = w.size();
  ConstraintResult reliability{"reliability", true, {}};
  ConstraintResult precedence{"precedence", true, {}};
  ConstraintResult duration{"duration", true, {}};
  ConstraintResult deadline{"deadline", true, {}};
  ConstraintResult arrival{"arrival", true, {}};
  ConstraintResult assignment{"assignment", true, {}};
  ConstraintResult domain{"domain", true, {}};
  auto flag = [&w](ConstraintResult& r, std::size_t t) {
    r.pass = false;
    r.violating.push_back(w.task(t).id);
  };

  std::vector<int> dispatched(n, 0), completed(n, 0);
  for (const auto& ev : trace.events) {
    if (!ev.task || *ev.task >= n) continue;
    if (ev.kind == EventKind::Dispatch) ++dispatched[*ev.task];
    if (ev.kind == EventKind::Complete) ++completed[*ev.task];
  }
  std::vector<bool> ok(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (trace.executed.size() != n || dispatched[t] != 1 || completed[t] != 1 || trace.executed[t].task != t) {
      flag(assignment, t);
      continue;
    }
    const ScheduleEntry& e = trace.executed[t];
    const bool same_ctx = t < trace.dispatched.entries.size() && trace.dispatched.entries[t].ctx == e.ctx;
    if (!p.valid(e.ctx) || !same_ctx) {
      flag(domain, t);
      continue;
    }
    ok[t] = true;
    const double worst = execution_time(w.task(t).wc, p, e.ctx);
    if (!(e.finish > e.start) || e.finish - e.start > worst + kTolerance * std::max(1.0, worst)) flag(duration, t);
    if (e.start < w.arrival() - kTolerance) flag(arrival, t);
    if (e.finish > w.deadline() + kTolerance) flag(deadline, t);
  }
  for (const auto& [from, to] : w.edges()) {
    if (!ok[from] || !ok[to]) continue;
    if (trace.executed[to].start < trace.executed[from].finish - kTolerance) flag(precedence, to);
  }
  if (!meets_reliability(initial.reliability, w.reliability_req())) reliability.pass = false;
  for (const auto& ev : trace.events) {
    if (ev.kind == EventKind::Reschedule && !meets_reliability(ev.reliability, w.reliability_req())) {
      reliability.pass = false;
    }
  }

  ConstraintReport report;
  report.results = {reliability, precedence, duration, deadline, arrival, assignment, domain};
  return report;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

ReliabilityEstimate run_monte_carlo(const Workflow& w, const Platform& p, const Schedule& s, const SimConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("Monte-Carlo needs at least one trial");
  const std::size_t n = s.entries.size();
  std::vector<double> q(n);
  std::vector<int> copies(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = s.entries[i];
    q[i] = copy_failure_probability(w.task(e.task).wc, p, e.ctx);
    copies[i] = e.backup ? 2 : 1;
  }

  // One stream per fixed-size block of trials: reseeding per trial would
  // dominate the run time, and fixed blocks keep results independent of the
  // worker count.
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (cfg.trials + kBlock - 1) / kBlock;
  auto run_blocks = [&](std::size_t begin, std::size_t end) {
    std::size_t ok = 0;
    for (std::size_t b = begin; b < end; ++b) {
      RngStream rng = make_stream(cfg.seed, StreamKind::MonteCarlo, b);
      const std::size_t last = std::min(cfg.trials, (b + 1) * kBlock);
      for (std::size_t trial = b * kBlock; trial < last; ++trial) {
        bool workflow_ok = true;
        for (std::size_t i = 0; i < n && workflow_ok; ++i) {
          bool task_ok = false;
          for (int c = 0; c < copies[i]; ++c) {
            if (!(rng.uniform() < q[i])) task_ok = true;
          }
          workflow_ok = task_ok;
        }
        if (workflow_ok) ++ok;
      }
    }
    return ok;
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), blocks / 4 + 1));
  std::vector<std::size_t> partial(workers, 0);
  std::vector<std::thread> pool;
  const std::size_t chunk = (blocks + workers - 1) / workers;
  for (std::size_t k = 0; k < workers; ++k) {
    const std::size_t b = std::min(blocks, k * chunk);
    const std::size_t e = std::min(blocks, b + chunk);
    pool.emplace_back([&, k, b, e] { partial[k] = run_blocks(b, e); });
  }
  for (auto& th : pool) th.join();

  ReliabilityEstimate est;
  est.trials = cfg.trials;
  for (std::size_t v : partial) est.successes += v;
  est.estimate = static_cast<double>(est.successes) / static_cast<double>(cfg.trials);
  std::tie(est.lower, est.upper) = wilson_interval(est.successes, cfg.trials, 1.96);
  return est;
}

}  // namespace wfsched
