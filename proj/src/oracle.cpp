#include "wfsched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace wfsched {

std::string_view to_string(OracleStatus s) {
  switch (s) {
    case OracleStatus::Optimal: return "optimal";
    case OracleStatus::Infeasible: return "infeasible";
    case OracleStatus::BudgetExceeded: return "budget-exceeded";
  }
  return "?";
}

Evaluation evaluate_assignment(const Workflow& w, const Platform& p, const AssignmentVector& a) {
  if (a.size() != w.size()) throw std::invalid_argument("assignment does not match workflow");
  Evaluation ev;
  Schedule& s = ev.schedule;
  s.entries.resize(w.size());
  for (std::size_t t : w.topo_order()) {
    if (!p.valid(a[t].ctx)) throw std::invalid_argument("assignment references an invalid context");
    double st = w.arrival();
    for (std::size_t q : w.task(t).preds) st = std::max(st, s.entries[q].finish);
    s.entries[t] = {t, a[t].ctx, st, st + execution_time(w.task(t).wc, p, a[t].ctx), a[t].replicated};
  }
  recompute_totals(w, p, s);
  ev.energy = s.total_energy;
  ev.makespan = s.makespan;
  ev.reliability = s.reliability;
  ev.feasible = w.arrival() + ev.makespan <= w.deadline() + kTolerance &&
                meets_reliability(ev.reliability, w.reliability_req());
  s.feasible = ev.feasible;
  return ev;
}

AssignmentVector assignment_of(const Schedule& s) {
  AssignmentVector a(s.entries.size());
  for (const auto& e : s.entries) a[e.task] = {e.ctx, e.backup};
  return a;
}

namespace {

struct Option {
  Assignment choice;
  double energy;
  double tau;
  double log_r;
};

class Search {
 public:
  Search(const Workflow& w, const Platform& p, const OracleLimits& limits)
      : w_(w), p_(p), limits_(limits), order_(w.topo_order().begin(), w.topo_order().end()) {
    const std::size_t n = w.size();
    options_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double wc = w.task(t).wc;
      for (std::size_t l = 0; l < p.size(); ++l) {
        for (std::size_t k = 0; k < p.vm(l).levels(); ++k) {
          const ExecContext c{l, k};
          const double e = task_energy(wc, p, c);
          const double tau = execution_time(wc, p, c);
          options_[t].push_back({{c, false}, e, tau, task_log_reliability(wc, p, c, false)});
          options_[t].push_back({{c, true}, 2.0 * e, tau, task_log_reliability(wc, p, c, true)});
        }
      }
      std::stable_sort(options_[t].begin(), options_[t].end(),
                       [](const Option& a, const Option& b) { return a.energy < b.energy; });
    }

    energy_suffix_.assign(n + 1, 0.0);
    rel_suffix_.assign(n + 1, 0.0);
    for (std::size_t d = n; d-- > 0;) {
      const auto& opts = options_[order_[d]];
      double e_min = std::numeric_limits<double>::infinity();
      double r_max = -std::numeric_limits<double>::infinity();
      for (const auto& o : opts) {
        e_min = std::min(e_min, o.energy);
        r_max = std::max(r_max, o.log_r);
      }
      energy_suffix_[d] = energy_suffix_[d + 1] + e_min;
      rel_suffix_[d] = rel_suffix_[d + 1] + r_max;
    }

    // Fastest possible time from a task's finish to the end of the workflow.
    tail_.assign(n, 0.0);
    const ExecContext fast = p.fastest();
    for (std::size_t d = n; d-- > 0;) {
      const std::size_t t = order_[d];
      for (std::size_t s : w.task(t).succs) {
        tail_[t] = std::max(tail_[t], execution_time(w.task(s).wc, p, fast) + tail_[s]);
      }
    }
    log_required_ = w.reliability_req() > 0 ? std::log(w.reliability_req() - kTolerance)
                                            : -std::numeric_limits<double>::infinity();
    current_.resize(n);
    finish_.assign(n, 0.0);
  }

  OracleResult run() {
    dfs(0, 0.0, 0.0);
    OracleResult r;
    r.explored = explored_;
    if (best_) {
      r.best = best_;
      r.evaluation = evaluate_assignment(w_, p_, *best_);
      r.optimal_energy = r.evaluation->energy;
    }
    if (aborted_) {
      r.status = OracleStatus::BudgetExceeded;
    } else {
      r.status = best_ ? OracleStatus::Optimal : OracleStatus::Infeasible;
    }
    return r;
  }

 private:
  void dfs(std::size_t depth, double energy, double log_r) {
    if (aborted_) return;
    if (depth == order_.size()) {
      double latest = w_.arrival();
      for (double f : finish_) latest = std::max(latest, f);
      const bool ok = latest <= w_.deadline() + kTolerance &&
                      meets_reliability(std::exp(log_r), w_.reliability_req());
      if (ok && energy < best_energy_) {
        best_energy_ = energy;
        best_ = current_;
      }
      return;
    }
    const std::size_t t = order_[depth];
    double st = w_.arrival();
    for (std::size_t q : w_.task(t).preds) st = std::max(st, finish_[q]);

    for (const Option& o : options_[t]) {
      if (++explored_ > limits_.node_budget) {
        aborted_ = true;
        return;
      }
      const double e = energy + o.energy;
      const double r = log_r + o.log_r;
      const double ft = st + o.tau;
      if (limits_.prune) {
        // Options are sorted by energy, so once the bound fails it fails for the rest.
        if (e + energy_suffix_[depth + 1] >= best_energy_) break;
        if (r + rel_suffix_[depth + 1] < log_required_) continue;
        if (ft + tail_[t] > w_.deadline() + kTolerance) continue;
      }
      current_[t] = o.choice;
      finish_[t] = ft;
      dfs(depth + 1, e, r);
      if (aborted_) return;
    }
  }

  const Workflow& w_;
  const Platform& p_;
  OracleLimits limits_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<Option>> options_;
  std::vector<double> energy_suffix_, rel_suffix_, tail_;
  double log_required_ = 0.0;

  AssignmentVector current_;
  std::vector<double> finish_;
  std::optional<AssignmentVector> best_;
  double best_energy_ = std::numeric_limits<double>::infinity();
  std::uint64_t explored_ = 0;
  bool aborted_ = false;
};

}  // namespace

OracleResult enumerate_optimal(const Workflow& w, const Platform& p, const OracleLimits& limits) {
  if (w.size() > limits.max_tasks) {
    OracleResult r;
    r.status = OracleStatus::BudgetExceeded;
    AssignmentVector fastest(w.size(), Assignment{p.fastest(), false});
    Evaluation ev = evaluate_assignment(w, p, fastest);
    if (ev.feasible) {
      r.best = fastest;
      r.optimal_energy = ev.energy;
      r.evaluation = std::move(ev);
    }
    return r;
  }
  return Search(w, p, limits).run();
}

std::string oracle_to_json(const Workflow& w, const Platform& p, const OracleResult& r) {
  using nlohmann::json;
  json doc;
  if (r.evaluation) {
    Schedule s = r.evaluation->schedule;
    s.reason = r.status == OracleStatus::Optimal ? "" : std::string(to_string(r.status));
    doc = json::parse(schedule_to_json(w, p, s));
    doc["algorithm"] = "oracle";
    doc["resolved_algorithm"] = "oracle";
    doc.erase("threshold");
  } else {
    doc = json{{"workflow", w.name()}, {"algorithm", "oracle"}, {"feasible", false}, {"tasks", json::array()}};
  }
  doc["oracle"] = {{"status", std::string(to_string(r.status))},
                   {"explored", r.explored},
                   {"optimal_energy", r.evaluation ? json(r.optimal_energy) : json(nullptr)},
                   {"replica_policy", "same-vm-same-frequency"}};
  return doc.dump(2);
}

}  // namespace wfsched
