#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wfsched/scheduler.hpp"

namespace wfsched {

bool ConstraintReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

const ConstraintResult* ConstraintReport::find(std::string_view name) const {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

ConstraintReport check_constraints(const Workflow& w, const Platform& p, const Schedule& s) {
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

  // Exactly one entry per task.
  std::vector<const ScheduleEntry*> by_task(n, nullptr);
  std::vector<int> count(n, 0);
  for (const auto& e : s.entries) {
    if (e.task >= n) {
      assignment.pass = false;
      assignment.violating.push_back("#" + std::to_string(e.task));
      continue;
    }
    ++count[e.task];
    by_task[e.task] = &e;
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (count[t] != 1) {
      flag(assignment, t);
      by_task[t] = nullptr;
    }
  }

  double log_r = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const ScheduleEntry* e = by_task[t];
    if (!e) continue;
    if (!p.valid(e->ctx)) {
      flag(domain, t);
      by_task[t] = nullptr;
      continue;
    }
    const double tau = execution_time(w.task(t).wc, p, e->ctx);
    if (std::abs(e->finish - (e->start + tau)) > kTolerance * std::max(1.0, std::abs(e->finish))) {
      flag(duration, t);
    }
    if (e->start < w.arrival() - kTolerance) flag(arrival, t);
    if (e->finish > w.deadline() + kTolerance) flag(deadline, t);
    log_r += task_log_reliability(w.task(t).wc, p, e->ctx, e->backup);
  }
  for (const auto& [from, to] : w.edges()) {
    if (!by_task[from] || !by_task[to]) continue;
    if (by_task[to]->start < by_task[from]->finish - kTolerance) flag(precedence, to);
  }
  if (!meets_reliability(std::exp(log_r), w.reliability_req())) reliability.pass = false;

  ConstraintReport report;
  report.results = {reliability, precedence, duration, deadline, arrival, assignment, domain};
  return report;
}

std::string report_to_json(const ConstraintReport& r) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : r.results) {
    list.push_back({{"constraint", c.name}, {"pass", c.pass}, {"violating", c.violating}});
  }
  return nlohmann::json{{"all_pass", r.all_pass()}, {"constraints", list}}.dump(2);
}

}  // namespace wfsched
