#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "wfsched/schedule.hpp"

namespace wfsched {

using nlohmann::json;

double effective_task_energy(const Workflow& w, const Platform& p, const ScheduleEntry& e) {
  const double energy = task_energy(w.task(e.task).wc, p, e.ctx);
  return e.backup ? 2.0 * energy : energy;
}

double effective_task_log_reliability(const Workflow& w, const Platform& p, const ScheduleEntry& e) {
  return task_log_reliability(w.task(e.task).wc, p, e.ctx, e.backup);
}

void recompute_totals(const Workflow& w, const Platform& p, Schedule& s) {
  double energy = 0.0, log_r = 0.0, latest = w.arrival();
  for (const auto& e : s.entries) {
    energy += effective_task_energy(w, p, e);
    log_r += effective_task_log_reliability(w, p, e);
    latest = std::max(latest, e.finish);
  }
  s.total_energy = energy;
  s.reliability = std::exp(log_r);
  s.makespan = latest - w.arrival();
}

std::string schedule_to_json(const Workflow& w, const Platform& p, const Schedule& s) {
  json tasks = json::array();
  for (const auto& e : s.entries) {
    tasks.push_back({{"id", w.task(e.task).id},
                     {"vm", p.vm_of(e.ctx).name},
                     {"frequency", p.freq(e.ctx)},
                     {"level", e.ctx.level},
                     {"start", e.start},
                     {"finish", e.finish},
                     {"backup", e.backup}});
  }
  json doc{{"workflow", w.name()},
           {"algorithm", std::string(to_string(s.algorithm))},
           {"resolved_algorithm", std::string(to_string(s.resolved))},
           {"threshold", s.threshold},
           {"feasible", s.feasible},
           {"reason", s.reason},
           {"energy", s.total_energy},
           {"reliability", s.reliability},
           {"makespan", s.makespan},
           {"tasks", tasks}};
  return doc.dump(2);
}

}  // namespace wfsched
