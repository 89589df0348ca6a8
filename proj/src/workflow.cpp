#include "wfsched/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include <json.hpp>

namespace wfsched {

using nlohmann::json;
using Kind = WorkflowError::Kind;

Workflow::Workflow(std::string name, std::vector<TaskSpec> tasks, std::vector<EdgeSpec> edges,
                   double arrival, double deadline, double reliability)
    : name_(std::move(name)), arrival_(arrival), deadline_(deadline), reliability_(reliability) {
  if (tasks.empty()) throw WorkflowError(Kind::Schema, "workflow has no tasks");
  if (!std::isfinite(arrival_) || !std::isfinite(deadline_) || !(deadline_ > arrival_)) {
    throw WorkflowError(Kind::Schema, "deadline must be finite and greater than arrival");
  }
  if (!(reliability_ >= 0.0 && reliability_ < 1.0)) {
    throw WorkflowError(Kind::Schema, "reliability requirement must lie in [0, 1)");
  }

  tasks_.reserve(tasks.size());
  for (auto& spec : tasks) {
    if (spec.id.empty()) throw WorkflowError(Kind::Schema, "task with empty id");
    if (!(spec.wc > 0.0) || !std::isfinite(spec.wc)) {
      throw WorkflowError(Kind::NonPositiveWc, "task '" + spec.id + "' has non-positive wc");
    }
    if (!index_.emplace(spec.id, tasks_.size()).second) {
      throw WorkflowError(Kind::DuplicateId, "duplicate task id '" + spec.id + "'");
    }
    tasks_.push_back(Task{std::move(spec.id), spec.wc, {}, {}});
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges) {
    auto a = index_.find(from);
    auto b = index_.find(to);
    if (a == index_.end() || b == index_.end()) {
      throw WorkflowError(Kind::DanglingEdge, "edge " + from + " -> " + to + " references an unknown task");
    }
    if (a->second == b->second) throw WorkflowError(Kind::Cycle, "self-loop on task '" + from + "'");
    if (!seen.insert({a->second, b->second}).second) continue;
    edges_.emplace_back(a->second, b->second);
    tasks_[a->second].succs.push_back(b->second);
    tasks_[b->second].preds.push_back(a->second);
  }

  // Kahn's algorithm; the ready set is ordered by id so the order does not
  // depend on how the input listed the tasks.
  auto by_id = [this](std::size_t x, std::size_t y) { return tasks_[x].id > tasks_[y].id; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_id)> ready(by_id);
  std::vector<std::size_t> indeg(tasks_.size());
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    indeg[i] = tasks_[i].preds.size();
    if (indeg[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    const std::size_t t = ready.top();
    ready.pop();
    topo_.push_back(t);
    for (std::size_t s : tasks_[t].succs) {
      if (--indeg[s] == 0) ready.push(s);
    }
  }
  if (topo_.size() != tasks_.size()) {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (indeg[i] > 0) {
        throw WorkflowError(Kind::Cycle, "cycle detected through task '" + tasks_[i].id + "'");
      }
    }
  }
}

std::optional<std::size_t> Workflow::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Workflow Workflow::with_deadline(double deadline) const {
  Workflow copy = *this;
  if (!std::isfinite(deadline) || !(deadline > arrival_)) {
    throw WorkflowError(Kind::Schema, "deadline must be finite and greater than arrival");
  }
  copy.deadline_ = deadline;
  return copy;
}

Workflow Workflow::with_reliability(double reliability) const {
  Workflow copy = *this;
  if (!(reliability >= 0.0 && reliability < 1.0)) {
    throw WorkflowError(Kind::Schema, "reliability requirement must lie in [0, 1)");
  }
  copy.reliability_ = reliability;
  return copy;
}

Workflow parse_workflow(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw WorkflowError(Kind::Schema, std::string("malformed workflow JSON: ") + e.what());
  }
  std::string name;
  std::vector<Workflow::TaskSpec> tasks;
  std::vector<Workflow::EdgeSpec> edges;
  double arrival = 0, deadline = 0, reliability = 0;
  try {
    if (!doc.is_object()) throw WorkflowError(Kind::Schema, "workflow document must be an object");
    name = doc.value("name", std::string("workflow"));
    arrival = doc.at("arrival").get<double>();
    deadline = doc.at("deadline").get<double>();
    reliability = doc.at("reliability").get<double>();
    for (const auto& t : doc.at("tasks")) {
      tasks.push_back({t.at("id").get<std::string>(), t.at("wc").get<double>()});
    }
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) {
          throw WorkflowError(Kind::Schema, "each edge must be a [from, to] pair");
        }
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw WorkflowError(Kind::Schema, std::string("workflow schema violation: ") + e.what());
  }
  return Workflow(std::move(name), std::move(tasks), std::move(edges), arrival, deadline, reliability);
}

std::string to_json(const Workflow& w) {
  json tasks = json::array();
  for (const auto& t : w.tasks()) tasks.push_back({{"id", t.id}, {"wc", t.wc}});
  json edges = json::array();
  for (const auto& [a, b] : w.edges()) edges.push_back({w.task(a).id, w.task(b).id});
  json doc{{"name", w.name()},
           {"arrival", w.arrival()},
           {"deadline", w.deadline()},
           {"reliability", w.reliability_req()},
           {"tasks", tasks},
           {"edges", edges}};
  return doc.dump(2);
}

LevelInfo compute_levels(const Workflow& w, const std::vector<bool>& active) {
  LevelInfo info;
  info.level.assign(w.size(), 0);
  for (std::size_t t : w.topo_order()) {
    if (!active[t]) continue;
    int lvl = 1;
    for (std::size_t p : w.task(t).preds) {
      if (active[p]) lvl = std::max(lvl, info.level[p] + 1);
    }
    info.level[t] = lvl;
    if (static_cast<std::size_t>(lvl) > info.level_work.size()) info.level_work.resize(lvl, 0.0);
    info.level_work[lvl - 1] += w.task(t).wc;
    info.total_work += w.task(t).wc;
  }
  return info;
}

LevelInfo compute_levels(const Workflow& w) { return compute_levels(w, std::vector<bool>(w.size(), true)); }

TimeBounds propagate_bounds(const Workflow& w, std::span<const double> duration,
                            std::span<const std::optional<double>> fixed_finish, double release) {
  const std::size_t n = w.size();
  TimeBounds b;
  b.est.assign(n, 0.0);
  b.eft.assign(n, 0.0);
  b.lst.assign(n, 0.0);
  b.lft.assign(n, 0.0);

  for (std::size_t t : w.topo_order()) {
    if (fixed_finish[t]) {
      b.eft[t] = b.lft[t] = *fixed_finish[t];
      b.est[t] = b.lst[t] = *fixed_finish[t] - duration[t];
      continue;
    }
    double est = release;
    for (std::size_t p : w.task(t).preds) est = std::max(est, b.eft[p]);
    b.est[t] = est;
    b.eft[t] = est + duration[t];
  }
  const auto topo = w.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const std::size_t t = *it;
    if (fixed_finish[t]) continue;
    double lft = w.deadline();
    for (std::size_t s : w.task(t).succs) lft = std::min(lft, b.lst[s]);
    b.lft[t] = lft;
    b.lst[t] = lft - duration[t];
  }
  return b;
}

TimeBounds compute_time_bounds(const Workflow& w, const Platform& p) {
  const ExecContext best = p.fastest();
  std::vector<double> duration(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) duration[i] = execution_time(w.task(i).wc, p, best);
  std::vector<std::optional<double>> fixed(w.size());
  return propagate_bounds(w, duration, fixed, w.arrival());
}

double critical_path_time(const Workflow& w, const Platform& p) {
  const TimeBounds b = compute_time_bounds(w, p);
  return *std::max_element(b.eft.begin(), b.eft.end()) - w.arrival();
}

double max_fanout_ratio(const Workflow& w) {
  if (w.size() < 2) {
    throw WorkflowError(Kind::Degenerate, "fan-out ratio is undefined for fewer than two tasks");
  }
  std::size_t d_max = 0;
  for (const auto& t : w.tasks()) d_max = std::max(d_max, t.succs.size());
  return static_cast<double>(d_max) / static_cast<double>(w.size() - 1);
}

}  // namespace wfsched
