#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wfsched/platform.hpp"

namespace wfsched {

class WorkflowError : public std::runtime_error {
 public:
  enum class Kind { Schema, DuplicateId, DanglingEdge, Cycle, NonPositiveWc, Degenerate, Dax };

  WorkflowError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Task {
  std::string id;
  double wc = 0.0;  // worst-case length, MI
  std::vector<std::size_t> preds;
  std::vector<std::size_t> succs;
};

/// Validated, immutable workflow DAG. Tasks are addressed by their index in
/// input order; `topo_order()` gives a deterministic topological order
/// (Kahn's algorithm, ready set ordered by task id).
class Workflow {
 public:
  struct TaskSpec {
    std::string id;
    double wc;
  };
  using EdgeSpec = std::pair<std::string, std::string>;

  Workflow(std::string name, std::vector<TaskSpec> tasks, std::vector<EdgeSpec> edges,
           double arrival, double deadline, double reliability);

  const std::string& name() const { return name_; }
  std::span<const Task> tasks() const { return tasks_; }
  const Task& task(std::size_t i) const { return tasks_.at(i); }
  std::size_t size() const { return tasks_.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;

  std::span<const std::pair<std::size_t, std::size_t>> edges() const { return edges_; }
  std::span<const std::size_t> topo_order() const { return topo_; }

  double arrival() const { return arrival_; }
  double deadline() const { return deadline_; }
  double reliability_req() const { return reliability_; }

  Workflow with_deadline(double deadline) const;
  Workflow with_reliability(double reliability) const;

 private:
  std::string name_;
  std::vector<Task> tasks_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::size_t> topo_;
  std::unordered_map<std::string, std::size_t> index_;
  double arrival_ = 0.0;
  double deadline_ = 0.0;
  double reliability_ = 0.0;
};

Workflow parse_workflow(std::string_view json_text);
std::string to_json(const Workflow& w);

struct LevelInfo {
  std::vector<int> level;           // per task, >= 1 (0 for inactive tasks)
  std::vector<double> level_work;   // level_work[l - 1] = sigma(l)
  double total_work = 0.0;          // sigma(W)

  int depth() const { return static_cast<int>(level_work.size()); }
};

LevelInfo compute_levels(const Workflow& w);
/// Levels of the subgraph induced by `active`; edges from inactive tasks
/// are ignored.
LevelInfo compute_levels(const Workflow& w, const std::vector<bool>& active);

struct TimeBounds {
  std::vector<double> est, eft, lst, lft;
};

TimeBounds compute_time_bounds(const Workflow& w, const Platform& p);

/// Forward/backward passes with caller-supplied durations. Tasks with a
/// `fixed_finish` are treated as already placed (only their finish feeds
/// successors); everything else starts no earlier than `release`.
TimeBounds propagate_bounds(const Workflow& w, std::span<const double> duration,
                            std::span<const std::optional<double>> fixed_finish, double release);

/// Length of the longest path when every task runs on the fastest context.
double critical_path_time(const Workflow& w, const Platform& p);

/// d_max / (N - 1). Throws WorkflowError(Degenerate) for N < 2.
double max_fanout_ratio(const Workflow& w);

}  // namespace wfsched
