#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfsched/schedule.hpp"

namespace wfsched {

/// One (VM, level, replicated) choice per task. Replicas always share the
/// primary's VM type and frequency.
struct Assignment {
  ExecContext ctx;
  bool replicated = false;
};
using AssignmentVector = std::vector<Assignment>;

struct Evaluation {
  double energy = 0.0;
  double makespan = 0.0;
  double reliability = 1.0;
  bool feasible = false;
  Schedule schedule;  // as-early-as-possible start times
};

Evaluation evaluate_assignment(const Workflow& w, const Platform& p, const AssignmentVector& a);

AssignmentVector assignment_of(const Schedule& s);

enum class OracleStatus { Optimal, Infeasible, BudgetExceeded };

std::string_view to_string(OracleStatus s);

struct OracleLimits {
  std::uint64_t node_budget = 50'000'000;
  std::size_t max_tasks = 8;  // larger instances are refused as budget-exceeded
  bool prune = true;
};

struct OracleResult {
  OracleStatus status = OracleStatus::Infeasible;
  std::optional<AssignmentVector> best;
  std::optional<Evaluation> evaluation;
  double optimal_energy = 0.0;
  std::uint64_t explored = 0;
};

/// Depth-first enumeration in topological order. With pruning enabled it
/// cuts on an energy lower bound (cheapest per-task energy for the rest),
/// a reliability upper bound (best replicated reliability for the rest) and
/// a deadline bound (fastest remaining tail), all admissible.
OracleResult enumerate_optimal(const Workflow& w, const Platform& p, const OracleLimits& limits = {});

std::string oracle_to_json(const Workflow& w, const Platform& p, const OracleResult& r);

}  // namespace wfsched
