#pragma once

#include <string>
#include <string_view>

#include "wfsched/platform.hpp"
#include "wfsched/workflow.hpp"

namespace wfsched {

struct DaxOptions {
  std::string name = "dax";
  double arrival = 0.0;
  double deadline_factor = 1.5;
  double reliability = 0.95;
  double reference_mips = 1000.0;  // runtime seconds -> MI
};

/// Converts a Pegasus DAX 3.x document (<job runtime=...>, <child><parent>)
/// into canonical workflow JSON. The deadline is arrival + df times the
/// critical-path time on the platform's fastest context.
std::string import_dax(std::string_view xml, const DaxOptions& opts, const Platform& platform);

/// Sets D_w = A_w + df * critical-path time.
Workflow apply_deadline_factor(const Workflow& w, const Platform& p, double df);

/// Effectively unbounded deadline: A_w + N * (slowest possible task time).
Workflow remove_deadline(const Workflow& w, const Platform& p);

}  // namespace wfsched
