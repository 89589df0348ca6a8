#include "wfsched/dax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace wfsched {

namespace pt = boost::property_tree;
using Kind = WorkflowError::Kind;

namespace {

double parse_runtime(const std::string& job_id, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw WorkflowError(Kind::Dax, "job '" + job_id + "' has unparseable runtime '" + text + "'");
  }
  return v;
}

}  // namespace

std::string import_dax(std::string_view xml, const DaxOptions& opts, const Platform& platform) {
  if (!(opts.reference_mips > 0)) throw WorkflowError(Kind::Dax, "reference MIPS must be > 0");
  if (!(opts.deadline_factor >= 1.0)) throw WorkflowError(Kind::Dax, "deadline factor must be >= 1");

  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw WorkflowError(Kind::Dax, std::string("unparseable DAX: ") + e.what());
  }
  auto root = tree.get_child_optional("adag");
  if (!root) throw WorkflowError(Kind::Dax, "DAX document has no <adag> root");

  std::vector<Workflow::TaskSpec> tasks;
  std::vector<Workflow::EdgeSpec> edges;
  for (const auto& [tag, node] : *root) {
    if (tag == "job") {
      auto id = node.get_optional<std::string>("<xmlattr>.id");
      if (!id) throw WorkflowError(Kind::Dax, "<job> without id attribute");
      auto runtime = node.get_optional<std::string>("<xmlattr>.runtime");
      if (!runtime) throw WorkflowError(Kind::Dax, "job '" + *id + "' lacks a runtime attribute");
      tasks.push_back({*id, parse_runtime(*id, *runtime) * opts.reference_mips});
    } else if (tag == "child") {
      auto child = node.get_optional<std::string>("<xmlattr>.ref");
      if (!child) throw WorkflowError(Kind::Dax, "<child> without ref attribute");
      for (const auto& [ptag, pnode] : node) {
        if (ptag != "parent") continue;
        auto parent = pnode.get_optional<std::string>("<xmlattr>.ref");
        if (!parent) throw WorkflowError(Kind::Dax, "<parent> without ref attribute");
        edges.emplace_back(*parent, *child);
      }
    }
  }
  if (tasks.empty()) throw WorkflowError(Kind::Dax, "DAX document contains no jobs");

  // Placeholder deadline; replaced once the critical path is known.
  Workflow w(opts.name, std::move(tasks), std::move(edges), opts.arrival, opts.arrival + 1.0,
             opts.reliability);
  return to_json(apply_deadline_factor(w, platform, opts.deadline_factor));
}

Workflow apply_deadline_factor(const Workflow& w, const Platform& p, double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    throw WorkflowError(Kind::Schema, "deadline factor must be finite and >= 1");
  }
  return w.with_deadline(w.arrival() + df * critical_path_time(w, p));
}

Workflow remove_deadline(const Workflow& w, const Platform& p) {
  double slowest_rate = std::numeric_limits<double>::infinity();
  for (const auto& vm : p.vms()) slowest_rate = std::min(slowest_rate, vm.cp * vm.f_min());
  double max_wc = 0.0;
  for (const auto& t : w.tasks()) max_wc = std::max(max_wc, t.wc);
  return w.with_deadline(w.arrival() + static_cast<double>(w.size()) * max_wc / slowest_rate);
}

}  // namespace wfsched
