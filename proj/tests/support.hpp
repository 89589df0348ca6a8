#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wfsched/dax.hpp"
#include "wfsched/platform.hpp"
#include "wfsched/workflow.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(WFS_TEST_DATA) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline wfsched::Workflow load_workflow(const std::string& name) {
  return wfsched::parse_workflow(read_text(data_path(name)));
}

inline wfsched::Platform load_platform(const std::string& name) {
  return wfsched::parse_platform(read_text(data_path(name)));
}

inline wfsched::Workflow load_montage(const wfsched::Platform& p, double df = 1.5, double rw = 0.95) {
  wfsched::DaxOptions o;
  o.name = "montage50";
  o.deadline_factor = df;
  o.reliability = rw;
  return wfsched::parse_workflow(wfsched::import_dax(read_text(data_path("montage50.dax")), o, p));
}

}  // namespace testing
