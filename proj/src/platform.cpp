#include "wfsched/platform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

namespace wfsched {

using nlohmann::json;

void validate(const VmType& vm) {
  auto fail = [&](const std::string& why) {
    throw PlatformError("vm type '" + vm.name + "': " + why);
  };
  if (vm.name.empty()) throw PlatformError("vm type with empty name");
  if (!(vm.cp > 0)) fail("cp must be > 0");
  if (!(vm.alpha >= 0)) fail("alpha must be >= 0");
  if (!(vm.beta > 0)) fail("beta must be > 0");
  if (!(vm.r0 > 0)) fail("r0 must be > 0");
  if (!(vm.psi > 0)) fail("psi must be > 0");
  if (vm.freqs.empty()) fail("at least one frequency level required");
  for (std::size_t k = 0; k < vm.freqs.size(); ++k) {
    const double f = vm.freqs[k];
    if (!(f > 0 && f <= 1)) fail("frequencies must lie in (0, 1]");
    if (k > 0 && !(f > vm.freqs[k - 1])) fail("frequencies must be strictly ascending");
  }
}

Platform::Platform(std::vector<VmType> vms) : vms_(std::move(vms)) {
  if (vms_.empty()) throw PlatformError("platform needs at least one vm type");
  std::set<std::string> names;
  for (const auto& vm : vms_) {
    validate(vm);
    if (!names.insert(vm.name).second) {
      throw PlatformError("duplicate vm type name '" + vm.name + "'");
    }
  }
  for (std::size_t i = 1; i < vms_.size(); ++i) {
    if (vms_[i].cp > vms_[best_].cp) best_ = i;
  }
}

Platform parse_platform(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw PlatformError(std::string("malformed platform JSON: ") + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("vm_types")) throw PlatformError("platform document lacks 'vm_types'");
    list = &doc.at("vm_types");
  }
  if (!list->is_array()) throw PlatformError("'vm_types' must be an array");

  std::vector<VmType> vms;
  try {
    for (const auto& v : *list) {
      VmType vm;
      vm.name = v.at("name").get<std::string>();
      vm.cp = v.at("cp").get<double>();
      vm.alpha = v.at("alpha").get<double>();
      vm.beta = v.at("beta").get<double>();
      vm.freqs = v.at("freqs").get<std::vector<double>>();
      vm.r0 = v.at("r0").get<double>();
      vm.psi = v.at("psi").get<double>();
      vms.push_back(std::move(vm));
    }
  } catch (const json::exception& e) {
    throw PlatformError(std::string("platform schema violation: ") + e.what());
  }
  return Platform(std::move(vms));
}

std::string to_json(const Platform& p) {
  json list = json::array();
  for (const auto& vm : p.vms()) {
    list.push_back({{"name", vm.name},
                    {"cp", vm.cp},
                    {"alpha", vm.alpha},
                    {"beta", vm.beta},
                    {"freqs", vm.freqs},
                    {"r0", vm.r0},
                    {"psi", vm.psi}});
  }
  return json{{"vm_types", list}}.dump(2);
}

double power_draw(const VmType& vm, double f) { return vm.alpha + vm.beta * f * f * f; }

double power_draw(const Platform& p, ExecContext c) { return power_draw(p.vm_of(c), p.freq(c)); }

double execution_time(double wc, const VmType& vm, double f) { return wc / (vm.cp * f); }

double execution_time(double wc, const Platform& p, ExecContext c) {
  return execution_time(wc, p.vm_of(c), p.freq(c));
}

double task_energy(double wc, const Platform& p, ExecContext c) {
  return power_draw(p, c) * execution_time(wc, p, c);
}

double energy_per_mi(const VmType& vm, double f) { return power_draw(vm, f) / (vm.cp * f); }

double failure_rate(const VmType& vm, double f) {
  // With a single level the exponent is 0/0; f_max is the only valid point.
  if (vm.freqs.size() < 2) return vm.r0;
  const double span = vm.f_max() - vm.f_min();
  return vm.r0 * std::pow(10.0, vm.psi * (vm.f_max() - f) / span);
}

double failure_rate(const Platform& p, ExecContext c) { return failure_rate(p.vm_of(c), p.freq(c)); }

double copy_failure_probability(double wc, const Platform& p, ExecContext c) {
  return -std::expm1(-failure_rate(p, c) * execution_time(wc, p, c));
}

double task_log_reliability(double wc, const Platform& p, ExecContext c, bool replicated) {
  const double hazard = failure_rate(p, c) * execution_time(wc, p, c);
  if (!replicated) return -hazard;
  const double q = -std::expm1(-hazard);
  return std::log1p(-q * q);
}

double task_reliability(double wc, const Platform& p, ExecContext c, bool replicated) {
  return std::exp(task_log_reliability(wc, p, c, replicated));
}

double workflow_reliability(std::span<const double> per_task) {
  double log_sum = 0.0;
  for (double r : per_task) log_sum += std::log(r);
  return std::exp(log_sum);
}

double critical_frequency(const VmType& vm) { return std::cbrt(vm.alpha / (2.0 * vm.beta)); }

}  // namespace wfsched
