#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfsched {

class PlatformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A VM category offered by the provider. Frequencies are normalized to
/// (0, 1] and kept strictly ascending, so `freqs.back()` is f_max.
struct VmType {
  std::string name;
  double cp = 1.0;     // MIPS at f = 1
  double alpha = 0.0;  // static power, W
  double beta = 1.0;   // dynamic power coefficient, W
  std::vector<double> freqs;
  double r0 = 1e-6;   // failures per second at f_max
  double psi = 3.0;   // hardware reliability coefficient

  double f_max() const { return freqs.back(); }
  double f_min() const { return freqs.front(); }
  std::size_t levels() const { return freqs.size(); }
};

/// A (VM type, frequency level) pair, by index into a Platform.
struct ExecContext {
  std::size_t vm = 0;
  std::size_t level = 0;

  friend bool operator==(const ExecContext&, const ExecContext&) = default;
};

class Platform {
 public:
  Platform() = default;
  explicit Platform(std::vector<VmType> vms);

  std::span<const VmType> vms() const { return vms_; }
  const VmType& vm(std::size_t i) const { return vms_.at(i); }
  std::size_t size() const { return vms_.size(); }

  const VmType& vm_of(ExecContext c) const { return vms_[c.vm]; }
  double freq(ExecContext c) const { return vms_[c.vm].freqs[c.level]; }
  bool valid(ExecContext c) const {
    return c.vm < vms_.size() && c.level < vms_[c.vm].freqs.size();
  }

  /// Index of the VM type with the highest compute power (first on ties).
  std::size_t best_vm() const { return best_; }
  /// Best VM at its maximum frequency.
  ExecContext fastest() const {
    return {best_, vms_[best_].freqs.size() - 1};
  }

 private:
  std::vector<VmType> vms_;
  std::size_t best_ = 0;
};

void validate(const VmType& vm);

Platform parse_platform(std::string_view json_text);
std::string to_json(const Platform& p);

// ---- energy / reliability kernel -----------------------------------------

double power_draw(const VmType& vm, double f);
double power_draw(const Platform& p, ExecContext c);

double execution_time(double wc, const VmType& vm, double f);
double execution_time(double wc, const Platform& p, ExecContext c);

double task_energy(double wc, const Platform& p, ExecContext c);

/// Energy spent per MI at frequency f; the selection objective.
double energy_per_mi(const VmType& vm, double f);

double failure_rate(const VmType& vm, double f);
double failure_rate(const Platform& p, ExecContext c);

/// Single-copy reliability exp(-r * tau), or 1 - (1 - R)^2 when replicated.
double task_reliability(double wc, const Platform& p, ExecContext c, bool replicated);

/// log of task_reliability, computed without cancellation near R = 1.
double task_log_reliability(double wc, const Platform& p, ExecContext c, bool replicated);

/// Probability that a single copy fails, 1 - exp(-r * tau), computed via expm1.
double copy_failure_probability(double wc, const Platform& p, ExecContext c);

/// Product of per-task effective reliabilities, accumulated in log-space.
double workflow_reliability(std::span<const double> per_task);

double critical_frequency(const VmType& vm);

}  // namespace wfsched
