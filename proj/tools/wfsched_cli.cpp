// wfsched command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfsched/wfsched.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(wfs_status st, const std::string& what) {
  if (st != WFS_OK) throw CliError(what + ": " + wfs_last_error());
}

struct StringDeleter {
  void operator()(char* s) const { wfs_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct WorkflowDeleter {
  void operator()(wfs_workflow* w) const { wfs_workflow_free(w); }
};
struct PlatformDeleter {
  void operator()(wfs_platform* p) const { wfs_platform_free(p); }
};
struct ScheduleDeleter {
  void operator()(wfs_schedule* s) const { wfs_schedule_free(s); }
};
using WorkflowPtr = std::unique_ptr<wfs_workflow, WorkflowDeleter>;
using PlatformPtr = std::unique_ptr<wfs_platform, PlatformDeleter>;
using SchedulePtr = std::unique_ptr<wfs_schedule, ScheduleDeleter>;

std::string take(char* s) {
  CString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes via a temporary file so a failed run never leaves a partial output.
void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError("cannot write '" + path + "'");
    out << text;
    if (!out) throw CliError("write to '" + path + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw CliError("cannot write '" + path + "'");
  }
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, text);
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

bool is_dax(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".xml" || ext == ".dax";
}

struct Inputs {
  std::string workflow;
  std::string platform;
  std::optional<double> df;
  std::optional<double> rw;
  bool no_deadline = false;
  double mips = 1000.0;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool workflow_required = true) {
  auto* wf = cmd->add_option("--workflow", in.workflow, "workflow JSON or Pegasus DAX file");
  if (workflow_required) wf->required();
  cmd->add_option("--platform", in.platform, "VM catalog JSON (default: $WFSCHED_PLATFORM)");
  cmd->add_option("--df", in.df, "deadline factor applied at load time")->check(CLI::Range(1.0, 1e9));
  cmd->add_option("--rw", in.rw, "reliability requirement")->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--no-deadline", in.no_deadline, "effectively unbounded deadline");
  cmd->add_option("--mips", in.mips, "reference MIPS for DAX runtimes")->check(CLI::PositiveNumber);
}

PlatformPtr load_platform(const Inputs& in) {
  std::string path = in.platform;
  if (path.empty()) {
    if (const char* env = std::getenv("WFSCHED_PLATFORM")) path = env;
  }
  if (path.empty()) throw CliError("no platform given (use --platform or WFSCHED_PLATFORM)");
  const std::string text = read_file(path);
  wfs_platform* p = nullptr;
  check(wfs_platform_from_json(text.c_str(), &p), "platform '" + path + "'");
  return PlatformPtr(p);
}

WorkflowPtr load_workflow(const std::string& path, const Inputs& in, const wfs_platform* p) {
  const std::string text = read_file(path);
  wfs_workflow* w = nullptr;
  if (is_dax(path)) {
    const std::string name = std::filesystem::path(path).stem().string();
    check(wfs_workflow_from_dax(text.c_str(), p, name.c_str(), in.df.value_or(1.5), in.rw.value_or(0.95), in.mips, &w),
          "workflow '" + path + "'");
  } else {
    check(wfs_workflow_from_json(text.c_str(), &w), "workflow '" + path + "'");
  }
  WorkflowPtr owned(w);
  if (in.df && !is_dax(path)) check(wfs_workflow_set_deadline_factor(w, p, *in.df), "--df");
  if (in.rw && !is_dax(path)) check(wfs_workflow_set_reliability(w, *in.rw), "--rw");
  if (in.no_deadline) check(wfs_workflow_remove_deadline(w, p), "--no-deadline");
  return owned;
}

SchedulePtr run_schedule(const wfs_workflow* w, const wfs_platform* p, const std::string& algo, double th) {
  wfs_schedule* s = nullptr;
  check(wfs_schedule_run(w, p, algo.c_str(), th, &s), "schedule");
  return SchedulePtr(s);
}

wfs_schedule_summary summary_of(const wfs_schedule* s) {
  wfs_schedule_summary sum{};
  check(wfs_schedule_summary_get(s, &sum), "summary");
  return sum;
}

// ---- subcommands -------------------------------------------------------------

int cmd_validate(const Inputs& in) {
  PlatformPtr p = load_platform(in);
  WorkflowPtr w = load_workflow(in.workflow, in, p.get());
  SchedulePtr s = run_schedule(w.get(), p.get(), "bcp", 0.75);
  const auto sum = summary_of(s.get());
  if (sum.feasible) {
    std::cout << "feasible: bcp makespan " << fixed(sum.makespan) << ", reliability " << fixed(sum.reliability)
              << '\n';
    return kExitOk;
  }
  std::cout << "rejected: " << sum.reason << '\n';
  return kExitInfeasible;
}

struct ScheduleArgs {
  std::string algo = "asmfr";
  double th = 0.75;
  std::string out;
};

int cmd_schedule(const Inputs& in, const ScheduleArgs& a) {
  PlatformPtr p = load_platform(in);
  WorkflowPtr w = load_workflow(in.workflow, in, p.get());
  SchedulePtr s = run_schedule(w.get(), p.get(), a.algo, a.th);
  const auto sum = summary_of(s.get());
  char* json = nullptr;
  check(wfs_schedule_to_json(s.get(), &json), "schedule output");
  emit(a.out, take(json));
  std::ostream& log = a.out.empty() ? std::cerr : std::cout;
  log << "algorithm=" << sum.algorithm << " resolved=" << sum.resolved << " energy=" << fixed(sum.energy)
      << " makespan=" << fixed(sum.makespan) << " reliability=" << fixed(sum.reliability)
      << " feasible=" << (sum.feasible ? "true" : "false");
  if (!sum.feasible) log << " reason=\"" << sum.reason << '"';
  log << '\n';
  return sum.feasible ? kExitOk : kExitInfeasible;
}

struct SimulateArgs {
  std::string algo = "asmfr";
  double th = 0.75;
  std::vector<std::uint64_t> seeds{1};
  std::size_t trials = 0;
  double fraction = 0.75;
  bool failure_injection = false;
  bool worst_case = false;
  std::string reschedule = "selected";
  std::string out;
  std::string csv;
};

int cmd_simulate(const Inputs& in, const SimulateArgs& a) {
  PlatformPtr p = load_platform(in);
  WorkflowPtr w = load_workflow(in.workflow, in, p.get());
  SchedulePtr s = run_schedule(w.get(), p.get(), a.algo, a.th);
  const auto sum = summary_of(s.get());
  if (!sum.feasible) {
    std::cout << "rejected: " << sum.reason << '\n';
    return kExitInfeasible;
  }
  std::string trace;
  std::string csv;
  bool all_met = true;
  for (std::size_t i = 0; i < a.seeds.size(); ++i) {
    wfs_sim_config cfg;
    wfs_sim_config_init(&cfg);
    cfg.seed = a.seeds[i];
    cfg.fraction = a.fraction;
    cfg.trials = a.trials;
    cfg.failure_injection = a.failure_injection ? 1 : 0;
    cfg.worst_case = a.worst_case ? 1 : 0;
    cfg.reschedule = a.reschedule.c_str();
    cfg.threshold = a.th;
    wfs_sim_summary ss{};
    char* jsonl = nullptr;
    check(wfs_simulate(s.get(), &cfg, &ss, &jsonl), "simulate");
    trace += take(jsonl);
    all_met = all_met && ss.deadline_met && ss.success;

    std::ostream& log = a.out.empty() ? std::cerr : std::cout;
    log << "seed=" << cfg.seed << " static_energy=" << fixed(ss.static_energy)
        << " realized_energy=" << fixed(ss.realized_energy) << " makespan=" << fixed(ss.makespan)
        << " deadline_met=" << (ss.deadline_met ? "true" : "false") << " success=" << (ss.success ? "true" : "false");
    if (a.trials > 0) {
      log << " reliability=" << fixed(ss.reliability_estimate) << " [" << fixed(ss.reliability_lower) << ", "
          << fixed(ss.reliability_upper) << "]";
    }
    log << '\n';

    if (!a.csv.empty()) {
      char* row = nullptr;
      check(wfs_report_row(w.get(), p.get(), "dy", cfg.seed, a.trials, a.fraction, a.th, i == 0 ? 1 : 0, &row),
            "report row");
      csv += take(row);
    }
  }
  emit(a.out, trace);
  if (!a.csv.empty()) write_file(a.csv, csv);
  return all_met ? kExitOk : kExitInfeasible;
}

struct SweepArgs {
  std::vector<std::string> workflows;
  std::string param = "df";
  std::vector<double> grid;
  std::vector<std::string> algos{"bcp", "lef", "ldd", "asmfr", "dy"};
  std::vector<std::uint64_t> seeds{1};
  std::size_t trials = 0;
  double fraction = 0.75;
  double th = 0.75;
  std::size_t workers = 0;
  std::size_t layers = 6;
  double edge_probability = 0.2;
  std::size_t max_fanout = 12;
  bool timing = false;
  std::string out;
};

std::string aggregate_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension();
  return p.string() + ".agg.csv";
}

int cmd_sweep(const Inputs& in, const SweepArgs& a) {
  using nlohmann::json;
  PlatformPtr p = load_platform(in);
  char* pjson = nullptr;
  check(wfs_platform_to_json(p.get(), &pjson), "platform");

  json spec;
  spec["platform"] = json::parse(take(pjson));
  spec["workflows"] = json::array();
  Inputs load = in;
  if (a.param == "df") load.df.reset();
  if (a.param == "rw") load.rw.reset();
  for (const auto& path : a.workflows) {
    WorkflowPtr w = load_workflow(path, load, p.get());
    char* wjson = nullptr;
    check(wfs_workflow_to_json(w.get(), &wjson), "workflow");
    spec["workflows"].push_back(json::parse(take(wjson)));
  }
  spec["algorithms"] = a.algos;
  spec["param"] = a.param;
  spec["grid"] = a.grid;
  spec["seeds"] = a.seeds;
  spec["trials"] = a.trials;
  spec["fraction"] = a.fraction;
  spec["threshold"] = a.th;
  if (load.df && !in.no_deadline) spec["df"] = *load.df;
  if (load.rw) spec["rw"] = *load.rw;
  spec["generator"] = {{"layers", a.layers},
                       {"edge_probability", a.edge_probability},
                       {"max_fanout", a.max_fanout},
                       {"df", in.df.value_or(1.5)},
                       {"rw", in.rw.value_or(0.95)}};
  spec["workers"] = a.workers;
  spec["timing"] = a.timing;

  char* csv = nullptr;
  char* agg = nullptr;
  check(wfs_sweep_run(spec.dump().c_str(), &csv, &agg), "sweep");
  const std::string body = take(csv);
  const std::string summary = take(agg);
  if (a.out.empty() || a.out == "-") {
    std::cout << body;
  } else {
    write_file(a.out, body);
    write_file(aggregate_path(a.out), summary);
    std::cout << "wrote " << a.out << " and " << aggregate_path(a.out) << '\n';
  }
  return kExitOk;
}

struct OracleArgs {
  std::uint64_t budget = 0;
  std::size_t max_tasks = 0;
  bool no_prune = false;
  std::string out;
};

int cmd_oracle(const Inputs& in, const OracleArgs& a) {
  PlatformPtr p = load_platform(in);
  WorkflowPtr w = load_workflow(in.workflow, in, p.get());
  wfs_oracle_status status{};
  double energy = 0.0;
  char* json = nullptr;
  check(wfs_oracle_run(w.get(), p.get(), a.budget, a.max_tasks, a.no_prune ? 0 : 1, &status, &energy, &json),
        "oracle");
  emit(a.out, take(json));
  std::ostream& log = a.out.empty() ? std::cerr : std::cout;
  switch (status) {
    case WFS_ORACLE_OPTIMAL: log << "status=optimal energy=" << fixed(energy) << '\n'; return kExitOk;
    case WFS_ORACLE_BUDGET_EXCEEDED: log << "status=budget-exceeded\n"; return kExitOk;
    case WFS_ORACLE_INFEASIBLE: log << "status=infeasible\n"; return kExitInfeasible;
  }
  return kExitError;
}

struct GenArgs {
  std::uint64_t seed = 1;
  std::size_t tasks = 50;
  std::size_t layers = 6;
  double edge_probability = 0.2;
  std::size_t max_fanout = 12;
  std::string dax;
  std::string out;
};

int cmd_gen_platform(const GenArgs& a) {
  wfs_platform* p = nullptr;
  check(wfs_platform_generate(a.seed, &p), "generate platform");
  PlatformPtr owned(p);
  char* json = nullptr;
  check(wfs_platform_to_json(p, &json), "platform");
  emit(a.out, take(json));
  return kExitOk;
}

int cmd_gen_workflow(const Inputs& in, const GenArgs& a) {
  PlatformPtr p = load_platform(in);
  wfs_workflow* w = nullptr;
  check(wfs_workflow_generate(a.seed, p.get(), a.tasks, a.layers, a.edge_probability, a.max_fanout,
                              in.df.value_or(1.5), in.rw.value_or(0.95), &w),
        "generate workflow");
  WorkflowPtr owned(w);
  char* json = nullptr;
  check(wfs_workflow_to_json(w, &json), "workflow");
  emit(a.out, take(json));
  return kExitOk;
}

int cmd_gen_dax(const Inputs& in, const GenArgs& a) {
  PlatformPtr p = load_platform(in);
  WorkflowPtr w = load_workflow(a.dax, in, p.get());
  char* json = nullptr;
  check(wfs_workflow_to_json(w.get(), &json), "workflow");
  emit(a.out, take(json));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware, reliability-constrained workflow scheduling on DVFS-capable VMs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wfs_version());

  Inputs in;

  auto* validate = app.add_subcommand("validate", "check BCP feasibility of a workflow");
  add_inputs(validate, in);

  ScheduleArgs sched;
  auto* schedule = app.add_subcommand("schedule", "build a static schedule");
  add_inputs(schedule, in);
  schedule->add_option("--algo", sched.algo, "bcp | lef | ldd | asmfr")
      ->check(CLI::IsMember({"bcp", "lef", "ldd", "asmfr"}));
  schedule->add_option("--th", sched.th, "ASMFR fan-out threshold")->check(CLI::NonNegativeNumber);
  schedule->add_option("--out", sched.out, "schedule JSON output (default stdout)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "rolling-horizon execution with sampled task times");
  add_inputs(simulate, in);
  simulate->add_option("--algo", sim.algo, "initial static algorithm")
      ->check(CLI::IsMember({"bcp", "lef", "ldd", "asmfr"}));
  simulate->add_option("--th", sim.th, "ASMFR fan-out threshold")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim.seeds, "seed (repeatable)");
  simulate->add_option("--trials", sim.trials, "Monte-Carlo reliability trials");
  simulate->add_option("--fraction", sim.fraction, "mean actual/worst-case ratio")->check(CLI::Range(1e-9, 1.0));
  simulate->add_flag("--failure-injection", sim.failure_injection, "inject transient failures");
  simulate->add_flag("--worst-case", sim.worst_case, "every task runs its full worst-case time");
  simulate->add_option("--reschedule", sim.reschedule, "none | lef | ldd | selected")
      ->check(CLI::IsMember({"none", "lef", "ldd", "selected"}));
  simulate->add_option("--out", sim.out, "event trace (JSON lines, default stdout)");
  simulate->add_option("--csv", sim.csv, "report rows CSV");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  sweep->add_option("--workflow", sw.workflows, "workflow file (repeatable)");
  sweep->add_option("--platform", in.platform, "VM catalog JSON (default: $WFSCHED_PLATFORM)");
  sweep->add_option("--df", in.df, "deadline factor when df is not swept")->check(CLI::Range(1.0, 1e9));
  sweep->add_option("--rw", in.rw, "reliability requirement when R_w is not swept")->check(CLI::Range(0.0, 1.0));
  sweep->add_flag("--no-deadline", in.no_deadline, "effectively unbounded deadline");
  sweep->add_option("--mips", in.mips, "reference MIPS for DAX runtimes")->check(CLI::PositiveNumber);
  sweep->add_option("--param", sw.param, "df | rw | tasks | th")->check(CLI::IsMember({"df", "rw", "tasks", "th"}));
  sweep->add_option("--grid", sw.grid, "grid values")->required()->delimiter(',');
  sweep->add_option("--algo", sw.algos, "algorithms (bcp, lef, ldd, asmfr, dy)")->delimiter(',');
  sweep->add_option("--seed", sw.seeds, "seeds")->delimiter(',');
  sweep->add_option("--trials", sw.trials, "Monte-Carlo trials per row");
  sweep->add_option("--fraction", sw.fraction, "mean actual/worst-case ratio")->check(CLI::Range(1e-9, 1.0));
  sweep->add_option("--th", sw.th, "ASMFR fan-out threshold")->check(CLI::NonNegativeNumber);
  sweep->add_option("--workers", sw.workers, "worker threads (0 = all cores)");
  sweep->add_option("--layers", sw.layers, "generator layers for task-count sweeps");
  sweep->add_option("--edge-prob", sw.edge_probability, "generator extra-edge probability");
  sweep->add_option("--max-fanout", sw.max_fanout, "generator fan-out cap");
  sweep->add_flag("--timing", sw.timing, "record wall_time_ms (makes output run-dependent)");
  sweep->add_option("--out", sw.out, "CSV output; aggregates go to <out>.agg.csv");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "exact minimum-energy schedule for small instances");
  add_inputs(oracle, in);
  oracle->add_option("--budget", orc.budget, "node budget (0 = default)");
  oracle->add_option("--max-tasks", orc.max_tasks, "task limit (0 = default)");
  oracle->add_flag("--no-prune", orc.no_prune, "plain enumeration");
  oracle->add_option("--out", orc.out, "result JSON (default stdout)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate inputs");
  gen_cmd->require_subcommand(1);
  auto* gen_platform = gen_cmd->add_subcommand("platform", "random VM catalog");
  gen_platform->add_option("--seed", gen.seed, "seed");
  gen_platform->add_option("--out", gen.out, "output (default stdout)");
  auto* gen_workflow = gen_cmd->add_subcommand("workflow", "layered random workflow");
  gen_workflow->add_option("--seed", gen.seed, "seed");
  gen_workflow->add_option("--platform", in.platform, "VM catalog JSON (default: $WFSCHED_PLATFORM)");
  gen_workflow->add_option("--tasks", gen.tasks, "task count");
  gen_workflow->add_option("--layers", gen.layers, "layers");
  gen_workflow->add_option("--edge-prob", gen.edge_probability, "extra-edge probability");
  gen_workflow->add_option("--max-fanout", gen.max_fanout, "fan-out cap");
  gen_workflow->add_option("--df", in.df, "deadline factor")->check(CLI::Range(1.0, 1e9));
  gen_workflow->add_option("--rw", in.rw, "reliability requirement")->check(CLI::Range(0.0, 1.0));
  gen_workflow->add_option("--out", gen.out, "output (default stdout)");
  auto* gen_dax = gen_cmd->add_subcommand("dax", "convert a Pegasus DAX to workflow JSON");
  gen_dax->add_option("--dax", gen.dax, "DAX file")->required();
  gen_dax->add_option("--platform", in.platform, "VM catalog JSON (default: $WFSCHED_PLATFORM)");
  gen_dax->add_option("--df", in.df, "deadline factor")->check(CLI::Range(1.0, 1e9));
  gen_dax->add_option("--rw", in.rw, "reliability requirement")->check(CLI::Range(0.0, 1.0));
  gen_dax->add_option("--mips", in.mips, "reference MIPS for runtimes")->check(CLI::PositiveNumber);
  gen_dax->add_option("--out", gen.out, "output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (*validate) return cmd_validate(in);
    if (*schedule) return cmd_schedule(in, sched);
    if (*simulate) return cmd_simulate(in, sim);
    if (*sweep) {
      if (sw.param != "tasks" && sw.workflows.empty()) throw CliError("sweep needs --workflow");
      return cmd_sweep(in, sw);
    }
    if (*oracle) return cmd_oracle(in, orc);
    if (*gen_platform) return cmd_gen_platform(gen);
    if (*gen_workflow) return cmd_gen_workflow(in, gen);
    if (*gen_dax) return cmd_gen_dax(in, gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
