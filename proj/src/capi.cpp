#include "wfsched/wfsched.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "wfsched/bench.hpp"
#include "wfsched/dax.hpp"
#include "wfsched/dynamic.hpp"
#include "wfsched/oracle.hpp"
#include "wfsched/scheduler.hpp"

struct wfs_workflow {
  wfsched::Workflow w;
};

struct wfs_platform {
  wfsched::Platform p;
};

struct wfs_schedule {
  wfsched::Workflow w;
  wfsched::Platform p;
  wfsched::Schedule s;
};

namespace {

thread_local std::string g_last_error;

wfs_status fail(wfs_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
wfs_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const wfsched::WorkflowError& e) {
    const bool parse = e.kind() == wfsched::WorkflowError::Kind::Schema || e.kind() == wfsched::WorkflowError::Kind::Dax;
    return fail(parse ? WFS_ERR_PARSE : WFS_ERR_WORKFLOW, e.what());
  } catch (const wfsched::PlatformError& e) {
    return fail(WFS_ERR_PLATFORM, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(WFS_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(WFS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(WFS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(WFS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(WFS_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <std::size_t N>
void copy_into(char (&dst)[N], std::string_view src) {
  const std::size_t n = std::min(src.size(), N - 1);
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

#define WFS_REQUIRE(cond, msg) \
  if (!(cond)) return fail(WFS_ERR_INVALID_ARGUMENT, msg)

wfsched::Rescheduler parse_rescheduler(const char* name) {
  if (!name) return wfsched::Rescheduler::AsSelected;
  const std::string_view s = name;
  if (s == "none") return wfsched::Rescheduler::None;
  if (s == "lef") return wfsched::Rescheduler::Lef;
  if (s == "ldd") return wfsched::Rescheduler::Ldd;
  if (s == "selected") return wfsched::Rescheduler::AsSelected;
  throw std::invalid_argument("unknown rescheduler '" + std::string(s) + "'");
}

wfsched::SweepSpec parse_sweep_spec(const std::string& text) {
  using nlohmann::json;
  const json doc = json::parse(text);
  if (!doc.is_object()) throw std::invalid_argument("sweep spec must be a JSON object");
  wfsched::SweepSpec spec;
  for (const auto& w : doc.value("workflows", json::array())) spec.workflows.push_back(wfsched::parse_workflow(w.dump()));
  if (!doc.contains("platform")) throw std::invalid_argument("sweep spec needs a platform");
  spec.platform = wfsched::parse_platform(doc.at("platform").dump());
  if (doc.contains("algorithms")) spec.algorithms = doc.at("algorithms").get<std::vector<std::string>>();
  const std::string param = doc.value("param", std::string("df"));
  const auto sp = wfsched::parse_sweep_param(param);
  if (!sp) throw std::invalid_argument("unknown sweep parameter '" + param + "'");
  spec.param = *sp;
  spec.grid = doc.at("grid").get<std::vector<double>>();
  if (doc.contains("seeds")) spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  spec.trials = doc.value("trials", std::size_t{0});
  spec.fraction = doc.value("fraction", 0.75);
  spec.threshold = doc.value("threshold", wfsched::kDefaultThreshold);
  if (doc.contains("df")) spec.deadline_factor = doc.at("df").get<double>();
  if (doc.contains("rw")) spec.reliability = doc.at("rw").get<double>();
  if (doc.contains("generator")) {
    const json& g = doc.at("generator");
    auto& ls = spec.generator;
    ls.name = g.value("name", ls.name);
    ls.layers = g.value("layers", ls.layers);
    ls.edge_probability = g.value("edge_probability", ls.edge_probability);
    ls.max_fanout = g.value("max_fanout", ls.max_fanout);
    ls.wc_lo = g.value("wc_lo", ls.wc_lo);
    ls.wc_hi = g.value("wc_hi", ls.wc_hi);
    ls.deadline_factor = g.value("df", ls.deadline_factor);
    ls.reliability = g.value("rw", ls.reliability);
  }
  spec.workers = doc.value("workers", std::size_t{0});
  spec.timing = doc.value("timing", false);
  return spec;
}

}  // namespace

extern "C" {

const char* wfs_version(void) { return "0.1.0"; }

const char* wfs_last_error(void) { return g_last_error.c_str(); }

void wfs_string_free(char* s) { std::free(s); }

wfs_status wfs_platform_from_json(const char* json, wfs_platform** out) {
  return guarded([&] {
    WFS_REQUIRE(json && out, "null argument");
    *out = new wfs_platform{wfsched::parse_platform(json)};
    return WFS_OK;
  });
}

wfs_status wfs_platform_to_json(const wfs_platform* p, char** out) {
  return guarded([&] {
    WFS_REQUIRE(p && out, "null argument");
    *out = dup_string(wfsched::to_json(p->p));
    return WFS_OK;
  });
}

wfs_status wfs_platform_generate(uint64_t seed, wfs_platform** out) {
  return guarded([&] {
    WFS_REQUIRE(out, "null argument");
    *out = new wfs_platform{wfsched::generate_platform(seed)};
    return WFS_OK;
  });
}

void wfs_platform_free(wfs_platform* p) { delete p; }

wfs_status wfs_workflow_from_json(const char* json, wfs_workflow** out) {
  return guarded([&] {
    WFS_REQUIRE(json && out, "null argument");
    *out = new wfs_workflow{wfsched::parse_workflow(json)};
    return WFS_OK;
  });
}

wfs_status wfs_workflow_from_dax(const char* xml, const wfs_platform* p, const char* name, double deadline_factor,
                                 double reliability, double reference_mips, wfs_workflow** out) {
  return guarded([&] {
    WFS_REQUIRE(xml && p && out, "null argument");
    wfsched::DaxOptions opts;
    if (name) opts.name = name;
    opts.deadline_factor = deadline_factor;
    opts.reliability = reliability;
    opts.reference_mips = reference_mips;
    *out = new wfs_workflow{wfsched::parse_workflow(wfsched::import_dax(xml, opts, p->p))};
    return WFS_OK;
  });
}

wfs_status wfs_workflow_generate(uint64_t seed, const wfs_platform* p, size_t tasks, size_t layers,
                                 double edge_probability, size_t max_fanout, double deadline_factor,
                                 double reliability, wfs_workflow** out) {
  return guarded([&] {
    WFS_REQUIRE(p && out, "null argument");
    wfsched::LayeredSpec spec;
    spec.tasks = tasks;
    spec.layers = layers;
    spec.edge_probability = edge_probability;
    spec.max_fanout = max_fanout;
    spec.deadline_factor = deadline_factor;
    spec.reliability = reliability;
    *out = new wfs_workflow{wfsched::generate_layered(seed, spec, p->p)};
    return WFS_OK;
  });
}

wfs_status wfs_workflow_to_json(const wfs_workflow* w, char** out) {
  return guarded([&] {
    WFS_REQUIRE(w && out, "null argument");
    *out = dup_string(wfsched::to_json(w->w));
    return WFS_OK;
  });
}

wfs_status wfs_workflow_set_deadline_factor(wfs_workflow* w, const wfs_platform* p, double df) {
  return guarded([&] {
    WFS_REQUIRE(w && p, "null argument");
    w->w = wfsched::apply_deadline_factor(w->w, p->p, df);
    return WFS_OK;
  });
}

wfs_status wfs_workflow_remove_deadline(wfs_workflow* w, const wfs_platform* p) {
  return guarded([&] {
    WFS_REQUIRE(w && p, "null argument");
    w->w = wfsched::remove_deadline(w->w, p->p);
    return WFS_OK;
  });
}

wfs_status wfs_workflow_set_reliability(wfs_workflow* w, double reliability) {
  return guarded([&] {
    WFS_REQUIRE(w, "null argument");
    WFS_REQUIRE(reliability >= 0.0 && reliability < 1.0, "reliability requirement must lie in [0, 1)");
    w->w = w->w.with_reliability(reliability);
    return WFS_OK;
  });
}

size_t wfs_workflow_size(const wfs_workflow* w) { return w ? w->w.size() : 0; }

void wfs_workflow_free(wfs_workflow* w) { delete w; }

wfs_status wfs_schedule_run(const wfs_workflow* w, const wfs_platform* p, const char* algorithm, double threshold,
                            wfs_schedule** out) {
  return guarded([&] {
    WFS_REQUIRE(w && p && algorithm && out, "null argument");
    const auto algo = wfsched::parse_algorithm(algorithm);
    WFS_REQUIRE(algo, "unknown algorithm '" + std::string(algorithm) + "'");
    *out = new wfs_schedule{w->w, p->p, wfsched::schedule_workflow(w->w, p->p, *algo, threshold)};
    return WFS_OK;
  });
}

wfs_status wfs_schedule_summary_get(const wfs_schedule* s, wfs_schedule_summary* out) {
  return guarded([&] {
    WFS_REQUIRE(s && out, "null argument");
    *out = {};
    out->energy = s->s.total_energy;
    out->reliability = s->s.reliability;
    out->makespan = s->s.makespan;
    out->feasible = s->s.feasible ? 1 : 0;
    copy_into(out->algorithm, wfsched::to_string(s->s.algorithm));
    copy_into(out->resolved, wfsched::to_string(s->s.resolved));
    copy_into(out->reason, s->s.reason);
    return WFS_OK;
  });
}

wfs_status wfs_schedule_to_json(const wfs_schedule* s, char** out) {
  return guarded([&] {
    WFS_REQUIRE(s && out, "null argument");
    *out = dup_string(wfsched::schedule_to_json(s->w, s->p, s->s));
    return WFS_OK;
  });
}

wfs_status wfs_schedule_check(const wfs_schedule* s, int* all_pass, char** report_json) {
  return guarded([&] {
    WFS_REQUIRE(s && all_pass, "null argument");
    const auto report = wfsched::check_constraints(s->w, s->p, s->s);
    *all_pass = report.all_pass() ? 1 : 0;
    if (report_json) *report_json = dup_string(wfsched::report_to_json(report));
    return WFS_OK;
  });
}

void wfs_schedule_free(wfs_schedule* s) { delete s; }

void wfs_sim_config_init(wfs_sim_config* cfg) {
  if (!cfg) return;
  const wfsched::SimConfig d;
  cfg->seed = d.seed;
  cfg->fraction = d.sample_mean_fraction;
  cfg->trials = 0;
  cfg->failure_injection = 0;
  cfg->worst_case = 0;
  cfg->reschedule = "selected";
  cfg->threshold = d.threshold;
}

wfs_status wfs_simulate(const wfs_schedule* s, const wfs_sim_config* cfg, wfs_sim_summary* summary,
                        char** trace_jsonl) {
  return guarded([&] {
    WFS_REQUIRE(s && cfg && summary, "null argument");
    WFS_REQUIRE(s->s.feasible, "simulation needs a feasible schedule");
    wfsched::SimConfig c;
    c.seed = cfg->seed;
    c.sample_mean_fraction = cfg->fraction;
    c.trials = cfg->trials;
    c.failure_injection = cfg->failure_injection != 0;
    c.worst_case = cfg->worst_case != 0;
    c.reschedule = parse_rescheduler(cfg->reschedule);
    c.threshold = cfg->threshold;
    const auto trace = wfsched::run_dynamic(s->w, s->p, s->s, c);
    *summary = {};
    summary->realized_energy = trace.realized_energy;
    summary->static_energy = trace.static_energy;
    summary->makespan = trace.makespan;
    summary->deadline_met = trace.deadline_met ? 1 : 0;
    summary->success = trace.success ? 1 : 0;
    summary->reschedules = trace.reschedules;
    summary->accepted_reschedules = trace.accepted_reschedules;
    if (c.trials > 0) {
      const auto est = wfsched::run_monte_carlo(s->w, s->p, trace.dispatched, c);
      summary->reliability_estimate = est.estimate;
      summary->reliability_lower = est.lower;
      summary->reliability_upper = est.upper;
    }
    if (trace_jsonl) *trace_jsonl = dup_string(wfsched::trace_to_jsonl(s->w, s->p, trace));
    return WFS_OK;
  });
}

wfs_status wfs_monte_carlo(const wfs_schedule* s, uint64_t seed, size_t trials, double* estimate, double* lower,
                           double* upper) {
  return guarded([&] {
    WFS_REQUIRE(s && estimate, "null argument");
    wfsched::SimConfig c;
    c.seed = seed;
    c.trials = trials;
    const auto est = wfsched::run_monte_carlo(s->w, s->p, s->s, c);
    *estimate = est.estimate;
    if (lower) *lower = est.lower;
    if (upper) *upper = est.upper;
    return WFS_OK;
  });
}

wfs_status wfs_report_row(const wfs_workflow* w, const wfs_platform* p, const char* algorithm, uint64_t seed,
                          size_t trials, double fraction, double threshold, int with_header, char** csv) {
  return guarded([&] {
    WFS_REQUIRE(w && p && algorithm && csv, "null argument");
    const std::string_view a = algorithm;
    WFS_REQUIRE(a == "dy" || wfsched::parse_algorithm(a), "unknown algorithm '" + std::string(a) + "'");
    const auto row = wfsched::make_row(w->w, p->p, a, seed, trials, fraction, threshold, false);
    std::string text = wfsched::rows_to_csv({row});
    if (!with_header) text.erase(0, text.find('\n') + 1);
    *csv = dup_string(text);
    return WFS_OK;
  });
}

wfs_status wfs_oracle_run(const wfs_workflow* w, const wfs_platform* p, uint64_t node_budget, size_t max_tasks,
                          int prune, wfs_oracle_status* status, double* energy, char** result_json) {
  return guarded([&] {
    WFS_REQUIRE(w && p && status, "null argument");
    wfsched::OracleLimits limits;
    if (node_budget) limits.node_budget = node_budget;
    if (max_tasks) limits.max_tasks = max_tasks;
    limits.prune = prune != 0;
    const auto r = wfsched::enumerate_optimal(w->w, p->p, limits);
    switch (r.status) {
      case wfsched::OracleStatus::Optimal: *status = WFS_ORACLE_OPTIMAL; break;
      case wfsched::OracleStatus::Infeasible: *status = WFS_ORACLE_INFEASIBLE; break;
      case wfsched::OracleStatus::BudgetExceeded: *status = WFS_ORACLE_BUDGET_EXCEEDED; break;
    }
    if (energy) *energy = r.optimal_energy;
    if (result_json) *result_json = dup_string(wfsched::oracle_to_json(w->w, p->p, r));
    return WFS_OK;
  });
}

wfs_status wfs_sweep_run(const char* spec_json, char** csv, char** aggregate_csv) {
  return guarded([&] {
    WFS_REQUIRE(spec_json && csv, "null argument");
    const auto spec = parse_sweep_spec(spec_json);
    const auto rows = wfsched::run_sweep(spec);
    std::string body = wfsched::rows_to_csv(rows);
    std::string agg;
    if (aggregate_csv) agg = wfsched::aggregate_csv(rows, spec.param);
    *csv = dup_string(body);
    if (aggregate_csv) *aggregate_csv = dup_string(agg);
    return WFS_OK;
  });
}

}  // extern "C"
