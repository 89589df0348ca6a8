#include "wfsched/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "wfsched/dax.hpp"

namespace wfsched {

namespace {

double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

std::vector<double> normalized_levels(RngStream& rng, std::size_t count, double lo, double hi) {
  std::vector<double> ghz;
  while (ghz.size() < count) {
    const double g = rng.uniform(lo, hi);
    if (std::find(ghz.begin(), ghz.end(), g) == ghz.end()) ghz.push_back(g);
  }
  std::sort(ghz.begin(), ghz.end());
  const double top = ghz.back();
  for (double& g : ghz) g /= top;
  ghz.back() = 1.0;
  return ghz;
}

std::string task_name(std::size_t i) { return "t" + std::to_string(i + 1); }

}  // namespace

Platform generate_platform(std::uint64_t seed, const PlatformGenSpec& spec) {
  if (spec.min_types == 0 || spec.min_types > spec.max_types || spec.min_levels == 0 ||
      spec.min_levels > spec.max_levels) {
    throw std::invalid_argument("bad platform generator ranges");
  }
  RngStream rng = make_stream(seed, StreamKind::Generator, 0);
  const auto types = static_cast<std::size_t>(
      rng.integer(static_cast<std::int64_t>(spec.min_types), static_cast<std::int64_t>(spec.max_types)));
  std::vector<VmType> vms;
  for (std::size_t l = 0; l < types; ++l) {
    VmType vm;
    vm.name = "vm" + std::to_string(l + 1);
    vm.cp = rng.uniform(spec.cp_lo, spec.cp_hi);
    vm.alpha = rng.uniform(spec.alpha_lo, spec.alpha_hi);
    vm.beta = rng.uniform(spec.beta_lo, spec.beta_hi);
    const auto levels = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(spec.min_levels), static_cast<std::int64_t>(spec.max_levels)));
    vm.freqs = normalized_levels(rng, levels, spec.ghz_lo, spec.ghz_hi);
    vm.psi = rng.uniform(spec.psi_lo, spec.psi_hi);
    vm.r0 = log_uniform(rng, spec.r0_lo, spec.r0_hi);
    vms.push_back(std::move(vm));
  }
  return Platform(std::move(vms));
}

Workflow generate_layered(std::uint64_t seed, const LayeredSpec& spec, const Platform& p) {
  if (spec.tasks < 2) throw std::invalid_argument("layered workflow needs at least two tasks");
  if (spec.layers < 2 || spec.layers > spec.tasks) throw std::invalid_argument("layers must lie in [2, tasks]");
  if (spec.max_fanout == 0) throw std::invalid_argument("max_fanout must be positive");
  if (!(spec.wc_lo > 0.0) || spec.wc_hi < spec.wc_lo) throw std::invalid_argument("bad wc range");
  RngStream rng = make_stream(seed, StreamKind::Generator, 1);

  // One entry task, then the rest spread over the remaining layers with at
  // least one task each. A layer never outgrows what its parents can feed.
  std::vector<std::size_t> layer_size(spec.layers, 1);
  for (std::size_t extra = spec.tasks - spec.layers; extra > 0; --extra) {
    std::vector<std::size_t> room;
    for (std::size_t k = 1; k < spec.layers; ++k) {
      if (layer_size[k] < layer_size[k - 1] * spec.max_fanout) room.push_back(k);
    }
    if (room.empty()) throw std::invalid_argument("too many tasks for the layer count and max_fanout");
    ++layer_size[room[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(room.size()) - 1))]];
  }
  std::vector<std::vector<std::size_t>> layer;
  std::size_t next = 0;
  for (std::size_t s : layer_size) {
    layer.emplace_back();
    for (std::size_t i = 0; i < s; ++i) layer.back().push_back(next++);
  }

  std::vector<Workflow::TaskSpec> tasks;
  for (std::size_t i = 0; i < spec.tasks; ++i) tasks.push_back({task_name(i), rng.uniform(spec.wc_lo, spec.wc_hi)});

  std::vector<std::size_t> fanout(spec.tasks, 0);
  std::vector<Workflow::EdgeSpec> edges;
  for (std::size_t k = 1; k < layer.size(); ++k) {
    const auto& parents = layer[k - 1];
    std::size_t spare = parents.size() * spec.max_fanout;
    for (std::size_t i = 0; i < layer[k].size(); ++i) {
      const std::size_t child = layer[k][i];
      const std::size_t still_needed = layer[k].size() - i - 1;
      // Mandatory parent among those with spare fan-out. Extra edges only use
      // capacity beyond what the rest of the layer still needs.
      std::vector<std::size_t> open;
      for (std::size_t q : parents) {
        if (fanout[q] < spec.max_fanout) open.push_back(q);
      }
      if (open.empty()) throw std::logic_error("layer exceeds parent fan-out capacity");
      const std::size_t first = open[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(open.size()) - 1))];
      edges.emplace_back(task_name(first), task_name(child));
      ++fanout[first];
      --spare;
      for (std::size_t q : parents) {
        if (q == first || fanout[q] >= spec.max_fanout) continue;
        if (rng.uniform() < spec.edge_probability && spare > still_needed) {
          edges.emplace_back(task_name(q), task_name(child));
          ++fanout[q];
          --spare;
        }
      }
    }
  }
  Workflow draft(spec.name, std::move(tasks), std::move(edges), 0.0, 1.0, spec.reliability);
  return apply_deadline_factor(draft, p, spec.deadline_factor);
}

Instance generate_small_instance(std::uint64_t seed, double df, double reliability, std::size_t max_tasks) {
  if (max_tasks < 2) throw std::invalid_argument("max_tasks must be at least 2");
  PlatformGenSpec ps;
  ps.min_types = 1;
  ps.max_types = 3;
  ps.min_levels = 2;
  ps.max_levels = 3;
  ps.cp_lo = 1.0;
  ps.cp_hi = 10.0;
  Platform p = generate_platform(seed, ps);

  RngStream rng = make_stream(seed, StreamKind::Generator, 2);
  const auto n = static_cast<std::size_t>(rng.integer(2, static_cast<std::int64_t>(max_tasks)));
  std::vector<Workflow::TaskSpec> tasks;
  for (std::size_t i = 0; i < n; ++i) tasks.push_back({task_name(i), rng.uniform(2.0, 20.0)});
  std::vector<Workflow::EdgeSpec> edges;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (rng.uniform() < 0.35) edges.emplace_back(task_name(i), task_name(j));
    }
  }
  Workflow draft("random-" + std::to_string(seed), std::move(tasks), std::move(edges), 0.0, 1.0, reliability);
  return {apply_deadline_factor(draft, p, df), std::move(p)};
}

// ---- sweeps -------------------------------------------------------------------

std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::DeadlineFactor: return "df";
    case SweepParam::Reliability: return "rw";
    case SweepParam::TaskCount: return "tasks";
    case SweepParam::Threshold: return "th";
  }
  return "?";
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  if (name == "df") return SweepParam::DeadlineFactor;
  if (name == "rw") return SweepParam::Reliability;
  if (name == "tasks") return SweepParam::TaskCount;
  if (name == "th") return SweepParam::Threshold;
  return std::nullopt;
}

namespace {

bool known_algorithm(std::string_view a) { return a == "dy" || parse_algorithm(a).has_value(); }

}  // namespace

void validate(const SweepSpec& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  if (spec.algorithms.empty()) throw std::invalid_argument("sweep needs at least one algorithm");
  for (const auto& a : spec.algorithms) {
    if (!known_algorithm(a)) throw std::invalid_argument("unknown algorithm '" + a + "'");
  }
  if (spec.param != SweepParam::TaskCount && spec.workflows.empty()) {
    throw std::invalid_argument("sweep needs at least one workflow");
  }
  if (spec.platform.size() == 0) throw std::invalid_argument("sweep needs a platform");
  if (spec.deadline_factor && *spec.deadline_factor < 1.0) throw std::invalid_argument("df must be >= 1");
  if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) throw std::invalid_argument("fraction must lie in (0, 1]");
  for (double v : spec.grid) {
    switch (spec.param) {
      case SweepParam::DeadlineFactor:
        if (!(v >= 1.0)) throw std::invalid_argument("df grid values must be >= 1");
        break;
      case SweepParam::Reliability:
        if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("R_w grid values must lie in (0, 1)");
        break;
      case SweepParam::TaskCount:
        if (!(v >= 2.0) || v != std::floor(v)) throw std::invalid_argument("task-count grid values must be integers >= 2");
        break;
      case SweepParam::Threshold:
        if (!(v >= 0.0)) throw std::invalid_argument("threshold grid values must be >= 0");
        break;
    }
  }
}

double effective_deadline_factor(const Workflow& w, const Platform& p) {
  return (w.deadline() - w.arrival()) / critical_path_time(w, p);
}

ReportRow make_row(const Workflow& w, const Platform& p, std::string_view algorithm, std::uint64_t seed,
                   std::size_t trials, double fraction, double threshold, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportRow row;
  row.workflow = w.name();
  row.algorithm = std::string(algorithm);
  row.seed = seed;
  row.df = effective_deadline_factor(w, p);
  row.rw = w.reliability_req();
  row.n = w.size();

  const bool dy = algorithm == "dy";
  const Algorithm algo = dy ? Algorithm::Asmfr : *parse_algorithm(algorithm);
  const Schedule s = schedule_workflow(w, p, algo, threshold);
  row.planned_energy = s.total_energy;
  row.realized_energy = s.total_energy;
  row.makespan = s.makespan;
  row.planned_reliability = s.reliability;
  row.achieved_reliability = s.reliability;
  row.feasible = s.feasible;

  SimConfig cfg;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.sample_mean_fraction = fraction;
  cfg.threshold = threshold;
  const Schedule* measured = &s;
  SimTrace trace;
  if (dy && s.feasible) {
    trace = run_dynamic(w, p, s, cfg);
    row.realized_energy = trace.realized_energy;
    row.makespan = trace.makespan;
    row.achieved_reliability = trace.dispatched.reliability;
    row.feasible = trace.deadline_met;
    measured = &trace.dispatched;
  }
  if (trials > 0 && s.feasible) row.achieved_reliability = run_monte_carlo(w, p, *measured, cfg).estimate;

  if (timing) {
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return row;
}

std::vector<ReportRow> run_sweep(const SweepSpec& spec) {
  validate(spec);

  struct Point {
    Workflow workflow;
    double threshold;
    std::size_t index;
    double value;
  };
  std::vector<Point> points;
  auto prepared = [&](Workflow w) {
    if (spec.deadline_factor) w = apply_deadline_factor(w, spec.platform, *spec.deadline_factor);
    if (spec.reliability) w = w.with_reliability(*spec.reliability);
    return w;
  };
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    const double v = spec.grid[g];
    if (spec.param == SweepParam::TaskCount) {
      LayeredSpec ls = spec.generator;
      ls.tasks = static_cast<std::size_t>(v);
      ls.layers = std::min(ls.layers, ls.tasks);
      ls.name = spec.generator.name + "-" + std::to_string(ls.tasks);
      points.push_back({prepared(generate_layered(1, ls, spec.platform)), spec.threshold, g, v});
      continue;
    }
    for (const Workflow& base : spec.workflows) {
      Workflow w = prepared(base);
      double th = spec.threshold;
      if (spec.param == SweepParam::DeadlineFactor) w = apply_deadline_factor(w, spec.platform, v);
      if (spec.param == SweepParam::Reliability) w = w.with_reliability(v);
      if (spec.param == SweepParam::Threshold) th = v;
      points.push_back({std::move(w), th, g, v});
    }
  }

  struct Job {
    std::size_t point;
    std::size_t algo;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
      for (std::uint64_t seed : spec.seeds) jobs.push_back({i, a, seed});
    }
  }

  std::vector<ReportRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        const Point& pt = points[job.point];
        ReportRow row = make_row(pt.workflow, spec.platform, spec.algorithms[job.algo], job.seed, spec.trials,
                                 spec.fraction, pt.threshold, spec.timing);
        row.point = pt.index;
        row.value = pt.value;
        rows[j] = std::move(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  std::size_t workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  // Row order depends only on the sweep definition, never on thread timing.
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ReportRow& x = rows[a];
    const ReportRow& y = rows[b];
    if (x.workflow != y.workflow) return x.workflow < y.workflow;
    if (x.point != y.point) return x.point < y.point;
    if (jobs[a].algo != jobs[b].algo) return jobs[a].algo < jobs[b].algo;
    return x.seed < y.seed;
  });
  std::vector<ReportRow> sorted;
  sorted.reserve(rows.size());
  for (std::size_t i : order) sorted.push_back(std::move(rows[i]));
  return sorted;
}

// ---- CSV ------------------------------------------------------------------------

std::string csv_header() {
  return "workflow,algorithm,seed,df,R_w,N,planned_energy,realized_energy,makespan,planned_reliability,"
         "achieved_reliability,feasible,wall_time_ms\n";
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_fixed(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) {
    out += csv_field(r.workflow) + ',' + csv_field(r.algorithm) + ',' + std::to_string(r.seed) + ',' +
           format_fixed(r.df) + ',' + format_fixed(r.rw) + ',' + std::to_string(r.n) + ',' +
           format_fixed(r.planned_energy) + ',' + format_fixed(r.realized_energy) + ',' + format_fixed(r.makespan) +
           ',' + format_fixed(r.planned_reliability) + ',' + format_fixed(r.achieved_reliability) + ',' +
           (r.feasible ? "true" : "false") + ',' + format_fixed(r.wall_time_ms) + '\n';
  }
  return out;
}

std::string aggregate_csv(const std::vector<ReportRow>& rows, SweepParam param) {
  struct Acc {
    std::size_t rows = 0, feasible = 0;
    double sum_planned = 0, min_planned = INFINITY;
    double sum_realized = 0, min_realized = INFINITY;
    double sum_rel = 0, min_rel = INFINITY;
    double value = 0;
  };
  // Keep first-seen order, which is already deterministic.
  std::vector<std::tuple<std::string, std::size_t, std::string>> keys;
  std::map<std::tuple<std::string, std::size_t, std::string>, Acc> acc;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.workflow, r.point, r.algorithm);
    auto [it, inserted] = acc.try_emplace(key);
    if (inserted) keys.push_back(key);
    Acc& a = it->second;
    a.value = r.value;
    ++a.rows;
    if (!r.feasible) continue;
    ++a.feasible;
    a.sum_planned += r.planned_energy;
    a.min_planned = std::min(a.min_planned, r.planned_energy);
    a.sum_realized += r.realized_energy;
    a.min_realized = std::min(a.min_realized, r.realized_energy);
    a.sum_rel += r.achieved_reliability;
    a.min_rel = std::min(a.min_rel, r.achieved_reliability);
  }
  std::string out =
      "workflow,algorithm,param,value,rows,feasible_rows,mean_planned_energy,min_planned_energy,"
      "mean_realized_energy,min_realized_energy,mean_achieved_reliability,min_achieved_reliability\n";
  for (const auto& key : keys) {
    const Acc& a = acc.at(key);
    auto stat = [&](double v) { return a.feasible ? format_fixed(v) : std::string(); };
    const double k = static_cast<double>(a.feasible);
    out += csv_field(std::get<0>(key)) + ',' + csv_field(std::get<2>(key)) + ',' + std::string(to_string(param)) +
           ',' + format_fixed(a.value) + ',' + std::to_string(a.rows) + ',' + std::to_string(a.feasible) + ',' +
           stat(a.sum_planned / k) + ',' + stat(a.min_planned) + ',' + stat(a.sum_realized / k) + ',' +
           stat(a.min_realized) + ',' + stat(a.sum_rel / k) + ',' + stat(a.min_rel) + '\n';
  }
  return out;
}

}  // namespace wfsched
