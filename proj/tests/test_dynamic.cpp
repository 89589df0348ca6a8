#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "wfsched/dynamic.hpp"

using namespace wfsched;

namespace {

Platform with_failure(const Platform& p, double r0) {
  std::vector<VmType> vms(p.vms().begin(), p.vms().end());
  for (auto& vm : vms) vm.r0 = r0;
  return Platform(std::move(vms));
}

struct W1 {
  Platform p = testing::load_platform("vms.json");
  Workflow w = testing::load_workflow("w1.json");
  Schedule s = lef_schedule(w, p);
};

}  // namespace

TEST_CASE("capped exponential sample mean") {
  const Platform p = testing::load_platform("vms.json");
  const ExecContext c{1, 0};
  const double tau = execution_time(24, p, c);
  for (double fraction : {0.25, 0.75, 1.0}) {
    RngStream rng(99, {7});
    const int n = 200000;
    double sum = 0, top = 0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_actual_time(24, p, c, fraction, rng);
      REQUIRE(x > 0);
      REQUIRE(x <= tau);
      sum += x;
      top = std::max(top, x);
    }
    const double m = fraction * tau;
    const double expected = m * (1 - std::exp(-tau / m));
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.01));
    CHECK(top == doctest::Approx(tau));
  }
}

TEST_CASE("advance_ready") {
  const Workflow w = testing::load_workflow("w1.json");
  RollingHorizon h;
  h.completed = {{0, 1.0}, {1, 4.0}};
  h.pending = {2, 3, 4};
  CHECK(advance_ready(h, w) == std::vector<std::size_t>{2, 3});
  h.pending = {0, 1, 2, 3, 4};
  h.completed.clear();
  CHECK(advance_ready(h, w) == std::vector<std::size_t>{0});
}

TEST_CASE("worst case without rescheduling replays the static plan") {
  W1 f;
  SimConfig cfg;
  cfg.worst_case = true;
  cfg.reschedule = Rescheduler::None;
  const SimTrace tr = run_dynamic(f.w, f.p, f.s, cfg);
  CHECK(tr.realized_energy == doctest::Approx(f.s.total_energy).epsilon(1e-12));
  CHECK(tr.makespan == doctest::Approx(f.s.makespan));
  CHECK(tr.deadline_met);
  CHECK(tr.reschedules == 0);
  for (std::size_t t = 0; t < f.w.size(); ++t) {
    CHECK(tr.executed[t].ctx == f.s.entries[t].ctx);
    CHECK(tr.executed[t].start == doctest::Approx(f.s.entries[t].start));
  }
  CHECK(check_constraints(f.w, f.p, tr.dispatched).all_pass());
}

TEST_CASE("fixed actual fractions scale realized energy") {
  W1 f;
  SimConfig cfg;
  cfg.reschedule = Rescheduler::None;
  cfg.actual_fraction.assign(f.w.size(), 0.5);
  const SimTrace tr = run_dynamic(f.w, f.p, f.s, cfg);
  CHECK(tr.realized_energy == doctest::Approx(0.5 * f.s.total_energy));
  CHECK(tr.makespan == doctest::Approx(0.5 * f.s.makespan));

  cfg.actual_fraction.assign(3, 0.5);
  CHECK_THROWS_AS(run_dynamic(f.w, f.p, f.s, cfg), std::invalid_argument);
  cfg.actual_fraction.assign(f.w.size(), 1.5);
  CHECK_THROWS_AS(run_dynamic(f.w, f.p, f.s, cfg), std::invalid_argument);
}

TEST_CASE("rescheduling never costs more than the plan and respects every constraint") {
  for (const char* name : {"w1.json", "w2.json"}) {
    const Platform p = testing::load_platform("vms.json");
    const Workflow w = testing::load_workflow(name);
    const Schedule s = schedule_workflow(w, p, Algorithm::Asmfr);
    REQUIRE(s.feasible);
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      SimConfig cfg;
      cfg.seed = seed;
      const SimTrace dy = run_dynamic(w, p, s, cfg);
      cfg.reschedule = Rescheduler::None;
      const SimTrace none = run_dynamic(w, p, s, cfg);
      CHECK(dy.deadline_met);
      CHECK(dy.realized_energy <= s.total_energy + 1e-9);
      CHECK(dy.realized_energy <= none.realized_energy + 1e-9);
      const ConstraintReport r = check_execution(w, p, s, dy);
      CHECK_MESSAGE(r.all_pass(), report_to_json(r));
    }
  }
}

TEST_CASE("execution check catches a broken trace") {
  W1 f;
  SimConfig cfg;
  cfg.seed = 3;
  SimTrace tr = run_dynamic(f.w, f.p, f.s, cfg);
  REQUIRE(check_execution(f.w, f.p, f.s, tr).all_pass());

  SimTrace late = tr;
  late.executed[2].start = late.executed[1].finish - 0.5;
  CHECK_FALSE(check_execution(f.w, f.p, f.s, late).find("precedence")->pass);

  SimTrace slow = tr;
  slow.executed[0].finish = slow.executed[0].start + 100;
  const auto r = check_execution(f.w, f.p, f.s, slow);
  CHECK_FALSE(r.find("duration")->pass);

  SimTrace moved = tr;
  moved.executed[4].ctx = ExecContext{0, 0};
  moved.dispatched.entries[4].ctx = ExecContext{1, 1};
  CHECK_FALSE(check_execution(f.w, f.p, f.s, moved).find("domain")->pass);

  SimTrace twice = tr;
  twice.events.push_back(twice.events.front());
  CHECK_FALSE(check_execution(f.w, f.p, f.s, twice).find("assignment")->pass);

  SimTrace weak = tr;
  weak.events.push_back({0, EventKind::Reschedule, std::nullopt, {}, false, 0, true, 0.5});
  CHECK_FALSE(check_execution(f.w, f.p, f.s, weak).find("reliability")->pass);
}

TEST_CASE("traces are deterministic per seed") {
  W1 f;
  SimConfig cfg;
  cfg.seed = 11;
  const std::string a = trace_to_jsonl(f.w, f.p, run_dynamic(f.w, f.p, f.s, cfg));
  const std::string b = trace_to_jsonl(f.w, f.p, run_dynamic(f.w, f.p, f.s, cfg));
  CHECK(a == b);
  cfg.seed = 12;
  CHECK(a != trace_to_jsonl(f.w, f.p, run_dynamic(f.w, f.p, f.s, cfg)));

  std::istringstream in(a);
  std::string line, last;
  int dispatches = 0, completes = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("kind") && j["kind"] == "dispatch") ++dispatches;
    if (j.contains("kind") && j["kind"] == "complete") ++completes;
    last = line;
  }
  CHECK(dispatches == 5);
  CHECK(completes == 5);
  const auto summary = nlohmann::json::parse(last);
  CHECK(summary["summary"] == true);
  CHECK(summary["workflow"] == "W1");
}

TEST_CASE("rejects an infeasible initial schedule") {
  W1 f;
  Schedule bad = f.s;
  bad.feasible = false;
  CHECK_THROWS_AS(run_dynamic(f.w, f.p, bad, SimConfig{}), std::invalid_argument);
  SimConfig cfg;
  cfg.sample_mean_fraction = 0;
  CHECK_THROWS_AS(run_dynamic(f.w, f.p, f.s, cfg), std::invalid_argument);
}

TEST_CASE("Wilson interval") {
  auto [lo, hi] = wilson_interval(8, 10, 1.96);
  CHECK(lo == doctest::Approx(0.49015684672072335).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.9433190520193067).epsilon(1e-12));
  auto [lo0, hi0] = wilson_interval(0, 50, 1.96);
  CHECK(lo0 == doctest::Approx(0.0));
  CHECK(hi0 > 0.0);
  auto [lo1, hi1] = wilson_interval(50, 50, 1.96);
  CHECK(hi1 == doctest::Approx(1.0));
  CHECK(lo1 < 1.0);
}

TEST_CASE("Monte-Carlo reliability agrees with the analytic product") {
  const Platform p = with_failure(testing::load_platform("vms.json"), 5e-3);
  const Workflow w = testing::load_workflow("w1.json").with_reliability(0.5);
  const Schedule s = lef_schedule(w, p);
  REQUIRE(s.feasible);
  REQUIRE(s.reliability < 0.99);

  SimConfig cfg;
  cfg.seed = 5;
  cfg.trials = 100000;
  const ReliabilityEstimate est = run_monte_carlo(w, p, s, cfg);
  CHECK(est.trials == cfg.trials);
  CHECK(est.lower <= s.reliability);
  CHECK(est.upper >= s.reliability);
  const double sigma = std::sqrt(s.reliability * (1 - s.reliability) / cfg.trials);
  CHECK(std::abs(est.estimate - s.reliability) < 4 * sigma);

  // Stable under repetition.
  CHECK(run_monte_carlo(w, p, s, cfg).successes == est.successes);
}

TEST_CASE("failure injection frequency matches the schedule reliability") {
  const Platform p = with_failure(testing::load_platform("vms.json"), 5e-3);
  const Workflow w = testing::load_workflow("w1.json").with_reliability(0.5);
  const Schedule s = lef_schedule(w, p);
  SimConfig cfg;
  cfg.worst_case = true;
  cfg.reschedule = Rescheduler::None;
  cfg.failure_injection = true;
  const int runs = 4000;
  int ok = 0;
  for (int seed = 1; seed <= runs; ++seed) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SimTrace tr = run_dynamic(w, p, s, cfg);
    if (tr.success) {
      ++ok;
      CHECK(tr.deadline_met);
    } else {
      CHECK_FALSE(tr.deadline_met);
      CHECK(tr.events.back().kind == EventKind::Failure);
    }
  }
  const double sigma = std::sqrt(s.reliability * (1 - s.reliability) / runs);
  CHECK(std::abs(static_cast<double>(ok) / runs - s.reliability) < 4 * sigma);
}
