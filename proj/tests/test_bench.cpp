#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "support.hpp"
#include "wfsched/bench.hpp"

using namespace wfsched;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

SweepSpec w1_spec() {
  SweepSpec s;
  s.workflows = {testing::load_workflow("w1.json"), testing::load_workflow("w2.json")};
  s.platform = testing::load_platform("vms.json");
  s.grid = {1.0, 1.5, 2.0};
  s.seeds = {1, 2, 3};
  return s;
}

}  // namespace

TEST_CASE("CSV fields and numbers") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(format_fixed(1016) == "1016.000000");
  CHECK(format_fixed(-0.0) == "0.000000");
  CHECK(format_fixed(-1e-9) == "0.000000");
  CHECK(format_fixed(0.1234567) == "0.123457");
  CHECK(csv_header() ==
        "workflow,algorithm,seed,df,R_w,N,planned_energy,realized_energy,makespan,planned_reliability,"
        "achieved_reliability,feasible,wall_time_ms\n");
}

TEST_CASE("platform generator stays in range") {
  const PlatformGenSpec spec;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Platform p = generate_platform(seed, spec);
    CHECK(p.size() >= spec.min_types);
    CHECK(p.size() <= spec.max_types);
    for (const VmType& vm : p.vms()) {
      CHECK(vm.levels() >= spec.min_levels);
      CHECK(vm.levels() <= spec.max_levels);
      CHECK(vm.cp >= spec.cp_lo);
      CHECK(vm.cp <= spec.cp_hi);
      CHECK(vm.freqs.back() == doctest::Approx(1.0));
      CHECK(std::is_sorted(vm.freqs.begin(), vm.freqs.end()));
      CHECK(vm.freqs.front() >= spec.ghz_lo / spec.ghz_hi - 1e-12);
      CHECK(vm.r0 >= spec.r0_lo);
      CHECK(vm.r0 <= spec.r0_hi);
      CHECK(vm.psi >= spec.psi_lo);
      CHECK(vm.psi <= spec.psi_hi);
      CHECK(vm.alpha >= spec.alpha_lo);
      CHECK(vm.beta <= spec.beta_hi);
    }
    CHECK(to_json(p) == to_json(generate_platform(seed, spec)));
  }
  CHECK(to_json(generate_platform(1)) != to_json(generate_platform(2)));
}

TEST_CASE("layered generator") {
  const Platform p = testing::load_platform("catalog.json");
  LayeredSpec spec;
  spec.max_fanout = 4;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Workflow w = generate_layered(seed, spec, p);
    CHECK(w.size() == spec.tasks);
    CHECK(w.topo_order().size() == w.size());
    const LevelInfo lv = compute_levels(w);
    CHECK(lv.depth() == spec.layers);
    std::size_t entries = 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      CHECK(w.task(t).succs.size() <= spec.max_fanout);
      CHECK(w.task(t).wc >= spec.wc_lo);
      CHECK(w.task(t).wc <= spec.wc_hi);
      if (w.task(t).preds.empty()) ++entries;
    }
    CHECK(entries == 1);
    CHECK(effective_deadline_factor(w, p) == doctest::Approx(spec.deadline_factor));
    CHECK(w.reliability_req() == spec.reliability);
    CHECK(to_json(w) == to_json(generate_layered(seed, spec, p)));
  }
}

TEST_CASE("small instances") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Instance in = generate_small_instance(seed, 1.4, 0.9, 6);
    CHECK(in.workflow.size() >= 2);
    CHECK(in.workflow.size() <= 6);
    CHECK(in.platform.size() >= 1);
    CHECK(in.platform.size() <= 3);
    CHECK(effective_deadline_factor(in.workflow, in.platform) == doctest::Approx(1.4));
  }
}

TEST_CASE("sweep parameter names") {
  CHECK(parse_sweep_param("df") == SweepParam::DeadlineFactor);
  CHECK(parse_sweep_param("rw") == SweepParam::Reliability);
  CHECK(parse_sweep_param("tasks") == SweepParam::TaskCount);
  CHECK(parse_sweep_param("th") == SweepParam::Threshold);
  CHECK_FALSE(parse_sweep_param("nope"));
  CHECK(to_string(SweepParam::Reliability) == "rw");
}

TEST_CASE("sweep validation") {
  SweepSpec s = w1_spec();
  CHECK_NOTHROW(validate(s));
  s.grid.clear();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = w1_spec();
  s.algorithms = {"lef", "fastest"};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = w1_spec();
  s.grid = {0.5};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = w1_spec();
  s.param = SweepParam::Reliability;
  s.grid = {1.5};
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
  s = w1_spec();
  s.workflows.clear();
  CHECK_THROWS_AS(validate(s), std::invalid_argument);
}

TEST_CASE("sweep rows are complete, ordered and independent of worker count") {
  SweepSpec s = w1_spec();
  s.trials = 200;
  s.workers = 1;
  const auto rows = run_sweep(s);
  CHECK(rows.size() == s.workflows.size() * s.grid.size() * s.algorithms.size() * s.seeds.size());
  const std::string one = rows_to_csv(rows);
  for (std::size_t workers : {2u, 8u}) {
    s.workers = workers;
    CHECK(rows_to_csv(run_sweep(s)) == one);
  }

  CHECK(rows.front().workflow == "W1");
  CHECK(rows.front().algorithm == "bcp");
  CHECK(rows.back().workflow == "W2");
  CHECK(rows.back().algorithm == "dy");

  const auto lines = lines_of(one);
  REQUIRE(lines.size() == rows.size() + 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(split(lines[i]).size() == 13);
    CHECK(split(lines[i])[12] == "0.000000");
  }

  // Deterministic algorithms do not depend on the seed; BCP not on df.
  std::map<std::string, std::string> bcp;
  for (const auto& r : rows) {
    if (r.algorithm == "dy" || !r.feasible) continue;
    if (r.algorithm == "bcp") {
      auto [it, fresh] = bcp.emplace(r.workflow, format_fixed(r.planned_energy));
      if (!fresh) CHECK(it->second == format_fixed(r.planned_energy));
    }
  }
  CHECK(bcp.size() == 2);
}

TEST_CASE("report rows reproduce the worked examples") {
  const Platform p = testing::load_platform("vms.json");
  std::map<std::string, double> energy;
  for (const char* file : {"w1.json", "w2.json"}) {
    const Workflow w = testing::load_workflow(file);
    for (const char* a : {"lef", "ldd", "asmfr"}) {
      const ReportRow r = make_row(w, p, a, 1, 0, 0.75, kDefaultThreshold, false);
      CHECK(r.feasible);
      CHECK(r.realized_energy == r.planned_energy);
      CHECK(r.wall_time_ms == 0.0);
      energy[r.workflow + "/" + r.algorithm] = r.planned_energy;
    }
    const ReportRow dy = make_row(w, p, "dy", 1, 1000, 0.75, kDefaultThreshold, false);
    CHECK(dy.feasible);
    CHECK(dy.realized_energy <= energy[dy.workflow + "/asmfr"] + 1e-9);
    CHECK(dy.achieved_reliability > 0.99);
  }
  CHECK(energy["W1/lef"] == doctest::Approx(1016));
  CHECK(energy["W1/ldd"] == doctest::Approx(1108));
  CHECK(energy["W2/lef"] == doctest::Approx(1464));
  CHECK(energy["W2/ldd"] == doctest::Approx(1326));
  CHECK(energy["W1/asmfr"] == doctest::Approx(1016));
  CHECK(energy["W2/asmfr"] == doctest::Approx(1326));
}

TEST_CASE("task-count sweep") {
  SweepSpec s;
  s.platform = testing::load_platform("catalog.json");
  s.param = SweepParam::TaskCount;
  s.grid = {10, 20};
  s.algorithms = {"lef"};
  s.seeds = {4};
  const auto rows = run_sweep(s);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 10);
  CHECK(rows[1].n == 20);
  CHECK(rows[0].workflow == "layered-10");
}

TEST_CASE("aggregate CSV") {
  SweepSpec s = w1_spec();
  s.algorithms = {"lef", "dy"};
  const auto rows = run_sweep(s);
  const auto lines = lines_of(aggregate_csv(rows, s.param));
  REQUIRE(lines.size() == 1 + 2 * 3 * 2);
  CHECK(lines[0] ==
        "workflow,algorithm,param,value,rows,feasible_rows,mean_planned_energy,min_planned_energy,"
        "mean_realized_energy,min_realized_energy,mean_achieved_reliability,min_achieved_reliability");
  const auto first = split(lines[1]);
  CHECK(first[0] == "W1");
  CHECK(first[1] == "lef");
  CHECK(first[2] == "df");
  CHECK(first[4] == "3");
  CHECK(first[6] == first[7]);
}
