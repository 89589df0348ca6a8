#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "support.hpp"
#include "wfsched/bench.hpp"
#include "wfsched/scheduler.hpp"

using namespace wfsched;

namespace {

std::string place(const Workflow& w, const Platform& p, const Schedule& s, const char* id) {
  const auto& e = s.entries[*w.index_of(id)];
  return p.vm_of(e.ctx).name + "@" + std::to_string(p.freq(e.ctx)).substr(0, 3);
}

// Brute force over every context: least energy per MI, then closest to f_cri,
// then the lower VM index.
std::optional<ExecContext> reference_context(const Platform& p, double need) {
  std::optional<ExecContext> best;
  double be = 0, bd = 0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    for (std::size_t k = 0; k < p.vm(l).levels(); ++k) {
      const ExecContext c{l, k};
      if (p.vm(l).cp * p.freq(c) < need) continue;
      const double e = energy_per_mi(p.vm(l), p.freq(c));
      const double d = std::abs(p.freq(c) - critical_frequency(p.vm(l)));
      if (!best || e < be - 1e-9 || (std::abs(e - be) <= 1e-9 && d < bd - 1e-9)) {
        best = c;
        be = e;
        bd = d;
      }
    }
  }
  return best;
}

Platform with_failure(const Platform& p, double r0) {
  std::vector<VmType> vms(p.vms().begin(), p.vms().end());
  for (auto& vm : vms) vm.r0 = r0;
  return Platform(std::move(vms));
}

}  // namespace

TEST_CASE("worked examples reproduce the published energies") {
  const Platform p = testing::load_platform("vms.json");
  const Workflow w1 = testing::load_workflow("w1.json");
  const Workflow w2 = testing::load_workflow("w2.json");

  const Schedule lef1 = lef_schedule(w1, p);
  CHECK(lef1.total_energy == doctest::Approx(1016.0).epsilon(1e-12));
  CHECK(lef1.makespan == doctest::Approx(10.0));
  CHECK(place(w1, p, lef1, "t1") == "VM1@1.0");
  CHECK(place(w1, p, lef1, "t2") == "VM1@0.5");
  CHECK(place(w1, p, lef1, "t3") == "VM1@0.5");
  CHECK(place(w1, p, lef1, "t4") == "VM1@0.5");
  CHECK(place(w1, p, lef1, "t5") == "VM1@1.0");

  CHECK(ldd_schedule(w1, p).total_energy == doctest::Approx(1108.0).epsilon(1e-12));
  CHECK(lef_schedule(w2, p).total_energy == doctest::Approx(1464.0).epsilon(1e-12));
  CHECK(ldd_schedule(w2, p).total_energy == doctest::Approx(1326.0).epsilon(1e-12));

  const Schedule bcp = bcp_schedule(w1, p);
  CHECK(bcp.feasible);
  CHECK(bcp.total_energy == doctest::Approx(1246.0));
  CHECK(bcp.makespan == doctest::Approx(6.0));
}

TEST_CASE("ASMFR dispatch") {
  const Platform p = testing::load_platform("vms.json");
  const Workflow w1 = testing::load_workflow("w1.json");
  const Workflow w2 = testing::load_workflow("w2.json");
  CHECK(asmfr_select(w1, 0.75) == Algorithm::Lef);
  CHECK(asmfr_select(w2, 0.75) == Algorithm::Ldd);
  CHECK(asmfr_select(w1, 0.5) == Algorithm::Ldd);  // MFR == Th goes to LDD

  const Schedule a1 = schedule_workflow(w1, p, Algorithm::Asmfr, 0.75);
  CHECK(a1.algorithm == Algorithm::Asmfr);
  CHECK(a1.resolved == Algorithm::Lef);
  CHECK(a1.total_energy == doctest::Approx(1016.0));
  const Schedule a2 = schedule_workflow(w2, p, Algorithm::Asmfr, 0.75);
  CHECK(a2.resolved == Algorithm::Ldd);
  CHECK(a2.total_energy == doctest::Approx(1326.0));

  const Workflow single =
      parse_workflow(R"({"arrival":0,"deadline":10,"reliability":0.5,"tasks":[{"id":"a","wc":8}]})");
  CHECK(asmfr_select(single, 0.0) == Algorithm::Lef);
}

TEST_CASE("level deadlines on W1") {
  const Platform p = testing::load_platform("vms.json");
  const Workflow w = testing::load_workflow("w1.json");
  const auto delta = level_deadlines(w, compute_levels(w), compute_time_bounds(w, p));
  CHECK(delta[0] == doctest::Approx(10.0 * 8 / 56));
  CHECK(delta[1] == doctest::Approx(10.0 * 32 / 56));
  CHECK(delta[2] == doctest::Approx(10.0 * 48 / 56));
  CHECK(delta[3] == doctest::Approx(10.0 * 48 / 56));
  CHECK(delta[4] == doctest::Approx(10.0));
}

TEST_CASE("MIN-CPF window") {
  CHECK(min_cpf(24, 1, 8) == doctest::Approx(24.0 / 7));
  CHECK_THROWS_AS(min_cpf(8, 5, 5), InfeasibleWindow);
  CHECK_THROWS_AS(min_cpf(8, 6, 5), InfeasibleWindow);
}

TEST_CASE("context selection matches brute force") {
  const Platform p = testing::load_platform("vms.json");
  CHECK(select_context(p, 3.43) == ExecContext{0, 0});
  CHECK(select_context(p, 4.0) == ExecContext{0, 0});
  CHECK(select_context(p, 4.01) == ExecContext{0, 1});
  CHECK_FALSE(select_context(p, 8.5).has_value());

  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Platform g = generate_platform(seed);
    for (double need : {0.1, 1.0, 5.0, 20.0, 60.0, 120.0, 180.0, 250.0}) {
      CHECK(select_context(g, need) == reference_context(g, need));
    }
  }
}

TEST_CASE("effective energy accounting") {
  CHECK(effective_energy(BackupChoice::NoBackup, 10) == 10);
  CHECK(effective_energy(BackupChoice::BackupSelf, 10) == 20);
  CHECK(effective_energy(BackupChoice::BackupPrev, 10, 4) == 14);
  CHECK_THROWS_AS(effective_energy(BackupChoice::BackupPrev, 10), NoReplicationCandidate);
  CHECK(updated_reliability(0.9, 0.95, 0.99) == doctest::Approx(0.9 / 0.95 * 0.99));
}

TEST_CASE("RET option list against an independent enumeration") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Instance inst = generate_small_instance(seed, 1.5, seed % 2 ? 0.99 : 0.9);
    const Workflow& w = inst.workflow;
    const Platform& p = inst.platform;
    PlanningState st(w, p);
    st.refresh();
    if (!replicate_until_reliable(st)) continue;
    ReplicationLedger ledger(w);
    for (std::size_t t = 1; t < w.size(); ++t) {
      if (!st[t].backup) ledger.insert(t);
    }
    const std::size_t t = 0;
    const double need = w.task(t).wc / (st.lft(t) - st[t].start);

    // Expected options, computed from the definitions.
    double others = 0;
    for (std::size_t u = 0; u < w.size(); ++u) {
      if (u != t) others += task_log_reliability(w.task(u).wc, p, st[u].ctx, st[u].backup);
    }
    const double req = std::log(w.reliability_req() - 1e-9);
    std::vector<double> expected{st.task_energy(t)};
    const auto ctx = reference_context(p, need);
    if (ctx) {
      const double e = task_energy(w.task(t).wc, p, *ctx);
      const double single = others + task_log_reliability(w.task(t).wc, p, *ctx, false);
      if (single >= req) {
        expected.push_back(e);
      } else {
        if (others + task_log_reliability(w.task(t).wc, p, *ctx, true) >= req) expected.push_back(2 * e);
        for (std::size_t prev : ledger.members()) {
          if (prev == t) continue;
          const double gain = task_log_reliability(w.task(prev).wc, p, st[prev].ctx, true) -
                              task_log_reliability(w.task(prev).wc, p, st[prev].ctx, false);
          if (single + gain >= req) expected.push_back(e + task_energy(w.task(prev).wc, p, st[prev].ctx));
        }
      }
    }
    double best = expected[0];
    for (double e : expected) {
      if (e < best - 1e-9) best = e;
    }

    const RetDecision d = ret_schedule_task(st, ledger, t, need);
    REQUIRE(d.options.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(d.options[i].energy == doctest::Approx(expected[i]));
    CHECK(d.chosen.energy == doctest::Approx(best));
    CHECK(st.meets_reliability(st.log_reliability()));
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("rejections") {
  const Platform p = testing::load_platform("vms.json");
  const Workflow w = testing::load_workflow("w1.json");

  const Schedule tight = schedule_workflow(w.with_deadline(5), p, Algorithm::Lef);
  CHECK_FALSE(tight.feasible);
  CHECK(tight.reason == "deadline infeasible");

  const Schedule fragile = schedule_workflow(w, with_failure(p, 0.5), Algorithm::Ldd);
  CHECK_FALSE(fragile.feasible);
  CHECK(fragile.reason == "reliability infeasible");
}

TEST_CASE("replication restores the reliability target") {
  const Platform p = with_failure(testing::load_platform("vms.json"), 5e-3);
  const Workflow w = testing::load_workflow("w1.json").with_reliability(0.99);
  for (Algorithm a : {Algorithm::Bcp, Algorithm::Lef, Algorithm::Ldd}) {
    const Schedule s = schedule_workflow(w, p, a);
    CAPTURE(to_string(a));
    REQUIRE(s.feasible);
    CHECK(s.reliability >= 0.99 - 1e-9);
    std::size_t backups = 0;
    for (const auto& e : s.entries) backups += e.backup ? 1 : 0;
    CHECK(backups > 0);
    CHECK(check_constraints(w, p, s).all_pass());
  }
}

TEST_CASE("heuristics never cost more than BCP and always pass the checker") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const double df = 1.1 + 0.1 * static_cast<double>(seed % 10);
    const Instance inst = generate_small_instance(seed, df, seed % 3 ? 0.95 : 0.99);
    const Schedule bcp = bcp_schedule(inst.workflow, inst.platform);
    for (Algorithm a : {Algorithm::Lef, Algorithm::Ldd, Algorithm::Asmfr}) {
      const Schedule s = schedule_workflow(inst.workflow, inst.platform, a);
      CAPTURE(seed);
      CHECK(s.feasible == bcp.feasible);
      if (!s.feasible) continue;
      CHECK(s.total_energy <= bcp.total_energy + 1e-9);
      CHECK(check_constraints(inst.workflow, inst.platform, s).all_pass());
    }
  }
}

TEST_CASE("schedule JSON carries the dispatch") {
  const Platform p = testing::load_platform("vms.json");
  const Workflow w = testing::load_workflow("w2.json");
  const auto doc = nlohmann::json::parse(schedule_to_json(w, p, schedule_workflow(w, p, Algorithm::Asmfr)));
  CHECK(doc["algorithm"] == "asmfr");
  CHECK(doc["resolved_algorithm"] == "ldd");
  CHECK(doc["tasks"].size() == 4);
  CHECK(doc["energy"].get<double>() == doctest::Approx(1326.0));
}
