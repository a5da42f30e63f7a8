#include "pdms/canonical.hpp"
#include "pdms/loss.hpp"
#include "pdms/parser.hpp"
#include "pdms/rewrite.hpp"
#include "pdms/simulator.hpp"

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

using namespace pdms;

namespace {

#ifndef PDMS_SCENARIO_DIR
#define PDMS_SCENARIO_DIR "scenarios"
#endif

Scenario load_fixture() {
    std::ifstream in(std::string(PDMS_SCENARIO_DIR) + "/emergency.pdms");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

const Scenario& fixture() {
    static Scenario sc = load_fixture();
    return sc;
}

GeneratorConfig bench_config(std::size_t rows) {
    GeneratorConfig cfg;
    cfg.seed = 1;
    cfg.rows_per_relation = rows;
    cfg.value_pools["class"] = {"Doctor", "EMT", "Nurse", "Paramedic"};
    cfg.key_attributes = {"SID", "PID", "PhID", "vid"};
    return cfg;
}

void BM_ParseScenario(benchmark::State& state) {
    std::ifstream in(std::string(PDMS_SCENARIO_DIR) + "/emergency.pdms");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_scenario(text));
    }
}
BENCHMARK(BM_ParseScenario);

void BM_Canonicalize(benchmark::State& state) {
    const Scenario& sc = fixture();
    Query q = parse_query_sql(
        "SELECT Staff.SID, \"Doctor\" FROM Staff, Schedule "
        "WHERE class = \"Doctor\" AND Staff.SID = Schedule.SID "
        "UNION SELECT Staff.SID, \"EMT\" FROM Staff, Schedule, InAmbulance "
        "WHERE class = \"EMT\" AND Staff.SID = Schedule.SID AND Staff.SID = InAmbulance.SID "
        "UNION SELECT SID, class FROM Staff WHERE class != \"Doctor\" AND class != \"EMT\"",
        *sc.network.find_peer("LH"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(canonicalize(q));
    }
}
BENCHMARK(BM_Canonicalize);

void BM_RoundTrip(benchmark::State& state) {
    const Scenario& sc = fixture();
    const Query& q1 = sc.find_query("Q1")->query;
    const Mapping& m = *sc.network.find_mapping("9DC", "H");
    for (auto _ : state) {
        benchmark::DoNotOptimize(roundtrip(q1, m));
    }
}
BENCHMARK(BM_RoundTrip);

void BM_TrackAndReplace(benchmark::State& state) {
    const Scenario& sc = fixture();
    const Query& q1 = sc.find_query("Q1")->query;
    for (auto _ : state) {
        benchmark::DoNotOptimize(track_and_replace(q1, sc.network, "9DC", "H"));
    }
}
BENCHMARK(BM_TrackAndReplace);

void BM_GenerateData(benchmark::State& state) {
    const Scenario& sc = fixture();
    GeneratorConfig cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_data(sc.network, cfg));
    }
}
BENCHMARK(BM_GenerateData)->Arg(100)->Arg(1000);

void BM_Evaluate(benchmark::State& state) {
    const Scenario& sc = fixture();
    Instance data = generate_data(sc.network, bench_config(static_cast<std::size_t>(state.range(0))));
    Query q = parse_query_sql(
        "SELECT Staff.SID, \"Doctor\" FROM Staff, Schedule "
        "WHERE class = \"Doctor\" AND Staff.SID = Schedule.SID",
        *sc.network.find_peer("LH"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(q, data, sc.network));
    }
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000);

void BM_PropagateWithRecovery(benchmark::State& state) {
    const Scenario& sc = fixture();
    Instance data = generate_data(sc.network, bench_config(50));
    const Query& q1 = sc.find_query("Q1")->query;
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate_query(sc.network, "9DC", q1, data, {.recover = true}));
    }
}
BENCHMARK(BM_PropagateWithRecovery);

}  // namespace

BENCHMARK_MAIN();
