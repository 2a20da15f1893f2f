#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "pdqp/phenomena.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/search.hpp"
#include "pdqp/statistical_difference.hpp"
#include "test_util.hpp"

using namespace pdqp;

namespace {

// sin^2(9 asin(1/8)), the per-read success of four amplification rounds on
// a 64-entry register
const double p_n6_k4 = 0.8163770193968958;

// single collapsing run at the optimal 12 rounds, n = 8
const double baseline_n8_best = 0.9999470421032736;

// per-read success when the collapsing arm reuses K = 16 at n = 12
const double reused_k_n12 = 0.24314459288508297;

// coupon-collector coverage of 8 rows by 54 reads, 1 - (7/8)^54
const double coverage_n3_r54 = 0.9992613565292882;

const long long pdqp_cost[10] = {6, 7, 9, 11, 13, 16, 20, 26, 32, 40};
const long long baseline_cost[10] = {4, 5, 8, 11, 15, 22, 31, 43, 61, 86};

}  // namespace

TEST_CASE("iteration and read budgets for the advertised register sizes", "[search]") {
    REQUIRE(search_iteration_budget(6) == 4);
    REQUIRE(search_iteration_budget(7) == 6);   // ceil(128^(1/3)) = 6
    REQUIRE(search_iteration_budget(12) == 16);
    REQUIRE(search_read_budget(6) == 24);
    REQUIRE(search_read_budget(7) == 36);
    REQUIRE(search_read_budget(15) == 480);
    for (int n = 1; n <= 20; ++n) {
        REQUIRE(search_iteration_budget(n) >= 1);
        REQUIRE(search_read_budget(n) >= 1);
    }
}

TEST_CASE("search instances validate their arguments", "[search]") {
    REQUIRE_THROWS_AS(make_search_instance(0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_search_instance(21, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_search_instance(3, 8), std::invalid_argument);
    SearchInstance inst = make_search_instance(6, 13);
    REQUIRE(inst.grover_iterations == 4);
    REQUIRE(inst.non_collapsing_samples == 24);
}

TEST_CASE("search circuits are write-once and have one step per read", "[search]") {
    SearchInstance inst = make_search_instance(4, 9);
    Circuit c = build_search_circuit(inst);
    REQUIRE(c.num_qubits == 5);
    REQUIRE(c.step_count() == 1 + inst.non_collapsing_samples);
    REQUIRE_NOTHROW(validate(c, ValidateMode::write_once));
}

TEST_CASE("per-read success probability matches the closed form", "[search]") {
    REQUIRE(std::abs(per_sample_marked_probability(6, 4) - p_n6_k4) < 1e-12);
    REQUIRE(std::abs(per_sample_marked_probability(12, 16) - reused_k_n12) < 1e-12);

    // the prepared state really does carry that mass on the marked index
    GateSequence seq = grover_gate_sequence(6, 4, 13u, false);
    StateVector s(6);
    s.apply_all(seq.gates);
    REQUIRE(std::abs(std::norm(s.amp(13)) - p_n6_k4) < 1e-10);

    // and the ancilla-writing variant moves exactly that mass to the flag
    GateSequence with_flag = grover_gate_sequence(6, 4, 13u, true);
    StateVector s7(7);
    s7.apply_all(with_flag.gates);
    REQUIRE(std::abs(marginal_probability(s7, {6}, 1) - p_n6_k4) < 1e-10);
}

TEST_CASE("query counting separates the two arms", "[search]") {
    GateSequence seq = grover_gate_sequence(3, 2, 5u, true);
    long long queries = 0;
    for (bool q : seq.is_query) queries += q;
    REQUIRE(queries == 3);  // 2 phase queries + 1 xor query

    GateSequence bare = grover_gate_sequence(3, 2, 5u, false);
    queries = 0;
    for (bool q : bare.is_query) queries += q;
    REQUIRE(queries == 2);
}

TEST_CASE("non-collapsing search finds the marked index", "[search][stat]") {
    RngStream rng(35001);
    SearchInstance inst = make_search_instance(6, 45);
    int successes = 0;
    for (int t = 0; t < 200; ++t) {
        SearchOutcome out = pdqp_search(inst, rng);
        REQUIRE(out.queries == inst.grover_iterations + 1);
        if (out.found) {
            REQUIRE(out.found_index == inst.marked);
            ++successes;
        }
    }
    // per-run failure probability is (1 - 0.816)^24, astronomically small
    REQUIRE(successes >= 190);
}

TEST_CASE("search without a marked index never claims success", "[search]") {
    RngStream rng(35002);
    SearchInstance inst = make_search_instance(5, 0, false);
    for (int t = 0; t < 50; ++t) REQUIRE_FALSE(pdqp_search(inst, rng).found);
}

TEST_CASE("extra reads raise the success rate at fixed iterations", "[search][stat]") {
    RngStream rng(35003);
    SearchInstance few = make_search_instance(6, 21);
    few.grover_iterations = 2;
    few.non_collapsing_samples = 1;
    SearchInstance many = few;
    many.non_collapsing_samples = 16;

    const int trials = 2000;
    int hit_few = 0, hit_many = 0;
    for (int t = 0; t < trials; ++t) {
        if (pdqp_search(few, rng).found) ++hit_few;
        if (pdqp_search(many, rng).found) ++hit_many;
    }
    double p = per_sample_marked_probability(6, 2);
    double exp_few = p;
    double exp_many = 1.0 - std::pow(1.0 - p, 16);
    REQUIRE(std::abs(hit_few - trials * exp_few) < 5.0 * std::sqrt(trials * exp_few * (1 - exp_few)));
    REQUIRE(std::abs(hit_many - trials * exp_many) <
            5.0 * std::sqrt(trials * exp_many * (1 - exp_many)));
    REQUIRE(hit_many - hit_few > trials / 2);
}

TEST_CASE("the collapsing arm peaks at its optimal iteration count", "[search][stat]") {
    REQUIRE(baseline_optimal_iterations(8) == 12);
    REQUIRE(std::abs(per_sample_marked_probability(8, 12) - baseline_n8_best) < 1e-12);
    REQUIRE(baseline_n8_best >= 0.99);

    RngStream rng(35004);
    SearchInstance inst = make_search_instance(8, 200);
    inst.grover_iterations = 12;
    int successes = 0;
    for (int t = 0; t < 300; ++t) {
        SearchOutcome out = grover_baseline(inst, rng);
        REQUIRE(out.queries == 12);
        if (out.found) ++successes;
    }
    REQUIRE(successes >= 295);
}

TEST_CASE("cheapest budgets reaching two thirds, frozen cost tables", "[search]") {
    for (int n = 6; n <= 15; ++n) {
        INFO("register size " << n);
        REQUIRE(minimal_cost_pdqp(n).cost == pdqp_cost[n - 6]);
        REQUIRE(minimal_cost_baseline(n).cost == baseline_cost[n - 6]);
    }
    // the pdqp optimum keeps reads cheap instead of saturating the rotation
    MinimalCost mc = minimal_cost_pdqp(9);
    REQUIRE(mc.cost == (mc.iterations + 1) + mc.reads);
    MinimalCost bc = minimal_cost_baseline(9);
    REQUIRE(bc.cost == bc.runs * bc.iterations);
}

TEST_CASE("log-log cost slopes land on the cube and square root laws", "[search]") {
    double s_pdqp = fit_loglog_slope(6, 15, [](int n) { return minimal_cost_pdqp(n).cost; });
    double s_base = fit_loglog_slope(6, 15, [](int n) { return minimal_cost_baseline(n).cost; });
    REQUIRE(std::abs(s_pdqp - 0.30618684355876247) < 1e-9);
    REQUIRE(std::abs(s_base - 0.49858306886567255) < 1e-9);
    REQUIRE(std::abs(s_pdqp - 1.0 / 3.0) < 0.07);
    REQUIRE(std::abs(s_base - 0.5) < 0.07);
}

TEST_CASE("identical samplers agree exactly one quarter of the time", "[sd]") {
    ClassicalFunction parity(2, 1, {0, 1, 1, 0});
    SDInstance same{parity, parity};
    REQUIRE(exact_tvd(same.p0, same.p1) == 0.0);
    REQUIRE(std::abs(sd_agree_probability_exact(same) - 0.25) < 1e-12);

    // the simulator reproduces the same number through its three reads
    Circuit c = build_sd_circuit(same);
    FiniteDistribution joint = history_distribution_exact(c);
    double agree = 0.0;
    for (const auto& [tuple, p] : joint.support()) {
        uint32_t b1 = tuple[1] & 1u, b2 = tuple[2] & 1u, b3 = tuple[3] & 1u;
        if (b1 == b2 && b2 == b3) agree += p;
    }
    REQUIRE(std::abs(agree - 0.25) < 1e-10);
}

TEST_CASE("disjoint samplers always agree and are always called far", "[sd]") {
    RngStream rng(35005);
    SDInstance inst = make_sd_instance(4, 3, false, rng);
    REQUIRE(exact_tvd(inst.p0, inst.p1) == 1.0);
    REQUIRE(std::abs(sd_agree_probability_exact(inst) - 1.0) < 1e-12);
    for (int t = 0; t < 50; ++t)
        REQUIRE(solve_statistical_difference(inst, rng) == SDDecision::far);
}

TEST_CASE("generated instances sit inside the advertised distance bands", "[sd]") {
    RngStream rng(35006);
    for (int t = 0; t < 60; ++t) {
        int n = 4 + int(rng.next_below(5));
        int m = 1 + int(rng.next_below(8));
        SDInstance close_inst = make_sd_instance(n, m, true, rng);
        REQUIRE(exact_tvd(close_inst.p0, close_inst.p1) <= 1.0 / 128.0 + 1e-12);
        SDInstance far_inst = make_sd_instance(n, m, false, rng);
        REQUIRE(exact_tvd(far_inst.p0, far_inst.p1) == 1.0);
    }
    REQUIRE_THROWS_AS(make_sd_instance(9, 1, true, rng), std::invalid_argument);
}

TEST_CASE("one-read decisions beat guessing on a small batch", "[sd][stat]") {
    RngStream rng(35007);
    int correct = 0;
    const int batch = 40;
    for (int i = 0; i < batch; ++i) {
        bool close = i % 2 == 0;
        SDInstance inst = make_sd_instance(4 + i % 5, 1 + i % 8, close, rng);
        SDDecision d = solve_statistical_difference(inst, rng);
        if ((d == SDDecision::far) != close) ++correct;
    }
    // expected accuracy (1 + 3/4)/2 = 0.875; require well above coin flipping
    REQUIRE(correct >= int(batch * 0.7));
}

TEST_CASE("sampler corpora round trip through the file format", "[sd]") {
    RngStream rng(35008);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pdqp_sd_roundtrip";
    fs::remove_all(dir);
    write_sd_corpus(dir, 8, rng);

    std::vector<SDCorpusEntry> entries = load_sd_corpus(dir);
    REQUIRE(entries.size() == 8);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const SDCorpusEntry& e = entries[i];
        REQUIRE(e.far_label == (i % 2 == 1));
        double tvd = exact_tvd(e.inst.p0, e.inst.p1);
        REQUIRE(std::abs(tvd - e.tvd) < 1e-6);  // index stores rounded text
        if (e.far_label)
            REQUIRE(tvd == 1.0);
        else
            REQUIRE(tvd <= 1.0 / 128.0 + 1e-12);
    }
    fs::remove_all(dir);
}

TEST_CASE("rotated senders always agree, computational senders rarely do", "[phenomena][stat]") {
    RngStream rng(35009);
    BasisDetectReport rep = basis_detect_stats(3, 4000, rng);
    REQUIRE(rep.rotated_all_agree == rep.trials_per_arm);
    REQUIRE(std::abs(rep.expected_rate() - 0.25) < 1e-15);
    double sigma = std::sqrt(0.25 * 0.75 / double(rep.trials_per_arm));
    REQUIRE(std::abs(rep.computational_agree_rate() - 0.25) < 5.0 * sigma);
}

TEST_CASE("one query plus repeated reads recovers a whole truth table", "[phenomena][stat]") {
    RngStream rng(35010);
    ClassicalFunction f(3, 1, {1, 0, 0, 1, 1, 1, 0, 0});
    OneQueryReport rep = one_query_evaluate(f, 54, rng);
    REQUIRE(rep.mismatches == 0);
    REQUIRE(std::abs(rep.expected_fraction() - coverage_n3_r54) < 1e-12);
    REQUIRE(rep.recovered_fraction() >= 0.99);  // full recovery at this seed

    OneQueryReport one = one_query_evaluate(f, 1, rng);
    REQUIRE(one.distinct_inputs_seen == 1);
    REQUIRE(one.mismatches == 0);

    REQUIRE_THROWS_AS(one_query_evaluate(ClassicalFunction::zero(2, 2), 4, rng),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(one_query_evaluate(f, 0, rng), std::invalid_argument);
}

TEST_CASE("many classical bits ride on one qubit", "[phenomena][stat]") {
    RngStream rng(35011);
    CommReport zero = one_qubit_communicate(0, 3, 4096, rng);
    REQUIRE(zero.exact());  // theta = 0 reads deterministically

    int wrong = 0;
    for (int t = 0; t < 100; ++t) {
        CommReport rep = one_qubit_communicate(uint32_t(t % 8), 3, 4096, rng);
        REQUIRE(rep.sent == uint32_t(t % 8));
        if (!rep.exact()) ++wrong;
    }
    REQUIRE(wrong <= 5);
}

TEST_CASE("tomography on repeated reads clones an unknown qubit", "[phenomena][stat]") {
    RngStream rng(35012);
    CloneReport up = clone_via_tomography(StateVector(1), 10000, rng);
    double r = 5.0 / std::sqrt(10000.0);
    REQUIRE(std::abs(up.bloch[0]) < r);
    REQUIRE(std::abs(up.bloch[1]) < r);
    REQUIRE(std::abs(up.bloch[2] - 1.0) < r);
    REQUIRE(up.distance < 0.05);

    double total = 0.0;
    for (int t = 0; t < 10; ++t) {
        StateVector psi = random_pure_qubit(rng);
        total += clone_via_tomography(psi, 10000, rng).distance;
    }
    REQUIRE(total / 10.0 <= 0.05);
}
