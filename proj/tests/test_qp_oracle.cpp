#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "pdqp/distribution.hpp"
#include "pdqp/generators.hpp"
#include "pdqp/hidden_variables.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"
#include "test_util.hpp"

using namespace pdqp;

namespace {

// chi-square critical value, 7 degrees of freedom, alpha = 1e-3
const double chi2_crit_df7 = 24.3219;

FiniteDistribution empirical_histories(const Circuit& c, int samples, RngStream& rng) {
    FiniteDistribution d;
    for (int i = 0; i < samples; ++i) d.add(sample_history(c, rng).samples, 1.0 / samples);
    return d;
}

// Conditioning the enumerated joint on the full prefix must agree with
// conditioning on the previous sample alone.
void require_markov_factorization(const FiniteDistribution& joint, double tol) {
    std::size_t length = joint.support().begin()->first.size();
    for (std::size_t t = 1; t < length; ++t) {
        std::map<Tuple, double> prefix_mass;                    // (v_0..v_{t-1})
        std::map<Tuple, double> prefix_joint;                   // (v_0..v_t)
        std::map<uint32_t, double> last_mass;                   // v_{t-1}
        std::map<std::pair<uint32_t, uint32_t>, double> pair_mass;  // (v_{t-1}, v_t)
        for (const auto& [tuple, p] : joint.support()) {
            Tuple prefix(tuple.begin(), tuple.begin() + t);
            Tuple ext(tuple.begin(), tuple.begin() + t + 1);
            prefix_mass[prefix] += p;
            prefix_joint[ext] += p;
            last_mass[tuple[t - 1]] += p;
            pair_mass[{tuple[t - 1], tuple[t]}] += p;
        }
        for (const auto& [ext, p] : prefix_joint) {
            Tuple prefix(ext.begin(), ext.end() - 1);
            double full = p / prefix_mass.at(prefix);
            double reduced = pair_mass.at({ext[t - 1], ext[t]}) / last_mass.at(ext[t - 1]);
            INFO("conditioning step " << t);
            REQUIRE(std::abs(full - reduced) < tol);
        }
    }
}

}  // namespace

TEST_CASE("the zeroth sample is always zero", "[oracle]") {
    RngStream rng(32001);
    for (const auto& name : testutil::corpus_circuit_names()) {
        Circuit c = testutil::load_corpus_circuit(name);
        for (int i = 0; i < 20; ++i) REQUIRE(sample_history(c, rng).samples.at(0) == 0);
    }
}

TEST_CASE("an empty step samples the unchanged initial state", "[oracle]") {
    RngStream rng(32002);
    Circuit c = parse_circuit_text("qubits 1\nstep\n");
    History h = sample_history(c, rng);
    REQUIRE(h.samples == Tuple{0, 0});
    REQUIRE_FALSE(h.collapses.at(0).has_value());
}

TEST_CASE("after a collapse the sample repeats the recorded outcome", "[oracle]") {
    RngStream rng(32003);
    Circuit c = testutil::load_corpus_circuit("h_measure.qpc");
    for (int i = 0; i < 300; ++i) {
        History h = sample_history(c, rng);
        REQUIRE(h.collapses.at(0).has_value());
        uint32_t b = *h.collapses.at(0);
        REQUIRE(h.samples.at(1) == b);
        REQUIRE(h.samples.at(2) == b);
        REQUIRE(h.samples.at(3) == b);
    }
}

TEST_CASE("repeated samples of a fixed superposition are iid uniform", "[oracle][stat]") {
    // H on step 1, then two idle steps: v1, v2, v3 are three fresh reads of |+>
    RngStream rng(32004);
    Circuit c = parse_circuit_text("qubits 1\nstep\nh 0\nstep\nstep\n");
    const int samples = 100000;
    std::vector<int> cells(8, 0);
    for (int i = 0; i < samples; ++i) {
        History h = sample_history(c, rng);
        ++cells[(h.samples[1] << 2) | (h.samples[2] << 1) | h.samples[3]];
    }
    double expected = samples / 8.0;
    double chi2 = 0.0;
    for (int cell : cells) chi2 += (cell - expected) * (cell - expected) / expected;
    REQUIRE(chi2 < chi2_crit_df7);
}

TEST_CASE("idle steps after one hadamard keep no memory of earlier reads", "[oracle]") {
    Circuit c = parse_circuit_text("qubits 1\nstep\nh 0\nstep\nstep\n");
    FiniteDistribution joint = history_distribution_exact(c);
    REQUIRE(joint.support_size() == 8);
    for (const auto& [tuple, p] : joint.support()) REQUIRE(std::abs(p - 0.125) < 1e-12);
}

TEST_CASE("hadamard applied every step interferes back to zero", "[oracle]") {
    // |0> -> |+> -> |0> -> |+>: the middle read is deterministic
    Circuit c = testutil::load_corpus_circuit("h_three_steps.qpc");
    FiniteDistribution joint = history_distribution_exact(c);
    FiniteDistribution mid = index_marginal(joint, 2);
    REQUIRE(std::abs(mid.prob({0}) - 1.0) < 1e-12);
    FiniteDistribution first = index_marginal(joint, 1);
    REQUIRE(std::abs(first.prob({0}) - 0.5) < 1e-12);
    REQUIRE(std::abs(first.prob({1}) - 0.5) < 1e-12);
}

TEST_CASE("without measurements the samples are independent across steps", "[oracle]") {
    RngStream rng(32005);
    for (const auto& name : {"single_h.qpc", "h_h_interfere.qpc", "h_three_steps.qpc",
                             "x_deterministic.qpc", "parity_inline.qpc"}) {
        INFO("circuit " << name);
        Circuit c = testutil::load_corpus_circuit(name);
        FiniteDistribution joint = history_distribution_exact(c);
        std::vector<FiniteDistribution> marginals;
        for (int t = 0; t <= c.step_count(); ++t) marginals.push_back(index_marginal(joint, t));
        for (const auto& [tuple, p] : joint.support()) {
            double prod = 1.0;
            for (std::size_t t = 0; t < tuple.size(); ++t)
                prod *= marginals[t].prob({tuple[t]});
            REQUIRE(std::abs(p - prod) < 1e-12);
        }
    }
}

TEST_CASE("history joints factor through the previous sample", "[oracle]") {
    for (const auto& name : testutil::corpus_circuit_names()) {
        INFO("circuit " << name);
        Circuit c = testutil::load_corpus_circuit(name);
        require_markov_factorization(history_distribution_exact(c), 1e-9);
    }
}

TEST_CASE("block-form resampling reproduces the history distribution exactly", "[oracle]") {
    for (const auto& name : testutil::corpus_circuit_names()) {
        INFO("circuit " << name);
        Circuit c = testutil::load_corpus_circuit(name);
        FiniteDistribution direct = history_distribution_exact(c);
        FiniteDistribution blocks = history_distribution_pt(to_block_model(to_block_form(c)));
        REQUIRE(max_pointwise_gap(direct, blocks) < 1e-10);
    }
}

TEST_CASE("sampled histories match the enumerated joint", "[oracle][stat]") {
    RngStream rng(32006);
    for (int trial = 0; trial < 2; ++trial) {
        Circuit c = random_circuit_pair(3, 3, rng).base;
        FiniteDistribution exact = history_distribution_exact(c);
        FiniteDistribution emp = empirical_histories(c, 100000, rng);
        REQUIRE(total_variation(exact, emp) < 0.02);
    }
}

TEST_CASE("the block sampler agrees with its own exact distribution", "[oracle][stat]") {
    RngStream rng(32007);
    Circuit c = testutil::load_corpus_circuit("bell_measure.qpc");
    BlockModel m = to_block_model(to_block_form(c));
    FiniteDistribution exact = history_distribution_pt(m);
    const int samples = 20000;
    FiniteDistribution emp;
    for (int i = 0; i < samples; ++i) emp.add(sample_history_blocks(m, rng), 1.0 / samples);
    REQUIRE(total_variation(exact, emp) < 0.02);
}

TEST_CASE("a deterministic circuit yields one history", "[oracle]") {
    RngStream rng(32008);
    Circuit c = testutil::load_corpus_circuit("x_deterministic.qpc");
    FiniteDistribution joint = history_distribution_exact(c);
    REQUIRE(joint.support_size() == 1);
    Tuple expected = joint.support().begin()->first;
    for (int i = 0; i < 50; ++i) REQUIRE(sample_history(c, rng).samples == expected);
}

TEST_CASE("history enumeration honors its budget", "[oracle]") {
    Circuit c = testutil::load_corpus_circuit("bell_both.qpc");
    REQUIRE(history_distribution_exact(c, 2).support_size() == 2);  // exactly at the limit
    REQUIRE_THROWS_AS(history_distribution_exact(c, 1), std::runtime_error);
}
