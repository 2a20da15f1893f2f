#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "pdqp/generators.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/state_vector.hpp"
#include "test_util.hpp"

using namespace pdqp;
using testutil::make_state;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

StateVector bell_pair() {
    StateVector s(2);
    s.apply(GateOp::hadamard(0));
    s.apply(GateOp::cnot(0, 1));
    return s;
}

std::vector<GateOp> random_gates(int num_qubits, int count, RngStream& rng) {
    std::vector<GateOp> gates;
    for (int i = 0; i < count; ++i) {
        switch (rng.next_below(4)) {
            case 0: gates.push_back(GateOp::hadamard(int(rng.next_below(num_qubits)))); break;
            case 1: gates.push_back(GateOp::pauli_x(int(rng.next_below(num_qubits)))); break;
            case 2: {
                int a = int(rng.next_below(num_qubits));
                int b = (a + 1 + int(rng.next_below(num_qubits - 1))) % num_qubits;
                gates.push_back(GateOp::cnot(a, b));
                break;
            }
            default: {
                int a = int(rng.next_below(num_qubits));
                int b = (a + 1) % num_qubits;
                int c = (a + 2) % num_qubits;
                if (num_qubits >= 3) gates.push_back(GateOp::toffoli(a, b, c));
                else gates.push_back(GateOp::hadamard(a));
                break;
            }
        }
    }
    return gates;
}

}  // namespace

TEST_CASE("qubit zero is the least significant bit", "[state]") {
    StateVector s(2);
    s.apply(GateOp::pauli_x(1));
    // |q1 q0> = |10> lives at index 2
    REQUIRE(std::abs(s.amp(2) - cd(1.0, 0.0)) < 1e-15);
    REQUIRE(std::abs(s.amp(0)) < 1e-15);

    StateVector t(2);
    t.apply(GateOp::pauli_x(0));
    REQUIRE(std::abs(t.amp(1) - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("hadamard splits the zero state evenly", "[state]") {
    StateVector s(1);
    s.apply(GateOp::hadamard(0));
    REQUIRE(std::abs(s.amp(0) - cd(inv_sqrt2, 0.0)) < 1e-12);
    REQUIRE(std::abs(s.amp(1) - cd(inv_sqrt2, 0.0)) < 1e-12);
}

TEST_CASE("cnot flips the target only when the control is set", "[state]") {
    StateVector s(2);
    s.apply(GateOp::cnot(0, 1));
    REQUIRE(std::abs(s.amp(0) - cd(1.0, 0.0)) < 1e-15);

    StateVector t(2);
    t.apply(GateOp::pauli_x(0));
    t.apply(GateOp::cnot(0, 1));
    REQUIRE(std::abs(t.amp(3) - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("bell pair has the expected amplitudes", "[state]") {
    StateVector s = bell_pair();
    REQUIRE(std::abs(s.amp(0) - cd(inv_sqrt2, 0.0)) < 1e-12);
    REQUIRE(std::abs(s.amp(3) - cd(inv_sqrt2, 0.0)) < 1e-12);
    REQUIRE(std::abs(s.amp(1)) < 1e-15);
    REQUIRE(std::abs(s.amp(2)) < 1e-15);
}

TEST_CASE("random gate sequences preserve the norm", "[state]") {
    RngStream rng(31001);
    for (int trial = 0; trial < 25; ++trial) {
        StateVector s = random_state(3, rng);
        auto gates = random_gates(3, 40, rng);
        s.apply_all(gates);
        REQUIRE(std::abs(s.norm_squared() - 1.0) < 1e-10);
        s.check_normalized(1e-10);
    }
}

TEST_CASE("born sampling matches the amplitude weights", "[state][stat]") {
    RngStream rng(31002);
    const int draws = 100000;

    StateVector plus(1);
    plus.apply(GateOp::hadamard(0));
    int zeros = 0;
    for (int i = 0; i < draws; ++i)
        if (born_sample(plus, rng) == 0) ++zeros;
    double sigma = std::sqrt(draws * 0.25);
    REQUIRE(std::abs(zeros - draws * 0.5) < 5.0 * sigma);

    // amplitudes (0.6, 0.8): P(1) = 0.64
    StateVector biased = make_state(1, {cd(0.6, 0.0), cd(0.8, 0.0)});
    int ones = 0;
    for (int i = 0; i < draws; ++i)
        if (born_sample(biased, rng) == 1) ++ones;
    sigma = std::sqrt(draws * 0.64 * 0.36);
    REQUIRE(std::abs(ones - draws * 0.64) < 5.0 * sigma);
}

TEST_CASE("born sampling does not disturb the state", "[state]") {
    RngStream rng(31003);
    StateVector s = random_state(3, rng);
    const std::vector<cd> before = s.amplitudes();
    for (int i = 0; i < 200; ++i) born_sample(s, rng);
    const std::vector<cd>& after = s.amplitudes();
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        REQUIRE(before[i].real() == after[i].real());
        REQUIRE(before[i].imag() == after[i].imag());
    }
}

TEST_CASE("collapse on a deterministic qubit is a no-op", "[state]") {
    RngStream rng(31004);
    StateVector s(1);
    auto r = collapse_measure(s, {0}, rng);
    REQUIRE(r.outcome == 0);
    REQUIRE(std::abs(r.state.amp(0) - cd(1.0, 0.0)) < 1e-15);
}

TEST_CASE("collapsing one half of a bell pair pins both qubits", "[state]") {
    RngStream rng(31005);
    int saw_zero = 0, saw_one = 0;
    for (int i = 0; i < 200; ++i) {
        auto r = collapse_measure(bell_pair(), {0}, rng);
        REQUIRE((r.outcome == 0 || r.outcome == 1));
        std::size_t idx = r.outcome == 0 ? 0 : 3;
        REQUIRE(std::abs(r.state.amp(idx) - cd(1.0, 0.0)) < 1e-12);
        (r.outcome == 0 ? saw_zero : saw_one)++;
    }
    REQUIRE(saw_zero > 0);
    REQUIRE(saw_one > 0);
}

TEST_CASE("collapsing both bell qubits yields only correlated outcomes", "[state]") {
    RngStream rng(31006);
    for (int i = 0; i < 200; ++i) {
        auto r = collapse_measure(bell_pair(), {0, 1}, rng);
        REQUIRE((r.outcome == 0 || r.outcome == 3));
    }
}

TEST_CASE("collapsing the empty set returns outcome zero and the same state", "[state]") {
    RngStream rng(31007);
    StateVector s = random_state(2, rng);
    auto r = collapse_measure(s, {}, rng);
    REQUIRE(r.outcome == 0);
    REQUIRE(l2_distance(r.state, s) < 1e-15);
}

TEST_CASE("marginal probabilities on known states", "[state]") {
    StateVector bell = bell_pair();
    REQUIRE(std::abs(marginal_probability(bell, {0}, 1) - 0.5) < 1e-12);
    REQUIRE(std::abs(marginal_probability(bell, {0, 1}, 3) - 0.5) < 1e-12);
    REQUIRE(std::abs(marginal_probability(bell, {0, 1}, 1) - 0.0) < 1e-12);

    StateVector zeros(3);
    REQUIRE(std::abs(marginal_probability(zeros, {0, 1, 2}, 0) - 1.0) < 1e-15);

    StateVector uniform(2);
    uniform.apply(GateOp::hadamard(0));
    uniform.apply(GateOp::hadamard(1));
    REQUIRE(std::abs(marginal_probability(uniform, {1}, 0) - 0.5) < 1e-12);
}

TEST_CASE("euclidean distance on known state pairs", "[state]") {
    StateVector zero(1);
    StateVector one(1);
    one.apply(GateOp::pauli_x(0));
    StateVector plus(1);
    plus.apply(GateOp::hadamard(0));

    REQUIRE(l2_distance(zero, zero) == 0.0);
    REQUIRE(std::abs(l2_distance(zero, one) - std::sqrt(2.0)) < 1e-12);
    // || |0> - |+> ||_2 = sqrt(2 - sqrt 2)
    REQUIRE(std::abs(l2_distance(zero, plus) - 0.7653668647301795) < 1e-12);
}

TEST_CASE("trace distance on known state pairs", "[state]") {
    StateVector zero(1);
    StateVector one(1);
    one.apply(GateOp::pauli_x(0));
    StateVector plus(1);
    plus.apply(GateOp::hadamard(0));

    REQUIRE(trace_distance(zero, zero) < 1e-12);
    REQUIRE(std::abs(trace_distance(zero, one) - 1.0) < 1e-12);
    REQUIRE(std::abs(trace_distance(zero, plus) - inv_sqrt2) < 1e-12);
}

TEST_CASE("inner product of zero and plus states", "[state]") {
    StateVector zero(1);
    StateVector plus(1);
    plus.apply(GateOp::hadamard(0));
    REQUIRE(std::abs(inner_product(zero, plus) - cd(inv_sqrt2, 0.0)) < 1e-12);
}

TEST_CASE("from_amplitudes rejects malformed input", "[state]") {
    REQUIRE_THROWS_AS(StateVector::from_amplitudes(2, {cd(1.0, 0.0)}), std::invalid_argument);
    REQUIRE_THROWS_AS(StateVector::from_amplitudes(1, {cd(0.5, 0.0), cd(0.5, 0.0)}),
                      std::runtime_error);
}

TEST_CASE("check_normalized flags a drifted state", "[state]") {
    StateVector s(1);
    s.amplitudes()[0] = cd(0.9, 0.0);
    REQUIRE_THROWS(s.check_normalized(1e-10));
}
