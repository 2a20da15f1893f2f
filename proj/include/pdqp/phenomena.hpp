#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/classical_function.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/state_vector.hpp"

// Demonstrations of what repeatable measurement buys (and appears to buy):
// basis information leaking across an entangled pair, whole truth tables
// from one query, n bits through one qubit, and state tomography of a
// single copy. Each demo reports enough to compare against its closed-form
// prediction.
namespace pdqp {

inline constexpr double pi = 3.14159265358979323846;

// ---- entangled-pair basis detection -------------------------------------

// Shared Bell pair; the sender measures their half in the computational or
// the rotated basis; the receiver rotates and reads their half `reads`
// times without collapsing. A rotated-basis sender makes the reads
// deterministic, so "all reads agree" decodes the basis with one-sided
// error 2^(1-reads).
inline Circuit build_basis_detect_circuit(bool rotated_sender, int reads) {
    if (reads < 1) throw std::invalid_argument("need at least one read");
    Circuit c;
    c.num_qubits = 2;
    c.steps.resize(std::size_t(reads) + 1);
    Step& prep = c.steps[0];
    prep.gates.push_back(GateOp::hadamard(0));
    prep.gates.push_back(GateOp::cnot(0, 1));
    if (rotated_sender) prep.gates.push_back(GateOp::hadamard(0));
    prep.measured.push_back(0);
    c.steps[1].gates.push_back(GateOp::hadamard(1));
    validate(c, ValidateMode::write_once);
    return c;
}

inline bool basis_detect_trial(bool rotated_sender, int reads, RngStream& rng) {
    Circuit c = build_basis_detect_circuit(rotated_sender, reads);
    History h = sample_history(c, rng);
    std::uint32_t first = (h.samples[2] >> 1) & 1u;
    for (int r = 1; r < reads; ++r)
        if (((h.samples[std::size_t(r) + 2] >> 1) & 1u) != first) return false;
    return true;
}

struct BasisDetectReport {
    int reads = 0;
    long long trials_per_arm = 0;
    long long computational_all_agree = 0;  // decoding errors
    long long rotated_all_agree = 0;        // should equal trials_per_arm

    double computational_agree_rate() const {
        return double(computational_all_agree) / double(trials_per_arm);
    }
    double expected_rate() const { return std::ldexp(1.0, 1 - reads); }
};

inline BasisDetectReport basis_detect_stats(int reads, long long trials_per_arm, RngStream& rng) {
    BasisDetectReport rep;
    rep.reads = reads;
    rep.trials_per_arm = trials_per_arm;
    for (long long t = 0; t < trials_per_arm; ++t) {
        if (basis_detect_trial(false, reads, rng)) ++rep.computational_all_agree;
        if (basis_detect_trial(true, reads, rng)) ++rep.rotated_all_agree;
    }
    return rep;
}

// ---- a whole truth table from one query ---------------------------------

// One xor query against the uniform superposition, then `reads` repeated
// samples; every sample reveals one (x, f(x)) row. Coverage follows the
// coupon collector: expected fraction 1 - (1 - 2^-n)^reads.
struct OneQueryReport {
    int input_bits = 0;
    long long reads = 0;
    long long distinct_inputs_seen = 0;
    long long mismatches = 0;  // rows that contradict f; always 0

    double recovered_fraction() const {
        return double(distinct_inputs_seen) / double(1ll << input_bits);
    }
    double expected_fraction() const {
        return 1.0 - std::pow(1.0 - std::ldexp(1.0, -input_bits), double(reads));
    }
};

inline OneQueryReport one_query_evaluate(const ClassicalFunction& f, long long reads,
                                         RngStream& rng) {
    if (f.output_bits() != 1) throw std::invalid_argument("one-query demo expects a predicate");
    if (reads < 1) throw std::invalid_argument("one-query demo needs at least one read");
    const int n = f.input_bits();
    Circuit c;
    c.num_qubits = n + 1;
    c.steps.resize(std::size_t(reads));
    std::vector<int> reg(n);
    for (int q = 0; q < n; ++q) {
        reg[q] = q;
        c.steps[0].gates.push_back(GateOp::hadamard(q));
    }
    auto fn = std::make_shared<const ClassicalFunction>(f);
    c.steps[0].gates.push_back(GateOp::xor_oracle("f", fn, reg, {n}));
    c.register_table("f", fn);

    History h = sample_history(c, rng);
    OneQueryReport rep;
    rep.input_bits = n;
    rep.reads = reads;
    std::vector<char> seen(std::size_t(1) << n, 0);
    for (long long r = 1; r <= reads; ++r) {
        std::uint32_t s = h.samples[std::size_t(r)];
        std::uint32_t x = s & ((1u << n) - 1u), bit = (s >> n) & 1u;
        if (!seen[x]) {
            seen[x] = 1;
            ++rep.distinct_inputs_seen;
        }
        if (bit != f.eval(x)) ++rep.mismatches;
    }
    return rep;
}

// ---- n bits through one qubit -------------------------------------------

// The sender encodes x as the angle theta_x = (x / 2^n)(pi/2); the receiver
// estimates sin^2(theta) from `reads` repeated samples and rounds back.
struct CommReport {
    std::uint32_t sent = 0;
    std::uint32_t decoded = 0;
    long long reads = 0;
    bool exact() const { return sent == decoded; }
};

inline CommReport one_qubit_communicate(std::uint32_t x, int n, long long reads, RngStream& rng) {
    if (n < 1 || n > 20 || (x >> n)) throw std::invalid_argument("message out of range");
    const double theta = (double(x) / double(1u << n)) * (pi / 2.0);
    StateVector psi = StateVector::from_amplitudes(1, {cd(std::cos(theta), 0.0),
                                                       cd(std::sin(theta), 0.0)});
    long long ones = 0;
    for (long long r = 0; r < reads; ++r) ones += born_sample(psi, rng);
    double p = double(ones) / double(reads);
    double theta_hat = std::asin(std::sqrt(p));
    long long guess = std::llround(double(1u << n) * theta_hat / (pi / 2.0));
    if (guess >= (1ll << n)) guess = (1ll << n) - 1;
    CommReport rep;
    rep.sent = x;
    rep.decoded = std::uint32_t(guess);
    rep.reads = reads;
    return rep;
}

// ---- single-copy tomography ---------------------------------------------

namespace detail {

inline void apply_one_qubit_unitary(StateVector& s, int q, cd m00, cd m01, cd m10, cd m11) {
    const std::size_t bit = std::size_t(1) << q;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (i & bit) continue;
        cd a = s.amp(i), b = s.amp(i | bit);
        s.amplitudes()[i] = m00 * a + m01 * b;
        s.amplitudes()[i | bit] = m10 * a + m11 * b;
    }
}

}  // namespace detail

inline StateVector random_pure_qubit(RngStream& rng) {
    double z = 2.0 * rng.next_double() - 1.0;
    double phi = 2.0 * pi * rng.next_double();
    double half = 0.5 * std::acos(z);
    return StateVector::from_amplitudes(
        1, {cd(std::cos(half), 0.0),
            cd(std::sin(half) * std::cos(phi), std::sin(half) * std::sin(phi))});
}

struct CloneReport {
    double bloch[3] = {0, 0, 0};  // estimated (X, Y, Z)
    StateVector clone{1};
    double distance = 0.0;  // trace distance to the original
};

// Reads the same single copy `reads_per_basis` times in each of three bases
// (the basis changes are local, applied to a scratch copy of the state; the
// original is never collapsed), rebuilds the Bloch vector, and projects it
// back onto the sphere.
inline CloneReport clone_via_tomography(const StateVector& original, long long reads_per_basis,
                                        RngStream& rng) {
    if (original.num_qubits() != 1) throw std::invalid_argument("tomography demo is single-qubit");
    const cd h0(0.7071067811865475244, 0.0);
    auto ones_fraction = [&](const StateVector& s) {
        long long ones = 0;
        for (long long r = 0; r < reads_per_basis; ++r) ones += born_sample(s, rng);
        return double(ones) / double(reads_per_basis);
    };
    CloneReport rep;
    rep.bloch[2] = 1.0 - 2.0 * ones_fraction(original);  // <Z>

    StateVector xb = original;  // H
    detail::apply_one_qubit_unitary(xb, 0, h0, h0, h0, -h0);
    rep.bloch[0] = 1.0 - 2.0 * ones_fraction(xb);  // <X>

    StateVector yb = original;  // H after S^-1
    detail::apply_one_qubit_unitary(yb, 0, cd(1, 0), cd(0, 0), cd(0, 0), cd(0, -1));
    detail::apply_one_qubit_unitary(yb, 0, h0, h0, h0, -h0);
    rep.bloch[1] = 1.0 - 2.0 * ones_fraction(yb);  // <Y>

    double norm = std::sqrt(rep.bloch[0] * rep.bloch[0] + rep.bloch[1] * rep.bloch[1] +
                            rep.bloch[2] * rep.bloch[2]);
    double rx = rep.bloch[0], ry = rep.bloch[1], rz = rep.bloch[2];
    if (norm > 0) {
        rx /= norm;
        ry /= norm;
        rz /= norm;
    } else {
        rz = 1.0;
    }
    double half = 0.5 * std::acos(std::max(-1.0, std::min(1.0, rz)));
    double phi = std::atan2(ry, rx);
    rep.clone = StateVector::from_amplitudes(
        1, {cd(std::cos(half), 0.0),
            cd(std::sin(half) * std::cos(phi), std::sin(half) * std::sin(phi))});
    rep.distance = trace_distance(original, rep.clone);
    return rep;
}

}  // namespace pdqp
