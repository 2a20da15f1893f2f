#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/state_vector.hpp"

namespace pdqp {

// Unstructured search over N = 2^n items with at most one marked index.
// The quantum side runs K amplitude-amplification rounds, writes the oracle
// bit onto an ancilla, and then reads R non-collapsing samples of the same
// final state; any sample with the ancilla set exhibits the marked index.
struct SearchInstance {
    int num_bits = 0;
    std::uint32_t marked = 0;
    bool has_marked = true;
    int grover_iterations = 0;        // K
    long long non_collapsing_samples = 0;  // R
};

inline long long cube_root_ceil(long long n) {
    long long k = 1;
    while (k * k * k < n) ++k;
    return k;
}

// K = ceil(N^(1/3)).
inline int search_iteration_budget(int n) { return int(cube_root_ceil(1ll << n)); }

// R = ceil(N^(1/3) * log2 N); exact when n is a multiple of 3, otherwise the
// value is irrational and nowhere near an integer for any feasible n.
inline long long search_read_budget(int n) {
    if (n % 3 == 0) return (1ll << (n / 3)) * n;
    long double r = cbrtl((long double)(1ll << n)) * n;
    return (long long)ceill(r);
}

inline SearchInstance make_search_instance(int n, std::uint32_t marked, bool has_marked = true) {
    if (n < 1 || n > 20) throw std::invalid_argument("search register size out of range");
    if (has_marked && (marked >> n)) throw std::invalid_argument("marked index out of range");
    SearchInstance inst;
    inst.num_bits = n;
    inst.marked = marked;
    inst.has_marked = has_marked;
    inst.grover_iterations = search_iteration_budget(n);
    inst.non_collapsing_samples = search_read_budget(n);
    return inst;
}

// The amplification gate list on qubits 0..n-1 (ancilla n when `with_xor`):
// H^n, then K rounds of [oracle phase flip; H^n; flip-all-but-zero; H^n],
// then optionally one xor query writing f onto the ancilla. The final H
// sandwich is exactly the inversion about the mean, since the flip equals
// 2|0><0| - I. `is_query[i]` marks the gates that consult f; the fixed
// flip-all-but-zero table is input-independent and is not a query.
struct GateSequence {
    std::vector<GateOp> gates;
    std::vector<bool> is_query;
};

inline GateSequence grover_gate_sequence(int n, int iterations, std::optional<std::uint32_t> marked,
                                         bool with_xor) {
    auto f = std::make_shared<const ClassicalFunction>(
        marked ? ClassicalFunction::point_mask(n, *marked) : ClassicalFunction::zero(n, 1));
    auto nz = std::make_shared<const ClassicalFunction>(ClassicalFunction::nonzero_mask(n));
    std::vector<int> reg(n);
    for (int q = 0; q < n; ++q) reg[q] = q;

    GateSequence seq;
    auto push = [&](GateOp g, bool query) {
        seq.gates.push_back(std::move(g));
        seq.is_query.push_back(query);
    };
    for (int q = 0; q < n; ++q) push(GateOp::hadamard(q), false);
    for (int k = 0; k < iterations; ++k) {
        push(GateOp::phase_oracle("f", f, reg), true);
        for (int q = 0; q < n; ++q) push(GateOp::hadamard(q), false);
        push(GateOp::phase_oracle("nonzero", nz, reg), false);
        for (int q = 0; q < n; ++q) push(GateOp::hadamard(q), false);
    }
    if (with_xor) push(GateOp::xor_oracle("f", f, reg, {n}), true);
    return seq;
}

// Step 1 prepares the amplified state and writes the ancilla; the R empty
// steps that follow each read one more non-collapsing sample of it.
inline Circuit build_search_circuit(const SearchInstance& inst) {
    Circuit c;
    c.num_qubits = inst.num_bits + 1;
    GateSequence seq = grover_gate_sequence(
        inst.num_bits, inst.grover_iterations,
        inst.has_marked ? std::optional<std::uint32_t>(inst.marked) : std::nullopt, true);
    c.steps.emplace_back();
    c.steps.back().gates = std::move(seq.gates);
    for (long long r = 0; r < inst.non_collapsing_samples; ++r) c.steps.emplace_back();
    for (const GateOp& g : c.steps.front().gates)
        if (g.is_oracle() && !c.tables.count(g.oracle_name)) c.register_table(g.oracle_name, g.fn);
    validate(c, ValidateMode::write_once);
    return c;
}

struct SearchOutcome {
    bool found = false;
    std::uint32_t found_index = 0;
    long long queries = 0;  // oracle consultations (K phase queries + 1 xor)
    long long samples = 0;  // non-collapsing reads scanned
};

// Exact per-sample probability that the ancilla reads 1, i.e. the amplified
// mass on the marked index: sin^2((2K+1) asin(N^(-1/2))).
inline double per_sample_marked_probability(int n, int iterations) {
    double theta = std::asin(std::pow(2.0, -0.5 * n));
    double s = std::sin((2.0 * iterations + 1.0) * theta);
    return s * s;
}

inline SearchOutcome pdqp_search(const SearchInstance& inst, RngStream& rng) {
    Circuit c = build_search_circuit(inst);
    History h = sample_history(c, rng);
    SearchOutcome out;
    out.queries = inst.grover_iterations + 1;
    out.samples = inst.non_collapsing_samples;
    // v_0 precedes the preparation and v_1 is part of the preparation step's
    // read; the algorithm's R budgeted reads are v_2 .. v_{R+1}.
    for (std::size_t i = 2; i < h.samples.size(); ++i) {
        if ((h.samples[i] >> inst.num_bits) & 1u) {
            out.found = true;
            out.found_index = h.samples[i] & ((1u << inst.num_bits) - 1u);
            break;
        }
    }
    return out;
}

// Collapsing comparison arm: amplify with K rounds and measure the register
// once. Query count K; no non-collapsing reads.
inline SearchOutcome grover_baseline(const SearchInstance& inst, RngStream& rng) {
    StateVector state(inst.num_bits);
    GateSequence seq = grover_gate_sequence(
        inst.num_bits, inst.grover_iterations,
        inst.has_marked ? std::optional<std::uint32_t>(inst.marked) : std::nullopt, false);
    state.apply_all(seq.gates);
    std::vector<int> all(inst.num_bits);
    for (int q = 0; q < inst.num_bits; ++q) all[q] = q;
    CollapseResult r = collapse_measure(state, all, rng);
    SearchOutcome out;
    out.queries = inst.grover_iterations;
    out.samples = 0;
    out.found_index = r.outcome;
    out.found = inst.has_marked && r.outcome == inst.marked;
    return out;
}

// Iteration count that maximizes a single collapsing run, floor(pi/4 asin^-1).
inline int baseline_optimal_iterations(int n) {
    double theta = std::asin(std::pow(2.0, -0.5 * n));
    return int(std::floor(3.14159265358979323846 / (4.0 * theta)));
}

// ---- cost curves --------------------------------------------------------

// Cost of one strategy in oracle-interface units: queries plus budgeted
// non-collapsing reads.
struct MinimalCost {
    long long cost = 0;
    int iterations = 0;    // K per run
    long long reads = 0;   // non-collapsing samples (0 for the collapsing arm)
    long long runs = 1;    // independent repetitions (collapsing arm only)
};

namespace detail {

// Smallest R with 1 - (1-p)^R >= 2/3, or -1 when p is too small to matter.
inline long long reads_for_two_thirds(double p, long long cap) {
    if (p >= 2.0 / 3.0) return 1;
    if (p <= 0.0) return -1;
    double r = std::ceil(std::log(1.0 / 3.0) / std::log1p(-p));
    if (!(r > 0) || r > double(cap)) return -1;
    return (long long)r;
}

}  // namespace detail

// Cheapest (K, R) with overall success >= 2/3: cost = (K + 1) + R, where the
// +1 is the ancilla-writing query and each of the R reads independently
// exhibits the marked index with probability sin^2((2K+1) theta).
inline MinimalCost minimal_cost_pdqp(int n) {
    MinimalCost best;
    best.cost = -1;
    for (int k = 0;; ++k) {
        if (best.cost >= 0 && k + 2 > best.cost) break;
        long long reads = detail::reads_for_two_thirds(per_sample_marked_probability(n, k),
                                                       (1ll << 62));
        if (reads < 0) continue;
        long long cost = (k + 1) + reads;
        if (best.cost < 0 || cost < best.cost) {
            best.cost = cost;
            best.iterations = k;
            best.reads = reads;
            best.runs = 1;
        }
    }
    return best;
}

// Cheapest m runs of K >= 1 rounds each, collapsing measure per run:
// cost = m * K, success 1 - (1 - sin^2((2K+1) theta))^m >= 2/3.
inline MinimalCost minimal_cost_baseline(int n) {
    MinimalCost best;
    best.cost = -1;
    int k_cap = baseline_optimal_iterations(n) + 1;
    for (int k = 1; k <= k_cap; ++k) {
        if (best.cost >= 0 && k > best.cost) break;
        long long runs = detail::reads_for_two_thirds(per_sample_marked_probability(n, k),
                                                      (1ll << 62));
        if (runs < 0) continue;
        long long cost = runs * k;
        if (best.cost < 0 || cost < best.cost) {
            best.cost = cost;
            best.iterations = k;
            best.reads = 0;
            best.runs = runs;
        }
    }
    return best;
}

// Least-squares slope of ln(cost) against ln(N) over register sizes
// n_lo..n_hi; a cost curve ~ N^s fits slope s.
template <typename CostFn>
inline double fit_loglog_slope(int n_lo, int n_hi, CostFn cost_of) {
    const double ln2 = 0.69314718055994530942;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int n = n_lo; n <= n_hi; ++n, ++m) {
        double x = n * ln2, y = std::log(double(cost_of(n)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double xbar = sx / m, ybar = sy / m;
    return (sxy - m * xbar * ybar) / (sxx - m * xbar * xbar);
}

}  // namespace pdqp
