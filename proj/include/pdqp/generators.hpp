#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pdqp/block_structure.hpp"
#include "pdqp/circuit.hpp"
#include "pdqp/classical_function.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/state_vector.hpp"

// Random-instance generators shared by the test suite and the verification
// command. All draws go through RngStream, so every instance is replayable
// from its seed.
namespace pdqp {

inline StateVector random_state(int num_qubits, RngStream& rng) {
    const std::size_t dim = std::size_t(1) << num_qubits;
    std::vector<cd> amps(dim);
    double norm2 = 0.0;
    for (auto& a : amps) {
        double u1 = 1.0 - rng.next_double(), u2 = rng.next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        a = cd(r * std::cos(2.0 * 3.14159265358979323846 * u2),
               r * std::sin(2.0 * 3.14159265358979323846 * u2));
        norm2 += std::norm(a);
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : amps) a *= inv;
    return StateVector::from_amplitudes(num_qubits, std::move(amps));
}

// A circuit plus a variant that differs only in the table behind one phase
// query (identity for the base, a random predicate for the variant) — the
// shape the query-distance checkers expect.
struct CircuitPair {
    Circuit base;
    Circuit variant;
};

// Random write-once circuit pair. Gates in each step only modify qubits not
// measured in earlier steps; the query slot is diagonal, so it may touch
// anything. The slot goes at the END of its step: the pairwise read bound
// covers steps that are shared outright and steps whose only difference is a
// diagonal factor adjacent to the read (a phase cannot move Born weight), but
// not a differing phase buried under later non-diagonal gates of the same
// step. With `measurement_free` the measurement plan is skipped entirely
// (for the product-fidelity setting); otherwise at least one step measures.
inline CircuitPair random_circuit_pair(int num_qubits, int steps, RngStream& rng,
                                       bool measurement_free = false) {
    if (num_qubits < 1 || num_qubits > 4 || steps < 1 || steps > 4)
        throw std::invalid_argument("random circuit pair: size out of range");

    std::vector<std::vector<int>> plan(steps);
    if (!measurement_free) {
        for (int t = 0; t < steps; ++t)
            for (int q = 0; q < num_qubits; ++q)
                if (rng.next_bernoulli(0.25)) plan[t].push_back(q);
        if ([&] {
                for (const auto& m : plan) if (!m.empty()) return false;
                return true;
            }())
            plan[rng.next_below(steps)].push_back(int(rng.next_below(num_qubits)));
    }

    const std::size_t table_size = std::size_t(1) << num_qubits;
    std::vector<std::uint32_t> zero_table(table_size, 0u), var_table(table_size, 0u);
    bool any = false;
    while (!any)
        for (auto& v : var_table) any |= (v = std::uint32_t(rng.next_below(2))) != 0u;
    auto f_base = std::make_shared<const ClassicalFunction>(num_qubits, 1, zero_table);
    auto f_var = std::make_shared<const ClassicalFunction>(num_qubits, 1, var_table);
    std::vector<int> all(num_qubits);
    for (int q = 0; q < num_qubits; ++q) all[q] = q;
    const int query_step = int(rng.next_below(steps));

    CircuitPair pair;
    pair.base.num_qubits = pair.variant.num_qubits = num_qubits;
    pair.base.steps.resize(steps);
    pair.variant.steps.resize(steps);
    std::vector<char> sealed(num_qubits, 0);  // measured in an earlier step
    for (int t = 0; t < steps; ++t) {
        std::vector<int> writable;
        for (int q = 0; q < num_qubits; ++q)
            if (!sealed[q]) writable.push_back(q);
        const int gate_count = 1 + int(rng.next_below(3));
        const int query_pos = t == query_step ? gate_count : -1;
        for (int g = 0; g <= gate_count; ++g) {
            if (g == query_pos) {
                pair.base.steps[t].gates.push_back(GateOp::phase_oracle("f", f_base, all));
                pair.variant.steps[t].gates.push_back(GateOp::phase_oracle("f", f_var, all));
            }
            if (g == gate_count) break;
            GateOp op = GateOp::hadamard(0);
            if (writable.empty()) {
                op = GateOp::phase_oracle("nz", std::make_shared<const ClassicalFunction>(
                                                    ClassicalFunction::nonzero_mask(num_qubits)),
                                          all);
            } else {
                const int target = writable[rng.next_below(writable.size())];
                std::vector<int> others;
                for (int q = 0; q < num_qubits; ++q)
                    if (q != target) others.push_back(q);
                switch (rng.next_below(others.size() >= 2 ? 4 : (others.empty() ? 2 : 3))) {
                    case 0: op = GateOp::hadamard(target); break;
                    case 1: op = GateOp::pauli_x(target); break;
                    case 2: op = GateOp::cnot(others[rng.next_below(others.size())], target); break;
                    default: {
                        std::size_t c0 = rng.next_below(others.size());
                        std::size_t c1 = rng.next_below(others.size() - 1);
                        if (c1 >= c0) ++c1;
                        op = GateOp::toffoli(others[c0], others[c1], target);
                        break;
                    }
                }
            }
            pair.base.steps[t].gates.push_back(op);
            pair.variant.steps[t].gates.push_back(op);
        }
        pair.base.steps[t].measured = pair.variant.steps[t].measured = plan[t];
        for (int q : plan[t]) sealed[q] = 1;
    }
    for (Circuit* c : {&pair.base, &pair.variant}) {
        c->register_table("f", c == &pair.base ? f_base : f_var);
        validate(*c, ValidateMode::write_once);
    }
    return pair;
}

// Amplitude amplification cut so that every query stands alone in its own
// step: prep, then per round one bare query step and one diffusion step.
// Qubit 0 is measured after the last diffusion and a final bare query
// follows (diagonal, so it may touch the measured qubit), giving the
// read-pair machinery a collapsed record to defer. Base oracle: all-zero;
// variant: point mask at `marked`.
inline CircuitPair grover_sliced_pair(int n, int rounds, std::uint32_t marked) {
    if (n < 1 || n > 4 || rounds < 1 || rounds > 4)
        throw std::invalid_argument("sliced pair: size out of range");
    if (marked >> n) throw std::invalid_argument("sliced pair: marked index out of range");
    const std::size_t table_size = std::size_t(1) << n;
    auto f_base = std::make_shared<const ClassicalFunction>(
        n, 1, std::vector<std::uint32_t>(table_size, 0u));
    auto f_var =
        std::make_shared<const ClassicalFunction>(ClassicalFunction::point_mask(n, marked));
    auto nz = std::make_shared<const ClassicalFunction>(ClassicalFunction::nonzero_mask(n));
    std::vector<int> all(n);
    for (int q = 0; q < n; ++q) all[q] = q;

    CircuitPair pair;
    pair.base.num_qubits = pair.variant.num_qubits = n;
    auto extend = [&](Circuit& c, std::shared_ptr<const ClassicalFunction> f) {
        Step prep;
        for (int q = 0; q < n; ++q) prep.gates.push_back(GateOp::hadamard(q));
        c.steps.push_back(prep);
        for (int r = 0; r < rounds; ++r) {
            Step query;
            query.gates.push_back(GateOp::phase_oracle("f", f, all));
            c.steps.push_back(query);
            Step diffusion;
            for (int q = 0; q < n; ++q) diffusion.gates.push_back(GateOp::hadamard(q));
            diffusion.gates.push_back(GateOp::phase_oracle("nz", nz, all));
            for (int q = 0; q < n; ++q) diffusion.gates.push_back(GateOp::hadamard(q));
            if (r == rounds - 1) diffusion.measured = {0};
            c.steps.push_back(diffusion);
        }
        Step trailing;
        trailing.gates.push_back(GateOp::phase_oracle("f", f, all));
        c.steps.push_back(trailing);
        c.register_table("f", std::move(f));
        c.register_table("nz", nz);
        validate(c, ValidateMode::write_once);
    };
    extend(pair.base, f_base);
    extend(pair.variant, f_var);
    return pair;
}

// Random state / gate-list / block-structure triple for the hidden-variable
// identities: the structure is the circuit's own finest partition or a
// random coarsening of it (any coarsening stays respected).
struct HvInstance {
    StateVector pre;
    std::vector<GateOp> gates;
    BlockStructure blocks;
};

inline HvInstance random_hv_instance(int num_qubits, RngStream& rng) {
    if (num_qubits < 1 || num_qubits > 4)
        throw std::invalid_argument("random hv instance: size out of range");
    std::vector<GateOp> gates;
    const int count = 2 + int(rng.next_below(5));
    for (int g = 0; g < count; ++g) {
        const int target = int(rng.next_below(num_qubits));
        std::vector<int> others;
        for (int q = 0; q < num_qubits; ++q)
            if (q != target) others.push_back(q);
        switch (rng.next_below(num_qubits >= 2 ? 4 : 3)) {
            case 0: gates.push_back(GateOp::hadamard(target)); break;
            case 1: gates.push_back(GateOp::pauli_x(target)); break;
            case 2: {
                const std::size_t size = std::size_t(1) << num_qubits;
                std::vector<std::uint32_t> table(size);
                for (auto& v : table) v = std::uint32_t(rng.next_below(2));
                std::vector<int> all(num_qubits);
                for (int q = 0; q < num_qubits; ++q) all[q] = q;
                gates.push_back(GateOp::phase_oracle(
                    "p", std::make_shared<const ClassicalFunction>(num_qubits, 1, std::move(table)),
                    all));
                break;
            }
            default: gates.push_back(GateOp::cnot(others[rng.next_below(others.size())], target));
        }
    }
    HvInstance inst{random_state(num_qubits, rng), gates,
                    circuit_block_structure(gates, num_qubits)};
    // random coarsening: remap each block onto a random block of lower or
    // equal id
    if (inst.blocks.block_count() > 1 && rng.next_bernoulli(0.5)) {
        std::vector<std::int32_t> target(inst.blocks.block_count());
        for (std::int32_t b = 0; b < inst.blocks.block_count(); ++b)
            target[b] = rng.next_bernoulli(0.4) ? std::int32_t(rng.next_below(std::size_t(b) + 1))
                                                : b;
        std::vector<std::int32_t> labels(inst.blocks.dim());
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = target[inst.blocks.block_of(i)];
        inst.blocks = BlockStructure(std::move(labels));
    }
    return inst;
}

}  // namespace pdqp
