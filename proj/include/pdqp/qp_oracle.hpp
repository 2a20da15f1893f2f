#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/distribution.hpp"
#include "pdqp/hidden_variables.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/state_vector.hpp"

namespace pdqp {

// One run of a measured circuit: the non-collapsing samples v_0..v_T plus,
// for steps that measure, the collapse outcome (bit k = value of the k-th
// measured qubit in that step's sorted list).
struct History {
    Tuple samples;                                        // v_0 .. v_T
    std::vector<std::optional<std::uint32_t>> collapses;  // per step, T entries
};

// Runs the circuit once. Per step t: apply the gates, collapse the measured
// qubits (if any), then read one non-collapsing full-basis sample v_t. The
// sample never alters the state. v_0 is read from the initial state.
inline History sample_history(const Circuit& c, RngStream& rng) {
    validate(c);
    History h;
    StateVector state(c.num_qubits);
    h.samples.push_back(std::uint32_t(born_sample(state, rng)));  // v_0, always 0
    for (const Step& step : c.steps) {
        state.apply_all(step.gates);
        if (step.has_measurement()) {
            CollapseResult r = collapse_measure(state, step.measured, rng);
            state = std::move(r.state);
            h.collapses.emplace_back(r.outcome);
        } else {
            h.collapses.emplace_back(std::nullopt);
        }
        h.samples.push_back(std::uint32_t(born_sample(state, rng)));
    }
    return h;
}

namespace detail {

// Projects onto the subspace where the qubits in `mq` read `outcome` and
// renormalizes by the (already computed) outcome probability.
inline StateVector project_outcome(const StateVector& state, const std::vector<int>& mq,
                                   std::uint32_t outcome, double prob) {
    StateVector collapsed = state;
    for (std::size_t z = 0; z < collapsed.dim(); ++z) {
        bool match = true;
        for (std::size_t k = 0; k < mq.size(); ++k)
            if (((z >> mq[k]) & 1u) != ((outcome >> k) & 1u)) { match = false; break; }
        if (!match) collapsed.amplitudes()[z] = cd(0.0, 0.0);
    }
    const double inv = 1.0 / std::sqrt(prob);
    for (auto& a : collapsed.amplitudes()) a *= inv;
    return collapsed;
}

}  // namespace detail

// Exact distribution of the sample tuple (v_0..v_T), marginalized over the
// collapse outcomes. Enumerates every branch with positive probability;
// throws when the support would exceed `budget` histories.
inline FiniteDistribution history_distribution_exact(const Circuit& c,
                                                     std::size_t budget = std::size_t(1) << 20) {
    validate(c);
    FiniteDistribution dist;
    std::size_t leaves = 0;
    Tuple tuple{0u};  // v_0

    // `state` is the (collapsed) state entering step t; `tuple` holds v_0..v_{t-1}.
    auto step_rec = [&](auto&& self, const StateVector& state, std::size_t t, double prob) -> void {
        if (t == c.steps.size()) {
            if (++leaves > budget) throw std::runtime_error("history enumeration exceeds budget");
            dist.add(tuple, prob);
            return;
        }
        StateVector evolved = state;
        evolved.apply_all(c.steps[t].gates);

        const std::vector<int>& mq = c.steps[t].measured;
        const std::uint32_t outcomes = mq.empty() ? 1u : (1u << mq.size());
        for (std::uint32_t o = 0; o < outcomes; ++o) {
            double po = 1.0;
            StateVector collapsed = evolved;
            if (!mq.empty()) {
                po = marginal_probability(evolved, mq, o);
                if (po <= 0.0) continue;
                collapsed = detail::project_outcome(evolved, mq, o, po);
            }
            for (std::size_t z = 0; z < collapsed.dim(); ++z) {
                double pz = std::norm(collapsed.amp(z));
                if (pz <= 0.0) continue;
                tuple.push_back(std::uint32_t(z));
                self(self, collapsed, t + 1, prob * po * pz);
                tuple.pop_back();
            }
        }
    };
    step_rec(step_rec, StateVector(c.num_qubits), 0, 1.0);
    return dist;
}

// ---- conversion to the block-structured history model ------------------

// A measured circuit recast as bare unitaries plus one block structure per
// step: step t runs on the partition induced by the qubits measured in
// steps 1..t-1. Only valid for write-once circuits, where a sample's bits
// on already-measured qubits pin down the whole collapse record.
struct BlockForm {
    int num_qubits = 0;
    std::vector<std::vector<GateOp>> unitaries;
    std::vector<BlockStructure> blocks;
};

inline BlockForm to_block_form(const Circuit& c) {
    validate(c, ValidateMode::write_once);
    if (c.steps.empty()) throw std::invalid_argument("cannot convert an empty circuit");
    BlockForm form;
    form.num_qubits = c.num_qubits;
    std::vector<int> measured_so_far;
    for (const Step& step : c.steps) {
        form.unitaries.push_back(step.gates);
        form.blocks.push_back(BlockStructure::induced_by_qubits(c.num_qubits, measured_so_far));
        for (int q : step.measured) measured_so_far.push_back(q);
    }
    return form;
}

inline BlockModel to_block_model(const BlockForm& form) {
    return build_block_model(form.unitaries, form.blocks, form.num_qubits, 0);
}

// Runs the block-structured model once: v_0 = initial, each v_t drawn from
// the step's transition row at v_{t-1}.
inline Tuple sample_history_blocks(const BlockModel& m, RngStream& rng) {
    Tuple tuple{std::uint32_t(m.initial)};
    std::size_t cur = m.initial;
    for (const StochasticMatrix& s : m.steps) {
        cur = s.sample_row(cur, rng);
        tuple.push_back(std::uint32_t(cur));
    }
    return tuple;
}

}  // namespace pdqp
