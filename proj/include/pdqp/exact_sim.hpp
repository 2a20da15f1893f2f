#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/distribution.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"

namespace pdqp {

// Signed path counts stay within __int128 comfortably: the engine refuses
// circuits with more than `default_hadamard_budget` branching gates, so any
// count is bounded by 2^budget.
using BigInt = __int128;

inline constexpr int default_hadamard_budget = 26;

namespace detail {

inline std::string int128_str(BigInt v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1u : (unsigned __int128)v;
    std::string s;
    while (u) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

}  // namespace detail

// Amplitude of the form numerator / sqrt(2)^half_exponent, exact for any
// circuit over the supported gates (only Hadamard introduces the sqrt(2)).
struct DyadicAmplitude {
    BigInt numerator = 0;
    int half_exponent = 0;

    double to_double() const {
        double v = std::ldexp(double(numerator), -(half_exponent / 2));
        if (half_exponent & 1) v *= 0.7071067811865475244;  // 1/sqrt(2)
        return v;
    }

    std::string to_string() const {
        if (half_exponent == 0) return detail::int128_str(numerator);
        return detail::int128_str(numerator) + "/sqrt(2)^" + std::to_string(half_exponent);
    }
};

// One operation of a path-sum run: a gate, or a rank-one basis projector
// fixing `qubit` to `bit` (paths on the wrong branch are dropped).
struct PathOp {
    enum class Kind { gate, projector };
    Kind kind = Kind::gate;
    GateOp g;
    int qubit = 0;
    int bit = 0;

    static PathOp of_gate(GateOp op) {
        PathOp p;
        p.kind = Kind::gate;
        p.g = std::move(op);
        return p;
    }
    static PathOp of_projector(int qubit, int bit) {
        PathOp p;
        p.kind = Kind::projector;
        p.qubit = qubit;
        p.bit = bit & 1;
        return p;
    }
};

// Signed path counts per basis index. The represented (unnormalized) state
// has amplitude terms[z] / sqrt(2)^hadamards at index z; without projectors
// the squared counts sum to exactly 2^hadamards.
struct PathSum {
    std::map<std::uint64_t, BigInt> terms;
    int hadamards = 0;

    BigInt mass() const {
        BigInt m = 0;
        for (const auto& [idx, n] : terms) m += n * n;
        return m;
    }
};

namespace detail {

using TermMap = std::map<std::uint64_t, BigInt>;

inline std::uint64_t gather_qubits(std::uint64_t idx, const std::vector<int>& qs, std::size_t count) {
    std::uint64_t y = 0;
    for (std::size_t k = 0; k < count; ++k) y |= ((idx >> qs[k]) & 1ull) << k;
    return y;
}

inline void apply_gate_terms(TermMap& terms, const GateOp& g, int& hadamards) {
    switch (g.kind) {
        case GateKind::hadamard: {
            const std::uint64_t bit = 1ull << g.qubits[0];
            TermMap out;
            for (const auto& [idx, n] : terms) {
                out[idx & ~bit] += n;
                out[idx | bit] += (idx & bit) ? -n : n;
            }
            for (auto it = out.begin(); it != out.end();)
                it = (it->second == 0) ? out.erase(it) : std::next(it);
            terms = std::move(out);
            ++hadamards;
            return;
        }
        case GateKind::pauli_x: {
            const std::uint64_t bit = 1ull << g.qubits[0];
            TermMap out;
            for (const auto& [idx, n] : terms) out[idx ^ bit] = n;
            terms = std::move(out);
            return;
        }
        case GateKind::cnot: {
            const std::uint64_t cbit = 1ull << g.qubits[0], tbit = 1ull << g.qubits[1];
            TermMap out;
            for (const auto& [idx, n] : terms) out[(idx & cbit) ? idx ^ tbit : idx] = n;
            terms = std::move(out);
            return;
        }
        case GateKind::toffoli: {
            const std::uint64_t cmask = (1ull << g.qubits[0]) | (1ull << g.qubits[1]);
            const std::uint64_t tbit = 1ull << g.qubits[2];
            TermMap out;
            for (const auto& [idx, n] : terms)
                out[((idx & cmask) == cmask) ? idx ^ tbit : idx] = n;
            terms = std::move(out);
            return;
        }
        case GateKind::phase_oracle: {
            for (auto& [idx, n] : terms)
                if (g.fn->eval(std::uint32_t(gather_qubits(idx, g.qubits, g.qubits.size()))) & 1u)
                    n = -n;
            return;
        }
        case GateKind::controlled_phase_oracle: {
            const std::uint64_t cbit = 1ull << g.qubits[0];
            std::vector<int> inputs(g.qubits.begin() + 1, g.qubits.end());
            for (auto& [idx, n] : terms)
                if ((idx & cbit) &&
                    (g.fn->eval(std::uint32_t(gather_qubits(idx, inputs, inputs.size()))) & 1u))
                    n = -n;
            return;
        }
        case GateKind::xor_oracle: {
            TermMap out;
            for (const auto& [idx, n] : terms) {
                std::uint64_t x = gather_qubits(idx, g.qubits, std::size_t(g.xor_inputs));
                std::uint32_t f = g.fn->eval(std::uint32_t(x));
                std::uint64_t next = idx;
                for (std::size_t k = std::size_t(g.xor_inputs); k < g.qubits.size(); ++k)
                    next ^= std::uint64_t((f >> (k - g.xor_inputs)) & 1u) << g.qubits[k];
                out[next] = n;
            }
            terms = std::move(out);
            return;
        }
    }
    throw std::logic_error("unhandled gate kind");
}

inline void apply_projector_terms(TermMap& terms, int qubit, int bit) {
    for (auto it = terms.begin(); it != terms.end();) {
        if (int((it->first >> qubit) & 1ull) != bit)
            it = terms.erase(it);
        else
            ++it;
    }
}

}  // namespace detail

inline PathSum run_paths(const std::vector<PathOp>& ops, int num_qubits, std::uint64_t start = 0,
                         int h_budget = default_hadamard_budget) {
    int hcount = 0;
    for (const PathOp& op : ops)
        if (op.kind == PathOp::Kind::gate && op.g.kind == GateKind::hadamard) ++hcount;
    if (hcount > h_budget)
        throw std::runtime_error("path sum needs " + std::to_string(hcount) +
                                 " branching gates, budget is " + std::to_string(h_budget));
    if (num_qubits < 1 || num_qubits > StateVector::max_qubits)
        throw std::invalid_argument("run_paths: bad qubit count");
    if (start >> num_qubits)
        throw std::invalid_argument("run_paths: start index out of range");
    PathSum ps;
    ps.terms[start] = 1;
    for (const PathOp& op : ops) {
        if (op.kind == PathOp::Kind::gate) {
            op.g.check(num_qubits);
            detail::apply_gate_terms(ps.terms, op.g, ps.hadamards);
        } else {
            if (op.qubit < 0 || op.qubit >= num_qubits)
                throw std::invalid_argument("run_paths: projector qubit out of range");
            detail::apply_projector_terms(ps.terms, op.qubit, op.bit);
        }
    }
    return ps;
}

// <out| U_k .. U_1 |in> as an exact dyadic value.
inline DyadicAmplitude path_sum_amplitude(const std::vector<GateOp>& gates, int num_qubits,
                                          std::uint64_t in, std::uint64_t out,
                                          int h_budget = default_hadamard_budget) {
    std::vector<PathOp> ops;
    ops.reserve(gates.size());
    for (const GateOp& g : gates) ops.push_back(PathOp::of_gate(g));
    PathSum ps = run_paths(ops, num_qubits, in, h_budget);
    auto it = ps.terms.find(out);
    return {it == ps.terms.end() ? BigInt(0) : it->second, ps.hadamards};
}

// Probability as an exact integer ratio (the common sqrt(2) powers cancel).
struct ExactProbability {
    BigInt num = 0;
    BigInt den = 1;
    double to_double() const { return double(num) / double(den); }
};

// Draws from an exact ratio with bias below 2^-64 (one 64-bit draw compared
// against num/den scaled to 2^64).
inline bool exact_bernoulli(const ExactProbability& p, RngStream& rng) {
    unsigned __int128 r = rng.next_u64();
    return r * (unsigned __int128)p.den < ((unsigned __int128)p.num << 64);
}

// A bit of the register at a point in time: time 0 is the initial state,
// time t >= 1 is after step t's gates and that step's collapse.
struct BitRef {
    int time = 0;
    int qubit = 0;
};

// A basis-value condition imposed at a point in time, either a recorded
// collapse outcome (persistent) or an already-sampled bit of the current
// non-collapsing read (discarded once the read completes).
struct CollapseConstraint {
    int time = 0;
    int qubit = 0;
    int value = 0;
};

// P(target bit = 1 | record), as an exact ratio of summed squared path
// counts. The record must not reach past the target time.
inline ExactProbability conditional_bit_probability(const Circuit& c, BitRef target,
                                                    const std::vector<CollapseConstraint>& record,
                                                    int h_budget = default_hadamard_budget) {
    if (target.time < 0 || target.time > int(c.steps.size()))
        throw std::invalid_argument("conditional_bit_probability: time out of range");
    if (target.qubit < 0 || target.qubit >= c.num_qubits)
        throw std::invalid_argument("conditional_bit_probability: qubit out of range");
    for (const CollapseConstraint& cc : record)
        if (cc.time > target.time)
            throw std::invalid_argument("conditional_bit_probability: constraint after target");
    std::vector<PathOp> ops;
    auto add_constraints_at = [&](int time) {
        for (const CollapseConstraint& cc : record)
            if (cc.time == time) ops.push_back(PathOp::of_projector(cc.qubit, cc.value));
    };
    add_constraints_at(0);
    for (int s = 1; s <= target.time; ++s) {
        for (const GateOp& g : c.steps[s - 1].gates) ops.push_back(PathOp::of_gate(g));
        add_constraints_at(s);
    }
    PathSum ps = run_paths(ops, c.num_qubits, 0, h_budget);
    ExactProbability p{0, 0};
    for (const auto& [idx, n] : ps.terms) {
        BigInt sq = n * n;
        p.den += sq;
        if ((idx >> target.qubit) & 1ull) p.num += sq;
    }
    if (p.den == 0)
        throw std::runtime_error("conditional_bit_probability: record has zero probability");
    return p;
}

// Runs the circuit once entirely on integer path sums: collapse bits are
// drawn from exact ratios and persist as constraints; each non-collapsing
// sample is drawn bit by bit under temporary constraints that are dropped
// when the read completes.
inline History exact_sample_history(const Circuit& c, RngStream& rng,
                                    int h_budget = default_hadamard_budget) {
    validate(c);
    History h;
    h.samples.push_back(0u);  // v_0: the initial state is a basis state
    std::vector<CollapseConstraint> record;
    for (int t = 1; t <= int(c.steps.size()); ++t) {
        const Step& step = c.steps[t - 1];
        if (step.has_measurement()) {
            std::uint32_t outcome = 0;
            for (std::size_t k = 0; k < step.measured.size(); ++k) {
                int q = step.measured[k];
                ExactProbability p = conditional_bit_probability(c, {t, q}, record, h_budget);
                int bit = exact_bernoulli(p, rng) ? 1 : 0;
                record.push_back({t, q, bit});
                outcome |= std::uint32_t(bit) << k;
            }
            h.collapses.emplace_back(outcome);
        } else {
            h.collapses.emplace_back(std::nullopt);
        }
        std::vector<CollapseConstraint> temp = record;
        std::uint32_t v = 0;
        for (int q = 0; q < c.num_qubits; ++q) {
            ExactProbability p = conditional_bit_probability(c, {t, q}, temp, h_budget);
            int bit = exact_bernoulli(p, rng) ? 1 : 0;
            temp.push_back({t, q, bit});
            v |= std::uint32_t(bit) << q;
        }
        h.samples.push_back(v);
    }
    return h;
}

// Exact distribution of (v_0..v_T) from the path-sum engine: branches over
// collapse outcomes and sample values with integer-ratio probabilities.
// Cross-checks the floating-point enumeration in history_distribution_exact.
inline FiniteDistribution exact_history_distribution(const Circuit& c,
                                                     std::size_t budget = std::size_t(1) << 20,
                                                     int h_budget = default_hadamard_budget) {
    validate(c);
    int hcount = 0;
    for (const Step& step : c.steps)
        for (const GateOp& g : step.gates)
            if (g.kind == GateKind::hadamard) ++hcount;
    if (hcount > h_budget)
        throw std::runtime_error("path sum needs " + std::to_string(hcount) +
                                 " branching gates, budget is " + std::to_string(h_budget));
    FiniteDistribution dist;
    std::size_t leaves = 0;
    Tuple tuple{0u};
    int dummy_h = 0;

    auto step_rec = [&](auto&& self, const detail::TermMap& terms, std::size_t t,
                        double prob) -> void {
        if (t == c.steps.size()) {
            if (++leaves > budget) throw std::runtime_error("history enumeration exceeds budget");
            dist.add(tuple, prob);
            return;
        }
        detail::TermMap evolved = terms;
        for (const GateOp& g : c.steps[t].gates) detail::apply_gate_terms(evolved, g, dummy_h);
        BigInt total = 0;
        for (const auto& [idx, n] : evolved) total += n * n;

        const std::vector<int>& mq = c.steps[t].measured;
        const std::uint32_t outcomes = mq.empty() ? 1u : (1u << mq.size());
        for (std::uint32_t o = 0; o < outcomes; ++o) {
            detail::TermMap group;
            if (mq.empty()) {
                group = evolved;
            } else {
                for (const auto& [idx, n] : evolved) {
                    bool match = true;
                    for (std::size_t k = 0; k < mq.size(); ++k)
                        if (((idx >> mq[k]) & 1ull) != ((o >> k) & 1u)) { match = false; break; }
                    if (match) group[idx] = n;
                }
            }
            BigInt gmass = 0;
            for (const auto& [idx, n] : group) gmass += n * n;
            if (gmass == 0) continue;
            double pg = prob * double(gmass) / double(total);
            for (const auto& [idx, n] : group) {
                tuple.push_back(std::uint32_t(idx));
                self(self, group, t + 1, pg * double(n * n) / double(gmass));
                tuple.pop_back();
            }
        }
    };
    detail::TermMap init{{0u, BigInt(1)}};
    step_rec(step_rec, init, 0, 1.0);
    return dist;
}

}  // namespace pdqp
