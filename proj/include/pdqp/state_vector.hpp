#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "pdqp/gates.hpp"
#include "pdqp/rng.hpp"

namespace pdqp {

using cd = std::complex<double>;

// Dense state vector of l qubits over basis indices 0 .. 2^l - 1.
// Qubit 0 is the least-significant bit of the basis index, so |q1 q0> = |10>
// is index 2. Gates preserve the norm up to rounding; the only explicit
// renormalization happens after a collapsing measurement, so drift would
// surface in the norm checks instead of being silently patched over.
class StateVector {
public:
    static constexpr int max_qubits = 24;
    static constexpr double norm_tolerance = 1e-10;

    explicit StateVector(int num_qubits) : num_qubits_(num_qubits) {
        check_width(num_qubits);
        amps_.assign(std::size_t(1) << num_qubits, cd(0.0, 0.0));
        amps_[0] = cd(1.0, 0.0);
    }

    static StateVector from_amplitudes(int num_qubits, std::vector<cd> amps) {
        check_width(num_qubits);
        if (amps.size() != (std::size_t(1) << num_qubits))
            throw std::invalid_argument("amplitude vector has wrong dimension");
        StateVector s(num_qubits);
        s.amps_ = std::move(amps);
        s.check_normalized();
        return s;
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    cd amp(std::size_t i) const { return amps_.at(i); }
    const std::vector<cd>& amplitudes() const { return amps_; }
    std::vector<cd>& amplitudes() { return amps_; }

    double norm_squared() const {
        double s = 0.0;
        for (const cd& a : amps_) s += std::norm(a);
        return s;
    }

    void check_normalized(double tol = norm_tolerance) const {
        double n2 = norm_squared();
        if (std::abs(n2 - 1.0) > tol)
            throw std::runtime_error("state norm^2 drifted to " + std::to_string(n2));
    }

    // Apply a gate in place.
    void apply(const GateOp& g) {
        g.check(num_qubits_);
        switch (g.kind) {
            case GateKind::hadamard: apply_hadamard(g.qubits[0]); break;
            case GateKind::pauli_x: apply_swap_mask(std::size_t(1) << g.qubits[0], 0, 0); break;
            case GateKind::cnot:
                apply_swap_mask(std::size_t(1) << g.qubits[1], std::size_t(1) << g.qubits[0],
                                std::size_t(1) << g.qubits[0]);
                break;
            case GateKind::toffoli: {
                std::size_t ctrl =
                    (std::size_t(1) << g.qubits[0]) | (std::size_t(1) << g.qubits[1]);
                apply_swap_mask(std::size_t(1) << g.qubits[2], ctrl, ctrl);
                break;
            }
            case GateKind::phase_oracle: apply_phase(g, /*control=*/-1); break;
            case GateKind::controlled_phase_oracle: apply_phase(g, g.qubits[0]); break;
            case GateKind::xor_oracle: apply_xor(g); break;
        }
    }

    void apply_all(const std::vector<GateOp>& gates) {
        for (const GateOp& g : gates) apply(g);
    }

private:
    static void check_width(int num_qubits) {
        if (num_qubits < 1 || num_qubits > max_qubits)
            throw std::invalid_argument("qubit count " + std::to_string(num_qubits) +
                                        " outside supported range 1.." + std::to_string(max_qubits));
        if (num_qubits > 20)
            std::cerr << "pdqp: allocating a " << num_qubits << "-qubit state ("
                      << ((std::size_t(16) << num_qubits) >> 20) << " MiB)\n";
    }

    void apply_hadamard(int q) {
        const std::size_t bit = std::size_t(1) << q;
        const double r = 1.0 / std::sqrt(2.0);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            cd a0 = amps_[i], a1 = amps_[i | bit];
            amps_[i] = (a0 + a1) * r;
            amps_[i | bit] = (a0 - a1) * r;
        }
    }

    // Swap amp[i] <-> amp[i ^ target_bit] wherever (i & ctrl_mask) == ctrl_want.
    void apply_swap_mask(std::size_t target_bit, std::size_t ctrl_mask, std::size_t ctrl_want) {
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if (!(i & target_bit) && (i & ctrl_mask) == ctrl_want)
                std::swap(amps_[i], amps_[i | target_bit]);
    }

    std::uint32_t gather_bits(std::size_t i, const int* qs, int count) const {
        std::uint32_t y = 0;
        for (int k = 0; k < count; ++k) y |= std::uint32_t((i >> qs[k]) & 1u) << k;
        return y;
    }

    void apply_phase(const GateOp& g, int control) {
        const int* qs = g.qubits.data();
        int count = int(g.qubits.size());
        if (control >= 0) { ++qs; --count; }  // qubits[0] is the control wire
        const std::size_t cbit = control >= 0 ? (std::size_t(1) << control) : 0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (cbit && !(i & cbit)) continue;
            if (g.fn->eval(gather_bits(i, qs, count)) & 1u) amps_[i] = -amps_[i];
        }
    }

    void apply_xor(const GateOp& g) {
        const int* in = g.qubits.data();
        const int* out = g.qubits.data() + g.xor_inputs;
        const int n_out = int(g.qubits.size()) - g.xor_inputs;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            std::uint32_t v = g.fn->eval(gather_bits(i, in, g.xor_inputs));
            std::size_t j = i;
            for (int k = 0; k < n_out; ++k)
                if ((v >> k) & 1u) j ^= std::size_t(1) << out[k];
            if (j > i) std::swap(amps_[i], amps_[j]);
        }
    }

    int num_qubits_;
    std::vector<cd> amps_;
};

// Value-semantics gate application: returns the image of `state` under g.
inline StateVector apply_gate(StateVector state, const GateOp& g) {
    state.apply(g);
    return state;
}

inline StateVector apply_gates(StateVector state, const std::vector<GateOp>& gates) {
    state.apply_all(gates);
    return state;
}

// One non-collapsing computational-basis sample: inverse-CDF over |amp|^2.
// The state is untouched (taken by const reference and never copied), which
// is the whole point of the model.
inline std::size_t born_sample(const StateVector& state, RngStream& rng) {
    state.check_normalized();
    const std::vector<cd>& a = state.amplitudes();
    const double u = rng.next_double();
    double acc = 0.0;
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double p = std::norm(a[i]);
        if (p > 0.0) last_nonzero = i;
        acc += p;
        if (u < acc) return i;
    }
    return last_nonzero;  // u landed in the rounding slack at the top of the CDF
}

// Probability that measuring `qubits` yields `outcome` (bit k of outcome
// corresponds to qubits[k]).
inline double marginal_probability(const StateVector& state, const std::vector<int>& qubits,
                                   std::uint32_t outcome) {
    for (int q : qubits)
        if (q < 0 || q >= state.num_qubits())
            throw std::invalid_argument("marginal_probability: qubit index out of range");
    const std::vector<cd>& a = state.amplitudes();
    double mass = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < qubits.size() && match; ++k)
            match = (((i >> qubits[k]) & 1u) == ((outcome >> k) & 1u));
        if (match) mass += std::norm(a[i]);
    }
    return mass;
}

struct CollapseResult {
    std::uint32_t outcome;  // bit k = measured value of qubits[k]
    StateVector state;      // projected and renormalized
};

// Collapsing computational-basis measurement of a qubit subset. The outcome
// is read off a full-register Born sample (its restriction to the subset has
// exactly the marginal distribution); the state is then projected onto the
// outcome and explicitly renormalized.
inline CollapseResult collapse_measure(const StateVector& state, const std::vector<int>& qubits,
                                       RngStream& rng) {
    if (qubits.empty()) return {0, state};
    for (int q : qubits)
        if (q < 0 || q >= state.num_qubits())
            throw std::invalid_argument("collapse_measure: qubit index out of range");
    std::size_t sample = born_sample(state, rng);
    std::uint32_t outcome = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k)
        outcome |= std::uint32_t((sample >> qubits[k]) & 1u) << k;

    CollapseResult r{outcome, state};
    std::vector<cd>& a = r.state.amplitudes();
    double mass = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < qubits.size() && match; ++k)
            match = (((i >> qubits[k]) & 1u) == ((outcome >> k) & 1u));
        if (match)
            mass += std::norm(a[i]);
        else
            a[i] = cd(0.0, 0.0);
    }
    if (mass <= 0.0) throw std::runtime_error("collapse_measure: outcome has zero mass");
    const double scale = 1.0 / std::sqrt(mass);
    for (cd& x : a) x *= scale;
    return r;
}

inline cd inner_product(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("inner_product: dimension mismatch");
    cd s(0.0, 0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a.amp(i)) * b.amp(i);
    return s;
}

// Euclidean distance sqrt(sum |a_i - b_i|^2) = sqrt(2 - 2 Re<a|b>) for unit vectors.
inline double l2_distance(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("l2_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::norm(a.amp(i) - b.amp(i));
    return std::sqrt(s);
}

// Trace distance of the pure states, sqrt(1 - |<a|b>|^2). Never exceeds the
// Euclidean distance, and unlike it is insensitive to global phase.
inline double trace_distance(const StateVector& a, const StateVector& b) {
    double f = std::norm(inner_product(a, b));
    return std::sqrt(std::max(0.0, 1.0 - f));
}

}  // namespace pdqp
