#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/distribution.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/search.hpp"
#include "pdqp/state_vector.hpp"

namespace pdqp {

// ---- trace norm vs 2-norm ------------------------------------------------

struct TraceL2Report {
    double trace = 0.0;
    double l2 = 0.0;
    bool holds = false;
};

inline TraceL2Report check_trace_vs_l2(const StateVector& a, const StateVector& b) {
    TraceL2Report r;
    r.trace = trace_distance(a, b);
    r.l2 = l2_distance(a, b);
    r.holds = r.trace <= r.l2 + 1e-12;
    return r;
}

// ---- hybrid query bound ---------------------------------------------------

struct HybridStepReport {
    int t = 0;            // gates applied so far
    long long queries = 0;  // oracle consultations among them
    double sum = 0.0;     // sum_x || psi_t - psi_t(x) ||^2
    double bound = 0.0;   // 4 Q(t)^2
    bool holds = false;
};

// Runs the unmarked amplification circuit alongside all N single-marked
// variants and, after every gate, sums the squared 2-norm deviations. The
// sum can only grow where a query sits, by at most 4 per unit of amplitude
// on the probed index, which integrates to the 4Q^2 envelope. Needs the
// measurement-free prefix: the whole sequence here is unitary.
inline std::vector<HybridStepReport> check_hybrid_bound(int n, int iterations) {
    if (n < 1 || n > 12) throw std::invalid_argument("hybrid bound check capped at 12 bits");
    const std::size_t N = std::size_t(1) << n;
    GateSequence base = grover_gate_sequence(n, iterations, std::nullopt, true);
    const std::size_t G = base.gates.size();

    std::vector<StateVector> timeline;
    timeline.reserve(G + 1);
    StateVector s(n + 1);
    timeline.push_back(s);
    for (const GateOp& g : base.gates) {
        s.apply(g);
        timeline.push_back(s);
    }

    std::vector<double> sums(G + 1, 0.0);
    for (std::size_t x = 0; x < N; ++x) {
        GateSequence var = grover_gate_sequence(n, iterations, std::uint32_t(x), true);
        StateVector v(n + 1);
        for (std::size_t t = 1; t <= G; ++t) {
            v.apply(var.gates[t - 1]);
            double d2 = 0.0;
            for (std::size_t z = 0; z < v.dim(); ++z) d2 += std::norm(timeline[t].amp(z) - v.amp(z));
            sums[t] += d2;
        }
    }

    std::vector<HybridStepReport> reports(G + 1);
    long long q = 0;
    for (std::size_t t = 0; t <= G; ++t) {
        if (t > 0 && base.is_query[t - 1]) ++q;
        reports[t].t = int(t);
        reports[t].queries = q;
        reports[t].sum = sums[t];
        reports[t].bound = 4.0 * double(q) * double(q);
        reports[t].holds = sums[t] <= reports[t].bound + 1e-9;
    }
    return reports;
}

// ---- pairwise sample-distance bound ---------------------------------------

namespace detail {

inline std::vector<int> measured_before(const Circuit& c, std::size_t step) {
    std::vector<int> m;
    for (std::size_t t = 0; t + 1 < step; ++t)
        for (int q : c.steps[t].measured) m.push_back(q);
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

inline StateVector state_before_step(const Circuit& c, std::size_t step) {
    StateVector s(c.num_qubits);
    for (std::size_t t = 0; t + 1 < step; ++t) s.apply_all(c.steps[t].gates);
    return s;
}

// Same qubit count, same step/gate/measurement shapes; the classical tables
// behind the oracles are the only thing allowed to differ.
inline void require_same_shape(const Circuit& a, const Circuit& b) {
    if (a.num_qubits != b.num_qubits || a.steps.size() != b.steps.size())
        throw std::invalid_argument("circuit pair differs in size");
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        const Step &sa = a.steps[t], &sb = b.steps[t];
        if (sa.measured != sb.measured || sa.gates.size() != sb.gates.size())
            throw std::invalid_argument("circuit pair differs in shape at step " +
                                        std::to_string(t + 1));
        for (std::size_t g = 0; g < sa.gates.size(); ++g)
            if (sa.gates[g].kind != sb.gates[g].kind || sa.gates[g].qubits != sb.gates[g].qubits)
                throw std::invalid_argument("circuit pair differs in shape at step " +
                                            std::to_string(t + 1));
    }
}

}  // namespace detail

// Joint distribution of (v_{i-1}, v_i) in the deferred form: every collapse
// scheduled before step i is postponed to a single collapse of the
// measured qubits right before the v_{i-1} read. Write-once circuits leave
// those qubits untouched afterwards, so step i's unitary is block-diagonal
// in them and the pair distribution is unchanged — an equality that
// deferred_operational_gap lets tests assert directly.
inline FiniteDistribution pair_dist_deferred(const Circuit& c, std::size_t i) {
    validate(c, ValidateMode::write_once);
    if (i < 1 || i > c.steps.size()) throw std::invalid_argument("pair_dist_deferred: bad step");
    const std::vector<int> m = detail::measured_before(c, i);
    const StateVector phi = detail::state_before_step(c, i);
    FiniteDistribution dist;
    const std::uint32_t records = m.empty() ? 1u : (1u << m.size());
    for (std::uint32_t srec = 0; srec < records; ++srec) {
        double mass = 1.0;
        StateVector phi_s = phi;
        if (!m.empty()) {
            mass = marginal_probability(phi, m, srec);
            if (mass <= 0.0) continue;
            phi_s = detail::project_outcome(phi, m, srec, mass);
        }
        StateVector chi_s = phi_s;
        chi_s.apply_all(c.steps[i - 1].gates);
        for (std::size_t z1 = 0; z1 < phi_s.dim(); ++z1) {
            double p1 = std::norm(phi_s.amp(z1));
            if (p1 <= 0.0) continue;
            for (std::size_t z2 = 0; z2 < chi_s.dim(); ++z2) {
                double p2 = std::norm(chi_s.amp(z2));
                if (p2 > 0.0) dist.add({std::uint32_t(z1), std::uint32_t(z2)}, mass * p1 * p2);
            }
        }
    }
    return dist;
}

// Distance between the deferred pair distribution and the one marginalized
// out of the operational history enumeration; zero (to rounding) on any
// write-once circuit.
inline double deferred_operational_gap(const Circuit& c, std::size_t i,
                                       std::size_t budget = std::size_t(1) << 20) {
    return total_variation(pair_dist_deferred(c, i),
                           pair_marginal(history_distribution_exact(c, budget), i));
}

struct PairwiseReport {
    double d_xi = 0.0;   // distance of the (v_{i-1}, v_i) pair distributions
    double bound = 0.0;  // 5 || phi(x) - phi ||_2
    bool holds = false;
};

// d_{x,i} <= 5 ||phi(x) - phi||_2, with phi the measurement-free state just
// before step i. The pair distributions are computed exactly.
inline PairwiseReport check_pairwise_tv_bound(const Circuit& base, const Circuit& variant,
                                              std::size_t i) {
    detail::require_same_shape(base, variant);
    PairwiseReport rep;
    rep.d_xi = total_variation(pair_dist_deferred(base, i), pair_dist_deferred(variant, i));
    rep.bound = 5.0 * l2_distance(detail::state_before_step(variant, i),
                                  detail::state_before_step(base, i));
    rep.holds = rep.d_xi <= rep.bound + 1e-9;
    return rep;
}

// ---- product-fidelity chain ----------------------------------------------

struct ProductFidelityReport {
    double lhs = 0.0;  // d(V, V^x): distance of the full product read distributions
    double rhs = 0.0;  // sqrt(1 - prod_t |<psi_t|psi_t^x>|^2)
    bool holds = false;
};

// For measurement-free circuits the reads v_1..v_T are independent, one per
// step, so the history distribution is the product of the per-step Born
// distributions and its distance from the variant's is bounded through the
// fidelity of the tensored step states. The distance here is the halved
// total-variation convention; the unhalved 1-norm reading fails already for
// a T = 1 basis flip (1-norm 2 vs fidelity bound 1).
inline ProductFidelityReport check_product_fidelity_chain(const Circuit& base,
                                                          const Circuit& variant,
                                                          double leaf_budget = 2e7) {
    detail::require_same_shape(base, variant);
    for (const Step& s : base.steps)
        if (s.has_measurement())
            throw std::invalid_argument("product-fidelity check requires a measurement-free circuit");

    const std::size_t dim = std::size_t(1) << base.num_qubits;
    std::vector<std::vector<double>> P, Q;
    std::vector<std::vector<std::uint32_t>> support;
    double fidelity_product = 1.0, leaves = 1.0;
    StateVector a(base.num_qubits), b(base.num_qubits);
    for (std::size_t t = 0; t < base.steps.size(); ++t) {
        a.apply_all(base.steps[t].gates);
        b.apply_all(variant.steps[t].gates);
        fidelity_product *= std::norm(inner_product(a, b));
        std::vector<double> pa(dim), pb(dim);
        std::vector<std::uint32_t> sup;
        for (std::size_t z = 0; z < dim; ++z) {
            pa[z] = std::norm(a.amp(z));
            pb[z] = std::norm(b.amp(z));
            if (pa[z] > 0.0 || pb[z] > 0.0) sup.push_back(std::uint32_t(z));
        }
        leaves *= double(sup.size());
        if (leaves > leaf_budget)
            throw std::runtime_error("product distribution enumeration exceeds budget");
        P.push_back(std::move(pa));
        Q.push_back(std::move(pb));
        support.push_back(std::move(sup));
    }

    // sum_z |prod P - prod Q| with branch pruning: once one side's prefix
    // product hits zero the remaining block contributes the other side's
    // prefix mass.
    auto rec = [&](auto&& self, std::size_t t, double pp, double qq) -> double {
        if (pp == 0.0 && qq == 0.0) return 0.0;
        if (t == P.size()) return std::abs(pp - qq);
        if (pp == 0.0) return qq;
        if (qq == 0.0) return pp;
        double s = 0.0;
        for (std::uint32_t z : support[t]) s += self(self, t + 1, pp * P[t][z], qq * Q[t][z]);
        return s;
    };
    ProductFidelityReport rep;
    rep.lhs = 0.5 * rec(rec, 0, 1.0, 1.0);
    rep.rhs = std::sqrt(std::max(0.0, 1.0 - fidelity_product));
    rep.holds = rep.lhs <= rep.rhs + 1e-9;
    return rep;
}

}  // namespace pdqp
