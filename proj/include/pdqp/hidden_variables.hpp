#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdqp/block_structure.hpp"
#include "pdqp/distribution.hpp"
#include "pdqp/state_vector.hpp"

namespace pdqp {

// Block mass below which a product-theory block falls back to the uniform
// row (the block is unreachable from any positive-probability index, so the
// choice only keeps the matrix well-formed).
inline constexpr double block_mass_floor = 1e-14;

// Row-stochastic transition matrix of the product hidden-variable theory:
// S[i][j] = weight[j] when i and j share a block, else 0. Rows within a block
// are identical, so only the column weights are stored.
struct StochasticMatrix {
    BlockStructure blocks;
    std::vector<double> weight;

    double entry(std::size_t i, std::size_t j) const {
        return blocks.same_block(i, j) ? weight.at(j) : 0.0;
    }

    std::size_t dim() const { return blocks.dim(); }

    std::size_t sample_row(std::size_t i, RngStream& rng) const {
        const std::vector<std::size_t>& blk = blocks.members(blocks.block_of(i));
        double u = rng.next_double();
        double acc = 0.0;
        std::size_t last = blk.front();
        for (std::size_t j : blk) {
            if (weight[j] > 0.0) last = j;
            acc += weight[j];
            if (u < acc) return j;
        }
        return last;
    }
};

// Joint distribution over (hidden value before, hidden value after) one
// unitary. Entries are stored sparsely so individual cells can be perturbed
// or moved across blocks by diagnostics; cells absent from the map are zero.
class JointProbabilityMatrix {
public:
    explicit JointProbabilityMatrix(BlockStructure blocks) : blocks_(std::move(blocks)) {}

    std::size_t dim() const { return blocks_.dim(); }
    const BlockStructure& blocks() const { return blocks_; }

    double entry(std::size_t i, std::size_t j) const {
        auto it = cells_.find({std::uint32_t(i), std::uint32_t(j)});
        return it == cells_.end() ? 0.0 : it->second;
    }

    void set_entry(std::size_t i, std::size_t j, double p) {
        if (i >= dim() || j >= dim()) throw std::out_of_range("joint matrix index out of range");
        if (p == 0.0)
            cells_.erase({std::uint32_t(i), std::uint32_t(j)});
        else
            cells_[{std::uint32_t(i), std::uint32_t(j)}] = p;
    }

    void add_entry(std::size_t i, std::size_t j, double delta) {
        set_entry(i, j, entry(i, j) + delta);
    }

    const std::map<std::pair<std::uint32_t, std::uint32_t>, double>& cells() const { return cells_; }

    std::vector<double> row_sums() const {
        std::vector<double> r(dim(), 0.0);
        for (const auto& [ij, p] : cells_) r[ij.first] += p;
        return r;
    }

    std::vector<double> col_sums() const {
        std::vector<double> c(dim(), 0.0);
        for (const auto& [ij, p] : cells_) c[ij.second] += p;
        return c;
    }

private:
    BlockStructure blocks_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> cells_;
};

// Entrywise 1-norm of the difference, sum_ij |P_ij - Q_ij| (unhalved).
inline double one_norm_distance(const JointProbabilityMatrix& p, const JointProbabilityMatrix& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("joint matrix dimension mismatch");
    double s = 0.0;
    for (const auto& [ij, v] : p.cells()) s += std::abs(v - q.entry(ij.first, ij.second));
    for (const auto& [ij, v] : q.cells())
        if (!p.cells().count(ij)) s += std::abs(v);
    return s;
}

namespace detail {

// Composes the gate list column by column and verifies no entry above
// `block_entry_tolerance` couples distinct blocks. O(N^2 * gates); capped.
inline void check_composed_respects(const std::vector<GateOp>& gates, int num_qubits,
                                    const BlockStructure& blocks) {
    const std::size_t dim = std::size_t(1) << num_qubits;
    if (blocks.dim() != dim) throw std::invalid_argument("block structure dimension mismatch");
    if (dim > (std::size_t(1) << 12))
        throw std::invalid_argument("dense block-respect check capped at 12 qubits");
    for (std::size_t col = 0; col < dim; ++col) {
        std::vector<cd> e(dim, cd(0.0, 0.0));
        e[col] = cd(1.0, 0.0);
        StateVector column = StateVector::from_amplitudes(num_qubits, std::move(e));
        column.apply_all(gates);
        for (std::size_t row = 0; row < dim; ++row)
            if (std::abs(column.amp(row)) > block_entry_tolerance && !blocks.same_block(row, col))
                throw std::invalid_argument(
                    "unitary does not respect the block structure: couples index " +
                    std::to_string(row) + " and " + std::to_string(col));
    }
}

}  // namespace detail

// Product-theory transition matrix for one unitary (given as a gate list)
// applied to `pre`. Within each block the next hidden value is drawn afresh
// from the block-conditioned distribution of the post state:
//   S_ij = |beta_j|^2 / sum_{k in block(j)} |beta_k|^2   for i ~ j, else 0.
inline StochasticMatrix product_theory_stochastic(const StateVector& pre,
                                                  const std::vector<GateOp>& gates,
                                                  const BlockStructure& blocks) {
    detail::check_composed_respects(gates, pre.num_qubits(), blocks);
    StateVector post = apply_gates(pre, gates);
    StochasticMatrix s{blocks, std::vector<double>(post.dim(), 0.0)};
    for (std::int32_t b = 0; b < blocks.block_count(); ++b) {
        const std::vector<std::size_t>& blk = blocks.members(b);
        double mass = 0.0;
        for (std::size_t j : blk) mass += std::norm(post.amp(j));
        if (mass < block_mass_floor) {
            for (std::size_t j : blk) s.weight[j] = 1.0 / double(blk.size());
        } else {
            for (std::size_t j : blk) s.weight[j] = std::norm(post.amp(j)) / mass;
        }
    }
    return s;
}

// Joint matrix of the product theory, P_ij = |alpha_i|^2 S_ij.
inline JointProbabilityMatrix product_theory_joint(const StateVector& pre,
                                                   const std::vector<GateOp>& gates,
                                                   const BlockStructure& blocks) {
    StochasticMatrix s = product_theory_stochastic(pre, gates, blocks);
    JointProbabilityMatrix p(blocks);
    for (std::size_t i = 0; i < pre.dim(); ++i) {
        double ai = std::norm(pre.amp(i));
        if (ai == 0.0) continue;
        for (std::size_t j : blocks.members(blocks.block_of(i))) {
            double v = ai * s.weight[j];
            if (v != 0.0) p.set_entry(i, j, v);
        }
    }
    return p;
}

// Joint matrix of the circuit-local theory: blocks are the circuit block
// structure of the gate list itself, and within a block
//   P_ij = |alpha_i|^2 |beta_j|^2 / sum_{k in block} |beta_k|^2.
// Coincides with the product theory on that structure.
inline JointProbabilityMatrix dieks_joint(const StateVector& pre, const std::vector<GateOp>& gates) {
    BlockStructure blocks = circuit_block_structure(gates, pre.num_qubits());
    return product_theory_joint(pre, gates, blocks);
}

struct HvValidationReport {
    double max_row_error = 0.0;       // |row sum - |alpha_i|^2|
    double max_col_error = 0.0;       // |col sum - |beta_j|^2|
    double cross_block_leakage = 0.0; // total mass sitting outside the blocks
    double min_entry = 0.0;           // most negative cell (0 when none)
    double worst(double) const { return std::max({max_row_error, max_col_error, cross_block_leakage, -min_entry}); }
    bool ok(double tol) const { return worst(tol) <= tol; }
};

// Checks the defining marginal identities of a hidden-variable joint matrix:
// rows must sum to the Born weights of the pre state, columns to the Born
// weights of the post state, all cells nonnegative and inside the blocks.
inline HvValidationReport validate_hv_matrix(const JointProbabilityMatrix& p,
                                             const StateVector& pre, const StateVector& post) {
    if (p.dim() != pre.dim() || p.dim() != post.dim())
        throw std::invalid_argument("validate_hv_matrix: dimension mismatch");
    HvValidationReport rep;
    std::vector<double> rows = p.row_sums(), cols = p.col_sums();
    for (std::size_t i = 0; i < p.dim(); ++i) {
        rep.max_row_error = std::max(rep.max_row_error, std::abs(rows[i] - std::norm(pre.amp(i))));
        rep.max_col_error = std::max(rep.max_col_error, std::abs(cols[i] - std::norm(post.amp(i))));
    }
    for (const auto& [ij, v] : p.cells()) {
        if (v < rep.min_entry) rep.min_entry = v;
        if (!p.blocks().same_block(ij.first, ij.second)) rep.cross_block_leakage += std::abs(v);
    }
    return rep;
}

// ---- history model over block structures -------------------------------

// A run broken into unitaries U_1..U_T with a block structure per step.
// Requirements: each B_{t+1} refines B_t and the composed U_t respects B_t.
struct BlockModel {
    int num_qubits = 0;
    std::size_t initial = 0;
    std::vector<StochasticMatrix> steps;
};

inline BlockModel build_block_model(const std::vector<std::vector<GateOp>>& unitaries,
                                    const std::vector<BlockStructure>& blocks, int num_qubits,
                                    std::size_t initial = 0) {
    if (unitaries.empty()) throw std::invalid_argument("block model needs at least one step");
    if (unitaries.size() != blocks.size())
        throw std::invalid_argument("block model: one block structure per unitary required");
    const std::size_t dim = std::size_t(1) << num_qubits;
    if (initial >= dim) throw std::invalid_argument("block model: initial index out of range");
    for (std::size_t t = 0; t + 1 < blocks.size(); ++t)
        if (!blocks[t + 1].refines(blocks[t]))
            throw std::invalid_argument("block structure of step " + std::to_string(t + 2) +
                                        " does not refine step " + std::to_string(t + 1));
    BlockModel m;
    m.num_qubits = num_qubits;
    m.initial = initial;
    StateVector state(num_qubits);
    if (initial != 0) {
        std::vector<cd> e(dim, cd(0.0, 0.0));
        e[initial] = cd(1.0, 0.0);
        state = StateVector::from_amplitudes(num_qubits, std::move(e));
    }
    for (std::size_t t = 0; t < unitaries.size(); ++t) {
        m.steps.push_back(product_theory_stochastic(state, unitaries[t], blocks[t]));
        state.apply_all(unitaries[t]);
    }
    return m;
}

// Exact distribution of the hidden-value history (v_0 .. v_T):
//   P(v) = prod_t S_t[v_{t-1}, v_t],  v_0 = initial.
inline FiniteDistribution history_distribution_pt(const BlockModel& m) {
    FiniteDistribution dist;
    Tuple tuple{std::uint32_t(m.initial)};
    auto recurse = [&](auto&& self, std::size_t t, double prob) -> void {
        if (t == m.steps.size()) {
            dist.add(tuple, prob);
            return;
        }
        const StochasticMatrix& s = m.steps[t];
        std::size_t prev = tuple.back();
        for (std::size_t j : s.blocks.members(s.blocks.block_of(prev))) {
            double w = s.weight[j];
            if (w <= 0.0) continue;
            tuple.push_back(std::uint32_t(j));
            self(self, t + 1, prob * w);
            tuple.pop_back();
        }
    };
    recurse(recurse, 0, 1.0);
    return dist;
}

inline FiniteDistribution history_distribution_pt(const std::vector<std::vector<GateOp>>& unitaries,
                                                  const std::vector<BlockStructure>& blocks,
                                                  int num_qubits, std::size_t initial = 0) {
    return history_distribution_pt(build_block_model(unitaries, blocks, num_qubits, initial));
}

// ---- continuity of the circuit-local theory ----------------------------

enum class ContinuityStatus {
    ok,
    block_structure_mismatch,
    epsilon_hypothesis_violated,
};

struct ContinuityReport {
    ContinuityStatus status = ContinuityStatus::ok;
    double pre_trace_distance = 0.0;
    double post_trace_distance = 0.0;
    double lhs = 0.0;    // sum_ij |P_ij - Phat_ij|
    double bound = 0.0;  // 3 epsilon
    bool holds = false;
};

// Perturbation bound for the circuit-local joint matrix: if the two circuits
// share a circuit block structure and both the input states and the output
// states are within trace distance epsilon, the joint matrices differ by at
// most 3 epsilon in entrywise 1-norm. Hypothesis violations are reported, not
// guessed around.
// The slack must cover the noise floor of trace_distance near zero, which is
// sqrt-amplified roundoff (about 1e-8 for unit-norm doubles), not plain
// machine epsilon.
inline ContinuityReport dieks_continuity_check(const StateVector& psi, const StateVector& psi_x,
                                               const std::vector<GateOp>& gates,
                                               const std::vector<GateOp>& gates_x, double epsilon,
                                               double slack = 1e-7) {
    ContinuityReport rep;
    BlockStructure blocks = circuit_block_structure(gates, psi.num_qubits());
    BlockStructure blocks_x = circuit_block_structure(gates_x, psi_x.num_qubits());
    if (!(blocks == blocks_x)) {
        rep.status = ContinuityStatus::block_structure_mismatch;
        return rep;
    }
    rep.pre_trace_distance = trace_distance(psi, psi_x);
    rep.post_trace_distance = trace_distance(apply_gates(psi, gates), apply_gates(psi_x, gates_x));
    if (rep.pre_trace_distance > epsilon + slack || rep.post_trace_distance > epsilon + slack) {
        rep.status = ContinuityStatus::epsilon_hypothesis_violated;
        return rep;
    }
    rep.lhs = one_norm_distance(product_theory_joint(psi, gates, blocks),
                                product_theory_joint(psi_x, gates_x, blocks));
    rep.bound = 3.0 * epsilon;
    rep.holds = rep.lhs <= rep.bound + slack;
    return rep;
}

}  // namespace pdqp
