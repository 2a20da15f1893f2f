#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pdqp/gates.hpp"

namespace pdqp {

// Entries of the fixed gate set are 0, +-1, or +-1/sqrt(2), so "numerically
// nonzero" at this threshold coincides with structurally nonzero.
inline constexpr double block_entry_tolerance = 1e-12;

// A partition of the basis indices 0..N-1 into blocks. Labels are canonical:
// block b is the b-th distinct block by smallest member index, so two equal
// partitions compare equal element-wise.
class BlockStructure {
public:
    static BlockStructure trivial(std::size_t dim) {
        return BlockStructure(std::vector<std::int32_t>(dim, 0));
    }

    static BlockStructure singletons(std::size_t dim) {
        std::vector<std::int32_t> id(dim);
        std::iota(id.begin(), id.end(), 0);
        return BlockStructure(std::move(id));
    }

    // Canonicalizes arbitrary labels.
    explicit BlockStructure(std::vector<std::int32_t> labels) : id_(std::move(labels)) {
        if (id_.empty()) throw std::invalid_argument("empty block structure");
        std::vector<std::int32_t> remap;
        std::vector<std::int32_t> canon(id_.size());
        for (std::size_t i = 0; i < id_.size(); ++i) {
            std::int32_t lab = id_[i];
            std::int32_t found = -1;
            for (std::size_t r = 0; r < remap.size(); ++r)
                if (remap[r] == lab) { found = std::int32_t(r); break; }
            if (found < 0) {
                found = std::int32_t(remap.size());
                remap.push_back(lab);
            }
            canon[i] = found;
        }
        id_ = std::move(canon);
        members_.assign(remap.size(), {});
        for (std::size_t i = 0; i < id_.size(); ++i) members_[id_[i]].push_back(i);
    }

    // Partition induced by a computational-basis measurement of `qubits`:
    // two indices share a block iff they agree on every measured bit.
    static BlockStructure induced_by_qubits(int num_qubits, const std::vector<int>& qubits) {
        std::size_t dim = std::size_t(1) << num_qubits;
        std::vector<std::int32_t> labels(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            std::int32_t pattern = 0;
            for (std::size_t k = 0; k < qubits.size(); ++k)
                pattern |= std::int32_t((i >> qubits[k]) & 1u) << k;
            labels[i] = pattern;
        }
        return BlockStructure(std::move(labels));
    }

    std::size_t dim() const { return id_.size(); }
    int block_count() const { return int(members_.size()); }
    std::int32_t block_of(std::size_t i) const { return id_.at(i); }
    bool same_block(std::size_t i, std::size_t j) const { return id_.at(i) == id_.at(j); }
    const std::vector<std::size_t>& members(std::int32_t b) const { return members_.at(b); }

    // True iff every block of *this sits inside a single block of `coarser`.
    bool refines(const BlockStructure& coarser) const {
        if (dim() != coarser.dim()) return false;
        for (const auto& blk : members_) {
            std::int32_t target = coarser.block_of(blk.front());
            for (std::size_t i : blk)
                if (coarser.block_of(i) != target) return false;
        }
        return true;
    }

    bool operator==(const BlockStructure& o) const { return id_ == o.id_; }

private:
    std::vector<std::int32_t> id_;
    std::vector<std::vector<std::size_t>> members_;
};

// Visit every unordered index pair {i, j}, i < j, coupled by an off-diagonal
// nonzero of the gate's matrix. Diagonal entries never constrain a partition,
// so they are skipped.
template <class F>
void for_each_coupling(const GateOp& g, int num_qubits, F&& fn) {
    g.check(num_qubits);
    const std::size_t dim = std::size_t(1) << num_qubits;
    switch (g.kind) {
        case GateKind::hadamard:
        case GateKind::pauli_x: {
            const std::size_t bit = std::size_t(1) << g.qubits[0];
            for (std::size_t i = 0; i < dim; ++i)
                if (!(i & bit)) fn(i, i | bit);
            break;
        }
        case GateKind::cnot: {
            const std::size_t ctrl = std::size_t(1) << g.qubits[0];
            const std::size_t tgt = std::size_t(1) << g.qubits[1];
            for (std::size_t i = 0; i < dim; ++i)
                if ((i & ctrl) && !(i & tgt)) fn(i, i | tgt);
            break;
        }
        case GateKind::toffoli: {
            const std::size_t ctrl =
                (std::size_t(1) << g.qubits[0]) | (std::size_t(1) << g.qubits[1]);
            const std::size_t tgt = std::size_t(1) << g.qubits[2];
            for (std::size_t i = 0; i < dim; ++i)
                if ((i & ctrl) == ctrl && !(i & tgt)) fn(i, i | tgt);
            break;
        }
        case GateKind::phase_oracle:
        case GateKind::controlled_phase_oracle:
            break;  // diagonal
        case GateKind::xor_oracle: {
            const int* in = g.qubits.data();
            const int* out = g.qubits.data() + g.xor_inputs;
            const int n_out = int(g.qubits.size()) - g.xor_inputs;
            for (std::size_t i = 0; i < dim; ++i) {
                std::uint32_t y = 0;
                for (int k = 0; k < g.xor_inputs; ++k) y |= std::uint32_t((i >> in[k]) & 1u) << k;
                std::uint32_t v = g.fn->eval(y);
                std::size_t j = i;
                for (int k = 0; k < n_out; ++k)
                    if ((v >> k) & 1u) j ^= std::size_t(1) << out[k];
                if (j > i) fn(i, j);
            }
            break;
        }
    }
}

inline bool gate_respects(const GateOp& g, int num_qubits, const BlockStructure& blocks) {
    bool ok = true;
    for_each_coupling(g, num_qubits, [&](std::size_t i, std::size_t j) {
        if (!blocks.same_block(i, j)) ok = false;
    });
    return ok;
}

inline bool gates_respect(const std::vector<GateOp>& gates, int num_qubits,
                          const BlockStructure& blocks) {
    for (const GateOp& g : gates)
        if (!gate_respects(g, num_qubits, blocks)) return false;
    return true;
}

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace detail

// The finest partition of the basis indices such that every gate in the list
// couples indices only within a block: the connected components of the union
// of all gate couplings. Every valid partition for the whole list is a
// coarsening of this one, so its blocks are minimal.
inline BlockStructure circuit_block_structure(const std::vector<GateOp>& gates, int num_qubits) {
    if (num_qubits < 1 || num_qubits > 12)
        throw std::invalid_argument("circuit_block_structure supports 1..12 qubits (dense index scan)");
    const std::size_t dim = std::size_t(1) << num_qubits;
    detail::UnionFind uf(dim);
    for (const GateOp& g : gates)
        for_each_coupling(g, num_qubits, [&](std::size_t i, std::size_t j) { uf.unite(i, j); });
    std::vector<std::int32_t> labels(dim);
    for (std::size_t i = 0; i < dim; ++i) labels[i] = std::int32_t(uf.find(i));
    return BlockStructure(std::move(labels));
}

}  // namespace pdqp
