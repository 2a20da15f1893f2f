#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdqp/classical_function.hpp"

namespace pdqp {

// The fixed gate set. Oracles carry a classical truth table:
//   phase_oracle            |y> -> (-1)^f(y) |y>                 (m = 1)
//   xor_oracle              |x>|z> -> |x>|z XOR f(x)>
//   controlled_phase_oracle |c>|y> -> (-1)^(c AND f(y)) |c>|y>   (m = 1)
enum class GateKind {
    hadamard,
    pauli_x,
    cnot,
    toffoli,
    phase_oracle,
    xor_oracle,
    controlled_phase_oracle,
};

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::hadamard: return "h";
        case GateKind::pauli_x: return "x";
        case GateKind::cnot: return "cnot";
        case GateKind::toffoli: return "toff";
        case GateKind::phase_oracle: return "phase-oracle";
        case GateKind::xor_oracle: return "xor-oracle";
        case GateKind::controlled_phase_oracle: return "cphase-oracle";
    }
    return "?";
}

// One gate application. Qubit layout by kind:
//   hadamard, pauli_x          qubits = {q}
//   cnot                       qubits = {control, target}
//   toffoli                    qubits = {control, control, target}
//   phase_oracle               qubits = oracle inputs, bit k of y = qubits[k]
//   xor_oracle                 qubits = inputs then outputs, split at xor_inputs
//   controlled_phase_oracle    qubits[0] = control, rest = oracle inputs
struct GateOp {
    GateKind kind;
    std::vector<int> qubits;
    int xor_inputs = 0;
    std::string oracle_name;
    std::shared_ptr<const ClassicalFunction> fn;

    static GateOp hadamard(int q) { return {GateKind::hadamard, {q}}; }
    static GateOp pauli_x(int q) { return {GateKind::pauli_x, {q}}; }
    static GateOp cnot(int control, int target) { return {GateKind::cnot, {control, target}}; }
    static GateOp toffoli(int c0, int c1, int target) { return {GateKind::toffoli, {c0, c1, target}}; }

    static GateOp phase_oracle(std::string name, std::shared_ptr<const ClassicalFunction> fn,
                               std::vector<int> inputs) {
        GateOp g{GateKind::phase_oracle, std::move(inputs)};
        g.oracle_name = std::move(name);
        g.fn = std::move(fn);
        return g;
    }

    static GateOp xor_oracle(std::string name, std::shared_ptr<const ClassicalFunction> fn,
                             const std::vector<int>& inputs, const std::vector<int>& outputs) {
        GateOp g{GateKind::xor_oracle, inputs};
        g.qubits.insert(g.qubits.end(), outputs.begin(), outputs.end());
        g.xor_inputs = int(inputs.size());
        g.oracle_name = std::move(name);
        g.fn = std::move(fn);
        return g;
    }

    static GateOp controlled_phase_oracle(int control, std::string name,
                                          std::shared_ptr<const ClassicalFunction> fn,
                                          std::vector<int> inputs) {
        GateOp g{GateKind::controlled_phase_oracle, {control}};
        g.qubits.insert(g.qubits.end(), inputs.begin(), inputs.end());
        g.oracle_name = std::move(name);
        g.fn = std::move(fn);
        return g;
    }

    bool is_oracle() const {
        return kind == GateKind::phase_oracle || kind == GateKind::xor_oracle ||
               kind == GateKind::controlled_phase_oracle;
    }

    // Index range, distinctness and oracle arity checks.
    void check(int num_qubits) const {
        for (int q : qubits)
            if (q < 0 || q >= num_qubits)
                throw std::invalid_argument(std::string(gate_kind_name(kind)) + ": qubit index " +
                                            std::to_string(q) + " out of range");
        for (std::size_t a = 0; a < qubits.size(); ++a)
            for (std::size_t b = a + 1; b < qubits.size(); ++b)
                if (qubits[a] == qubits[b])
                    throw std::invalid_argument(std::string(gate_kind_name(kind)) +
                                                ": repeated qubit index " + std::to_string(qubits[a]));
        switch (kind) {
            case GateKind::hadamard:
            case GateKind::pauli_x:
                if (qubits.size() != 1) throw std::invalid_argument("single-qubit gate needs 1 qubit");
                break;
            case GateKind::cnot:
                if (qubits.size() != 2) throw std::invalid_argument("cnot needs 2 qubits");
                break;
            case GateKind::toffoli:
                if (qubits.size() != 3) throw std::invalid_argument("toff needs 3 qubits");
                break;
            case GateKind::phase_oracle:
                require_fn(int(qubits.size()), 1);
                break;
            case GateKind::controlled_phase_oracle:
                if (qubits.empty()) throw std::invalid_argument("cphase-oracle needs a control qubit");
                require_fn(int(qubits.size()) - 1, 1);
                break;
            case GateKind::xor_oracle:
                if (xor_inputs < 1 || xor_inputs >= int(qubits.size()))
                    throw std::invalid_argument("xor-oracle needs at least one input and one output qubit");
                require_fn(xor_inputs, int(qubits.size()) - xor_inputs);
                break;
        }
    }

    // Structural equality, comparing oracle tables by value.
    bool equals(const GateOp& o) const {
        if (kind != o.kind || qubits != o.qubits || xor_inputs != o.xor_inputs ||
            oracle_name != o.oracle_name)
            return false;
        if ((fn == nullptr) != (o.fn == nullptr)) return false;
        return fn == nullptr || *fn == *o.fn;
    }

private:
    void require_fn(int want_in, int want_out) const {
        if (!fn) throw std::invalid_argument("oracle gate has no function table");
        if (fn->input_bits() != want_in)
            throw std::invalid_argument("oracle '" + oracle_name + "' takes " +
                                        std::to_string(fn->input_bits()) + " input bits, gate wires " +
                                        std::to_string(want_in));
        if (fn->output_bits() != want_out)
            throw std::invalid_argument("oracle '" + oracle_name + "' yields " +
                                        std::to_string(fn->output_bits()) + " output bits, gate wires " +
                                        std::to_string(want_out));
    }
};

// Qubits whose value the gate can change. Controls, phase-oracle inputs and
// xor-oracle inputs only read; they are excluded on purpose (a gate that only
// reads a collapsed qubit cannot disturb it).
inline std::vector<int> modified_qubits(const GateOp& g) {
    switch (g.kind) {
        case GateKind::hadamard:
        case GateKind::pauli_x:
            return {g.qubits[0]};
        case GateKind::cnot:
            return {g.qubits[1]};
        case GateKind::toffoli:
            return {g.qubits[2]};
        case GateKind::phase_oracle:
        case GateKind::controlled_phase_oracle:
            return {};
        case GateKind::xor_oracle:
            return std::vector<int>(g.qubits.begin() + g.xor_inputs, g.qubits.end());
    }
    return {};
}

}  // namespace pdqp
