#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/gates.hpp"

namespace pdqp {

// One time step: an ordered gate list followed by at most one collapsing
// measurement of a qubit subset (kept sorted). A step may be empty — that is
// how extra non-collapsing samples of an unchanged state are taken.
struct Step {
    std::vector<GateOp> gates;
    std::vector<int> measured;

    bool has_measurement() const { return !measured.empty(); }
};

// Circuit IR. `tables` is the per-circuit oracle registry; `table_files`
// remembers which tables came from files so the circuit serializes back to
// an equivalent text form.
struct Circuit {
    int num_qubits = 0;
    std::vector<Step> steps;
    std::map<std::string, std::shared_ptr<const ClassicalFunction>> tables;
    std::map<std::string, std::string> table_files;  // name -> path, for file-backed tables

    int step_count() const { return int(steps.size()); }

    std::shared_ptr<const ClassicalFunction> register_table(
        const std::string& name, std::shared_ptr<const ClassicalFunction> fn) {
        auto [it, inserted] = tables.emplace(name, std::move(fn));
        if (!inserted) throw std::invalid_argument("duplicate table name '" + name + "'");
        return it->second;
    }

    std::shared_ptr<const ClassicalFunction> register_table(const std::string& name,
                                                            ClassicalFunction fn) {
        return register_table(name, std::make_shared<const ClassicalFunction>(std::move(fn)));
    }
};

enum class ValidateMode { basic, write_once };

// basic: at least one step, every gate well-formed for the register width,
// measurement lists in range and duplicate-free.
// write_once: additionally, once a qubit has been measured no later gate may
// modify it (controls and oracle inputs may still read it).
inline void validate(const Circuit& c, ValidateMode mode = ValidateMode::basic) {
    if (c.num_qubits < 1) throw std::invalid_argument("circuit has no qubits");
    if (c.steps.empty()) throw std::invalid_argument("circuit has no steps");
    for (std::size_t t = 0; t < c.steps.size(); ++t) {
        const Step& s = c.steps[t];
        for (const GateOp& g : s.gates) g.check(c.num_qubits);
        std::set<int> seen;
        for (int q : s.measured) {
            if (q < 0 || q >= c.num_qubits)
                throw std::invalid_argument("step " + std::to_string(t + 1) +
                                            ": measured qubit out of range");
            if (!seen.insert(q).second)
                throw std::invalid_argument("step " + std::to_string(t + 1) +
                                            ": qubit measured twice in one step");
        }
    }
    if (mode == ValidateMode::write_once) {
        std::set<int> collapsed;
        for (std::size_t t = 0; t < c.steps.size(); ++t) {
            for (const GateOp& g : c.steps[t].gates)
                for (int q : modified_qubits(g))
                    if (collapsed.count(q))
                        throw std::invalid_argument("step " + std::to_string(t + 1) + ": gate " +
                                                    gate_kind_name(g.kind) + " modifies qubit " +
                                                    std::to_string(q) +
                                                    " after it was measured");
            collapsed.insert(c.steps[t].measured.begin(), c.steps[t].measured.end());
        }
    }
}

inline bool circuits_equal(const Circuit& a, const Circuit& b) {
    if (a.num_qubits != b.num_qubits || a.steps.size() != b.steps.size()) return false;
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        if (a.steps[t].measured != b.steps[t].measured) return false;
        if (a.steps[t].gates.size() != b.steps[t].gates.size()) return false;
        for (std::size_t k = 0; k < a.steps[t].gates.size(); ++k)
            if (!a.steps[t].gates[k].equals(b.steps[t].gates[k])) return false;
    }
    if (a.tables.size() != b.tables.size()) return false;
    for (const auto& [name, fn] : a.tables) {
        auto it = b.tables.find(name);
        if (it == b.tables.end() || !(*fn == *it->second)) return false;
    }
    return true;
}

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Truth table file: 2^n lines, each an m-character binary string (most
// significant bit first). n is inferred from the line count, m from the width.
inline ClassicalFunction load_function_table(std::istream& in) {
    std::vector<std::uint32_t> table;
    int width = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
            line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start])))
            ++start;
        line.erase(0, start);
        if (line.empty()) continue;
        if (width == -1)
            width = int(line.size());
        else if (int(line.size()) != width)
            throw ParseError(line_no, "table row width changed from " + std::to_string(width) +
                                          " to " + std::to_string(line.size()));
        std::uint32_t v = 0;
        for (char ch : line) {
            if (ch != '0' && ch != '1') throw ParseError(line_no, "table rows must be binary strings");
            v = (v << 1) | std::uint32_t(ch - '0');
        }
        table.push_back(v);
    }
    if (table.empty()) throw ParseError(line_no, "table file is empty");
    std::size_t rows = table.size();
    int n = 0;
    while ((std::size_t(1) << n) < rows) ++n;
    if ((std::size_t(1) << n) != rows)
        throw ParseError(line_no, "table has " + std::to_string(rows) +
                                      " rows; expected a power of two");
    return ClassicalFunction(n, width, std::move(table));
}

inline ClassicalFunction load_function_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file '" + path + "'");
    return load_function_table(in);
}

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline int parse_qubit(const std::string& tok, int num_qubits, int line_no) {
    std::size_t used = 0;
    int q;
    try {
        q = std::stoi(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(line_no, "expected a qubit index, got '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError(line_no, "expected a qubit index, got '" + tok + "'");
    if (q < 0 || q >= num_qubits)
        throw ParseError(line_no, "qubit index " + std::to_string(q) + " out of range (qubits " +
                                      std::to_string(num_qubits) + ")");
    return q;
}

// "key=value" -> value, or empty if the token has a different key.
inline bool key_value(const std::string& tok, const std::string& key, std::string& value) {
    if (tok.size() <= key.size() + 1) return false;
    if (tok.compare(0, key.size(), key) != 0 || tok[key.size()] != '=') return false;
    value = tok.substr(key.size() + 1);
    return true;
}

}  // namespace detail

// Circuit text format:
//   qubits <l>
//   table <name> n=<n> m=<m> file=<path>     # or data=<bits>, 2^n groups of m
//   step
//     h <q> | x <q> | cnot <c> <t> | toff <c> <c> <t>
//     phase-oracle <name> <q...>
//     xor-oracle <name> <in...> -> <out...>
//     cphase-oracle <c> <name> <q...>
//     measure <q...>                          # at most one, last in the step
// '#' starts a comment. Table file paths resolve relative to base_dir.
inline Circuit parse_circuit(std::istream& in, const std::string& base_dir = "") {
    Circuit c;
    bool have_qubits = false;
    bool in_step = false;
    bool step_measured = false;
    std::string raw;
    int line_no = 0;

    auto current_step = [&]() -> Step& { return c.steps.back(); };
    auto lookup_table = [&](const std::string& name, int line) {
        auto it = c.tables.find(name);
        if (it == c.tables.end()) throw ParseError(line, "unknown table '" + name + "'");
        return it->second;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
        std::vector<std::string> tok = detail::split_tokens(raw);
        if (tok.empty()) continue;
        const std::string& head = tok[0];

        if (head == "qubits") {
            if (have_qubits) throw ParseError(line_no, "duplicate qubits line");
            if (tok.size() != 2) throw ParseError(line_no, "usage: qubits <count>");
            try {
                c.num_qubits = std::stoi(tok[1]);
            } catch (const std::exception&) {
                throw ParseError(line_no, "bad qubit count '" + tok[1] + "'");
            }
            if (c.num_qubits < 1 || c.num_qubits > 24)
                throw ParseError(line_no, "qubit count must be in 1..24");
            have_qubits = true;
            continue;
        }
        if (!have_qubits) throw ParseError(line_no, "file must start with a qubits line");

        if (head == "table") {
            if (tok.size() != 5) throw ParseError(line_no, "usage: table <name> n=<n> m=<m> file=<path>");
            const std::string& name = tok[1];
            std::string n_str, m_str, src;
            if (!detail::key_value(tok[2], "n", n_str)) throw ParseError(line_no, "expected n=<count>");
            if (!detail::key_value(tok[3], "m", m_str)) throw ParseError(line_no, "expected m=<count>");
            int n, m;
            try {
                n = std::stoi(n_str);
                m = std::stoi(m_str);
            } catch (const std::exception&) {
                throw ParseError(line_no, "bad table arity");
            }
            std::string file, data;
            if (detail::key_value(tok[4], "file", file)) {
                std::string path = file;
                if (!base_dir.empty() && !(path.size() && path[0] == '/'))
                    path = base_dir + "/" + path;
                ClassicalFunction fn = [&] {
                    try {
                        return load_function_table_file(path);
                    } catch (const std::exception& e) {
                        throw ParseError(line_no, std::string("table '") + name + "': " + e.what());
                    }
                }();
                if (fn.input_bits() != n || fn.output_bits() != m)
                    throw ParseError(line_no, "table '" + name + "' declared n=" + std::to_string(n) +
                                                  " m=" + std::to_string(m) + " but file has n=" +
                                                  std::to_string(fn.input_bits()) + " m=" +
                                                  std::to_string(fn.output_bits()));
                if (c.tables.count(name)) throw ParseError(line_no, "duplicate table '" + name + "'");
                c.register_table(name, std::move(fn));
                c.table_files[name] = file;
            } else if (detail::key_value(tok[4], "data", data)) {
                if (n < 0 || n > ClassicalFunction::max_input_bits || m < 1)
                    throw ParseError(line_no, "bad table arity");
                std::size_t rows = std::size_t(1) << n;
                if (data.size() != rows * std::size_t(m))
                    throw ParseError(line_no, "data= needs " + std::to_string(rows * m) +
                                                  " bits, got " + std::to_string(data.size()));
                std::vector<std::uint32_t> table(rows, 0);
                for (std::size_t r = 0; r < rows; ++r)
                    for (int k = 0; k < m; ++k) {
                        char ch = data[r * m + k];
                        if (ch != '0' && ch != '1')
                            throw ParseError(line_no, "data= must be a binary string");
                        table[r] = (table[r] << 1) | std::uint32_t(ch - '0');
                    }
                if (c.tables.count(name)) throw ParseError(line_no, "duplicate table '" + name + "'");
                c.register_table(name, ClassicalFunction(n, m, std::move(table)));
            } else {
                throw ParseError(line_no, "expected file=<path> or data=<bits>");
            }
            continue;
        }

        if (head == "step") {
            if (tok.size() != 1) throw ParseError(line_no, "step takes no arguments");
            c.steps.emplace_back();
            in_step = true;
            step_measured = false;
            continue;
        }

        if (!in_step) throw ParseError(line_no, "'" + head + "' must appear inside a step");
        if (step_measured) throw ParseError(line_no, "measure must be the last line of its step");

        if (head == "h" || head == "x") {
            if (tok.size() != 2) throw ParseError(line_no, "usage: " + head + " <q>");
            int q = detail::parse_qubit(tok[1], c.num_qubits, line_no);
            current_step().gates.push_back(head == "h" ? GateOp::hadamard(q) : GateOp::pauli_x(q));
        } else if (head == "cnot") {
            if (tok.size() != 3) throw ParseError(line_no, "usage: cnot <control> <target>");
            current_step().gates.push_back(
                GateOp::cnot(detail::parse_qubit(tok[1], c.num_qubits, line_no),
                             detail::parse_qubit(tok[2], c.num_qubits, line_no)));
        } else if (head == "toff") {
            if (tok.size() != 4) throw ParseError(line_no, "usage: toff <control> <control> <target>");
            current_step().gates.push_back(
                GateOp::toffoli(detail::parse_qubit(tok[1], c.num_qubits, line_no),
                                detail::parse_qubit(tok[2], c.num_qubits, line_no),
                                detail::parse_qubit(tok[3], c.num_qubits, line_no)));
        } else if (head == "phase-oracle") {
            if (tok.size() < 3) throw ParseError(line_no, "usage: phase-oracle <name> <q...>");
            std::vector<int> qs;
            for (std::size_t k = 2; k < tok.size(); ++k)
                qs.push_back(detail::parse_qubit(tok[k], c.num_qubits, line_no));
            current_step().gates.push_back(GateOp::phase_oracle(tok[1], lookup_table(tok[1], line_no), qs));
        } else if (head == "cphase-oracle") {
            if (tok.size() < 4) throw ParseError(line_no, "usage: cphase-oracle <control> <name> <q...>");
            int control = detail::parse_qubit(tok[1], c.num_qubits, line_no);
            std::vector<int> qs;
            for (std::size_t k = 3; k < tok.size(); ++k)
                qs.push_back(detail::parse_qubit(tok[k], c.num_qubits, line_no));
            current_step().gates.push_back(
                GateOp::controlled_phase_oracle(control, tok[2], lookup_table(tok[2], line_no), qs));
        } else if (head == "xor-oracle") {
            auto arrow = std::find(tok.begin(), tok.end(), "->");
            if (tok.size() < 5 || arrow == tok.end() || arrow < tok.begin() + 3 || arrow + 1 == tok.end())
                throw ParseError(line_no, "usage: xor-oracle <name> <in...> -> <out...>");
            std::vector<int> ins, outs;
            for (auto it = tok.begin() + 2; it != arrow; ++it)
                ins.push_back(detail::parse_qubit(*it, c.num_qubits, line_no));
            for (auto it = arrow + 1; it != tok.end(); ++it)
                outs.push_back(detail::parse_qubit(*it, c.num_qubits, line_no));
            current_step().gates.push_back(
                GateOp::xor_oracle(tok[1], lookup_table(tok[1], line_no), ins, outs));
        } else if (head == "measure") {
            if (tok.size() < 2) throw ParseError(line_no, "usage: measure <q...>");
            std::vector<int> qs;
            for (std::size_t k = 1; k < tok.size(); ++k)
                qs.push_back(detail::parse_qubit(tok[k], c.num_qubits, line_no));
            std::sort(qs.begin(), qs.end());
            if (std::adjacent_find(qs.begin(), qs.end()) != qs.end())
                throw ParseError(line_no, "qubit measured twice in one step");
            current_step().measured = std::move(qs);
            step_measured = true;
        } else {
            throw ParseError(line_no, "unknown directive '" + head + "'");
        }
        // surface malformed gates (arity vs table, repeats) with the line number
        if (!current_step().gates.empty() && head != "measure") {
            try {
                current_step().gates.back().check(c.num_qubits);
            } catch (const std::invalid_argument& e) {
                throw ParseError(line_no, e.what());
            }
        }
    }

    if (!have_qubits) throw ParseError(line_no, "empty circuit file");
    if (c.steps.empty()) throw ParseError(line_no, "circuit has no steps");
    return c;
}

inline Circuit parse_circuit_text(const std::string& text, const std::string& base_dir = "") {
    std::istringstream in(text);
    return parse_circuit(in, base_dir);
}

inline Circuit parse_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open circuit file '" + path + "'");
    std::string base_dir;
    if (auto pos = path.find_last_of('/'); pos != std::string::npos) base_dir = path.substr(0, pos);
    return parse_circuit(in, base_dir);
}

// Canonical text form; parse(serialize(c)) reproduces the IR exactly.
// In-memory tables with no file origin are emitted inline via data=.
inline std::string serialize_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "qubits " << c.num_qubits << "\n";
    for (const auto& [name, fn] : c.tables) {
        out << "table " << name << " n=" << fn->input_bits() << " m=" << fn->output_bits();
        auto file_it = c.table_files.find(name);
        if (file_it != c.table_files.end()) {
            out << " file=" << file_it->second << "\n";
        } else {
            out << " data=";
            for (std::uint32_t v : fn->table())
                for (int k = fn->output_bits() - 1; k >= 0; --k) out << ((v >> k) & 1u);
            out << "\n";
        }
    }
    for (const Step& s : c.steps) {
        out << "step\n";
        for (const GateOp& g : s.gates) {
            out << "  " << gate_kind_name(g.kind);
            switch (g.kind) {
                case GateKind::hadamard:
                case GateKind::pauli_x:
                case GateKind::cnot:
                case GateKind::toffoli:
                    for (int q : g.qubits) out << ' ' << q;
                    break;
                case GateKind::phase_oracle:
                    out << ' ' << g.oracle_name;
                    for (int q : g.qubits) out << ' ' << q;
                    break;
                case GateKind::controlled_phase_oracle:
                    out << ' ' << g.qubits[0] << ' ' << g.oracle_name;
                    for (std::size_t k = 1; k < g.qubits.size(); ++k) out << ' ' << g.qubits[k];
                    break;
                case GateKind::xor_oracle:
                    out << ' ' << g.oracle_name;
                    for (int k = 0; k < g.xor_inputs; ++k) out << ' ' << g.qubits[k];
                    out << " ->";
                    for (std::size_t k = g.xor_inputs; k < g.qubits.size(); ++k)
                        out << ' ' << g.qubits[k];
                    break;
            }
            out << "\n";
        }
        if (!s.measured.empty()) {
            out << "  measure";
            for (int q : s.measured) out << ' ' << q;
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace pdqp
