#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/circuit.hpp"
#include "pdqp/classical_function.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"

namespace pdqp {

// A pair of classical samplers: program b maps n uniform input bits to an
// m-bit output, inducing a distribution over 2^m outcomes. The task is to
// tell total-variation distance near 0 from near 1.
struct SDInstance {
    ClassicalFunction p0;
    ClassicalFunction p1;

    int input_bits() const { return p0.input_bits(); }
    int output_bits() const { return p0.output_bits(); }
};

enum class SDDecision { close, far };

inline double exact_tvd(const ClassicalFunction& a, const ClassicalFunction& b) {
    if (a.input_bits() != b.input_bits() || a.output_bits() != b.output_bits())
        throw std::invalid_argument("exact_tvd: mismatched signatures");
    const std::size_t inputs = std::size_t(1) << a.input_bits();
    std::vector<double> ha(std::size_t(1) << a.output_bits(), 0.0), hb = ha;
    const double w = 1.0 / double(inputs);
    for (std::size_t x = 0; x < inputs; ++x) {
        ha[a.eval(std::uint32_t(x))] += w;
        hb[b.eval(std::uint32_t(x))] += w;
    }
    double s = 0.0;
    for (std::size_t z = 0; z < ha.size(); ++z) s += std::abs(ha[z] - hb[z]);
    return 0.5 * s;
}

// Layout: qubit 0 = program selector b, qubits 1..n = input x, qubits
// n+1..n+m = output. Step 1 builds the uniform superposition over (b, x),
// xors P_b(x) onto the output register and collapses that register; the
// two empty steps then supply the second and third non-collapsing reads of
// the surviving (b, x) superposition.
inline Circuit build_sd_circuit(const SDInstance& inst) {
    const int n = inst.input_bits(), m = inst.output_bits();
    std::vector<std::uint32_t> combined(std::size_t(1) << (n + 1));
    for (std::size_t y = 0; y < combined.size(); ++y) {
        std::uint32_t b = std::uint32_t(y) & 1u, x = std::uint32_t(y) >> 1;
        combined[y] = (b ? inst.p1 : inst.p0).eval(x);
    }
    auto pair_fn = std::make_shared<const ClassicalFunction>(n + 1, m, std::move(combined));

    Circuit c;
    c.num_qubits = 1 + n + m;
    c.steps.resize(3);
    Step& prep = c.steps[0];
    std::vector<int> in(n + 1);
    for (int q = 0; q <= n; ++q) {
        in[q] = q;
        prep.gates.push_back(GateOp::hadamard(q));
    }
    std::vector<int> out(m);
    for (int q = 0; q < m; ++q) {
        out[q] = n + 1 + q;
        prep.measured.push_back(n + 1 + q);
    }
    prep.gates.push_back(GateOp::xor_oracle("pair", pair_fn, in, out));
    c.register_table("pair", pair_fn);
    validate(c, ValidateMode::write_once);
    return c;
}

// Far when the three reads of the selector bit agree. After the output
// register collapses to z, the selector marginal is N_0(z)/(N_0(z)+N_1(z));
// identical output distributions leave it at 1/2, so three reads agree with
// probability exactly 1/4, while disjoint supports pin the selector and the
// reads always agree.
inline SDDecision solve_statistical_difference(const SDInstance& inst, RngStream& rng) {
    Circuit c = build_sd_circuit(inst);
    History h = sample_history(c, rng);
    std::uint32_t b1 = h.samples[1] & 1u, b2 = h.samples[2] & 1u, b3 = h.samples[3] & 1u;
    return (b1 == b2 && b2 == b3) ? SDDecision::far : SDDecision::close;
}

// Direct computation of the all-agree probability, bypassing the simulator:
// sum_z P(z) (q_z^3 + (1-q_z)^3) with P(z) the collapse distribution of the
// output register and q_z the conditional selector bias.
inline double sd_agree_probability_exact(const SDInstance& inst) {
    const std::size_t inputs = std::size_t(1) << inst.input_bits();
    std::vector<double> n0(std::size_t(1) << inst.output_bits(), 0.0), n1 = n0;
    for (std::size_t x = 0; x < inputs; ++x) {
        n0[inst.p0.eval(std::uint32_t(x))] += 1.0;
        n1[inst.p1.eval(std::uint32_t(x))] += 1.0;
    }
    double agree = 0.0;
    for (std::size_t z = 0; z < n0.size(); ++z) {
        double total = n0[z] + n1[z];
        if (total == 0.0) continue;
        double pz = total / double(2 * inputs);
        double q = n0[z] / total;
        agree += pz * (q * q * q + (1.0 - q) * (1.0 - q) * (1.0 - q));
    }
    return agree;
}

// Instance generator. Close pairs share a histogram exactly (random input
// permutation) or differ in one table entry (possible only when 2^-n is
// inside the 0.01 band); far pairs use disjoint even/odd output ranges, so
// their distance is exactly 1.
inline SDInstance make_sd_instance(int n, int m, bool close, RngStream& rng) {
    if (n < 1 || n > 8 || m < 1 || m > 8) throw std::invalid_argument("sd instance size out of range");
    const std::size_t inputs = std::size_t(1) << n;
    const std::uint32_t range = 1u << m;
    std::vector<std::uint32_t> t0(inputs), t1(inputs);
    if (close) {
        for (auto& v : t0) v = std::uint32_t(rng.next_below(range));
        std::vector<std::size_t> perm(inputs);
        std::iota(perm.begin(), perm.end(), std::size_t(0));
        for (std::size_t i = inputs - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.next_below(i + 1)]);
        for (std::size_t x = 0; x < inputs; ++x) t1[x] = t0[perm[x]];
        if (n >= 7 && rng.next_bernoulli(0.5))
            t1[rng.next_below(inputs)] = std::uint32_t(rng.next_below(range));
    } else {
        for (auto& v : t0) v = m == 1 ? 0u : std::uint32_t(rng.next_below(range / 2)) * 2u;
        for (auto& v : t1) v = m == 1 ? 1u : std::uint32_t(rng.next_below(range / 2)) * 2u + 1u;
    }
    return {ClassicalFunction(n, m, std::move(t0)), ClassicalFunction(n, m, std::move(t1))};
}

// ---- corpus files -------------------------------------------------------

inline std::string format_function_table(const ClassicalFunction& fn) {
    std::ostringstream out;
    const std::size_t inputs = std::size_t(1) << fn.input_bits();
    for (std::size_t x = 0; x < inputs; ++x) {
        std::uint32_t v = fn.eval(std::uint32_t(x));
        for (int b = fn.output_bits() - 1; b >= 0; --b) out << ((v >> b) & 1u);
        out << '\n';
    }
    return out.str();
}

struct SDCorpusEntry {
    std::string id;
    SDInstance inst;
    bool far_label = false;
    double tvd = 0.0;
};

// Writes <id>.p0.tbl / <id>.p1.tbl pairs plus an index.tsv with the exact
// distances. Half the entries are close, half far, alternating.
inline void write_sd_corpus(const std::filesystem::path& dir, int count, RngStream& rng) {
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "index.tsv");
    if (!index) throw std::runtime_error("cannot write " + (dir / "index.tsv").string());
    index << "id\tinput_bits\toutput_bits\tlabel\ttvd\n";
    for (int i = 0; i < count; ++i) {
        bool close = i % 2 == 0;
        int n = 4 + int(rng.next_below(5));  // 4..8
        int m = 1 + int(rng.next_below(8));  // 1..8
        SDInstance inst = make_sd_instance(n, m, close, rng);
        double tvd = exact_tvd(inst.p0, inst.p1);
        char id[16];
        std::snprintf(id, sizeof id, "sd%04d", i);
        for (int b = 0; b < 2; ++b) {
            std::ofstream tbl(dir / (std::string(id) + (b ? ".p1.tbl" : ".p0.tbl")));
            tbl << format_function_table(b ? inst.p1 : inst.p0);
        }
        index << id << '\t' << n << '\t' << m << '\t' << (close ? "close" : "far") << '\t'
              << tvd << '\n';
    }
}

inline std::vector<SDCorpusEntry> load_sd_corpus(const std::filesystem::path& dir) {
    std::ifstream index(dir / "index.tsv");
    if (!index) throw std::runtime_error("cannot read " + (dir / "index.tsv").string());
    std::vector<SDCorpusEntry> entries;
    std::string line;
    std::getline(index, line);  // header
    while (std::getline(index, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, label;
        int n, m;
        double tvd;
        if (!(row >> id >> n >> m >> label >> tvd))
            throw std::runtime_error("malformed corpus index line: " + line);
        ClassicalFunction p0 = load_function_table_file((dir / (id + ".p0.tbl")).string());
        ClassicalFunction p1 = load_function_table_file((dir / (id + ".p1.tbl")).string());
        entries.push_back({id, {std::move(p0), std::move(p1)}, label == "far", tvd});
    }
    return entries;
}

}  // namespace pdqp
