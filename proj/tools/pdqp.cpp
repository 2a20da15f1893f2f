// pdqp — command-line front end for the non-collapsing-measurement circuit
// laboratory: sample circuits, run the search and distinguishing experiments,
// inspect hidden-variable matrices, and drive the verification suites.
//
// Grammar: pdqp <run|search|sd|verify|phenomena|exact|hv> [flags] [config-file]
// The optional positional is a key = value config file; flags given on the
// command line take precedence over file keys.  --seed, --out and --format
// apply to every command.  Exit codes: 0 ok, 1 verification failure, 2 usage
// or parse error.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pdqp/block_structure.hpp"
#include "pdqp/checkers.hpp"
#include "pdqp/circuit.hpp"
#include "pdqp/classical_function.hpp"
#include "pdqp/distribution.hpp"
#include "pdqp/exact_sim.hpp"
#include "pdqp/generators.hpp"
#include "pdqp/hidden_variables.hpp"
#include "pdqp/markov.hpp"
#include "pdqp/phenomena.hpp"
#include "pdqp/qp_oracle.hpp"
#include "pdqp/rng.hpp"
#include "pdqp/search.hpp"
#include "pdqp/state_vector.hpp"
#include "pdqp/statistical_difference.hpp"
#include "pdqp/version.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace pdqp;

// A usage-level problem: reported on stderr, exit code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- config file ----------------------------------------------------------

std::string trim(std::string s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

template <typename T>
bool parse_value(const std::string& text, T& into) {
    if constexpr (std::is_same_v<T, std::string>) {
        into = text;
        return true;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1") return into = true, true;
        if (text == "false" || text == "0") return into = false, true;
        return false;
    } else {
        std::istringstream ss(text);
        ss >> into;
        return bool(ss) && ss.eof();
    }
}

// Maps config keys onto the same variables the flags write to.  A key only
// applies when its flag was absent from the command line.
class Bindings {
  public:
    template <typename T>
    void add(const std::string& key, CLI::Option* opt, T& var) {
        items_.push_back({key, opt, [&var](const std::string& s) { return parse_value(s, var); }});
    }

    void apply(const std::string& config_path) const {
        if (config_path.empty()) return;
        auto kv = read_config_file(config_path);
        for (const auto& [key, value] : kv) {
            auto it = std::find_if(items_.begin(), items_.end(),
                                   [&](const Item& b) { return b.key == key; });
            if (it == items_.end())
                throw UsageError(config_path + ": unknown config key '" + key + "'");
            if (it->opt != nullptr && it->opt->count() > 0) continue;  // flag wins
            if (!it->set(value))
                throw UsageError(config_path + ": bad value '" + value + "' for key '" + key + "'");
        }
    }

  private:
    struct Item {
        std::string key;
        CLI::Option* opt;
        std::function<bool(const std::string&)> set;
    };
    std::vector<Item> items_;
};

// ---- output ---------------------------------------------------------------

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    std::string config_path;
};

void add_common(CLI::App* sub, Common& cm, Bindings& bind) {
    auto* seed = sub->add_option("--seed", cm.seed, "random seed (64-bit)");
    auto* out = sub->add_option("--out", cm.out, "output file (default stdout)");
    auto* format = sub->add_option("--format", cm.format, "csv or json");
    sub->add_option("config", cm.config_path, "key = value config file");
    bind.add("seed", seed, cm.seed);
    bind.add("out", out, cm.out);
    bind.add("format", format, cm.format);
}

void check_format(const Common& cm) {
    if (cm.format != "csv" && cm.format != "json")
        throw UsageError("--format must be csv or json, got '" + cm.format + "'");
}

void write_output(const Common& cm, const std::string& text) {
    if (cm.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cm.out, std::ios::binary);
    if (!f) throw UsageError("cannot write output file '" + cm.out + "'");
    f << text;
}

std::string cell_text(const ordered_json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

// Tabular results in either format.  CSV carries a header row and a trailing
// comment block with the command, version, seed and effective parameters;
// JSON carries the same fields structurally.
class Report {
  public:
    Report(std::string command, const Common& cm)
        : command_(std::move(command)), format_(cm.format), seed_(cm.seed) {}

    void config(const std::string& key, ordered_json value) {
        config_.emplace_back(key, std::move(value));
    }
    void columns(std::vector<std::string> names) { cols_ = std::move(names); }
    void row(ordered_json::array_t cells) { rows_.push_back(std::move(cells)); }

    std::string render() const {
        std::ostringstream os;
        if (format_ == "csv") {
            for (std::size_t i = 0; i < cols_.size(); ++i)
                os << (i ? "," : "") << cols_[i];
            os << '\n';
            for (const auto& r : rows_) {
                for (std::size_t i = 0; i < r.size(); ++i)
                    os << (i ? "," : "") << cell_text(r[i]);
                os << '\n';
            }
            os << "# command = " << command_ << '\n';
            os << "# version = " << version << '\n';
            os << "# seed = " << seed_ << '\n';
            for (const auto& [k, v] : config_) os << "# " << k << " = " << cell_text(v) << '\n';
        } else {
            ordered_json doc;
            doc["command"] = command_;
            doc["version"] = version;
            doc["seed"] = seed_;
            doc["config"] = ordered_json::object();
            for (const auto& [k, v] : config_) doc["config"][k] = v;
            doc["columns"] = cols_;
            doc["rows"] = rows_;
            os << doc.dump(2) << '\n';
        }
        return os.str();
    }

  private:
    std::string command_;
    std::string format_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, ordered_json>> config_;
    std::vector<std::string> cols_;
    std::vector<ordered_json::array_t> rows_;
};

Circuit load_circuit(const std::string& path) {
    if (path.empty())
        throw UsageError("no circuit given (--circuit flag or 'circuit' config key)");
    try {
        return parse_circuit_file(path);
    } catch (const ParseError& e) {
        throw UsageError(path + ": " + e.what());
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

std::string zero_pad(long long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*lld", width, v);
    return buf;
}

// ---- run / exact ------------------------------------------------------------

// One CSV column per read v_t, then one per measured qubit in program order.
struct HistoryColumns {
    std::vector<std::string> names;
    std::vector<std::pair<std::size_t, std::size_t>> outcome_slots;  // step, bit index

    explicit HistoryColumns(const Circuit& c) {
        names.push_back("trial");
        for (std::size_t t = 0; t <= c.steps.size(); ++t)
            names.push_back("v" + std::to_string(t));
        for (std::size_t t = 0; t < c.steps.size(); ++t)
            for (std::size_t k = 0; k < c.steps[t].measured.size(); ++k) {
                names.push_back("m" + std::to_string(c.steps[t].measured[k]));
                outcome_slots.emplace_back(t, k);
            }
    }

    ordered_json::array_t row(long long trial, const History& h) const {
        ordered_json::array_t r;
        r.push_back(trial);
        for (auto v : h.samples) r.push_back(v);
        for (auto [t, k] : outcome_slots) r.push_back((*h.collapses[t] >> k) & 1u);
        return r;
    }
};

int cmd_run(const Common& cm, const std::string& circuit_path, long long samples) {
    if (samples < 1) throw UsageError("run: --samples must be positive");
    Circuit c = load_circuit(circuit_path);
    validate(c);
    Report rep("run", cm);
    rep.config("circuit", circuit_path);
    rep.config("samples", samples);
    HistoryColumns cols(c);
    rep.columns(cols.names);
    RngStream rng(cm.seed);
    for (long long i = 0; i < samples; ++i) rep.row(cols.row(i, sample_history(c, rng)));
    write_output(cm, rep.render());
    return 0;
}

int cmd_exact(const Common& cm, const std::string& circuit_path, long long samples,
              long long budget) {
    if (samples < 0) throw UsageError("exact: --samples must be nonnegative");
    if (budget < 1) throw UsageError("exact: --budget must be positive");
    Circuit c = load_circuit(circuit_path);
    validate(c);
    Report rep("exact", cm);
    rep.config("circuit", circuit_path);
    rep.config("samples", samples);
    if (samples == 0) {
        // Full history distribution from the path-sum engine.
        FiniteDistribution d = exact_history_distribution(c, std::size_t(budget));
        std::vector<std::string> cols;
        for (std::size_t t = 0; t <= c.steps.size(); ++t) cols.push_back("v" + std::to_string(t));
        cols.push_back("probability");
        rep.columns(cols);
        for (const auto& [tuple, p] : d.support()) {
            ordered_json::array_t r;
            for (auto v : tuple) r.push_back(v);
            r.push_back(p);
            rep.row(std::move(r));
        }
    } else {
        HistoryColumns cols(c);
        rep.columns(cols.names);
        RngStream rng(cm.seed);
        for (long long i = 0; i < samples; ++i)
            rep.row(cols.row(i, exact_sample_history(c, rng)));
    }
    write_output(cm, rep.render());
    return 0;
}

// ---- hv ---------------------------------------------------------------------

int cmd_hv(const Common& cm, const std::string& circuit_path, bool dieks) {
    Circuit c = load_circuit(circuit_path);
    BlockForm form = to_block_form(c);
    Report rep("hv", cm);
    rep.config("circuit", circuit_path);
    rep.config("theory", dieks ? "dieks" : "product");
    rep.columns({"step", "i", "j", "p"});
    StateVector pre(c.num_qubits);
    HvValidationReport worst;
    for (std::size_t t = 0; t < form.unitaries.size(); ++t) {
        const std::vector<GateOp>& gates = form.unitaries[t];
        JointProbabilityMatrix jm =
            dieks ? dieks_joint(pre, gates) : product_theory_joint(pre, gates, form.blocks[t]);
        StateVector post = apply_gates(pre, gates);
        HvValidationReport v = validate_hv_matrix(jm, pre, post);
        worst.max_row_error = std::max(worst.max_row_error, v.max_row_error);
        worst.max_col_error = std::max(worst.max_col_error, v.max_col_error);
        worst.cross_block_leakage = std::max(worst.cross_block_leakage, v.cross_block_leakage);
        worst.min_entry = std::min(worst.min_entry, v.min_entry);
        for (const auto& [ij, val] : jm.cells())
            rep.row({t + 1, ij.first, ij.second, val});
        pre = std::move(post);
    }
    rep.config("max_row_error", worst.max_row_error);
    rep.config("max_col_error", worst.max_col_error);
    rep.config("cross_block_leakage", worst.cross_block_leakage);
    rep.config("min_entry", worst.min_entry);
    write_output(cm, rep.render());
    return 0;
}

// ---- search -----------------------------------------------------------------

int cmd_search(const Common& cm, int n_min, int n_max, double k_mult, double r_mult,
               long long trials, const std::string& mode) {
    if (trials < 1) throw UsageError("search: --trials must be positive");
    if (n_min < 1 || n_max > 20 || n_min > n_max)
        throw UsageError("search: need 1 <= n-min <= n-max <= 20");
    if (k_mult < 0.0 || r_mult <= 0.0)
        throw UsageError("search: multipliers must be positive (k-mult may be 0)");
    if (mode != "pdqp" && mode != "baseline")
        throw UsageError("search: --mode must be pdqp or baseline");
    const bool baseline = mode == "baseline";

    Report rep("search", cm);
    rep.config("n-min", n_min);
    rep.config("n-max", n_max);
    rep.config("k-mult", k_mult);
    rep.config("r-mult", r_mult);
    rep.config("trials", trials);
    rep.config("mode", mode);
    rep.columns({"n", "N", "K", "R", "Q", "successes", "trials", "success_rate"});

    RngStream rng(cm.seed);
    for (int n = n_min; n <= n_max; ++n) {
        const std::uint64_t N = 1ull << n;
        int k_spec = baseline ? baseline_optimal_iterations(n) : search_iteration_budget(n);
        int K = int(std::llround(k_mult * k_spec));
        if (baseline && K < 1) K = 1;
        long long R = baseline ? 0 : std::max(1ll, std::llround(r_mult * search_read_budget(n)));
        long long successes = 0, queries = 0;
        for (long long t = 0; t < trials; ++t) {
            SearchInstance inst = make_search_instance(n, std::uint32_t(rng.next_below(N)));
            inst.grover_iterations = K;
            inst.non_collapsing_samples = R;
            SearchOutcome o = baseline ? grover_baseline(inst, rng) : pdqp_search(inst, rng);
            successes += o.found;
            queries = o.queries;
        }
        rep.row({n, N, K, R, queries, successes, trials, double(successes) / double(trials)});
    }

    double slope = baseline
        ? fit_loglog_slope(n_min, n_max, [](int n) { return double(minimal_cost_baseline(n).cost); })
        : fit_loglog_slope(n_min, n_max, [](int n) { return double(minimal_cost_pdqp(n).cost); });
    rep.config("cost_exponent", slope);
    write_output(cm, rep.render());
    return 0;
}

// ---- sd ---------------------------------------------------------------------

int cmd_sd(const Common& cm, const std::string& dir, long long trials, long long generate) {
    if (dir.empty()) throw UsageError("sd: no instance directory (--dir or 'dir' config key)");
    if (trials < 1) throw UsageError("sd: --trials must be positive");
    if (generate < 0 || generate % 2 != 0)
        throw UsageError("sd: --generate must be even (half close, half far)");
    RngStream rng(cm.seed);
    if (generate > 0) write_sd_corpus(dir, int(generate), rng);
    std::vector<SDCorpusEntry> entries;
    try {
        entries = load_sd_corpus(dir);
    } catch (const std::exception& e) {
        throw UsageError(std::string("sd: ") + e.what());
    }
    if (entries.empty()) throw UsageError("sd: no instances in '" + dir + "'");

    Report rep("sd", cm);
    rep.config("dir", dir);
    rep.config("trials", trials);
    rep.config("generate", generate);
    rep.columns({"id", "n", "m", "tvd", "label", "far_votes", "close_votes", "decision", "correct"});
    long long correct_total = 0;
    for (const SDCorpusEntry& e : entries) {
        long long far_votes = 0;
        SDDecision first = SDDecision::close;
        for (long long t = 0; t < trials; ++t) {
            SDDecision d = solve_statistical_difference(e.inst, rng);
            if (t == 0) first = d;
            far_votes += d == SDDecision::far;
        }
        bool decide_far = first == SDDecision::far;
        bool correct = decide_far == e.far_label;
        correct_total += correct;
        rep.row({e.id, e.inst.p0.input_bits(), e.inst.p0.output_bits(), e.tvd,
                 e.far_label ? "far" : "close", far_votes, trials - far_votes,
                 decide_far ? "far" : "close", correct ? 1 : 0});
    }
    rep.config("instances", ordered_json(entries.size()));
    rep.config("accuracy", double(correct_total) / double(entries.size()));
    write_output(cm, rep.render());
    return 0;
}

// ---- phenomena ----------------------------------------------------------------

int cmd_phenomena(const Common& cm, const std::string& demo, long long reads, long long trials,
                  int n) {
    const std::vector<std::string> known{"ftl", "one-query", "one-qubit-comm", "clone"};
    std::vector<std::string> demos;
    if (demo == "all")
        demos = known;
    else if (std::find(known.begin(), known.end(), demo) != known.end())
        demos = {demo};
    else
        throw UsageError("phenomena: unknown demo '" + demo + "'");
    if (reads < 0 || trials < 0) throw UsageError("phenomena: counts must be nonnegative");
    if (n < 1 || n > 12) throw UsageError("phenomena: need 1 <= n <= 12");

    Report rep("phenomena", cm);
    rep.config("demo", demo);
    rep.config("reads", reads);
    rep.config("trials", trials);
    rep.config("n", n);
    rep.columns({"demo", "quantity", "value"});
    RngStream root(cm.seed);

    for (const std::string& d : demos) {
        auto put = [&](const char* quantity, ordered_json value) {
            rep.row({d, quantity, std::move(value)});
        };
        if (d == "ftl") {
            int k = reads ? int(reads) : 11;
            long long per_arm = trials ? trials : 100000;
            RngStream rng = root.substream(1);
            BasisDetectReport r = basis_detect_stats(k, per_arm, rng);
            put("reads", k);
            put("trials_per_arm", per_arm);
            put("computational_agree_rate", r.computational_agree_rate());
            put("expected_rate", r.expected_rate());
            put("rotated_agree_rate", double(r.rotated_all_agree) / double(per_arm));
        } else if (d == "one-query") {
            long long r_count = reads ? reads : 54;
            RngStream rng = root.substream(2);
            // random predicate on n bits
            std::vector<std::uint32_t> table(std::size_t(1) << n);
            for (auto& row : table) row = std::uint32_t(rng.next_below(2));
            ClassicalFunction f(n, 1, table);
            OneQueryReport r = one_query_evaluate(f, r_count, rng);
            put("n", n);
            put("reads", r_count);
            put("recovered_fraction", r.recovered_fraction());
            put("expected_fraction", r.expected_fraction());
            put("mismatches", r.mismatches);
        } else if (d == "one-qubit-comm") {
            long long r_count = reads ? reads : 4096;
            RngStream rng = root.substream(3);
            long long exact_count = 0, max_err = 0;
            for (std::uint32_t x = 0; x < (1u << n); ++x) {
                CommReport r = one_qubit_communicate(x, n, r_count, rng);
                exact_count += r.exact();
                long long err = std::llabs((long long)r.decoded - (long long)r.sent);
                max_err = std::max(max_err, err);
            }
            put("n", n);
            put("reads", r_count);
            put("exact_rate", double(exact_count) / double(1u << n));
            put("max_abs_error", max_err);
        } else {  // clone
            long long per_basis = reads ? reads : 10000;
            long long states = trials ? trials : 20;
            RngStream rng = root.substream(4);
            double sum = 0.0, worst = 0.0;
            for (long long s = 0; s < states; ++s) {
                StateVector psi = random_pure_qubit(rng);
                CloneReport r = clone_via_tomography(psi, per_basis, rng);
                sum += r.distance;
                worst = std::max(worst, r.distance);
            }
            put("states", states);
            put("reads_per_basis", per_basis);
            put("mean_distance", sum / double(states));
            put("max_distance", worst);
        }
    }
    write_output(cm, rep.render());
    return 0;
}

// ---- verify -------------------------------------------------------------------

struct NamedCircuit {
    std::string name;
    Circuit circuit;
};

std::vector<NamedCircuit> load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw UsageError("corpus directory '" + dir +
                         "' not found (run from the repository root or pass --corpus)");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".qpc")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<NamedCircuit> out;
    for (const auto& p : files) out.push_back({p.stem().string(), load_circuit(p.string())});
    if (out.empty()) throw UsageError("corpus directory '" + dir + "' has no .qpc files");
    return out;
}

class VerifyRun {
  public:
    void emit(const std::string& checker, const std::string& id, double lhs, double rhs,
              bool holds) {
        ordered_json j{{"checker", checker}, {"instance-id", id}, {"lhs", lhs},
                       {"rhs", rhs},        {"holds", holds}};
        lines_ << j.dump() << '\n';
        ++total_;
        pass_ += holds;
    }
    // Per-suite pass counts go to stderr so stdout stays pure JSON lines.
    void close_suite(const std::string& name) {
        std::cerr << name << ": " << pass_ << "/" << total_ << " pass\n";
        fails_ += total_ - pass_;
        pass_ = total_ = 0;
    }
    const std::ostringstream& lines() const { return lines_; }
    long long fails() const { return fails_; }

  private:
    std::ostringstream lines_;
    long long pass_ = 0, total_ = 0, fails_ = 0;
};

void verify_markov(VerifyRun& vr, RngStream rng, long long count) {
    MarkovLemmaReport cx = check_markov_tv_lemma(counterexample_v(), counterexample_w());
    vr.emit("markov", "counterexample", cx.lhs, cx.rhs, cx.holds);
    for (long long i = 0; i < count; ++i) {
        std::size_t steps = 1 + rng.next_below(3);
        std::vector<std::size_t> sizes(steps + 1);
        for (auto& s : sizes) s = 2 + rng.next_below(3);
        MarkovChainSpec v = random_chain(sizes, rng);
        MarkovChainSpec w = random_chain(sizes, rng);
        MarkovLemmaReport r = check_markov_tv_lemma(v, w);
        vr.emit("markov", "markov-" + zero_pad(i, 5), r.lhs, r.rhs, r.holds);
    }
    vr.close_suite("markov");
}

void verify_trace(VerifyRun& vr, RngStream rng, long long count) {
    for (long long i = 0; i < count; ++i) {
        int nq = 1 + int(rng.next_below(4));
        StateVector a = random_state(nq, rng), b = random_state(nq, rng);
        TraceL2Report r = check_trace_vs_l2(a, b);
        vr.emit("trace", "trace-" + zero_pad(i, 5), r.trace, r.l2, r.holds);
    }
    vr.close_suite("trace");
}

void verify_hybrid(VerifyRun& vr) {
    for (int n : {4, 6, 8, 10}) {
        for (const HybridStepReport& r : check_hybrid_bound(n, search_iteration_budget(n)))
            vr.emit("hybrid", "n" + std::to_string(n) + "-g" + zero_pad(r.t, 3), r.sum, r.bound,
                    r.holds);
    }
    vr.close_suite("hybrid");
}

void verify_pairwise(VerifyRun& vr, RngStream rng, long long count) {
    for (long long i = 0; i < count; ++i) {
        int nq = 1 + int(rng.next_below(3));
        int steps = 1 + int(rng.next_below(3));
        CircuitPair pr = random_circuit_pair(nq, steps, rng);
        for (std::size_t s = 1; s <= pr.base.steps.size(); ++s) {
            PairwiseReport r = check_pairwise_tv_bound(pr.base, pr.variant, s);
            vr.emit("pairwise", "pw" + zero_pad(i, 4) + "-s" + std::to_string(s), r.d_xi, r.bound,
                    r.holds);
        }
    }
    vr.close_suite("pairwise");
}

void verify_product_fidelity(VerifyRun& vr, RngStream rng, long long count) {
    for (long long i = 0; i < count; ++i) {
        int nq = 1 + int(rng.next_below(3));
        int steps = 1 + int(rng.next_below(3));
        CircuitPair pr = random_circuit_pair(nq, steps, rng, /*measurement_free=*/true);
        ProductFidelityReport r = check_product_fidelity_chain(pr.base, pr.variant);
        vr.emit("product-fidelity", "pf" + zero_pad(i, 4), r.lhs, r.rhs, r.holds);
    }
    vr.close_suite("product-fidelity");
}

void verify_hv_validity(VerifyRun& vr, RngStream rng, long long count) {
    for (long long i = 0; i < count; ++i) {
        int nq = 1 + int(rng.next_below(4));
        HvInstance h = random_hv_instance(nq, rng);
        JointProbabilityMatrix jm = product_theory_joint(h.pre, h.gates, h.blocks);
        StateVector post = apply_gates(h.pre, h.gates);
        HvValidationReport v = validate_hv_matrix(jm, h.pre, post);
        vr.emit("hv-validity", "hv-" + zero_pad(i, 4), v.worst(0.0), 1e-10, v.ok(1e-10));
    }
    vr.close_suite("hv-validity");
}

void verify_qpqb(VerifyRun& vr, const std::vector<NamedCircuit>& corpus) {
    for (const NamedCircuit& nc : corpus) {
        FiniteDistribution sampler = history_distribution_exact(nc.circuit);
        FiniteDistribution blocks = history_distribution_pt(to_block_model(to_block_form(nc.circuit)));
        double gap = max_pointwise_gap(sampler, blocks);
        vr.emit("qpqb-equiv", nc.name, gap, 1e-10, gap <= 1e-10);
    }
    vr.close_suite("qpqb-equiv");
}

void verify_exactsim(VerifyRun& vr, RngStream rng, const std::vector<NamedCircuit>& corpus,
                     long long samples) {
    for (const NamedCircuit& nc : corpus) {
        FiniteDistribution sv = history_distribution_exact(nc.circuit);
        FiniteDistribution ex = exact_history_distribution(nc.circuit);
        double gap = max_pointwise_gap(sv, ex);
        vr.emit("exactsim-equiv", nc.name + "-dist", gap, 1e-10, gap <= 1e-10);
        FiniteDistribution emp;
        for (long long s = 0; s < samples; ++s)
            emp.add(exact_sample_history(nc.circuit, rng).samples, 1.0);
        emp.scale(1.0 / double(samples));
        double tvd = total_variation(emp, ex);
        vr.emit("exactsim-equiv", nc.name + "-sample", tvd, 0.02, tvd <= 0.02);
    }
    vr.close_suite("exactsim-equiv");
}

int cmd_verify(const Common& cm, const std::string& suite, long long instances,
               const std::string& corpus_dir, long long samples) {
    const std::vector<std::string> all{"markov",   "trace",       "hybrid",
                                       "pairwise", "product-fidelity", "hv-validity",
                                       "qpqb-equiv", "exactsim-equiv"};
    std::vector<std::string> chosen;
    if (suite == "all")
        chosen = all;
    else if (std::find(all.begin(), all.end(), suite) != all.end())
        chosen = {suite};
    else
        throw UsageError("verify: unknown suite '" + suite + "'");
    if (instances < 0) throw UsageError("verify: --instances must be nonnegative");
    if (samples < 1) throw UsageError("verify: --samples must be positive");

    RngStream root(cm.seed);
    VerifyRun vr;
    std::vector<NamedCircuit> corpus;
    for (const std::string& s : chosen) {
        if (s == "markov") verify_markov(vr, root.substream(0), instances ? instances : 10000);
        else if (s == "trace") verify_trace(vr, root.substream(1), instances ? instances : 10000);
        else if (s == "hybrid") verify_hybrid(vr);
        else if (s == "pairwise") verify_pairwise(vr, root.substream(2), instances ? instances : 1000);
        else if (s == "product-fidelity")
            verify_product_fidelity(vr, root.substream(3), instances ? instances : 1000);
        else if (s == "hv-validity")
            verify_hv_validity(vr, root.substream(4), instances ? instances : 1000);
        else {
            if (corpus.empty()) corpus = load_corpus(corpus_dir);
            if (s == "qpqb-equiv") verify_qpqb(vr, corpus);
            else verify_exactsim(vr, root.substream(5), corpus, samples);
        }
    }
    write_output(cm, vr.lines().str());
    return vr.fails() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"circuit laboratory for quantum computation with non-collapsing measurements"};
    app.require_subcommand(1);

    // run
    Common run_cm;
    Bindings run_bind;
    std::string run_circuit;
    long long run_samples = 1000;
    CLI::App* run = app.add_subcommand("run", "sample histories from a circuit");
    run_bind.add("circuit", run->add_option("--circuit", run_circuit, "circuit file"), run_circuit);
    run_bind.add("samples", run->add_option("--samples", run_samples, "number of runs"),
                 run_samples);
    add_common(run, run_cm, run_bind);

    // exact
    Common exact_cm;
    Bindings exact_bind;
    std::string exact_circuit;
    long long exact_samples = 0, exact_budget = 1ll << 20;
    CLI::App* exact = app.add_subcommand(
        "exact", "exact path-sum engine: history distribution or exact sampling");
    exact_bind.add("circuit", exact->add_option("--circuit", exact_circuit, "circuit file"),
                   exact_circuit);
    exact_bind.add("samples",
                   exact->add_option("--samples", exact_samples,
                                     "samples to draw (0: emit the full distribution)"),
                   exact_samples);
    exact_bind.add("budget",
                   exact->add_option("--budget", exact_budget, "history enumeration budget"),
                   exact_budget);
    add_common(exact, exact_cm, exact_bind);

    // hv
    Common hv_cm;
    Bindings hv_bind;
    std::string hv_circuit;
    bool hv_dieks = false;
    CLI::App* hv = app.add_subcommand("hv", "per-step hidden-variable joint matrices");
    hv_bind.add("circuit", hv->add_option("--circuit", hv_circuit, "circuit file"), hv_circuit);
    hv_bind.add("dieks", hv->add_flag("--dieks", hv_dieks, "circuit-local block structure"),
                hv_dieks);
    add_common(hv, hv_cm, hv_bind);

    // search
    Common search_cm;
    Bindings search_bind;
    int search_n_min = 6, search_n_max = 15;
    double search_k_mult = 1.0, search_r_mult = 1.0;
    long long search_trials = 200;
    std::string search_mode = "pdqp";
    CLI::App* search = app.add_subcommand("search", "unstructured search experiment");
    search_bind.add("n-min", search->add_option("--n-min", search_n_min, "smallest register"),
                    search_n_min);
    search_bind.add("n-max", search->add_option("--n-max", search_n_max, "largest register"),
                    search_n_max);
    search_bind.add("k-mult",
                    search->add_option("--k-mult", search_k_mult, "iteration multiplier"),
                    search_k_mult);
    search_bind.add("r-mult", search->add_option("--r-mult", search_r_mult, "read multiplier"),
                    search_r_mult);
    search_bind.add("trials", search->add_option("--trials", search_trials, "trials per size"),
                    search_trials);
    search_bind.add("mode", search->add_option("--mode", search_mode, "pdqp or baseline"),
                    search_mode);
    add_common(search, search_cm, search_bind);

    // sd
    Common sd_cm;
    Bindings sd_bind;
    std::string sd_dir;
    long long sd_trials = 1, sd_generate = 0;
    CLI::App* sd = app.add_subcommand("sd", "statistical-difference decision experiment");
    sd_bind.add("dir", sd->add_option("--dir", sd_dir, "instance directory"), sd_dir);
    sd_bind.add("trials", sd->add_option("--trials", sd_trials, "runs per instance"), sd_trials);
    sd_bind.add("generate",
                sd->add_option("--generate", sd_generate,
                               "write this many fresh instances into the directory first"),
                sd_generate);
    add_common(sd, sd_cm, sd_bind);

    // verify
    Common verify_cm;
    Bindings verify_bind;
    std::string verify_suite = "all", verify_corpus = "corpus";
    long long verify_instances = 0, verify_samples = 100000;
    CLI::App* verify = app.add_subcommand("verify", "verification suites (JSON lines)");
    verify_bind.add("suite", verify->add_option("--suite", verify_suite, "suite name or all"),
                    verify_suite);
    verify_bind.add("instances",
                    verify->add_option("--instances", verify_instances,
                                       "random instances per suite (0: suite default)"),
                    verify_instances);
    verify_bind.add("corpus", verify->add_option("--corpus", verify_corpus, "circuit corpus dir"),
                    verify_corpus);
    verify_bind.add("samples",
                    verify->add_option("--samples", verify_samples,
                                       "empirical samples for exactsim-equiv"),
                    verify_samples);
    add_common(verify, verify_cm, verify_bind);

    // phenomena
    Common phen_cm;
    Bindings phen_bind;
    std::string phen_demo = "all";
    long long phen_reads = 0, phen_trials = 0;
    int phen_n = 3;
    CLI::App* phen = app.add_subcommand("phenomena", "non-collapsing measurement demos");
    phen_bind.add("demo",
                  phen->add_option("--demo", phen_demo,
                                   "ftl, one-query, one-qubit-comm, clone or all"),
                  phen_demo);
    phen_bind.add("reads", phen->add_option("--reads", phen_reads, "reads (0: demo default)"),
                  phen_reads);
    phen_bind.add("trials", phen->add_option("--trials", phen_trials, "trials (0: demo default)"),
                  phen_trials);
    phen_bind.add("n", phen->add_option("--n", phen_n, "register size"), phen_n);
    add_common(phen, phen_cm, phen_bind);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // --help exits 0; anything else is a usage error
    }

    try {
        if (run->parsed()) {
            run_bind.apply(run_cm.config_path);
            check_format(run_cm);
            return cmd_run(run_cm, run_circuit, run_samples);
        }
        if (exact->parsed()) {
            exact_bind.apply(exact_cm.config_path);
            check_format(exact_cm);
            return cmd_exact(exact_cm, exact_circuit, exact_samples, exact_budget);
        }
        if (hv->parsed()) {
            hv_bind.apply(hv_cm.config_path);
            check_format(hv_cm);
            return cmd_hv(hv_cm, hv_circuit, hv_dieks);
        }
        if (search->parsed()) {
            search_bind.apply(search_cm.config_path);
            check_format(search_cm);
            return cmd_search(search_cm, search_n_min, search_n_max, search_k_mult, search_r_mult,
                              search_trials, search_mode);
        }
        if (sd->parsed()) {
            sd_bind.apply(sd_cm.config_path);
            check_format(sd_cm);
            return cmd_sd(sd_cm, sd_dir, sd_trials, sd_generate);
        }
        if (verify->parsed()) {
            verify_bind.apply(verify_cm.config_path);
            check_format(verify_cm);
            return cmd_verify(verify_cm, verify_suite, verify_instances, verify_corpus,
                              verify_samples);
        }
        phen_bind.apply(phen_cm.config_path);
        check_format(phen_cm);
        return cmd_phenomena(phen_cm, phen_demo, phen_reads, phen_trials, phen_n);
    } catch (const UsageError& e) {
        std::cerr << "pdqp: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pdqp: " << e.what() << '\n';
        return 2;
    }
}
