#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdqp/distribution.hpp"
#include "pdqp/rng.hpp"

namespace pdqp {

// Time-inhomogeneous finite Markov chain: `initial` over the time-0 states,
// `transitions[t]` a row-stochastic matrix from time t to time t+1. State
// spaces may differ between times.
struct MarkovChainSpec {
    std::vector<double> initial;
    std::vector<std::vector<std::vector<double>>> transitions;

    std::size_t length() const { return transitions.size(); }

    std::size_t size_at(std::size_t t) const {
        if (t == 0) return initial.size();
        return transitions.at(t - 1).at(0).size();
    }

    void check(double tol = 1e-12) const {
        if (initial.empty()) throw std::invalid_argument("markov chain: empty initial");
        double s = 0.0;
        for (double p : initial) {
            if (p < -tol) throw std::invalid_argument("markov chain: negative initial mass");
            s += p;
        }
        if (std::abs(s - 1.0) > tol) throw std::invalid_argument("markov chain: initial not normalized");
        for (std::size_t t = 0; t < transitions.size(); ++t) {
            const auto& m = transitions[t];
            if (m.size() != size_at(t))
                throw std::invalid_argument("markov chain: row count mismatch at time " +
                                            std::to_string(t));
            const std::size_t cols = m.at(0).size();
            for (const auto& row : m) {
                if (row.size() != cols)
                    throw std::invalid_argument("markov chain: ragged matrix at time " +
                                                std::to_string(t));
                double rs = 0.0;
                for (double p : row) {
                    if (p < -tol) throw std::invalid_argument("markov chain: negative entry");
                    rs += p;
                }
                if (std::abs(rs - 1.0) > tol)
                    throw std::invalid_argument("markov chain: row not stochastic at time " +
                                                std::to_string(t));
            }
        }
    }

    // Distribution of the whole path (X_0 .. X_T).
    FiniteDistribution enumerate(std::size_t budget = std::size_t(1) << 20) const {
        FiniteDistribution dist;
        std::size_t leaves = 0;
        Tuple tuple;
        auto rec = [&](auto&& self, std::size_t t, std::size_t state, double prob) -> void {
            tuple.push_back(std::uint32_t(state));
            if (t == transitions.size()) {
                if (++leaves > budget) throw std::runtime_error("path enumeration exceeds budget");
                dist.add(tuple, prob);
            } else {
                const auto& row = transitions[t][state];
                for (std::size_t b = 0; b < row.size(); ++b)
                    if (row[b] > 0.0) self(self, t + 1, b, prob * row[b]);
            }
            tuple.pop_back();
        };
        for (std::size_t a = 0; a < initial.size(); ++a)
            if (initial[a] > 0.0) rec(rec, 0, a, initial[a]);
        return dist;
    }

    // Marginal of X_t by forward propagation.
    std::vector<double> marginal(std::size_t t) const {
        std::vector<double> cur = initial;
        for (std::size_t s = 0; s < t; ++s) {
            std::vector<double> next(transitions[s][0].size(), 0.0);
            for (std::size_t a = 0; a < cur.size(); ++a)
                for (std::size_t b = 0; b < next.size(); ++b) next[b] += cur[a] * transitions[s][a][b];
            cur = std::move(next);
        }
        return cur;
    }

    // Joint distribution of (X_{t-1}, X_t), t >= 1.
    FiniteDistribution pair_dist(std::size_t t) const {
        if (t < 1 || t > transitions.size())
            throw std::invalid_argument("pair_dist: time out of range");
        std::vector<double> prev = marginal(t - 1);
        FiniteDistribution dist;
        for (std::size_t a = 0; a < prev.size(); ++a) {
            if (prev[a] <= 0.0) continue;
            const auto& row = transitions[t - 1][a];
            for (std::size_t b = 0; b < row.size(); ++b)
                if (row[b] > 0.0) dist.add({std::uint32_t(a), std::uint32_t(b)}, prev[a] * row[b]);
        }
        return dist;
    }
};

struct MarkovLemmaReport {
    double lhs = 0.0;           // d(paths of v, paths of w)
    double rhs = 0.0;           // 2 * sum of pairwise-marginal distances
    double marginal_sum = 0.0;  // sum of single-time marginal distances
    bool holds = false;
};

// Path distance of two chains of equal shape is controlled by their
// stepwise pair marginals: d(v, w) <= 2 sum_t d((v_{t-1},v_t), (w_{t-1},w_t)).
// Single-time marginals do NOT suffice: the report carries their sum so the
// counterexample below (lhs 1, marginal sum 0) stays visible.
inline MarkovLemmaReport check_markov_tv_lemma(const MarkovChainSpec& v, const MarkovChainSpec& w,
                                               std::size_t budget = std::size_t(1) << 20) {
    v.check();
    w.check();
    if (v.length() != w.length()) throw std::invalid_argument("chains differ in length");
    for (std::size_t t = 0; t <= v.length(); ++t)
        if (v.size_at(t) != w.size_at(t))
            throw std::invalid_argument("chains differ in state space at time " + std::to_string(t));
    MarkovLemmaReport rep;
    rep.lhs = total_variation(v.enumerate(budget), w.enumerate(budget));
    for (std::size_t t = 1; t <= v.length(); ++t)
        rep.rhs += 2.0 * total_variation(v.pair_dist(t), w.pair_dist(t));
    for (std::size_t t = 0; t <= v.length(); ++t) {
        FiniteDistribution mv, mw;
        std::vector<double> a = v.marginal(t), b = w.marginal(t);
        for (std::size_t s = 0; s < a.size(); ++s) {
            if (a[s] > 0.0) mv.add({std::uint32_t(s)}, a[s]);
            if (b[s] > 0.0) mw.add({std::uint32_t(s)}, b[s]);
        }
        rep.marginal_sum += total_variation(mv, mw);
    }
    rep.holds = rep.lhs <= rep.rhs + 1e-12;
    return rep;
}

// Random chain over the given state-space sizes (sizes.size() = T+1), rows
// drawn from a flat Dirichlet via exponential spacings.
inline MarkovChainSpec random_chain(const std::vector<std::size_t>& sizes, RngStream& rng) {
    if (sizes.empty()) throw std::invalid_argument("random_chain: need at least one time");
    auto dirichlet = [&](std::size_t k) {
        std::vector<double> row(k);
        double s = 0.0;
        for (double& x : row) {
            x = -std::log(1.0 - rng.next_double());
            s += x;
        }
        for (double& x : row) x /= s;
        return row;
    };
    MarkovChainSpec chain;
    chain.initial = dirichlet(sizes[0]);
    for (std::size_t t = 0; t + 1 < sizes.size(); ++t) {
        std::vector<std::vector<double>> m(sizes[t]);
        for (auto& row : m) row = dirichlet(sizes[t + 1]);
        chain.transitions.push_back(std::move(m));
    }
    return chain;
}

// The pair (v, w) witnessing that single-time marginals cannot bound the
// path distance: both are uniform at every time, yet v's paths are the
// diagonal {00, 11} and w's the antidiagonal {01, 10}. Exact values:
// lhs = 1, rhs = 2, marginal sum = 0.
inline MarkovChainSpec counterexample_v() {
    MarkovChainSpec v;
    v.initial = {0.5, 0.5};
    v.transitions = {{{1.0, 0.0}, {0.0, 1.0}}};
    return v;
}

inline MarkovChainSpec counterexample_w() {
    MarkovChainSpec w;
    w.initial = {0.5, 0.5};
    w.transitions = {{{0.0, 1.0}, {1.0, 0.0}}};
    return w;
}

}  // namespace pdqp
