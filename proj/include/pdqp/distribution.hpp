#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace pdqp {

// Key for a finite distribution: a tuple of basis indices (a single value is
// a 1-tuple). std::map keeps iteration deterministic.
using Tuple = std::vector<std::uint32_t>;

class FiniteDistribution {
public:
    void add(const Tuple& key, double p) {
        if (p < 0.0) throw std::invalid_argument("negative probability mass");
        if (p > 0.0) p_[key] += p;
    }

    double prob(const Tuple& key) const {
        auto it = p_.find(key);
        return it == p_.end() ? 0.0 : it->second;
    }

    const std::map<Tuple, double>& support() const { return p_; }
    std::size_t support_size() const { return p_.size(); }

    double total_mass() const {
        double s = 0.0;
        for (const auto& [k, v] : p_) s += v;
        return s;
    }

    void scale(double factor) {
        for (auto& [k, v] : p_) v *= factor;
    }

    static FiniteDistribution point_mass(const Tuple& key) {
        FiniteDistribution d;
        d.add(key, 1.0);
        return d;
    }

private:
    std::map<Tuple, double> p_;
};

// Total variation distance, (1/2) sum |p - q| over the union support.
inline double total_variation(const FiniteDistribution& p, const FiniteDistribution& q) {
    double s = 0.0;
    auto a = p.support().begin(), ae = p.support().end();
    auto b = q.support().begin(), be = q.support().end();
    while (a != ae || b != be) {
        if (b == be || (a != ae && a->first < b->first)) {
            s += std::abs(a->second);
            ++a;
        } else if (a == ae || b->first < a->first) {
            s += std::abs(b->second);
            ++b;
        } else {
            s += std::abs(a->second - b->second);
            ++a;
            ++b;
        }
    }
    return 0.5 * s;
}

// Largest per-key probability gap; the "equal within eps per history" metric.
inline double max_pointwise_gap(const FiniteDistribution& p, const FiniteDistribution& q) {
    double m = 0.0;
    for (const auto& [k, v] : p.support()) m = std::max(m, std::abs(v - q.prob(k)));
    for (const auto& [k, v] : q.support()) m = std::max(m, std::abs(v - p.prob(k)));
    return m;
}

// Marginal onto tuple coordinate i.
inline FiniteDistribution index_marginal(const FiniteDistribution& d, std::size_t i) {
    FiniteDistribution out;
    for (const auto& [k, v] : d.support()) {
        if (i >= k.size()) throw std::invalid_argument("marginal index out of range");
        out.add({k[i]}, v);
    }
    return out;
}

// Marginal onto the adjacent pair (coordinate i-1, coordinate i), i >= 1.
inline FiniteDistribution pair_marginal(const FiniteDistribution& d, std::size_t i) {
    if (i < 1) throw std::invalid_argument("pair_marginal needs i >= 1");
    FiniteDistribution out;
    for (const auto& [k, v] : d.support()) {
        if (i >= k.size()) throw std::invalid_argument("pair_marginal index out of range");
        out.add({k[i - 1], k[i]}, v);
    }
    return out;
}

}  // namespace pdqp
