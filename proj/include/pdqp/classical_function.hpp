#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdqp {

// Classical function f : {0,1}^n -> {0,1}^m stored as an explicit truth
// table (entry i = f(i)). Input bit k of i is the value of the k-th input.
class ClassicalFunction {
public:
    static constexpr int max_input_bits = 20;
    static constexpr int max_output_bits = 24;

    ClassicalFunction(int input_bits, int output_bits, std::vector<std::uint32_t> table)
        : input_bits_(input_bits), output_bits_(output_bits), table_(std::move(table)) {
        if (input_bits < 0 || input_bits > max_input_bits)
            throw std::invalid_argument("function input width out of range: " + std::to_string(input_bits));
        if (output_bits < 1 || output_bits > max_output_bits)
            throw std::invalid_argument("function output width out of range: " + std::to_string(output_bits));
        if (table_.size() != (std::size_t(1) << input_bits))
            throw std::invalid_argument("truth table has " + std::to_string(table_.size()) +
                                        " entries, expected " + std::to_string(std::size_t(1) << input_bits));
        const std::uint32_t limit = (output_bits >= 32) ? 0xffffffffu : ((1u << output_bits) - 1u);
        for (std::uint32_t v : table_)
            if (v > limit)
                throw std::invalid_argument("truth table value " + std::to_string(v) +
                                            " does not fit in " + std::to_string(output_bits) + " bits");
    }

    int input_bits() const { return input_bits_; }
    int output_bits() const { return output_bits_; }

    std::uint32_t eval(std::uint32_t x) const {
        if (x >= table_.size()) throw std::out_of_range("function input out of range");
        return table_[x];
    }

    const std::vector<std::uint32_t>& table() const { return table_; }

    bool operator==(const ClassicalFunction& o) const = default;

    // Constant-zero function (identity oracle: phase +1 everywhere, xor writes 0).
    static ClassicalFunction zero(int input_bits, int output_bits) {
        return ClassicalFunction(input_bits, output_bits,
                                 std::vector<std::uint32_t>(std::size_t(1) << input_bits, 0));
    }

    // Indicator of a single point, f(x) = [x == marked].
    static ClassicalFunction point_mask(int input_bits, std::uint32_t marked) {
        std::vector<std::uint32_t> t(std::size_t(1) << input_bits, 0);
        t.at(marked) = 1;
        return ClassicalFunction(input_bits, 1, std::move(t));
    }

    // Indicator of "input is nonzero", f(x) = [x != 0].
    static ClassicalFunction nonzero_mask(int input_bits) {
        std::vector<std::uint32_t> t(std::size_t(1) << input_bits, 1);
        t[0] = 0;
        return ClassicalFunction(input_bits, 1, std::move(t));
    }

private:
    int input_bits_;
    int output_bits_;
    std::vector<std::uint32_t> table_;
};

}  // namespace pdqp
