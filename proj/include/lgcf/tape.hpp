#pragma once

// Reverse-mode differentiation over the row-level primitives of the forward
// pass. Each tape entry holds a small dense vector (a hyperboloid point, a
// Klein point, a tangent vector or a scalar) and knows its own adjoint rule.
// Leaves correspond to rows of the embedding table.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace lgcf {

/// Ambient-coordinate gradient per touched embedding row. Ordered by row so
/// that iteration (and therefore parameter updates) is deterministic.
struct SparseGrad {
    std::map<std::size_t, std::vector<double>> rows;

    bool empty() const noexcept { return rows.empty(); }
    std::size_t size() const noexcept { return rows.size(); }
};

class Tape {
public:
    struct Var {
        std::uint32_t index = 0;
    };

    Var leaf(std::size_t row, std::span<const double> value);
    Var constant(std::span<const double> value);

    Var to_klein(Var x);
    Var klein_midpoint(std::span<const Var> points);
    Var from_klein(Var k);
    Var relu(Var x);
    Var calibrate(Var x);

    /// log_o(x) with o the hyperboloid origin; slot 0 of the result is 0.
    Var log_origin(Var x);
    Var mean(std::span<const Var> xs);
    /// exp_o(v) for a tangent vector at the origin (slot 0 is ignored).
    Var exp_origin(Var v);

    Var squared_distance(Var x, Var y);
    /// constant + sum_k weights[k] * terms[k] over scalar entries.
    Var linear(std::span<const Var> terms, std::span<const double> weights, double constant = 0.0);
    Var hinge(Var x);

    std::span<const double> value(Var v) const;
    double scalar(Var v) const { return value(v)[0]; }
    std::span<const double> adjoint(Var v) const;

    /// Seeds d(root)/d(root) = 1 and propagates to every entry.
    void backward(Var root);

    /// Sums leaf adjoints per row, omitting rows whose adjoint is all zero.
    SparseGrad leaf_gradients() const;

    std::size_t size() const noexcept { return nodes_.size(); }
    void clear();

private:
    enum class Op : std::uint8_t {
        Leaf,
        Constant,
        ToKlein,
        KleinMidpoint,
        FromKlein,
        Relu,
        Calibrate,
        LogOrigin,
        Mean,
        ExpOrigin,
        SquaredDistance,
        Linear,
        Hinge,
    };

    struct Node {
        Op op;
        std::uint32_t value_offset;
        std::uint32_t size;
        std::uint32_t arg_offset;
        std::uint32_t arg_count;
        std::uint32_t aux_offset;
        std::size_t row;
    };

    Var push(Op op, std::size_t size, std::span<const Var> args, std::size_t row = 0);
    std::span<double> mutable_value(Var v);
    std::span<double> mutable_adjoint(std::uint32_t index);
    std::span<const std::uint32_t> args_of(const Node& n) const;
    void backprop_node(std::uint32_t index);

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoints_;
    std::vector<std::uint32_t> args_;
    std::vector<double> aux_;
};

}  // namespace lgcf
