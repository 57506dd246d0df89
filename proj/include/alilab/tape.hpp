#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "alilab/tensor.hpp"

namespace alilab {

// Define-by-run reverse-mode autodiff over Tensors. Each forward call appends
// a node holding the op id, input node refs and the computed value; backward()
// walks the tape in reverse and accumulates gradients, so fan-out (a node
// feeding several consumers) sums contributions.
//
// The primitive set is deliberately small. Everything else (stable softplus,
// log-sum-exp over column subsets, per-column clamping, column selection) is
// composed from these primitives plus *constant* leaf tensors computed from
// forward values: a max-shift or 0/1 mask is exact in value and exact in
// gradient, so no extra primitives are needed.

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
    Leaf,
    Add,
    Subtract,
    Multiply,
    MatMul,
    ConcatLastAxis,
    Sum,
    Mean,
    Negate,
    Exp,
    Log,
    Sigmoid,
    Tanh,
    LeakyRelu,
    Square,
    BroadcastAddBias,
};

class Tape {
public:
    NodeId leaf(Tensor value);

    NodeId add(NodeId a, NodeId b);
    NodeId subtract(NodeId a, NodeId b);
    NodeId multiply(NodeId a, NodeId b); // elementwise, exact shape match
    NodeId matmul(NodeId a, NodeId b);
    NodeId concat_last_axis(NodeId a, NodeId b);
    NodeId sum(NodeId a);  // -> shape {1}
    NodeId mean(NodeId a); // -> shape {1}
    NodeId negate(NodeId a);
    NodeId exponential(NodeId a);
    NodeId logarithm(NodeId a); // inputs must be strictly positive
    NodeId sigmoid(NodeId a);
    NodeId tanh(NodeId a);
    NodeId leaky_relu(NodeId a, double slope);
    NodeId square(NodeId a);
    NodeId broadcast_add_bias(NodeId a, NodeId bias); // [m,n] + [n]

    const Tensor& value(NodeId id) const;
    Op op(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

private:
    friend class Gradients;

    struct Node {
        Op op;
        NodeId a = -1;
        NodeId b = -1;
        double aux = 0.0; // leaky_relu slope
        Tensor value;
    };

    NodeId push(Node node);
    const Node& node(NodeId id) const;

    std::vector<Node> nodes_;
};

// Result of backward(): per-node adjoints. Untouched nodes read as zeros.
class Gradients {
public:
    Gradients(const Tape& tape, NodeId output);

    bool touched(NodeId id) const;
    const Tensor& wrt(NodeId id); // materializes zeros for untouched nodes

private:
    void accumulate(NodeId id, const Tensor& g);
    Tensor& bucket(NodeId id);

    const Tape* tape_;
    std::vector<Tensor> grads_;
    std::vector<char> touched_;
};

inline Gradients backward(const Tape& tape, NodeId output) { return Gradients(tape, output); }

// Central-difference check of d(build)/d(point). `build` must register `point`
// as the leaf it receives and return a scalar output node. Returns the max
// relative error over coordinates with denominator max(|analytic|, |numeric|, 1e-8).
double gradient_check(const std::function<NodeId(Tape&, NodeId)>& build,
                      const Tensor& point, double step);

// --- composites (primitive ops + constant leaves only) ---

// log(1 + exp(x)), elementwise, stable for any finite x.
NodeId softplus(Tape& t, NodeId x);

// x * c for a scalar constant c.
NodeId scale(Tape& t, NodeId x, double c);

// x + c for a scalar constant c.
NodeId add_constant(Tape& t, NodeId x, double c);

// Columns [begin, end) of a rank-2 node, via a constant selector matrix.
NodeId select_columns(Tape& t, NodeId x, int begin, int end);

// Clamp columns [begin, end) to [lo, hi]; other columns pass through.
// Gradient is 1 inside the range and 0 outside (mask built from forward values).
NodeId clamp_columns(Tape& t, NodeId x, int begin, int end, double lo, double hi);

// Row-wise log(sum_j in S exp(x[i,j])) over the column subset S given by a 0/1
// mask; returns shape [rows, 1]. Max-shifted, so safe for any finite logits.
NodeId logsumexp_rows(Tape& t, NodeId x, const std::vector<char>& column_mask);

} // namespace alilab
