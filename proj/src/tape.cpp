#include "alilab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "alilab/error.hpp"

namespace alilab {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shapes differ, " + shape_str(a) + " vs " + shape_str(b));
}

} // namespace

NodeId Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw ContractError("tape node id " + std::to_string(id) + " out of range");
    return nodes_[static_cast<std::size_t>(id)];
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

Op Tape::op(NodeId id) const { return node(id).op; }

NodeId Tape::leaf(Tensor value) {
    return push({Op::Leaf, -1, -1, 0.0, std::move(value)});
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    require_same_shape("add", va, vb);
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] += vb[i];
    return push({Op::Add, a, b, 0.0, std::move(out)});
}

NodeId Tape::subtract(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    require_same_shape("subtract", va, vb);
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
    return push({Op::Subtract, a, b, 0.0, std::move(out)});
}

NodeId Tape::multiply(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    require_same_shape("multiply", va, vb);
    Tensor out = va;
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    return push({Op::Multiply, a, b, 0.0, std::move(out)});
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.cols() != vb.rows())
        throw ShapeError("matmul: inner extents differ, " + shape_str(va) + " vs " + shape_str(vb));
    Tensor out = Tensor::zeros({va.rows(), vb.cols()});
    mm_nn(va, vb, out, false);
    return push({Op::MatMul, a, b, 0.0, std::move(out)});
}

NodeId Tape::concat_last_axis(NodeId a, NodeId b) {
    Tensor out = concat_cols(value(a), value(b));
    return push({Op::ConcatLastAxis, a, b, 0.0, std::move(out)});
}

NodeId Tape::sum(NodeId a) {
    const Tensor& va = value(a);
    double acc = 0.0;
    for (std::int64_t i = 0; i < va.size(); ++i) acc += va[i];
    return push({Op::Sum, a, -1, 0.0, Tensor::scalar(acc)});
}

NodeId Tape::mean(NodeId a) {
    const Tensor& va = value(a);
    double acc = 0.0;
    for (std::int64_t i = 0; i < va.size(); ++i) acc += va[i];
    return push({Op::Mean, a, -1, 0.0, Tensor::scalar(acc / static_cast<double>(va.size()))});
}

NodeId Tape::negate(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = -out[i];
    return push({Op::Negate, a, -1, 0.0, std::move(out)});
}

NodeId Tape::exponential(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    return push({Op::Exp, a, -1, 0.0, std::move(out)});
}

NodeId Tape::logarithm(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0))
            throw DomainError("logarithm: input " + std::to_string(out[i]) + " is not strictly positive");
        out[i] = std::log(out[i]);
    }
    return push({Op::Log, a, -1, 0.0, std::move(out)});
}

NodeId Tape::sigmoid(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) {
        const double x = out[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return push({Op::Sigmoid, a, -1, 0.0, std::move(out)});
}

NodeId Tape::tanh(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return push({Op::Tanh, a, -1, 0.0, std::move(out)});
}

NodeId Tape::leaky_relu(NodeId a, double slope) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i)
        if (out[i] < 0.0) out[i] *= slope;
    return push({Op::LeakyRelu, a, -1, slope, std::move(out)});
}

NodeId Tape::square(NodeId a) {
    Tensor out = value(a);
    for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= out[i];
    return push({Op::Square, a, -1, 0.0, std::move(out)});
}

NodeId Tape::broadcast_add_bias(NodeId a, NodeId bias) {
    const Tensor& va = value(a);
    const Tensor& vb = value(bias);
    if (vb.shape().size() != 1 || vb.shape()[0] != va.cols())
        throw ShapeError("broadcast_add_bias: " + shape_str(va) + " + " + shape_str(vb));
    Tensor out = va;
    const int m = va.rows(), n = va.cols();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) += vb[j];
    return push({Op::BroadcastAddBias, a, bias, 0.0, std::move(out)});
}

// --- backward ---

Gradients::Gradients(const Tape& tape, NodeId output) : tape_(&tape) {
    const Tensor& out_value = tape.value(output);
    grads_.resize(tape.size());
    touched_.assign(tape.size(), 0);
    bucket(output) = Tensor::full(out_value.shape(), 1.0);

    for (NodeId id = output; id >= 0; --id) {
        if (!touched_[static_cast<std::size_t>(id)]) continue;
        const Tape::Node& n = tape.nodes_[static_cast<std::size_t>(id)];
        const Tensor& g = grads_[static_cast<std::size_t>(id)];
        switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Add:
            accumulate(n.a, g);
            accumulate(n.b, g);
            break;
        case Op::Subtract: {
            accumulate(n.a, g);
            Tensor& gb = bucket(n.b);
            for (std::int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            break;
        }
        case Op::Multiply: {
            const Tensor& va = tape.value(n.a);
            const Tensor& vb = tape.value(n.b);
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
            Tensor& gb = bucket(n.b);
            for (std::int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
            break;
        }
        case Op::MatMul: {
            const Tensor& va = tape.value(n.a);
            const Tensor& vb = tape.value(n.b);
            mm_nt(g, vb, bucket(n.a), true);
            mm_tn(va, g, bucket(n.b), true);
            break;
        }
        case Op::ConcatLastAxis: {
            const Tensor& va = tape.value(n.a);
            const Tensor& vb = tape.value(n.b);
            const int m = va.rows(), ka = va.cols(), kb = vb.cols();
            Tensor& ga = bucket(n.a);
            Tensor& gb = bucket(n.b);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < ka; ++j) ga.at(i, j) += g.at(i, j);
                for (int j = 0; j < kb; ++j) gb.at(i, j) += g.at(i, ka + j);
            }
            break;
        }
        case Op::Sum: {
            const double gv = g[0];
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += gv;
            break;
        }
        case Op::Mean: {
            Tensor& ga = bucket(n.a);
            const double gv = g[0] / static_cast<double>(ga.size());
            for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += gv;
            break;
        }
        case Op::Negate: {
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
            break;
        }
        case Op::Exp: {
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i];
            break;
        }
        case Op::Log: {
            const Tensor& va = tape.value(n.a);
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] / va[i];
            break;
        }
        case Op::Sigmoid: {
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) {
                const double s = n.value[i];
                ga[i] += g[i] * s * (1.0 - s);
            }
            break;
        }
        case Op::Tanh: {
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) {
                const double y = n.value[i];
                ga[i] += g[i] * (1.0 - y * y);
            }
            break;
        }
        case Op::LeakyRelu: {
            const Tensor& va = tape.value(n.a);
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] * (va[i] >= 0.0 ? 1.0 : n.aux);
            break;
        }
        case Op::Square: {
            const Tensor& va = tape.value(n.a);
            Tensor& ga = bucket(n.a);
            for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 2.0 * va[i];
            break;
        }
        case Op::BroadcastAddBias: {
            accumulate(n.a, g);
            Tensor& gb = bucket(n.b);
            const int m = g.rows(), cols = g.cols();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < cols; ++j) gb[j] += g.at(i, j);
            break;
        }
        }
    }
}

Tensor& Gradients::bucket(NodeId id) {
    auto idx = static_cast<std::size_t>(id);
    if (!touched_[idx]) {
        grads_[idx] = Tensor::zeros(tape_->value(id).shape());
        touched_[idx] = 1;
    }
    return grads_[idx];
}

void Gradients::accumulate(NodeId id, const Tensor& g) {
    Tensor& dst = bucket(id);
    for (std::int64_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

bool Gradients::touched(NodeId id) const {
    return touched_[static_cast<std::size_t>(id)] != 0;
}

const Tensor& Gradients::wrt(NodeId id) { return bucket(id); }

double gradient_check(const std::function<NodeId(Tape&, NodeId)>& build,
                      const Tensor& point, double step) {
    Tape tape;
    const NodeId x = tape.leaf(point);
    const NodeId y = build(tape, x);
    if (tape.value(y).size() != 1)
        throw ContractError("gradient_check: build must return a scalar node");
    Gradients grads = backward(tape, y);
    const Tensor& analytic = grads.wrt(x);

    const auto eval_at = [&](const Tensor& p) {
        Tape t;
        const NodeId xi = t.leaf(p);
        return t.value(build(t, xi))[0];
    };

    double worst = 0.0;
    Tensor probe = point;
    for (std::int64_t i = 0; i < point.size(); ++i) {
        probe[i] = point[i] + step;
        const double up = eval_at(probe);
        probe[i] = point[i] - step;
        const double down = eval_at(probe);
        probe[i] = point[i];
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

// --- composites ---

NodeId softplus(Tape& t, NodeId x) {
    // c = max(x, 0) taken as a constant: softplus(x) = c + log(exp(x-c) + exp(-c))
    // is exact in value, and d/dx = sigmoid(x) exactly since c is held fixed.
    const Tensor& v = t.value(x);
    Tensor c = v;
    Tensor neg_exp_c = v;
    for (std::int64_t i = 0; i < v.size(); ++i) {
        c[i] = v[i] > 0.0 ? v[i] : 0.0;
        neg_exp_c[i] = std::exp(-c[i]);
    }
    const NodeId shift = t.leaf(std::move(c));
    const NodeId base = t.leaf(std::move(neg_exp_c));
    return t.add(t.logarithm(t.add(t.exponential(t.subtract(x, shift)), base)), shift);
}

NodeId scale(Tape& t, NodeId x, double c) {
    return t.multiply(x, t.leaf(Tensor::full(t.value(x).shape(), c)));
}

NodeId add_constant(Tape& t, NodeId x, double c) {
    return t.add(x, t.leaf(Tensor::full(t.value(x).shape(), c)));
}

NodeId select_columns(Tape& t, NodeId x, int begin, int end) {
    const Tensor& v = t.value(x);
    const int n = v.cols();
    if (begin < 0 || end > n || begin >= end)
        throw ContractError("select_columns: bad range [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") for width " + std::to_string(n));
    Tensor sel = Tensor::zeros({n, end - begin});
    for (int j = begin; j < end; ++j) sel.at(j, j - begin) = 1.0;
    return t.matmul(x, t.leaf(std::move(sel)));
}

NodeId clamp_columns(Tape& t, NodeId x, int begin, int end, double lo, double hi) {
    const Tensor& v = t.value(x);
    const int m = v.rows(), n = v.cols();
    if (begin < 0 || end > n || begin > end || lo > hi)
        throw ContractError("clamp_columns: bad arguments");
    Tensor mask = Tensor::full({m, n}, 1.0);
    Tensor offset = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        for (int j = begin; j < end; ++j) {
            const double val = v.at(i, j);
            if (val < lo) {
                mask.at(i, j) = 0.0;
                offset.at(i, j) = lo;
            } else if (val > hi) {
                mask.at(i, j) = 0.0;
                offset.at(i, j) = hi;
            }
        }
    }
    return t.add(t.multiply(x, t.leaf(std::move(mask))), t.leaf(std::move(offset)));
}

NodeId logsumexp_rows(Tape& t, NodeId x, const std::vector<char>& column_mask) {
    const Tensor& v = t.value(x);
    const int m = v.rows(), n = v.cols();
    if (static_cast<int>(column_mask.size()) != n)
        throw ContractError("logsumexp_rows: mask width " + std::to_string(column_mask.size()) +
                            " vs tensor width " + std::to_string(n));
    int selected = 0;
    for (char c : column_mask) selected += c ? 1 : 0;
    if (selected == 0) throw ContractError("logsumexp_rows: empty column subset");

    // Per-row max over the selected columns, used as the constant shift. The
    // shift for unselected columns is their own value so exp() stays at 1 there;
    // the selector column then zeroes those entries out of the row sum.
    Tensor shift = Tensor::zeros({m, n});
    Tensor rowmax = Tensor::zeros({m, 1});
    for (int i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            if (column_mask[static_cast<std::size_t>(j)]) mx = std::max(mx, v.at(i, j));
        rowmax.at(i, 0) = mx;
        for (int j = 0; j < n; ++j)
            shift.at(i, j) = column_mask[static_cast<std::size_t>(j)] ? mx : v.at(i, j);
    }
    Tensor selector = Tensor::zeros({n, 1});
    for (int j = 0; j < n; ++j) selector.at(j, 0) = column_mask[static_cast<std::size_t>(j)] ? 1.0 : 0.0;

    const NodeId shifted = t.subtract(x, t.leaf(std::move(shift)));
    const NodeId rowsum = t.matmul(t.exponential(shifted), t.leaf(std::move(selector)));
    return t.add(t.logarithm(rowsum), t.leaf(std::move(rowmax)));
}

} // namespace alilab
