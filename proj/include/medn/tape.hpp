#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "medn/array.hpp"

namespace medn {

// Handle to a node recorded on a Tape.
struct Var {
    std::size_t id = 0;
};

class Gradients;

// Reverse-mode recording of array operations. Nodes are appended in
// evaluation order, so operands always precede their consumers and a single
// reverse sweep visits each node exactly once.
//
// Row-wise operations treat a rank-2 array as a batch of rows and a rank-1
// array as a single row. Reductions over a row produce shape {rows, 1}
// (or {1} for rank-1 input).
class Tape {
public:
    // Leaf without gradient (observations, target-network weights).
    Var constant(DenseArray value);
    // Leaf whose gradient is reported by backward().
    Var parameter(DenseArray value);

    const DenseArray& value(Var v) const;
    bool requires_grad(Var v) const;
    std::size_t size() const noexcept { return nodes_.size(); }
    void clear() noexcept { nodes_.clear(); }

    // input·weights + bias. input {n} or {b,n}; weights {n,m}; bias {m}.
    Var dense(Var input, Var weights, Var bias);
    Var relu(Var x);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var x, double factor);
    Var square(Var x);
    Var log(Var x);
    // Elementwise Huber penalty: x²/2 inside [-delta, delta], linear outside.
    Var huber(Var x, double delta);

    // x + column, the column broadcast along each row. column has one entry per row.
    Var add_column(Var x, Var column);
    Var sub_column(Var x, Var column);

    Var row_sum(Var x);
    Var row_mean(Var x);
    // Subgradient flows to the lowest-index maximum of each row.
    Var row_max(Var x);
    // Picks x[i, columns[i]] for every row i.
    Var gather(Var x, std::span<const std::size_t> columns);

    Var softmax(Var logits, double temperature);
    Var log_softmax(Var logits, double temperature);

    Var sum(Var x);
    Var mean(Var x);

    // Gradients of a single-element node with respect to every node on the tape.
    Gradients backward(Var loss) const;

private:
    enum class Op {
        Leaf, Dense, Relu, Add, Sub, Mul, Scale, Square, Log, Huber,
        AddColumn, SubColumn, RowSum, RowMean, RowMax, Gather,
        Softmax, LogSoftmax, Sum, Mean,
    };

    struct Node {
        Op op = Op::Leaf;
        DenseArray value;
        std::size_t in[3] = {0, 0, 0};
        bool requires_grad = false;
        double param = 0.0;
        std::vector<std::size_t> indices;
    };

    const Node& node(Var v) const;
    Var push(Node node, std::initializer_list<std::size_t> inputs, const char* op_name);
    void propagate(const Node& node, const DenseArray& grad_out,
                   std::vector<DenseArray>& grads) const;

    std::vector<Node> nodes_;
};

class Gradients {
public:
    // Zero array shaped like the node when nothing flowed into it.
    const DenseArray& of(Var v) const;

private:
    friend class Tape;
    std::vector<DenseArray> grads_;
};

} // namespace medn
