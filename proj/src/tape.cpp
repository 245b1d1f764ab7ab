#include "medn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "medn/errors.hpp"

namespace medn {
namespace {

Shape row_reduced_shape(const DenseArray& x) {
    return x.rank() == 2 ? Shape{x.rows(), 1} : Shape{1};
}

void require_same_shape(const DenseArray& a, const DenseArray& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                             shape_string(b.shape()) + " differ");
    }
}

void require_row_matrix(const DenseArray& x, const char* op) {
    if (x.rank() != 1 && x.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " +
                             shape_string(x.shape()));
    }
}

void require_column(const DenseArray& x, const DenseArray& column, const char* op) {
    require_row_matrix(x, op);
    if (column.size() != x.rows()) {
        throw DimensionError(std::string(op) + ": column " + shape_string(column.shape()) +
                             " does not match rows of " + shape_string(x.shape()));
    }
}

void require_temperature(double temperature, const char* op) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ContractError(std::string(op) + ": temperature must be positive, got " +
                            std::to_string(temperature));
    }
}

void softmax_rows(const DenseArray& logits, double temperature, DenseArray& out) {
    const std::size_t cols = logits.cols();
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        const double top = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double e = std::exp((row[c] - top) / temperature);
            out[r * cols + c] = e;
            total += e;
        }
        for (std::size_t c = 0; c < cols; ++c) {
            out[r * cols + c] /= total;
        }
    }
}

void log_softmax_rows(const DenseArray& logits, double temperature, DenseArray& out) {
    const std::size_t cols = logits.cols();
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        const double top = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            total += std::exp((row[c] - top) / temperature);
        }
        const double log_total = std::log(total);
        for (std::size_t c = 0; c < cols; ++c) {
            out[r * cols + c] = (row[c] - top) / temperature - log_total;
        }
    }
}

} // namespace

const Tape::Node& Tape::node(Var v) const {
    if (v.id >= nodes_.size()) {
        throw ContractError("tape: variable " + std::to_string(v.id) + " is not on this tape");
    }
    return nodes_[v.id];
}

const DenseArray& Tape::value(Var v) const {
    return node(v).value;
}

bool Tape::requires_grad(Var v) const {
    return node(v).requires_grad;
}

Var Tape::push(Node n, std::initializer_list<std::size_t> inputs, const char* op_name) {
    if (!n.value.all_finite()) {
        throw NumericError(std::string(op_name) + ": produced a non-finite value");
    }
    std::size_t k = 0;
    for (std::size_t id : inputs) {
        n.in[k++] = id;
        n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
    }
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(DenseArray value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n), {}, "constant");
}

Var Tape::parameter(DenseArray value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n), {}, "parameter");
}

Var Tape::dense(Var input, Var weights, Var bias) {
    const DenseArray& x = value(input);
    const DenseArray& w = value(weights);
    const DenseArray& b = value(bias);
    require_row_matrix(x, "dense");
    if (w.rank() != 2 || x.cols() != w.shape()[0]) {
        throw DimensionError("dense: input " + shape_string(x.shape()) +
                             " does not match weights " + shape_string(w.shape()));
    }
    const std::size_t in_dim = w.shape()[0];
    const std::size_t out_dim = w.shape()[1];
    if (b.size() != out_dim) {
        throw DimensionError("dense: bias " + shape_string(b.shape()) +
                             " does not match weights " + shape_string(w.shape()));
    }
    const std::size_t batch = x.rows();
    Node n;
    n.op = Op::Dense;
    n.value = DenseArray(x.rank() == 2 ? Shape{batch, out_dim} : Shape{out_dim});
    for (std::size_t i = 0; i < batch; ++i) {
        double* out = &n.value[i * out_dim];
        std::copy(b.data().begin(), b.data().end(), out);
        for (std::size_t k = 0; k < in_dim; ++k) {
            const double xik = x[i * in_dim + k];
            if (xik == 0.0) {
                continue;
            }
            const double* wk = &w[k * out_dim];
            for (std::size_t j = 0; j < out_dim; ++j) {
                out[j] += xik * wk[j];
            }
        }
    }
    return push(std::move(n), {input.id, weights.id, bias.id}, "dense");
}

Var Tape::relu(Var x) {
    Node n;
    n.op = Op::Relu;
    n.value = value(x);
    for (double& v : n.value.data()) {
        v = v > 0.0 ? v : 0.0;
    }
    return push(std::move(n), {x.id}, "relu");
}

Var Tape::add(Var a, Var b) {
    require_same_shape(value(a), value(b), "add");
    Node n;
    n.op = Op::Add;
    n.value = value(a);
    const DenseArray& rhs = value(b);
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] += rhs[i];
    }
    return push(std::move(n), {a.id, b.id}, "add");
}

Var Tape::sub(Var a, Var b) {
    require_same_shape(value(a), value(b), "sub");
    Node n;
    n.op = Op::Sub;
    n.value = value(a);
    const DenseArray& rhs = value(b);
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] -= rhs[i];
    }
    return push(std::move(n), {a.id, b.id}, "sub");
}

Var Tape::mul(Var a, Var b) {
    require_same_shape(value(a), value(b), "mul");
    Node n;
    n.op = Op::Mul;
    n.value = value(a);
    const DenseArray& rhs = value(b);
    for (std::size_t i = 0; i < n.value.size(); ++i) {
        n.value[i] *= rhs[i];
    }
    return push(std::move(n), {a.id, b.id}, "mul");
}

Var Tape::scale(Var x, double factor) {
    Node n;
    n.op = Op::Scale;
    n.param = factor;
    n.value = value(x);
    for (double& v : n.value.data()) {
        v *= factor;
    }
    return push(std::move(n), {x.id}, "scale");
}

Var Tape::square(Var x) {
    Node n;
    n.op = Op::Square;
    n.value = value(x);
    for (double& v : n.value.data()) {
        v *= v;
    }
    return push(std::move(n), {x.id}, "square");
}

Var Tape::log(Var x) {
    Node n;
    n.op = Op::Log;
    n.value = value(x);
    for (double& v : n.value.data()) {
        v = std::log(v);
    }
    return push(std::move(n), {x.id}, "log");
}

Var Tape::huber(Var x, double delta) {
    if (!(delta > 0.0)) {
        throw ContractError("huber: delta must be positive");
    }
    Node n;
    n.op = Op::Huber;
    n.param = delta;
    n.value = value(x);
    for (double& v : n.value.data()) {
        const double a = std::abs(v);
        v = a <= delta ? 0.5 * v * v : delta * (a - 0.5 * delta);
    }
    return push(std::move(n), {x.id}, "huber");
}

Var Tape::add_column(Var x, Var column) {
    const DenseArray& xv = value(x);
    const DenseArray& cv = value(column);
    require_column(xv, cv, "add_column");
    Node n;
    n.op = Op::AddColumn;
    n.value = xv;
    const std::size_t cols = xv.cols();
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            n.value[r * cols + c] += cv[r];
        }
    }
    return push(std::move(n), {x.id, column.id}, "add_column");
}

Var Tape::sub_column(Var x, Var column) {
    const DenseArray& xv = value(x);
    const DenseArray& cv = value(column);
    require_column(xv, cv, "sub_column");
    Node n;
    n.op = Op::SubColumn;
    n.value = xv;
    const std::size_t cols = xv.cols();
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            n.value[r * cols + c] -= cv[r];
        }
    }
    return push(std::move(n), {x.id, column.id}, "sub_column");
}

Var Tape::row_sum(Var x) {
    const DenseArray& xv = value(x);
    require_row_matrix(xv, "row_sum");
    Node n;
    n.op = Op::RowSum;
    n.value = DenseArray(row_reduced_shape(xv));
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double total = 0.0;
        for (double v : xv.row(r)) {
            total += v;
        }
        n.value[r] = total;
    }
    return push(std::move(n), {x.id}, "row_sum");
}

Var Tape::row_mean(Var x) {
    const DenseArray& xv = value(x);
    require_row_matrix(xv, "row_mean");
    if (xv.cols() == 0) {
        throw DimensionError("row_mean: rows are empty");
    }
    Node n;
    n.op = Op::RowMean;
    n.value = DenseArray(row_reduced_shape(xv));
    const double count = static_cast<double>(xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double total = 0.0;
        for (double v : xv.row(r)) {
            total += v;
        }
        n.value[r] = total / count;
    }
    return push(std::move(n), {x.id}, "row_mean");
}

Var Tape::row_max(Var x) {
    const DenseArray& xv = value(x);
    require_row_matrix(xv, "row_max");
    if (xv.cols() == 0) {
        throw DimensionError("row_max: rows are empty");
    }
    Node n;
    n.op = Op::RowMax;
    n.value = DenseArray(row_reduced_shape(xv));
    n.indices.resize(xv.rows());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        const auto row = xv.row(r);
        const auto best = std::max_element(row.begin(), row.end());
        n.indices[r] = static_cast<std::size_t>(best - row.begin());
        n.value[r] = *best;
    }
    return push(std::move(n), {x.id}, "row_max");
}

Var Tape::gather(Var x, std::span<const std::size_t> columns) {
    const DenseArray& xv = value(x);
    require_row_matrix(xv, "gather");
    if (columns.size() != xv.rows()) {
        throw DimensionError("gather: " + std::to_string(columns.size()) +
                             " indices for " + std::to_string(xv.rows()) + " rows");
    }
    Node n;
    n.op = Op::Gather;
    n.value = DenseArray(row_reduced_shape(xv));
    n.indices.assign(columns.begin(), columns.end());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        if (columns[r] >= xv.cols()) {
            throw ContractError("gather: index " + std::to_string(columns[r]) +
                                " out of range for " + std::to_string(xv.cols()) + " columns");
        }
        n.value[r] = xv[r * xv.cols() + columns[r]];
    }
    return push(std::move(n), {x.id}, "gather");
}

Var Tape::softmax(Var logits, double temperature) {
    require_temperature(temperature, "softmax");
    const DenseArray& z = value(logits);
    require_row_matrix(z, "softmax");
    Node n;
    n.op = Op::Softmax;
    n.param = temperature;
    n.value = DenseArray(z.shape());
    softmax_rows(z, temperature, n.value);
    return push(std::move(n), {logits.id}, "softmax");
}

Var Tape::log_softmax(Var logits, double temperature) {
    require_temperature(temperature, "log_softmax");
    const DenseArray& z = value(logits);
    require_row_matrix(z, "log_softmax");
    Node n;
    n.op = Op::LogSoftmax;
    n.param = temperature;
    n.value = DenseArray(z.shape());
    log_softmax_rows(z, temperature, n.value);
    return push(std::move(n), {logits.id}, "log_softmax");
}

Var Tape::sum(Var x) {
    Node n;
    n.op = Op::Sum;
    double total = 0.0;
    for (double v : value(x).data()) {
        total += v;
    }
    n.value = DenseArray::scalar(total);
    return push(std::move(n), {x.id}, "sum");
}

Var Tape::mean(Var x) {
    const DenseArray& xv = value(x);
    if (xv.size() == 0) {
        throw DimensionError("mean: empty array");
    }
    Node n;
    n.op = Op::Mean;
    double total = 0.0;
    for (double v : xv.data()) {
        total += v;
    }
    n.value = DenseArray::scalar(total / static_cast<double>(xv.size()));
    return push(std::move(n), {x.id}, "mean");
}

Gradients Tape::backward(Var loss) const {
    const Node& root = node(loss);
    if (root.value.size() != 1) {
        throw ContractError("backward: loss must hold a single value, got shape " +
                            shape_string(root.value.shape()));
    }
    Gradients result;
    auto& grads = result.grads_;
    grads.resize(nodes_.size());
    grads[loss.id] = DenseArray(root.value.shape(), 1.0);
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        const Node& n = nodes_[id];
        if (grads[id].size() == 0 || !n.requires_grad || n.op == Op::Leaf) {
            continue;
        }
        propagate(n, grads[id], grads);
    }
    for (std::size_t id = 0; id < grads.size(); ++id) {
        if (grads[id].shape() != nodes_[id].value.shape()) {
            grads[id] = DenseArray(nodes_[id].value.shape());
        }
    }
    return result;
}

void Tape::propagate(const Node& n, const DenseArray& g, std::vector<DenseArray>& grads) const {
    auto accum = [&](std::size_t id) -> DenseArray* {
        if (!nodes_[id].requires_grad) {
            return nullptr;
        }
        DenseArray& slot = grads[id];
        if (slot.shape() != nodes_[id].value.shape()) {
            slot = DenseArray(nodes_[id].value.shape());
        }
        return &slot;
    };
    const std::size_t size = n.value.size();

    switch (n.op) {
    case Op::Leaf:
        break;
    case Op::Dense: {
        const DenseArray& x = nodes_[n.in[0]].value;
        const DenseArray& w = nodes_[n.in[1]].value;
        const std::size_t in_dim = w.shape()[0];
        const std::size_t out_dim = w.shape()[1];
        const std::size_t batch = x.rows();
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < batch; ++i) {
                const double* gi = &g[i * out_dim];
                for (std::size_t k = 0; k < in_dim; ++k) {
                    const double* wk = &w[k * out_dim];
                    double total = 0.0;
                    for (std::size_t j = 0; j < out_dim; ++j) {
                        total += gi[j] * wk[j];
                    }
                    (*dx)[i * in_dim + k] += total;
                }
            }
        }
        if (DenseArray* dw = accum(n.in[1])) {
            for (std::size_t i = 0; i < batch; ++i) {
                const double* gi = &g[i * out_dim];
                for (std::size_t k = 0; k < in_dim; ++k) {
                    const double xik = x[i * in_dim + k];
                    if (xik == 0.0) {
                        continue;
                    }
                    double* dwk = &(*dw)[k * out_dim];
                    for (std::size_t j = 0; j < out_dim; ++j) {
                        dwk[j] += xik * gi[j];
                    }
                }
            }
        }
        if (DenseArray* db = accum(n.in[2])) {
            for (std::size_t i = 0; i < batch; ++i) {
                for (std::size_t j = 0; j < out_dim; ++j) {
                    (*db)[j] += g[i * out_dim + j];
                }
            }
        }
        break;
    }
    case Op::Relu:
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                if (n.value[i] > 0.0) {
                    (*dx)[i] += g[i];
                }
            }
        }
        break;
    case Op::Add:
    case Op::Sub: {
        const double sign = n.op == Op::Add ? 1.0 : -1.0;
        if (DenseArray* da = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*da)[i] += g[i];
            }
        }
        if (DenseArray* db = accum(n.in[1])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*db)[i] += sign * g[i];
            }
        }
        break;
    }
    case Op::Mul: {
        const DenseArray& a = nodes_[n.in[0]].value;
        const DenseArray& b = nodes_[n.in[1]].value;
        if (DenseArray* da = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*da)[i] += g[i] * b[i];
            }
        }
        if (DenseArray* db = accum(n.in[1])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*db)[i] += g[i] * a[i];
            }
        }
        break;
    }
    case Op::Scale:
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*dx)[i] += n.param * g[i];
            }
        }
        break;
    case Op::Square: {
        const DenseArray& x = nodes_[n.in[0]].value;
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*dx)[i] += 2.0 * x[i] * g[i];
            }
        }
        break;
    }
    case Op::Log: {
        const DenseArray& x = nodes_[n.in[0]].value;
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*dx)[i] += g[i] / x[i];
            }
        }
        break;
    }
    case Op::Huber: {
        const DenseArray& x = nodes_[n.in[0]].value;
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                const double slope = std::clamp(x[i], -n.param, n.param);
                (*dx)[i] += slope * g[i];
            }
        }
        break;
    }
    case Op::AddColumn:
    case Op::SubColumn: {
        const double sign = n.op == Op::AddColumn ? 1.0 : -1.0;
        const std::size_t cols = n.value.cols();
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < size; ++i) {
                (*dx)[i] += g[i];
            }
        }
        if (DenseArray* dc = accum(n.in[1])) {
            for (std::size_t r = 0; r < n.value.rows(); ++r) {
                double total = 0.0;
                for (std::size_t c = 0; c < cols; ++c) {
                    total += g[r * cols + c];
                }
                (*dc)[r] += sign * total;
            }
        }
        break;
    }
    case Op::RowSum:
    case Op::RowMean: {
        const DenseArray& x = nodes_[n.in[0]].value;
        const std::size_t cols = x.cols();
        const double factor = n.op == Op::RowSum ? 1.0 : 1.0 / static_cast<double>(cols);
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t r = 0; r < x.rows(); ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    (*dx)[r * cols + c] += factor * g[r];
                }
            }
        }
        break;
    }
    case Op::RowMax:
    case Op::Gather: {
        const std::size_t cols = nodes_[n.in[0]].value.cols();
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t r = 0; r < n.indices.size(); ++r) {
                (*dx)[r * cols + n.indices[r]] += g[r];
            }
        }
        break;
    }
    case Op::Softmax: {
        const std::size_t cols = n.value.cols();
        if (DenseArray* dz = accum(n.in[0])) {
            for (std::size_t r = 0; r < n.value.rows(); ++r) {
                double dot = 0.0;
                for (std::size_t c = 0; c < cols; ++c) {
                    dot += g[r * cols + c] * n.value[r * cols + c];
                }
                for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    (*dz)[i] += n.value[i] * (g[i] - dot) / n.param;
                }
            }
        }
        break;
    }
    case Op::LogSoftmax: {
        const std::size_t cols = n.value.cols();
        if (DenseArray* dz = accum(n.in[0])) {
            for (std::size_t r = 0; r < n.value.rows(); ++r) {
                double total = 0.0;
                for (std::size_t c = 0; c < cols; ++c) {
                    total += g[r * cols + c];
                }
                for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = r * cols + c;
                    (*dz)[i] += (g[i] - std::exp(n.value[i]) * total) / n.param;
                }
            }
        }
        break;
    }
    case Op::Sum:
    case Op::Mean: {
        const DenseArray& x = nodes_[n.in[0]].value;
        const double factor = n.op == Op::Sum ? 1.0 : 1.0 / static_cast<double>(x.size());
        if (DenseArray* dx = accum(n.in[0])) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                (*dx)[i] += factor * g[0];
            }
        }
        break;
    }
    }
}

const DenseArray& Gradients::of(Var v) const {
    if (v.id >= grads_.size()) {
        throw ContractError("gradients: variable " + std::to_string(v.id) + " is not on the tape");
    }
    return grads_[v.id];
}

} // namespace medn
