// Copyright 2026 The AQCF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aqcf/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace aqcf::ag {

namespace {

thread_local bool g_grad_enabled = true;

Tensor make(const char* op, Matrix value, std::initializer_list<const Tensor*> inputs,
            std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    bool needs = false;
    if (g_grad_enabled) {
        for (const Tensor* t : inputs) needs = needs || t->requires_grad();
    }
    if (needs) {
        node->requires_grad = true;
        for (const Tensor* t : inputs) node->parents.push_back(t->node());
        node->backward_fn = std::move(backward);
    }
    return Tensor(std::move(node));
}

void push(Node& parent, const Matrix& g) {
    if (parent.requires_grad) parent.accumulate(g);
}

enum class Broadcast { Same, Row, Scalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() == b.shape()) return Broadcast::Same;
    if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
    if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
    throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()));
}

Matrix expand(const Matrix& b, Broadcast kind, Index rows, Index cols) {
    switch (kind) {
        case Broadcast::Same:
            return b;
        case Broadcast::Row:
            return b.replicate(rows, 1);
        case Broadcast::Scalar:
            return Matrix::Constant(rows, cols, b(0, 0));
    }
    return b;
}

Matrix reduce(const Matrix& g, Broadcast kind) {
    switch (kind) {
        case Broadcast::Same:
            return g;
        case Broadcast::Row:
            return g.colwise().sum();
        case Broadcast::Scalar:
            return Matrix::Constant(1, 1, g.sum());
    }
    return g;
}

template <typename F, typename DF>
Tensor unary(const char* op, const Tensor& a, F f, DF df) {
    Matrix y = a.value().unaryExpr(f);
    return make(op, std::move(y), {&a}, [df](Node& self) {
        const Node& in = *self.parents[0];
        Matrix local = in.value.binaryExpr(self.value, df);
        push(*self.parents[0], self.grad.cwiseProduct(local));
    });
}

}  // namespace

std::string to_string(Shape s) { return "(" + std::to_string(s.rows) + " x " + std::to_string(s.cols) + ")"; }

void Node::accumulate(const Matrix& g) {
    if (grad.size() == 0) {
        grad = g;
    } else {
        grad += g;
    }
}

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Index rows, Index cols, bool requires_grad) {
    return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

Tensor Tensor::scalar(double v) { return Tensor(Matrix::Constant(1, 1, v)); }

Tensor Tensor::row(const Eigen::Ref<const Eigen::VectorXd>& v) { return Tensor(Matrix(v.transpose())); }

Matrix& Tensor::mutable_value() {
    if (!node_->is_leaf()) throw InvalidInputError("only leaf tensors may be mutated in place");
    return node_->value;
}

void Tensor::zero_grad() { node_->grad.resize(0, 0); }

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape()));
    return node_->value(0, 0);
}

void Tensor::set_requires_grad(bool on) {
    if (!node_->is_leaf()) throw InvalidInputError("requires_grad can only be toggled on leaves");
    node_->requires_grad = on;
}

void Tensor::backward() {
    if (size() != 1) throw DimensionError("backward() needs a scalar loss, got " + to_string(shape()));
    if (node_->consumed) throw StaleGraphError("graph already differentiated; re-run the forward pass");
    if (!node_->requires_grad) return;

    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (!n->is_leaf() && n->consumed) {
            throw StaleGraphError(std::string("node '") + n->op + "' belongs to an already differentiated graph");
        }
    }

    node_->grad = Matrix::Ones(1, 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->is_leaf()) continue;
        if (n->grad.size() != 0) n->backward_fn(*n);
        n->consumed = true;
        n->grad.resize(0, 0);
    }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor custom(const char* op, std::vector<Tensor> inputs, Matrix value, CustomBackward backward) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    bool needs = false;
    if (g_grad_enabled) {
        for (const Tensor& t : inputs) needs = needs || t.requires_grad();
    }
    if (needs) {
        node->requires_grad = true;
        for (const Tensor& t : inputs) node->parents.push_back(t.node());
        node->backward_fn = [backward = std::move(backward)](Node& self) {
            std::vector<Matrix> grads = backward(self.grad);
            if (grads.size() != self.parents.size()) {
                throw DimensionError(std::string(self.op) + ": backward returned " + std::to_string(grads.size()) +
                                     " gradients for " + std::to_string(self.parents.size()) + " inputs");
            }
            for (std::size_t i = 0; i < grads.size(); ++i) {
                Node& p = *self.parents[i];
                if (!p.requires_grad || grads[i].size() == 0) continue;
                if (grads[i].rows() != p.value.rows() || grads[i].cols() != p.value.cols()) {
                    throw DimensionError(std::string(self.op) + ": gradient shape mismatch for input " +
                                         std::to_string(i));
                }
                p.accumulate(grads[i]);
            }
        };
    }
    return Tensor(std::move(node));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: incompatible shapes " + to_string(a.shape()) + " and " + to_string(b.shape()));
    }
    Matrix y = a.value() * b.value();
    return make("matmul", std::move(y), {&a, &b}, [](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
        if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
    });
}

Tensor transpose(const Tensor& a) {
    Matrix y = a.value().transpose();
    return make("transpose", std::move(y), {&a}, [](Node& self) { push(*self.parents[0], self.grad.transpose()); });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("add", a, b);
    Matrix y = a.value() + expand(b.value(), kind, a.rows(), a.cols());
    return make("add", std::move(y), {&a, &b}, [kind](Node& self) {
        push(*self.parents[0], self.grad);
        push(*self.parents[1], reduce(self.grad, kind));
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("sub", a, b);
    Matrix y = a.value() - expand(b.value(), kind, a.rows(), a.cols());
    return make("sub", std::move(y), {&a, &b}, [kind](Node& self) {
        push(*self.parents[0], self.grad);
        push(*self.parents[1], -reduce(self.grad, kind));
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("mul", a, b);
    Matrix bx = expand(b.value(), kind, a.rows(), a.cols());
    Matrix y = a.value().cwiseProduct(bx);
    return make("mul", std::move(y), {&a, &b}, [kind, bx = std::move(bx)](Node& self) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(bx));
        if (pb.requires_grad) pb.accumulate(reduce(self.grad.cwiseProduct(pa.value), kind));
    });
}

Tensor scale(const Tensor& a, double s) {
    Matrix y = a.value() * s;
    return make("scale", std::move(y), {&a}, [s](Node& self) { push(*self.parents[0], self.grad * s); });
}

Tensor add_scalar(const Tensor& a, double s) {
    Matrix y = a.value().array() + s;
    return make("add_scalar", std::move(y), {&a}, [](Node& self) { push(*self.parents[0], self.grad); });
}

Tensor sigmoid(const Tensor& a) {
    return unary(
        "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary(
        "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
    return unary(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor square(const Tensor& a) {
    return unary(
        "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor log(const Tensor& a) {
    if ((a.value().array() <= 0.0).any()) throw InvalidInputError("log of non-positive value");
    return unary(
        "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor softmax_rows(const Tensor& a) {
    Matrix y(a.rows(), a.cols());
    for (Index r = 0; r < a.rows(); ++r) {
        const double m = a.value().row(r).maxCoeff();
        y.row(r) = (a.value().row(r).array() - m).exp();
        y.row(r) /= y.row(r).sum();
    }
    return make("softmax", std::move(y), {&a}, [](Node& self) {
        const Matrix& y = self.value;
        Matrix g(y.rows(), y.cols());
        for (Index r = 0; r < y.rows(); ++r) {
            const double dot = self.grad.row(r).dot(y.row(r));
            g.row(r) = y.row(r).array() * (self.grad.row(r).array() - dot);
        }
        push(*self.parents[0], g);
    });
}

Tensor layer_norm_rows(const Tensor& a) {
    const Index n = a.cols();
    Matrix y(a.rows(), n);
    Eigen::VectorXd inv_std(a.rows());
    std::vector<bool> floored(static_cast<std::size_t>(a.rows()));
    for (Index r = 0; r < a.rows(); ++r) {
        const double mu = a.value().row(r).mean();
        const double var = (a.value().row(r).array() - mu).square().mean();
        floored[static_cast<std::size_t>(r)] = var < kLayerNormVarianceFloor;
        inv_std(r) = 1.0 / std::sqrt(std::max(var, kLayerNormVarianceFloor));
        y.row(r) = (a.value().row(r).array() - mu) * inv_std(r);
    }
    return make("layer_norm", std::move(y), {&a}, [inv_std, floored](Node& self) {
        const Matrix& y = self.value;
        Matrix g(y.rows(), y.cols());
        for (Index r = 0; r < y.rows(); ++r) {
            const auto gy = self.grad.row(r).array();
            const double mean_g = gy.mean();
            if (floored[static_cast<std::size_t>(r)]) {
                g.row(r) = (gy - mean_g) * inv_std(r);
            } else {
                const double mean_gy = (gy * y.row(r).array()).mean();
                g.row(r) = (gy - mean_g - y.row(r).array() * mean_gy) * inv_std(r);
            }
        }
        push(*self.parents[0], g);
    });
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no inputs");
    const Index rows = parts[0].rows();
    Index cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols: row mismatch " + to_string(parts[0].shape()) + " and " +
                                 to_string(p.shape()));
        }
        cols += p.cols();
    }
    Matrix y(rows, cols);
    std::vector<Index> widths;
    Index at = 0;
    for (const Tensor& p : parts) {
        y.middleCols(at, p.cols()) = p.value();
        widths.push_back(p.cols());
        at += p.cols();
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return custom("concat_cols", inputs, std::move(y), [widths](const Matrix& g) {
        std::vector<Matrix> out;
        Index off = 0;
        for (Index w : widths) {
            out.emplace_back(g.middleCols(off, w));
            off += w;
        }
        return out;
    });
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: no inputs");
    const Index cols = parts[0].cols();
    Index rows = 0;
    for (const Tensor& p : parts) {
        if (p.cols() != cols) {
            throw DimensionError("concat_rows: column mismatch " + to_string(parts[0].shape()) + " and " +
                                 to_string(p.shape()));
        }
        rows += p.rows();
    }
    Matrix y(rows, cols);
    std::vector<Index> heights;
    Index at = 0;
    for (const Tensor& p : parts) {
        y.middleRows(at, p.rows()) = p.value();
        heights.push_back(p.rows());
        at += p.rows();
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return custom("concat_rows", inputs, std::move(y), [heights](const Matrix& g) {
        std::vector<Matrix> out;
        Index off = 0;
        for (Index h : heights) {
            out.emplace_back(g.middleRows(off, h));
            off += h;
        }
        return out;
    });
}

Tensor slice_cols(const Tensor& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) {
        throw DimensionError("slice_cols: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                             ") outside " + to_string(a.shape()));
    }
    Matrix y = a.value().middleCols(start, count);
    return make("slice_cols", std::move(y), {&a}, [start, count](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
        g.middleCols(start, count) = self.grad;
        p.accumulate(g);
    });
}

Tensor slice_rows(const Tensor& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.rows()) {
        throw DimensionError("slice_rows: [" + std::to_string(start) + ", " + std::to_string(start + count) +
                             ") outside " + to_string(a.shape()));
    }
    Matrix y = a.value().middleRows(start, count);
    return make("slice_rows", std::move(y), {&a}, [start, count](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
        g.middleRows(start, count) = self.grad;
        p.accumulate(g);
    });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
    Matrix y(static_cast<Index>(ids.size()), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table.rows()) {
            throw InvalidInputError("embedding: id " + std::to_string(ids[i]) + " outside table of " +
                                    std::to_string(table.rows()) + " rows");
        }
        y.row(static_cast<Index>(i)) = table.value().row(ids[i]);
    }
    std::vector<int> idx(ids.begin(), ids.end());
    return make("embedding", std::move(y), {&table}, [idx = std::move(idx)](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        if (p.grad.size() == 0) p.grad = Matrix::Zero(p.value.rows(), p.value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) p.grad.row(idx[i]) += self.grad.row(static_cast<Index>(i));
    });
}

Tensor sum(const Tensor& a) {
    Matrix y = Matrix::Constant(1, 1, a.value().sum());
    return make("sum", std::move(y), {&a}, [](Node& self) {
        Node& p = *self.parents[0];
        push(p, Matrix::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0)));
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw DimensionError("mean of empty tensor");
    const double n = static_cast<double>(a.size());
    Matrix y = Matrix::Constant(1, 1, a.value().sum() / n);
    return make("mean", std::move(y), {&a}, [n](Node& self) {
        Node& p = *self.parents[0];
        push(p, Matrix::Constant(p.value.rows(), p.value.cols(), self.grad(0, 0) / n));
    });
}

Tensor mean_rows(const Tensor& a) {
    if (a.rows() == 0) throw DimensionError("mean_rows of empty tensor");
    const double n = static_cast<double>(a.rows());
    Matrix y = a.value().colwise().sum() / n;
    return make("mean_rows", std::move(y), {&a}, [n](Node& self) {
        Node& p = *self.parents[0];
        push(p, (self.grad / n).replicate(p.value.rows(), 1));
    });
}

Tensor variance(const Tensor& a) {
    if (a.size() == 0) throw DimensionError("variance of empty tensor");
    const double n = static_cast<double>(a.size());
    const double mu = a.value().sum() / n;
    Matrix centered = a.value().array() - mu;
    Matrix y = Matrix::Constant(1, 1, centered.squaredNorm() / n);
    return make("variance", std::move(y), {&a}, [n, centered = std::move(centered)](Node& self) {
        push(*self.parents[0], centered * (2.0 * self.grad(0, 0) / n));
    });
}

Tensor cross_entropy_with_logits(const Tensor& logits, int label) {
    if (logits.rows() != 1) throw DimensionError("cross_entropy: expected 1 x C logits, got " + to_string(logits.shape()));
    if (label < 0 || label >= logits.cols()) {
        throw InvalidInputError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                                std::to_string(logits.cols()) + ")");
    }
    const auto z = logits.value().row(0).array();
    const double m = z.maxCoeff();
    const double lse = m + std::log((z - m).exp().sum());
    Matrix p = (z - lse).exp().matrix();
    Matrix y = Matrix::Constant(1, 1, lse - z(label));
    return make("cross_entropy", std::move(y), {&logits}, [label, p = std::move(p)](Node& self) {
        Matrix g = p;
        g(0, label) -= 1.0;
        push(*self.parents[0], g * self.grad(0, 0));
    });
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Matrix& x, double h, double tol) {
    if (!(h > 0.0)) throw InvalidInputError("grad_check: step must be positive");
    auto eval = [&](const Matrix& at) {
        NoGradGuard guard;
        return f(Tensor(at)).item();
    };
    const double first = eval(x);
    const double second = eval(x);
    if (first != second) throw OracleInvalidError("grad_check: function is not deterministic");

    Tensor leaf(x, true);
    Tensor loss = f(leaf);
    loss.backward();
    Matrix ad = leaf.has_grad() ? leaf.grad() : Matrix::Zero(x.rows(), x.cols());

    GradCheckReport report;
    Matrix probe = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + h;
        const double up = eval(probe);
        probe.data()[i] = orig - h;
        const double down = eval(probe);
        probe.data()[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double a = ad.data()[i];
        const double err = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
        if (err > report.max_relative_error || report.worst_index < 0) {
            report.max_relative_error = std::max(report.max_relative_error, err);
            if (err >= report.max_relative_error) report.worst_index = i;
        }
    }
    report.passed = report.max_relative_error <= tol;
    return report;
}

}  // namespace aqcf::ag
