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

// Minimal reverse-mode automatic differentiation over dense real matrices.
//
// Every tensor is rank <= 2 and stored as a row-major Eigen matrix; vectors
// are 1 x n rows. Operations build a DAG of shared nodes; backward() walks it
// in reverse topological order and accumulates into leaves.

#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "aqcf/errors.hpp"

namespace aqcf::ag {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Shape {
    Index rows = 0;
    Index cols = 0;
    bool operator==(const Shape&) const = default;
    Index size() const { return rows * cols; }
};

std::string to_string(Shape s);

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Matrix value;
    Matrix grad;  // empty until something flows into it
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward_fn;
    const char* op = "leaf";
    bool requires_grad = false;
    bool consumed = false;

    bool is_leaf() const { return !backward_fn; }
    void accumulate(const Matrix& g);
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Matrix value, bool requires_grad = false);
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor zeros(Index rows, Index cols, bool requires_grad = false);
    static Tensor scalar(double v);
    /// Builds a 1 x n row from a column vector.
    static Tensor row(const Eigen::Ref<const Eigen::VectorXd>& v);

    bool defined() const { return static_cast<bool>(node_); }
    const Matrix& value() const { return node_->value; }
    /// Mutable access to a leaf's value, e.g. for optimizer updates.
    Matrix& mutable_value();
    const Matrix& grad() const { return node_->grad; }
    bool has_grad() const { return node_->grad.size() != 0; }
    void zero_grad();

    Shape shape() const { return {rows(), cols()}; }
    Index rows() const { return node_->value.rows(); }
    Index cols() const { return node_->value.cols(); }
    Index size() const { return node_->value.size(); }
    double item() const;
    double operator()(Index r, Index c) const { return node_->value(r, c); }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on);
    /// Same value, cut from the graph.
    Tensor detach() const { return Tensor(node_->value, false); }

    /// Populates gradients on every reachable leaf. The tensor must be 1 x 1.
    /// A graph can be differentiated once; a second call raises StaleGraphError.
    void backward();

    const NodePtr& node() const { return node_; }

private:
    NodePtr node_;
};

/// Thread-local switch that stops graph recording (inference).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

/// Registers an operation with a user-supplied backward rule. `backward`
/// receives the output gradient and must return one gradient per input
/// (entries for inputs that do not require grad may be left empty).
using CustomBackward = std::function<std::vector<Matrix>(const Matrix& grad_out)>;
Tensor custom(const char* op, std::vector<Tensor> inputs, Matrix value, CustomBackward backward);

// Primitive set. Binary elementwise ops accept equal shapes, or a 1 x cols
// row / 1 x 1 scalar on the right that is broadcast.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor log(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
/// Per-row standardization (x - mean) / sqrt(max(var, 1e-5)); no affine.
Tensor layer_norm_rows(const Tensor& a);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, Index start, Index count);
Tensor slice_rows(const Tensor& a, Index start, Index count);
/// Rows of `table` selected by `ids`.
Tensor embedding(const Tensor& table, std::span<const int> ids);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Column means over rows: (r x c) -> (1 x c).
Tensor mean_rows(const Tensor& a);
/// Population variance over all entries, as a 1 x 1 tensor.
Tensor variance(const Tensor& a);
/// -log softmax(logits)[label] for a 1 x C row of logits.
Tensor cross_entropy_with_logits(const Tensor& logits, int label);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }
inline Tensor operator-(double s, const Tensor& a) { return add_scalar(scale(a, -1.0), s); }

inline constexpr double kLayerNormVarianceFloor = 1e-5;

struct GradCheckReport {
    double max_relative_error = 0.0;
    Index worst_index = -1;
    bool passed = false;
};

/// Compares backward() against central differences of `f` around `x`.
/// Per-coordinate error is |ad - fd| / max(1, |ad|, |fd|).
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Matrix& x, double h, double tol);

}  // namespace aqcf::ag
