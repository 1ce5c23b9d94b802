/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 mtlseg contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtlseg {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One value in the recorded computation graph. Values are immutable once the
// producing op returns; only leaves (parameters) are mutated, by the optimizer.
template <typename Real>
struct Node {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::span<Real> grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), Real(0));
    return grad;
  }
};

}  // namespace detail

/// Whether ops currently record the graph (thread-local).
bool grad_enabled();

/// Disables graph recording for the lifetime of the guard.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reference-counted handle to a dense row-major array with optional
/// gradient. Copies share the node; ops always produce new nodes.
template <typename Real>
class Tensor {
 public:
  using Node = detail::Node<Real>;
  using value_type = Real;

  Tensor() = default;
  Tensor(Shape shape, std::vector<Real> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node_->value.size(); }
  /// Size of the last axis.
  std::size_t cols() const { return node_->shape.back(); }
  /// Product of all axes but the last.
  std::size_t rows() const { return numel() / cols(); }

  std::span<const Real> data() const { return node_->value; }
  /// Mutable access for leaves: parameter initialisation, optimizer updates,
  /// finite-difference perturbation.
  std::span<Real> mutable_data() { return node_->value; }
  std::span<const Real> grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->parents.empty() && !node_->backward; }
  const char* op_name() const { return node_->op; }
  Real item() const;

  void zero_grad();
  /// Reverse-mode sweep from this scalar; gradients accumulate into leaves.
  void backward() const;
  /// Same values, no history.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

  /// Builds an op result. `backward` receives the result node (its grad is
  /// populated) and accumulates into the inputs it captured. Throws
  /// NumericError when `value` contains a non-finite entry.
  static Tensor make_result(const char* op, Shape shape, std::vector<Real> value,
                            const std::vector<Tensor>& inputs,
                            std::function<void(Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// Grad buffer of `t` for accumulation inside a backward closure, or an empty
/// span when `t` does not take part in differentiation.
template <typename Real>
std::span<Real> grad_sink(const Tensor<Real>& t) {
  if (!t.defined() || !t.requires_grad()) return {};
  return t.node()->grad_buffer();
}

/// Values of every node reachable from `root`, in topological order.
template <typename Real>
std::vector<const detail::Node<Real>*> graph_nodes(const Tensor<Real>& root);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace mtlseg
