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

#include "mtlseg/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mtlseg/errors.hpp"

namespace mtlseg {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename Real>
Tensor<Real>::Tensor(Shape shape, std::vector<Real> values, bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor rank must be >= 1");
  for (auto e : shape)
    if (e == 0) throw DimensionError("tensor extents must be positive: " + shape_str(shape));
  if (shape_numel(shape) != values.size())
    throw DimensionError("shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw NumericError("non-finite tensor value at index " + std::to_string(i));
  node_ = std::make_shared<Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename Real>
Tensor<Real> Tensor<Real>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), Real(0), requires_grad);
}

template <typename Real>
Tensor<Real> Tensor<Real>::full(Shape shape, Real value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<Real>(n, value), requires_grad);
}

template <typename Real>
std::size_t Tensor<Real>::dim(std::size_t axis) const {
  if (axis >= rank())
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  return node_->shape[axis];
}

template <typename Real>
Real Tensor<Real>::item() const {
  if (numel() != 1) throw DimensionError("item() on non-scalar " + shape_str(shape()));
  return node_->value[0];
}

template <typename Real>
void Tensor<Real>::zero_grad() {
  node_->grad.clear();
}

template <typename Real>
Tensor<Real> Tensor<Real>::detach() const {
  return Tensor(node_->shape, node_->value, false);
}

template <typename Real>
Tensor<Real> Tensor<Real>::make_result(const char* op, Shape shape, std::vector<Real> value,
                                       const std::vector<Tensor>& inputs,
                                       std::function<void(Node&)> backward) {
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!std::isfinite(value[i]))
      throw NumericError(std::string(op) + " produced a non-finite value at index " +
                         std::to_string(i));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& in : inputs) any = any || (in.defined() && in.requires_grad());
    if (any) {
      node->requires_grad = true;
      for (const auto& in : inputs)
        if (in.defined() && in.requires_grad()) node->parents.push_back(in.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

template <typename Real>
std::vector<const detail::Node<Real>*> graph_nodes(const Tensor<Real>& root) {
  using N = detail::Node<Real>;
  std::vector<const N*> order;
  std::unordered_set<const N*> seen;
  // Iterative post-order DFS; the graph can be deep enough to overflow the
  // stack with recursion on large configs.
  std::vector<std::pair<const N*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const N* parent = node->parents[next++].get();
      if (seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename Real>
void Tensor<Real>::backward() const {
  if (numel() != 1) throw DimensionError("backward() needs a scalar, got " + shape_str(shape()));
  if (!requires_grad()) return;
  auto order = graph_nodes(*this);
  node_->grad_buffer()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* node = const_cast<Node*>(*it);
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template std::vector<const detail::Node<float>*> graph_nodes(const Tensor<float>&);
template std::vector<const detail::Node<double>*> graph_nodes(const Tensor<double>&);

}  // namespace mtlseg
