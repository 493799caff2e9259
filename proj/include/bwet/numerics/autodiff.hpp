#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "bwet/numerics/tensor.hpp"

namespace bwet {

template <typename T>
struct Node {
  Tensor<T> value;
  std::vector<T> grad;  // empty until touched by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T{0});
    return grad;
  }
};

/// Handle to a node of the reverse-mode tape. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;

  static Var leaf(Tensor<T> value, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }
  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }
  static Var param(Tensor<T> value) { return leaf(std::move(value), true); }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  /// Accumulated gradient; zeros if backward never reached this node.
  std::span<T> grad() { return node_->ensure_grad(); }
  std::span<const T> grad() const { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  void zero_grad() { node_->grad.assign(node_->value.size(), T{0}); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

  /// Assembles an op result. Parents that do not require grad are dropped
  /// from the tape; if none require grad the result is a constant.
  static Var from_op(Tensor<T> value, std::vector<Var> inputs,
                     std::function<void(Node<T>&)> backward_fn) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    for (auto& v : inputs) {
      if (v.defined() && v.requires_grad()) n->requires_grad = true;
    }
    if (n->requires_grad) {
      for (auto& v : inputs) n->parents.push_back(v.node_);
      n->backward_fn = std::move(backward_fn);
    }
    return Var(std::move(n));
  }

 private:
  explicit Var(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}
  std::shared_ptr<Node<T>> node_;
};

/// Runs reverse-mode accumulation from a scalar root.
template <typename T>
void backward(const Var<T>& root) {
  if (root.size() != 1) {
    throw UsageError("backward() needs a scalar root, got shape " + shape_str(root.shape()));
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.node(), 0}};
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (!n->backward_fn) continue;
    n->ensure_grad();
    for (auto& p : n->parents)
      if (p->requires_grad) p->ensure_grad();
    n->backward_fn(*n);
  }
}

}  // namespace bwet
