// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "tsd/errors.hpp"

namespace tsd {

using Shape = std::vector<std::size_t>;

inline std::size_t numel_of(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
        os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

// Reverse-mode tensor. Each op links its output node to its inputs and
// installs a pull-function that scatters the output gradient into them.
// backward() topologically sorts the reachable graph and runs the pulls in
// reverse, which is exactly a tape replay: node order is a topological
// order, gradients accumulate additively on shared inputs.
template <typename T>
class TensorT {
public:
    struct Node {
        Shape shape;
        std::vector<T> data;
        std::vector<T> grad;  // empty until touched by backward
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> pull;  // scatter node.grad into parents

        std::size_t numel() const { return data.size(); }
        void ensure_grad() {
            if (grad.size() != data.size()) grad.assign(data.size(), T(0));
        }
    };

    TensorT() : node_(std::make_shared<Node>()) {}

    explicit TensorT(Shape shape, bool requires_grad = false)
        : node_(std::make_shared<Node>()) {
        node_->shape = std::move(shape);
        node_->data.assign(numel_of(node_->shape), T(0));
        node_->requires_grad = requires_grad;
    }

    TensorT(Shape shape, std::vector<T> data, bool requires_grad = false)
        : node_(std::make_shared<Node>()) {
        if (numel_of(shape) != data.size())
            throw DimensionError("tensor data length " +
                                 std::to_string(data.size()) +
                                 " does not match shape " + shape_str(shape));
        node_->shape = std::move(shape);
        node_->data = std::move(data);
        node_->requires_grad = requires_grad;
    }

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

    static TensorT full(Shape shape, T value) {
        TensorT t(std::move(shape));
        std::fill(t.data().begin(), t.data().end(), value);
        return t;
    }

    static TensorT scalar(T value) {
        return TensorT(Shape{1}, std::vector<T>{value});
    }

    const Shape& shape() const { return node_->shape; }
    std::size_t ndim() const { return node_->shape.size(); }
    std::size_t extent(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t numel() const { return node_->data.size(); }

    std::vector<T>& data() { return node_->data; }
    const std::vector<T>& data() const { return node_->data; }
    std::vector<T>& grad() { return node_->grad; }
    const std::vector<T>& grad() const { return node_->grad; }
    bool has_grad() const { return !node_->grad.empty(); }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }

    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

    // 2-D accessors (row-major).
    T at(std::size_t r, std::size_t c) const {
        return node_->data[r * node_->shape[1] + c];
    }
    T& at(std::size_t r, std::size_t c) {
        return node_->data[r * node_->shape[1] + c];
    }

    T item() const {
        if (numel() != 1)
            throw UsageError("item() on tensor with " + std::to_string(numel()) +
                             " elements");
        return node_->data[0];
    }

    std::shared_ptr<Node> node() const { return node_; }

    // Fresh output node wired to inputs; `pull` runs during backward with the
    // output gradient already accumulated.
    static TensorT make_op(Shape shape, std::vector<T> data,
                           std::vector<TensorT> inputs,
                           std::function<void(Node&)> pull) {
        TensorT out(std::move(shape), std::move(data));
        bool needs = false;
        for (const auto& in : inputs) {
            needs = needs || in.requires_grad();
            out.node_->parents.push_back(in.node_);
        }
        out.node_->requires_grad = needs;
        if (needs) out.node_->pull = std::move(pull);
        return out;
    }

    // Reverse-tape traversal from a scalar root. Gradients accumulate; the
    // caller zeroes parameter grads between steps.
    void backward() {
        if (numel() != 1)
            throw UsageError("backward() requires a scalar root, got shape " +
                             shape_str(node_->shape));
        std::vector<Node*> order;
        std::unordered_set<Node*> seen;
        // Iterative post-order DFS; graphs can be thousands of nodes deep.
        std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
        seen.insert(node_.get());
        while (!stack.empty()) {
            auto& [n, next] = stack.back();
            if (next < n->parents.size()) {
                Node* p = n->parents[next++].get();
                if (p->requires_grad && seen.insert(p).second)
                    stack.emplace_back(p, 0);
            } else {
                order.push_back(n);
                stack.pop_back();
            }
        }
        node_->ensure_grad();
        node_->grad[0] += T(1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* n = *it;
            if (n->pull && !n->grad.empty()) n->pull(*n);
        }
    }

private:
    std::shared_ptr<Node> node_;
};

using Tensor = TensorT<double>;
using Tensor32 = TensorT<float>;

// A named trainable leaf. Names are dotted paths; the model keeps parameters
// in declaration order so checkpoints and optimizer slots line up.
template <typename T>
struct ParameterT {
    std::string name;
    TensorT<T> tensor;
};

using Parameter = ParameterT<double>;

}  // namespace tsd
