#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bgrl {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

namespace detail {
struct TensorImpl;
}

// Dense 64-bit float tensor with optional reverse-mode gradient.
//
// A Tensor is a cheap shared handle. Operations on tensors that require
// gradients record a tape node (operation id, parent handles, backward
// closure); Tensor::backward() replays the tape in reverse topological
// order and accumulates dLoss/dT into each reachable tensor's grad buffer.
// Gradient buffers start at exact zero and accumulate additively, so
// fan-out is handled by summation and callers zero grads between steps.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }

    const Shape& shape() const;
    std::size_t rank() const;
    std::size_t dim(std::size_t i) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    std::span<double> mutable_data();

    double item() const; // scalar tensors only
    double at(std::size_t flat_index) const;

    bool requires_grad() const;
    void set_requires_grad(bool v);

    // Gradient accumulator (allocated lazily, zero-filled).
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();

    // Reverse-mode pass from a scalar. Throws ContractError otherwise.
    void backward() const;

    // Deep copy of data (no tape, grad not copied).
    Tensor clone() const;

    // Identity of the underlying storage, for graph bookkeeping in tests.
    const void* id() const { return impl_.get(); }

private:
    friend struct detail::TensorImpl;
    friend Tensor make_op_result(const char* op, Shape shape, std::vector<double> data,
                                 std::vector<Tensor> parents,
                                 std::function<void(detail::TensorImpl&)> backward_fn);
    friend detail::TensorImpl& unwrap(const Tensor& t);

    std::shared_ptr<detail::TensorImpl> impl_;
};

namespace detail {

// One recorded forward operation: the backward closure reads this node's
// grad and scatters contributions into the parents' grads. Traversal order
// is exact reverse topological order of the forward pass.
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad; // empty until touched; same length as data after
    bool requires_grad = false;

    const char* op = "leaf";
    std::vector<Tensor> parents;
    std::function<void(TensorImpl&)> backward_fn;

    void ensure_grad();
};

} // namespace detail

// --- elementwise and reduction ops ------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// Broadcast multiply by a one-element tensor (edge weight times embedding).
Tensor scalar_mul(const Tensor& s, const Tensor& x);

Tensor sum(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);

// Mean over all elements of the squared difference.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// Same data, new shape (numel preserved).
Tensor reshape(const Tensor& a, Shape shape);

// --- linear algebra ----------------------------------------------------------

// [m x k] . [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

// W.x (+ b): x is rank-1 [d_in], W is [d_out x d_in], b optional [d_out].
Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b = Tensor());

// Index of the largest element; ties break to the lowest index.
std::size_t argmax(const Tensor& a);

} // namespace bgrl
