#include "bgrl/tensor.hpp"

#include "bgrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace bgrl {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

namespace detail {

void TensorImpl::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

} // namespace detail

using detail::TensorImpl;

detail::TensorImpl& unwrap(const Tensor& t) { return *t.impl_; }

// Builds an op result; the tape node is recorded only when some parent
// participates in differentiation.
Tensor make_op_result(const char* op, Shape shape, std::vector<double> data,
                      std::vector<Tensor> parents,
                      std::function<void(TensorImpl&)> backward_fn) {
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::move(data);
    bool track = false;
    for (const auto& p : parents) track = track || p.requires_grad();
    if (track) {
        t.impl_->requires_grad = true;
        t.impl_->op = op;
        t.impl_->parents = std::move(parents);
        t.impl_->backward_fn = std::move(backward_fn);
    }
    return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return from_data(std::move(shape), {}, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    std::size_t n = shape_numel(shape);
    return from_data(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    std::size_t n = shape_numel(shape);
    if (data.empty()) data.assign(n, 0.0);
    if (data.size() != n) {
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::rank() const { return impl_->shape.size(); }
std::size_t Tensor::dim(std::size_t i) const { return impl_->shape.at(i); }
std::size_t Tensor::numel() const { return impl_->data.size(); }

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
    if (numel() != 1) {
        throw ContractError("item() requires a scalar tensor, got shape " + shape_str(shape()));
    }
    return impl_->data[0];
}

double Tensor::at(std::size_t flat_index) const { return impl_->data.at(flat_index); }

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

void Tensor::set_requires_grad(bool v) { impl_->requires_grad = v; }

std::span<const double> Tensor::grad() const {
    impl_->ensure_grad();
    return impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
    impl_->ensure_grad();
    return impl_->grad;
}

void Tensor::zero_grad() {
    impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::clone() const {
    return Tensor::from_data(impl_->shape, impl_->data, impl_->requires_grad);
}

void Tensor::backward() const {
    if (numel() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " + shape_str(shape()));
    }
    // Iterative post-order DFS over parents; the post-order list reversed is
    // the exact reverse topological order of the forward pass.
    std::vector<TensorImpl*> order;
    std::unordered_set<TensorImpl*> seen;
    struct Frame {
        TensorImpl* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({impl_.get(), 0});
    seen.insert(impl_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorImpl* p = f.node->parents[f.next_parent++].impl_.get();
            if (seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    impl_->ensure_grad();
    impl_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorImpl* node = *it;
        if (node->backward_fn) {
            node->ensure_grad();
            node->backward_fn(*node);
        }
    }
}

// --- op helpers ---------------------------------------------------------------

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

void accumulate(TensorImpl& target, const double* src, std::size_t n) {
    target.ensure_grad();
    double* g = target.grad.data();
    for (std::size_t i = 0; i < n; ++i) g[i] += src[i];
}

} // namespace

// --- elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    std::size_t n = a.numel();
    std::vector<double> out(n);
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = da[i] + db[i];
    return make_op_result("add", a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
        for (auto& parent : self.parents) {
            TensorImpl& p = unwrap(parent);
            if (!p.requires_grad) continue;
            accumulate(p, self.grad.data(), self.grad.size());
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    std::size_t n = a.numel();
    std::vector<double> out(n);
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = da[i] - db[i];
    return make_op_result("sub", a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        TensorImpl& pb = unwrap(self.parents[1]);
        if (pa.requires_grad) accumulate(pa, self.grad.data(), self.grad.size());
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    std::size_t n = a.numel();
    std::vector<double> out(n);
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = da[i] * db[i];
    return make_op_result("mul", a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        TensorImpl& pb = unwrap(self.parents[1]);
        std::size_t n = self.grad.size();
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pa.grad[i] += self.grad[i] * pb.data[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pb.grad[i] += self.grad[i] * pa.data[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::size_t n = a.numel();
    std::vector<double> out(n);
    const auto da = a.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = da[i] * c;
    return make_op_result("scale", a.shape(), std::move(out), {a}, [c](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        if (!pa.requires_grad && !pa.backward_fn) return;
        pa.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * c;
    });
}

Tensor scalar_mul(const Tensor& s, const Tensor& x) {
    if (s.numel() != 1) {
        throw DimensionError("scalar_mul: weight must be a one-element tensor, got " +
                             shape_str(s.shape()));
    }
    std::size_t n = x.numel();
    double sv = s.data()[0];
    std::vector<double> out(n);
    const auto dx = x.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = sv * dx[i];
    return make_op_result("scalar_mul", x.shape(), std::move(out), {s, x}, [](TensorImpl& self) {
        TensorImpl& ps = unwrap(self.parents[0]);
        TensorImpl& px = unwrap(self.parents[1]);
        std::size_t n = self.grad.size();
        if (ps.requires_grad) {
            ps.ensure_grad();
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += self.grad[i] * px.data[i];
            ps.grad[0] += acc;
        }
        if (px.requires_grad) {
            px.ensure_grad();
            double sv = ps.data[0];
            for (std::size_t i = 0; i < n; ++i) px.grad[i] += self.grad[i] * sv;
        }
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return make_op_result("sum", {1}, {acc}, {a}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        if (!pa.requires_grad && !pa.backward_fn) return;
        pa.ensure_grad();
        double g = self.grad[0];
        for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += g;
    });
}

Tensor dot(const Tensor& a, const Tensor& b) {
    require_same_shape("dot", a, b);
    double acc = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) acc += da[i] * db[i];
    return make_op_result("dot", {1}, {acc}, {a, b}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        TensorImpl& pb = unwrap(self.parents[1]);
        double g = self.grad[0];
        std::size_t n = pa.data.size();
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pa.grad[i] += g * pb.data[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pb.grad[i] += g * pa.data[i];
        }
    });
}

Tensor relu(const Tensor& a) {
    std::size_t n = a.numel();
    std::vector<double> out(n);
    const auto da = a.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = da[i] > 0.0 ? da[i] : 0.0;
    return make_op_result("relu", a.shape(), std::move(out), {a}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        if (!pa.requires_grad && !pa.backward_fn) return;
        pa.ensure_grad();
        // Gradient passes where x > 0; zero at and below 0.
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (pa.data[i] > 0.0) pa.grad[i] += self.grad[i];
        }
    });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape("mse_loss", pred, target);
    std::size_t n = pred.numel();
    const auto dp = pred.data();
    const auto dt = target.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = dp[i] - dt[i];
        acc += d * d;
    }
    acc /= static_cast<double>(n);
    return make_op_result("mse_loss", {1}, {acc}, {pred, target}, [](TensorImpl& self) {
        TensorImpl& pp = unwrap(self.parents[0]);
        TensorImpl& pt = unwrap(self.parents[1]);
        std::size_t n = pp.data.size();
        double g = self.grad[0] * 2.0 / static_cast<double>(n);
        if (pp.requires_grad) {
            pp.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pp.grad[i] += g * (pp.data[i] - pt.data[i]);
        }
        if (pt.requires_grad) {
            pt.ensure_grad();
            for (std::size_t i = 0; i < n; ++i) pt.grad[i] -= g * (pp.data[i] - pt.data[i]);
        }
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                             shape_str(shape));
    }
    std::vector<double> out(a.data().begin(), a.data().end());
    return make_op_result("reshape", std::move(shape), std::move(out), {a}, [](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        if (!pa.requires_grad && !pa.backward_fn) return;
        accumulate(pa, self.grad.data(), self.grad.size());
    });
}

// --- linear algebra -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(m * n, 0.0);
    const double* da = a.data().data();
    const double* db = b.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            double av = da[i * k + p];
            const double* brow = db + p * n;
            double* orow = out.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return make_op_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](TensorImpl& self) {
        TensorImpl& pa = unwrap(self.parents[0]);
        TensorImpl& pb = unwrap(self.parents[1]);
        const double* g = self.grad.data();
        // dA = dC . B^T
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* grow = g + i * n;
                    const double* brow = pb.data.data() + p * n;
                    for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                    pa.grad[i * k + p] += acc;
                }
            }
        }
        // dB = A^T . dC
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t i = 0; i < m; ++i) {
                    double av = pa.data[i * k + p];
                    const double* grow = g + i * n;
                    double* brow = pb.grad.data() + p * n;
                    for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
                }
            }
        }
    });
}

Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.rank() != 1 || w.rank() != 2 || w.dim(1) != x.dim(0)) {
        throw DimensionError("fully_connected: W " + shape_str(w.shape()) +
                             " does not apply to x " + shape_str(x.shape()));
    }
    std::size_t d_out = w.dim(0), d_in = w.dim(1);
    if (b.defined() && (b.rank() != 1 || b.dim(0) != d_out)) {
        throw DimensionError("fully_connected: bias " + shape_str(b.shape()) +
                             " does not match output dim " + std::to_string(d_out));
    }
    std::vector<double> out(d_out, 0.0);
    const double* dx = x.data().data();
    const double* dw = w.data().data();
    for (std::size_t o = 0; o < d_out; ++o) {
        double acc = 0.0;
        const double* wrow = dw + o * d_in;
        for (std::size_t i = 0; i < d_in; ++i) acc += wrow[i] * dx[i];
        out[o] = acc;
    }
    if (b.defined()) {
        const double* dbv = b.data().data();
        for (std::size_t o = 0; o < d_out; ++o) out[o] += dbv[o];
    }
    std::vector<Tensor> parents = {x, w};
    if (b.defined()) parents.push_back(b);
    return make_op_result("fully_connected", {d_out}, std::move(out), std::move(parents),
                          [d_out, d_in](TensorImpl& self) {
        TensorImpl& px = unwrap(self.parents[0]);
        TensorImpl& pw = unwrap(self.parents[1]);
        const double* g = self.grad.data();
        if (px.requires_grad) {
            px.ensure_grad();
            for (std::size_t o = 0; o < d_out; ++o) {
                double gv = g[o];
                const double* wrow = pw.data.data() + o * d_in;
                for (std::size_t i = 0; i < d_in; ++i) px.grad[i] += gv * wrow[i];
            }
        }
        if (pw.requires_grad) {
            pw.ensure_grad();
            for (std::size_t o = 0; o < d_out; ++o) {
                double gv = g[o];
                double* wrow = pw.grad.data() + o * d_in;
                for (std::size_t i = 0; i < d_in; ++i) wrow[i] += gv * px.data[i];
            }
        }
        if (self.parents.size() == 3) {
            TensorImpl& pb = unwrap(self.parents[2]);
            if (pb.requires_grad) {
                pb.ensure_grad();
                for (std::size_t o = 0; o < d_out; ++o) pb.grad[o] += g[o];
            }
        }
    });
}

std::size_t argmax(const Tensor& a) {
    const auto d = a.data();
    std::size_t best = 0;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d[i] > d[best]) best = i;
    }
    return best;
}

} // namespace bgrl
