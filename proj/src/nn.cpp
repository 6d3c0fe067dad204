#include "bgrl/nn.hpp"

#include "bgrl/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace bgrl {

using detail::TensorImpl;

Tensor make_op_result(const char* op, Shape shape, std::vector<double> data,
                      std::vector<Tensor> parents,
                      std::function<void(TensorImpl&)> backward_fn);
detail::TensorImpl& unwrap(const Tensor& t);

Tensor conv3d(const Tensor& input, const Tensor& kernels, std::size_t padding) {
    if (input.rank() != 4 || kernels.rank() != 5) {
        throw DimensionError("conv3d: expected input [C_in x D x H x W] and kernels "
                             "[C_out x C_in x k x k x k], got " + shape_str(input.shape()) +
                             " and " + shape_str(kernels.shape()));
    }
    const std::size_t c_in = input.dim(0), d = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t c_out = kernels.dim(0), k = kernels.dim(2);
    if (kernels.dim(1) != c_in || kernels.dim(3) != k || kernels.dim(4) != k) {
        throw DimensionError("conv3d: kernels " + shape_str(kernels.shape()) +
                             " do not match input " + shape_str(input.shape()));
    }
    if (k % 2 == 0) throw ContractError("conv3d: kernel size must be odd, got " + std::to_string(k));
    if (d + 2 * padding < k || h + 2 * padding < k || w + 2 * padding < k) {
        throw DimensionError("conv3d: kernel " + shape_str(kernels.shape()) +
                             " larger than padded input " + shape_str(input.shape()));
    }
    const std::size_t od = d + 2 * padding - k + 1;
    const std::size_t oh = h + 2 * padding - k + 1;
    const std::size_t ow = w + 2 * padding - k + 1;

    std::vector<double> out(c_out * od * oh * ow, 0.0);
    const double* in = input.data().data();
    const double* ker = kernels.data().data();
    const long pad = static_cast<long>(padding);

    for (std::size_t co = 0; co < c_out; ++co) {
        for (std::size_t ci = 0; ci < c_in; ++ci) {
            const double* kbase = ker + ((co * c_in + ci) * k) * k * k;
            const double* ibase = in + ci * d * h * w;
            double* obase = out.data() + co * od * oh * ow;
            for (std::size_t oz = 0; oz < od; ++oz) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        double acc = 0.0;
                        for (std::size_t kz = 0; kz < k; ++kz) {
                            long iz = static_cast<long>(oz + kz) - pad;
                            if (iz < 0 || iz >= static_cast<long>(d)) continue;
                            for (std::size_t ky = 0; ky < k; ++ky) {
                                long iy = static_cast<long>(oy + ky) - pad;
                                if (iy < 0 || iy >= static_cast<long>(h)) continue;
                                const double* krow = kbase + (kz * k + ky) * k;
                                const double* irow = ibase + (iz * h + iy) * w;
                                for (std::size_t kx = 0; kx < k; ++kx) {
                                    long ix = static_cast<long>(ox + kx) - pad;
                                    if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                    acc += krow[kx] * irow[ix];
                                }
                            }
                        }
                        obase[(oz * oh + oy) * ow + ox] += acc;
                    }
                }
            }
        }
    }

    Shape out_shape{c_out, od, oh, ow};
    return make_op_result(
        "conv3d", std::move(out_shape), std::move(out), {input, kernels},
        [c_in, d, h, w, c_out, k, od, oh, ow, pad](TensorImpl& self) {
            TensorImpl& pin = unwrap(self.parents[0]);
            TensorImpl& pker = unwrap(self.parents[1]);
            const bool want_din = pin.requires_grad;
            const bool want_dker = pker.requires_grad;
            if (want_din) pin.ensure_grad();
            if (want_dker) pker.ensure_grad();
            const double* g = self.grad.data();
            for (std::size_t co = 0; co < c_out; ++co) {
                for (std::size_t ci = 0; ci < c_in; ++ci) {
                    const double* kbase = pker.data.data() + ((co * c_in + ci) * k) * k * k;
                    double* dkbase = want_dker ? pker.grad.data() + ((co * c_in + ci) * k) * k * k
                                               : nullptr;
                    const double* ibase = pin.data.data() + ci * d * h * w;
                    double* dibase = want_din ? pin.grad.data() + ci * d * h * w : nullptr;
                    const double* gbase = g + co * od * oh * ow;
                    for (std::size_t oz = 0; oz < od; ++oz) {
                        for (std::size_t oy = 0; oy < oh; ++oy) {
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                double gv = gbase[(oz * oh + oy) * ow + ox];
                                if (gv == 0.0) continue;
                                for (std::size_t kz = 0; kz < k; ++kz) {
                                    long iz = static_cast<long>(oz + kz) - pad;
                                    if (iz < 0 || iz >= static_cast<long>(d)) continue;
                                    for (std::size_t ky = 0; ky < k; ++ky) {
                                        long iy = static_cast<long>(oy + ky) - pad;
                                        if (iy < 0 || iy >= static_cast<long>(h)) continue;
                                        const std::size_t koff = (kz * k + ky) * k;
                                        const std::size_t ioff = (iz * h + iy) * w;
                                        for (std::size_t kx = 0; kx < k; ++kx) {
                                            long ix = static_cast<long>(ox + kx) - pad;
                                            if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                            if (want_din) dibase[ioff + ix] += gv * kbase[koff + kx];
                                            if (want_dker) dkbase[koff + kx] += gv * ibase[ioff + ix];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        });
}

Tensor maxpool3d(const Tensor& input, std::size_t window) {
    if (input.rank() != 4) {
        throw DimensionError("maxpool3d: expected [C x D x H x W], got " +
                             shape_str(input.shape()));
    }
    if (window < 1) throw ContractError("maxpool3d: window must be >= 1");
    const std::size_t c = input.dim(0), d = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t od = d / window, oh = h / window, ow = w / window;
    if (od == 0 || oh == 0 || ow == 0) {
        throw DimensionError("maxpool3d: window " + std::to_string(window) +
                             " exceeds input " + shape_str(input.shape()));
    }
    std::vector<double> out(c * od * oh * ow);
    std::vector<std::size_t> argmax_flat(out.size());
    const double* in = input.data().data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t oz = 0; oz < od; ++oz) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double best = -HUGE_VAL;
                    std::size_t best_idx = 0;
                    for (std::size_t kz = 0; kz < window; ++kz) {
                        for (std::size_t ky = 0; ky < window; ++ky) {
                            for (std::size_t kx = 0; kx < window; ++kx) {
                                std::size_t idx = ((ch * d + oz * window + kz) * h +
                                                   oy * window + ky) * w + ox * window + kx;
                                // strict > keeps the first occurrence on ties
                                if (in[idx] > best) {
                                    best = in[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                    }
                    std::size_t oidx = ((ch * od + oz) * oh + oy) * ow + ox;
                    out[oidx] = best;
                    argmax_flat[oidx] = best_idx;
                }
            }
        }
    }
    return make_op_result("maxpool3d", {c, od, oh, ow}, std::move(out), {input},
                          [argmax_flat = std::move(argmax_flat)](TensorImpl& self) {
        TensorImpl& pin = unwrap(self.parents[0]);
        if (!pin.requires_grad) return;
        pin.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            pin.grad[argmax_flat[i]] += self.grad[i];
        }
    });
}

Tensor batchnorm3d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, bool train) {
    if (input.rank() != 5) {
        throw DimensionError("batchnorm3d: expected [N x C x D x H x W], got " +
                             shape_str(input.shape()));
    }
    const std::size_t n = input.dim(0), c = input.dim(1);
    const std::size_t spatial = input.dim(2) * input.dim(3) * input.dim(4);
    if (gamma.numel() != c || beta.numel() != c || state.running_mean.numel() != c ||
        state.running_var.numel() != c) {
        throw DimensionError("batchnorm3d: per-channel parameters do not match C=" +
                             std::to_string(c));
    }
    if (n < 1) throw ContractError("batchnorm3d: batch size must be >= 1 in train mode");

    const std::size_t m = n * spatial; // elements per channel
    const double* in = input.data().data();
    std::vector<double> mean(c), var(c);
    if (train) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* base = in + (b * c + ch) * spatial;
                for (std::size_t i = 0; i < spatial; ++i) acc += base[i];
            }
            mean[ch] = acc / static_cast<double>(m);
            double vacc = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* base = in + (b * c + ch) * spatial;
                for (std::size_t i = 0; i < spatial; ++i) {
                    double dv = base[i] - mean[ch];
                    vacc += dv * dv;
                }
            }
            var[ch] = vacc / static_cast<double>(m); // biased
        }
        auto rm = state.running_mean.mutable_data();
        auto rv = state.running_var.mutable_data();
        for (std::size_t ch = 0; ch < c; ++ch) {
            rm[ch] = (1.0 - kBatchNormMomentum) * rm[ch] + kBatchNormMomentum * mean[ch];
            rv[ch] = (1.0 - kBatchNormMomentum) * rv[ch] + kBatchNormMomentum * var[ch];
        }
    } else {
        auto rm = state.running_mean.data();
        auto rv = state.running_var.data();
        for (std::size_t ch = 0; ch < c; ++ch) {
            mean[ch] = rm[ch];
            var[ch] = rv[ch];
        }
    }

    std::vector<double> inv_std(c), xhat(input.numel());
    std::vector<double> out(input.numel());
    const double* gam = gamma.data().data();
    const double* bet = beta.data().data();
    for (std::size_t ch = 0; ch < c; ++ch) inv_std[ch] = 1.0 / std::sqrt(var[ch] + kBatchNormEps);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double* base = in + (b * c + ch) * spatial;
            double* xh = xhat.data() + (b * c + ch) * spatial;
            double* ob = out.data() + (b * c + ch) * spatial;
            for (std::size_t i = 0; i < spatial; ++i) {
                xh[i] = (base[i] - mean[ch]) * inv_std[ch];
                ob[i] = gam[ch] * xh[i] + bet[ch];
            }
        }
    }

    return make_op_result(
        "batchnorm3d", input.shape(), std::move(out), {input, gamma, beta},
        [n, c, spatial, m, train, xhat = std::move(xhat),
         inv_std = std::move(inv_std)](TensorImpl& self) {
            TensorImpl& pin = unwrap(self.parents[0]);
            TensorImpl& pgam = unwrap(self.parents[1]);
            TensorImpl& pbet = unwrap(self.parents[2]);
            const double* g = self.grad.data();
            // dgamma, dbeta
            if (pgam.requires_grad) {
                pgam.ensure_grad();
                for (std::size_t b = 0; b < n; ++b)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const double* gb = g + (b * c + ch) * spatial;
                        const double* xh = xhat.data() + (b * c + ch) * spatial;
                        double acc = 0.0;
                        for (std::size_t i = 0; i < spatial; ++i) acc += gb[i] * xh[i];
                        pgam.grad[ch] += acc;
                    }
            }
            if (pbet.requires_grad) {
                pbet.ensure_grad();
                for (std::size_t b = 0; b < n; ++b)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const double* gb = g + (b * c + ch) * spatial;
                        double acc = 0.0;
                        for (std::size_t i = 0; i < spatial; ++i) acc += gb[i];
                        pbet.grad[ch] += acc;
                    }
            }
            if (!pin.requires_grad) return;
            pin.ensure_grad();
            const double* gam = pgam.data.data();
            if (!train) {
                // Running statistics are constants in eval mode.
                for (std::size_t b = 0; b < n; ++b)
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const double* gb = g + (b * c + ch) * spatial;
                        double* di = pin.grad.data() + (b * c + ch) * spatial;
                        double f = gam[ch] * inv_std[ch];
                        for (std::size_t i = 0; i < spatial; ++i) di[i] += f * gb[i];
                    }
                return;
            }
            // Train mode: batch statistics are functions of the input.
            // dx = gamma*inv_std/m * (m*dxhat_i - sum(dxhat) - xhat_i * sum(dxhat*xhat))
            for (std::size_t ch = 0; ch < c; ++ch) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t b = 0; b < n; ++b) {
                    const double* gb = g + (b * c + ch) * spatial;
                    const double* xh = xhat.data() + (b * c + ch) * spatial;
                    for (std::size_t i = 0; i < spatial; ++i) {
                        sum_g += gb[i];
                        sum_gx += gb[i] * xh[i];
                    }
                }
                double f = gam[ch] * inv_std[ch] / static_cast<double>(m);
                for (std::size_t b = 0; b < n; ++b) {
                    const double* gb = g + (b * c + ch) * spatial;
                    const double* xh = xhat.data() + (b * c + ch) * spatial;
                    double* di = pin.grad.data() + (b * c + ch) * spatial;
                    for (std::size_t i = 0; i < spatial; ++i) {
                        di[i] += f * (static_cast<double>(m) * gb[i] - sum_g - xh[i] * sum_gx);
                    }
                }
            }
        });
}

Tensor upsample_nearest3d(const Tensor& input, std::size_t factor) {
    if (input.rank() != 4) {
        throw DimensionError("upsample_nearest3d: expected [C x D x H x W], got " +
                             shape_str(input.shape()));
    }
    if (factor < 1) throw ContractError("upsample_nearest3d: factor must be >= 1");
    const std::size_t c = input.dim(0), d = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t od = d * factor, oh = h * factor, ow = w * factor;
    std::vector<double> out(c * od * oh * ow);
    const double* in = input.data().data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t oz = 0; oz < od; ++oz) {
            for (std::size_t oy = 0; oy < oh; ++oy) {
                const double* irow = in + ((ch * d + oz / factor) * h + oy / factor) * w;
                double* orow = out.data() + ((ch * od + oz) * oh + oy) * ow;
                for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] = irow[ox / factor];
            }
        }
    }
    return make_op_result("upsample_nearest3d", {c, od, oh, ow}, std::move(out), {input},
                          [c, d, h, w, factor, od, oh, ow](TensorImpl& self) {
        TensorImpl& pin = unwrap(self.parents[0]);
        if (!pin.requires_grad) return;
        pin.ensure_grad();
        (void)d;
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t oz = 0; oz < od; ++oz) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const double* grow = self.grad.data() + ((ch * od + oz) * oh + oy) * ow;
                    double* irow = pin.grad.data() + ((ch * d + oz / factor) * h + oy / factor) * w;
                    for (std::size_t ox = 0; ox < ow; ++ox) irow[ox / factor] += grow[ox];
                }
            }
        }
        (void)w;
    });
}

Tensor add_channel_bias(const Tensor& input, const Tensor& bias) {
    if (input.rank() != 4 || bias.rank() != 1 || bias.dim(0) != input.dim(0)) {
        throw DimensionError("add_channel_bias: bias " + shape_str(bias.shape()) +
                             " does not match input " + shape_str(input.shape()));
    }
    const std::size_t c = input.dim(0);
    const std::size_t spatial = input.dim(1) * input.dim(2) * input.dim(3);
    std::vector<double> out(input.numel());
    const double* in = input.data().data();
    const double* b = bias.data().data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* ibase = in + ch * spatial;
        double* obase = out.data() + ch * spatial;
        for (std::size_t i = 0; i < spatial; ++i) obase[i] = ibase[i] + b[ch];
    }
    return make_op_result("add_channel_bias", input.shape(), std::move(out), {input, bias},
                          [c, spatial](TensorImpl& self) {
        TensorImpl& pin = unwrap(self.parents[0]);
        TensorImpl& pb = unwrap(self.parents[1]);
        if (pin.requires_grad) {
            pin.ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pin.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* gb = self.grad.data() + ch * spatial;
                double acc = 0.0;
                for (std::size_t i = 0; i < spatial; ++i) acc += gb[i];
                pb.grad[ch] += acc;
            }
        }
    });
}

} // namespace bgrl
