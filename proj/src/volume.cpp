#include "bgrl/volume.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/random.hpp"

#include <algorithm>
#include <cmath>

namespace bgrl {

std::string cls_name(Cls c) {
    switch (c) {
        case Cls::CN: return "CN";
        case Cls::MCI: return "MCI";
        case Cls::AD: return "AD";
    }
    return "?";
}

Cls cls_from_name(const std::string& name) {
    if (name == "CN") return Cls::CN;
    if (name == "MCI") return Cls::MCI;
    if (name == "AD") return Cls::AD;
    throw ParseError("unknown class label '" + name + "' (expected CN, MCI or AD)");
}

Tensor slice_rank_select(const Tensor& volume, std::size_t k) {
    if (volume.rank() != 3) {
        throw DimensionError("slice_rank_select: expected [D x H x W], got " +
                             shape_str(volume.shape()));
    }
    const std::size_t d = volume.dim(0), h = volume.dim(1), w = volume.dim(2);
    if (k > d) {
        throw ContractError("slice_rank_select: k=" + std::to_string(k) +
                            " exceeds depth " + std::to_string(d));
    }
    const auto data = volume.data();
    double lo = data[0], hi = data[0];
    for (double v : data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    const std::size_t plane = h * w;
    std::vector<double> score(d, 0.0);
    if (hi > lo) {
        std::vector<std::size_t> bins(64);
        for (std::size_t z = 0; z < d; ++z) {
            std::fill(bins.begin(), bins.end(), 0);
            const double* slice = data.data() + z * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                auto b = static_cast<std::size_t>((slice[i] - lo) / (hi - lo) * 64.0);
                if (b > 63) b = 63;
                bins[b]++;
            }
            double ent = 0.0;
            for (std::size_t c : bins) {
                if (c == 0) continue;
                double p = static_cast<double>(c) / static_cast<double>(plane);
                ent -= p * std::log2(p);
            }
            score[z] = ent;
        }
    }

    std::vector<std::size_t> idx(d);
    for (std::size_t z = 0; z < d; ++z) idx[z] = z;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    std::vector<double> out(k * plane);
    for (std::size_t i = 0; i < k; ++i) {
        const double* src = data.data() + idx[i] * plane;
        std::copy(src, src + plane, out.data() + i * plane);
    }
    return Tensor::from_data({k, h, w}, std::move(out));
}

Tensor add_noise(const Tensor& x, std::uint64_t seed) {
    Tensor mu = seeded_randn(x.shape(), seed);
    std::vector<double> out(x.numel());
    const auto dx = x.data();
    const auto dm = mu.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = dx[i] + dm[i];
    return Tensor::from_data(x.shape(), std::move(out));
}

Tensor min_max_normalize_volume(const Tensor& volume) {
    const auto data = volume.data();
    double lo = data[0], hi = data[0];
    for (double v : data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(volume.numel(), 0.0);
    if (hi > lo) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (data[i] - lo) / (hi - lo);
    }
    return Tensor::from_data(volume.shape(), std::move(out));
}

} // namespace bgrl
