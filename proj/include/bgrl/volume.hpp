#pragma once

#include "bgrl/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bgrl {

enum class Cls { CN = 0, MCI = 1, AD = 2 };

std::string cls_name(Cls c);
Cls cls_from_name(const std::string& name);

// One subject's 3D intensity volume.
struct VolumeSample {
    std::string sample_id;
    Tensor volume; // [D x H x W]
    Cls label = Cls::CN;
};

// One latent feature row per subject.
struct FeatureRow {
    std::string sample_id;
    Cls label = Cls::CN;
    std::vector<double> values;
};

struct FeatureMatrix {
    std::vector<FeatureRow> rows;
};

// Keeps the k depth slices with the highest Shannon entropy of their 64-bin
// intensity histogram (bins span the volume-wide min-max range). Ties break
// toward the lower slice index; the selected slices are emitted in original
// depth order. A constant volume scores every slice 0, so the first k slices
// come back.
Tensor slice_rank_select(const Tensor& volume, std::size_t k);

// x + mu with mu ~ N(0,1) elementwise from the given seed; x is untouched.
Tensor add_noise(const Tensor& x, std::uint64_t seed);

// Per-volume min-max rescale to [0,1]; a constant volume maps to all zeros.
Tensor min_max_normalize_volume(const Tensor& volume);

} // namespace bgrl
