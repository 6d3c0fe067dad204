#pragma once

#include "bgrl/autoencoder.hpp"
#include "bgrl/bgnn.hpp"
#include "bgrl/dataset.hpp"

#include <string>

namespace bgrl {

// Models serialize into the named-tensor checkpoint container; architecture
// facts that the parameter shapes cannot carry ride along as reserved
// "meta/..." scalar entries, so a checkpoint alone reconstructs the model.

void save_bgnn_checkpoint(const std::string& path, const BgnnModel& model, const Task& task,
                          std::uint64_t seed);

struct LoadedBgnn {
    BgnnModel model;
    Task task;
    std::uint64_t seed = 0;
};

LoadedBgnn load_bgnn_checkpoint(const std::string& path);

void save_autoencoder_checkpoint(const std::string& path, const AutoencoderModel& model);
AutoencoderModel load_autoencoder_checkpoint(const std::string& path);

} // namespace bgrl
