#pragma once

#include "bgrl/dataset.hpp"
#include "bgrl/tensor.hpp"
#include "bgrl/volume.hpp"

#include <map>
#include <string>
#include <vector>

namespace bgrl {

// "RVT1" volume file: 4-byte magic, 1 rank byte (always 3), three LE u32
// dims D,H,W, then D*H*W LE 64-bit floats in row-major order.
void write_rvt(const std::string& path, const Tensor& volume);
Tensor read_rvt(const std::string& path);

// labels manifest: header `sample_id,label` with label in {CN,MCI,AD}
void write_labels_csv(const std::string& path,
                      const std::vector<std::pair<std::string, Cls>>& labels);
std::vector<std::pair<std::string, Cls>> read_labels_csv(const std::string& path);

// feature matrix: header `sample_id,label,f0,...,f{dim-1}`
void write_features_csv(const std::string& path, const FeatureMatrix& features);
FeatureMatrix read_features_csv(const std::string& path);

// gene expression table, same schema load_gene_csv expects
void write_gene_csv(const std::string& path, const GeneExpressionTable& table);

// partition manifest: header `sample_id,split` with split in {train,test}
void write_partition_csv(const std::string& path, const DatasetPartition& partition);
void read_partition_csv(const std::string& path, std::vector<std::string>& train_ids,
                        std::vector<std::string>& test_ids);

// Checkpoint container: magic `BGNN`, a version byte, then a length-prefixed
// list of named tensors (name as length-prefixed UTF-8, rank and dims as LE
// u32, then LE 64-bit floats). Entries keep insertion order on disk.
struct Checkpoint {
    std::vector<std::pair<std::string, Tensor>> entries;

    void add(const std::string& name, const Tensor& t);
    const Tensor* find(const std::string& name) const;
    Tensor require(const std::string& name) const;
    double require_scalar(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// volume dataset directory: labels.csv plus one <sample_id>.rvt per sample
std::vector<VolumeSample> read_volume_dir(const std::string& dir);
void write_volume_dir(const std::string& dir, const std::vector<VolumeSample>& samples);

} // namespace bgrl
