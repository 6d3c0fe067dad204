#include "bgrl/io.hpp"

#include "bgrl/errors.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace bgrl {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ParseError(path + ": truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError(path + ": truncated file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// shortest round-trip decimal representation, locale independent
std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = std::strtod(buf, nullptr);
    if (parsed == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            if (std::strtod(shorter, nullptr) == v) return shorter;
        }
    }
    return buf;
}

} // namespace

void write_rvt(const std::string& path, const Tensor& volume) {
    if (volume.rank() != 3) {
        throw DimensionError("write_rvt: expected [D x H x W], got " + shape_str(volume.shape()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write volume file: " + path);
    out.write("RVT1", 4);
    out.put(static_cast<char>(3));
    for (int i = 0; i < 3; ++i) write_u32(out, static_cast<std::uint32_t>(volume.dim(i)));
    for (double v : volume.data()) write_f64(out, v);
    if (!out) throw IoError("short write to volume file: " + path);
}

Tensor read_rvt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open volume file: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "RVT1", 4) != 0) {
        throw ParseError(path + ": not an RVT1 volume file");
    }
    int rank = in.get();
    if (rank != 3) throw ParseError(path + ": unsupported rank " + std::to_string(rank));
    Shape shape(3);
    for (auto& d : shape) {
        d = read_u32(in, path);
        if (d == 0) throw ParseError(path + ": zero dimension");
    }
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = read_f64(in, path);
    return Tensor::from_data(std::move(shape), std::move(data));
}

void write_labels_csv(const std::string& path,
                      const std::vector<std::pair<std::string, Cls>>& labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write labels file: " + path);
    out << "sample_id,label\n";
    for (const auto& [id, cls] : labels) out << id << "," << cls_name(cls) << "\n";
}

std::vector<std::pair<std::string, Cls>> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels file: " + path);
    std::string line;
    if (!std::getline(in, line) || split_line(line)[0] != "sample_id") {
        throw ParseError(path + ":1: expected header 'sample_id,label'");
    }
    std::vector<std::pair<std::string, Cls>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != 2) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 2 columns");
        }
        out.emplace_back(cells[0], cls_from_name(cells[1]));
    }
    return out;
}

void write_features_csv(const std::string& path, const FeatureMatrix& features) {
    if (features.rows.empty()) throw ContractError("write_features_csv: empty feature matrix");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write features file: " + path);
    const std::size_t dim = features.rows[0].values.size();
    out << "sample_id,label";
    for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
    out << "\n";
    for (const auto& r : features.rows) {
        if (r.values.size() != dim) {
            throw ContractError("write_features_csv: row " + r.sample_id +
                                " has inconsistent dimension");
        }
        out << r.sample_id << "," << cls_name(r.label);
        for (double v : r.values) out << "," << fmt_double(v);
        out << "\n";
    }
}

FeatureMatrix read_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open features file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto header = split_line(line);
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label" ||
        header[2] != "f0") {
        throw ParseError(path + ":1: expected header 'sample_id,label,f0,...'");
    }
    const std::size_t dim = header.size() - 2;
    FeatureMatrix fm;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != dim + 2) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(dim + 2) + " columns, got " +
                             std::to_string(cells.size()));
        }
        FeatureRow row;
        row.sample_id = cells[0];
        row.label = cls_from_name(cells[1]);
        row.values.reserve(dim);
        for (std::size_t i = 2; i < cells.size(); ++i) {
            try {
                row.values.push_back(std::stod(cells[i]));
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric value '" +
                                 cells[i] + "'");
            }
        }
        fm.rows.push_back(std::move(row));
    }
    if (fm.rows.empty()) throw EmptyDatasetError(path + ": no feature rows");
    return fm;
}

void write_gene_csv(const std::string& path, const GeneExpressionTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write gene file: " + path);
    out << "sample_id,label,apoe_1,psen1_1,psen1_2,psen1_3,psen1_4,"
           "psen2_1,psen2_2,psen2_3,psen2_4\n";
    for (const auto& r : table.rows) {
        out << r.sample_id << "," << cls_name(r.label);
        for (double v : r.apoe) out << "," << fmt_double(v);
        for (double v : r.psen1) out << "," << fmt_double(v);
        for (double v : r.psen2) out << "," << fmt_double(v);
        out << "\n";
    }
}

void write_partition_csv(const std::string& path, const DatasetPartition& partition) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write partition file: " + path);
    out << "sample_id,split\n";
    for (const auto& id : partition.train_ids) out << id << ",train\n";
    for (const auto& id : partition.test_ids) out << id << ",test\n";
}

void read_partition_csv(const std::string& path, std::vector<std::string>& train_ids,
                        std::vector<std::string>& test_ids) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open partition file: " + path);
    std::string line;
    if (!std::getline(in, line) || split_line(line)[0] != "sample_id") {
        throw ParseError(path + ":1: expected header 'sample_id,split'");
    }
    train_ids.clear();
    test_ids.clear();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != 2 || (cells[1] != "train" && cells[1] != "test")) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected '<id>,train|test'");
        }
        (cells[1] == "train" ? train_ids : test_ids).push_back(cells[0]);
    }
}

void Checkpoint::add(const std::string& name, const Tensor& t) {
    entries.emplace_back(name, t);
}

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : entries)
        if (n == name) return &t;
    return nullptr;
}

Tensor Checkpoint::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw ParseError("checkpoint is missing tensor '" + name + "'");
    return *t;
}

double Checkpoint::require_scalar(const std::string& name) const {
    Tensor t = require(name);
    if (t.numel() != 1) throw ParseError("checkpoint tensor '" + name + "' is not a scalar");
    return t.data()[0];
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write("BGNN", 4);
    out.put(static_cast<char>(1)); // version
    write_u32(out, static_cast<std::uint32_t>(ckpt.entries.size()));
    for (const auto& [name, tensor] : ckpt.entries) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t i = 0; i < tensor.rank(); ++i)
            write_u32(out, static_cast<std::uint32_t>(tensor.dim(i)));
        for (double v : tensor.data()) write_f64(out, v);
    }
    if (!out) throw IoError("short write to checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "BGNN", 4) != 0) {
        throw ParseError(path + ": not a BGNN checkpoint");
    }
    int version = in.get();
    if (version != 1) throw ParseError(path + ": unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    std::uint32_t count = read_u32(in, path);
    for (std::uint32_t e = 0; e < count; ++e) {
        std::uint32_t name_len = read_u32(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw ParseError(path + ": truncated file");
        std::uint32_t rank = read_u32(in, path);
        Shape shape(rank);
        for (auto& d : shape) d = read_u32(in, path);
        std::vector<double> data(shape_numel(shape));
        for (auto& v : data) v = read_f64(in, path);
        ckpt.add(name, Tensor::from_data(std::move(shape), std::move(data)));
    }
    return ckpt;
}

std::vector<VolumeSample> read_volume_dir(const std::string& dir) {
    const std::string labels_path = (fs::path(dir) / "labels.csv").string();
    if (!fs::exists(labels_path)) {
        throw IoError("missing labels manifest: " + labels_path);
    }
    auto labels = read_labels_csv(labels_path);
    std::vector<VolumeSample> samples;
    samples.reserve(labels.size());
    for (const auto& [id, cls] : labels) {
        const std::string vpath = (fs::path(dir) / (id + ".rvt")).string();
        if (!fs::exists(vpath)) throw IoError("missing volume file: " + vpath);
        samples.push_back({id, read_rvt(vpath), cls});
    }
    if (samples.empty()) throw EmptyDatasetError(dir + ": labels.csv lists no samples");
    return samples;
}

void write_volume_dir(const std::string& dir, const std::vector<VolumeSample>& samples) {
    fs::create_directories(dir);
    std::vector<std::pair<std::string, Cls>> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) {
        write_rvt((fs::path(dir) / (s.sample_id + ".rvt")).string(), s.volume);
        labels.emplace_back(s.sample_id, s.label);
    }
    write_labels_csv((fs::path(dir) / "labels.csv").string(), labels);
}

} // namespace bgrl
