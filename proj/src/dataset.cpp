#include "bgrl/dataset.hpp"

#include "bgrl/errors.hpp"
#include "bgrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace bgrl {

const std::vector<GeneSpec>& gene_catalog() {
    static const std::vector<GeneSpec> catalog = {{"APOE", 1}, {"PSEN1", 4}, {"PSEN2", 4}};
    return catalog;
}

namespace {

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
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

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

constexpr const char* kGeneHeader =
    "sample_id,label,apoe_1,psen1_1,psen1_2,psen1_3,psen1_4,psen2_1,psen2_2,psen2_3,psen2_4";

} // namespace

std::vector<GeneSpec> resolve_gene_subset(const std::vector<std::string>& names) {
    if (names.empty()) throw ConfigError("gene subset must not be empty");
    std::vector<GeneSpec> out;
    for (const auto& spec : gene_catalog()) {
        for (const auto& n : names) {
            if (upper(n) == spec.name) {
                out.push_back(spec);
                break;
            }
        }
    }
    std::unordered_set<std::string> known;
    for (const auto& spec : gene_catalog()) known.insert(spec.name);
    for (const auto& n : names) {
        if (!known.count(upper(n))) throw ConfigError("unknown gene '" + n + "'");
    }
    return out;
}

const std::vector<double>& GeneRow::gene(const std::string& name) const {
    std::string u = upper(name);
    if (u == "APOE") return apoe;
    if (u == "PSEN1") return psen1;
    if (u == "PSEN2") return psen2;
    throw ConfigError("unknown gene '" + name + "'");
}

GeneExpressionTable load_gene_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open gene CSV: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    {
        auto cells = split_csv_line(line);
        std::string got;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) got += ",";
            got += trim(cells[i]);
        }
        if (got != kGeneHeader) {
            throw ParseError(path + ":1: bad header, expected '" + kGeneHeader + "'");
        }
    }

    GeneExpressionTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 11) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 11 columns, got " +
                             std::to_string(cells.size()));
        }
        GeneRow row;
        row.sample_id = trim(cells[0]);
        if (row.sample_id.empty()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": empty sample_id");
        }
        row.label = cls_from_name(trim(cells[1]));
        bool missing = false;
        std::vector<double> values;
        values.reserve(9);
        for (std::size_t i = 2; i < 11; ++i) {
            std::string cell = trim(cells[i]);
            if (cell.empty()) {
                missing = true;
                values.push_back(0.0);
                continue;
            }
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) throw std::invalid_argument(cell);
                if (!std::isfinite(v)) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric value '" +
                                 cell + "'");
            }
        }
        if (missing) {
            // samples with missing genomics are excluded, not imputed
            table.excluded_ids.push_back(row.sample_id);
            continue;
        }
        row.apoe.assign(values.begin(), values.begin() + 1);
        row.psen1.assign(values.begin() + 1, values.begin() + 5);
        row.psen2.assign(values.begin() + 5, values.begin() + 9);
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw EmptyDatasetError(path + ": no usable rows (" +
                                std::to_string(table.excluded_ids.size()) + " excluded)");
    }
    return table;
}

namespace {

std::array<double, 9> row_values(const GeneRow& r) {
    return {r.apoe[0],  r.psen1[0], r.psen1[1], r.psen1[2], r.psen1[3],
            r.psen2[0], r.psen2[1], r.psen2[2], r.psen2[3]};
}

void set_row_values(GeneRow& r, const std::array<double, 9>& v) {
    r.apoe = {v[0]};
    r.psen1 = {v[1], v[2], v[3], v[4]};
    r.psen2 = {v[5], v[6], v[7], v[8]};
}

} // namespace

GeneNormStats fit_min_max(const GeneExpressionTable& table,
                          const std::vector<std::string>& train_ids) {
    std::unordered_set<std::string> train(train_ids.begin(), train_ids.end());
    GeneNormStats stats;
    bool first = true;
    for (const auto& row : table.rows) {
        if (!train.count(row.sample_id)) continue;
        auto v = row_values(row);
        if (first) {
            stats.min = v;
            stats.max = v;
            first = false;
            continue;
        }
        for (std::size_t i = 0; i < 9; ++i) {
            stats.min[i] = std::min(stats.min[i], v[i]);
            stats.max[i] = std::max(stats.max[i], v[i]);
        }
    }
    if (first) throw ContractError("fit_min_max: no train rows matched the gene table");
    return stats;
}

GeneExpressionTable apply_min_max(const GeneExpressionTable& table, const GeneNormStats& stats) {
    GeneExpressionTable out = table;
    for (auto& row : out.rows) {
        auto v = row_values(row);
        for (std::size_t i = 0; i < 9; ++i) {
            double range = stats.max[i] - stats.min[i];
            v[i] = range > 0.0 ? (v[i] - stats.min[i]) / range : 0.0;
        }
        set_row_values(row, v);
    }
    return out;
}

SubgraphBuildResult build_subgraphs(const GeneExpressionTable& genes, const FeatureMatrix& images,
                                    const std::vector<std::string>& gene_subset) {
    auto subset = resolve_gene_subset(gene_subset);
    std::unordered_map<std::string, const FeatureRow*> by_id;
    for (const auto& r : images.rows) by_id[r.sample_id] = &r;

    SubgraphBuildResult result;
    std::unordered_set<std::string> matched;
    for (const auto& row : genes.rows) {
        auto it = by_id.find(row.sample_id);
        if (it == by_id.end()) {
            result.skipped_ids.push_back(row.sample_id);
            continue;
        }
        matched.insert(row.sample_id);
        BipartiteSubgraph sg;
        sg.sample_id = row.sample_id;
        sg.label = row.label;
        for (const auto& spec : subset) {
            const auto& values = row.gene(spec.name);
            sg.genes.push_back({spec.name, Tensor::from_data({spec.dim}, values)});
        }
        sg.image = Tensor::from_data({it->second->values.size()}, it->second->values);
        result.subgraphs.push_back(std::move(sg));
    }
    for (const auto& r : images.rows) {
        if (!matched.count(r.sample_id)) result.skipped_ids.push_back(r.sample_id);
    }
    if (result.subgraphs.empty()) {
        throw EmptyDatasetError("build_subgraphs: no sample ids matched between tables");
    }
    std::sort(result.subgraphs.begin(), result.subgraphs.end(),
              [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    std::sort(result.skipped_ids.begin(), result.skipped_ids.end());
    return result;
}

// --- tasks ---------------------------------------------------------------------

Task Task::from_name(const std::string& name) {
    std::string u = upper(name);
    std::replace(u.begin(), u.end(), '-', '_');
    if (u == "AD_VS_CN") return {TaskKind::AdVsCn};
    if (u == "AD_VS_MCI") return {TaskKind::AdVsMci};
    if (u == "CN_VS_MCI") return {TaskKind::CnVsMci};
    if (u == "THREE_WAY" || u == "3_WAY" || u == "3WAY") return {TaskKind::ThreeWay};
    throw ConfigError("unknown task '" + name +
                      "' (expected ad_vs_cn, ad_vs_mci, cn_vs_mci or three_way)");
}

std::string Task::name() const {
    switch (kind) {
        case TaskKind::AdVsCn: return "ad_vs_cn";
        case TaskKind::AdVsMci: return "ad_vs_mci";
        case TaskKind::CnVsMci: return "cn_vs_mci";
        case TaskKind::ThreeWay: return "three_way";
    }
    return "?";
}

int Task::n_classes() const { return kind == TaskKind::ThreeWay ? 3 : 2; }

bool Task::includes(Cls c) const {
    switch (kind) {
        case TaskKind::AdVsCn: return c == Cls::AD || c == Cls::CN;
        case TaskKind::AdVsMci: return c == Cls::AD || c == Cls::MCI;
        case TaskKind::CnVsMci: return c == Cls::CN || c == Cls::MCI;
        case TaskKind::ThreeWay: return true;
    }
    return false;
}

int Task::target_of(Cls c) const {
    if (!includes(c)) {
        throw ContractError("class " + cls_name(c) + " is not part of task " + name());
    }
    switch (kind) {
        case TaskKind::AdVsCn: return c == Cls::AD ? 1 : 0;
        case TaskKind::AdVsMci: return c == Cls::AD ? 1 : 0;
        case TaskKind::CnVsMci: return c == Cls::MCI ? 1 : 0;
        case TaskKind::ThreeWay: return static_cast<int>(c);
    }
    return 0;
}

int Task::positive_class() const {
    return kind == TaskKind::ThreeWay ? static_cast<int>(Cls::AD) : 1;
}

std::string Task::class_name(int target) const {
    switch (kind) {
        case TaskKind::AdVsCn: return target == 1 ? "AD" : "CN";
        case TaskKind::AdVsMci: return target == 1 ? "AD" : "MCI";
        case TaskKind::CnVsMci: return target == 1 ? "MCI" : "CN";
        case TaskKind::ThreeWay: return cls_name(static_cast<Cls>(target));
    }
    return "?";
}

// --- splitting -------------------------------------------------------------------

bool DatasetPartition::is_train(const std::string& id) const {
    return std::find(train_ids.begin(), train_ids.end(), id) != train_ids.end();
}

bool DatasetPartition::is_test(const std::string& id) const {
    return std::find(test_ids.begin(), test_ids.end(), id) != test_ids.end();
}

DatasetPartition split_ids(const std::vector<std::pair<std::string, Cls>>& items,
                           std::uint64_t seed, const Task& task, double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ContractError("split_ids: train fraction must lie in (0,1)");
    }
    // group by task class, input order independent
    std::map<int, std::vector<std::string>> by_class;
    for (const auto& [id, cls] : items) {
        if (!task.includes(cls)) continue;
        by_class[task.target_of(cls)].push_back(id);
    }
    std::size_t total = 0;
    for (auto& [cls, ids] : by_class) {
        if (ids.size() < 2) {
            throw ContractError("split_ids: class " + task.class_name(cls) + " has " +
                                std::to_string(ids.size()) + " samples, need at least 2");
        }
        std::sort(ids.begin(), ids.end());
        total += ids.size();
    }
    if (by_class.empty()) throw EmptyDatasetError("split_ids: no samples for task " + task.name());

    const double test_fraction = 1.0 - train_fraction;
    const auto test_total =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(total)));

    // floor per class, then hand out the remainder by largest fractional part
    // (ties toward lower class index) so per-class proportions stay within one
    std::vector<int> classes;
    std::vector<std::size_t> base;
    std::vector<double> frac;
    std::size_t assigned = 0;
    for (const auto& [cls, ids] : by_class) {
        double exact = test_fraction * static_cast<double>(ids.size());
        auto fl = static_cast<std::size_t>(std::floor(exact));
        classes.push_back(cls);
        base.push_back(fl);
        frac.push_back(exact - static_cast<double>(fl));
        assigned += fl;
    }
    std::vector<std::size_t> order(classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return classes[a] < classes[b];
    });
    for (std::size_t i = 0; i < order.size() && assigned < test_total; ++i) {
        base[order[i]] += 1;
        ++assigned;
    }

    DatasetPartition part;
    part.seed = seed;
    part.task = task;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        auto ids = by_class[classes[ci]];
        Prng rng = Prng(seed).derive("split").derive(static_cast<std::uint64_t>(classes[ci]));
        // Fisher-Yates over the sorted ids
        for (std::size_t i = ids.size(); i > 1; --i) {
            std::size_t j = rng.next_index(i);
            std::swap(ids[i - 1], ids[j]);
        }
        std::size_t n_test = std::min(base[ci], ids.size() - 1);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            (i < n_test ? part.test_ids : part.train_ids).push_back(ids[i]);
        }
    }
    std::sort(part.train_ids.begin(), part.train_ids.end());
    std::sort(part.test_ids.begin(), part.test_ids.end());
    return part;
}

DatasetPartition split_dataset(const std::vector<BipartiteSubgraph>& subgraphs,
                               std::uint64_t seed, const Task& task, double train_fraction) {
    std::vector<std::pair<std::string, Cls>> items;
    items.reserve(subgraphs.size());
    for (const auto& sg : subgraphs) items.emplace_back(sg.sample_id, sg.label);
    return split_ids(items, seed, task, train_fraction);
}

// --- synthetic data ------------------------------------------------------------------

SyntheticData generate_synthetic(std::size_t n, std::uint64_t seed, double signal,
                                 const std::vector<std::string>& carrier_genes) {
    if (n < 8 || n % 2 != 0) {
        throw ContractError("generate_synthetic: n must be even and >= 8, got " +
                            std::to_string(n));
    }
    auto carriers = resolve_gene_subset(carrier_genes);
    std::unordered_set<std::string> carrier_names;
    for (const auto& c : carriers) carrier_names.insert(c.name);

    Prng root(seed);
    // fixed planted directions: unit norm per gene, norm kSyntheticImageDirNorm
    // for the image block
    std::unordered_map<std::string, std::vector<double>> gene_dir;
    for (const auto& spec : gene_catalog()) {
        Prng rng = root.derive("dir").derive(spec.name);
        std::vector<double> dir(spec.dim);
        double norm = 0.0;
        for (auto& v : dir) {
            v = rng.next_normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dir) v /= norm;
        gene_dir[spec.name] = std::move(dir);
    }
    std::vector<double> image_dir(kSyntheticImageDim);
    {
        Prng rng = root.derive("dir").derive("image");
        double norm = 0.0;
        for (auto& v : image_dir) {
            v = rng.next_normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : image_dir) v *= kSyntheticImageDirNorm / norm;
    }
    // The image noise models what the block stands in for: autoencoder latent
    // rows, which concentrate near a low-dimensional manifold. A shared
    // single-factor loading with unit-magnitude signs keeps every element
    // marginally N(0,1) while giving the noise low intrinsic dimension.
    std::vector<double> factor_sign(kSyntheticImageDim);
    {
        Prng rng = root.derive("dir").derive("image_factors");
        for (auto& s : factor_sign) s = rng.next_normal() >= 0.0 ? 1.0 : -1.0;
    }

    SyntheticData data;
    for (std::size_t i = 0; i < n; ++i) {
        char id[24];
        std::snprintf(id, sizeof(id), "s%04zu", i);
        const Cls cls = i % 2 == 0 ? Cls::CN : Cls::AD;
        const double y = cls == Cls::AD ? 1.0 : 0.0;
        const double u = signal * (2.0 * y - 1.0);
        Prng rng = root.derive("sample").derive(i);

        GeneRow row;
        row.sample_id = id;
        row.label = cls;
        std::array<double, 9> values{};
        std::size_t offset = 0;
        for (const auto& spec : gene_catalog()) {
            for (std::size_t j = 0; j < spec.dim; ++j) {
                if (carrier_names.count(spec.name)) {
                    values[offset + j] =
                        u * gene_dir[spec.name][j] + kSyntheticCarrierNoise * rng.next_normal();
                } else {
                    values[offset + j] = rng.next_normal();
                }
            }
            offset += spec.dim;
        }
        set_row_values(row, values);
        data.genes.rows.push_back(std::move(row));

        FeatureRow img;
        img.sample_id = id;
        img.label = cls;
        img.values.resize(kSyntheticImageDim);
        const double factor = rng.next_normal();
        for (std::size_t j = 0; j < kSyntheticImageDim; ++j) {
            img.values[j] = u * image_dir[j] + factor_sign[j] * factor;
        }
        data.images.rows.push_back(std::move(img));
        data.truth.emplace_back(id, cls);
    }
    return data;
}

} // namespace bgrl
