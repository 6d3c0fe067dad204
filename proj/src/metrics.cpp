#include "bgrl/metrics.hpp"

#include "bgrl/errors.hpp"

#include <string>

namespace bgrl {

long ConfusionMatrix::at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth) * n_classes + pred];
}

long& ConfusionMatrix::at(int truth, int pred) {
    return counts[static_cast<std::size_t>(truth) * n_classes + pred];
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (long c : counts) t += c;
    return t;
}

long ConfusionMatrix::support(int cls) const {
    long s = 0;
    for (int p = 0; p < n_classes; ++p) s += at(cls, p);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          int n_classes) {
    if (truth.size() != pred.size()) {
        throw ContractError("confusion: " + std::to_string(truth.size()) + " truth labels vs " +
                            std::to_string(pred.size()) + " predictions");
    }
    if (n_classes < 1) throw ContractError("confusion: n_classes must be >= 1");
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes) {
            throw ContractError("confusion: label out of range at index " + std::to_string(i));
        }
        ++cm.at(truth[i], pred[i]);
    }
    return cm;
}

MetricSet metrics(const ConfusionMatrix& cm, int positive_class) {
    if (cm.total() == 0) throw ContractError("metrics: empty confusion matrix");
    if (positive_class < 0 || positive_class >= cm.n_classes) {
        throw ContractError("metrics: positive class " + std::to_string(positive_class) +
                            " out of range");
    }
    MetricSet out;
    out.positive_class = positive_class;

    long trace = 0;
    for (int c = 0; c < cm.n_classes; ++c) trace += cm.at(c, c);
    out.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());

    double macro_sum = 0.0, weighted_sum = 0.0;
    for (int c = 0; c < cm.n_classes; ++c) {
        ClassMetrics m;
        long tp = cm.at(c, c);
        long fp = 0, fn = 0;
        for (int o = 0; o < cm.n_classes; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        m.support = cm.support(c);
        if (tp + fp > 0) {
            m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        } else {
            m.precision_defined = false;
        }
        if (tp + fn > 0) {
            m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            m.recall_defined = false;
        }
        if (m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.f1_defined = false;
        }
        macro_sum += m.f1;
        weighted_sum += m.f1 * static_cast<double>(m.support);
        out.per_class.push_back(m);
    }
    out.macro_f1 = macro_sum / static_cast<double>(cm.n_classes);
    out.weighted_f1 = weighted_sum / static_cast<double>(cm.total());
    return out;
}

} // namespace bgrl
