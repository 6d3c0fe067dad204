#pragma once

#include <cstddef>
#include <vector>

namespace bgrl {

// Rows are truth, columns are prediction.
struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<long> counts; // row-major n_classes x n_classes

    long at(int truth, int pred) const;
    long& at(int truth, int pred);
    long total() const;
    long support(int cls) const; // row sum
};

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          int n_classes);

// Ratios with a zero denominator are reported as 0 and flagged undefined.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

struct MetricSet {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    int positive_class = 0;
    double macro_f1 = 0.0;    // unweighted mean of per-class F1
    double weighted_f1 = 0.0; // true-class-support weighted mean of per-class F1

    const ClassMetrics& positive() const { return per_class[positive_class]; }
};

MetricSet metrics(const ConfusionMatrix& cm, int positive_class);

} // namespace bgrl
