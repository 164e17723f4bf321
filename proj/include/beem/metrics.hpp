#pragma once

// External clustering indices computed from the class x cluster contingency
// table. Labels may be arbitrary integers; only equality matters.

#include "beem/common.hpp"

#include <span>
#include <utility>
#include <vector>

namespace beem {

struct Contingency {
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> table;  // classes x clusters
    std::vector<long long> class_totals;
    std::vector<long long> cluster_totals;
    long long n = 0;
};

Contingency contingency(std::span<const int> true_labels, std::span<const int> pred_labels);

// Fraction of observations matched under the best one-to-one pairing of
// clusters with classes (Hungarian algorithm).
double purity_acc(const Contingency& c);

// Adjusted Rand index. A single class and a single cluster yields 1.
double ari(const Contingency& c);

// I(C; K) / sqrt(H(C) H(K)), natural logs. Both entropies zero yields 1;
// exactly one zero yields 0.
double nmi(const Contingency& c);

// 1 - H(C | K) / H(C); 1 when H(C) = 0.
double homogeneity(const Contingency& c);

struct RocCurve {
    std::vector<double> false_positive_rate;
    std::vector<double> true_positive_rate;
    double auroc = 0.0;
};

// Threshold sweep over the distinct scores (descending); tied scores move
// together, which makes the trapezoid area count ties as one half.
RocCurve roc_auroc(std::span<const double> scores, std::span<const int> binary_labels);

// Maximum-weight one-to-one assignment on a rows x cols weight matrix.
// Returns, for each row, the assigned column or -1.
std::vector<int> max_weight_matching(const Matrix& weights);

}  // namespace beem
