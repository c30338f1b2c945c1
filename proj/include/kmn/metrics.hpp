#ifndef KMN_METRICS_HPP
#define KMN_METRICS_HPP

#include <cstdint>
#include <vector>

#include "kmn/common.hpp"

namespace kmn {

using Confusion = std::vector<std::vector<long long>>;

// Seven external clustering metrics plus the contingency table they are
// computed from. accuracy, nmi, homogeneity, completeness and v_measure lie
// in [0,1]; ari and ami lie in [-1,1].
struct ClusteringReport {
    double accuracy = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    double ami = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v_measure = 0.0;
    Confusion confusion;
};

// Entry (a, b) counts samples with true class a and predicted cluster b.
Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Fraction matched under the best one-to-one cluster-to-class assignment,
// solved exactly on the contingency table (rectangular case padded).
double accuracy_hungarian(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Greedy purity: each cluster votes for its majority class. Never above the
// matched accuracy on square tables; exposed for comparison only.
double purity(const std::vector<int>& y_true, const std::vector<int>& y_pred);

ClusteringReport clustering_report(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred);

// Maximum-total assignment on a nonnegative count matrix; used by
// accuracy_hungarian and exposed for tests.
long long max_assignment_total(const Confusion& counts);

}  // namespace kmn

#endif  // KMN_METRICS_HPP
