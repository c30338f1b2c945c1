#include "kmn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kmn {

namespace {

void check_labels(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("label vectors have different lengths: " +
                         std::to_string(y_true.size()) + " vs " +
                         std::to_string(y_pred.size()));
    if (y_true.empty()) throw DomainError("labels must be nonempty");
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] < 0 || y_pred[i] < 0)
            throw DomainError("labels must be nonnegative (sample " + std::to_string(i) + ")");
}

struct Marginals {
    std::vector<long long> a;  // true-class counts
    std::vector<long long> b;  // predicted-cluster counts
    long long n = 0;
};

Marginals marginals(const Confusion& m) {
    Marginals out;
    out.a.assign(m.size(), 0);
    out.b.assign(m.empty() ? 0 : m[0].size(), 0);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            out.a[i] += m[i][j];
            out.b[j] += m[i][j];
            out.n += m[i][j];
        }
    return out;
}

// Cell terms are sorted before summation so the result is bit-identical
// under transposition of the table and relabeling of either side (the
// declared exactness of the symmetry and permutation-invariance properties).
double sum_sorted(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

double entropy(const std::vector<long long>& counts, long long n) {
    std::vector<double> terms;
    terms.reserve(counts.size());
    for (long long c : counts)
        if (c > 0)
            terms.push_back(-(static_cast<double>(c) / n) *
                            std::log(static_cast<double>(c) / n));
    return sum_sorted(terms);
}

double mutual_information(const Confusion& m, const Marginals& mg) {
    std::vector<double> terms;
    terms.reserve(m.size() * (m.empty() ? 0 : m[0].size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            const long long nij = m[i][j];
            if (nij <= 0) continue;
            terms.push_back((static_cast<double>(nij) / mg.n) *
                            std::log(static_cast<double>(mg.n) * nij /
                                     (static_cast<double>(mg.a[i]) * mg.b[j])));
        }
    return sum_sorted(terms);
}

// Expected mutual information under the fixed-marginals permutation model,
// summing the hypergeometric distribution of each cell.
double expected_mutual_information(const Marginals& mg) {
    const long long n = mg.n;
    const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
    std::vector<double> terms;
    for (long long ai : mg.a) {
        if (ai == 0) continue;
        for (long long bj : mg.b) {
            if (bj == 0) continue;
            const long long lo = std::max<long long>(1, ai + bj - n);
            const long long hi = std::min(ai, bj);
            // grouped so that swapping ai and bj yields the same bits
            const double marg = (std::lgamma(static_cast<double>(ai) + 1.0) +
                                 std::lgamma(static_cast<double>(bj) + 1.0)) +
                                (std::lgamma(static_cast<double>(n - ai) + 1.0) +
                                 std::lgamma(static_cast<double>(n - bj) + 1.0));
            for (long long nij = lo; nij <= hi; ++nij) {
                const double log_p =
                    marg - log_n_fact - std::lgamma(static_cast<double>(nij) + 1.0) -
                    (std::lgamma(static_cast<double>(ai - nij) + 1.0) +
                     std::lgamma(static_cast<double>(bj - nij) + 1.0)) -
                    std::lgamma(static_cast<double>(n - ai - bj + nij) + 1.0);
                const double value =
                    (static_cast<double>(nij) / n) *
                    std::log(static_cast<double>(n) * nij /
                             (static_cast<double>(ai) * bj));
                terms.push_back(std::exp(log_p) * value);
            }
        }
    }
    return sum_sorted(terms);
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

long long comb2(long long c) { return c * (c - 1) / 2; }

std::size_t distinct_count(const std::vector<long long>& counts) {
    std::size_t k = 0;
    for (long long c : counts)
        if (c > 0) ++k;
    return k;
}

}  // namespace

Confusion confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    check_labels(y_true, y_pred);
    int max_t = 0, max_p = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        max_t = std::max(max_t, y_true[i]);
        max_p = std::max(max_p, y_pred[i]);
    }
    Confusion m(static_cast<std::size_t>(max_t) + 1,
                std::vector<long long>(static_cast<std::size_t>(max_p) + 1, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) ++m[y_true[i]][y_pred[i]];
    return m;
}

long long max_assignment_total(const Confusion& counts) {
    const std::size_t rows = counts.size();
    const std::size_t cols = counts.empty() ? 0 : counts[0].size();
    const std::size_t m = std::max(rows, cols);
    const long long inf = std::numeric_limits<long long>::max() / 4;
    // Jonker-style assignment with row/column potentials on the padded
    // square matrix, minimizing negated counts.
    auto cost = [&](std::size_t i, std::size_t j) -> long long {
        return (i < rows && j < cols) ? -counts[i][j] : 0;
    };
    std::vector<long long> u(m + 1, 0), v(m + 1, 0), minv(m + 1);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            long long delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    long long total = 0;
    for (std::size_t j = 1; j <= m; ++j) {
        const std::size_t i = match[j];
        if (i >= 1 && i - 1 < rows && j - 1 < cols) total += counts[i - 1][j - 1];
    }
    return total;
}

double accuracy_hungarian(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    const Confusion m = confusion(y_true, y_pred);
    return static_cast<double>(max_assignment_total(m)) /
           static_cast<double>(y_true.size());
}

double purity(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    const Confusion m = confusion(y_true, y_pred);
    long long total = 0;
    const std::size_t cols = m.empty() ? 0 : m[0].size();
    for (std::size_t j = 0; j < cols; ++j) {
        long long best = 0;
        for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, m[i][j]);
        total += best;
    }
    return static_cast<double>(total) / static_cast<double>(y_true.size());
}

ClusteringReport clustering_report(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
    ClusteringReport rep;
    rep.confusion = confusion(y_true, y_pred);
    const Marginals mg = marginals(rep.confusion);
    const long long n = mg.n;

    rep.accuracy = static_cast<double>(max_assignment_total(rep.confusion)) /
                   static_cast<double>(n);

    const double h_true = entropy(mg.a, n);
    const double h_pred = entropy(mg.b, n);
    const double mi = mutual_information(rep.confusion, mg);

    // Conditional entropies for homogeneity/completeness.
    std::vector<double> terms_tp, terms_pt;
    for (std::size_t i = 0; i < rep.confusion.size(); ++i)
        for (std::size_t j = 0; j < rep.confusion[i].size(); ++j) {
            const long long nij = rep.confusion[i][j];
            if (nij <= 0) continue;
            terms_tp.push_back(-(static_cast<double>(nij) / n) *
                               std::log(static_cast<double>(nij) / mg.b[j]));
            terms_pt.push_back(-(static_cast<double>(nij) / n) *
                               std::log(static_cast<double>(nij) / mg.a[i]));
        }
    const double h_true_given_pred = sum_sorted(terms_tp);
    const double h_pred_given_true = sum_sorted(terms_pt);
    rep.homogeneity = h_true == 0.0 ? 1.0 : clamp01(1.0 - h_true_given_pred / h_true);
    rep.completeness = h_pred == 0.0 ? 1.0 : clamp01(1.0 - h_pred_given_true / h_pred);
    rep.v_measure = (rep.homogeneity + rep.completeness) == 0.0
                        ? 0.0
                        : 2.0 * rep.homogeneity * rep.completeness /
                              (rep.homogeneity + rep.completeness);

    // NMI, arithmetic-mean normalization; two trivial partitions agree fully.
    if (h_true == 0.0 && h_pred == 0.0) {
        rep.nmi = 1.0;
    } else {
        rep.nmi = clamp01(mi / (0.5 * (h_true + h_pred)));
    }

    // ARI via the adjusted pair-counting index.
    if (n < 2) {
        rep.ari = 1.0;
    } else {
        long long index = 0, sum_a = 0, sum_b = 0;
        for (std::size_t i = 0; i < rep.confusion.size(); ++i)
            for (long long nij : rep.confusion[i]) index += comb2(nij);
        for (long long ai : mg.a) sum_a += comb2(ai);
        for (long long bj : mg.b) sum_b += comb2(bj);
        const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) /
                                static_cast<double>(comb2(n));
        const double max_index = 0.5 * (static_cast<double>(sum_a) + sum_b);
        if (max_index == expected)
            rep.ari = (static_cast<double>(index) == expected) ? 1.0 : 0.0;
        else
            rep.ari = (static_cast<double>(index) - expected) / (max_index - expected);
    }

    // AMI with the permutation-model expected MI.
    if (distinct_count(mg.a) == 1 && distinct_count(mg.b) == 1) {
        rep.ami = 1.0;
    } else {
        const double emi = expected_mutual_information(mg);
        const double normalizer = 0.5 * (h_true + h_pred);
        double denom = normalizer - emi;
        // Keep the denominator away from zero with the sign preserved.
        const double eps = std::numeric_limits<double>::epsilon();
        denom = denom < 0.0 ? std::min(denom, -eps) : std::max(denom, eps);
        rep.ami = (mi - emi) / denom;
    }
    return rep;
}

}  // namespace kmn
