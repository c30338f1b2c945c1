#include "kmn/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kmn {

namespace {

int nearest_center(const double* x, const Centroids& centers, std::size_t d) {
    int best = 0;
    double best_d = squared_distance(x, centers.row(0), d);
    for (std::size_t j = 1; j < centers.rows(); ++j) {
        const double dist = squared_distance(x, centers.row(j), d);
        if (dist < best_d) {
            best_d = dist;
            best = static_cast<int>(j);
        }
    }
    return best;
}

}  // namespace

double inertia(const DataMatrix& data, const std::vector<int>& labels,
               const Centroids& centroids) {
    if (labels.size() != data.rows())
        throw ShapeError("labels length does not match sample count");
    const std::size_t d = data.cols();
    if (centroids.cols() != d) throw ShapeError("centroid dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int j = labels[i];
        if (j < 0 || static_cast<std::size_t>(j) >= centroids.rows())
            throw DomainError("label " + std::to_string(j) + " out of range at sample " +
                              std::to_string(i));
        total += squared_distance(data.row(i), centroids.row(j), d);
    }
    return total;
}

LloydResult lloyd(const DataMatrix& data, std::size_t k, const Centroids& init,
                  std::size_t max_iter, double tol) {
    const std::size_t n = data.rows(), d = data.cols();
    if (k < 2) throw DomainError("lloyd requires k >= 2");
    if (k > n) throw CapacityError("lloyd requires k <= n");
    if (init.rows() != k || init.cols() != d)
        throw ShapeError("initial centers must be k x d");

    LloydResult res;
    res.centroids = init;
    res.labels.assign(n, 0);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Assignment step.
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res.labels[i] = nearest_center(data.row(i), res.centroids, d);
            sse += squared_distance(data.row(i), res.centroids.row(res.labels[i]), d);
        }
        res.inertia_per_iter.push_back(sse);
        res.iterations = iter + 1;

        // Mean update.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = data.row(i);
            double* s = sums.data() + static_cast<std::size_t>(res.labels[i]) * d;
            for (std::size_t t = 0; t < d; ++t) s[t] += x[t];
            ++counts[res.labels[i]];
        }
        Centroids next = res.centroids;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            const double invc = 1.0 / static_cast<double>(counts[j]);
            double* cj = next.row(j);
            const double* s = sums.data() + j * d;
            for (std::size_t t = 0; t < d; ++t) cj[t] = s[t] * invc;
        }

        // Re-seed empty clusters to the farthest point from its own center.
        bool reseeded = false;
        std::vector<bool> taken(n, false);
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                const double dist =
                    squared_distance(data.row(i), next.row(res.labels[i]), d);
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            if (far < n) {
                const double* x = data.row(far);
                std::copy(x, x + d, next.row(j));
                res.labels[far] = static_cast<int>(j);
                taken[far] = true;
                reseeded = true;
            }
        }
        if (reseeded) res.reseed_iters.push_back(iter);

        double max_move_sq = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            max_move_sq = std::max(
                max_move_sq, squared_distance(next.row(j), res.centroids.row(j), d));
        res.centroids = next;
        if (!reseeded && std::sqrt(max_move_sq) < tol) break;
    }

    res.inertia = inertia(data, res.labels, res.centroids);
    return res;
}

}  // namespace kmn
