#ifndef KMN_BASELINE_HPP
#define KMN_BASELINE_HPP

#include <vector>

#include "kmn/core.hpp"

namespace kmn {

struct LloydResult {
    std::vector<int> labels;
    Centroids centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;
    // Inertia after each assignment step, and the iterations (0-based) where
    // an empty cluster had to be re-seeded to the farthest point.
    std::vector<double> inertia_per_iter;
    std::vector<std::size_t> reseed_iters;
};

// Classic alternating assignment/mean update from the given initial centers.
// Stops when the largest center movement drops below tol or after max_iter.
// An empty cluster is re-seeded to the point farthest from its assigned
// center rather than being dropped.
LloydResult lloyd(const DataMatrix& data, std::size_t k, const Centroids& init,
                  std::size_t max_iter = 300, double tol = 1e-4);

// Sum of squared distances of each point to its assigned center.
double inertia(const DataMatrix& data, const std::vector<int>& labels,
               const Centroids& centroids);

}  // namespace kmn

#endif  // KMN_BASELINE_HPP
