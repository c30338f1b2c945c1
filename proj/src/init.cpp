#include "kmn/init.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kmn/baseline.hpp"
#include "kmn/rng.hpp"

namespace kmn {

namespace {

void check_k(const DataMatrix& data, std::size_t k) {
    if (k < 2) throw DomainError("initialization requires k >= 2");
    if (k > data.rows())
        throw CapacityError("k = " + std::to_string(k) + " exceeds sample count " +
                            std::to_string(data.rows()));
}

}  // namespace

Centroids init_random(const DataMatrix& data, std::size_t k, std::uint64_t seed) {
    check_k(data, k);
    const std::size_t n = data.rows(), d = data.cols();
    SplitMix64 rng(seed);
    // Partial Fisher-Yates: the first k slots end up as a uniform sample
    // without replacement.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    Centroids centers(k, d);
    for (std::size_t j = 0; j < k; ++j)
        std::copy(data.row(idx[j]), data.row(idx[j]) + d, centers.row(j));
    return centers;
}

Centroids init_kmeanspp(const DataMatrix& data, std::size_t k, std::uint64_t seed) {
    check_k(data, k);
    const std::size_t n = data.rows(), d = data.cols();
    SplitMix64 rng(seed);
    Centroids centers(k, d);

    const std::size_t first = static_cast<std::size_t>(rng.below(n));
    std::copy(data.row(first), data.row(first) + d, centers.row(0));

    std::vector<double> dist_sq(n);
    for (std::size_t i = 0; i < n; ++i)
        dist_sq[i] = squared_distance(data.row(i), centers.row(0), d);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += dist_sq[i];
        if (total <= 0.0)
            throw DegeneracyError("k-means++ found fewer than k distinct rows (k = " +
                                  std::to_string(k) + ")");
        // Sample proportional to D^2 by inverse transform over the prefix sum.
        const double target = rng.uniform() * total;
        double run = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            run += dist_sq[i];
            if (run > target) {
                pick = i;
                break;
            }
        }
        // Guard against landing on a zero-mass slot through rounding.
        if (dist_sq[pick] == 0.0)
            pick = static_cast<std::size_t>(
                std::max_element(dist_sq.begin(), dist_sq.end()) - dist_sq.begin());
        std::copy(data.row(pick), data.row(pick) + d, centers.row(c));
        for (std::size_t i = 0; i < n; ++i)
            dist_sq[i] = std::min(dist_sq[i],
                                  squared_distance(data.row(i), centers.row(c), d));
    }
    return centers;
}

Centroids init_kmeans(const DataMatrix& data, std::size_t k, std::uint64_t seed,
                      std::size_t max_iter, double tol) {
    Centroids seeds = init_kmeanspp(data, k, seed);
    return lloyd(data, k, seeds, max_iter, tol).centroids;
}

Centroids initialize(const DataMatrix& data, std::size_t k, const InitMethod& method) {
    switch (method.kind) {
        case InitKind::random: return init_random(data, k, method.seed);
        case InitKind::kmeans_pp: return init_kmeanspp(data, k, method.seed);
        case InitKind::kmeans: return init_kmeans(data, k, method.seed);
    }
    throw DomainError("unknown initialization kind");
}

const char* init_kind_name(InitKind kind) {
    switch (kind) {
        case InitKind::random: return "random";
        case InitKind::kmeans_pp: return "kmeans++";
        case InitKind::kmeans: return "kmeans";
    }
    return "?";
}

}  // namespace kmn
