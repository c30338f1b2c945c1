#ifndef KMN_INIT_HPP
#define KMN_INIT_HPP

#include <cstdint>

#include "kmn/core.hpp"

namespace kmn {

enum class InitKind { random, kmeans_pp, kmeans };

struct InitMethod {
    InitKind kind = InitKind::kmeans_pp;
    std::uint64_t seed = 0;
};

// k data rows drawn uniformly without replacement.
Centroids init_random(const DataMatrix& data, std::size_t k, std::uint64_t seed);

// D^2 seeding: first center uniform, each further center sampled with
// probability proportional to squared distance to the nearest chosen one.
Centroids init_kmeanspp(const DataMatrix& data, std::size_t k, std::uint64_t seed);

// Lloyd refinement started from k-means++ seeds.
Centroids init_kmeans(const DataMatrix& data, std::size_t k, std::uint64_t seed,
                      std::size_t max_iter = 300, double tol = 1e-4);

Centroids initialize(const DataMatrix& data, std::size_t k, const InitMethod& method);

const char* init_kind_name(InitKind kind);

}  // namespace kmn

#endif  // KMN_INIT_HPP
