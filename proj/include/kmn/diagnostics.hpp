#ifndef KMN_DIAGNOSTICS_HPP
#define KMN_DIAGNOSTICS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "kmn/core.hpp"
#include "kmn/optim.hpp"

namespace kmn {

// Central-difference check of the analytic gradients over every coordinate
// of (W, b); returns the worst relative error.
double grad_check(const ClusterModel& model, const DataMatrix& data, double h);

// Evaluates the per-logit gradient of f(z_i) = sum_j I_ij z_ij against the
// bound 1 + 2 max|z|; grad_norm carries the parameter-space gradient norm.
LipschitzRecord lipschitz_monitor(const ClusterModel& model, const DataMatrix& data);

struct BruteForceResult {
    std::vector<int> labels;
    Centroids centroids;
    double inertia = 0.0;
};

// Global optimum of the hard clustering objective by exhaustive enumeration
// of assignments (up to relabeling). Refuses instances with k^n > 10^7.
BruteForceResult brute_force_kmeans(const DataMatrix& data, std::size_t k);

struct ConvergenceCheck {
    std::size_t T = 0;
    double lhs = 0.0;  // best loss within T steps minus the oracle loss
    double rhs = 0.0;  // (||W1 - W*||_F^2 + eps^2 sum eta_t^2) / (2 sum eta_t)
    bool holds = false;
};

struct Theorem2Report {
    std::vector<ConvergenceCheck> rows;  // one per step T = 1..T_max
    double epsilon = 0.0;                // max recorded gradient bound
    double l_star = 0.0;                 // loss at the oracle parameters
    double oracle_inertia = 0.0;
    bool all_hold = false;
};

// Convergence inequality audit for a full-batch fixed-step trace, with the
// target parameters taken from the brute-force optimum. Reported, not
// asserted: the inequality's derivation assumes more than the loss
// guarantees, so a violation is a finding rather than a bug.
Theorem2Report theorem2_check(const TrainTrace& trace, const DataMatrix& data,
                              std::size_t k, double eta);

// 1-D slice f(z) = z e^z / (e^z + e^0) sampled uniformly on [z_min, z_max],
// computed overflow-safe; emitted for plotting.
std::vector<std::pair<double, double>> boundedness_curve(double z_min, double z_max,
                                                         std::size_t samples);

}  // namespace kmn

#endif  // KMN_DIAGNOSTICS_HPP
