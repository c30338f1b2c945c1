#include "kmn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kmn/baseline.hpp"

namespace kmn {

double grad_check(const ClusterModel& model, const DataMatrix& data, double h) {
    if (!(h > 0.0)) throw DomainError("grad_check requires h > 0");
    const Gradients analytic = gradients(model, data);
    ClusterModel probe = model;
    double worst = 0.0;

    auto check_coord = [&](double& coord, double analytic_value) {
        const double saved = coord;
        coord = saved + h;
        const double plus = loss(probe, data).total;
        coord = saved - h;
        const double minus = loss(probe, data).total;
        coord = saved;
        const double numeric = (plus - minus) / (2.0 * h);
        const double denom =
            std::max({std::abs(analytic_value), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(analytic_value - numeric) / denom);
    };

    for (std::size_t j = 0; j < model.k(); ++j) {
        for (std::size_t t = 0; t < model.dim(); ++t)
            check_coord(probe.W(j, t), analytic.dW(j, t));
        check_coord(probe.b[j], analytic.db[j]);
    }
    return worst;
}

LipschitzRecord lipschitz_monitor(const ClusterModel& model, const DataMatrix& data) {
    const EpochEval ev = evaluate_epoch(model, data);
    return {0, ev.grad_norm, ev.z_max, 1.0 + 2.0 * ev.z_max, ev.f_grad_max};
}

namespace {

// Depth-first enumeration over canonical assignments (first point in block 0,
// each new block index introduced in order), therefore each set partition is
// visited once. Cluster sums are maintained incrementally; the objective
// value is total_sq - sum_j ||s_j||^2 / n_j.
struct BruteForce {
    const DataMatrix& data;
    std::size_t k;
    std::size_t n, d;
    std::vector<int> labels, best_labels;
    std::vector<double> sums;        // k x d running block sums
    std::vector<std::size_t> counts;
    double reduction = 0.0;          // sum_j ||s_j||^2 / n_j
    double best_reduction = -1.0;

    explicit BruteForce(const DataMatrix& data_, std::size_t k_)
        : data(data_), k(k_), n(data_.rows()), d(data_.cols()),
          labels(n, -1), sums(k_ * d, 0.0), counts(k_, 0) {}

    void place(std::size_t i, std::size_t blocks_used) {
        if (i == n) {
            if (blocks_used == k && reduction > best_reduction) {
                best_reduction = reduction;
                best_labels = labels;
            }
            return;
        }
        if (blocks_used + (n - i) < k) return;  // cannot reach k blocks
        const double* x = data.row(i);
        const std::size_t limit = std::min(blocks_used + 1, k);
        for (std::size_t j = 0; j < limit; ++j) {
            double* s = sums.data() + j * d;
            const double old_sq = squared_norm(s, d);
            const double old_term = counts[j] ? old_sq / static_cast<double>(counts[j]) : 0.0;
            for (std::size_t t = 0; t < d; ++t) s[t] += x[t];
            ++counts[j];
            const double new_term = squared_norm(s, d) / static_cast<double>(counts[j]);
            reduction += new_term - old_term;
            labels[i] = static_cast<int>(j);

            place(i + 1, j == blocks_used ? blocks_used + 1 : blocks_used);

            reduction -= new_term - old_term;
            --counts[j];
            for (std::size_t t = 0; t < d; ++t) s[t] -= x[t];
        }
        labels[i] = -1;
    }
};

}  // namespace

BruteForceResult brute_force_kmeans(const DataMatrix& data, std::size_t k) {
    const std::size_t n = data.rows(), d = data.cols();
    if (k < 1) throw DomainError("brute_force_kmeans requires k >= 1");
    if (k > n) throw DomainError("brute_force_kmeans requires k <= n");
    double combos = 1.0;
    for (std::size_t i = 0; i < n && combos <= 1e7; ++i) combos *= static_cast<double>(k);
    if (combos > 1e7)
        throw CapacityError("instance too large for exhaustive search: k^n = " +
                            std::to_string(k) + "^" + std::to_string(n) + " > 1e7");

    BruteForce bf(data, k);
    bf.place(0, 0);

    BruteForceResult res;
    res.labels = bf.best_labels;
    res.centroids = Centroids(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = static_cast<std::size_t>(res.labels[i]);
        ++counts[j];
        for (std::size_t t = 0; t < d; ++t) res.centroids(j, t) += data.row(i)[t];
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t t = 0; t < d; ++t)
            res.centroids(j, t) /= static_cast<double>(counts[j]);
    res.inertia = inertia(data, res.labels, res.centroids);
    return res;
}

Theorem2Report theorem2_check(const TrainTrace& trace, const DataMatrix& data,
                              std::size_t k, double eta) {
    if (trace.opt_kind != OptKind::sgd_fixed_step || !trace.full_batch)
        throw DomainError("theorem2_check needs a full-batch fixed-step trace");
    if (trace.lipschitz.empty())
        throw DomainError("theorem2_check needs a trace recorded with record_lipschitz");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");

    Theorem2Report rep;
    for (const LipschitzRecord& r : trace.lipschitz)
        rep.epsilon = std::max(rep.epsilon, r.bound);

    const BruteForceResult oracle = brute_force_kmeans(data, k);
    rep.oracle_inertia = oracle.inertia;
    const ClusterModel target = centroids_to_params(oracle.centroids, trace.alpha);
    rep.l_star = loss(target, data).total;

    const ClusterModel& w1 = trace.initial_model;
    if (w1.k() != k || w1.dim() != data.cols())
        throw ShapeError("trace initial model does not match data/k");
    double dist_sq = 0.0;
    for (std::size_t t = 0; t < w1.W.size(); ++t) {
        const double diff = w1.W.data()[t] - target.W.data()[t];
        dist_sq += diff * diff;
    }
    for (std::size_t j = 0; j < k; ++j) {
        const double diff = w1.b[j] - target.b[j];
        dist_sq += diff * diff;
    }

    rep.all_hold = true;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t steps = trace.epochs_run;
    for (std::size_t T = 1; T <= steps; ++T) {
        // loss_per_epoch[T-1] is the loss at W_T, before the T-th update.
        best = std::min(best, trace.loss_per_epoch[T - 1]);
        ConvergenceCheck row;
        row.T = T;
        row.lhs = best - rep.l_star;
        row.rhs = (dist_sq + rep.epsilon * rep.epsilon * static_cast<double>(T) * eta * eta) /
                  (2.0 * static_cast<double>(T) * eta);
        row.holds = row.lhs <= row.rhs;
        rep.all_hold = rep.all_hold && row.holds;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<std::pair<double, double>> boundedness_curve(double z_min, double z_max,
                                                         std::size_t samples) {
    if (!(z_min < z_max)) throw DomainError("curve requires z_min < z_max");
    if (samples < 2) throw DomainError("curve requires at least 2 samples");
    std::vector<std::pair<double, double>> out;
    out.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double z = z_min + (z_max - z_min) * static_cast<double>(i) /
                                     static_cast<double>(samples - 1);
        // z * sigmoid(z), written to avoid exp overflow on either side.
        const double f = z >= 0.0 ? z / (1.0 + std::exp(-z))
                                  : z * std::exp(z) / (std::exp(z) + 1.0);
        out.emplace_back(z, f);
    }
    return out;
}

}  // namespace kmn
