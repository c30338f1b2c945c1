#include "kmn/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace kmn {

namespace {

// Work is split into fixed-size chunks and partial results are merged in
// chunk order, so results are bit-identical for any thread count.
constexpr std::size_t kChunk = 1024;

template <typename Fn>
void run_chunks(std::size_t n, int threads, Fn&& fn) {
    const std::size_t nchunks = n == 0 ? 0 : (n + kChunk - 1) / kChunk;
    if (threads <= 1 || nchunks <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
        }
    };
    std::vector<std::thread> pool;
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), nchunks);
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

void check_dims(const ClusterModel& model, const DataMatrix& data) {
    if (model.dim() != data.cols())
        throw ShapeError("model dimension " + std::to_string(model.dim()) +
                         " does not match data dimension " + std::to_string(data.cols()));
    if (model.b.size() != model.k())
        throw ShapeError("bias length does not match cluster count");
}

// Softmax of one logit row with max-shift; returns the shifted-exp sum.
double softmax_row(const double* z, std::size_t k, double* out) {
    double zmax = z[0];
    for (std::size_t j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        out[j] = std::exp(z[j] - zmax);
        sum += out[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < k; ++j) out[j] *= inv;
    return sum;
}

struct GradAccum {
    Matrix dW;
    std::vector<double> db;
};

}  // namespace

DataMatrix::DataMatrix(Matrix values, bool normalized)
    : values_(std::move(values)), normalized_(normalized) {
    const std::size_t n = values_.rows();
    const std::size_t d = values_.cols();
    if (n < 1 || d < 1) throw DomainError("DataMatrix requires n >= 1 and d >= 1");
    if (!values_.all_finite()) throw DomainError("DataMatrix entries must be finite");
    row_sqnorm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        row_sqnorm_[i] = squared_norm(values_.row(i), d);
        max_row_norm_ = std::max(max_row_norm_, row_sqnorm_[i]);
        if (normalized_ && row_sqnorm_[i] != 0.0 &&
            std::abs(std::sqrt(row_sqnorm_[i]) - 1.0) > 1e-12)
            throw DomainError("row " + std::to_string(i) +
                              " is not unit-norm but the matrix is flagged normalized");
    }
    max_row_norm_ = std::sqrt(max_row_norm_);
}

Matrix logits(const ClusterModel& model, const DataMatrix& data) {
    check_dims(model, data);
    const std::size_t n = data.rows(), k = model.k(), d = model.dim();
    Matrix z(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = data.row(i);
        double* zi = z.row(i);
        for (std::size_t j = 0; j < k; ++j) zi[j] = dot(model.W.row(j), x, d) + model.b[j];
    }
    return z;
}

SoftAssignment soft_assign(const Matrix& z) {
    if (!z.all_finite()) throw DomainError("soft_assign requires finite logits");
    const std::size_t n = z.rows(), k = z.cols();
    SoftAssignment a{Matrix(n, k)};
    for (std::size_t i = 0; i < n; ++i) softmax_row(z.row(i), k, a.probs.row(i));
    return a;
}

std::vector<int> hard_assign(const SoftAssignment& assignment) {
    const std::size_t n = assignment.probs.rows(), k = assignment.probs.cols();
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = assignment.probs.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (p[j] > p[best]) best = j;  // ties keep the lowest index
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

LossBreakdown loss(const ClusterModel& model, const DataMatrix& data) {
    check_dims(model, data);
    if (!(model.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    const std::size_t n = data.rows(), k = model.k();
    LossBreakdown out;
    out.logits = logits(model, data);
    out.costs = Matrix(n, k);
    out.per_sample.resize(n);
    const double inv_alpha = 1.0 / model.alpha;
    std::vector<double> probs(k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = out.logits.row(i);
        double* ci = out.costs.row(i);
        softmax_row(zi, k, probs.data());
        const double beta = data.beta(i, model.alpha);
        double li = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            ci[j] = (beta - zi[j]) * inv_alpha;
            li += probs[j] * ci[j];
        }
        out.per_sample[i] = li;
    }
    out.total = std::accumulate(out.per_sample.begin(), out.per_sample.end(), 0.0);
    return out;
}

namespace {

// Shared per-sample kernel: softmax, costs, and per-logit loss derivative
// g_j = I_ij (c_j - l_i - 1/alpha), accumulated into (dW, db).
// Returns the per-sample loss l_i.
double accumulate_sample(const ClusterModel& model, const DataMatrix& data,
                         std::size_t i, double* z, double* p, GradAccum& acc) {
    const std::size_t k = model.k(), d = model.dim();
    const double* x = data.row(i);
    for (std::size_t j = 0; j < k; ++j) z[j] = dot(model.W.row(j), x, d) + model.b[j];
    softmax_row(z, k, p);
    const double inv_alpha = 1.0 / model.alpha;
    const double beta = data.beta(i, model.alpha);
    double li = 0.0;
    for (std::size_t j = 0; j < k; ++j) li += p[j] * ((beta - z[j]) * inv_alpha);
    for (std::size_t j = 0; j < k; ++j) {
        const double cj = (beta - z[j]) * inv_alpha;
        const double g = p[j] * (cj - li - inv_alpha);
        acc.db[j] += g;
        double* dwj = acc.dW.row(j);
        for (std::size_t t = 0; t < d; ++t) dwj[t] += g * x[t];
    }
    return li;
}

Gradients gradients_impl(const ClusterModel& model, const DataMatrix& data,
                         const std::size_t* idx, std::size_t count, int threads) {
    const std::size_t k = model.k(), d = model.dim();
    const std::size_t nchunks = count == 0 ? 0 : (count + kChunk - 1) / kChunk;
    std::vector<GradAccum> partial(nchunks);
    run_chunks(count, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        GradAccum& acc = partial[c];
        acc.dW = Matrix(k, d);
        acc.db.assign(k, 0.0);
        std::vector<double> z(k), p(k);
        for (std::size_t t = lo; t < hi; ++t) {
            const std::size_t i = idx ? idx[t] : t;
            accumulate_sample(model, data, i, z.data(), p.data(), acc);
        }
    });
    Gradients g{Matrix(k, d), std::vector<double>(k, 0.0)};
    for (const GradAccum& acc : partial) {
        for (std::size_t t = 0; t < g.dW.size(); ++t) g.dW.data()[t] += acc.dW.data()[t];
        for (std::size_t j = 0; j < k; ++j) g.db[j] += acc.db[j];
    }
    return g;
}

}  // namespace

Gradients gradients(const ClusterModel& model, const DataMatrix& data, int threads) {
    check_dims(model, data);
    if (!(model.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    return gradients_impl(model, data, nullptr, data.rows(), threads);
}

Gradients gradients(const ClusterModel& model, const DataMatrix& data,
                    const std::vector<std::size_t>& sample_indices, int threads) {
    check_dims(model, data);
    if (!(model.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    return gradients_impl(model, data, sample_indices.data(), sample_indices.size(), threads);
}

ClusterModel centroids_to_params(const Centroids& omega, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    const std::size_t k = omega.rows(), d = omega.cols();
    ClusterModel model;
    model.alpha = alpha;
    model.W = Matrix(k, d);
    model.b.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double* oj = omega.row(j);
        double* wj = model.W.row(j);
        for (std::size_t t = 0; t < d; ++t) wj[t] = 2.0 * alpha * oj[t];
        model.b[j] = -alpha * squared_norm(oj, d);
    }
    return model;
}

Centroids recover_centers(const ClusterModel& model) {
    if (!(model.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    const std::size_t k = model.k(), d = model.dim();
    Centroids omega(k, d);
    const double scale = 1.0 / (2.0 * model.alpha);
    for (std::size_t t = 0; t < model.W.size(); ++t) omega.data()[t] = model.W.data()[t] * scale;
    return omega;
}

EpochEval evaluate_epoch(const ClusterModel& model, const DataMatrix& data, int threads) {
    check_dims(model, data);
    if (!(model.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    const std::size_t n = data.rows(), k = model.k(), d = model.dim();
    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    struct Partial {
        GradAccum grad;
        double loss = 0.0;
        double z_max = 0.0;
        double f_grad_max = 0.0;
    };
    std::vector<Partial> partial(nchunks);
    run_chunks(n, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        Partial& pr = partial[c];
        pr.grad.dW = Matrix(k, d);
        pr.grad.db.assign(k, 0.0);
        std::vector<double> z(k), p(k);
        for (std::size_t i = lo; i < hi; ++i) {
            pr.loss += accumulate_sample(model, data, i, z.data(), p.data(), pr.grad);
            // f = sum_j I_ij z_ij and its per-logit derivative p_j (1 + z_j - f)
            double f = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                f += p[j] * z[j];
                pr.z_max = std::max(pr.z_max, std::abs(z[j]));
            }
            for (std::size_t j = 0; j < k; ++j)
                pr.f_grad_max = std::max(pr.f_grad_max, std::abs(p[j] * (1.0 + z[j] - f)));
        }
    });
    EpochEval ev;
    Gradients g{Matrix(k, d), std::vector<double>(k, 0.0)};
    for (const Partial& pr : partial) {
        ev.loss_total += pr.loss;
        ev.z_max = std::max(ev.z_max, pr.z_max);
        ev.f_grad_max = std::max(ev.f_grad_max, pr.f_grad_max);
        for (std::size_t t = 0; t < g.dW.size(); ++t) g.dW.data()[t] += pr.grad.dW.data()[t];
        for (std::size_t j = 0; j < k; ++j) g.db[j] += pr.grad.db[j];
    }
    double sq = 0.0;
    for (double v : g.dW.data()) sq += v * v;
    for (double v : g.db) sq += v * v;
    ev.grad_norm = std::sqrt(sq);
    return ev;
}

}  // namespace kmn
