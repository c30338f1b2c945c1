#include "kmn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kmn/rng.hpp"

namespace kmn {

OptimizerConfig OptimizerConfig::defaults(OptKind kind) {
    OptimizerConfig c;
    c.kind = kind;
    switch (kind) {
        case OptKind::sgd_fixed_step:
        case OptKind::sgd_fixed_length:
            c.eta = 0.01;
            break;
        case OptKind::adadelta:
            c.eta = 1.0;
            c.rho = 0.95;
            c.epsilon = 1e-6;
            break;
        case OptKind::adagrad:
            c.eta = 0.01;
            c.epsilon = 1e-10;
            break;
        case OptKind::adam:
            c.eta = 0.001;
            c.beta1 = 0.9;
            c.beta2 = 0.999;
            c.epsilon = 1e-8;
            break;
        case OptKind::rmsprop:
            c.eta = 0.001;
            c.rho = 0.9;
            c.epsilon = 1e-8;
            break;
    }
    return c;
}

namespace {

void validate(const OptimizerConfig& c) {
    if (!(c.eta > 0.0)) throw DomainError("optimizer eta must satisfy eta > 0");
    if (c.rho < 0.0 || c.rho >= 1.0) throw DomainError("rho must lie in [0, 1)");
    if (c.beta1 < 0.0 || c.beta1 >= 1.0 || c.beta2 < 0.0 || c.beta2 >= 1.0)
        throw DomainError("adam betas must lie in [0, 1)");
    if (!(c.epsilon > 0.0)) throw DomainError("epsilon must be positive");
}

void ensure_state(OptimizerState& s, const ClusterModel& model) {
    const std::size_t k = model.k(), d = model.dim();
    if (s.acc1_W.rows() != k || s.acc1_W.cols() != d) {
        s.acc1_W = Matrix(k, d);
        s.acc2_W = Matrix(k, d);
        s.acc1_b.assign(k, 0.0);
        s.acc2_b.assign(k, 0.0);
        s.step_count = 0;
        s.skipped_steps = 0;
    }
}

// Applies one update rule coordinate-wise over a flat parameter span.
struct CoordUpdate {
    const OptimizerConfig& cfg;
    std::size_t t;  // 1-based step index, for adam bias correction

    void sgd_fixed(double* p, const double* g, std::size_t n, double step) const {
        for (std::size_t i = 0; i < n; ++i) p[i] -= step * g[i];
    }
    void adagrad(double* p, const double* g, double* v, std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] += g[i] * g[i];
            p[i] -= cfg.eta * g[i] / (std::sqrt(v[i]) + cfg.epsilon);
        }
    }
    void rmsprop(double* p, const double* g, double* v, std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = cfg.rho * v[i] + (1.0 - cfg.rho) * g[i] * g[i];
            p[i] -= cfg.eta * g[i] / (std::sqrt(v[i]) + cfg.epsilon);
        }
    }
    void adam(double* p, const double* g, double* m, double* v, std::size_t n) const {
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= cfg.eta * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
    void adadelta(double* p, const double* g, double* u, double* v, std::size_t n) const {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = cfg.rho * v[i] + (1.0 - cfg.rho) * g[i] * g[i];
            const double delta =
                -std::sqrt(u[i] + cfg.epsilon) / std::sqrt(v[i] + cfg.epsilon) * g[i];
            u[i] = cfg.rho * u[i] + (1.0 - cfg.rho) * delta * delta;
            p[i] += cfg.eta * delta;
        }
    }
};

}  // namespace

void optimizer_step(OptimizerState& state, ClusterModel& model, const Gradients& grads,
                    const OptimizerConfig& config) {
    validate(config);
    if (grads.dW.rows() != model.k() || grads.dW.cols() != model.dim() ||
        grads.db.size() != model.b.size())
        throw ShapeError("gradient shapes do not match model");
    ensure_state(state, model);

    const std::size_t nw = model.W.size(), nb = model.b.size();
    double* W = model.W.data().data();
    double* b = model.b.data();
    const double* gW = grads.dW.data().data();
    const double* gb = grads.db.data();

    if (config.kind == OptKind::sgd_fixed_length) {
        double sq = 0.0;
        for (std::size_t i = 0; i < nw; ++i) sq += gW[i] * gW[i];
        for (std::size_t i = 0; i < nb; ++i) sq += gb[i] * gb[i];
        if (sq == 0.0) {
            ++state.skipped_steps;
            return;
        }
        ++state.step_count;
        const double step = config.eta / std::sqrt(sq);
        CoordUpdate up{config, state.step_count};
        up.sgd_fixed(W, gW, nw, step);
        up.sgd_fixed(b, gb, nb, step);
        return;
    }

    ++state.step_count;
    CoordUpdate up{config, state.step_count};
    switch (config.kind) {
        case OptKind::sgd_fixed_step:
            up.sgd_fixed(W, gW, nw, config.eta);
            up.sgd_fixed(b, gb, nb, config.eta);
            break;
        case OptKind::adagrad:
            up.adagrad(W, gW, state.acc2_W.data().data(), nw);
            up.adagrad(b, gb, state.acc2_b.data(), nb);
            break;
        case OptKind::rmsprop:
            up.rmsprop(W, gW, state.acc2_W.data().data(), nw);
            up.rmsprop(b, gb, state.acc2_b.data(), nb);
            break;
        case OptKind::adam:
            up.adam(W, gW, state.acc1_W.data().data(), state.acc2_W.data().data(), nw);
            up.adam(b, gb, state.acc1_b.data(), state.acc2_b.data(), nb);
            break;
        case OptKind::adadelta:
            up.adadelta(W, gW, state.acc1_W.data().data(), state.acc2_W.data().data(), nw);
            up.adadelta(b, gb, state.acc1_b.data(), state.acc2_b.data(), nb);
            break;
        case OptKind::sgd_fixed_length:
            break;  // handled above
    }
}

namespace {

void project_model(ClusterModel& model, double max_x_norm, bool tie_bias) {
    const std::size_t k = model.k(), d = model.dim();
    const double radius = 2.0 * model.alpha * max_x_norm;
    for (std::size_t j = 0; j < k; ++j) {
        double* wj = model.W.row(j);
        const double norm = std::sqrt(squared_norm(wj, d));
        if (norm > radius && norm > 0.0) {
            const double scale = radius / norm;
            for (std::size_t t = 0; t < d; ++t) wj[t] *= scale;
        }
    }
    if (!tie_bias) {
        const double floor = -model.alpha * max_x_norm * max_x_norm;
        for (std::size_t j = 0; j < k; ++j)
            model.b[j] = std::clamp(model.b[j], floor, 0.0);
    }
}

void retie_bias(ClusterModel& model) {
    const std::size_t k = model.k(), d = model.dim();
    for (std::size_t j = 0; j < k; ++j)
        model.b[j] = -squared_norm(model.W.row(j), d) / (4.0 * model.alpha);
}

}  // namespace

TrainResult train(const DataMatrix& data, std::size_t k, const InitMethod& init,
                  const OptimizerConfig& opt, const TrainConfig& cfg,
                  const std::vector<int>* eval_labels) {
    if (k < 2) throw DomainError("train requires k >= 2 (the k = 1 loss is unbounded)");
    if (!(cfg.alpha > 0.0)) throw DomainError("alpha must satisfy alpha > 0");
    if (cfg.batch_size < 1) throw DomainError("batch_size must be >= 1");
    if (cfg.max_epochs < 1) throw DomainError("max_epochs must be >= 1");
    validate(opt);
    if (eval_labels && eval_labels->size() != data.rows())
        throw ShapeError("eval labels length does not match sample count");

    const std::size_t n = data.rows();
    const std::size_t batch = std::min(cfg.batch_size, n);

    TrainResult res;
    res.model = centroids_to_params(initialize(data, k, init), cfg.alpha);
    TrainTrace& trace = res.trace;
    trace.alpha = cfg.alpha;
    trace.opt_kind = opt.kind;
    trace.full_batch = batch >= n;
    trace.initial_model = res.model;

    const double max_x_norm = data.max_row_norm();
    if (cfg.project) project_model(res.model, max_x_norm, cfg.tie_bias);

    OptimizerState state;
    SplitMix64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    auto record = [&](std::size_t epoch) {
        const EpochEval ev = evaluate_epoch(res.model, data, cfg.threads);
        if (!std::isfinite(ev.loss_total))
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
        trace.loss_per_epoch.push_back(ev.loss_total);
        trace.grad_norm_per_epoch.push_back(ev.grad_norm);
        if (cfg.record_lipschitz)
            trace.lipschitz.push_back({epoch, ev.grad_norm, ev.z_max,
                                       1.0 + 2.0 * ev.z_max, ev.f_grad_max});
        return ev.loss_total;
    };

    double prev_loss = record(0);
    std::vector<std::size_t> batch_idx;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            batch_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
            const Gradients g = gradients(res.model, data, batch_idx, cfg.threads);
            optimizer_step(state, res.model, g, opt);
            if (cfg.project) project_model(res.model, max_x_norm, cfg.tie_bias);
            if (cfg.tie_bias) retie_bias(res.model);
        }
        const double cur = record(epoch);
        trace.epochs_run = epoch;

        if (eval_labels && cfg.eval_every > 0 && epoch % cfg.eval_every == 0)
            trace.snapshots.push_back(
                {epoch, clustering_report(*eval_labels, predict(res.model, data))});

        if (std::abs(cur - prev_loss) / std::max(std::abs(prev_loss), 1e-12) < cfg.tol) {
            trace.converged = true;
            break;
        }
        prev_loss = cur;
    }

    const auto best = std::min_element(trace.loss_per_epoch.begin(), trace.loss_per_epoch.end());
    trace.best_loss = *best;
    trace.best_epoch = static_cast<std::size_t>(best - trace.loss_per_epoch.begin());
    trace.skipped_steps = state.skipped_steps;
    return res;
}

std::vector<int> predict(const ClusterModel& model, const DataMatrix& data) {
    return hard_assign(soft_assign(logits(model, data)));
}

const char* opt_kind_name(OptKind kind) {
    switch (kind) {
        case OptKind::sgd_fixed_step: return "sgd";
        case OptKind::sgd_fixed_length: return "sgd-length";
        case OptKind::adadelta: return "adadelta";
        case OptKind::adagrad: return "adagrad";
        case OptKind::adam: return "adam";
        case OptKind::rmsprop: return "rmsprop";
    }
    return "?";
}

}  // namespace kmn
