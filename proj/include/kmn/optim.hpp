#ifndef KMN_OPTIM_HPP
#define KMN_OPTIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "kmn/core.hpp"
#include "kmn/init.hpp"
#include "kmn/metrics.hpp"

namespace kmn {

enum class OptKind {
    sgd_fixed_step,
    sgd_fixed_length,
    adadelta,
    adagrad,
    adam,
    rmsprop,
};

struct OptimizerConfig {
    OptKind kind = OptKind::sgd_fixed_step;
    double eta = 0.01;      // step size (fixed-step), step length (fixed-length),
                            // or learning-rate multiplier for the adaptive kinds
    double rho = 0.95;      // adadelta / rmsprop decay
    double beta1 = 0.9;     // adam first-moment decay
    double beta2 = 0.999;   // adam second-moment decay
    double epsilon = 1e-8;

    // Published defaults per kind (adadelta's update is self-scaling, eta 1).
    static OptimizerConfig defaults(OptKind kind);
};

// Per-parameter moment accumulators; acc1 holds adam's first moment or
// adadelta's squared-update average, acc2 the squared-gradient average.
struct OptimizerState {
    Matrix acc1_W, acc2_W;
    std::vector<double> acc1_b, acc2_b;
    std::size_t step_count = 0;
    std::size_t skipped_steps = 0;  // fixed-length steps skipped on zero gradient
};

// One decoupled update of (W, b) in place. W and b only ever see their own
// gradients; sgd_fixed_length normalizes by the norm over both combined.
void optimizer_step(OptimizerState& state, ClusterModel& model, const Gradients& grads,
                    const OptimizerConfig& config);

struct TrainConfig {
    double alpha = 1e-3;
    std::size_t max_epochs = 3000;
    double tol = 1e-3;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    bool project = true;    // keep ||W_j|| <= 2 alpha max||x|| and b in [-alpha max||x||^2, 0]
    bool tie_bias = false;  // recompute b_j = -||W_j||^2 / (4 alpha) after each step
    std::size_t eval_every = 0;  // snapshot cadence; 0 disables
    bool record_lipschitz = false;
    int threads = 1;
};

struct LipschitzRecord {
    std::size_t step = 0;
    double grad_norm = 0.0;   // ||grad L|| over concatenated (W, b)
    double z_max = 0.0;       // max_ij |z_ij|
    double bound = 0.0;       // 1 + 2 z_max
    double f_grad_max = 0.0;  // observed max |d f / d z_ij|, f = sum_j I_ij z_ij
};

struct MetricSnapshot {
    std::size_t epoch = 0;
    ClusteringReport report;
};

struct TrainTrace {
    // Index t holds the full-dataset value after t epochs; index 0 is the
    // freshly initialized model.
    std::vector<double> loss_per_epoch;
    std::vector<double> grad_norm_per_epoch;
    double best_loss = 0.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    bool converged = false;
    std::size_t skipped_steps = 0;

    double alpha = 0.0;
    OptKind opt_kind = OptKind::sgd_fixed_step;
    bool full_batch = false;
    ClusterModel initial_model;

    std::vector<LipschitzRecord> lipschitz;  // when record_lipschitz is on
    std::vector<MetricSnapshot> snapshots;   // when eval_every > 0 and labels given
};

struct TrainResult {
    ClusterModel model;
    TrainTrace trace;
};

// Initializes centers, maps them to (W, b), then runs shuffled mini-batch
// epochs until the relative change of the full-dataset loss drops below tol
// or max_epochs is reached.
TrainResult train(const DataMatrix& data, std::size_t k, const InitMethod& init,
                  const OptimizerConfig& opt, const TrainConfig& cfg,
                  const std::vector<int>* eval_labels = nullptr);

std::vector<int> predict(const ClusterModel& model, const DataMatrix& data);

const char* opt_kind_name(OptKind kind);

}  // namespace kmn

#endif  // KMN_OPTIM_HPP
