#ifndef KMN_CORE_HPP
#define KMN_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kmn/common.hpp"

namespace kmn {

using Centroids = Matrix;  // k x d, one center per row

// Immutable n x d sample matrix with cached row norms.
class DataMatrix {
public:
    DataMatrix() = default;
    explicit DataMatrix(Matrix values, bool normalized = false);

    std::size_t rows() const { return values_.rows(); }
    std::size_t cols() const { return values_.cols(); }
    const Matrix& values() const { return values_; }
    const double* row(std::size_t i) const { return values_.row(i); }

    double row_squared_norm(std::size_t i) const { return row_sqnorm_[i]; }
    double max_row_norm() const { return max_row_norm_; }
    bool normalized() const { return normalized_; }

    // beta_i = alpha * ||x_i||^2, the sample-dependent constant of the loss.
    double beta(std::size_t i, double alpha) const { return alpha * row_sqnorm_[i]; }

private:
    Matrix values_;
    std::vector<double> row_sqnorm_;
    double max_row_norm_ = 0.0;
    bool normalized_ = false;
};

// Cluster hyperplane: row j of W scores cluster j, b its offset, alpha the
// softmax sharpness. W and b train independently; centers are W / (2 alpha).
struct ClusterModel {
    Matrix W;               // k x d
    std::vector<double> b;  // k
    double alpha = 1.0;

    std::size_t k() const { return W.rows(); }
    std::size_t dim() const { return W.cols(); }
};

// Row-stochastic n x k membership probabilities.
struct SoftAssignment {
    Matrix probs;
};

struct LossBreakdown {
    double total = 0.0;
    std::vector<double> per_sample;  // n
    Matrix logits;                   // n x k, z_ij = W_j . x_i + b_j
    Matrix costs;                    // n x k, c_ij = (beta_i - z_ij) / alpha
};

struct Gradients {
    Matrix dW;               // k x d
    std::vector<double> db;  // k
};

Matrix logits(const ClusterModel& model, const DataMatrix& data);
SoftAssignment soft_assign(const Matrix& z);
std::vector<int> hard_assign(const SoftAssignment& assignment);

LossBreakdown loss(const ClusterModel& model, const DataMatrix& data);

// Analytic gradients of the loss in (W, b). With c_ij = (beta_i - z_ij)/alpha
// and l_i = sum_j I_ij c_ij, the per-logit derivative is
// I_ij (c_ij - l_i - 1/alpha); dW_j and db_j accumulate it over samples.
Gradients gradients(const ClusterModel& model, const DataMatrix& data,
                    int threads = 1);
Gradients gradients(const ClusterModel& model, const DataMatrix& data,
                    const std::vector<std::size_t>& sample_indices,
                    int threads = 1);

ClusterModel centroids_to_params(const Centroids& omega, double alpha);
Centroids recover_centers(const ClusterModel& model);

// One full pass shared by the epoch loop and the diagnostics: loss total,
// parameter-gradient norm, and the logit-space quantities for the gradient
// bound monitor.
struct EpochEval {
    double loss_total = 0.0;
    double grad_norm = 0.0;    // Frobenius norm over concatenated (dW, db)
    double z_max = 0.0;        // max_ij |z_ij|
    double f_grad_max = 0.0;   // max_ij |d/dz_ij of sum_j I_ij z_ij|
};
EpochEval evaluate_epoch(const ClusterModel& model, const DataMatrix& data,
                         int threads = 1);

}  // namespace kmn

#endif  // KMN_CORE_HPP
