// Acceptance suite: one self-contained check per criterion, each printing a
// single [PASS]/[FAIL]/[SKIP] line. The process exits nonzero if any
// non-optional criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <unistd.h>
#include <vector>

#include "kmn/baseline.hpp"
#include "kmn/core.hpp"
#include "kmn/data.hpp"
#include "kmn/diagnostics.hpp"
#include "kmn/init.hpp"
#include "kmn/metrics.hpp"
#include "kmn/optim.hpp"
#include "kmn/rng.hpp"
#include "oracles.hpp"

using namespace kmn;

namespace {

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

DataMatrix gaussian_data(SplitMix64& rng, std::size_t n, std::size_t d) {
    Matrix m(n, d);
    for (double& v : m.data()) v = rng.normal();
    return DataMatrix(std::move(m));
}

ClusterModel random_model(SplitMix64& rng, const DataMatrix& data, std::size_t k,
                          double alpha, double jitter) {
    Centroids omega(k, data.cols());
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = rng.below(data.rows());
        for (std::size_t t = 0; t < data.cols(); ++t)
            omega(j, t) = data.row(pick)[t] + 0.3 * rng.normal();
    }
    ClusterModel m = centroids_to_params(omega, alpha);
    for (double& v : m.W.data()) v += jitter * rng.normal();
    for (double& v : m.b) v += jitter * rng.normal();
    return m;
}

// --- 1. analytic gradients vs central differences ---------------------------
Outcome c1_gradients() {
    SplitMix64 rng(0xC1);
    const double alphas[] = {0.01, 0.1, 1.0};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.below(17);  // <= 20
        const std::size_t d = 1 + rng.below(8);   // <= 8
        const std::size_t k = 2 + rng.below(4);   // <= 5
        const DataMatrix data = gaussian_data(rng, n, d);
        const ClusterModel model =
            random_model(rng, data, k, alphas[rng.below(3)], 0.15);
        worst = std::max(worst, grad_check(model, data, 1e-5));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "max rel error %.3g (threshold 1e-5)", worst);
    return {worst < 1e-5, false, buf};
}

// --- 2. softmax contract -----------------------------------------------------
Outcome c2_softmax() {
    SplitMix64 rng(0xC2);
    double worst_sum = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = 2 + rng.below(9);
        Matrix z(1, k);
        const double scale = trial % 3 == 0 ? 1000.0 : (trial % 3 == 1 ? 10.0 : 1.0);
        for (double& v : z.data()) v = rng.uniform(-scale, scale);
        const SoftAssignment a = soft_assign(z);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double p = a.probs(0, j);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0)
                return {false, false, "non-finite or out-of-range probability"};
            sum += p;
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst |row sum - 1| = %.3g (threshold 1e-12)",
                  worst_sum);
    return {worst_sum <= 1e-12, false, buf};
}

// --- 3. tied-parameter fidelity ---------------------------------------------
Outcome c3_tied_params() {
    SplitMix64 rng(0xC3);
    double worst_cost = 0.0, worst_inertia_rel = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(3);
        const std::size_t d = 1 + rng.below(4);
        const std::size_t per = 8 + rng.below(8);

        // well-separated centers: squared gaps are >= 2.25, far above 0.5
        Centroids centers(k, d);
        for (std::size_t j = 0; j < k;) {
            for (std::size_t t = 0; t < d; ++t) centers(j, t) = rng.uniform(0.0, 4.0 * k);
            bool ok = true;
            for (std::size_t p = 0; p < j && ok; ++p)
                ok = squared_distance(centers.row(j), centers.row(p), d) >= 2.25;
            if (ok) ++j;
        }
        Matrix points(per * k, d);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < per; ++i)
                for (std::size_t t = 0; t < d; ++t)
                    points(j * per + i, t) = centers(j, t) + 0.1 * rng.normal();
        const DataMatrix data(std::move(points));

        // costs equal squared distances at any alpha
        const double alpha = std::exp(rng.uniform(std::log(0.01), std::log(10.0)));
        const LossBreakdown lb = loss(centroids_to_params(centers, alpha), data);
        for (std::size_t i = 0; i < data.rows(); ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double dist = squared_distance(data.row(i), centers.row(j), d);
                worst_cost = std::max(
                    worst_cost, std::abs(lb.costs(i, j) - dist) / std::max(1.0, dist));
            }

        // alpha = 100 matches the nearest-center inertia within 1%
        const double harsh = loss(centroids_to_params(centers, 100.0), data).total;
        double nearest = 0.0;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            double best = squared_distance(data.row(i), centers.row(0), d);
            for (std::size_t j = 1; j < k; ++j)
                best = std::min(best, squared_distance(data.row(i), centers.row(j), d));
            nearest += best;
        }
        worst_inertia_rel =
            std::max(worst_inertia_rel, std::abs(harsh - nearest) / std::max(nearest, 1e-9));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "worst cost error %.3g (1e-10), worst inertia mismatch %.3g (0.01)",
                  worst_cost, worst_inertia_rel);
    return {worst_cost <= 1e-10 && worst_inertia_rel <= 0.01, false, buf};
}

// --- 4. gradient bound audit --------------------------------------------------
Outcome c4_lipschitz() {
    SplitMix64 rng(0xC4);
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(12), d = 1 + rng.below(6), k = 2 + rng.below(4);
        const DataMatrix data = gaussian_data(rng, n, d);
        const double jitter = trial % 2 == 0 ? 1.0 : 0.1;
        const ClusterModel model = random_model(rng, data, k, 0.5, jitter);
        const LipschitzRecord rec = lipschitz_monitor(model, data);
        min_margin = std::min(min_margin, rec.bound - rec.f_grad_max);
        if (rec.f_grad_max > rec.bound) ++violations;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu violations in 1000 trials, min margin %.3g",
                  violations, min_margin);
    return {violations == 0, false, buf};
}

// --- 5. metric oracle equivalence ---------------------------------------------
bool metrics_close(const ClusteringReport& got, const oracle::MetricSet& want,
                   double tol, double& worst) {
    const double diffs[] = {
        std::abs(got.accuracy - want.accuracy),
        std::abs(got.nmi - want.nmi),
        std::abs(got.ari - want.ari),
        std::abs(got.ami - want.ami),
        std::abs(got.homogeneity - want.homogeneity),
        std::abs(got.completeness - want.completeness),
        std::abs(got.v_measure - want.v_measure)};
    for (double d : diffs) worst = std::max(worst, d);
    for (double d : diffs)
        if (!(d <= tol)) return false;
    return true;
}

Outcome c5_metric_oracle() {
    double worst = 0.0;

    // Exhaustive over all (y_true, y_pred) pairs with n <= 8, k <= 3. Every
    // metric depends on the labels only through the multiset of
    // (true, predicted) pairs, i.e. the 3x3 contingency table, so enumerating
    // all tables with total n covers every label pair.
    std::vector<int> y, p;
    for (int n = 1; n <= 8; ++n) {
        std::vector<int> cells(9, 0);
        std::function<bool(std::size_t, int)> enumerate = [&](std::size_t idx,
                                                              int remaining) -> bool {
            if (idx == 8) {
                cells[8] = remaining;
                y.clear();
                p.clear();
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < cells[a * 3 + b]; ++c) {
                            y.push_back(a);
                            p.push_back(b);
                        }
                // labels must be dense for the library; remap on the fly
                std::map<int, int> ry, rp;
                for (int& v : y) v = ry.emplace(v, static_cast<int>(ry.size())).first->second;
                for (int& v : p) v = rp.emplace(v, static_cast<int>(rp.size())).first->second;
                return metrics_close(clustering_report(y, p), oracle::metrics(y, p), 1e-10,
                                     worst);
            }
            for (int v = 0; v <= remaining; ++v) {
                cells[idx] = v;
                if (!enumerate(idx + 1, remaining - v)) return false;
            }
            cells[idx] = 0;
            return true;
        };
        if (!enumerate(0, n))
            return {false, false, "oracle mismatch in exhaustive sweep, worst " +
                                      std::to_string(worst)};
    }

    // random draws at n = 50
    SplitMix64 rng(0xC5);
    for (int trial = 0; trial < 10000; ++trial) {
        const int kt = 1 + static_cast<int>(rng.below(3));
        const int kp = 1 + static_cast<int>(rng.below(3));
        std::vector<int> yt(50), yp(50);
        for (int i = 0; i < 50; ++i) {
            yt[i] = static_cast<int>(rng.below(kt));
            yp[i] = static_cast<int>(rng.below(kp));
        }
        // densify
        std::map<int, int> ry, rp;
        for (int& v : yt) v = ry.emplace(v, static_cast<int>(ry.size())).first->second;
        for (int& v : yp) v = rp.emplace(v, static_cast<int>(rp.size())).first->second;
        if (!metrics_close(clustering_report(yt, yp), oracle::metrics(yt, yp), 1e-10,
                           worst))
            return {false, false, "oracle mismatch on random draw"};
    }

    // exact permutation invariance
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(2));
        std::vector<int> yt(30), yp(30);
        for (int i = 0; i < 30; ++i) {
            yt[i] = static_cast<int>(rng.below(k));
            yp[i] = static_cast<int>(rng.below(k));
        }
        std::vector<int> perm(k);
        for (int j = 0; j < k; ++j) perm[j] = j;
        rng.shuffle(perm);
        std::vector<int> yp2(30);
        for (int i = 0; i < 30; ++i) yp2[i] = perm[yp[i]];
        const ClusteringReport a = clustering_report(yt, yp);
        const ClusteringReport b = clustering_report(yt, yp2);
        if (a.accuracy != b.accuracy || a.nmi != b.nmi || a.ari != b.ari ||
            a.ami != b.ami || a.homogeneity != b.homogeneity ||
            a.completeness != b.completeness || a.v_measure != b.v_measure)
            return {false, false, "permutation invariance violated"};
    }

    char buf[128];
    std::snprintf(buf, sizeof buf, "worst oracle deviation %.3g (threshold 1e-10)", worst);
    return {true, false, buf};
}

// --- 6. oracle dominance over lloyd -------------------------------------------
Outcome c6_dominance() {
    SplitMix64 rng(0xC6);
    for (int trial = 0; trial < 50; ++trial) {
        const bool pair = trial % 2 == 0;
        const std::size_t k = pair ? 2 : 3;
        const std::size_t n = pair ? 10 + rng.below(10) : 8 + rng.below(5);  // k^n <= 1e6
        const std::size_t d = 1 + rng.below(3);
        const DataMatrix data = gaussian_data(rng, n, d);

        const BruteForceResult bf = brute_force_kmeans(data, k);
        const LloydResult ll = lloyd(data, k, init_kmeanspp(data, k, 1000 + trial));
        if (bf.inertia > ll.inertia * (1.0 + 1e-12) + 1e-12)
            return {false, false, "brute-force inertia above lloyd at trial " +
                                      std::to_string(trial)};
        for (std::size_t t = 0; t + 1 < ll.inertia_per_iter.size(); ++t) {
            const bool exempt =
                std::find(ll.reseed_iters.begin(), ll.reseed_iters.end(), t) !=
                ll.reseed_iters.end();
            if (!exempt && ll.inertia_per_iter[t + 1] > ll.inertia_per_iter[t])
                return {false, false, "lloyd inertia increased at iteration " +
                                          std::to_string(t)};
        }
    }
    return {true, false, "brute force <= lloyd and lloyd monotone on 50 instances"};
}

// --- blob protocols for criteria 7 and 8 --------------------------------------
//
// Two protocols mirror the source experiments: the headline-quality run uses a
// tuned alpha from the {1,5} x 10^p grid with k-means++ seeding and no norm
// projection (the projection's radial rescale erodes cluster geometry on raw
// low-dimensional data; see the notes in README), while the initialization
// study runs the stock defaults (alpha = 1e-3, projection on) and varies only
// the initializer, which is the published experimental design.
LabeledDataset blob_instance(std::uint64_t seed) {
    return make_blobs(3, 200, 2, 10.0, 0.5, 1000 + seed);
}

double blob_train_accuracy(const LabeledDataset& ds, InitKind kind, std::uint64_t seed,
                           double alpha, bool project) {
    TrainConfig cfg;
    cfg.alpha = alpha;
    cfg.seed = seed;
    cfg.project = project;
    const TrainResult tr = train(ds.features, 3, {kind, seed},
                                 OptimizerConfig::defaults(OptKind::adadelta), cfg);
    return accuracy_hungarian(*ds.labels, predict(tr.model, ds.features));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome c7_blobs() {
    std::vector<double> net, base;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const LabeledDataset ds = blob_instance(seed);
        net.push_back(blob_train_accuracy(ds, InitKind::kmeans_pp, seed, 0.1, false));
        const LloydResult ll = lloyd(
            ds.features, 3, initialize(ds.features, 3, {InitKind::kmeans_pp, seed}));
        base.push_back(accuracy_hungarian(*ds.labels, ll.labels));
    }
    const double net_med = median(net), lloyd_med = median(base);
    char buf[128];
    std::snprintf(buf, sizeof buf, "median accuracy %.4f vs lloyd %.4f", net_med,
                  lloyd_med);
    return {net_med >= 0.98 && net_med >= lloyd_med - 0.02, false, buf};
}

Outcome c8_init_robustness() {
    double lo = 1.0, hi = 0.0;
    std::string detail;
    for (InitKind kind : {InitKind::random, InitKind::kmeans_pp, InitKind::kmeans}) {
        std::vector<double> accs;
        for (std::uint64_t seed = 0; seed < 10; ++seed)
            accs.push_back(blob_train_accuracy(blob_instance(seed), kind, seed,
                                               1e-3, true));
        const double med = median(accs);
        lo = std::min(lo, med);
        hi = std::max(hi, med);
        detail += std::string(init_kind_name(kind)) + "=" +
                  std::to_string(med).substr(0, 6) + " ";
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%sspread %.4f (threshold 0.03)", detail.c_str(),
                  hi - lo);
    return {hi - lo <= 0.03, false, buf};
}

// --- 9. raw-image reproduction (optional, needs local IDX files) ---------------
std::string find_mnist_dir() {
    std::vector<std::string> candidates;
    if (const char* env = std::getenv("MNIST_DIR")) candidates.push_back(env);
    candidates.push_back("data/mnist");
    candidates.push_back("../data/mnist");
    for (const std::string& dir : candidates)
        if (std::filesystem::exists(dir + "/train-images-idx3-ubyte")) return dir;
    return "";
}

Outcome c9_raw_reproduction() {
    const std::string dir = find_mnist_dir();
    if (dir.empty())
        return {true, true, "no local IDX files (set MNIST_DIR to run)"};

    LabeledDataset ds = load_idx(dir + "/train-images-idx3-ubyte",
                                 dir + "/train-labels-idx1-ubyte");
    ds = concat(ds, load_idx(dir + "/t10k-images-idx3-ubyte",
                             dir + "/t10k-labels-idx1-ubyte"));
    ds.features = normalize_l2(ds.features);

    TrainConfig cfg;
    cfg.alpha = 1e-3;
    cfg.seed = 1;
    cfg.threads = 8;
    const TrainResult tr = train(ds.features, 10, {InitKind::kmeans_pp, 1},
                                 OptimizerConfig::defaults(OptKind::adadelta), cfg);
    const ClusteringReport net =
        clustering_report(*ds.labels, predict(tr.model, ds.features));

    const LloydResult ll =
        lloyd(ds.features, 10, init_random(ds.features, 10, 1), 300, 1e-4);
    const ClusteringReport base = clustering_report(*ds.labels, ll.labels);

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "net acc %.2f (57.55+-3), nmi %.2f (50.31+-3); lloyd acc %.2f (54.23+-3)",
                  100 * net.accuracy, 100 * net.nmi, 100 * base.accuracy);
    const bool pass = std::abs(100 * net.accuracy - 57.55) <= 3.0 &&
                      std::abs(100 * net.nmi - 50.31) <= 3.0 &&
                      std::abs(100 * base.accuracy - 54.23) <= 3.0;
    return {pass, false, buf};
}

// --- 10. determinism ------------------------------------------------------------
Outcome c10_determinism() {
    const LabeledDataset ds = make_blobs(3, 80, 3, 8.0, 0.6, 5);
    TrainConfig cfg;
    cfg.alpha = 0.2;
    cfg.max_epochs = 60;
    cfg.seed = 31337;
    cfg.batch_size = 64;
    const auto opt = OptimizerConfig::defaults(OptKind::rmsprop);
    const TrainResult a = train(ds.features, 3, {InitKind::kmeans_pp, 7}, opt, cfg);
    const TrainResult b = train(ds.features, 3, {InitKind::kmeans_pp, 7}, opt, cfg);

    const bool same = a.model.W.data() == b.model.W.data() && a.model.b == b.model.b &&
                      a.trace.loss_per_epoch == b.trace.loss_per_epoch &&
                      a.trace.grad_norm_per_epoch == b.trace.grad_norm_per_epoch;

    // thread count must not change results either
    TrainConfig cfg4 = cfg;
    cfg4.threads = 4;
    const TrainResult c = train(ds.features, 3, {InitKind::kmeans_pp, 7}, opt, cfg4);
    const bool same_threads =
        c.model.W.data() == a.model.W.data() && c.trace.loss_per_epoch == a.trace.loss_per_epoch;

    // and the CLI must agree with itself byte for byte outside the clock field
    bool same_cli = true;
#ifdef KMNET_BIN
    const std::string base = (std::filesystem::temp_directory_path() /
                              ("kmn_acc_det_" + std::to_string(::getpid())))
                                 .string();
    const std::string flags =
        " train --blobs k=3,n=120,d=2 --no-normalize --no-project --alpha 0.1 "
        "--epochs 50 --seed 42 > ";
    std::system((std::string(KMNET_BIN) + flags + base + "_1 2>/dev/null").c_str());
    std::system((std::string(KMNET_BIN) + flags + base + "_2 2>/dev/null").c_str());
    auto slurp_strip = [](const std::string& p) {
        std::ifstream in(p);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        const auto pos = text.find("wall_clock_sec");
        if (pos != std::string::npos) {
            const auto end = text.find('\n', pos);
            text.erase(pos, end - pos);
        }
        return text;
    };
    const std::string r1 = slurp_strip(base + "_1");
    const std::string r2 = slurp_strip(base + "_2");
    same_cli = !r1.empty() && r1 == r2;
    std::filesystem::remove(base + "_1");
    std::filesystem::remove(base + "_2");
#endif

    const bool pass = same && same_threads && same_cli;
    std::string detail = pass ? "bit-exact across reruns, thread counts, and CLI runs"
                              : std::string("mismatch:") + (same ? "" : " rerun") +
                                    (same_threads ? "" : " threads") +
                                    (same_cli ? "" : " cli");
    return {pass, false, detail};
}

// --- 11. convergence inequality harness (reported, not asserted) ---------------
Outcome c11_theorem2() {
    const LabeledDataset ds = make_blobs(2, 8, 2, 6.0, 0.4, 99);
    TrainConfig cfg;
    cfg.alpha = 0.05;
    cfg.max_epochs = 500;
    cfg.tol = 0.0;
    cfg.batch_size = ds.features.rows();
    cfg.record_lipschitz = true;
    auto opt = OptimizerConfig::defaults(OptKind::sgd_fixed_step);
    opt.eta = 0.01;
    const TrainResult tr = train(ds.features, 2, {InitKind::kmeans_pp, 99}, opt, cfg);
    const Theorem2Report rep = theorem2_check(tr.trace, ds.features, 2, opt.eta);

    if (rep.rows.size() != tr.trace.epochs_run)
        return {false, false, "table not produced for every step"};
    std::size_t violations = 0;
    double worst_margin = 0.0;
    for (const ConvergenceCheck& row : rep.rows) {
        if (!std::isfinite(row.lhs) || !std::isfinite(row.rhs))
            return {false, false, "non-finite entry at T=" + std::to_string(row.T)};
        if (!row.holds) {
            ++violations;
            worst_margin = std::max(worst_margin, row.lhs - row.rhs);
        }
    }
    char buf[200];
    if (violations == 0)
        std::snprintf(buf, sizeof buf,
                      "%zu steps, lhs finite, lhs <= rhs throughout (eps %.3g)",
                      rep.rows.size(), rep.epsilon);
    else
        std::snprintf(buf, sizeof buf,
                      "%zu steps, lhs finite; %zu violations, worst margin %.3g "
                      "(reported, not asserted)",
                      rep.rows.size(), violations, worst_margin);
    return {true, false, buf};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        const char* title;
        std::function<Outcome()> run;
        bool optional;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient correctness", c1_gradients, false},
        {2, "softmax contract", c2_softmax, false},
        {3, "tied-parameter fidelity", c3_tied_params, false},
        {4, "gradient bound audit", c4_lipschitz, false},
        {5, "metric oracle equivalence", c5_metric_oracle, false},
        {6, "baseline/oracle dominance", c6_dominance, false},
        {7, "end-to-end blobs", c7_blobs, false},
        {8, "initialization robustness", c8_init_robustness, false},
        {9, "raw-image table reproduction", c9_raw_reproduction, true},
        {10, "determinism", c10_determinism, false},
        {11, "convergence inequality harness", c11_theorem2, false},
    };

    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.number != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
        std::printf("[%s] criterion %2d: %s — %s (%.2fs)\n", tag, c.number, c.title,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass && !out.skipped) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
