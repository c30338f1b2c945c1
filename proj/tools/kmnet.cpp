// kmnet: train and evaluate the softmax-assignment clustering model, compare
// it against the Lloyd baseline, and run the numerical diagnostics.
//
// Structured JSON goes to stdout; --pretty adds a human table on stderr.
// Exit codes: 0 success, 2 usage, 3 numeric failure, 4 capacity.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmn/baseline.hpp"
#include "kmn/core.hpp"
#include "kmn/data.hpp"
#include "kmn/diagnostics.hpp"
#include "kmn/init.hpp"
#include "kmn/metrics.hpp"
#include "kmn/model_io.hpp"
#include "kmn/optim.hpp"
#include "kmn/rng.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCapacity = 4;

struct DatasetFlags {
    std::string csv_path;
    bool csv_no_labels = false;
    std::string delimiter = ",";
    std::vector<std::string> idx_images;
    std::vector<std::string> idx_labels;
    std::string blob_spec;
    bool normalize = true;
};

struct BlobSpec {
    std::size_t k = 3;
    std::size_t n = 600;
    std::size_t d = 2;
    double sep = 10.0;
    double sigma = 0.5;
};

BlobSpec parse_blob_spec(const std::string& spec) {
    BlobSpec out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw kmn::DomainError("bad --blobs item '" + item + "', expected key=value");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "k") out.k = std::stoul(value);
            else if (key == "n") out.n = std::stoul(value);
            else if (key == "d") out.d = std::stoul(value);
            else if (key == "sep") out.sep = std::stod(value);
            else if (key == "sigma") out.sigma = std::stod(value);
            else throw kmn::DomainError("unknown --blobs key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw kmn::DomainError("bad --blobs value for '" + key + "': " + value);
        }
    }
    if (out.k < 2) throw kmn::DomainError("--blobs needs k >= 2");
    if (out.n % out.k != 0)
        throw kmn::DomainError("--blobs needs n divisible by k");
    return out;
}

kmn::LabeledDataset load_dataset(const DatasetFlags& flags, std::uint64_t seed) {
    kmn::LabeledDataset ds;
    if (!flags.blob_spec.empty()) {
        const BlobSpec b = parse_blob_spec(flags.blob_spec);
        ds = kmn::make_blobs(b.k, b.n / b.k, b.d, b.sep, b.sigma, seed);
    } else if (!flags.idx_images.empty()) {
        if (flags.idx_images.size() != flags.idx_labels.size())
            throw kmn::DomainError("--idx-images and --idx-labels must pair up");
        ds = kmn::load_idx(flags.idx_images[0], flags.idx_labels[0]);
        for (std::size_t i = 1; i < flags.idx_images.size(); ++i)
            ds = kmn::concat(ds, kmn::load_idx(flags.idx_images[i], flags.idx_labels[i]));
    } else if (!flags.csv_path.empty()) {
        ds = kmn::load_csv(flags.csv_path, !flags.csv_no_labels, flags.delimiter[0]);
    } else {
        throw kmn::DomainError("no dataset given: use --data, --idx-images/--idx-labels, or --blobs");
    }
    if (flags.normalize) {
        std::size_t zero_rows = 0;
        ds.features = kmn::normalize_l2(ds.features, &zero_rows);
        if (zero_rows > 0)
            std::cerr << "warning: " << zero_rows << " zero rows left unnormalized\n";
    }
    return ds;
}

kmn::InitKind parse_init(const std::string& name) {
    if (name == "random") return kmn::InitKind::random;
    if (name == "kmeans++") return kmn::InitKind::kmeans_pp;
    if (name == "kmeans") return kmn::InitKind::kmeans;
    throw kmn::DomainError("unknown init '" + name + "'");
}

kmn::OptKind parse_opt(const std::string& name) {
    if (name == "sgd") return kmn::OptKind::sgd_fixed_step;
    if (name == "sgd-length") return kmn::OptKind::sgd_fixed_length;
    if (name == "adadelta") return kmn::OptKind::adadelta;
    if (name == "adagrad") return kmn::OptKind::adagrad;
    if (name == "adam") return kmn::OptKind::adam;
    if (name == "rmsprop") return kmn::OptKind::rmsprop;
    throw kmn::DomainError("unknown optimizer '" + name + "'");
}

json metrics_json(const kmn::ClusteringReport& r, double purity_value) {
    json j;
    j["accuracy"] = r.accuracy;
    j["purity"] = purity_value;
    j["nmi"] = r.nmi;
    j["ari"] = r.ari;
    j["ami"] = r.ami;
    j["homogeneity"] = r.homogeneity;
    j["completeness"] = r.completeness;
    j["v_measure"] = r.v_measure;
    j["confusion"] = r.confusion;
    return j;
}

struct CommonTrainFlags {
    double alpha = 1e-3;
    bool alpha_grid = false;
    std::size_t k = 0;  // 0: take the class count from the labels
    std::string init = "kmeans++";
    std::string opt = "adadelta";
    double eta = -1.0;  // <0: per-optimizer default
    double rho = -1.0, beta1 = -1.0, beta2 = -1.0, eps = -1.0;
    std::size_t batch = 256;
    std::size_t epochs = 3000;
    double tol = 1e-3;
    std::uint64_t seed = 0;
    bool project = true;
    bool tie_bias = false;
    int threads = 1;
};

kmn::OptimizerConfig make_opt_config(const CommonTrainFlags& f) {
    kmn::OptimizerConfig c = kmn::OptimizerConfig::defaults(parse_opt(f.opt));
    if (f.eta > 0.0) c.eta = f.eta;
    if (f.rho >= 0.0) c.rho = f.rho;
    if (f.beta1 >= 0.0) c.beta1 = f.beta1;
    if (f.beta2 >= 0.0) c.beta2 = f.beta2;
    if (f.eps > 0.0) c.epsilon = f.eps;
    return c;
}

kmn::TrainConfig make_train_config(const CommonTrainFlags& f, double alpha) {
    kmn::TrainConfig cfg;
    cfg.alpha = alpha;
    cfg.max_epochs = f.epochs;
    cfg.tol = f.tol;
    cfg.batch_size = f.batch;
    cfg.seed = f.seed;
    cfg.project = f.project;
    cfg.tie_bias = f.tie_bias;
    cfg.threads = f.threads;
    return cfg;
}

std::size_t resolve_k(const CommonTrainFlags& f, const kmn::LabeledDataset& ds) {
    if (f.k > 0) return f.k;
    if (ds.labels) {
        int max_label = 0;
        for (int v : *ds.labels) max_label = std::max(max_label, v);
        return static_cast<std::size_t>(max_label) + 1;
    }
    throw kmn::DomainError("--k is required for unlabelled data");
}

std::vector<double> alpha_grid_values() {
    std::vector<double> grid;
    for (int p = -5; p <= 0; ++p) {
        grid.push_back(1.0 * std::pow(10.0, p));
        grid.push_back(5.0 * std::pow(10.0, p));
    }
    return grid;
}

json config_json(const CommonTrainFlags& f, const kmn::OptimizerConfig& opt, double alpha,
                 std::size_t k, const DatasetFlags& dflags) {
    json j;
    j["alpha"] = alpha;
    j["k"] = k;
    j["init"] = f.init;
    j["opt"] = {{"kind", kmn::opt_kind_name(opt.kind)}, {"eta", opt.eta},
                {"rho", opt.rho},  {"beta1", opt.beta1},
                {"beta2", opt.beta2}, {"epsilon", opt.epsilon}};
    j["batch"] = f.batch;
    j["epochs"] = f.epochs;
    j["tol"] = f.tol;
    j["seed"] = f.seed;
    j["normalize"] = dflags.normalize;
    j["project"] = f.project;
    j["tie_bias"] = f.tie_bias;
    j["threads"] = f.threads;
    return j;
}

json dataset_json(const kmn::LabeledDataset& ds, std::size_t k) {
    json j;
    j["n"] = ds.features.rows();
    j["d"] = ds.features.cols();
    j["k"] = k;
    j["source"] = ds.source;
    j["normalized"] = ds.features.normalized();
    j["labeled"] = ds.labels.has_value();
    return j;
}

struct TrainOutcome {
    kmn::TrainResult result;
    std::optional<kmn::ClusteringReport> report;
    double purity = 0.0;
    double alpha = 0.0;
};

TrainOutcome run_training(const kmn::LabeledDataset& ds, std::size_t k,
                          const CommonTrainFlags& f, double alpha) {
    TrainOutcome out;
    out.alpha = alpha;
    const kmn::InitMethod init{parse_init(f.init), f.seed};
    out.result = kmn::train(ds.features, k, init, make_opt_config(f),
                            make_train_config(f, alpha),
                            ds.labels ? &*ds.labels : nullptr);
    if (ds.labels) {
        const std::vector<int> pred = kmn::predict(out.result.model, ds.features);
        out.report = kmn::clustering_report(*ds.labels, pred);
        out.purity = kmn::purity(*ds.labels, pred);
    }
    return out;
}

json outcome_json(const TrainOutcome& out, std::size_t n) {
    const kmn::TrainTrace& tr = out.result.trace;
    json j;
    j["alpha"] = out.alpha;
    j["final_loss"] = tr.loss_per_epoch.back();
    j["final_loss_mean"] = tr.loss_per_epoch.back() / static_cast<double>(n);
    j["trace"] = {{"epochs_run", tr.epochs_run},
                  {"converged", tr.converged},
                  {"best_loss", tr.best_loss},
                  {"best_epoch", tr.best_epoch},
                  {"final_grad_norm", tr.grad_norm_per_epoch.back()},
                  {"skipped_steps", tr.skipped_steps}};
    j["metrics"] = out.report ? metrics_json(*out.report, out.purity) : json(nullptr);
    return j;
}

int cmd_train(const DatasetFlags& dflags, const CommonTrainFlags& tflags,
              const std::string& model_out, bool pretty) {
    const auto t0 = std::chrono::steady_clock::now();
    const kmn::LabeledDataset ds = load_dataset(dflags, tflags.seed);
    const std::size_t k = resolve_k(tflags, ds);

    json report;
    report["command"] = "train";
    report["config"] = config_json(tflags, make_opt_config(tflags), tflags.alpha, k, dflags);
    report["dataset"] = dataset_json(ds, k);

    TrainOutcome chosen;
    if (tflags.alpha_grid) {
        json runs = json::array();
        bool have = false;
        for (double alpha : alpha_grid_values()) {
            TrainOutcome out = run_training(ds, k, tflags, alpha);
            runs.push_back(outcome_json(out, ds.features.rows()));
            const bool better =
                !have ||
                (out.report
                     ? out.report->accuracy > (chosen.report ? chosen.report->accuracy : -1.0)
                     : out.result.trace.loss_per_epoch.back() <
                           chosen.result.trace.loss_per_epoch.back());
            if (better) chosen = std::move(out);
            have = true;
        }
        report["alpha_grid"] = runs;
        report["best_alpha"] = chosen.alpha;
    } else {
        chosen = run_training(ds, k, tflags, tflags.alpha);
    }
    report["result"] = outcome_json(chosen, ds.features.rows());

    if (!model_out.empty()) {
        kmn::save_model(chosen.result.model, ds.features.normalized(), model_out);
        report["model_file"] = model_out;
    } else {
        report["model_file"] = nullptr;
    }
    report["seed"] = tflags.seed;
    report["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << report.dump(2) << "\n";
    if (pretty) {
        std::fprintf(stderr, "n=%zu d=%zu k=%zu alpha=%g\n", ds.features.rows(),
                     ds.features.cols(), k, chosen.alpha);
        std::fprintf(stderr, "epochs=%zu converged=%d final_loss=%.6g best_loss=%.6g\n",
                     chosen.result.trace.epochs_run, chosen.result.trace.converged ? 1 : 0,
                     chosen.result.trace.loss_per_epoch.back(), chosen.result.trace.best_loss);
        if (chosen.report)
            std::fprintf(stderr, "acc=%.4f nmi=%.4f ari=%.4f ami=%.4f h=%.4f c=%.4f v=%.4f\n",
                         chosen.report->accuracy, chosen.report->nmi, chosen.report->ari,
                         chosen.report->ami, chosen.report->homogeneity,
                         chosen.report->completeness, chosen.report->v_measure);
    }
    return kExitOk;
}

int cmd_compare(const DatasetFlags& dflags, const CommonTrainFlags& tflags, bool pretty) {
    const auto t0 = std::chrono::steady_clock::now();
    const kmn::LabeledDataset ds = load_dataset(dflags, tflags.seed);
    if (!ds.labels) throw kmn::DomainError("compare needs a labelled dataset");
    const std::size_t k = resolve_k(tflags, ds);

    json report;
    report["command"] = "compare";
    report["config"] = config_json(tflags, make_opt_config(tflags), tflags.alpha, k, dflags);
    report["dataset"] = dataset_json(ds, k);
    json cells = json::array();

    const char* init_names[] = {"random", "kmeans++", "kmeans"};
    for (const char* init_name : init_names) {
        const kmn::InitMethod init{parse_init(init_name), tflags.seed};

        // Baseline and the trained model share the same initial centers.
        const kmn::Centroids centers = kmn::initialize(ds.features, k, init);
        const kmn::LloydResult lr = kmn::lloyd(ds.features, k, centers);
        const kmn::ClusteringReport base = kmn::clustering_report(*ds.labels, lr.labels);
        cells.push_back({{"method", "kmeans"},
                         {"init", init_name},
                         {"accuracy", base.accuracy},
                         {"nmi", base.nmi},
                         {"ari", base.ari},
                         {"inertia", lr.inertia}});

        CommonTrainFlags cell_flags = tflags;
        cell_flags.init = init_name;
        const TrainOutcome out = run_training(ds, k, cell_flags, tflags.alpha);
        cells.push_back({{"method", "kmeansnet"},
                         {"init", init_name},
                         {"accuracy", out.report->accuracy},
                         {"nmi", out.report->nmi},
                         {"ari", out.report->ari},
                         {"final_loss", out.result.trace.loss_per_epoch.back()}});
    }
    report["cells"] = cells;
    report["seed"] = tflags.seed;
    report["wall_clock_sec"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << report.dump(2) << "\n";

    if (pretty) {
        std::fprintf(stderr, "%-10s %-9s %8s %8s %8s\n", "method", "init", "ACC", "NMI", "ARI");
        for (const auto& c : cells)
            std::fprintf(stderr, "%-10s %-9s %8.4f %8.4f %8.4f\n",
                         c["method"].get<std::string>().c_str(),
                         c["init"].get<std::string>().c_str(), c["accuracy"].get<double>(),
                         c["nmi"].get<double>(), c["ari"].get<double>());
    }
    return kExitOk;
}

// Deterministic random instances for the gradient and bound audits.
struct RandomInstance {
    kmn::DataMatrix data;
    kmn::ClusterModel model;
};

RandomInstance random_instance(kmn::SplitMix64& rng, bool wild_model) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.below(16));
    const std::size_t d = 2 + static_cast<std::size_t>(rng.below(7));
    const std::size_t k = 2 + static_cast<std::size_t>(rng.below(4));
    const double alphas[] = {0.01, 0.1, 1.0};
    const double alpha = alphas[rng.below(3)];

    kmn::Matrix values(n, d);
    for (double& v : values.data()) v = rng.normal();
    kmn::DataMatrix data(std::move(values));

    kmn::Centroids omega(k, d);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t pick = static_cast<std::size_t>(rng.below(n));
        for (std::size_t t = 0; t < d; ++t)
            omega(j, t) = data.row(pick)[t] + 0.3 * rng.normal();
    }
    kmn::ClusterModel model = kmn::centroids_to_params(omega, alpha);
    const double scale = wild_model ? 1.0 : 0.1;
    for (double& v : model.W.data()) v += scale * rng.normal();
    for (double& v : model.b) v += scale * rng.normal();
    return {std::move(data), std::move(model)};
}

int cmd_diagnose(bool do_gradcheck, bool do_lipschitz, bool do_theorem2,
                 const std::vector<double>& curve_args, std::size_t trials,
                 const std::string& blob_spec, double eta, std::size_t epochs, double tol,
                 std::uint64_t seed, bool pretty) {
    json report;
    report["command"] = "diagnose";
    bool any_selected = false;
    bool all_pass = true;

    if (do_gradcheck) {
        any_selected = true;
        kmn::SplitMix64 rng(seed);
        double worst = 0.0;
        const std::size_t n_trials = trials == 0 ? 100 : trials;
        for (std::size_t t = 0; t < n_trials; ++t) {
            const RandomInstance inst = random_instance(rng, false);
            worst = std::max(worst, kmn::grad_check(inst.model, inst.data, 1e-5));
        }
        const bool pass = worst < 1e-5;
        all_pass = all_pass && pass;
        report["gradcheck"] = {{"trials", n_trials},
                               {"max_rel_error", worst},
                               {"threshold", 1e-5},
                               {"pass", pass}};
        if (pretty)
            std::fprintf(stderr, "gradcheck: max rel error %.3g over %zu trials -> %s\n",
                         worst, n_trials, pass ? "pass" : "FAIL");
    }

    if (do_lipschitz) {
        any_selected = true;
        kmn::SplitMix64 rng(seed + 1);
        const std::size_t n_trials = trials == 0 ? 1000 : trials;
        std::size_t violations = 0;
        double min_margin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n_trials; ++t) {
            const RandomInstance inst = random_instance(rng, t % 2 == 0);
            const kmn::LipschitzRecord rec = kmn::lipschitz_monitor(inst.model, inst.data);
            min_margin = std::min(min_margin, rec.bound - rec.f_grad_max);
            if (rec.f_grad_max > rec.bound) ++violations;
        }
        const bool pass = violations == 0;
        all_pass = all_pass && pass;
        report["lipschitz"] = {{"trials", n_trials},
                               {"violations", violations},
                               {"min_margin", min_margin},
                               {"pass", pass}};
        if (pretty)
            std::fprintf(stderr, "lipschitz: %zu violations over %zu trials -> %s\n",
                         violations, n_trials, pass ? "pass" : "FAIL");
    }

    if (do_theorem2) {
        any_selected = true;
        const BlobSpec b = parse_blob_spec(blob_spec.empty() ? "k=2,n=16,d=2" : blob_spec);
        const kmn::LabeledDataset ds =
            kmn::make_blobs(b.k, b.n / b.k, b.d, b.sep, b.sigma, seed);
        kmn::TrainConfig cfg;
        cfg.alpha = 0.05;
        cfg.max_epochs = epochs;
        cfg.tol = tol;
        cfg.batch_size = ds.features.rows();  // full batch
        cfg.seed = seed;
        cfg.record_lipschitz = true;
        kmn::OptimizerConfig opt = kmn::OptimizerConfig::defaults(kmn::OptKind::sgd_fixed_step);
        opt.eta = eta;
        const kmn::TrainResult tr = kmn::train(
            ds.features, b.k, {kmn::InitKind::kmeans_pp, seed}, opt, cfg);
        const kmn::Theorem2Report t2 =
            kmn::theorem2_check(tr.trace, ds.features, b.k, opt.eta);
        json rows = json::array();
        for (const kmn::ConvergenceCheck& row : t2.rows)
            rows.push_back({{"T", row.T}, {"lhs", row.lhs}, {"rhs", row.rhs},
                            {"holds", row.holds}});
        report["theorem2"] = {{"epsilon", t2.epsilon},
                              {"l_star", t2.l_star},
                              {"oracle_inertia", t2.oracle_inertia},
                              {"all_hold", t2.all_hold},
                              {"rows", rows}};
        // Reported, not asserted: does not affect the exit code.
        if (pretty) {
            std::fprintf(stderr, "theorem2: epsilon=%.4g l*=%.6g all_hold=%d\n", t2.epsilon,
                         t2.l_star, t2.all_hold ? 1 : 0);
            for (const kmn::ConvergenceCheck& row : t2.rows)
                if (row.T <= 5 || row.T == t2.rows.size() || !row.holds)
                    std::fprintf(stderr, "  T=%-5zu lhs=%-12.6g rhs=%-12.6g %s\n", row.T,
                                 row.lhs, row.rhs, row.holds ? "ok" : "VIOLATION");
        }
    }

    if (!curve_args.empty()) {
        any_selected = true;
        const auto pts = kmn::boundedness_curve(curve_args[0], curve_args[1],
                                                static_cast<std::size_t>(curve_args[2]));
        json arr = json::array();
        for (const auto& [z, f] : pts) arr.push_back({z, f});
        report["curve"] = {{"samples", pts.size()}, {"points", arr}};
    }

    if (!any_selected)
        throw kmn::DomainError(
            "diagnose needs at least one of --gradcheck, --lipschitz, --theorem2, --curve");

    report["pass"] = all_pass;
    std::cout << report.dump(2) << "\n";
    return all_pass ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"softmax-assignment clustering trainer and diagnostics"};
    app.require_subcommand(1);

    DatasetFlags dflags;
    CommonTrainFlags tflags;
    std::string model_out;
    bool pretty = false;

    auto add_dataset_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", dflags.csv_path, "CSV dataset path");
        cmd->add_flag("--csv-no-labels", dflags.csv_no_labels,
                      "treat every CSV column as a feature");
        cmd->add_option("--delimiter", dflags.delimiter, "CSV delimiter")
            ->check(CLI::Validator(
                [](std::string& s) {
                    return s.size() == 1 ? std::string{} : std::string{"one character"};
                },
                "CHAR"));
        cmd->add_option("--idx-images", dflags.idx_images, "IDX image file(s)");
        cmd->add_option("--idx-labels", dflags.idx_labels, "IDX label file(s)");
        cmd->add_option("--blobs", dflags.blob_spec,
                        "synthetic blobs, e.g. k=3,n=600,d=2,sep=10,sigma=0.5");
        cmd->add_flag("--normalize,!--no-normalize", dflags.normalize,
                      "l2-normalize samples (default on)");
    };
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--k", tflags.k, "number of clusters (default: class count)");
        cmd->add_option("--alpha", tflags.alpha, "softmax sharpness, alpha > 0")
            ->check(CLI::Validator(
                [](std::string& s) {
                    double v = 0.0;
                    try {
                        v = std::stod(s);
                    } catch (...) {
                        return std::string{"not a number"};
                    }
                    return v > 0.0 ? std::string{}
                                   : std::string{"alpha must satisfy alpha > 0"};
                },
                "FLOAT>0"));
        cmd->add_flag("--alpha-grid", tflags.alpha_grid,
                      "sweep alpha over {1,5} x 10^p, p in [-5,0]");
        cmd->add_option("--init", tflags.init, "initializer")
            ->check(CLI::IsMember({"random", "kmeans++", "kmeans"}));
        cmd->add_option("--opt", tflags.opt, "optimizer")
            ->check(CLI::IsMember(
                {"sgd", "sgd-length", "adadelta", "adagrad", "adam", "rmsprop"}));
        cmd->add_option("--eta", tflags.eta, "step size/length or learning rate");
        cmd->add_option("--rho", tflags.rho, "adadelta/rmsprop decay");
        cmd->add_option("--beta1", tflags.beta1, "adam beta1");
        cmd->add_option("--beta2", tflags.beta2, "adam beta2");
        cmd->add_option("--eps", tflags.eps, "optimizer epsilon");
        cmd->add_option("--batch", tflags.batch, "mini-batch size");
        cmd->add_option("--epochs", tflags.epochs, "max epochs (default 3000)");
        cmd->add_option("--tol", tflags.tol, "relative loss-change tolerance (default 1e-3)");
        cmd->add_option("--seed", tflags.seed, "PRNG seed");
        cmd->add_flag("--project,!--no-project", tflags.project,
                      "norm projection of W and clamp of b (default on)");
        cmd->add_flag("--tie-bias", tflags.tie_bias,
                      "recompute b from W after every step instead of training it");
        cmd->add_option("--threads", tflags.threads, "worker threads (deterministic)");
        cmd->add_flag("--pretty", pretty, "human-readable table on stderr");
    };

    CLI::App* train_cmd = app.add_subcommand("train", "fit the clustering model");
    add_dataset_flags(train_cmd);
    add_train_flags(train_cmd);
    train_cmd->add_option("--model-out", model_out, "write the fitted model here");

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "baseline vs trained model across initializers");
    add_dataset_flags(compare_cmd);
    add_train_flags(compare_cmd);

    CLI::App* diag_cmd = app.add_subcommand("diagnose", "numerical checks and curves");
    bool do_gradcheck = false, do_lipschitz = false, do_theorem2 = false;
    std::vector<double> curve_args;
    std::size_t trials = 0;
    std::string diag_blobs;
    double diag_eta = 0.01;
    std::size_t diag_epochs = 300;
    double diag_tol = 0.0;
    std::uint64_t diag_seed = 0;
    bool diag_pretty = false;
    diag_cmd->add_flag("--gradcheck", do_gradcheck, "finite-difference gradient audit");
    diag_cmd->add_flag("--lipschitz", do_lipschitz, "gradient bound audit");
    diag_cmd->add_flag("--theorem2", do_theorem2, "convergence inequality table");
    diag_cmd->add_option("--curve", curve_args, "boundedness curve: zmin zmax samples")
        ->expected(3);
    diag_cmd->add_option("--trials", trials, "audit trial count");
    diag_cmd->add_option("--blobs", diag_blobs, "instance for --theorem2");
    diag_cmd->add_option("--eta", diag_eta, "fixed step size for --theorem2");
    diag_cmd->add_option("--epochs", diag_epochs, "epochs for --theorem2");
    diag_cmd->add_option("--tol", diag_tol, "stop tolerance for --theorem2 (0: run all epochs)");
    diag_cmd->add_option("--seed", diag_seed, "PRNG seed");
    diag_cmd->add_flag("--pretty", diag_pretty, "human-readable summary on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(dflags, tflags, model_out, pretty);
        if (compare_cmd->parsed()) return cmd_compare(dflags, tflags, pretty);
        return cmd_diagnose(do_gradcheck, do_lipschitz, do_theorem2, curve_args, trials,
                            diag_blobs, diag_eta, diag_epochs, diag_tol, diag_seed,
                            diag_pretty);
    } catch (const kmn::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const kmn::CapacityError& e) {
        std::cerr << "capacity exceeded: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
