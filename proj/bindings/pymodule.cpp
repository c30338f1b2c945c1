// Python bindings for the clustering core. Matrices cross the boundary as
// numpy arrays; configs are exposed as keyword arguments with the same
// defaults as the CLI.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "kmn/baseline.hpp"
#include "kmn/core.hpp"
#include "kmn/data.hpp"
#include "kmn/diagnostics.hpp"
#include "kmn/init.hpp"
#include "kmn/metrics.hpp"
#include "kmn/model_io.hpp"
#include "kmn/optim.hpp"

namespace py = pybind11;

namespace {

kmn::Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw kmn::ShapeError("expected a 2-D array");
    kmn::Matrix m(static_cast<std::size_t>(arr.shape(0)),
                  static_cast<std::size_t>(arr.shape(1)));
    std::memcpy(m.data().data(), arr.data(), sizeof(double) * m.size());
    return m;
}

py::array_t<double> from_matrix(const kmn::Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    std::memcpy(arr.mutable_data(), m.data().data(), sizeof(double) * m.size());
    return arr;
}

kmn::InitKind init_kind(const std::string& name) {
    if (name == "random") return kmn::InitKind::random;
    if (name == "kmeans++") return kmn::InitKind::kmeans_pp;
    if (name == "kmeans") return kmn::InitKind::kmeans;
    throw kmn::DomainError("unknown init '" + name + "'");
}

kmn::OptKind opt_kind(const std::string& name) {
    if (name == "sgd") return kmn::OptKind::sgd_fixed_step;
    if (name == "sgd-length") return kmn::OptKind::sgd_fixed_length;
    if (name == "adadelta") return kmn::OptKind::adadelta;
    if (name == "adagrad") return kmn::OptKind::adagrad;
    if (name == "adam") return kmn::OptKind::adam;
    if (name == "rmsprop") return kmn::OptKind::rmsprop;
    throw kmn::DomainError("unknown optimizer '" + name + "'");
}

kmn::OptimizerConfig opt_config(const std::string& opt, double eta, double rho,
                                double beta1, double beta2, double epsilon) {
    kmn::OptimizerConfig c = kmn::OptimizerConfig::defaults(opt_kind(opt));
    if (eta > 0.0) c.eta = eta;
    if (rho >= 0.0) c.rho = rho;
    if (beta1 >= 0.0) c.beta1 = beta1;
    if (beta2 >= 0.0) c.beta2 = beta2;
    if (epsilon > 0.0) c.epsilon = epsilon;
    return c;
}

py::dict report_dict(const kmn::ClusteringReport& r) {
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["nmi"] = r.nmi;
    d["ari"] = r.ari;
    d["ami"] = r.ami;
    d["homogeneity"] = r.homogeneity;
    d["completeness"] = r.completeness;
    d["v_measure"] = r.v_measure;
    d["confusion"] = r.confusion;
    return d;
}

}  // namespace

PYBIND11_MODULE(_kmeansnet, m) {
    m.doc() = "softmax-assignment clustering: training, baseline, metrics, diagnostics";

    py::register_exception<kmn::ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<kmn::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<kmn::CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<kmn::DegeneracyError>(m, "DegeneracyError", PyExc_RuntimeError);
    py::register_exception<kmn::FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<kmn::NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<kmn::DataMatrix>(m, "DataMatrix")
        .def(py::init([](const py::array_t<double, py::array::c_style |
                                                       py::array::forcecast>& arr,
                         bool normalized) {
                 return kmn::DataMatrix(to_matrix(arr), normalized);
             }),
             py::arg("values"), py::arg("normalized") = false)
        .def_property_readonly("n", &kmn::DataMatrix::rows)
        .def_property_readonly("d", &kmn::DataMatrix::cols)
        .def_property_readonly("normalized", &kmn::DataMatrix::normalized)
        .def("numpy", [](const kmn::DataMatrix& d) { return from_matrix(d.values()); });

    py::class_<kmn::ClusterModel>(m, "ClusterModel")
        .def(py::init([](const py::array_t<double, py::array::c_style |
                                                       py::array::forcecast>& W,
                         const std::vector<double>& b, double alpha) {
                 kmn::ClusterModel model;
                 model.W = to_matrix(W);
                 model.b = b;
                 model.alpha = alpha;
                 if (model.b.size() != model.k())
                     throw kmn::ShapeError("b length must equal W rows");
                 return model;
             }),
             py::arg("W"), py::arg("b"), py::arg("alpha"))
        .def_property_readonly("W", [](const kmn::ClusterModel& m) { return from_matrix(m.W); })
        .def_property_readonly("b", [](const kmn::ClusterModel& m) { return m.b; })
        .def_property_readonly("alpha", [](const kmn::ClusterModel& m) { return m.alpha; })
        .def_property_readonly("k", &kmn::ClusterModel::k)
        .def_property_readonly("d", &kmn::ClusterModel::dim);

    py::class_<kmn::TrainTrace>(m, "TrainTrace")
        .def_readonly("loss_per_epoch", &kmn::TrainTrace::loss_per_epoch)
        .def_readonly("grad_norm_per_epoch", &kmn::TrainTrace::grad_norm_per_epoch)
        .def_readonly("best_loss", &kmn::TrainTrace::best_loss)
        .def_readonly("best_epoch", &kmn::TrainTrace::best_epoch)
        .def_readonly("epochs_run", &kmn::TrainTrace::epochs_run)
        .def_readonly("converged", &kmn::TrainTrace::converged);

    py::class_<kmn::LloydResult>(m, "LloydResult")
        .def_readonly("labels", &kmn::LloydResult::labels)
        .def_property_readonly(
            "centroids", [](const kmn::LloydResult& r) { return from_matrix(r.centroids); })
        .def_readonly("inertia", &kmn::LloydResult::inertia)
        .def_readonly("iterations", &kmn::LloydResult::iterations)
        .def_readonly("inertia_per_iter", &kmn::LloydResult::inertia_per_iter)
        .def_readonly("reseed_iters", &kmn::LloydResult::reseed_iters);

    // data
    m.def(
        "make_blobs",
        [](std::size_t k, std::size_t per_cluster, std::size_t d, double separation,
           double sigma, std::uint64_t seed) {
            const kmn::LabeledDataset ds =
                kmn::make_blobs(k, per_cluster, d, separation, sigma, seed);
            return py::make_tuple(from_matrix(ds.features.values()), *ds.labels);
        },
        py::arg("k"), py::arg("per_cluster"), py::arg("d"), py::arg("separation") = 10.0,
        py::arg("sigma") = 0.5, py::arg("seed") = 0);
    m.def(
        "load_csv",
        [](const std::string& path, bool has_labels, char delimiter) {
            const kmn::LabeledDataset ds = kmn::load_csv(path, has_labels, delimiter);
            return py::make_tuple(from_matrix(ds.features.values()),
                                  ds.labels ? py::cast(*ds.labels) : py::none());
        },
        py::arg("path"), py::arg("has_labels") = true, py::arg("delimiter") = ',');
    m.def(
        "load_idx",
        [](const std::string& images, const std::string& labels) {
            const kmn::LabeledDataset ds = kmn::load_idx(images, labels);
            return py::make_tuple(from_matrix(ds.features.values()), *ds.labels);
        },
        py::arg("images_path"), py::arg("labels_path"));
    m.def(
        "normalize_l2",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
            return from_matrix(
                kmn::normalize_l2(kmn::DataMatrix(to_matrix(arr))).values());
        },
        py::arg("values"));

    // core operations
    m.def(
        "logits",
        [](const kmn::ClusterModel& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            return from_matrix(kmn::logits(model, kmn::DataMatrix(to_matrix(x))));
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "soft_assign",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& z) {
            return from_matrix(kmn::soft_assign(to_matrix(z)).probs);
        },
        py::arg("logits"));
    m.def(
        "hard_assign",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& probs) {
            return kmn::hard_assign(kmn::SoftAssignment{to_matrix(probs)});
        },
        py::arg("probs"));
    m.def(
        "loss",
        [](const kmn::ClusterModel& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const kmn::LossBreakdown lb = kmn::loss(model, kmn::DataMatrix(to_matrix(x)));
            py::dict d;
            d["total"] = lb.total;
            d["per_sample"] = lb.per_sample;
            d["logits"] = from_matrix(lb.logits);
            d["costs"] = from_matrix(lb.costs);
            return d;
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "gradients",
        [](const kmn::ClusterModel& model,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const kmn::Gradients g = kmn::gradients(model, kmn::DataMatrix(to_matrix(x)));
            return py::make_tuple(from_matrix(g.dW), g.db);
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "centroids_to_params",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& omega,
           double alpha) { return kmn::centroids_to_params(to_matrix(omega), alpha); },
        py::arg("centroids"), py::arg("alpha"));
    m.def("recover_centers",
          [](const kmn::ClusterModel& model) { return from_matrix(kmn::recover_centers(model)); },
          py::arg("model"));

    // initialization and baseline
    auto data_of = [](const py::array_t<double, py::array::c_style |
                                                    py::array::forcecast>& x,
                      bool normalized) { return kmn::DataMatrix(to_matrix(x), normalized); };
    m.def(
        "init_centers",
        [data_of](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  std::size_t k, const std::string& method, std::uint64_t seed) {
            return from_matrix(
                kmn::initialize(data_of(x, false), k, {init_kind(method), seed}));
        },
        py::arg("x"), py::arg("k"), py::arg("method") = "kmeans++", py::arg("seed") = 0);
    m.def(
        "lloyd",
        [data_of](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  std::size_t k,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& init,
                  std::size_t max_iter, double tol) {
            return kmn::lloyd(data_of(x, false), k, to_matrix(init), max_iter, tol);
        },
        py::arg("x"), py::arg("k"), py::arg("init"), py::arg("max_iter") = 300,
        py::arg("tol") = 1e-4);
    m.def(
        "inertia",
        [data_of](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  const std::vector<int>& labels,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>&
                      centroids) {
            return kmn::inertia(data_of(x, false), labels, to_matrix(centroids));
        },
        py::arg("x"), py::arg("labels"), py::arg("centroids"));

    // training and prediction
    m.def(
        "train",
        [data_of](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  std::size_t k, double alpha, const std::string& init,
                  const std::string& opt, double eta, double rho, double beta1,
                  double beta2, double epsilon, std::size_t epochs, double tol,
                  std::size_t batch, std::uint64_t seed, bool project, bool tie_bias,
                  int threads, bool record_lipschitz, bool normalized) {
            kmn::TrainConfig cfg;
            cfg.alpha = alpha;
            cfg.max_epochs = epochs;
            cfg.tol = tol;
            cfg.batch_size = batch;
            cfg.seed = seed;
            cfg.project = project;
            cfg.tie_bias = tie_bias;
            cfg.threads = threads;
            cfg.record_lipschitz = record_lipschitz;
            const kmn::TrainResult r =
                kmn::train(data_of(x, normalized), k, {init_kind(init), seed},
                           opt_config(opt, eta, rho, beta1, beta2, epsilon), cfg);
            return py::make_tuple(r.model, r.trace);
        },
        py::arg("x"), py::arg("k"), py::arg("alpha") = 1e-3,
        py::arg("init") = "kmeans++", py::arg("opt") = "adadelta", py::arg("eta") = -1.0,
        py::arg("rho") = -1.0, py::arg("beta1") = -1.0, py::arg("beta2") = -1.0,
        py::arg("epsilon") = -1.0, py::arg("epochs") = 3000, py::arg("tol") = 1e-3,
        py::arg("batch") = 256, py::arg("seed") = 0, py::arg("project") = true,
        py::arg("tie_bias") = false, py::arg("threads") = 1,
        py::arg("record_lipschitz") = false, py::arg("normalized") = false);
    m.def(
        "predict",
        [data_of](const kmn::ClusterModel& model,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            return kmn::predict(model, data_of(x, false));
        },
        py::arg("model"), py::arg("x"));

    // metrics
    m.def("confusion", &kmn::confusion, py::arg("y_true"), py::arg("y_pred"));
    m.def("accuracy", &kmn::accuracy_hungarian, py::arg("y_true"), py::arg("y_pred"));
    m.def("purity", &kmn::purity, py::arg("y_true"), py::arg("y_pred"));
    m.def(
        "clustering_report",
        [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
            return report_dict(kmn::clustering_report(y_true, y_pred));
        },
        py::arg("y_true"), py::arg("y_pred"));

    // diagnostics
    m.def(
        "grad_check",
        [data_of](const kmn::ClusterModel& model,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  double h) { return kmn::grad_check(model, data_of(x, false), h); },
        py::arg("model"), py::arg("x"), py::arg("h") = 1e-5);
    m.def(
        "lipschitz_monitor",
        [data_of](const kmn::ClusterModel& model,
                  const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
            const kmn::LipschitzRecord rec = kmn::lipschitz_monitor(model, data_of(x, false));
            py::dict d;
            d["grad_norm"] = rec.grad_norm;
            d["z_max"] = rec.z_max;
            d["bound"] = rec.bound;
            d["f_grad_max"] = rec.f_grad_max;
            return d;
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "brute_force_kmeans",
        [data_of](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                  std::size_t k) {
            const kmn::BruteForceResult r = kmn::brute_force_kmeans(data_of(x, false), k);
            return py::make_tuple(r.labels, from_matrix(r.centroids), r.inertia);
        },
        py::arg("x"), py::arg("k"));
    m.def("boundedness_curve", &kmn::boundedness_curve, py::arg("z_min"), py::arg("z_max"),
          py::arg("samples"));

    // model container
    m.def("save_model", &kmn::save_model, py::arg("model"), py::arg("normalized_input"),
          py::arg("path"));
    m.def(
        "load_model",
        [](const std::string& path) {
            const kmn::LoadedModel lm = kmn::load_model(path);
            return py::make_tuple(lm.model, lm.normalized_input);
        },
        py::arg("path"));
}
