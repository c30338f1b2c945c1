"""Smoke tests for the Python bindings: every main operation gets exercised
once on a small instance."""

import math

import numpy as np
import pytest

try:
    import kmeansnet as km
except ImportError:
    import _kmeansnet as km


@pytest.fixture(scope="module")
def blobs():
    X, y = km.make_blobs(3, 60, 2, separation=10.0, sigma=0.5, seed=5)
    return np.asarray(X), list(y)


def test_make_blobs_shape_and_determinism(blobs):
    X, y = blobs
    assert X.shape == (180, 2)
    assert len(y) == 180
    X2, y2 = km.make_blobs(3, 60, 2, separation=10.0, sigma=0.5, seed=5)
    assert np.array_equal(X, np.asarray(X2))


def test_soft_assign_rows_are_stochastic():
    z = np.array([[0.0, 0.0], [math.log(3.0), 0.0], [1000.0, 0.0]])
    probs = np.asarray(km.soft_assign(z))
    assert np.all(np.isfinite(probs))
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert probs[1, 0] == pytest.approx(0.75)
    assert km.hard_assign(probs) == [0, 0, 0]


def test_centroid_parameter_roundtrip():
    omega = np.array([[1.0, 0.0], [0.0, 1.0]])
    model = km.centroids_to_params(omega, 0.5)
    assert np.asarray(model.W) == pytest.approx(omega)  # W = 2*0.5*omega
    assert list(model.b) == pytest.approx([-0.5, -0.5])
    assert np.asarray(km.recover_centers(model)) == pytest.approx(omega)


def test_loss_and_gradients_agree_with_grad_check(blobs):
    X, _ = blobs
    model = km.centroids_to_params(km.init_centers(X, 3, "kmeans++", seed=3), 0.1)
    breakdown = km.loss(model, X)
    assert breakdown["total"] == pytest.approx(sum(breakdown["per_sample"]), rel=1e-10)
    assert km.grad_check(model, X, h=1e-5) < 1e-6


def test_lloyd_and_brute_force_dominance():
    X, _ = km.make_blobs(2, 6, 2, separation=8.0, sigma=0.4, seed=9)
    X = np.asarray(X)
    init = km.init_centers(X, 2, "kmeans++", seed=1)
    result = km.lloyd(X, 2, init)
    _, _, best = km.brute_force_kmeans(X, 2)
    assert best <= result.inertia + 1e-9
    assert result.inertia == pytest.approx(
        km.inertia(X, result.labels, result.centroids), rel=1e-10
    )


def test_train_predict_metrics(blobs):
    X, y = blobs
    model, trace = km.train(
        X, 3, alpha=0.1, init="kmeans++", opt="adadelta", seed=5, project=False
    )
    labels = km.predict(model, X)
    assert km.accuracy(y, labels) >= 0.98
    report = km.clustering_report(y, labels)
    assert report["nmi"] >= 0.9
    assert trace.epochs_run <= 3000
    assert trace.best_loss <= trace.loss_per_epoch[0]

    # determinism
    model2, trace2 = km.train(
        X, 3, alpha=0.1, init="kmeans++", opt="adadelta", seed=5, project=False
    )
    assert np.array_equal(np.asarray(model.W), np.asarray(model2.W))
    assert trace.loss_per_epoch == trace2.loss_per_epoch


def test_metrics_on_known_case():
    report = km.clustering_report([0, 0, 1, 1], [0, 1, 1, 1])
    assert report["ari"] == 0.0
    assert report["nmi"] == pytest.approx(0.3437110184854508, abs=1e-12)
    assert km.accuracy([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75


def test_model_file_roundtrip(tmp_path, blobs):
    X, _ = blobs
    model, _ = km.train(X, 3, alpha=0.1, seed=2, epochs=20, project=False)
    path = str(tmp_path / "model.bin")
    km.save_model(model, False, path)
    loaded, normalized = km.load_model(path)
    assert not normalized
    assert np.array_equal(np.asarray(loaded.W), np.asarray(model.W))
    assert km.predict(loaded, X) == km.predict(model, X)


def test_boundedness_curve_values():
    pts = km.boundedness_curve(-50.0, 100.0, 151)
    assert len(pts) == 151
    z0 = min(pts, key=lambda p: abs(p[0]))
    assert z0[1] == pytest.approx(0.0, abs=1e-12)
    assert abs(pts[0][1]) < 1e-20
    assert pts[-1][1] == pytest.approx(100.0, abs=1e-10)


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        km.centroids_to_params(np.zeros((2, 2)), 0.0)
    with pytest.raises(ValueError):
        km.train(np.random.rand(10, 2), 1)
    with pytest.raises(RuntimeError):
        km.brute_force_kmeans(np.random.rand(40, 2), 4)
