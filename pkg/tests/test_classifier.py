import numpy as np
import pytest

from sffkit.classifier import (
    BinarySvmModel,
    Dataset,
    OvoModel,
    Standardizer,
    fit_standardizer,
    grid_search_c,
    kkt_residual,
    train_binary_svm,
    train_ovo,
)
from sffkit.errors import DimensionMismatchError, ProtocolError, SolverConvergenceError


def two_blobs(rng, n=50, d=3, shift=0.5, spread=0.3):
    labels = np.arange(n) % 2
    X = rng.normal(0.0, spread, size=(n, d))
    X[:, 0] += np.where(labels == 1, shift, -shift)
    return Dataset(X=X, labels=labels)


def dual_objective(alpha, y, K):
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


def primal_objective(model, data):
    y = np.where(data.labels == model.class_pair[1], 1.0, -1.0)
    hinge = np.maximum(0.0, 1.0 - y * model.decision(data.X))
    return float(0.5 * model.weights @ model.weights + model.c_value * hinge.sum())


def project(v, y, c):
    """Euclidean projection onto {0 <= a <= c, sum(a * y) = 0} via its piecewise-linear dual."""
    breakpoints = np.sort(np.concatenate([v * y, (v - c) * y]))
    h = (y * np.clip(v[None, :] - breakpoints[:, None] * y[None, :], 0.0, c)).sum(axis=1)
    lam = np.interp(0.0, h[::-1], breakpoints[::-1])
    return np.clip(v - lam * y, 0.0, c)


def projected_gradient_dual(K, y, c, iterations=4000):
    """Accelerated projected gradient on the SVM dual; independent of SMO."""
    Q = np.outer(y, y) * K
    step = 1.0 / max(np.linalg.eigvalsh(Q)[-1], 1e-12)
    alpha = np.zeros(y.size)
    z = alpha.copy()
    t = 1.0
    for _ in range(iterations):
        nxt = project(z - step * (Q @ z - 1.0), y, c)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        z = nxt + ((t - 1.0) / t_next) * (nxt - alpha)
        alpha, t = nxt, t_next
    return alpha


# =============================================================================
# Binary SVM
# =============================================================================

def test_two_point_problem_has_analytic_solution():
    data = Dataset(X=np.array([[-1.0, 0.0], [1.0, 0.0]]), labels=np.array([0, 1]))
    model = train_binary_svm(data, c=10.0)
    np.testing.assert_allclose(model.weights, [1.0, 0.0], atol=1e-3)
    assert model.bias == pytest.approx(0.0, abs=1e-3)
    assert model.vote(model.decision(np.array([[2.0, 5.0]]))[0]) == 1
    assert model.vote(0.0) == 0


def test_smo_matches_projected_gradient(rng):
    for _ in range(10):
        data = two_blobs(rng)
        model = train_binary_svm(data, c=1.0)
        assert kkt_residual(model, data) <= 1e-4 * (1 + 1e-6)

        y = np.where(data.labels == 1, 1.0, -1.0)
        K = data.X @ data.X.T
        smo_dual = dual_objective(model.alphas, y, K)
        pg_dual = dual_objective(projected_gradient_dual(K, y, 1.0), y, K)
        assert abs(smo_dual - pg_dual) <= 1e-3 * (1 + abs(smo_dual))
        gap = primal_objective(model, data) - smo_dual
        assert -1e-9 <= gap <= 1e-3 * (1 + abs(smo_dual))


def test_dual_constraints_hold(rng):
    data = two_blobs(rng, shift=0.1)
    model = train_binary_svm(data, c=0.5)
    y = np.where(data.labels == 1, 1.0, -1.0)
    assert np.all(model.alphas >= 0.0) and np.all(model.alphas <= 0.5)
    assert abs(model.alphas @ y) <= 1e-8


def test_iteration_cap_raises(rng):
    data = two_blobs(rng, shift=0.0)
    with pytest.raises(SolverConvergenceError) as err:
        train_binary_svm(data, c=100.0, max_iter=2)
    assert err.value.kkt_violation > 0


def test_binary_needs_two_classes():
    with pytest.raises(ProtocolError):
        train_binary_svm(Dataset(X=np.ones((3, 2)), labels=[1, 1, 1]), c=1.0)


def test_identical_points_with_opposite_labels():
    data = Dataset(X=np.zeros((2, 2)), labels=[0, 1])
    model = train_binary_svm(data, c=1.0)
    np.testing.assert_allclose(model.weights, 0.0)


# =============================================================================
# Standardizer / one-vs-one
# =============================================================================

def test_standardizer_zero_variance_maps_to_zero():
    data = Dataset(X=np.array([[1.0, 5.0], [3.0, 5.0]]), labels=[0, 1])
    st = fit_standardizer(data)
    z = st.apply(np.array([[2.0, 7.0]]))
    np.testing.assert_allclose(z, [[0.0, 0.0]])
    with pytest.raises(DimensionMismatchError):
        st.apply(np.ones((1, 3)))


def _fixed_ovo(biases):
    models = {
        pair: BinarySvmModel(weights=np.zeros(1), bias=b, c_value=1.0, class_pair=pair)
        for pair, b in biases.items()
    }
    identity = Standardizer(mean=np.zeros(1), std=np.ones(1))
    return OvoModel(classes=(0, 1, 2), standardizer=identity, models=models, c_value=1.0)


def test_ovo_three_way_tie_uses_decision_strength():
    # votes: (0,1)->1, (0,2)->0, (1,2)->2; won-duel strength 0:2.0 1:0.5 2:1.0.
    # Summing every duel a class takes part in would pick 2 (0:2.5 1:1.5 2:3.0).
    model = _fixed_ovo({(0, 1): 0.5, (0, 2): -2.0, (1, 2): 1.0})
    label, margins = model.predict_one(np.zeros(1))
    assert label == 0
    assert margins[(0, 2)] == -2.0


def test_ovo_exact_tie_goes_to_lowest_class():
    model = _fixed_ovo({(0, 1): 1.0, (0, 2): -1.0, (1, 2): 1.0})
    assert model.predict_one(np.zeros(1))[0] == 0


def test_ovo_majority(rng):
    X = np.vstack([rng.normal(m, 0.1, size=(6, 2)) for m in (0.0, 3.0, 6.0)])
    labels = np.repeat([0, 1, 2], 6)
    model = train_ovo(Dataset(X=X, labels=labels), c=1.0)
    assert sorted(model.models) == [(0, 1), (0, 2), (1, 2)]
    np.testing.assert_array_equal(model.predict(X), labels)


def test_ovo_json_round_trip_predicts_identically(rng):
    X = rng.normal(size=(12, 4))
    labels = np.repeat([0, 1, 2], 4)
    X[:, 0] += labels
    model = train_ovo(Dataset(X=X, labels=labels), c=1.0)
    restored = OvoModel.from_json(model.to_json("abc"))
    np.testing.assert_array_equal(restored.predict(X), model.predict(X))
    assert restored.c_value == 1.0


def test_train_ovo_missing_class():
    data = Dataset(X=np.ones((4, 2)) * np.arange(4)[:, None], labels=[0, 0, 1, 1])
    with pytest.raises(ProtocolError):
        train_ovo(data, c=1.0, classes=[0, 1, 2])


# =============================================================================
# Grid search
# =============================================================================

def _speaker_dataset(rng, shift):
    rows, labels, speakers = [], [], []
    for cls in (0, 1, 2):
        for s in range(3):
            for _ in range(2):
                x = rng.normal(0.0, 1.0, 3)
                x[0] += shift * cls
                rows.append(x)
                labels.append(cls)
                speakers.append(f"c{cls}s{s}")
    return Dataset(X=np.array(rows), labels=labels, speakers=speakers)


def test_single_value_grid_returns_immediately(rng):
    result = grid_search_c(_speaker_dataset(rng, 1.0), [0.3])
    assert result.best_c == 0.3
    assert result.scores == {}


def test_grid_search_scores_every_value(rng):
    data = _speaker_dataset(rng, 4.0)
    result = grid_search_c(data, [0.01, 1.0, 100.0])
    assert set(result.scores) == {0.01, 1.0, 100.0}
    assert result.best_c in result.scores
    assert result.scores[result.best_c] == max(result.scores.values())
    assert result.skipped_folds == []


def test_grid_ties_pick_smallest_c(rng):
    data = _speaker_dataset(rng, 50.0)
    result = grid_search_c(data, [10.0, 1.0, 100.0])
    assert all(score == 1.0 for score in result.scores.values())
    assert result.best_c == 1.0


def test_grid_search_skips_degenerate_inner_folds(rng):
    data = _speaker_dataset(rng, 4.0)
    keep = np.array([not s.startswith("c2") or s == "c2s0" for s in data.speakers])
    reduced = data.subset(keep)
    result = grid_search_c(reduced, [0.1, 1.0])
    assert result.skipped_folds == ["c2s0"]
