import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import GridSearchCV
from sklearn.pipeline import Pipeline

from conas.estimator import SparseFourierRegressor
from conas.fourier import all_encodings
from conas.oracles import make_planted
from conas.recovery import sample_encodings


def planted_data(n=8, sparsity=5, seed=11):
    plant = make_planted(n, sparsity, 2, seed=seed)
    X = all_encodings(n)
    return plant, X, plant.evaluate_batch(X)


class TestFitPredict:
    def test_exact_regime_recovers_the_plant(self):
        plant, X, y = planted_data()
        model = SparseFourierRegressor(degree=2, sparsity=5, lam=1e-6).fit(X, y)
        assert set(model.expansion_.terms) == set(plant.expansion.terms)
        assert np.abs(model.predict(X) - y).max() < 1e-6
        assert model.score(X, y) == pytest.approx(1.0, abs=1e-9)

    def test_compressive_fit_generalizes(self):
        plant = make_planted(15, 5, 2, seed=3)
        X = sample_encodings(15, 0.5, 150, seed=1)
        model = SparseFourierRegressor(degree=2, sparsity=5, lam=0.1).fit(
            X, plant.evaluate_batch(X)
        )
        holdout = sample_encodings(15, 0.5, 64, seed=2)
        assert np.abs(model.predict(holdout) - plant.evaluate_batch(holdout)).max() < 0.1

    def test_minimize_delegates_to_subcube_search(self):
        plant, X, y = planted_data()
        model = SparseFourierRegressor(degree=2, sparsity=5, lam=1e-6).fit(X, y)
        restriction, value = model.minimize()
        assert value == pytest.approx(float(y.min()), abs=1e-6)
        assert set(restriction.fixed) <= set(range(8))

    def test_solver_diagnostics_exposed(self):
        _, X, y = planted_data()
        model = SparseFourierRegressor(degree=2, sparsity=5, lam=1e-6).fit(X, y)
        assert model.solution_.converged
        assert model.solution_.kkt_residual <= 1e-7
        assert len(model.parities_) == 37  # 1 + 8 + 28


class TestValidation:
    def test_rejects_non_pm1_design(self):
        model = SparseFourierRegressor()
        with pytest.raises(ValueError, match="-1 or \\+1"):
            model.fit(np.array([[0.5, 1.0]]), np.array([1.0]))

    def test_rejects_non_finite_targets(self):
        model = SparseFourierRegressor(degree=1)
        with pytest.raises(ValueError, match="non-finite"):
            model.fit(np.array([[1, -1]]), np.array([np.inf]))

    def test_rejects_degree_over_dimension(self):
        model = SparseFourierRegressor(degree=5)
        with pytest.raises(ValueError, match="degree"):
            model.fit(np.array([[1, -1]]), np.array([1.0]))

    def test_predict_checks_dimension(self):
        _, X, y = planted_data()
        model = SparseFourierRegressor(degree=1, sparsity=3).fit(X, y)
        with pytest.raises(ValueError):
            model.predict(np.ones((2, 9), dtype=np.int8))

    def test_predict_requires_fit(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            SparseFourierRegressor().predict(np.ones((1, 3), dtype=np.int8))


class TestSklearnProtocol:
    def test_params_round_trip_and_clone(self):
        model = SparseFourierRegressor(degree=3, sparsity=7, lam=0.5, tol=1e-6, max_iter=50)
        params = model.get_params()
        assert params == {
            "degree": 3,
            "sparsity": 7,
            "lam": 0.5,
            "tol": 1e-6,
            "max_iter": 50,
        }
        copy = clone(model)
        assert copy.get_params() == params
        copy.set_params(lam=2.0)
        assert copy.lam == 2.0 and model.lam == 0.5

    def test_composes_in_a_pipeline(self):
        _, X, y = planted_data()
        pipe = Pipeline([("model", SparseFourierRegressor(degree=2, sparsity=5, lam=1e-6))])
        pipe.fit(X, y)
        assert pipe.score(X, y) == pytest.approx(1.0, abs=1e-9)

    def test_grid_search_over_lam(self):
        plant = make_planted(10, 4, 2, seed=5)
        X = sample_encodings(10, 0.5, 200, seed=4)
        y = plant.evaluate_batch(X)
        grid = GridSearchCV(
            SparseFourierRegressor(degree=2, sparsity=4),
            {"lam": [1e-4, 1.0, 50.0]},
            cv=3,
        )
        grid.fit(X, y)
        assert grid.best_params_["lam"] in (1e-4, 1.0)
