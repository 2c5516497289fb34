import numpy as np
import pytest

from dimuq import rmse
from dimuq.errors import ConfigError
from dimuq.models import MlpConfig, MlpRegressor

from helpers import central_difference, matrix_from_arrays


def smooth_fixture(n, seed, noise=0.0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 3))
    y = np.sin(2 * X[:, 0]) + X[:, 1] * X[:, 2] + noise * rng.standard_normal(n)
    return matrix_from_arrays(X, y)


class TestMlp:
    def test_zeroed_output_layer_predicts_bias(self):
        model = MlpRegressor(MlpConfig(hidden_sizes=(5, 3), seed=0))
        model.init_params(4)
        model.weights[-1][...] = 0.0
        model.biases[-1][...] = 0.37
        rng = np.random.default_rng(0)
        np.testing.assert_allclose(model.forward(rng.normal(size=(6, 4))), 0.37,
                                   rtol=1e-12)

    @pytest.mark.parametrize("activation", ["tanh", "relu"])
    def test_gradients_match_finite_differences(self, activation):
        train = smooth_fixture(4, seed=1)
        model = MlpRegressor(MlpConfig(hidden_sizes=(4, 3), activation=activation,
                                       seed=2))
        model.init_params(3)

        def loss_of(flat):
            model.set_flat_params(flat)
            loss, _ = model.loss_and_grads(train.features, train.targets)
            return loss

        flat0 = model.flatten_params()
        model.set_flat_params(flat0)
        _, grads = model.loss_and_grads(train.features, train.targets)
        analytic = np.concatenate([g.ravel() for g in grads])
        numeric = central_difference(loss_of, flat0, h=1e-5)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-7)

    def test_lbfgs_fits_smooth_function(self):
        train = smooth_fixture(120, seed=3)
        test = smooth_fixture(60, seed=4)
        model = MlpRegressor(MlpConfig(hidden_sizes=(16, 8), activation="tanh",
                                       optimizer="lbfgs", max_iter=800, seed=0)).fit(train)
        assert rmse(model.predict(test.features).values, test.targets) < 0.1

    def test_adam_fits_smooth_function(self):
        train = smooth_fixture(120, seed=5)
        test = smooth_fixture(60, seed=6)
        model = MlpRegressor(MlpConfig(hidden_sizes=(16, 8), activation="tanh",
                                       optimizer="adam", learning_rate=0.02,
                                       max_iter=5000, seed=0)).fit(train)
        assert rmse(model.predict(test.features).values, test.targets) < 0.15

    def test_same_seed_bit_identical(self):
        train = smooth_fixture(50, seed=7)
        queries = train.features[:9]
        config = MlpConfig(hidden_sizes=(6, 4), optimizer="adam", learning_rate=0.01,
                           max_iter=200, seed=11)
        first = MlpRegressor(config).fit(train).predict(queries).values
        second = MlpRegressor(config).fit(train).predict(queries).values
        np.testing.assert_array_equal(first, second)

    def test_divergence_reports_iteration(self):
        import warnings
        rng = np.random.default_rng(8)
        X = rng.uniform(1e3, 1e5, size=(20, 2))
        y = rng.uniform(1e6, 1e8, size=20)
        # a step size at float64 overflow scale forces a non-finite loss
        config = MlpConfig(hidden_sizes=(8,), activation="relu", optimizer="adam",
                           learning_rate=1e160, max_iter=50, seed=0)
        from dimuq.errors import TrainingError
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            with pytest.raises(TrainingError) as excinfo:
                MlpRegressor(config).fit(matrix_from_arrays(X, y))
        assert excinfo.value.iteration is not None

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            MlpConfig(hidden_sizes=())
        with pytest.raises(ConfigError):
            MlpConfig(activation="gelu")
        with pytest.raises(ConfigError):
            MlpConfig(optimizer="sgd")
