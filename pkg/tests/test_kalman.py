import numpy as np

from autodirector.kalman import (
    KalmanState,
    initial_state,
    kalman_correct,
    kalman_predict,
)
from autodirector.model import BoundingBox


def test_zero_velocity_is_a_fixed_point():
    box = BoundingBox(100, 200, 40, 80)
    state = initial_state(box)
    _, predicted = kalman_predict(state)
    assert predicted == box


def test_prediction_applies_velocity():
    mean = np.array([100, 50, 40, 80, 5, 0, 0, 0], dtype=float)
    state = KalmanState(mean, np.eye(8))
    _, predicted = kalman_predict(state)
    assert predicted.cx == 105
    assert predicted.cy == 50


def test_predicted_size_floored_at_one_pixel():
    mean = np.array([100, 50, 1.2, 1.2, 0, 0, -5, -5], dtype=float)
    state = KalmanState(mean, np.eye(8))
    _, predicted = kalman_predict(state)
    assert predicted.w == 1.0 and predicted.h == 1.0


def test_noiseless_constant_velocity_prediction_converges():
    # Closed-form oracle: the true box moves at exactly (5, 2) px/frame.
    def truth(t):
        return BoundingBox(100 + 5 * t, 50 + 2 * t, 40, 80)

    state = initial_state(truth(0))
    err = None
    for t in range(1, 120):
        state, predicted = kalman_predict(state)
        err = max(
            abs(predicted.cx - truth(t).cx),
            abs(predicted.cy - truth(t).cy),
            abs(predicted.w - truth(t).w),
            abs(predicted.h - truth(t).h),
        )
        state = kalman_correct(state, truth(t))
    assert err < 1e-6


def test_zero_measurement_noise_snaps_to_observation():
    state = initial_state(BoundingBox(10, 10, 5, 5))
    state, _ = kalman_predict(state)
    obs = BoundingBox(14, 9, 6, 5.5)
    corrected = kalman_correct(state, obs, measurement_noise=0.0)
    assert np.allclose(corrected.mean[:4], [14, 9, 6, 5.5], atol=1e-9)


def test_zero_innovation_keeps_position():
    state = initial_state(BoundingBox(10, 10, 5, 5))
    state, predicted = kalman_predict(state)
    corrected = kalman_correct(state, predicted)
    assert np.allclose(corrected.mean[:4], state.mean[:4], atol=1e-12)


def test_repeated_correction_converges_to_constant_observation():
    obs = BoundingBox(500, 500, 60, 120)
    state = initial_state(BoundingBox(400, 450, 50, 100))
    for _ in range(50):
        state, _ = kalman_predict(state)
        state = kalman_correct(state, obs)
    assert np.allclose(state.mean[:4], [500, 500, 60, 120], atol=1e-6)


def test_covariance_stays_symmetric_psd_diagonal():
    rng = np.random.default_rng(5)
    state = initial_state(BoundingBox(100, 100, 30, 60))
    for _ in range(200):
        state, _ = kalman_predict(state)
        assert np.allclose(state.cov, state.cov.T)
        assert (np.diag(state.cov) >= 0).all()
        if rng.uniform() < 0.7:
            obs = BoundingBox(
                100 + rng.normal(0, 5),
                100 + rng.normal(0, 5),
                30 + abs(rng.normal(0, 2)),
                60 + abs(rng.normal(0, 2)),
            )
            state = kalman_correct(state, obs)
            assert np.allclose(state.cov, state.cov.T)
            assert (np.diag(state.cov) >= 0).all()
