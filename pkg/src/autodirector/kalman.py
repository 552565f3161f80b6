"""Constant-velocity Kalman filtering of bounding boxes.

State layout: [cx, cy, w, h, vcx, vcy, vw, vh] in pixels and pixels/frame.
The functions are pure; each returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BoundingBox

STATE_DIM = 8

DEFAULT_PROCESS_POS = 1.0  # px^2 per frame on the positional components
DEFAULT_PROCESS_VEL = 0.1
DEFAULT_MEASUREMENT = 4.0  # px^2 on each measured component
INIT_COVARIANCE_FACTOR = 10.0  # new tracks start with inflated uncertainty

_F = np.eye(STATE_DIM)
_F[:4, 4:] = np.eye(4)
_H = np.zeros((4, STATE_DIM))
_H[:, :4] = np.eye(4)


@dataclass(frozen=True)
class KalmanState:
    """Filter mean and covariance; covariance stays symmetric PSD."""

    mean: np.ndarray
    cov: np.ndarray

    def box(self) -> BoundingBox:
        cx, cy, w, h = self.mean[:4]
        return BoundingBox(float(cx), float(cy), max(float(w), 1.0), max(float(h), 1.0))


def _box_vector(box: BoundingBox) -> np.ndarray:
    return np.array([box.cx, box.cy, box.w, box.h], dtype=float)


def initial_state(
    box: BoundingBox, measurement_noise: float = DEFAULT_MEASUREMENT
) -> KalmanState:
    """State for a freshly spawned track: zero velocity, inflated covariance."""
    mean = np.zeros(STATE_DIM)
    mean[:4] = _box_vector(box)
    cov = np.eye(STATE_DIM) * INIT_COVARIANCE_FACTOR * max(measurement_noise, 1.0)
    return KalmanState(mean, cov)


def kalman_predict(
    state: KalmanState,
    process_pos: float = DEFAULT_PROCESS_POS,
    process_vel: float = DEFAULT_PROCESS_VEL,
) -> tuple[KalmanState, BoundingBox]:
    """Advance one frame; returns the new state and the predicted box."""
    q = np.diag([process_pos] * 4 + [process_vel] * 4)
    mean = _F @ state.mean
    cov = _F @ state.cov @ _F.T + q
    cov = (cov + cov.T) / 2
    advanced = KalmanState(mean, cov)
    return advanced, advanced.box()


def kalman_correct(
    state: KalmanState,
    observation: BoundingBox,
    measurement_noise: float = DEFAULT_MEASUREMENT,
) -> KalmanState:
    """Measurement update on the four positional components (Joseph form)."""
    r = np.eye(4) * measurement_noise
    innovation = _box_vector(observation) - _H @ state.mean
    s = _H @ state.cov @ _H.T + r
    gain = np.linalg.solve(s.T, (_H @ state.cov.T)).T  # P H^T S^-1
    mean = state.mean + gain @ innovation
    ikh = np.eye(STATE_DIM) - gain @ _H
    cov = ikh @ state.cov @ ikh.T + gain @ r @ gain.T
    cov = (cov + cov.T) / 2
    return KalmanState(mean, cov)
