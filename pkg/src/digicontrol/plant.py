"""Integrator x first-order-lag plant and its zero-order-hold discretization.

The continuous model is ``Hp(s) = sigma / (s (sigma - s))`` with
``sigma < 0``; ``sigma == 0`` selects the re-normalized double integrator
(position output, unit acceleration gain).

All sampled quantities are written in terms of the functions

    phi1(x) = (e^x - 1) / x
    phi2(x) = (e^x - 1 - x) / x^2
    psi(x)  = (x e^x - e^x + 1) / x^2

with ``x = sigma * t``. They are evaluated by power series near zero, which
removes the cancellation in the textbook closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


SERIES_CUTOFF = 0.5
_SERIES_TERMS = 30

_PHI2_COEFS = np.array([1.0 / factorial(k + 2) for k in range(_SERIES_TERMS)])
_PSI_COEFS = np.array([(k + 1) / factorial(k + 2) for k in range(_SERIES_TERMS)])


def _series(coefs, x):
    return float(np.polyval(coefs[::-1], x))


def phi1(x: float) -> float:
    return 1.0 if x == 0 else float(np.expm1(x) / x)


def phi2(x: float) -> float:
    if abs(x) < SERIES_CUTOFF:
        return _series(_PHI2_COEFS, x)
    return float((np.expm1(x) - x) / (x * x))


def psi(x: float) -> float:
    if abs(x) < SERIES_CUTOFF:
        return _series(_PSI_COEFS, x)
    return float((x * np.exp(x) - np.expm1(x)) / (x * x))


@dataclass(frozen=True)
class ContinuousStateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float


@dataclass(frozen=True)
class ContinuousPlant:
    sigma: float = -10.0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma > 0:
            raise ValueError(f"sigma must be <= 0, got {self.sigma}")

    @property
    def output_gain(self) -> float:
        # -sigma normalizes the steady output rate to 1; the sigma == 0
        # limit reads position directly.
        return 1.0 if self.sigma == 0 else -self.sigma

    def state_space(self) -> ContinuousStateSpace:
        s = self.sigma
        return ContinuousStateSpace(
            A=np.array([[0.0, 1.0], [0.0, s]]),
            B=np.array([[0.0], [1.0]]),
            C=np.array([[self.output_gain, 0.0]]),
            D=0.0,
        )

    def transfer_function(self):
        """(numerator, denominator) in descending powers of s."""
        if self.sigma == 0:
            return np.array([1.0]), np.array([1.0, 0.0, 0.0])
        return np.array([-self.sigma]), np.array([1.0, -self.sigma, 0.0])


def fundamental_matrix(plant: ContinuousPlant, t: float) -> np.ndarray:
    """G(t) = exp(A t) for the plant's state matrix."""
    if t < 0:
        raise ValueError("t must be non-negative")
    x = plant.sigma * t
    return np.array([[1.0, t * phi1(x)], [0.0, np.exp(x)]])


def input_response(plant: ContinuousPlant, t: float) -> np.ndarray:
    """Zero-state response to a unit input held over [0, t], shape (2, 1)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    x = plant.sigma * t
    return np.array([[t * t * phi2(x)], [t * phi1(x)]])


@dataclass(frozen=True)
class SampledPlant:
    sigma: float
    fs: float
    G: np.ndarray
    H: np.ndarray
    C: np.ndarray
    D: float
    b: np.ndarray
    a: np.ndarray

    @property
    def ts(self) -> float:
        return 1.0 / self.fs

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def to_dict(self) -> dict:
        return {
            "sigma": float(self.sigma),
            "fs": float(self.fs),
            "a_p": [float(v) for v in self.a],
            "b_p": [float(v) for v in self.b],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampledPlant":
        return discretize(ContinuousPlant(float(data["sigma"])), float(data["fs"]))


def discretize(plant: ContinuousPlant, fs: float) -> SampledPlant:
    """Exact ZOH discretization with closed-form transfer function."""
    if not fs > 0:
        raise ValueError("fs must be positive")
    ts = 1.0 / fs
    x = plant.sigma * ts
    decay = float(np.exp(x))
    k = plant.output_gain
    G = fundamental_matrix(plant, ts)
    H = input_response(plant, ts)
    C = np.array([[k, 0.0]])
    b = np.array([0.0, k * ts * ts * phi2(x), k * ts * ts * psi(x)])
    a = np.array([1.0, -(1.0 + decay), decay])
    return SampledPlant(sigma=plant.sigma, fs=fs, G=G, H=H, C=C, D=0.0, b=b, a=a)


def state_space_tf(G, H, C, D=0.0):
    """Transfer function C (zI - G)^-1 H + D of a 2-state system.

    Uses the explicit 2x2 adjugate, independent of the closed forms used
    in :func:`discretize`.
    """
    G = np.asarray(G, float)
    H = np.asarray(H, float).reshape(2)
    C = np.asarray(C, float).reshape(2)
    den = np.array([1.0, -np.trace(G), np.linalg.det(G)])
    # adj(zI - G) = [[z - g11, g01], [g10, z - g00]]
    adj_z = np.array([[1.0, 0.0], [0.0, 1.0]])
    adj_0 = np.array([[-G[1, 1], G[0, 1]], [G[1, 0], -G[0, 0]]])
    num = np.array([0.0, C @ adj_z @ H, C @ adj_0 @ H])
    num = num + D * den
    return num, den


def intra_sample_response(plant: ContinuousPlant, fs: float, u, w0=None,
                          oversample: int = 10):
    """Continuous plant output between samples for a held input sequence.

    Returns ``(t, y, w)`` with ``len(u) * oversample + 1`` instants: the
    sample instants plus ``oversample - 1`` equally spaced points inside each
    period. Entries at multiples of ``oversample`` are the sample-time values
    of the discrete recursion.
    """
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    u = np.asarray(u, float).reshape(-1)
    ts = 1.0 / fs
    w = np.zeros(2) if w0 is None else np.asarray(w0, float).reshape(2)
    C = np.array([plant.output_gain, 0.0])
    offsets = ts * np.arange(1, oversample + 1) / oversample
    G_sub = [fundamental_matrix(plant, dt) for dt in offsets]
    H_sub = [input_response(plant, dt).reshape(2) for dt in offsets]
    times = [0.0]
    states = [w.copy()]
    for n, un in enumerate(u):
        start = w
        for j, dt in enumerate(offsets):
            times.append(n * ts + dt)
            states.append(G_sub[j] @ start + H_sub[j] * un)
        w = states[-1]
    states = np.array(states)
    return np.array(times), states @ C, states


def step_discrete(sp: SampledPlant, u, w0=None):
    """Sample-time recursion w[n+1] = G w[n] + H x[n], y[n] = C w[n]."""
    w = np.zeros(2) if w0 is None else np.asarray(w0, float).reshape(2)
    G, H, C = sp.G, sp.H.reshape(2), sp.C.reshape(2)
    y = np.empty(len(u) + 1)
    for n, un in enumerate(u):
        y[n] = C @ w
        w = G @ w + H * un
    y[-1] = C @ w
    return y

