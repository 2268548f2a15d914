"""Canonical realization and sample-by-sample closed-loop simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import assemble
from .controller import Controller
from .plant import SampledPlant
from .polyalg import as_poly


@dataclass(frozen=True)
class CanonicalStateSpace:
    G: np.ndarray
    H: np.ndarray
    C: np.ndarray
    D: float

    @property
    def order(self) -> int:
        return self.G.shape[0]

    def impulse_response(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[0] = 1.0
        return run_state_space(self, x)


def to_canonical(b, a) -> CanonicalStateSpace:
    """Controllable-canonical realization of b(z)/a(z).

    ``b`` is left-padded to the length of ``a``; ``a`` must be monic.
    """
    a = as_poly(a)
    b = as_poly(b)
    if a[0] != 1.0:
        raise ValueError("denominator must be monic")
    if len(b) > len(a):
        raise ValueError("improper transfer function")
    b = np.pad(b, (len(a) - len(b), 0))
    k = len(a) - 1
    G = np.zeros((k, k))
    if k:
        G[0, :] = -a[1:]
        G[1:, :-1] = np.eye(k - 1)
    H = np.zeros(k)
    if k:
        H[0] = 1.0
    C = b[1:] - b[0] * a[1:]
    return CanonicalStateSpace(G=G, H=H, C=C, D=float(b[0]))


def run_state_space(ss: CanonicalStateSpace, x) -> np.ndarray:
    w = np.zeros(ss.order)
    y = np.empty(len(x))
    for n, xn in enumerate(x):
        y[n] = ss.C @ w + ss.D * xn
        w = ss.G @ w + ss.H * xn
    return y


def strip_delay(ctrl: Controller):
    """Factor z^-1 out of Hc; returns ``(b_hat, a_hat)`` of order K_C - 1."""
    if ctrl.b_c[0] != 0.0 or ctrl.a_c[-1] != 0.0:
        raise ValueError("controller lacks realization delay")
    return ctrl.b_c[1:].copy(), ctrl.a_c[:-1].copy()


def long_division(b, a, n: int) -> np.ndarray:
    """First ``n`` impulse-response samples of b(z)/a(z) by series division."""
    a = as_poly(a)
    b = np.pad(as_poly(b), (max(0, len(a) - len(b)), 0))
    if len(b) > len(a):
        raise ValueError("improper transfer function")
    if a[0] == 0:
        raise ValueError("leading denominator coefficient is zero")
    h = np.zeros(n)
    for i in range(n):
        acc = b[i] if i < len(b) else 0.0
        for k in range(1, min(i, len(a) - 1) + 1):
            acc -= a[k] * h[i - k]
        h[i] = acc / a[0]
    return h


@dataclass(frozen=True)
class InputSignal:
    kind: str = "zero"
    amplitude: float = 1.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "step", "ramp", "custom"):
            raise ValueError(f"unknown input kind {self.kind!r}")

    @classmethod
    def from_array(cls, values) -> "InputSignal":
        return cls("custom", 1.0, tuple(float(v) for v in values))

    def sample(self, n: int, ts: float) -> np.ndarray:
        """Step is ``amplitude`` for n >= 0; ramp is ``amplitude * n * ts``.
        Custom arrays are zero-extended."""
        idx = np.arange(n)
        if self.kind == "zero":
            return np.zeros(n)
        if self.kind == "step":
            return np.full(n, float(self.amplitude))
        if self.kind == "ramp":
            return self.amplitude * idx * ts
        out = np.zeros(n)
        vals = np.asarray(self.values, float)[:n]
        out[:len(vals)] = vals
        return out


@dataclass(frozen=True)
class SimulationTrace:
    n: np.ndarray
    t: np.ndarray
    r: np.ndarray
    d: np.ndarray
    e: np.ndarray
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray

    COLUMNS = ("n", "t", "r", "d", "e", "u", "x", "y")

    def rows(self):
        return zip(*(getattr(self, c) for c in self.COLUMNS))

    def to_dict(self) -> dict:
        return {c: getattr(self, c).tolist() for c in self.COLUMNS}


def _as_samples(sig, n, ts):
    if sig is None:
        return np.zeros(n)
    if isinstance(sig, InputSignal):
        return sig.sample(n, ts)
    return InputSignal.from_array(sig).sample(n, ts)


def simulate(plant: SampledPlant, ctrl: Controller, ref=None, dist=None,
             n_samples: int = 200, perturb_delay: int = 0) -> SimulationTrace:
    """Run the feedback loop one sample at a time.

    Per sample: the delay-free controller consumes the previous error and
    emits ``u[n]``; ``x[n] = u[n] + d[n]`` enters the plant (through
    ``perturb_delay`` extra unit delays, if any); ``y[n]`` is read and the
    error ``e[n] = r[n] - y[n]`` is held for the next sample. Outputs are
    taken before each state update, so the realized loop is exactly
    ``Hc(z) Hp(z)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if perturb_delay < 0:
        raise ValueError("perturb_delay must be >= 0")
    ts = plant.ts
    r = _as_samples(ref, n_samples, ts)
    d = _as_samples(dist, n_samples, ts)
    ctl = to_canonical(*strip_delay(ctrl))
    Gp, Hp, Cp, Dp = plant.G, plant.H.reshape(-1), plant.C.reshape(-1), plant.D
    w_c = np.zeros(ctl.order)
    w_p = np.zeros(len(Hp))
    shift = [0.0] * perturb_delay
    e_hat = 0.0
    e = np.empty(n_samples)
    u = np.empty(n_samples)
    x = np.empty(n_samples)
    y = np.empty(n_samples)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n_samples):
            u[n] = ctl.C @ w_c + ctl.D * e_hat
            w_c = ctl.G @ w_c + ctl.H * e_hat
            x[n] = u[n] + d[n]
            if shift:
                shift.append(x[n])
                x_p = shift.pop(0)
            else:
                x_p = x[n]
            y[n] = Cp @ w_p + Dp * x_p
            w_p = Gp @ w_p + Hp * x_p
            e[n] = r[n] - y[n]
            e_hat = e[n]
    idx = np.arange(n_samples)
    return SimulationTrace(n=idx, t=idx * ts, r=r, d=d, e=e, u=u, x=x, y=y)


def trace_oracle(plant: SampledPlant, ctrl: Controller, ref=None, dist=None,
                 n_samples: int = 200, perturb_delay: int = 0) -> SimulationTrace:
    """Closed-loop signals by convolving inputs with closed-loop impulse
    responses obtained from polynomial long division."""
    ts = plant.ts
    r = _as_samples(ref, n_samples, ts)
    d = _as_samples(dist, n_samples, ts)
    _, closed = assemble(plant, ctrl, extra_delay=perturb_delay)

    def response(key, sig):
        h = long_division(closed.numerators[key], closed.char_poly, n_samples)
        return np.convolve(h, sig)[:n_samples]

    e = response("r->e", r) + response("d->e", d)
    u = response("r->u", r) + response("d->u", d)
    x = response("r->x", r) + response("d->x", d)
    y = response("r->y", r) + response("d->y", d)
    idx = np.arange(n_samples)
    return SimulationTrace(n=idx, t=idx * ts, r=r, d=d, e=e, u=u, x=x, y=y)


def diverges(trace: SimulationTrace, threshold: float = 1e6) -> bool:
    y = trace.y
    return bool(not np.all(np.isfinite(y)) or np.max(np.abs(y)) > threshold)


def ramp(slope: float = 1.0) -> InputSignal:
    return InputSignal("ramp", slope)


def step(amplitude: float = 1.0) -> InputSignal:
    return InputSignal("step", amplitude)


ZERO = InputSignal("zero")

__all__ = [
    "CanonicalStateSpace", "InputSignal", "SimulationTrace", "ZERO", "diverges",
    "long_division", "ramp", "run_state_space", "simulate", "step", "strip_delay",
    "to_canonical", "trace_oracle",
]
