"""Closed-loop assembly and robustness metrics.

The loop is ``L(z) = Bc Bp / (Ac Ap)``. Every closed-loop map shares the
characteristic polynomial ``Ac Ap + Bc Bp``; the delay-perturbed plant
``Hp / z`` gives ``z Ac Ap + Bc Bp``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .controller import Controller
from .plant import SampledPlant
from .polyalg import poly_add, poly_eval, poly_mul, poly_roots

GRID_POINTS = 4096
GRID_START = 1e-4 * math.pi
CROSSOVER_XTOL = 1e-12
PEAK_XTOL = 1e-10


def default_grid(n: int = GRID_POINTS) -> np.ndarray:
    return np.geomspace(GRID_START, math.pi, n)


@dataclass(frozen=True)
class LoopFunction:
    num: np.ndarray
    den: np.ndarray

    def __call__(self, omega):
        return freq_response(self.num, self.den, omega)

    def scaled(self, gain: float) -> "LoopFunction":
        return LoopFunction(self.num * gain, self.den)


@dataclass(frozen=True)
class ClosedLoop:
    """Shared denominator plus the numerator of every input/output map.

    Keys of ``numerators`` are ``"r->e"``, ``"r->u"``, ``"r->x"``, ``"r->y"``,
    ``"d->x"``, ``"d->y"``, ``"d->e"`` and ``"d->u"``.
    """

    char_poly: np.ndarray
    numerators: dict

    def transfer(self, key: str):
        return self.numerators[key], self.char_poly


def _pad_to(p, n):
    return np.pad(p, (n - len(p), 0))


def assemble(plant: SampledPlant, ctrl: Controller, extra_delay: int = 0):
    """Build the loop function and closed loop; ``extra_delay`` samples of
    unmodelled plant delay multiply ``Ap`` by ``z**extra_delay``."""
    a_p = np.pad(plant.a, (0, extra_delay))
    ac_ap = poly_mul(ctrl.a_c, a_p)
    bc_bp = poly_mul(ctrl.b_c, plant.b)
    char_poly = poly_add(ac_ap, bc_bp)
    n = len(char_poly)
    ac_bp = poly_mul(ctrl.a_c, plant.b)
    bc_ap = poly_mul(ctrl.b_c, a_p)
    numerators = {
        "r->e": ac_ap,
        "r->u": bc_ap,
        "r->x": bc_ap,
        "r->y": bc_bp,
        "d->x": ac_ap,
        "d->y": ac_bp,
        "d->e": -ac_bp,
        "d->u": -bc_bp,
    }
    numerators = {k: _pad_to(v, n) for k, v in numerators.items()}
    return LoopFunction(_pad_to(bc_bp, n), ac_ap), ClosedLoop(char_poly, numerators)


def freq_response(num, den, omega):
    """Evaluate num/den on the unit circle; poles on the grid give inf."""
    z = np.exp(1j * np.asarray(omega, dtype=float))
    n = poly_eval(num, z)
    d = poly_eval(den, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(d == 0, complex(np.inf, 0.0), n / np.where(d == 0, 1.0, d))
    return out[()] if np.ndim(out) == 0 else out


def sensitivity(loop: LoopFunction, omega):
    value = loop(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.isinf(value), 0.0, 1.0 / (1.0 + value))


def complementary_sensitivity(loop: LoopFunction, omega):
    value = loop(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.isinf(value), 1.0, value / (1.0 + value))


def gain_crossover(loop: LoopFunction, grid=None):
    """First frequency at which |L| falls through 1, or None.

    Returns ``(omega, recrosses)`` where ``recrosses`` flags that |L| rises
    above 1 again somewhere above the crossover.
    """
    grid = default_grid() if grid is None else np.asarray(grid, float)
    mag = np.abs(loop(grid))
    above = mag >= 1.0
    falls = np.flatnonzero(above[:-1] & ~above[1:])
    if falls.size == 0:
        return None, False
    i = int(falls[0])
    omega = optimize.bisect(lambda w: abs(loop(w)) - 1.0, grid[i], grid[i + 1],
                            xtol=CROSSOVER_XTOL, rtol=4 * np.finfo(float).eps)
    recrosses = bool(np.any(above[i + 1:]))
    return float(omega), recrosses


def sensitivity_peak(loop: LoopFunction, grid=None):
    """Maximum of |S| on (0, pi], grid search refined by golden section."""
    grid = default_grid() if grid is None else np.asarray(grid, float)
    mag = np.abs(sensitivity(loop, grid))
    i = int(np.argmax(mag))
    if 0 < i < len(grid) - 1:
        res = optimize.minimize_scalar(
            lambda w: -abs(sensitivity(loop, w)),
            bracket=(grid[i - 1], grid[i], grid[i + 1]),
            method="golden",
            tol=PEAK_XTOL,
        )
        if -res.fun >= mag[i]:
            return float(-res.fun), float(res.x)
    return float(mag[i]), float(grid[i])


def max_pole_radius(poly) -> float:
    return poly_roots(poly).max_radius


@dataclass(frozen=True)
class MarginsReport:
    omega_cross: Optional[float]
    phase_margin: Optional[float]
    delay_margin: Optional[float]
    r0: float
    r1: float
    sens_peak: float
    sens_peak_omega: float
    recrosses: bool = False

    @property
    def phase_margin_deg(self) -> Optional[float]:
        return None if self.phase_margin is None else math.degrees(self.phase_margin)

    @property
    def f_cross(self) -> Optional[float]:
        return None if self.omega_cross is None else self.omega_cross / (2 * math.pi)

    @property
    def nominal_unstable(self) -> bool:
        return self.r0 >= 1.0

    @property
    def perturbed_unstable(self) -> bool:
        return self.r1 > 1.0

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(
            phase_margin_deg=self.phase_margin_deg,
            f_cross=self.f_cross,
            nominal_unstable=self.nominal_unstable,
            perturbed_unstable=self.perturbed_unstable,
        )
        return out


def wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]."""
    y = math.remainder(x, 2 * math.pi)
    return math.pi if y == -math.pi else y


def margins(plant: SampledPlant, ctrl: Controller, grid=None) -> MarginsReport:
    loop, closed = assemble(plant, ctrl)
    _, perturbed = assemble(plant, ctrl, extra_delay=1)
    omega, recrosses = gain_crossover(loop, grid)
    if omega is None:
        phase = delay = None
    else:
        phase = wrap_angle(math.pi + float(np.angle(loop(omega))))
        delay = phase / omega
    peak, peak_omega = sensitivity_peak(loop, grid)
    return MarginsReport(
        omega_cross=omega,
        phase_margin=phase,
        delay_margin=delay,
        r0=max_pole_radius(closed.char_poly),
        r1=max_pole_radius(perturbed.char_poly),
        sens_peak=peak,
        sens_peak_omega=peak_omega,
        recrosses=recrosses,
    )


def nyquist_curve(loop: LoopFunction, grid=None):
    """Loop response samples plus crossover and sensitivity-peak markers.

    Returns a dict with ``omega``, ``re``, ``im`` arrays and ``markers``
    mapping ``"crossover"`` / ``"sens_peak"`` to ``(omega, re, im)`` or None.
    """
    grid = default_grid() if grid is None else np.asarray(grid, float)
    values = loop(grid)
    markers = {}
    omega, _ = gain_crossover(loop, grid)
    markers["crossover"] = None if omega is None else _point(loop, omega)
    _, peak_omega = sensitivity_peak(loop, grid)
    markers["sens_peak"] = _point(loop, peak_omega)
    return {"omega": grid, "re": values.real, "im": values.imag, "markers": markers}


def _point(loop, omega):
    v = complex(loop(omega))
    return (float(omega), v.real, v.imag)
