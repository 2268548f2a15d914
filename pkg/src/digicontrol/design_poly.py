"""Pole placement by solving the Diophantine equation Ac*Ap + Bc*Bp = Af.

The controller denominator is ``a_c = abar * F`` where ``F`` is the fixed
factor ``z`` (one-sample delay) or ``z (z - 1)`` (delay plus integrator) and
``abar = [1, abar1, abar2]`` is unknown. The numerator has ``b_c[0] = 0`` and
every remaining coefficient is unknown. Stacking the convolution columns of
each unknown gives a square linear system once the trivially satisfied
leading row is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controller import Controller, DesignError
from .plant import SampledPlant
from .polyalg import (SingularSystemError, binomial_power, poly_add, poly_mul,
                      solve_linear_real)

RESIDUAL_TOL = 1e-9
_FREE_DENOMINATOR = 2  # (z - alpha0)(z - alpha1)


@dataclass(frozen=True)
class PolePlacementSpec:
    p: float
    with_integrator: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must lie in [0, 1), got {self.p}")

    @property
    def closed_loop_order(self) -> int:
        return 6 if self.with_integrator else 5

    @property
    def fixed_factor(self) -> np.ndarray:
        return np.array([1.0, -1.0, 0.0]) if self.with_integrator else np.array([1.0, 0.0])


def build_target(spec: PolePlacementSpec, plant_order: int = 2) -> np.ndarray:
    if plant_order != 2:
        raise ValueError("only second-order plants are supported")
    return binomial_power(spec.p, spec.closed_loop_order)


def _placed(poly, start, length):
    col = np.zeros(length)
    col[start:start + len(poly)] = poly
    return col


def build_diophantine_system(plant: SampledPlant, spec: PolePlacementSpec):
    """Return ``(X, v)`` with unknowns ``[abar1, abar2, b_c1, ..., b_cK]``."""
    if plant.b[0] != 0 or plant.a[0] != 1:
        raise ValueError("plant must be strictly proper with a monic denominator")
    target = build_target(spec, plant.order)
    n = len(target)
    pre = poly_mul(plant.a, spec.fixed_factor)
    n_num = n - 1 - plant.order  # b_c1 .. b_cK with K = controller order
    cols = [_placed(pre, j, n) for j in range(1, _FREE_DENOMINATOR + 1)]
    cols += [_placed(plant.b, k, n) for k in range(1, n_num + 1)]
    X = np.column_stack(cols)
    v = target - _placed(pre, 0, n)
    # row 0 reads 1 = 1 for a monic pre-factor and strictly proper plant
    return X[1:], v[1:]


def closed_loop_polynomial(plant: SampledPlant, ctrl: Controller) -> np.ndarray:
    return poly_add(poly_mul(ctrl.a_c, plant.a), poly_mul(ctrl.b_c, plant.b))


def design(plant: SampledPlant, spec: PolePlacementSpec) -> Controller:
    X, v = build_diophantine_system(plant, spec)
    try:
        mu = solve_linear_real(X, v)
    except SingularSystemError as exc:
        raise DesignError("unreachable pole placement") from exc
    abar = np.concatenate(([1.0], mu[:_FREE_DENOMINATOR]))
    a_c = poly_mul(abar, spec.fixed_factor)
    b_c = np.concatenate(([0.0], mu[_FREE_DENOMINATOR:]))
    ctrl = Controller(
        b_c=b_c,
        a_c=a_c,
        method="poly4" if spec.with_integrator else "poly3",
        tuning={"p": float(spec.p), "with_integrator": bool(spec.with_integrator)},
    )
    residual = np.max(np.abs(closed_loop_polynomial(plant, ctrl) - build_target(spec)))
    if residual > RESIDUAL_TOL:
        raise DesignError(f"Diophantine residual {residual:.3e} exceeds tolerance")
    return ctrl
