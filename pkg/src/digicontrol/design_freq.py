"""Phase-margin fitting at a chosen gain-crossover frequency.

The controller is a one-sample delay times a weighted sum of fixed
components ``psi_k(z)``. The weights ``c_k`` are fitted so that the loop
``L = Hc * Hp`` equals ``exp(i (phi - pi))`` at ``+omega`` (and its conjugate
at ``-omega``, which keeps the weights real). The PID structure spends its
third weight on a null of ``L`` at the Nyquist frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import Controller, DesignError
from .plant import SampledPlant
from .polyalg import SingularSystemError, poly_add, poly_eval, poly_mul, solve_linear_complex

POSTCONDITION_TOL = 1e-10
REALNESS_TOL = 1e-9
_SINGULAR_TOL = 1e-300

PROPORTIONAL = (np.array([1.0]), np.array([1.0]))
DERIVATIVE = (np.array([1.0, -1.0]), np.array([1.0, 0.0]))
INTEGRAL = (np.array([1.0, 0.0]), np.array([1.0, -1.0]))

COMPONENTS = {
    "pd": (PROPORTIONAL, DERIVATIVE),
    "pid": (PROPORTIONAL, DERIVATIVE, INTEGRAL),
}


@dataclass(frozen=True)
class FreqSpec:
    f_tilde: float
    phi_tilde: float
    structure: str = "pd"

    def __post_init__(self):
        if not 0.0 < self.f_tilde < 0.5:
            raise ValueError(f"f_tilde must lie in (0, 0.5), got {self.f_tilde}")
        if not 0.0 < self.phi_tilde < math.pi:
            raise ValueError(f"phi_tilde must lie in (0, pi), got {self.phi_tilde}")
        if self.structure not in COMPONENTS:
            raise ValueError(f"structure must be 'pd' or 'pid', got {self.structure!r}")

    @classmethod
    def from_degrees(cls, f_tilde: float, phi_deg: float, structure: str = "pd") -> "FreqSpec":
        return cls(f_tilde, math.radians(phi_deg), structure)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.f_tilde

    @property
    def components(self):
        return COMPONENTS[self.structure]

    @property
    def target(self) -> complex:
        return complex(np.exp(1j * (self.phi_tilde - math.pi)))


def component_loop_response(plant: SampledPlant, psi, omega: float) -> complex:
    """L_k(omega) = exp(-i omega) * Hp(exp(i omega)) * psi_k(exp(i omega))."""
    z = np.exp(1j * omega)
    num = poly_mul(plant.b, psi[0])
    den = poly_mul(poly_mul(plant.a, psi[1]), [1.0, 0.0])
    d = poly_eval(den, z)
    if abs(d) <= _SINGULAR_TOL or abs(d) < 1e-14 * max(1.0, abs(poly_eval(num, z))):
        raise ValueError(f"response singular at omega={omega}")
    return complex(poly_eval(num, z) / d)


def constraint_system(plant: SampledPlant, spec: FreqSpec):
    freqs = [-spec.omega, spec.omega]
    rhs = [np.conj(spec.target), spec.target]
    if spec.structure == "pid":
        freqs.append(math.pi)
        rhs.append(0.0)
    L = np.array([[component_loop_response(plant, psi, w) for psi in spec.components]
                  for w in freqs])
    return L, np.array(rhs, dtype=complex)


def expand_components(weights, components):
    """Clear denominators of (1/z) * sum_k c_k psi_k(z).

    Returns ``(b, a)`` with a monic common denominator ``z * prod(den_k)``
    (repeated denominators included once).
    """
    dens = []
    for _, den in components:
        if not any(len(d) == len(den) and np.array_equal(d, den) for d in dens):
            dens.append(den)
    common = np.array([1.0, 0.0])
    for d in dens:
        common = poly_mul(common, d)
    b = np.zeros(1)
    for c, (num, den) in zip(weights, components):
        rest = np.array([1.0])
        for d in dens:
            if not (len(d) == len(den) and np.array_equal(d, den)):
                rest = poly_mul(rest, d)
        b = poly_add(b, c * poly_mul(num, rest))
    b = np.pad(b, (len(common) - len(b), 0))
    return b, common


def design(plant: SampledPlant, spec: FreqSpec) -> Controller:
    L, rhs = constraint_system(plant, spec)
    try:
        c = solve_linear_complex(L, rhs)
    except SingularSystemError as exc:
        raise DesignError("frequency constraints unreachable for this structure") from exc
    imag = np.max(np.abs(c.imag))
    if imag > REALNESS_TOL * np.max(np.abs(c)):
        raise RuntimeError(f"controller weights are not real (max |Im| = {imag:.3e})")
    c = c.real
    if spec.structure == "pd":
        c0, c1 = c
        b_c = np.array([0.0, c0 + c1, -c1])
        a_c = np.array([1.0, 0.0, 0.0])
    else:
        c0, c1, c2 = c
        b_c = np.array([0.0, c0 + c1 + c2, -c0 - 2.0 * c1, c1])
        a_c = np.array([1.0, -1.0, 0.0, 0.0])
    ctrl = Controller(
        b_c=b_c,
        a_c=a_c,
        method=f"freq_{spec.structure}",
        tuning={
            "f_tilde": float(spec.f_tilde),
            "phi_tilde_deg": math.degrees(spec.phi_tilde),
            "structure": spec.structure,
            "weights": [float(v) for v in c],
        },
    )
    _check_postconditions(plant, ctrl, spec)
    return ctrl


def loop_value(plant: SampledPlant, ctrl: Controller, omega: float) -> complex:
    z = np.exp(1j * omega)
    num = poly_eval(poly_mul(ctrl.b_c, plant.b), z)
    return complex(num / poly_eval(poly_mul(ctrl.a_c, plant.a), z))


def _check_postconditions(plant, ctrl, spec):
    value = loop_value(plant, ctrl, spec.omega)
    phase_err = np.angle(value / spec.target)
    if abs(abs(value) - 1.0) > POSTCONDITION_TOL or abs(phase_err) > POSTCONDITION_TOL:
        raise RuntimeError(f"loop misses its crossover target: L = {value}")
    if spec.structure == "pid" and abs(loop_value(plant, ctrl, math.pi)) > POSTCONDITION_TOL:
        raise RuntimeError("Nyquist null not achieved")


def delay_margin(phase_margin: float, omega: float) -> float:
    """Delay margin in samples from phase margin (rad) and crossover (rad/sample)."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return phase_margin / omega
