"""Controller transfer function container shared by both design methods."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .polyalg import as_poly, poly_roots

METHODS = ("poly3", "poly4", "freq_pd", "freq_pid")


class DesignError(ValueError):
    """A design request that has no solution (singular constraint system)."""


@dataclass(frozen=True)
class Controller:
    """Hc(z) = b_c(z) / a_c(z), including the one-sample realization delay.

    ``b_c`` and ``a_c`` have equal length (descending powers of z);
    ``b_c[0] == 0`` and ``a_c`` is monic.
    """

    b_c: np.ndarray
    a_c: np.ndarray
    method: str
    tuning: dict = field(default_factory=dict)

    def __post_init__(self):
        b = as_poly(self.b_c)
        a = as_poly(self.a_c)
        if len(b) != len(a):
            raise ValueError("b_c and a_c must have equal length")
        if a[0] != 1.0:
            raise ValueError("a_c must be monic")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "b_c", b)
        object.__setattr__(self, "a_c", a)

    @property
    def order(self) -> int:
        return len(self.a_c) - 1

    @property
    def poles(self) -> np.ndarray:
        return poly_roots(self.a_c).roots

    @property
    def zeros(self) -> np.ndarray:
        nz = np.flatnonzero(self.b_c)
        if nz.size == 0 or nz[0] == len(self.b_c) - 1:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.b_c).roots

    @property
    def is_stable(self) -> bool:
        """Whether every controller pole lies strictly inside the unit circle."""
        return bool(np.all(np.abs(self.poles) < 1.0))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "tuning": dict(self.tuning),
            "b_c": [float(v) for v in self.b_c],
            "a_c": [float(v) for v in self.a_c],
            "controller_poles": _complex_list(self.poles),
            "controller_zeros": _complex_list(self.zeros),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Controller":
        return cls(
            b_c=np.array(data["b_c"], dtype=float),
            a_c=np.array(data["a_c"], dtype=float),
            method=data["method"],
            tuning=dict(data.get("tuning", {})),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _complex_list(values) -> list[dict]:
    return [{"re": float(np.real(v)), "im": float(np.imag(v))} for v in values]
