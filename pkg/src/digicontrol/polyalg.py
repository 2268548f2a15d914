"""Polynomial arithmetic, root finding and small dense linear solves.

Polynomials are 1-D numpy arrays of coefficients in *descending* powers
of z: ``p[0]`` multiplies ``z**K`` and ``p[-1]`` is the constant term.
Trailing zeros are kept (they are roots at z = 0); the degree is
structural, ``len(p) - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

__all__ = [
    "SingularSystemError",
    "RootSet",
    "as_poly",
    "poly_mul",
    "poly_add",
    "poly_sub",
    "binomial_power",
    "poly_eval",
    "poly_roots",
    "poly_from_roots",
    "solve_linear",
    "solve_linear_real",
    "solve_linear_complex",
]

PIVOT_TOL = 1e-12
LEADING_TOL = 1e-14


class SingularSystemError(ValueError):
    """Raised when a linear system is singular within the pivot tolerance."""


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual: float

    def __len__(self):
        return len(self.roots)

    @property
    def max_radius(self) -> float:
        return float(np.max(np.abs(self.roots))) if len(self.roots) else 0.0


def as_poly(p, dtype=float) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p, dtype=dtype))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("polynomial must be a non-empty 1-D coefficient sequence")
    return arr


def poly_mul(a, b) -> np.ndarray:
    a, b = as_poly(a, None), as_poly(b, None)
    return np.convolve(a, b)


def _align(a, b):
    n = max(len(a), len(b))
    return np.pad(a, (n - len(a), 0)), np.pad(b, (n - len(b), 0))


def poly_add(a, b) -> np.ndarray:
    a, b = _align(as_poly(a, None), as_poly(b, None))
    return a + b


def poly_sub(a, b) -> np.ndarray:
    a, b = _align(as_poly(a, None), as_poly(b, None))
    return a - b


def binomial_power(p: float, order: int) -> np.ndarray:
    """Coefficients of ``(z - p)**order`` from the signed binomial formula."""
    if order < 0:
        raise ValueError("order must be non-negative")
    return np.array([comb(order, k) * (-p) ** k for k in range(order + 1)], dtype=float)


def poly_eval(p, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    p = as_poly(p, None)
    z = np.asarray(z)
    acc = np.zeros_like(z, dtype=np.result_type(p.dtype, z.dtype, float)) + p[0]
    for c in p[1:]:
        acc = acc * z + c
    return acc[()] if acc.ndim == 0 else acc


def _strip_leading(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(p != 0)
    if nz.size == 0:
        return p[-1:]
    return p[nz[0]:]


def poly_roots(p) -> RootSet:
    """All roots via eigenvalues of the companion matrix.

    Only exact leading zeros are stripped. A leading coefficient that is
    nonzero but negligible relative to the rest is rejected: it signals a
    malformed polynomial rather than a lower degree.
    """
    p = _strip_leading(as_poly(p, None))
    if len(p) < 2:
        raise ValueError("constant polynomial has no roots")
    scale = np.max(np.abs(p))
    if abs(p[0]) < LEADING_TOL * scale:
        raise ValueError("leading coefficient is numerically zero")
    monic = p / p[0]
    k = len(monic) - 1
    companion = np.zeros((k, k), dtype=monic.dtype)
    companion[0, :] = -monic[1:]
    companion[1:, :-1] = np.eye(k - 1)
    roots = np.linalg.eigvals(companion)
    if np.isrealobj(p):
        # eigvals of a real matrix already pairs conjugates; order them stably
        roots = roots[np.lexsort((roots.imag, roots.real))]
    residual = float(np.max(np.abs(poly_eval(p, roots))))
    return RootSet(roots=roots, residual=residual)


def poly_from_roots(roots, gain: float = 1.0) -> np.ndarray:
    out = np.array([gain], dtype=complex)
    for r in np.atleast_1d(roots):
        out = np.convolve(out, [1.0, -r])
    if np.allclose(out.imag, 0.0, atol=1e-12 * max(1.0, np.max(np.abs(out)))):
        return out.real
    return out


def solve_linear(M, v) -> np.ndarray:
    """Gaussian elimination with partial pivoting, real or complex.

    Raises SingularSystemError when a pivot falls below ``PIVOT_TOL``
    relative to the largest entry of ``M``.
    """
    M = np.asarray(M)
    v = np.asarray(v)
    dtype = np.result_type(M.dtype, v.dtype, float)
    A = np.array(M, dtype=dtype)
    b = np.array(v, dtype=dtype).reshape(-1)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n or b.shape[0] != n:
        raise ValueError(f"shape mismatch: M {A.shape}, v {b.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularSystemError("singular design system")
    for col in range(n):
        piv = col + int(np.argmax(np.abs(A[col:, col])))
        if abs(A[piv, col]) <= PIVOT_TOL * scale:
            raise SingularSystemError("singular design system")
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        factors = A[col + 1:, col] / A[col, col]
        A[col + 1:, col:] -= np.outer(factors, A[col, col:])
        b[col + 1:] -= factors * b[col]
    x = np.empty(n, dtype=dtype)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


def solve_linear_real(M, v) -> np.ndarray:
    M, v = np.asarray(M), np.asarray(v)
    if np.iscomplexobj(M) or np.iscomplexobj(v):
        raise TypeError("solve_linear_real expects real inputs")
    return solve_linear(M, v)


def solve_linear_complex(M, v) -> np.ndarray:
    return solve_linear(np.asarray(M, dtype=complex), np.asarray(v, dtype=complex))
