"""Tuning sweeps that tabulate robustness metrics, one row per tuning."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import design_freq, design_poly
from .analysis import MarginsReport, margins
from .controller import DesignError
from .plant import SampledPlant

COLUMNS = ("tuning", "phase_margin_deg", "delay_margin_smp", "r0", "r1", "note")

# Tuning grids of the four reference tables (nominal plant).
TABLE_GRIDS = {
    1: ("poly", {"with_integrator": False}, np.round(np.arange(0.20, 0.7001, 0.05), 10)),
    2: ("poly", {"with_integrator": True}, np.round(np.arange(0.20, 0.7001, 0.05), 10)),
    3: ("freq", {"structure": "pd", "phi_deg": 30.0}, np.round(np.linspace(0.100, 0.020, 11), 10)),
    4: ("freq", {"structure": "pid", "phi_deg": 30.0}, np.round(np.linspace(0.020, 0.002, 11), 10)),
}


@dataclass(frozen=True)
class SweepRow:
    tuning: float
    report: Optional[MarginsReport] = None
    error: Optional[str] = None

    @property
    def note(self) -> str:
        if self.error:
            return f"error: {self.error}"
        flags = []
        if self.report.nominal_unstable:
            flags.append("nominal_unstable")
        if self.report.perturbed_unstable:
            flags.append("perturbed_unstable")
        if self.report.omega_cross is None:
            flags.append("no_crossover")
        if self.report.recrosses:
            flags.append("recrosses")
        return ";".join(flags)

    def values(self) -> tuple:
        rep = self.report
        if rep is None:
            return (self.tuning, None, None, None, None, self.note)
        return (self.tuning, rep.phase_margin_deg, rep.delay_margin, rep.r0, rep.r1, self.note)

    def to_dict(self) -> dict:
        return dict(zip(COLUMNS, self.values()))


def parse_grid(text: str) -> list[float]:
    """``"a:step:b"`` (inclusive, either direction) or a comma list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        start, step, stop = (float(v) for v in text.split(":"))
        if step == 0:
            raise ValueError("grid step must be nonzero")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(max(count, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


def _row_poly(plant, p, with_integrator):
    try:
        ctrl = design_poly.design(plant, design_poly.PolePlacementSpec(p, with_integrator))
        return SweepRow(p, margins(plant, ctrl))
    except (DesignError, ValueError) as exc:
        return SweepRow(p, error=str(exc))


def _row_freq(plant, f, structure, phi_deg):
    try:
        spec = design_freq.FreqSpec.from_degrees(f, phi_deg, structure)
        return SweepRow(f, margins(plant, design_freq.design(plant, spec)))
    except (DesignError, ValueError) as exc:
        return SweepRow(f, error=str(exc))


def sweep(plant: SampledPlant, method: str, grid, jobs: int = 1, **options) -> list[SweepRow]:
    """Rows are independent; ``jobs > 1`` evaluates them on a thread pool."""
    if method == "poly":
        def task(v):
            return _row_poly(plant, v, bool(options.get("with_integrator", False)))
    elif method == "freq":
        def task(v):
            return _row_freq(plant, v, options.get("structure", "pd"),
                             float(options.get("phi_deg", 30.0)))
    else:
        raise ValueError(f"unknown method {method!r}")
    grid = [float(v) for v in grid]
    if jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(task, grid))
    return [task(v) for v in grid]


def table(plant: SampledPlant, number: int, jobs: int = 1) -> list[SweepRow]:
    method, options, grid = TABLE_GRIDS[number]
    return sweep(plant, method, grid, jobs=jobs, **options)
