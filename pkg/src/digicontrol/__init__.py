"""Digital controller design for a sampled first-order-lag-plus-integrator plant.

Two design routes (pole placement and phase-margin fitting) share a common
analysis layer (margins, closed-loop pole radii) and a sample-by-sample
simulator.
"""

from .analysis import MarginsReport, assemble, margins
from .controller import Controller, DesignError
from .design_freq import FreqSpec
from .design_poly import PolePlacementSpec
from .plant import ContinuousPlant, SampledPlant, discretize
from .polyalg import SingularSystemError
from .realize import InputSignal, simulate, trace_oracle

__version__ = "0.1.0"


def nominal_plant(sigma: float = -10.0, fs: float = 100.0) -> SampledPlant:
    return discretize(ContinuousPlant(sigma), fs)


__all__ = [
    "Controller", "ContinuousPlant", "DesignError", "FreqSpec", "InputSignal",
    "MarginsReport", "PolePlacementSpec", "SampledPlant", "SingularSystemError",
    "assemble", "discretize", "margins", "nominal_plant", "simulate", "trace_oracle",
]
