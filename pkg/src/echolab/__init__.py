"""Qubit coherence signals for a dispersively coupled damped nanomechanical resonator.

Closed-form Ramsey and echo signals live in :mod:`echolab.analytic`; two
independent numerical oracles (:mod:`echolab.fock`, :mod:`echolab.gaussian`)
check them.  :mod:`echolab.sweep` and the ``echolab`` command drive parameter
sweeps.
"""

from .kernels import COMPILED
from .model import (
    INFINITE,
    DerivedParams,
    DeviceParams,
    ParameterError,
    PulseKind,
    PulseSchedule,
    derive,
    validate_regime,
)

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "INFINITE",
    "DerivedParams",
    "DeviceParams",
    "ParameterError",
    "PulseKind",
    "PulseSchedule",
    "derive",
    "validate_regime",
    "__version__",
]
