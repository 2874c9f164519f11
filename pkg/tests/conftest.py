import math

import pytest
from hypothesis import HealthCheck, settings

from echolab.model import INFINITE, DeviceParams

settings.register_profile(
    "echolab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("echolab")


def reference_device(**kw) -> DeviceParams:
    """5 GHz qubit, 50 MHz resonator, kappa = 0.2, alpha0 = 25, nbar = mbar = 10."""
    base = dict(
        qubit_splitting_hz=5e9,
        mech_freq_hz=50e6,
        coupling_kappa=0.2,
        q_factor=INFINITE,
        nbar=10.0,
        mbar=10.0,
        t2_s=0.5e-6,
        alpha0=25.0,
    )
    base.update(kw)
    return DeviceParams(**base)


def desk_device(gamma_ratio=0.0, nbar=1.0, mbar=None, alpha0=2.0, t2_s=10e-6) -> DeviceParams:
    """Scaled device with omega = 10 omega1 and gamma = gamma_ratio * omega1."""
    q = INFINITE if gamma_ratio == 0 else 10.0 / gamma_ratio
    return DeviceParams(
        qubit_splitting_hz=20e6,
        mech_freq_hz=1e6,
        coupling_kappa=1.0,
        q_factor=q,
        nbar=nbar,
        mbar=nbar if mbar is None else mbar,
        t2_s=t2_s,
        alpha0=alpha0,
    )


@pytest.fixture
def ref():
    return reference_device()


@pytest.fixture
def desk():
    return desk_device


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def close(a, b, tol):
    return abs(a - b) <= tol or math.isclose(a, b, rel_tol=tol)
