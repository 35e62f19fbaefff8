"""Stored energy of free-fermion quantum batteries charged by a double sudden quench."""
__version__ = "0.1.0"

from .engine import (  # noqa: F401
    EnergyCurve, QuenchSpec, energy_curve, max_power, stored_energy, stored_energy_nonsc, stored_energy_sc,
)
from .kernels import BACKEND  # noqa: F401
from .oracle import oracle_stored_energy  # noqa: F401
from .spectral import BzGrid, DVectorModel, NambuModel, ThermalSpec  # noqa: F401
