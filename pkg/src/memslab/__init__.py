"""Entanglement, Bell and teleportation-fidelity functionals for two-qubit MEMS."""

from .ensemble import generate_ensemble, gisin_bound
from .families import FamilyId, closed_forms, family_spec, make_state
from .measures import (
    bell_generic,
    c_star,
    concurrence_general,
    is_entangled,
    is_mems,
    linear_entropy,
    measure,
    opt_fidelity,
)

__version__ = "0.1.0"
