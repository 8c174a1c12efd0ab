"""Planning and simulation tools for Bell tests with cosmic setting sources."""

__version__ = "0.1.0"

from .cosmology import CosmologyParams, comoving_distance, conformal_time, hubble_rate  # noqa: E402,F401
from .causal import (  # noqa: E402,F401
    SkyPosition,
    angular_separation,
    cmb_min_separation,
    emission_event,
    lightcones_disjoint,
    threshold_redshift,
)
