"""Two-species Lotka-Volterra competition under Markovian environmental switching."""

__version__ = "0.1.0"

from .env_model import (
    CriticalIntervals,
    EnvPair,
    Environment,
    PortraitTag,
    PortraitType,
    SwitchRates,
    classify,
    intervals,
    mix,
    st_to_uv,
    uv_to_st,
    validate_pair,
)
from .errors import InputError, LVSwitchError, NumericalError
from .geometry import (
    ConicG,
    SupportRegion,
    TangencySet,
    conic_coeffs,
    contains,
    equilibrium_curve,
    gamma_prime,
    support_region,
    tangency_set,
)
from .invasion import (
    InvaderSpec,
    ResidentSpec,
    beta_convex_order_check,
    invasion_rate,
    invasion_rate_direct,
    lambda_xy,
    mc_invasion,
    phi_build,
    phi_expectation,
    species_roles,
)
from .pdmp import Trajectory, occupation_stats, simulate_pdmp, unstable_manifold
from .regimes import Regime, RegimeMap, critical_curve, critical_t, regime_map

__all__ = [name for name in dir() if not name.startswith("_")]
