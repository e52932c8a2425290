"""Effective rate of RIS-aided links under phase-estimation error and random receiver location."""

__version__ = "0.1.0"

from .channel import QoSConfig, SystemConfig  # noqa: E402
from .effrate import (RateEstimate, effective_rate_asymptotic,  # noqa: E402
                      effective_rate_closed, effective_rate_phase_only,
                      effective_rate_quadrature)
from .montecarlo import McRequest, McResult, Scenario, run_mc  # noqa: E402
from .specfun import MeijerGSpec, meijer_g  # noqa: E402

__all__ = [
    "QoSConfig", "SystemConfig", "RateEstimate", "effective_rate_asymptotic",
    "effective_rate_closed", "effective_rate_phase_only", "effective_rate_quadrature",
    "McRequest", "McResult", "Scenario", "run_mc", "MeijerGSpec", "meijer_g",
]
