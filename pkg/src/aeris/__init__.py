"""Outage analysis, Monte-Carlo simulation and neural OP prediction for aerial-RIS links.

Channels are Nakagami-m small-scale fading times inverse-Gamma shadowing
on both hops. Submodules:

``specfun``       Bessel K, Gauss-Laguerre rules, Phi_2 series, Laplace inversion
``distributions`` parameter types, densities, samplers, seeded streams
``matching``      exact moments and Gamma fits of the per-element factors
``mgfit``         mixture-Gamma model of one element
``analytic``      CDF of the element sum and outage probability
``geometry``      RIS placement and path loss
``simulator``     Monte-Carlo OP for the RIS and relay baselines
``dataset``       labelled corpus generation and I/O
``mlp``           feed-forward regressor, training and persistence
``cli``           command-line entry point
"""

__version__ = "0.1.0"

from .analytic import SystemConfig, outage_curve, outage_probability  # noqa: E402
from .matching import HopPairParams  # noqa: E402
from .simulator import TrialBudget, estimate_op  # noqa: E402

__all__ = [
    "__version__",
    "HopPairParams",
    "SystemConfig",
    "TrialBudget",
    "estimate_op",
    "outage_curve",
    "outage_probability",
]
