import numpy as np
import pytest
from hypothesis import settings

from aeris.distributions import RngHandle
from aeris.geometry import CENTER, link_spreads
from aeris.matching import HopPairParams

# property tests draw the same examples on every run
settings.register_profile("repeatable", derandomize=True, database=None)
settings.load_profile("repeatable")


def nominal_hop(m=2.0, alpha=2.5, beta=1.0, eta=2.7, position=CENTER):
    """Symmetric hop pair with spreads from the RIS position."""
    om_s, om_d = link_spreads(position, eta)
    return HopPairParams.from_values(m, m, om_s, om_d, alpha, alpha, beta, beta)


def cascade_draws(hop, size, seed=0):
    """Independent draws of one element's cascade ``G_S L_S G_D L_D``."""
    g = RngHandle(seed).generator
    s, d = hop.nakagami_s, hop.nakagami_d
    gs = np.sqrt(g.gamma(s.m, s.omega / s.m, size))
    gd = np.sqrt(g.gamma(d.m, d.omega / d.m, size))
    ls = hop.ig_s.beta / g.standard_gamma(hop.ig_s.alpha, size)
    ld = hop.ig_d.beta / g.standard_gamma(hop.ig_d.alpha, size)
    return gs * ls * gd * ld


@pytest.fixture
def hop_nominal():
    return nominal_hop()
