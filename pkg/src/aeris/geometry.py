"""RIS placement inside the unit cylinder and distance-based path loss.

The cylinder has radius 0.5 and height 1, its axis through the origin.
Source and destination sit on the ground at ``(-0.5, 0, 0)`` and
``(0.5, 0, 0)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .distributions import RngHandle
from .errors import DomainError

__all__ = [
    "CylindricalPosition",
    "CartesianPosition",
    "SOURCE",
    "DESTINATION",
    "CENTER",
    "sample_position",
    "to_cartesian",
    "distance",
    "path_loss_spread",
    "link_spreads",
]

MIN_DISTANCE = 1e-6


class CylindricalPosition(NamedTuple):
    azimuth: float
    radial: float
    height: float


class CartesianPosition(NamedTuple):
    x: float
    y: float
    z: float


SOURCE = CartesianPosition(-0.5, 0.0, 0.0)
DESTINATION = CartesianPosition(0.5, 0.0, 0.0)
# symmetric reference placement: on the axis, half-way up
CENTER = CylindricalPosition(0.0, 0.0, 0.5)


def sample_position(rng: RngHandle, size=None) -> CylindricalPosition:
    """Uniform-in-volume point: ``omega ~ U(0, 2pi)``, ``r = 0.5 sqrt(U)``, ``h ~ U(0, 1)``.

    With ``size`` set, each field is an ndarray of that shape.
    """
    g = rng.generator
    omega = 2.0 * math.pi * g.random(size)
    r = 0.5 * np.sqrt(g.random(size))
    h = g.random(size)
    if size is None:
        return CylindricalPosition(float(omega), float(r), float(h))
    return CylindricalPosition(omega, r, h)


def to_cartesian(pos: CylindricalPosition) -> CartesianPosition:
    """``x = r sin(omega)``, ``y = r cos(omega)``, ``z = h``."""
    omega, r, h = pos
    return CartesianPosition(r * np.sin(omega), r * np.cos(omega), h)


def distance(a: CartesianPosition, b: CartesianPosition):
    return np.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def path_loss_spread(d, eta):
    """Nakagami spread ``Omega = d^(-eta)``."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0.0)):
        raise DomainError("path_loss_spread requires d > 0")
    if not eta > 0.0:
        raise DomainError(f"path-loss exponent must be positive, got {eta}")
    out = np.exp(-eta * np.log(d_arr))
    return float(out) if out.ndim == 0 else out


def link_spreads(pos: CylindricalPosition, eta: float):
    """``(Omega_SR, Omega_RD)`` for a RIS at ``pos``.

    Distances are clamped at ``MIN_DISTANCE``; zero distance only occurs on a
    measure-zero set of the cylinder boundary.
    """
    cart = to_cartesian(pos)
    d_sr = np.maximum(distance(SOURCE, cart), MIN_DISTANCE)
    d_rd = np.maximum(distance(cart, DESTINATION), MIN_DISTANCE)
    return path_loss_spread(d_sr, eta), path_loss_spread(d_rd, eta)
