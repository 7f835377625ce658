"""Green's function of u''' + h = 0, u(0) = u(1) = int u = 0, and the
boundary shape functions gamma_1, gamma_2.

    k(t, s) = 1/2 * s^2 (1-t)(3t - 2ts - 1)     for s <= t
              1/2 * t (1-s)^2 (2ts + t - 2s)     for t <= s

The derivative formulas below are the exact t-derivatives of k *including*
the global 1/2 (the 1/2 cancels against a factor 2 produced by
differentiation), so the prefactor convention is c = 1 and, e.g.,
d2k/dt2(0, s) = (1-s)^2 (2s+1).

The scalar functions validate their arguments. The ``*_left`` / ``*_right``
helpers are unchecked, vectorised branch polynomials used by the quadrature
code, which always knows on which side of the diagonal it is.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np


class KernelDomainError(ValueError):
    """Argument outside the unit square / unit interval."""


class DiagonalError(KernelDomainError):
    """d2k/dt2 requested on the diagonal t = s where it jumps."""


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise KernelDomainError(f"{name}={x!r} is outside [0, 1]")
    return x


# Branch polynomials. "left" is the region s <= t, "right" is t <= s.

def k_left(t, s):
    return 0.5 * s**2 * (1.0 - t) * (3.0 * t - 2.0 * t * s - 1.0)


def k_right(t, s):
    return 0.5 * t * (1.0 - s) ** 2 * (2.0 * t * s + t - 2.0 * s)


def dk_left(t, s):
    return s**2 * (s * (2.0 * t - 1.0) - 3.0 * t + 2.0)


def dk_right(t, s):
    return (1.0 - s) ** 2 * (s * (2.0 * t - 1.0) + t)


def d2k_left(t, s):
    return s**2 * (2.0 * s - 3.0) + 0.0 * t


def d2k_right(t, s):
    return (1.0 - s) ** 2 * (2.0 * s + 1.0) + 0.0 * t


LEFT = (k_left, dk_left, d2k_left)
RIGHT = (k_right, dk_right, d2k_right)


def green_k(t: float, s: float) -> float:
    """Green's function k(t, s) on the unit square."""
    t = _check_unit("t", t)
    s = _check_unit("s", s)
    return float(k_left(t, s) if s <= t else k_right(t, s))


def green_dk(t: float, s: float) -> float:
    """dk/dt; continuous across the diagonal."""
    t = _check_unit("t", t)
    s = _check_unit("s", s)
    return float(dk_left(t, s) if s <= t else dk_right(t, s))


def green_d2k(t: float, s: float) -> float:
    """d2k/dt2, off the diagonal.

    The interior diagonal 0 < t = s < 1 raises :class:`DiagonalError`. The two
    corners are not ambiguous: at (0, 0) only the t < s region touches the
    point inside the square, at (1, 1) only s < t, so those one-sided values
    are returned.
    """
    t = _check_unit("t", t)
    s = _check_unit("s", s)
    if t == s:
        if t == 0.0:
            return float(d2k_right(t, s))
        if t == 1.0:
            return float(d2k_left(t, s))
        raise DiagonalError(f"d2k/dt2 jumps across the diagonal; got t = s = {t!r}")
    return float(d2k_left(t, s) if s < t else d2k_right(t, s))


_GAMMA = {
    1: (lambda t: 1.0 - 4.0 * t + 3.0 * t**2, lambda t: -4.0 + 6.0 * t, lambda t: 6.0 + 0.0 * t),
    2: (lambda t: -2.0 * t + 3.0 * t**2, lambda t: -2.0 + 6.0 * t, lambda t: 6.0 + 0.0 * t),
}


def gamma(index: int, t: float, order: int = 0) -> float:
    """gamma_index^(order)(t) for index in {1, 2} and order in {0, 1, 2}."""
    if index not in _GAMMA:
        raise ValueError(f"gamma index must be 1 or 2, got {index!r}")
    if order not in (0, 1, 2):
        raise ValueError(f"gamma derivative order must be 0, 1 or 2, got {order!r}")
    t = _check_unit("t", t)
    return float(_GAMMA[index][order](t))


def gamma_array(index: int, t: np.ndarray, order: int) -> np.ndarray:
    """Vectorised, unchecked :func:`gamma`."""
    return np.asarray(_GAMMA[index][order](np.asarray(t, dtype=float)), dtype=float)


def batch(fn, points: Iterable[tuple[float, float]]) -> list[float]:
    """Map a kernel function over (t, s) pairs."""
    return [fn(t, s) for t, s in points]
