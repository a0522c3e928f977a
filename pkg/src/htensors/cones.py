"""Cone primitives: the 3-dimensional power cone and the nonnegative cone.

The power cone with exponent alpha in (0, 1) is

    K_alpha = {(x1, x2, z) : x1 >= 0, x2 >= 0, x1**alpha * x2**(1-alpha) >= |z|}.

Its dual is {(u1, u2, w) : (u1/alpha)**alpha * (u2/(1-alpha))**(1-alpha) >= |w|}.
Barrier calculus uses the standard 3-parameter logarithmic barrier

    F(x1, x2, z) = -log(x1**(2a) * x2**(2-2a) - z**2)
                   - (1-a) log x1 - a log x2,

which is logarithmically homogeneous of degree 3.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["PowerCone3", "NonnegCone"]


def _clipped_power(x1: float, x2: float, alpha: float) -> float:
    # Negative bases are clipped to zero; 0**0 is treated as 1.
    b1 = max(x1, 0.0)
    b2 = max(x2, 0.0)
    p1 = 1.0 if alpha == 0.0 else b1**alpha
    p2 = 1.0 if alpha == 1.0 else b2 ** (1.0 - alpha)
    return p1 * p2


class PowerCone3:
    """Three-dimensional power cone with exponent ``alpha`` in (0, 1)."""

    __slots__ = ("alpha",)

    nu = 3  # barrier parameter

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
        self.alpha = alpha

    def __repr__(self) -> str:
        return f"PowerCone3(alpha={self.alpha})"

    # -- membership --------------------------------------------------------

    def member(self, x1: float, x2: float, z: float, tol: float = 0.0) -> bool:
        """Membership with slack ``tol`` on both the sign and power inequalities."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        if x1 < -tol or x2 < -tol:
            return False
        return _clipped_power(x1, x2, self.alpha) >= abs(z) - tol

    def margin(self, x1: float, x2: float, z: float) -> float:
        """min(x1, x2, x1**a * x2**(1-a) - |z|); nonnegative iff member."""
        return min(x1, x2, _clipped_power(x1, x2, self.alpha) - abs(z))

    def dual_member(self, u1: float, u2: float, w: float, tol: float = 0.0) -> bool:
        if u1 < -tol or u2 < -tol:
            return False
        a = self.alpha
        val = _clipped_power(u1 / a, u2 / (1.0 - a), a)
        return val >= abs(w) - tol

    # -- interior tests (strict, used by the interior-point method) ---------

    def interior(self, s) -> bool:
        x1, x2, z = s
        if x1 <= 0.0 or x2 <= 0.0:
            return False
        a = self.alpha
        return x1 ** (2 * a) * x2 ** (2 - 2 * a) - z * z > 0.0

    def dual_interior(self, u) -> bool:
        u1, u2, w = u
        if u1 <= 0.0 or u2 <= 0.0:
            return False
        a = self.alpha
        return (u1 / a) ** a * (u2 / (1.0 - a)) ** (1.0 - a) > abs(w)

    def init_point(self) -> np.ndarray:
        return np.array([1.0, 1.0, 0.0])

    # -- barrier calculus ----------------------------------------------------

    def barrier(self, s) -> float:
        x1, x2, z = s
        a = self.alpha
        phi = x1 ** (2 * a) * x2 ** (2 - 2 * a) - z * z
        return -math.log(phi) - (1 - a) * math.log(x1) - a * math.log(x2)

    def grad(self, s) -> np.ndarray:
        x1, x2, z = s
        a = self.alpha
        psi = x1 ** (2 * a) * x2 ** (2 - 2 * a)
        phi = psi - z * z
        return np.array(
            [
                -2 * a * psi / (x1 * phi) - (1 - a) / x1,
                -2 * (1 - a) * psi / (x2 * phi) - a / x2,
                2 * z / phi,
            ]
        )

    def hess(self, s) -> np.ndarray:
        x1, x2, z = s
        a = self.alpha
        psi = x1 ** (2 * a) * x2 ** (2 - 2 * a)
        phi = psi - z * z
        gphi = np.array([2 * a * psi / x1, 2 * (1 - a) * psi / x2, -2 * z])
        hphi = np.array(
            [
                [2 * a * (2 * a - 1) * psi / x1**2, 4 * a * (1 - a) * psi / (x1 * x2), 0.0],
                [4 * a * (1 - a) * psi / (x1 * x2), 2 * (1 - a) * (1 - 2 * a) * psi / x2**2, 0.0],
                [0.0, 0.0, -2.0],
            ]
        )
        H = np.outer(gphi, gphi) / phi**2 - hphi / phi
        H[0, 0] += (1 - a) / x1**2
        H[1, 1] += a / x2**2
        return H


class NonnegCone:
    """Nonnegative orthant block of a given size, with barrier -sum(log)."""

    __slots__ = ("size",)

    def __init__(self, size: int):
        if size < 1:
            raise ValueError(f"size must be >= 1, got {size}")
        self.size = int(size)

    @property
    def nu(self) -> int:
        return self.size

    def member(self, s, tol: float = 0.0) -> bool:
        return bool(np.all(np.asarray(s) >= -tol))

    def margin(self, s) -> float:
        return float(np.min(np.asarray(s)))

    def interior(self, s) -> bool:
        return bool(np.all(np.asarray(s) > 0.0))

    dual_interior = interior
    dual_member = member

    def init_point(self) -> np.ndarray:
        return np.ones(self.size)

    def barrier(self, s) -> float:
        return float(-np.sum(np.log(s)))

    def grad(self, s) -> np.ndarray:
        return -1.0 / np.asarray(s)

    def hess_diag(self, s) -> np.ndarray:
        s = np.asarray(s)
        return 1.0 / (s * s)
