"""Closed-form feedback capacity of the first-order ARMA Gaussian channel.

For noise spectrum ``|1 + alpha e^{it}|^2 / |1 + beta e^{it}|^2`` the feedback
capacity is ``-log x0`` where ``x0`` is the root in ``(0, 1)`` of

    P x^2 (1 + sigma beta x)^2 = (1 - x^2) (1 + sigma alpha x)^2,

``sigma = +1`` if ``beta >= alpha`` else ``-1``.  The optimal feedback filter is

    B(z) = (1 + beta z) / (1 + alpha z) * y z / (1 - sigma x0 z),
    y = (x0^2 - 1) / (sigma x0) * (1 + sigma alpha x0) / (1 + sigma beta x0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .filters import CausalFilter


@dataclass(frozen=True)
class Arma1Solution:
    P: float
    alpha: float
    beta: float
    x0: float
    capacity: float
    sigma: int
    y: float
    implied_power: float
    filter: CausalFilter | None

    @property
    def residual(self) -> float:
        return quartic_residual(self.x0, self.P, self.alpha, self.beta)

    def to_dict(self):
        return {
            "x0": self.x0,
            "capacity": self.capacity,
            "sigma": self.sigma,
            "y": self.y,
            "implied_power": self.implied_power,
            "residual": self.residual,
        }


def feedback_sign(alpha: float, beta: float) -> int:
    return 1 if beta >= alpha else -1


def _check(P, alpha, beta):
    if not -1.0 <= alpha <= 1.0:
        raise ValueError("alpha out of [-1,1]")
    if not -1.0 < beta < 1.0:
        raise ValueError("beta out of (-1,1)")
    if not (math.isfinite(P) and P > 0):
        raise ValueError("power must be positive")


def quartic(x: float, P: float, alpha: float, beta: float, sigma: int | None = None) -> float:
    """``P x^2 (1+s beta x)^2 - (1-x^2)(1+s alpha x)^2``; negative at 0, positive at 1."""
    s = feedback_sign(alpha, beta) if sigma is None else sigma
    return P * x * x * (1 + s * beta * x) ** 2 - (1 - x * x) * (1 + s * alpha * x) ** 2


def quartic_residual(x: float, P: float, alpha: float, beta: float) -> float:
    """``|P x^2 - (1-x^2)(1+s alpha x)^2 / (1+s beta x)^2|``."""
    s = feedback_sign(alpha, beta)
    return abs(P * x * x - (1 - x * x) * (1 + s * alpha * x) ** 2 / (1 + s * beta * x) ** 2)


def _bisect_root(P, alpha, beta, sigma, xtol):
    lo, hi = 0.0, 1.0
    glo, ghi = quartic(lo, P, alpha, beta, sigma), quartic(hi, P, alpha, beta, sigma)
    if not (glo < 0 < ghi):
        raise RuntimeError(f"no sign change of the quartic on (0,1): g(0)={glo}, g(1)={ghi}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= xtol:
            break
        if quartic(mid, P, alpha, beta, sigma) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_filter(alpha: float, beta: float, x0: float, sigma: int, y: float) -> CausalFilter:
    """Rational form of the capacity-achieving feedback filter.

    Refuses ``|alpha| = 1``, where ``1/(1 + alpha z)`` has a pole on the circle.
    """
    if abs(alpha) >= 1.0:
        raise ValueError("optimal filter undefined for |alpha| = 1 (pole on the unit circle)")
    num = [0.0, y, y * beta]
    den = [1.0, alpha - sigma * x0, -sigma * alpha * x0]
    return CausalFilter.rational(num, den)


def solve_x0(P: float, alpha: float, beta: float, xtol: float = 1e-14) -> Arma1Solution:
    """Feedback capacity and optimal filter for power ``P > 0``.

    Examples
    --------
    >>> round(solve_x0(3.0, 0.0, 0.0).x0, 12)
    0.5
    """
    _check(P, alpha, beta)
    sigma = feedback_sign(alpha, beta)
    if alpha == beta:
        # white noise: P x^2 = 1 - x^2 exactly
        x0 = 1.0 / math.sqrt(1.0 + P)
        capacity = 0.5 * math.log1p(P)
    else:
        x0 = _bisect_root(P, alpha, beta, sigma, xtol)
        capacity = -math.log(x0)
    y = (x0 * x0 - 1) / (sigma * x0) * (1 + sigma * alpha * x0) / (1 + sigma * beta * x0)
    implied = y * y / (1 - x0 * x0)
    filt = optimal_filter(alpha, beta, x0, sigma, y) if abs(alpha) < 1 else None
    return Arma1Solution(P, alpha, beta, x0, capacity, sigma, y, implied, filt)


def feedback_capacity(P: float, alpha: float, beta: float) -> float:
    """Capacity in nats; ``0`` at ``P = 0``."""
    if P == 0:
        return 0.0
    return solve_x0(P, alpha, beta).capacity


def ar1_capacity(P: float, beta: float) -> float:
    """AR(1) special case ``alpha = 0``."""
    return solve_x0(P, 0.0, beta).capacity
