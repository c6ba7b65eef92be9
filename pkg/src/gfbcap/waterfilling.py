"""Nonfeedback capacity by water-filling on the noise spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import LOG_CLIP, NoiseSpectrum, resolve_grid


@dataclass(frozen=True)
class WaterfillResult:
    lam: float
    capacity: float
    power_used: float
    tol: float

    def to_dict(self):
        return {"lambda": self.lam, "capacity": self.capacity, "power_used": self.power_used}


def _poured(s, lam):
    return float(np.mean(np.maximum(lam - s, 0.0)))


def _rate(s, lam):
    return 0.5 * float(np.mean(np.log(np.maximum(s, lam)) - np.log(np.maximum(s, LOG_CLIP))))


def capacity_nofb(
    spec: NoiseSpectrum, P: float, N: int | None = None, tol: float = 1e-12
) -> WaterfillResult:
    """Water-fill power ``P`` over the spectrum.

    Parameters
    ----------
    spec : NoiseSpectrum
        Noise power spectral density.
    P : float
        Average power, ``P >= 0``.
    N : int, optional
        Quadrature grid size (the native size for sampled spectra).
    tol : float
        Accepted mismatch ``|P(lambda) - P|`` of the bisection.

    Returns
    -------
    WaterfillResult
        Water level, capacity in nats per channel use, and the power actually
        poured at that level.
    """
    if not np.isfinite(P) or P < 0:
        raise ValueError("power must be nonnegative")
    if not tol > 0:
        raise ValueError("tol must be positive")
    s = spec.sample(resolve_grid(spec, N))
    lo = float(s.min())  # grid essinf; nothing poured at this level
    if P == 0:
        return WaterfillResult(lo, 0.0, 0.0, tol)
    hi = float(s.max()) + P + 1.0
    lam = 0.5 * (lo + hi)
    for _ in range(400):
        lam = 0.5 * (lo + hi)
        used = _poured(s, lam)
        if abs(used - P) <= tol:
            break
        if used < P:
            lo = lam
        else:
            hi = lam
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    used = _poured(s, lam)
    return WaterfillResult(lam, _rate(s, lam), used, tol)


def waterfill_spectrum(spec: NoiseSpectrum, P: float, N: int | None = None):
    """Optimal input spectrum ``max(0, lambda - S)`` on the grid, with the result."""
    res = capacity_nofb(spec, P, N)
    s = spec.sample(resolve_grid(spec, N))
    return np.maximum(res.lam - s, 0.0), res
