"""Strictly causal feedback filters ``B(z) = sum_{k>=1} b_k z^k``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import lfilter

_MAX_TAPS = 1_000_000


@dataclass(frozen=True, eq=False)
class CausalFilter:
    """A stable, strictly causal filter.

    Stored either as a rational function ``num(z) / den(z)`` (coefficient
    arrays in ascending powers of ``z``, ``num[0] == 0``) or as a finite
    impulse response ``taps = (b_1, ..., b_m)``.  Build instances with
    :meth:`rational` or :meth:`fir`.
    """

    num: np.ndarray | None = None
    den: np.ndarray | None = None
    taps: np.ndarray | None = None

    def __post_init__(self):
        if self.num is not None:
            num = np.trim_zeros(np.asarray(self.num, dtype=float), "b")
            den = np.trim_zeros(np.asarray(self.den, dtype=float), "b")
            if num.size and num[0] != 0.0:
                raise ValueError("filter is not strictly causal: num[0] must be 0")
            if den.size == 0 or den[0] == 0.0:
                raise ValueError("den[0] must be nonzero")
            num, den = num / den[0], den / den[0]
            if den.size > 1:
                roots = np.roots(den[::-1])
                if np.any(np.abs(roots) <= 1.0):
                    raise ValueError("filter is unstable: denominator root inside the unit disk")
            object.__setattr__(self, "num", num if num.size else np.zeros(1))
            object.__setattr__(self, "den", den)
        elif self.taps is not None:
            taps = np.atleast_1d(np.asarray(self.taps, dtype=float))
            object.__setattr__(self, "taps", taps)
        else:
            raise ValueError("filter needs either num/den or taps")

    @classmethod
    def rational(cls, num, den) -> "CausalFilter":
        return cls(num=num, den=den)

    @classmethod
    def fir(cls, taps) -> "CausalFilter":
        """Filter with impulse response ``b_1 = taps[0], b_2 = taps[1], ...``."""
        return cls(taps=taps)

    @classmethod
    def zero(cls) -> "CausalFilter":
        return cls(taps=np.zeros(1))

    @property
    def is_rational(self) -> bool:
        return self.num is not None

    def pole_radius(self) -> float:
        """Largest ``|1/root(den)|``; impulse response decays like this to the k."""
        if not self.is_rational or self.den.size == 1:
            return 0.0
        return float(np.max(1.0 / np.abs(np.roots(self.den[::-1]))))

    def response(self, theta) -> np.ndarray:
        """Frequency response ``B(e^{i theta})``."""
        z = np.exp(1j * np.asarray(theta, dtype=float))
        if self.is_rational:
            return npoly.polyval(z, self.num) / npoly.polyval(z, self.den)
        return npoly.polyval(z, np.concatenate(([0.0], self.taps)))

    def impulse_response(self, m: int | None = None) -> np.ndarray:
        """Return ``b_1..b_m``.

        With ``m=None`` a rational filter is truncated after the last tap whose
        magnitude is at least ``1e-12`` times the largest tap.
        """
        if not self.is_rational:
            if m is None:
                return self.taps.copy()
            out = np.zeros(m)
            k = min(m, self.taps.size)
            out[:k] = self.taps[:k]
            return out
        if m is not None:
            return self._series(m + 1)[1:]
        rho = self.pole_radius()
        if rho == 0.0:
            horizon = self.num.size + 1
        else:
            horizon = int(np.ceil(np.log(1e-17) / np.log(rho))) + self.num.size + 16
        horizon = min(max(horizon, 2), _MAX_TAPS)
        b = self._series(horizon)[1:]
        big = np.flatnonzero(np.abs(b) >= 1e-12 * np.max(np.abs(b))) if np.any(b) else []
        m = int(big[-1]) + 1 if len(big) else 1
        return b[:m]

    def _series(self, length):
        impulse = np.zeros(length)
        impulse[0] = 1.0
        return lfilter(self.num, self.den, impulse)

    def scaled(self, c: float) -> "CausalFilter":
        if self.is_rational:
            return CausalFilter.rational(c * self.num, self.den)
        return CausalFilter.fir(c * self.taps)

    def negated(self) -> "CausalFilter":
        """``-B``; converts between the ``1 + B`` and ``1 - sum b_k z^k`` conventions."""
        return self.scaled(-1.0)

    def to_dict(self) -> dict:
        if self.is_rational:
            return {
                "type": "rational",
                "num": [float(v) for v in self.num],
                "den": [float(v) for v in self.den],
                "impulse": [float(v) for v in self.impulse_response()],
            }
        return {"type": "fir", "impulse": [float(v) for v in self.taps]}

    @classmethod
    def from_dict(cls, d: dict) -> "CausalFilter":
        if "num" in d and "den" in d:
            return cls.rational(d["num"], d["den"])
        for key in ("impulse", "taps"):
            if key in d:
                return cls.fir(d[key])
        raise ValueError("filter JSON needs 'num'/'den' or 'impulse'")
