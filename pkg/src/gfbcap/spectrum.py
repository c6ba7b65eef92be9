"""Noise power spectral densities on the unit circle.

Three representations are supported:

* :class:`Arma1Spectrum` -- ``|1 + a e^{it}|^2 / |1 + b e^{it}|^2``
* :class:`RationalSpectrum` -- ``gain * |num(e^{it})|^2 / |den(e^{it})|^2``
* :class:`GridSpectrum` -- samples on the grid ``t_k = -pi + 2 pi k / N``

All quadratures use that same uniform grid (the trapezoid rule for periodic
integrands), so every routine takes the grid size ``N`` explicitly.
Logarithms are natural throughout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GRID = 2**14
LOG_CLIP = 1e-300


class ResolutionWarning(UserWarning):
    """Quadrature grid looks too coarse for the spectrum being integrated."""


class ChannelSpecError(ValueError):
    """Invalid channel description; ``field`` names the offending entry."""

    def __init__(self, field: str, reason: str):
        super().__init__(reason)
        self.field = field
        self.reason = reason


def grid(N: int) -> np.ndarray:
    """Return the quadrature nodes ``-pi + 2 pi k / N``, ``k = 0..N-1``."""
    if N < 1:
        raise ValueError("grid size must be positive")
    return -np.pi + 2.0 * np.pi * np.arange(N) / N


def _check_theta(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -np.pi) or np.any(theta >= np.pi):
        raise ValueError("theta must lie in [-pi, pi)")
    return theta


class NoiseSpectrum:
    """Base class; subclasses implement ``_values`` and optionally ``grid_size``."""

    #: native grid size for sampled spectra, ``None`` for analytic ones
    grid_size: int | None = None

    def _values(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, theta):
        """Spectral density at ``theta`` in ``[-pi, pi)`` (scalar or array)."""
        theta = _check_theta(theta)
        out = self._values(theta)
        return float(out) if out.ndim == 0 else out

    def sample(self, N: int | None = None) -> np.ndarray:
        """Spectrum values on the ``N``-point grid."""
        return self._values(grid(resolve_grid(self, N)))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Arma1Spectrum(NoiseSpectrum):
    """Spectrum of ``Z_i + beta Z_{i-1} = U_i + alpha U_{i-1}`` with unit white ``U``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not -1.0 <= self.alpha <= 1.0:
            raise ChannelSpecError("alpha", "alpha out of [-1,1]")
        if not -1.0 < self.beta < 1.0:
            raise ChannelSpecError("beta", "beta out of (-1,1)")

    def _values(self, theta):
        c = np.cos(theta)
        a, b = self.alpha, self.beta
        # |1 + a e^{it}|^2 = 1 + a^2 + 2 a cos t, written as (1+a)^2 - 2a(1-cos t)
        # to keep the zero at t = pi exact when a = 1.
        num = (1.0 + a) ** 2 - 2.0 * a * (1.0 - c)
        den = (1.0 + b) ** 2 - 2.0 * b * (1.0 - c)
        return np.maximum(num, 0.0) / den

    @property
    def is_white(self) -> bool:
        return self.alpha == self.beta

    def to_rational(self) -> "RationalSpectrum":
        return RationalSpectrum((1.0, self.alpha), (1.0, self.beta))

    def to_dict(self):
        return {"type": "arma1", "alpha": float(self.alpha), "beta": float(self.beta)}


@dataclass(frozen=True, eq=False)
class RationalSpectrum(NoiseSpectrum):
    """``gain * |sum_k num[k] z^k|^2 / |sum_k den[k] z^k|^2`` at ``z = e^{it}``."""

    num: tuple
    den: tuple
    gain: float = 1.0

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.atleast_1d(np.asarray(self.den, dtype=float))
        if num.size == 0 or not np.any(num):
            raise ChannelSpecError("num", "numerator must be a nonzero polynomial")
        if den.size == 0 or not np.any(den):
            raise ChannelSpecError("den", "denominator must be a nonzero polynomial")
        if not np.isfinite(self.gain) or self.gain <= 0:
            raise ChannelSpecError("gain", "gain must be positive")
        object.__setattr__(self, "num", tuple(num))
        object.__setattr__(self, "den", tuple(den))
        mag = np.abs(np.polynomial.polynomial.polyval(np.exp(1j * grid(DEFAULT_GRID)), den))
        if mag.min() <= 1e-10 * mag.max():
            raise ChannelSpecError("den", "denominator has a root on the unit circle")

    def _values(self, theta):
        z = np.exp(1j * theta)
        P = np.polynomial.polynomial.polyval
        return self.gain * np.abs(P(z, self.num)) ** 2 / np.abs(P(z, self.den)) ** 2

    def to_dict(self):
        return {
            "type": "rational",
            "num": [float(v) for v in self.num],
            "den": [float(v) for v in self.den],
            "gain": float(self.gain),
        }


@dataclass(frozen=True, eq=False)
class GridSpectrum(NoiseSpectrum):
    """Spectrum known only at the ``N`` grid nodes; no interpolation is done."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ChannelSpecError("values", "spectral values must be finite")
        neg = np.flatnonzero(v < 0)
        if neg.size:
            raise ChannelSpecError("values", f"negative spectral value at index {neg[0]}")
        N = v.size
        if N < 8 or N & (N - 1):
            raise ChannelSpecError("values", "number of samples must be a power of two >= 8")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid_size(self) -> int:
        return self.values.size

    def _values(self, theta):
        N = self.values.size
        pos = (np.asarray(theta) + np.pi) * N / (2.0 * np.pi)
        idx = np.rint(pos)
        if np.any(np.abs(pos - idx) > 1e-9):
            raise ValueError("sampled spectrum can only be evaluated at its grid points")
        return self.values[idx.astype(int) % N]

    def sample(self, N=None):
        resolve_grid(self, N)
        return self.values.copy()

    def to_dict(self):
        return {"type": "sampled", "values": [float(v) for v in self.values]}


def resolve_grid(spec: NoiseSpectrum, N: int | None) -> int:
    """Pick the quadrature size: the native size for sampled spectra, else ``N``."""
    native = spec.grid_size
    if native is not None:
        if N is not None and N != native:
            raise ValueError(f"sampled spectrum has {native} points, grid size {N} requested")
        return native
    N = DEFAULT_GRID if N is None else int(N)
    if N < 8:
        raise ValueError("grid size must be at least 8")
    return N


def spectrum_from_dict(d: dict) -> NoiseSpectrum:
    """Build a spectrum from the JSON channel description."""
    if not isinstance(d, dict):
        raise ChannelSpecError("type", "channel spec must be a JSON object")
    kind = d.get("type")

    def need(key):
        if key not in d:
            raise ChannelSpecError(key, f"missing field '{key}'")
        return d[key]

    def number(key):
        v = need(key)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ChannelSpecError(key, f"'{key}' must be a number")
        return float(v)

    def numbers(key):
        v = need(key)
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise ChannelSpecError(key, f"'{key}' must be a list of numbers")
        return [float(x) for x in v]

    if kind == "arma1":
        return Arma1Spectrum(number("alpha"), number("beta"))
    if kind == "rational":
        gain = number("gain") if "gain" in d else 1.0
        return RationalSpectrum(tuple(numbers("num")), tuple(numbers("den")), gain)
    if kind == "sampled":
        return GridSpectrum(np.array(numbers("values")))
    raise ChannelSpecError("type", f"unknown channel type {kind!r}")


def evaluate(spec: NoiseSpectrum, theta):
    return spec.evaluate(theta)


def fourier_coefficients(samples: np.ndarray) -> np.ndarray:
    """Coefficients ``c_j`` with ``f(t) = sum_j c_j e^{ijt}`` from grid samples.

    Index ``j`` of the result holds lag ``j`` for ``j < N/2`` and lag ``j - N``
    above that (FFT ordering).
    """
    N = samples.shape[-1]
    sign = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
    return sign * np.fft.fft(samples) / N


def autocovariance(spec: NoiseSpectrum, max_lag: int, N: int | None = None) -> np.ndarray:
    """Autocovariances ``gamma_0..gamma_max_lag`` by grid quadrature.

    ``gamma_j = (1/2pi) int S(e^{it}) cos(jt) dt``.  A :class:`ResolutionWarning`
    is issued when halving the grid moves the result by more than ``1e-8 gamma_0``.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    N = resolve_grid(spec, N)
    if N < 4 * max_lag:
        raise ValueError(f"grid size {N} too small for {max_lag} lags (need N >= 4*max_lag)")
    s = spec.sample(N)
    gamma = _cosine_moments(s, max_lag)
    half = s[::2]
    lags = min(max_lag, half.size // 4)
    coarse = _cosine_moments(half, lags)
    scale = max(abs(gamma[0]), np.finfo(float).tiny)
    if np.max(np.abs(coarse - gamma[: lags + 1])) > 1e-8 * scale:
        warnings.warn(
            f"autocovariance not resolved on a {N}-point grid; increase the grid size",
            ResolutionWarning,
            stacklevel=2,
        )
    return gamma


def _cosine_moments(samples, max_lag):
    N = samples.size
    c = np.fft.ifft(samples)[: max_lag + 1].real
    c[1::2] *= -1.0  # grid starts at -pi
    return c


def mean_log(values: np.ndarray) -> float:
    """Grid average of ``log(values)`` with the integrand clipped at ``log(LOG_CLIP)``."""
    values = np.asarray(values, dtype=float)
    if not np.any(values > 0):
        raise ValueError("degenerate spectrum")
    return float(np.mean(np.log(np.maximum(values, LOG_CLIP))))


def log_integral(spec: NoiseSpectrum, N: int | None = None) -> float:
    """``(1/2pi) int log S(e^{it}) dt``; the log of the one-step prediction error."""
    return mean_log(spec.sample(N))


def essinf(spec: NoiseSpectrum, N: int | None = None) -> float:
    """Grid minimum of the spectrum (grid-dependent stand-in for ess inf)."""
    return float(np.min(spec.sample(N)))
