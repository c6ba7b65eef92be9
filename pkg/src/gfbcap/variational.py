"""Evaluation and certification of stationary feedback strategies.

A strategy is a pair ``(S_V, B)``: an innovation spectrum ``S_V >= 0`` and a
strictly causal filter ``B``.  The channel input ``X = V + B Z`` achieves

    rate  = (1/2pi) int 1/2 log((S_V + |1+B|^2 S_Z) / S_Z) dt
    power = (1/2pi) int (S_V + |B|^2 S_Z) dt

and the feedback capacity is the supremum of ``rate`` at ``power <= P``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filters import CausalFilter
from .spectrum import LOG_CLIP, NoiseSpectrum, fourier_coefficients, grid, mean_log, resolve_grid


@dataclass(frozen=True)
class VariationalCandidate:
    B: CausalFilter
    S_V: NoiseSpectrum | None = None


@dataclass(frozen=True)
class CertificateReport:
    power: float
    power_gap: float
    lambda_used: float
    essinf_value: float
    anticausal_residual: float
    passed: bool

    def to_dict(self):
        return {
            "power": self.power,
            "power_gap": self.power_gap,
            "lambda_used": self.lambda_used,
            "essinf_value": self.essinf_value,
            "anticausal_residual": self.anticausal_residual,
            "pass": self.passed,
        }


def _grid_size(S_Z, S_V, N):
    # a sampled spectrum (either one) fixes the grid
    if S_V is not None:
        N = resolve_grid(S_V, N)
    return resolve_grid(S_Z, N)


def eval_objective(cand: VariationalCandidate, S_Z: NoiseSpectrum, N: int | None = None):
    """Return ``(rate, power)`` of a candidate on the channel ``S_Z`` (nats)."""
    N = _grid_size(S_Z, cand.S_V, N)
    theta = grid(N)
    sz = S_Z.sample(N)
    sv = np.zeros(N) if cand.S_V is None else cand.S_V.sample(N)
    if np.any(sv < 0):
        raise ValueError("S_V must be nonnegative")
    b = cand.B.response(theta)
    sy = sv + np.abs(1.0 + b) ** 2 * sz
    lsz = np.log(np.maximum(sz, LOG_CLIP))
    rate = 0.5 * float(np.mean(np.log(np.maximum(sy, LOG_CLIP)) - lsz))
    power = float(np.mean(sv + np.abs(b) ** 2 * sz))
    return rate, power


def verify_sufficient_condition(
    B: CausalFilter,
    S_Z: NoiseSpectrum,
    P: float,
    lam: float | None = None,
    N: int | None = None,
    tol_P: float = 1e-8,
    tol_lam: float = 1e-10,
    tol_A: float = 1e-8,
) -> CertificateReport:
    """Check the three optimality conditions for ``(S_V = 0, B)`` on the grid.

    1. ``int |B|^2 S_Z = P``;
    2. ``lam <= essinf |1+B|^2 S_Z``;
    3. ``lam / (1 + B(e^{-it})) - B(e^{it}) S_Z(e^{it})`` is anticausal.

    Condition 3 is measured as the largest Fourier coefficient at lags
    ``1..N/2`` relative to the largest coefficient overall.  When ``lam`` is
    not given, the value that best cancels the positive-lag coefficients is
    used (least squares; the condition is affine in ``lam``), falling back to
    the essinf when ``1/(1 + B(e^{-it}))`` is itself anticausal.
    """
    N = resolve_grid(S_Z, N)
    theta = grid(N)
    sz = S_Z.sample(N)
    if sz.min() <= 1e-12 * sz.max():
        raise ValueError("noise spectrum must be bounded away from zero")
    b = B.response(theta)
    b_rev = B.response(-theta)
    denom = 1.0 + b_rev
    if np.min(np.abs(denom)) < 1e-12:
        raise ValueError("certificate undefined: 1 + B(e^{-it}) vanishes on the grid")

    power = float(np.mean(np.abs(b) ** 2 * sz))
    floor = float(np.min(np.abs(1.0 + b) ** 2 * sz))
    g = fourier_coefficients(1.0 / denom)[1 : N // 2 + 1]
    h = fourier_coefficients(b * sz)[1 : N // 2 + 1]
    gg = float(np.vdot(g, g).real)
    if lam is not None:
        lam_used = float(lam)
    elif gg > 1e-30:
        lam_used = float(np.vdot(g, h).real / gg)
    else:
        lam_used = floor
    f = lam_used / denom - b * sz
    c = np.abs(fourier_coefficients(f))
    top = c.max()
    residual = float(c[1 : N // 2 + 1].max() / top) if top > 0 else 0.0
    gap = abs(power - P)
    ok = gap <= tol_P and lam_used > 0 and lam_used <= floor + tol_lam and residual <= tol_A
    return CertificateReport(power, gap, lam_used, floor, residual, bool(ok))


def prediction_error_variance(values: np.ndarray) -> float:
    """One-step prediction error of a process with the given grid spectrum.

    ``inf_a int |1 - sum_{k>=1} a_k e^{ikt}|^2 W dt/2pi = exp(mean log W)``.
    """
    return float(np.exp(mean_log(values)))


def maximin_rate(B: CausalFilter, S_Z: NoiseSpectrum, N: int | None = None) -> float:
    """Inner infimum of the maximin characterization evaluated for ``B``.

    ``B`` uses the ``1 + B`` convention; the maximin form writes the filter as
    ``1 - sum b_k e^{ikt}``, i.e. pass ``B.negated()`` to go from one to the
    other.  The prediction error of ``W = |1+B|^2 S_Z`` is normalized by that
    of ``S_Z``, so the value is in nats and vanishes for ``B = 0``.
    """
    N = resolve_grid(S_Z, N)
    sz = S_Z.sample(N)
    w = np.abs(1.0 + B.response(grid(N))) ** 2 * sz
    try:
        num = mean_log(w)
    except ValueError:
        raise ValueError("composite spectrum has a non-integrable logarithm") from None
    return 0.5 * (num - mean_log(sz))
