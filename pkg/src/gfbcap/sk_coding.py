"""Schalkwijk-Kailath-Butman feedback coding on the ARMA(1) channel.

The transmitter sends ``X_1 = V`` and then ``X_k = (sigma x0)^{-(k-1)} (V - Vhat_{k-1})``.
Writing the noise as ``Z_k = q_{k-1} + U_k`` with the scalar state
``q_k = -beta Z_k + alpha U_k = -beta q_{k-1} + (alpha - beta) U_k``, the
receiver faces a linear Gaussian filtering problem in ``(V, q)``.  Its error
covariance is propagated in square-root form on the scaled error
``(sigma x0)^{-k} (V - Vhat_k)``, which stays O(1) while the raw MSE decays
geometrically; the covariance is rank deficient after the first step, and the
factored form keeps it positive semidefinite where the plain Riccati update
drifts and blows up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular, toeplitz
from scipy.special import erfc, erfcinv
from scipy.stats import binomtest

from .arma1 import solve_x0
from .spectrum import Arma1Spectrum, autocovariance

MAX_CONSTELLATION = 2**31


@dataclass(frozen=True)
class SchemeParams:
    P: float
    alpha: float
    beta: float
    x0: float
    sigma: int

    @classmethod
    def from_channel(cls, P: float, alpha: float, beta: float) -> "SchemeParams":
        if abs(alpha) >= 1:
            raise ValueError("the coding scheme needs |alpha| < 1")
        sol = solve_x0(P, alpha, beta)
        return cls(P, alpha, beta, sol.x0, sol.sigma)

    @property
    def state_variance(self) -> float:
        """Stationary variance of ``q = -beta Z + alpha U``."""
        return (self.alpha - self.beta) ** 2 / (1 - self.beta**2)


@dataclass(frozen=True)
class CodingTrace:
    k: np.ndarray
    power: np.ndarray
    log_mse: np.ndarray
    ratio: np.ndarray
    rate: np.ndarray

    @property
    def mse(self) -> np.ndarray:
        return np.exp(self.log_mse)

    def cesaro_power(self, n: int | None = None) -> float:
        """``(1/n) sum_{k<=n} E X_k^2``."""
        n = self.k.size if n is None else n
        return float(np.mean(self.power[:n]))

    def rows(self):
        mse = self.mse
        for i in range(self.k.size):
            yield int(self.k[i]), self.power[i], mse[i], self.ratio[i], self.rate[i]


def exact_trace(params: SchemeParams, n_max: int) -> CodingTrace:
    """Second moments of the scheme with the MMSE receiver, without sampling."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if abs(params.alpha) >= 1:
        raise ValueError("the coding scheme needs |alpha| < 1")
    a, b, x, s = params.alpha, params.beta, params.x0, params.sigma
    # columns of S: square root of the prior covariance of (scaled error, q error)
    S = np.diag([1.0, math.sqrt(params.state_variance)])
    step = np.array([[1.0 / (s * x), 0.0, 0.0], [0.0, -b, a - b]])
    h = np.ones(3)
    power = np.empty(n_max)
    log_mse = np.empty(n_max)
    A = np.zeros((3, 3))
    A[2, 2] = 1.0
    for i in range(n_max):
        k = i + 1
        power[i] = S[0] @ S[0]
        A[:2, :2] = S
        u = A.T @ h
        u /= np.linalg.norm(u)
        post = A - np.outer(A @ u, u)
        v = post[0] @ post[0]
        if not (np.isfinite(v) and v > 0 and np.all(np.isfinite(post))):
            raise RuntimeError(f"error covariance degenerated at step {k}")
        log_mse[i] = math.log(v) + 2 * (k - 1) * math.log(x)
        S = np.linalg.qr((step @ post).T, mode="r").T
    k = np.arange(1, n_max + 1)
    ratio = np.exp(np.diff(log_mse, prepend=0.0))
    return CodingTrace(k, power, log_mse, ratio, -log_mse / (2 * k))


@dataclass(frozen=True)
class ReferenceSequence:
    k: np.ndarray
    d: np.ndarray
    d_span: np.ndarray
    log_mse_bound: np.ndarray
    power_limit: np.ndarray

    @property
    def mse_bound(self) -> np.ndarray:
        return np.exp(self.log_mse_bound)


def reference_sequence(params: SchemeParams, n_max: int) -> ReferenceSequence:
    """Suboptimal-estimator diagnostic built from ``Y'_k = d_k V + U_k + (-alpha)^{k-1} w``.

    ``w = alpha U_0 - beta Z_0``.  ``d`` is the closed form

        d_k = (1 + s beta x0)/(1 + s alpha x0) (1 - (-s alpha x0)^k) (s x0)^{-(k-1)}.

    ``d_span`` is the ``V`` coefficient of the observable combination
    ``Y'_k = sum_{j<=k} (-alpha)^{k-j} (Y_j + beta Y_{j-1})`` (with ``Y_0``
    omitted) once the known estimates are removed; it carries exactly the
    noise ``U_k + (-alpha)^{k-1} w`` and coincides with ``d`` when
    ``alpha = 0``.  ``log_mse_bound`` is the log of the smallest
    ``E(V - sum_{j=2..k} a_j Y'_j)^2`` over these observable ``Y'``, so it
    bounds the MMSE of the scheme.  ``power_limit`` is
    ``x0^{-2(k-1)} / sum_{j=2..k-1} d_j^2`` (NaN for ``k < 3``).  Position
    ``i`` of every array holds ``k = i + 2``.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if abs(params.alpha) >= 1:
        raise ValueError("the coding scheme needs |alpha| < 1")
    a, b, x, s = params.alpha, params.beta, params.x0, params.sigma
    gain = (1 + s * b * x) / (1 + s * a * x)
    gamma0 = (1 + a * a - 2 * a * b) / (1 - b * b)
    var_w = a * a + b * b * gamma0 - 2 * a * b
    ks = np.arange(2, n_max + 1)
    # scaled quantities: dt_k = d_k x^{k-1}, A_k = x^{2(k-1)} sum d_j^2, C_k = x^{k-1} sum d_j r_j
    A = C = 0.0
    R = 1.0 / var_w if var_w > 1e-300 else math.inf
    d = np.empty(ks.size)
    d_span = np.empty(ks.size)
    Ad = 0.0
    log_bound = np.empty(ks.size)
    plimit = np.full(ks.size, np.nan)
    for i, k in enumerate(ks):
        dt = gain * (1 - (-s * a * x) ** k) * s ** (k - 1)
        ds = (1 - (-s * a * x) ** k + s * b * x * (1 - (-s * a * x) ** (k - 1))) / (1 + s * a * x)
        ds *= s ** (k - 1)
        r = (-a) ** (k - 1)
        d[i] = dt * x ** (-(k - 1))
        d_span[i] = ds * x ** (-(k - 1))
        if k >= 3:
            plimit[i] = 1.0 / (x * x * Ad)
        Ad = x * x * Ad + dt * dt
        A = x * x * A + ds * ds
        if math.isfinite(R):
            C = x * C + ds * r
            R += r * r
            schur = A + x ** (2 * (k - 1)) - C * C / R
        else:
            schur = A + x ** (2 * (k - 1))
        log_bound[i] = 2 * (k - 1) * math.log(x) - math.log(schur)
    return ReferenceSequence(ks, d, d_span, log_bound, plimit)


@dataclass(frozen=True)
class PamExperiment:
    R: float
    n: int
    trials: int
    seed: int = 0


@dataclass(frozen=True)
class PamResult:
    pe: float
    errors: int
    trials: int
    ci_low: float
    ci_high: float
    c0_fit: float | None
    constellation_size: int

    def to_dict(self):
        return {
            "pe": self.pe,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "c0_fit": self.c0_fit,
            "errors": self.errors,
            "trials": self.trials,
            "constellation_size": self.constellation_size,
        }


def constellation_size(n: int, R: float) -> int:
    """``ceil(e^{nR})``, with a guard against ``e^{nR}`` landing just above an integer."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    v = n * R
    if v > math.log(MAX_CONSTELLATION):
        raise ValueError("rate-horizon too large for the constellation budget")
    m = math.exp(v)
    near = round(m)
    size = near if abs(m - near) <= 1e-9 * m else math.ceil(m)
    if size > MAX_CONSTELLATION:
        raise ValueError("rate-horizon too large for the constellation budget")
    return max(int(size), 1)


def fit_c0(pe: float, n: int, R: float, x0: float) -> float | None:
    """Solve ``pe = erfc(sqrt(c0 x0^{-2n} / e^{2nR}))`` for ``c0`` (a fit, not a derived constant)."""
    if not 0 < pe <= 1:
        return None
    return float(erfcinv(pe) ** 2 * math.exp(2 * n * (R + math.log(x0))))


def error_bound(n: int, R: float, x0: float, c0: float) -> float:
    return float(erfc(math.sqrt(c0 * math.exp(-2 * n * (R + math.log(x0))))))


def _trial_draws(seed, trials, n):
    u = np.empty(trials)
    normals = np.empty((trials, n + 1))
    root = np.random.SeedSequence(seed)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(t,)))
        u[t] = rng.random()
        normals[t] = rng.standard_normal(n + 1)
    return u, normals


def pam_simulate(exp: PamExperiment, params: SchemeParams) -> PamResult:
    """Monte Carlo error probability of the scheme with an equally spaced constellation.

    The message point ``theta`` is sent first, then scaled corrections
    ``(sigma x0)^{-(k-1)} (theta - thetahat_{k-1})``.  The receiver's
    ``thetahat_k`` is the minimum-variance unbiased linear estimate
    (generalized least squares on the equivalent observations
    ``theta + Z_j / c_j``); decoding picks the nearest constellation point.
    Trial ``t`` draws from the stream ``SeedSequence(seed, spawn_key=(t,))``.
    """
    if exp.trials < 1:
        raise ValueError("trials must be at least 1")
    if exp.n < 1:
        raise ValueError("horizon must be at least 1")
    if abs(params.alpha) >= 1:
        raise ValueError("the coding scheme needs |alpha| < 1")
    n = exp.n
    M = constellation_size(n, exp.R)
    a, b, x, s = params.alpha, params.beta, params.x0, params.sigma
    c = (s * x) ** -np.arange(n, dtype=float)
    if not np.all(np.isfinite(c)) or np.abs(c).max() > 1e150:
        raise ValueError("horizon too long for the correction gain")

    u, normals = _trial_draws(exp.seed, exp.trials, n)
    idx = np.minimum((u * M).astype(np.int64), M - 1)
    if M == 1:
        theta = np.zeros(exp.trials)
        delta = 2.0
    else:
        delta = 2.0 / (M - 1)
        theta = -1.0 + idx * delta

    # stationary ARMA(1) noise via the q-state recursion
    q = math.sqrt(params.state_variance) * normals[:, 0]
    U = normals[:, 1:]
    Z = np.empty((exp.trials, n))
    for k in range(n):
        Z[:, k] = q + U[:, k]
        q = -b * q + (a - b) * U[:, k]

    gamma = autocovariance(Arma1Spectrum(a, b), n - 1, max(2**12, 4 * n))
    L = cholesky(toeplitz(gamma), lower=True)
    e = solve_triangular(L, c, lower=True)  # whitened gains
    ee = np.cumsum(e * e)
    # whitened c_j * (theta + Z_j / c_j), built up one observation at a time
    proj = np.zeros(exp.trials)
    est = np.zeros(exp.trials)
    w = np.zeros((exp.trials, n))
    for k in range(n):
        X = c[k] * (theta - est) if k else theta
        Y = X + Z[:, k]
        obs = Y + c[k] * est if k else Y
        w[:, k] = (obs - w[:, :k] @ L[k, :k]) / L[k, k]
        proj += e[k] * w[:, k]
        est = proj / ee[k]

    if M == 1:
        errors = 0
    else:
        dec = np.clip(np.rint((est + 1.0) / delta), 0, M - 1).astype(np.int64)
        errors = int(np.count_nonzero(dec != idx))
    ci = binomtest(errors, exp.trials).proportion_ci(0.95, method="exact")
    pe = errors / exp.trials
    return PamResult(
        pe, errors, exp.trials, float(ci.low), float(ci.high),
        fit_c0(pe, n, exp.R, x), M,
    )
