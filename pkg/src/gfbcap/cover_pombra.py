"""Finite-block feedback capacity.

An ``n``-block strategy sends ``X = V + B Z`` with ``V ~ N(0, K_V)``
independent of the noise and ``B`` strictly lower triangular.  It achieves

    rate  = [logdet(K_V + (B+I) K_Z (B+I)^T) - logdet K_Z] / (2n)
    power = tr(K_V + B K_Z B^T) / n

and ``C_FB,n`` is the maximum rate at ``power <= P``.  The optimizer here is a
local method (coordinate ascent), so its output is a lower bound on ``C_FB,n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, cho_factor, cho_solve, toeplitz

from .filters import CausalFilter
from .spectrum import NoiseSpectrum, autocovariance, resolve_grid

RIDGE = 1e-12


@dataclass(frozen=True, eq=False)
class BlockStrategy:
    K_V: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        K_V = np.array(self.K_V, dtype=float, ndmin=2)
        B = np.array(self.B, dtype=float, ndmin=2)
        n = K_V.shape[0]
        if K_V.shape != (n, n) or B.shape != (n, n):
            raise ValueError("K_V and B must both be n x n")
        if not np.allclose(K_V, K_V.T, rtol=0, atol=1e-12 * max(1.0, np.abs(K_V).max())):
            raise ValueError("K_V must be symmetric")
        K_V = 0.5 * (K_V + K_V.T)
        tr = np.trace(K_V)
        if n and np.linalg.eigvalsh(K_V).min() < -1e-10 * max(tr / n, 1e-300):
            raise ValueError("K_V must be positive semidefinite")
        if np.any(np.triu(B) != 0):
            raise ValueError("B must be strictly lower triangular")
        object.__setattr__(self, "K_V", K_V)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.K_V.shape[0]

    def to_dict(self):
        return {"n": self.n, "K_V": self.K_V.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["K_V"], dtype=float), np.asarray(d["B"], dtype=float))


@dataclass
class BlockResult:
    rate: float
    power: float
    strategy: BlockStrategy
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)

    def to_dict(self, include_strategy=False):
        out = {
            "label": "lower bound on C_FB,n",
            "n": self.strategy.n,
            "rate": self.rate,
            "power": self.power,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if include_strategy:
            out["strategy"] = self.strategy.to_dict()
        return out


def noise_covariance(spec: NoiseSpectrum, n: int, N: int | None = None) -> np.ndarray:
    """Toeplitz ``K_Z`` of the first ``n`` noise samples, with a tiny ridge."""
    if n < 1:
        raise ValueError("n must be at least 1")
    N = resolve_grid(spec, N)
    if spec.grid_size is None and N < 4 * n:
        N = 1 << int(np.ceil(np.log2(4 * n)))
    gamma = autocovariance(spec, n - 1, N)
    K = toeplitz(gamma) + RIDGE * gamma[0] * np.eye(n)
    try:
        np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        raise ValueError("spectrum resolution insufficient: K_Z is not positive definite") from None
    return K


def _logdet(M):
    try:
        c, _ = cho_factor(M, lower=True)
    except np.linalg.LinAlgError:
        raise ValueError("invalid strategy: output covariance is not positive definite") from None
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def _inner(K_V, B, K_Z):
    L = B + np.eye(B.shape[0])
    M = K_V + L @ K_Z @ L.T
    return 0.5 * (M + M.T)


def _power(K_V, B, K_Z):
    return float(np.trace(K_V) + np.sum((B @ K_Z) * B))


def evaluate_block_rate(strategy: BlockStrategy, K_Z: np.ndarray):
    """``(rate, power)`` of an ``n``-block strategy, rate in nats per symbol."""
    K_Z = np.asarray(K_Z, dtype=float)
    n = strategy.n
    if K_Z.shape != (n, n):
        raise ValueError("K_Z shape does not match the strategy")
    rate = (_logdet(_inner(strategy.K_V, strategy.B, K_Z)) - _logdet(K_Z)) / (2 * n)
    return rate, _power(strategy.K_V, strategy.B, K_Z) / n


def logdet_gradient(K_V, B, K_Z) -> np.ndarray:
    """Gradient of ``logdet(K_V + (B+I) K_Z (B+I)^T)`` in the strictly lower entries of ``B``."""
    M = _inner(K_V, B, K_Z)
    G = 2.0 * cho_solve(cho_factor(M, lower=True), (B + np.eye(B.shape[0])) @ K_Z)
    return np.tril(G, -1)


def normalized_objective(K_V, B, K_Z, total_power):
    """logdet after rescaling ``(K_V, B) -> (c^2 K_V, c B)`` to total power ``total_power``."""
    p = _power(K_V, B, K_Z)
    c = np.sqrt(total_power / p)
    return _logdet(_inner(c * c * K_V, c * B, K_Z))


def normalized_gradient(K_V, B, K_Z) -> np.ndarray:
    """Gradient of :func:`normalized_objective` in ``B``, taken at the current power."""
    M = _inner(K_V, B, K_Z)
    fac = cho_factor(M, lower=True)
    G = 2.0 * cho_solve(fac, (B + np.eye(B.shape[0])) @ K_Z)
    p = _power(K_V, B, K_Z)
    coef = (np.sum(G * B) + 2.0 * np.trace(cho_solve(fac, K_V))) / p
    return np.tril(G - coef * (B @ K_Z), -1)


def _kv_step(B, K_Z, total_power):
    """Best ``K_V`` for fixed ``B``: water-fill the eigenvalues of ``(B+I) K_Z (B+I)^T``."""
    budget = total_power - float(np.sum((B @ K_Z) * B))
    F = _inner(np.zeros_like(B), B, K_Z)
    f, Q = np.linalg.eigh(F)
    if budget <= 0:
        return np.zeros_like(B)
    order = np.sort(f)
    levels = np.zeros_like(f)
    for k in range(1, f.size + 1):
        mu = (budget + order[:k].sum()) / k
        if k == f.size or mu <= order[k]:
            levels = np.maximum(mu - f, 0.0)
            break
    K_V = (Q * levels) @ Q.T
    return 0.5 * (K_V + K_V.T)


def _rescale(K_V, B, K_Z, total_power):
    p = _power(K_V, B, K_Z)
    c = np.sqrt(total_power / p)
    return c * c * K_V, c * B


def _ascend(K_V, B, K_Z, total_power, max_iters, tol, b_steps):
    """Coordinate ascent from a normalized start; returns the final state and trace."""
    history = [_logdet(_inner(K_V, B, K_Z))]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        K_V = _kv_step(B, K_Z, total_power)
        f = _logdet(_inner(K_V, B, K_Z))
        for _ in range(b_steps):
            G = normalized_gradient(K_V, B, K_Z)
            gnorm2 = float(np.sum(G * G))
            if gnorm2 < 1e-28:
                break
            step = min(step * 2.0, 1e6)
            while step > 1e-14:
                K_try, B_try = _rescale(K_V, B + step * G, K_Z, total_power)
                f_try = _logdet(_inner(K_try, B_try, K_Z))
                if f_try >= f + 1e-4 * step * gnorm2:
                    K_V, B, f = K_try, B_try, f_try
                    break
                step *= 0.5
            else:
                break
        history.append(f)
        if abs(history[-1] - history[-2]) <= tol * max(1.0, abs(history[-1])):
            converged = True
            break
    return K_V, B, history, it, converged


def optimize(
    spec: NoiseSpectrum,
    n: int,
    P: float,
    restarts: int = 8,
    max_iters: int = 500,
    tol: float = 1e-12,
    seed: int = 0,
    init: BlockStrategy | None = None,
    N: int | None = None,
    b_steps: int = 10,
    n_max: int = 64,
) -> BlockResult:
    """Local maximization of the ``n``-block rate under power ``P``.

    Each restart alternates an exact ``K_V`` update (water-filling on the
    eigenvalues of ``(B+I) K_Z (B+I)^T`` with the power left after feedback)
    with backtracking gradient steps on ``B``.  After every ``B`` step the
    pair ``(K_V, B)`` is rescaled back onto the power constraint, so the
    accepted objective values never decrease.  Restart 0 starts from
    ``K_V = P I, B = 0``; the others use seeded random ``B``.  ``init`` is
    tried as an additional start.  The best restart is returned, ties going
    to the earlier start.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > n_max:
        raise ValueError(f"n={n} exceeds the optimizer limit n_max={n_max}")
    if not P > 0:
        raise ValueError("power must be positive")
    K_Z = noise_covariance(spec, n, N)
    total = n * P
    children = np.random.SeedSequence(seed).spawn(max(restarts, 1))
    starts = []
    for r, child in enumerate(children):
        if r == 0:
            B0 = np.zeros((n, n))
        else:
            rng = np.random.default_rng(child)
            B0 = np.tril(rng.normal(scale=0.5 / np.sqrt(n), size=(n, n)), -1)
        starts.append(_rescale(P * np.eye(n), B0, K_Z, total))
    if init is not None:
        if init.n != n:
            raise ValueError("init strategy has the wrong block length")
        K0, B0 = init.K_V, init.B
        if _power(K0, B0, K_Z) <= 0:
            K0 = P * np.eye(n)
        starts.append(_rescale(K0, B0, K_Z, total))

    best = None
    for K0, B0 in starts:
        K_V, B, hist, its, conv = _ascend(K0, B0, K_Z, total, max_iters, tol, b_steps)
        strat = BlockStrategy(K_V, B)
        rate, power = evaluate_block_rate(strat, K_Z)
        if best is None or rate > best.rate + 1e-12:
            best = BlockResult(rate, power, strat, its, conv, hist)
    return best


def double_strategy(strategy: BlockStrategy) -> BlockStrategy:
    """Two independent copies of an ``n``-block strategy as a ``2n``-block one."""
    return BlockStrategy(
        block_diag(strategy.K_V, strategy.K_V), block_diag(strategy.B, strategy.B)
    )


def truncated_stationary_strategy(
    B: CausalFilter, n: int, epsilon: float | None = None, P: float = 1.0
) -> BlockStrategy:
    """Block strategy from the first ``n - 1`` taps of a stationary filter.

    ``B_n`` is the lower-triangular Toeplitz matrix of ``b_1..b_{n-1}``;
    ``K_V = epsilon I`` with ``epsilon`` defaulting to ``1e-4 P``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    eps = 1e-4 * P if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    col = np.zeros(n)
    if n > 1:
        col[1:] = B.impulse_response(n - 1)
    Bn = np.tril(toeplitz(col, np.zeros(n)), -1)
    return BlockStrategy(eps * np.eye(n), Bn)
