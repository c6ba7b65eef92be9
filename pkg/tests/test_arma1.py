import math

import numpy as np
import pytest

from gfbcap.arma1 import (
    ar1_capacity,
    feedback_capacity,
    feedback_sign,
    optimal_filter,
    quartic,
    solve_x0,
)
from gfbcap.spectrum import Arma1Spectrum
from gfbcap.waterfilling import capacity_nofb

from conftest import arma_grid


def sign_scan_root(P, a, b, points=10**6):
    """Bracket of the sign change of the quartic on a uniform grid over (0, 1)."""
    x = np.linspace(0.0, 1.0, points + 1)[1:-1]
    s = feedback_sign(a, b)
    g = P * x**2 * (1 + s * b * x) ** 2 - (1 - x**2) * (1 + s * a * x) ** 2
    change = np.flatnonzero(np.diff(g < 0))  # a root on a node counts once
    return x, change


class TestExamples:
    def test_white_p3(self):
        sol = solve_x0(3.0, 0.0, 0.0)
        assert sol.x0 == pytest.approx(0.5, abs=1e-15)
        assert sol.capacity == pytest.approx(math.log(2), abs=1e-15)

    def test_white_p1(self):
        sol = solve_x0(1.0, 0.0, 0.0)
        assert sol.x0 == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert sol.capacity == pytest.approx(0.5 * math.log(2), abs=1e-15)

    def test_ar1_against_sign_scan(self):
        sol = solve_x0(1.0, 0.0, 0.9)
        x, change = sign_scan_root(1.0, 0.0, 0.9)
        assert change.size == 1
        assert x[change[0]] <= sol.x0 <= x[change[0] + 1]
        # 40-digit polynomial root
        assert sol.x0 == pytest.approx(0.55486040465230137873, abs=1e-14)
        assert sol.capacity == pytest.approx(-math.log(sol.x0), abs=0)

    def test_filter_identities(self):
        sol = solve_x0(3.0, 0.0, 0.0)
        assert sol.sigma == 1
        assert sol.y == pytest.approx(-1.5, abs=1e-14)
        assert sol.implied_power == pytest.approx(3.0, abs=1e-13)

    def test_ar1_wrapper(self):
        assert ar1_capacity(3.0, 0.0) == pytest.approx(math.log(2), abs=1e-15)
        assert ar1_capacity(1.0, 0.5) == solve_x0(1.0, 0.0, 0.5).capacity

    def test_beta_sign_symmetry(self):
        frozen = 0.49681527627555227702  # from the 40-digit root
        assert ar1_capacity(1.0, -0.5) == pytest.approx(frozen, abs=1e-14)
        assert ar1_capacity(1.0, 0.5) == pytest.approx(frozen, abs=1e-14)


class TestInvariants:
    @pytest.mark.parametrize("P,a,b", arma_grid())
    def test_solution_invariants(self, P, a, b):
        sol = solve_x0(P, a, b)
        assert 0 < sol.x0 < 1
        assert sol.residual < 1e-12
        assert abs(sol.implied_power - P) < 1e-10
        assert sol.sigma == (1 if b >= a else -1)

    @pytest.mark.parametrize("P,a,b", arma_grid() + [(1.0, 1.0, 0.3), (2.0, -1.0, -0.5)])
    def test_root_unique(self, P, a, b):
        _, change = sign_scan_root(P, a, b, 10**5)
        assert change.size == 1

    def test_quartic_endpoints(self):
        for P, a, b in arma_grid():
            assert quartic(0.0, P, a, b) < 0 < quartic(1.0, P, a, b)

    @pytest.mark.parametrize("P,a,b", arma_grid())
    def test_feedback_at_least_nofb(self, P, a, b):
        fb = solve_x0(P, a, b).capacity
        nofb = capacity_nofb(Arma1Spectrum(a, b), P).capacity
        assert fb >= nofb - 1e-9
        if a == b:
            assert abs(fb - nofb) < 1e-9
        else:
            assert fb > nofb + 1e-9

    @pytest.mark.parametrize("a,b", [(0.0, 0.5), (-0.5, 0.9), (0.5, -0.9), (1.0, 0.0)])
    def test_monotone_in_power(self, a, b):
        Ps = np.geomspace(0.01, 100, 30)
        sols = [solve_x0(P, a, b) for P in Ps]
        assert np.all(np.diff([s.capacity for s in sols]) > 0)
        assert np.all(np.diff([s.x0 for s in sols]) < 0)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_continuous_at_unit_alpha(self, sign):
        edge = solve_x0(1.0, sign, 0.3).capacity
        gaps = [abs(solve_x0(1.0, sign * (1 - 10.0**-k), 0.3).capacity - edge) for k in range(2, 9)]
        assert np.all(np.diff(gaps) < 0)
        assert gaps[-1] < 1e-6


class TestErrors:
    def test_power_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_x0(0.0, 0.0, 0.5)
        assert feedback_capacity(0.0, 0.0, 0.5) == 0.0

    def test_ranges(self):
        with pytest.raises(ValueError, match="alpha"):
            solve_x0(1.0, 1.5, 0.0)
        with pytest.raises(ValueError, match="beta"):
            solve_x0(1.0, 0.0, -1.0)

    def test_unit_alpha_has_capacity_but_no_filter(self):
        sol = solve_x0(1.0, 1.0, 0.2)
        assert sol.filter is None and sol.residual < 1e-12
        with pytest.raises(ValueError, match="unit circle"):
            optimal_filter(1.0, 0.2, sol.x0, sol.sigma, sol.y)

    def test_tie_break_sigma(self):
        assert feedback_sign(0.3, 0.3) == 1
