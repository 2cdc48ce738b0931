import numpy as np
import pytest
from hypothesis import given, strategies as st

from radialmass import presets
from radialmass.core import DomainError, Grid, ModelParams, Trajectory, build_grid
from radialmass.core import sample_initial_mass
from radialmass.explicit import TwoDeltaParams, VortexParams
from radialmass.scheme import run_scheme
from radialmass.shocks import (
    ShockPath,
    extract_shock_from_trajectory,
    front_positions,
    integrate_front,
    integrate_second_front,
    rh_speed,
)

P2 = ModelParams(2.0)
VP = VortexParams(1.0, 1.0)


def run(datum, h, t_final, domain=3.0, levels=50):
    g = build_grid(datum, P2, h, t_final, domain)
    return run_scheme(sample_initial_mass(datum, g), g, P2, store_every=max(1, g.n_time // levels))


class TestRHSpeed:
    def test_front(self):
        assert rh_speed(1.0, 1.0, 0.0, P2) == 1.0

    def test_equal_states_limit(self):
        c = 0.7
        assert rh_speed(1.0, c, c, P2) == pytest.approx(2 * c)
        assert rh_speed(1.0, c, c + 1e-8, P2) == pytest.approx(2 * c, rel=1e-7)
        p3 = ModelParams(3.0)
        assert rh_speed(2.0, c, c - 1e-8, p3) == pytest.approx(2.0 * 3 * c * c, rel=1e-7)

    def test_vortex_front_speed(self):
        t = 0.8
        u = VP.height(t, P2)
        assert rh_speed(1.0, u, 0.0, P2) == pytest.approx((1 + 2 * t) ** -0.5)

    def test_negative(self):
        with pytest.raises(DomainError):
            rh_speed(-1.0, 1.0, 0.0, P2)

    @given(st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(1.0, 4.0))
    def test_nonnegative(self, a, b, alpha):
        assert rh_speed(1.0, a, b, ModelParams(alpha)) >= 0.0


class TestIntegrateFront:
    def ul(self, t, s):
        return VP.height(t, P2)

    def test_vortex_closed_form(self):
        path = integrate_front(self.ul, 1.0, 1.0, 1.0, P2, edge_density=1.0)
        assert path.locations[-1] == pytest.approx(3.0 ** 0.5, rel=1e-6)
        assert np.all(np.diff(path.locations) >= 0)

    def test_zero_density(self):
        path = integrate_front(lambda t, s: 0.0, 1.0, 0.4, 1.0, P2, step=0.01)
        assert np.all(path.locations == 0.4)

    def test_fourth_order(self):
        ends = [integrate_front(self.ul, 1.0, 1.0, 1.0, P2, step=s).locations[-1]
                for s in (0.2, 0.1, 0.05)]
        d1, d2 = abs(ends[0] - ends[1]), abs(ends[1] - ends[2])
        assert d1 <= 16 * d2
        assert d1 / d2 > 12

    def test_last_characteristic_bound(self):
        fast = lambda t, s: 3.0
        with pytest.raises(DomainError, match="last characteristic"):
            integrate_front(fast, 1.0, 1.0, 0.5, P2, step=0.01, edge_density=1.0)

    def test_invalid_density(self):
        with pytest.raises(DomainError):
            integrate_front(lambda t, s: float("nan"), 1.0, 1.0, 0.1, P2, step=0.01)

    def test_second_front(self):
        p = TwoDeltaParams(0.5, 0.5, 0.0, 1.0)
        path = integrate_second_front(p, p.t_valid(P2) / 2, P2)
        keep = path.times > 0
        exact = p.s2(path.times[keep], P2)
        assert np.max(np.abs(path.locations[keep] / exact - 1)) <= 1e-5
        assert path.kind == "internal"

    @pytest.mark.parametrize("m1, m2, alpha", [(0.3, 1.2, 1.5), (1.0, 0.2, 3.0)])
    def test_second_front_other_params(self, m1, m2, alpha):
        p = TwoDeltaParams(m1, m2, 0.0, 2.0)
        prm = ModelParams(alpha)
        path = integrate_second_front(p, min(0.5, p.t_valid(prm) / 2), prm)
        assert path.locations[-1] == pytest.approx(float(p.s2(path.times[-1], prm)), rel=1e-5)


class TestExtract:
    def test_delta_front(self):
        h = 0.01
        tr = run(presets.delta(1.0, 0.5), h, 1.0)
        sp = extract_shock_from_trajectory(tr)
        t = sp.times[1:]
        exact = 0.5 + (2 * t) ** 0.5
        slope = (2 * t) ** -0.5
        assert np.all(np.abs(sp.locations[1:] - exact) <= h + h ** (1 / 3) / slope)

    def test_zero_datum_degenerate(self):
        g = Grid(0.1, 0.1, 10, 3, 0.0, 0.0, 2.0, trivial=True)
        tr = Trajectory(np.zeros((4, 11)), [0, 1, 2, 3], g, P2)
        sp = extract_shock_from_trajectory(tr)
        assert sp.degenerate and np.all(sp.locations == 0)

    def test_vortex_front(self):
        h = 0.005
        tr = run(presets.vortex(), h, 1.0)
        sp = extract_shock_from_trajectory(tr)
        assert np.all(np.abs(sp.locations - VP.front(sp.times, P2)) <= h + h ** (1 / 3))
        # monotone-cutoff data: behind the last characteristic S0 + alpha M u0^(alpha-1) t
        assert np.all(sp.locations <= 1.0 + 2.0 * sp.times + 2 * h)
        assert np.all(np.diff(sp.locations) >= 0)

    def test_level_not_reached(self):
        with pytest.raises(DomainError):
            front_positions(np.array([[0.0, 0.5, 0.7]]), 0.1, 1.0)

    def test_interpolated_position(self):
        assert front_positions(np.array([[0.0, 0.5, 1.0]]), 0.1, 0.75)[0] == pytest.approx(0.15)

    def test_bad_fraction(self):
        tr = run(presets.vortex(), 0.1, 0.1)
        with pytest.raises(DomainError):
            extract_shock_from_trajectory(tr, 0.0)

    def test_shock_path_validation(self):
        with pytest.raises(DomainError):
            ShockPath([0.0, 1.0], [0.0], "support-front")
        with pytest.raises(DomainError):
            ShockPath([0.0], [0.0], "sideways")
