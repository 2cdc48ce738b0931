import math
from dataclasses import replace

import numpy as np
import pytest

from radialmass import presets
from radialmass.core import DomainError, InitialDatum, ModelParams, build_grid
from radialmass.core import sample_initial_mass
from radialmass.explicit import ansatz_mass
from radialmass.scheme import run_scheme
from radialmass.waiting_time import (
    FINITE,
    INCONCLUSIVE,
    INFINITE,
    WaitingTimeVerdict,
    classify,
    measure_onset,
    quotient,
    sup_quotient,
    subsolution_horizon,
    supersolution_times,
    supersolution_upper_bound,
)

P2 = ModelParams(2.0)


def scheme_onset(datum, h, t_final=0.7, domain=2.5):
    g = build_grid(datum, P2, h, t_final, domain)
    return measure_onset(run_scheme(sample_initial_mass(datum, g), g, P2), datum.c0), g


def without_edge_law(datum):
    return replace(datum, edge_behavior=None)


def restricted(datum, a):
    """``u0`` set to zero on ``[0, a)``: same behaviour at the edge."""
    ma = float(datum.mass(a))
    return InitialDatum(
        total_mass=datum.total_mass - ma,
        lipschitz_bound=datum.lipschitz_bound,
        density=lambda r: np.where(np.asarray(r) >= a, datum.u0(r), 0.0),
        cumulative=lambda r: np.clip(datum.mass(np.maximum(r, a)) - ma, 0.0, None),
        support_end=datum.support_end,
        deficit=datum.deficit,
        name=datum.name + "-restricted",
    )


class TestClassify:
    @pytest.mark.parametrize("beta, expected", [
        (0.5, INFINITE), (0.99, INFINITE), (1.0, FINITE), (1.01, FINITE), (2.0, FINITE)])
    def test_power_family_alpha2(self, beta, expected):
        assert classify(presets.power_beta(beta), P2).classification == expected

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_flip_at_critical_beta(self, alpha):
        p = ModelParams(alpha)
        crit = 1.0 / (alpha - 1.0)
        assert classify(presets.power_beta(crit * (1 - 1e-6)), p).classification == INFINITE
        assert classify(presets.power_beta(crit), p).classification == FINITE
        assert classify(presets.power_beta(crit * (1 + 1e-6)), p).classification == FINITE

    @pytest.mark.parametrize("beta, expected", [(0.5, INFINITE), (1.0, FINITE), (1.5, FINITE)])
    def test_mesh_regression(self, beta, expected):
        v = classify(without_edge_law(presets.power_beta(beta)), P2)
        assert v.method == "mesh"
        assert v.classification == expected

    def test_no_characteristics(self):
        v = classify(presets.no_characteristics(0.5, 2.0), P2)
        assert v.classification == INFINITE and math.isinf(v.limsup_estimate)

    def test_delta_at_edge(self):
        assert classify(presets.delta(1.0, 1.0), P2).classification == INFINITE

    def test_alpha_one(self):
        assert classify(presets.power_beta(3.0), ModelParams(1.0)).classification == INFINITE

    def test_critical_constant(self):
        v = classify(presets.power_beta(1.0), P2)
        assert v.limsup_estimate == pytest.approx(1.0)
        assert v.sup_quotient == pytest.approx(1.0)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
    def test_scale_consistent(self, beta):
        d = without_edge_law(presets.power_beta(beta))
        assert classify(restricted(d, 0.5), P2).classification == classify(d, P2).classification

    def test_inconclusive_on_oscillation(self):
        # deficit x^2 (1 + 0.5 sin(log2 x)) has quotient oscillating with zero trend
        def deficit(r):
            x = np.clip(1.0 - np.asarray(r, float), 1e-300, None)
            return 0.75 * x ** 2 * (1 + 0.3 * np.sin(2.5 * np.log2(x))) * (np.asarray(r) < 1.0)
        d = InitialDatum(total_mass=0.75, lipschitz_bound=5.0,
                         density=lambda r: np.zeros_like(np.asarray(r, float)),
                         support_end=1.0, deficit=deficit)
        assert classify(d, P2).classification == INCONCLUSIVE

    def test_zero_mass(self):
        with pytest.raises(DomainError):
            classify(InitialDatum(total_mass=0.0, lipschitz_bound=0.0), P2)

    def test_verdict_invariant(self):
        with pytest.raises(DomainError):
            WaitingTimeVerdict(FINITE, math.inf, 1.0)
        with pytest.raises(DomainError):
            WaitingTimeVerdict(FINITE, 1.0, None)

    def test_quotient(self):
        d = presets.power_beta(1.0)
        assert np.allclose(quotient(d, P2, [0.0, 0.5, 0.99]), 1.0)
        assert sup_quotient(d, P2) == pytest.approx(1.0)


class TestSubsolution:
    @pytest.mark.parametrize("C, expected", [(1.0, 0.25), (2.0, 0.125), (4.0, 0.0625)])
    def test_formula(self, C, expected):
        assert subsolution_horizon(C, 1.0, P2) == pytest.approx(expected, rel=1e-15)

    def test_infinite_C(self):
        assert subsolution_horizon(math.inf, 1.0, P2) == 0.0

    def test_verified_below_datum(self):
        d = presets.power_beta(1.0)
        T = subsolution_horizon(1.0, 1.0, P2, d)
        assert T == pytest.approx(0.25)
        r = np.linspace(0, 1, 5001)
        assert np.all(ansatz_mass(0.0, r, 1.0, 1.0, T, P2) <= d.mass(r) + 1e-12)

    def test_bisects_when_C_too_small(self):
        d = presets.power_beta(1.0)
        T = subsolution_horizon(0.5, 1.0, P2, d)
        assert T <= subsolution_horizon(0.5, 1.0, P2)
        r = np.linspace(0, 1, 5001)
        assert np.all(ansatz_mass(0.0, r, 1.0, 1.0, T, P2) <= d.mass(r) + 1e-12)

    def test_alpha_one(self):
        with pytest.raises(DomainError):
            subsolution_horizon(1.0, 1.0, ModelParams(1.0))


class TestOnset:
    def test_delta_at_edge_moves_at_once(self):
        d = presets.delta(1.0, 1.0)
        onset, g = scheme_onset(d, 0.01, t_final=0.05, domain=2.0)
        assert onset <= 10 * g.h_t

    def test_ordered_waiting_times(self):
        o1, _ = scheme_onset(presets.power_beta(1.0), 4e-3)
        o2, _ = scheme_onset(presets.power_beta(2.0), 4e-3)
        assert 0 < o1 < o2

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    def test_refinement_stabilizes(self, beta):
        d = presets.power_beta(beta)
        o = [scheme_onset(d, h)[0] for h in (8e-3, 4e-3, 2e-3)]
        assert abs(o[2] - o[1]) <= abs(o[1] - o[0])

    def test_never_moves(self):
        d = presets.power_beta(2.0)
        g = build_grid(d, P2, 0.01, 0.1, 2.0)
        tr = run_scheme(sample_initial_mass(d, g), g, P2)
        assert measure_onset(tr, 1.0) == tr.times[-1]

    def test_c0_outside(self):
        d = presets.vortex()
        g = build_grid(d, P2, 0.1, 0.1, 2.0)
        with pytest.raises(DomainError):
            measure_onset(run_scheme(sample_initial_mass(d, g), g, P2), 5.0)


class TestSupersolution:
    @pytest.mark.parametrize("beta, expected", [(1.0, 0.5625), (2.0, 1.125)])
    def test_reference(self, beta, expected):
        # min over k of t_k from a 40-digit mpmath evaluation with an independent K^-1
        assert supersolution_upper_bound(presets.power_beta(beta), P2) == pytest.approx(
            expected, rel=1e-9)

    def test_divergent_quotient_gives_small_bound(self):
        times = supersolution_times(presets.power_beta(0.5), P2)
        tk = [t for k, _, t in times if k > 0]
        assert tk[-1] < 1e-6
        assert np.all(np.diff(tk[5:]) < 0)

    def test_finite_for_any_compact_datum(self):
        for d in (presets.vortex(), presets.power_beta(3.0), presets.two_bumps()):
            assert math.isfinite(supersolution_upper_bound(d, P2))

    def test_bound_above_onset(self):
        onset, g = scheme_onset(presets.power_beta(1.0), 4e-3)
        assert supersolution_upper_bound(presets.power_beta(1.0), P2) >= onset - 2 * g.h_t
