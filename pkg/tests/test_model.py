"""Model data: ramps, moisture, initial data, validation, delta, s*."""

import math

import numpy as np
import pytest

import swellfront as sf
from swellfront.errors import (
    AssumptionViolationError,
    InvalidParameterError,
    NoInverseError,
)

from conftest import canonical_instance, growth_instance, phi_growth


class TestRamp:
    def test_zero_on_nonpositive_inputs(self):
        ramp = sf.make_ramp(1.0, 1.0)
        assert ramp.eval(-0.3) == 0.0
        assert ramp.eval(0.0) == 0.0

    def test_plateau_beyond_threshold(self):
        ramp = sf.make_ramp(1.0, 1.0)
        assert ramp.eval(2.5) == 1.0
        assert ramp.eval(1.0) == 1.0

    def test_midpoint_value(self):
        # cubic profile: 3 (1/2)^2 - 2 (1/2)^3 = 3/4 - 1/4
        assert sf.make_ramp(1.0, 1.0).eval(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_derivative_sup_closed_form(self):
        # max of 6 x (1 - x) is 1.5 at the midpoint, scaled by plateau / r
        assert sf.make_ramp(1.0, 1.0).derivative_sup() == pytest.approx(1.5)
        assert sf.make_ramp(2.0, 0.3).derivative_sup() == pytest.approx(0.225)

    def test_non_positive_arguments_rejected(self):
        with pytest.raises(InvalidParameterError):
            sf.make_ramp(0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            sf.make_ramp(1.0, -2.0)

    def test_exact_outside_values_random(self):
        ramp = sf.make_ramp(1.7, 0.8)
        rng = np.random.default_rng(42)
        below = -10.0 * rng.random(1000)
        above = 1.7 + 10.0 * rng.random(1000)
        assert all(ramp.eval(float(x)) == 0.0 for x in below)
        assert all(ramp.eval(float(x)) == 0.8 for x in above)
        arr = ramp.eval(below)
        assert np.all(arr == 0.0)
        assert np.all(ramp.eval(above) == 0.8)

    def test_nondecreasing(self):
        ramp = sf.make_ramp(1.7, 0.8)
        rng = np.random.default_rng(7)
        xs = np.sort(rng.uniform(-1.0, 3.0, 1000))
        vals = ramp.eval(xs)
        assert np.all(np.diff(vals) >= 0.0)

    def test_c1_matching_by_finite_differences(self):
        ramp = sf.make_ramp(1.3, 0.9)
        rng = np.random.default_rng(11)
        xs = np.concatenate([
            rng.uniform(-0.5, 2.0, 1000),
            [0.0, 1.3, 1e-9, 1.3 - 1e-9, -1e-9, 1.3 + 1e-9],
        ])
        step = 1e-6
        for x in xs:
            fd = (ramp.eval(float(x) + step) - ramp.eval(float(x) - step)) / (2 * step)
            assert abs(fd - ramp.derivative(float(x))) <= 1e-5

    def test_scalar_and_array_paths_agree(self):
        ramp = sf.make_ramp(1.3, 0.9)
        xs = np.linspace(-1.0, 2.0, 257)
        arr = ramp.eval(xs)
        for x, v in zip(xs, arr):
            assert ramp.eval(float(x)) == v
            assert ramp.derivative(float(x)) == ramp.derivative(np.asarray([x]))[0]


class TestMoisture:
    def test_constant_sup(self):
        h = sf.MoistureHistory.constant(1.2, 1.0)
        assert h.sup_norm == 1.2
        assert h.eval(0.37) == 1.2
        assert h.eval_derivative(0.37) == 0.0

    def test_linear_sup_at_endpoint(self):
        h = sf.MoistureHistory.linear(1.0, 0.5, 2.0)
        assert h.sup_norm == 2.0
        down = sf.MoistureHistory.linear(1.0, -0.3, 2.0)
        assert down.sup_norm == 1.0
        assert down.infimum() == pytest.approx(0.4)

    def test_sine_sup_exact_at_interior_critical_point(self):
        # peak of sin at t = 0.25 lies inside [0, 0.5]; sin >= 0 there, so
        # the infimum sits at the endpoints
        h = sf.MoistureHistory.sine(1.2, 0.2, 2.0 * np.pi, 0.0, 0.5)
        assert h.sup_norm == pytest.approx(1.4, abs=1e-14)
        assert h.infimum() == pytest.approx(1.2, abs=1e-14)
        # trough at t = 0.75 inside a longer horizon
        h3 = sf.MoistureHistory.sine(1.2, 0.2, 2.0 * np.pi, 0.0, 1.0)
        assert h3.infimum() == pytest.approx(1.0, abs=1e-14)
        # horizon too short to reach the peak: sup at the right endpoint
        h2 = sf.MoistureHistory.sine(1.2, 0.2, 2.0 * np.pi, 0.0, 0.1)
        assert h2.sup_norm == pytest.approx(1.2 + 0.2 * math.sin(0.2 * math.pi))

    def test_table_interpolation_and_sup(self):
        h = sf.MoistureHistory.table([0.0, 0.5, 1.0], [1.0, 2.0, 0.5], 1.0)
        assert h.sup_norm == 2.0
        assert h.eval(0.25) == pytest.approx(1.5)
        assert h.eval_derivative(0.25) == pytest.approx(2.0)
        assert h.eval_derivative(0.75) == pytest.approx(-3.0)

    def test_table_must_cover_horizon(self):
        with pytest.raises(InvalidParameterError):
            sf.MoistureHistory.table([0.0, 0.5], [1.0, 1.0], 1.0)


class TestInitialData:
    def test_u0_eval_linear(self):
        phi = phi_growth()
        init = sf.InitialData.linear(1.5, 0.6, 0.8, phi, 1.0)
        assert init.u0_eval(1.0, 1.0) == pytest.approx(0.6)
        assert init.u0_eval(1.5, 1.0) == pytest.approx(0.8)
        assert init.u0_eval(1.25, 1.0) == pytest.approx(0.7)

    def test_u0_table_min_at_node(self):
        phi = phi_growth()
        init = sf.InitialData.table(1.5, [0.6, 0.55, 0.7, 0.65], phi, 1.0)
        assert init.u0_min() == 0.55
        assert init.delta == pytest.approx(0.55 - phi.eval(1.0))


class TestComputeDelta:
    def test_constant_profile(self):
        phi = phi_growth()
        init = sf.InitialData.constant(1.5, 0.7, phi, 1.0)
        assert sf.compute_delta(init, phi, 1.0) == pytest.approx(0.7 - phi.eval(1.0))

    def test_increasing_affine_min_at_left(self):
        phi = phi_growth()
        left = phi.eval(1.0) + 0.1
        init = sf.InitialData.linear(1.5, left, phi.eval(1.5), phi, 1.0)
        assert sf.compute_delta(init, phi, 1.0) == pytest.approx(0.1)

    def test_sampled_min(self):
        phi = sf.make_ramp(2.0, 1.0)
        # phi(a) = 0.3 at a = phi^{-1}(0.3)
        a = sf.compute_sstar(phi, 0.0, 0.3)
        init = sf.InitialData.table(a + 0.4, [0.5, 0.4, 0.6], phi, a)
        assert sf.compute_delta(init, phi, a) == pytest.approx(0.1, abs=1e-12)

    def test_non_positive_margin_raises(self):
        phi = phi_growth()
        with pytest.raises(AssumptionViolationError):
            sf.InitialData.constant(1.5, phi.eval(1.0), phi, 1.0)


class TestComputeSstar:
    def test_full_margin_inverts_to_s0(self):
        phi = phi_growth()
        delta = phi.eval(1.5) - phi.eval(1.0)
        assert sf.compute_sstar(phi, 1.0, delta) == pytest.approx(1.5, abs=1e-10)

    def test_vanishing_margin_approaches_edge(self):
        phi = phi_growth()
        assert abs(sf.compute_sstar(phi, 1.0, 1e-9) - 1.0) <= 1e-6

    def test_known_inversion_point(self):
        # evaluate phi(1.0) first, then invert from a = 0.5
        phi = sf.make_ramp(2.0, 1.0)
        delta = phi.eval(1.0) - phi.eval(0.5)
        assert sf.compute_sstar(phi, 0.5, delta) == pytest.approx(1.0, abs=1e-10)

    def test_target_above_plateau_raises(self):
        phi = phi_growth()
        with pytest.raises(NoInverseError):
            sf.compute_sstar(phi, 1.0, 2.0)

    def test_identity_on_random_points(self):
        phi = sf.make_ramp(2.0, 1.0)
        a = 0.7
        rng = np.random.default_rng(3)
        for s in rng.uniform(a + 1e-6, 2.0 - 1e-6, 200):
            delta = phi.eval(float(s)) - phi.eval(a)
            assert abs(sf.compute_sstar(phi, a, delta) - s) <= 1e-10


class TestValidation:
    def test_canonical_instance_all_pass(self):
        report = sf.validate_assumptions(canonical_instance())
        assert report.all_pass
        # every check appears exactly once
        names = [c.name for c in report.checks]
        assert len(names) == len(set(names))

    def test_plateau_exceeds_twice_edge_value(self):
        # widen the ramp so a sits below its midpoint: 2 phi(a) < c0
        inst = growth_instance(h=sf.MoistureHistory.constant(5.0, 0.5))
        bad = sf.ProblemInstance(params=inst.params, beta=inst.beta,
                                 phi=sf.make_ramp(3.0, 1.0),
                                 h=inst.h, init=inst.init)
        report = sf.validate_assumptions(bad)
        failed = [c.name for c in report.failures()]
        assert "plateau_compatibility" in failed

    def test_plateau_exceeds_moisture_ceiling(self):
        inst = growth_instance(h=sf.MoistureHistory.constant(0.6, 0.5))
        report = sf.validate_assumptions(inst)
        failed = [c.name for c in report.failures()]
        assert "plateau_compatibility" in failed

    def test_initial_profile_strictness(self):
        phi = phi_growth()
        init = sf.InitialData(s0=1.5, kind="constant", value=phi.eval(1.0), delta=0.0)
        inst = growth_instance(init=init)
        report = sf.validate_assumptions(inst)
        failed = [c.name for c in report.failures()]
        assert "initial_profile" in failed

    def test_total_never_raises(self):
        # structurally broken instances still produce a full report
        phi = phi_growth()
        init = sf.InitialData(s0=0.5, kind="table", values=(float("nan"), 1.0),
                              delta=-1.0)
        inst = sf.ProblemInstance(
            params=sf.ModelParams(a=1.0, a0=1.0, H=1.0, k=1.0, T=1.0),
            beta=sf.make_ramp(1.0, 1.0), phi=phi,
            h=sf.MoistureHistory.constant(0.0, 1.0), init=init)
        report = sf.validate_assumptions(inst)
        assert not report.all_pass
        assert len(report.checks) == 8
