"""Mollified Hessians and hull-membership reports.

scipy.integrate.quad provides the reference mass of the normalized bump;
the midpoint value of a mollified piecewise quadratic has the closed form
(a + b) / 2 at the breakpoint for any even profile.
"""
import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import quad

from convexgap import (MollifierConfig, MollificationReport, SamplingConfig,
                       make_builtin, mollification_membership_check,
                       mollified_hessian)
from convexgap.errors import IntegrationError
from convexgap.smoothing import mollifier_mass, profile_density


class TestProfiles:
    @pytest.mark.parametrize("profile", ["bump", "quartic"])
    def test_unit_mass_against_quad(self, profile):
        ref, err = quad(lambda t: float(profile_density(profile, t)),
                        -1.0, 1.0, limit=200)
        assert err < 1e-8
        assert ref == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("profile", ["bump", "quartic"])
    def test_even_and_compactly_supported(self, profile):
        ts = np.linspace(-0.99, 0.99, 21)
        np.testing.assert_allclose(profile_density(profile, ts),
                                   profile_density(profile, -ts), atol=1e-14)
        assert float(profile_density(profile, 1.0)) == 0.0
        assert float(profile_density(profile, -1.5)) == 0.0

    def test_unknown_profile(self):
        with pytest.raises(ValueError, match="unknown mollifier profile"):
            profile_density("triangle", 0.0)

    def test_quadrature_mass_matches(self):
        cfg = MollifierConfig()
        assert mollifier_mass(cfg) == pytest.approx(1.0, abs=1e-8)
        assert mollifier_mass(cfg, dim=2) == pytest.approx(1.0, abs=1e-8)


class TestMollifierConfig:
    def test_rejects_empty_schedule(self):
        with pytest.raises(ValueError):
            MollifierConfig(epsilons=())

    def test_rejects_non_decreasing(self):
        with pytest.raises(ValueError):
            MollifierConfig(epsilons=(1e-2, 1e-1))

    def test_rejects_too_few_nodes(self):
        with pytest.raises(ValueError):
            MollifierConfig(quadrature_points=1)

    def test_rejects_unknown_profile(self):
        with pytest.raises(ValueError):
            MollifierConfig(profile="gaussian")

    def test_dict_round_trip(self):
        cfg = MollifierConfig(epsilons=(0.5, 0.25), quadrature_points=33,
                              profile="quartic")
        assert MollifierConfig.from_dict(cfg.to_dict()) == cfg

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown mollifier options"):
            MollifierConfig.from_dict({"eps": [0.1]})


class TestMollifiedHessian:
    def test_constant_curvature_is_unchanged(self):
        f = make_builtin("quadratic", {"matrix": [[1.0, 0.5], [0.5, -2.0]]})
        for eps in (0.5, 1e-2):
            h = mollified_hessian(f, [0.3, -0.1], eps)
            np.testing.assert_allclose(h.entries,
                                       [[1.0, 0.5], [0.5, -2.0]], atol=1e-10)

    def test_breakpoint_midpoint_value(self):
        # even profile at the breakpoint averages the two curvatures
        f = make_builtin("pw_quad", {"a": 2.0, "b": 4.0})
        for eps in (1e-1, 1e-2, 1e-3):
            h = mollified_hessian(f, [0.0], eps)
            assert h.entries[0, 0] == pytest.approx(3.0, abs=1e-9)

    def test_away_from_breakpoint_sees_one_side(self):
        f = make_builtin("pw_quad", {"a": 2.0, "b": 4.0})
        h = mollified_hessian(f, [0.5], 0.1)
        assert h.entries[0, 0] == pytest.approx(2.0, abs=1e-8)
        h = mollified_hessian(f, [-0.5], 0.1)
        assert h.entries[0, 0] == pytest.approx(4.0, abs=1e-8)

    def test_partial_overlap_is_between_sides(self):
        f = make_builtin("mixed")
        h = mollified_hessian(f, [0.05], 0.1)
        assert -1.0 < h.entries[0, 0] < 1.0
        assert h.entries[0, 0] > 0.0  # more mass on the positive side

    def test_two_dimensional_smooth(self):
        f = make_builtin("neg_cos_sum")
        h = mollified_hessian(f, [0.0, 0.0], 0.1)
        # averaged cos over a small ball stays near 1, exactly symmetric
        assert h.entries[0, 0] == pytest.approx(1.0, abs=5e-3)
        assert h.entries[0, 0] == pytest.approx(h.entries[1, 1], abs=1e-12)
        assert abs(h.entries[0, 1]) < 1e-12

    def test_requires_positive_eps(self):
        with pytest.raises(ValueError):
            mollified_hessian(make_builtin("mixed"), [0.0], 0.0)

    def test_requires_hessian_oracle(self):
        from convexgap import without_hessian
        f = without_hessian(make_builtin("mixed"))
        with pytest.raises(ValueError, match="hessian_at"):
            mollified_hessian(f, [0.0], 0.1)

    def test_rejects_high_dimension(self):
        f = make_builtin("convex_smooth", {"dim": 3})
        with pytest.raises(ValueError, match="dim"):
            mollified_hessian(f, [0.0, 0.0, 0.0], 0.1)

    def test_rejects_wrong_point_dimension(self):
        with pytest.raises(ValueError):
            mollified_hessian(make_builtin("mixed"), [0.0, 0.0], 0.1)

    def test_domain_guard(self):
        f = dataclasses.replace(make_builtin("mixed"),
                                domain=(np.array([-1.0]), np.array([1.0])))
        with pytest.raises(ValueError, match="domain"):
            mollified_hessian(f, [0.95], 0.1)

    def test_undeclared_breakpoint_raises(self):
        # odd node count places a node exactly on the hidden kink
        f = dataclasses.replace(make_builtin("mixed"), kinks=())
        with pytest.raises(IntegrationError):
            mollified_hessian(f, [0.0], 0.1)


class TestMembershipCheck:
    def test_kink_report_passes(self):
        report = mollification_membership_check(make_builtin("kink"), [0.0])
        assert isinstance(report, MollificationReport)
        assert report.passed
        assert report.interval[0] == pytest.approx(1.0, abs=1e-9)
        assert report.interval[1] == pytest.approx(3.0, abs=1e-9)
        assert len(report.samples) == 3
        assert report.samples[-1].distance <= 1e-6
        for s in report.samples:
            assert 1.0 - 1e-3 <= s.ell_value <= 3.0 + 1e-3

    def test_mixed_report_passes(self):
        report = mollification_membership_check(make_builtin("mixed"), [0.0])
        assert report.passed
        assert report.interval[0] == pytest.approx(0.0, abs=1e-9)
        assert report.interval[1] == pytest.approx(1.0, abs=1e-9)

    def test_custom_schedule_length(self):
        cfg = MollifierConfig(epsilons=(0.2, 0.1))
        report = mollification_membership_check(make_builtin("kink"), [0.0], cfg)
        assert len(report.samples) == 2
        assert tuple(s.eps for s in report.samples) == (0.2, 0.1)

    def test_json_entries_shape(self):
        report = mollification_membership_check(make_builtin("kink"), [0.0])
        entries = report.to_json_entries()
        assert len(entries) == len(report.samples)
        assert set(entries[0]) == {"eps", "distance", "ell", "pass"}

    def test_respects_sampling_seed(self):
        cfg = MollifierConfig(epsilons=(0.1,))
        r1 = mollification_membership_check(
            make_builtin("kink"), [0.0], cfg, SamplingConfig(seed=5))
        r2 = mollification_membership_check(
            make_builtin("kink"), [0.0], cfg, SamplingConfig(seed=5))
        assert r1.samples[0].distance == r2.samples[0].distance
        assert r1.samples[0].ell_value == r2.samples[0].ell_value


def test_smooth_function_mollification_is_nearly_exact():
    f = make_builtin("neg_cos_sum")
    x = np.array([0.4, -0.9])
    h = mollified_hessian(f, x, 1e-3)
    np.testing.assert_allclose(h.entries, np.diag(np.cos(x)), atol=1e-5)
