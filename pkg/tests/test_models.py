import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saturex import models as M
from saturex.models import ModelError, PhiFamily, PsiFamily


CATALOG_IDS = ["rhe", "wilson", "larsen:p=4", "larsen:p=1.5", "coth", "tanh:gamma=1"]


def _models():
    return [M.model_from_id(mid) for mid in CATALOG_IDS]


class TestEvalPsi:
    def test_zero_at_origin_exact(self):
        for model in _models():
            assert M.eval_psi(model, 0.0) == 0.0

    def test_relativistic_p2_value(self):
        model = M.model_from_id("rhe")
        assert M.eval_psi(model, 1.0) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)

    def test_wilson_value(self):
        assert M.eval_psi(M.model_from_id("wilson"), 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_coth_small_argument_series(self):
        # Taylor oracle: coth(r) - 1/r = r/3 - r^3/45 + O(r^5)
        model = M.model_from_id("coth")
        r = 1e-6
        oracle = r / 3.0 - r**3 / 45.0
        assert M.eval_psi(model, r) == pytest.approx(oracle, rel=1e-9)

    def test_saturation_magnitude(self):
        for model in _models():
            vals = M.eval_psi(model, np.logspace(2, 6, 20))
            assert np.all(np.abs(vals) <= 1.0 + 1e-12)

    def test_isotropic_vector_form(self):
        model = M.model_from_id("rhe", dimension=2)
        r = np.array([3.0, 4.0])
        out = M.eval_psi(model, r)
        g5 = 1.0 / math.sqrt(26.0)
        np.testing.assert_allclose(out, r * g5, rtol=1e-14)

    def test_dimension_mismatch(self):
        model = M.model_from_id("rhe", dimension=3)
        with pytest.raises(ModelError):
            M.eval_psi(model, np.array([1.0, 2.0]))


class TestEvalDpsi:
    def test_p2_slope_at_origin(self):
        assert M.eval_dpsi(M.model_from_id("rhe"), 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_isotropic_origin_is_g0_identity(self):
        for mid, g0 in [("rhe", 1.0), ("coth", 1.0 / 3.0), ("tanh:gamma=2", 0.5)]:
            model = M.model_from_id(mid, dimension=2)
            np.testing.assert_allclose(M.eval_dpsi(model, np.zeros(2)),
                                       g0 * np.eye(2), atol=1e-12)

    def test_jacobian_eigenvalues_p2_d2(self):
        # closed form: eigenvalues g(rho) and g(rho) + rho g'(rho) at rho=5
        model = M.model_from_id("rhe", dimension=2)
        J = M.eval_dpsi(model, np.array([3.0, 4.0]))
        np.testing.assert_allclose(J, J.T, atol=1e-15)
        g5 = 1.0 / math.sqrt(26.0)
        tang = 26.0 ** -1.5
        np.testing.assert_allclose(sorted(np.linalg.eigvalsh(J)),
                                   sorted([g5, tang]), rtol=1e-12)

    def test_jacobian_matches_finite_differences_d2(self):
        model = M.model_from_id("rhe", dimension=2)
        rng = np.random.default_rng(7)
        for _ in range(5):
            r = rng.uniform(-3, 3, size=2)
            J = M.eval_dpsi(model, r)
            h = 1e-6
            fd = np.empty((2, 2))
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                fd[:, j] = (M.eval_psi(model, r + e) - M.eval_psi(model, r - e)) / (2 * h)
            np.testing.assert_allclose(J, fd, atol=5e-9)

    @pytest.mark.parametrize("mid", CATALOG_IDS)
    def test_derivative_order_by_step_halving(self, mid):
        # central differences of eval_psi must agree with eval_dpsi at order >= 1.9
        model = M.model_from_id(mid)
        rng = np.random.default_rng(42)
        pts = rng.uniform(0.05, 3.0, size=20)
        h1, h2 = 1e-2, 5e-3
        d = M.eval_dpsi(model, pts)
        e1 = np.abs((M.eval_psi(model, pts + h1) - M.eval_psi(model, pts - h1)) / (2 * h1) - d)
        e2 = np.abs((M.eval_psi(model, pts + h2) - M.eval_psi(model, pts - h2)) / (2 * h2) - d)
        mask = e2 > 1e-11  # keep truncation-dominated points only
        assert np.any(mask)
        order = np.log2(e1[mask] / e2[mask])
        assert np.min(order) >= 1.9


class TestPsiProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_oddness(self, r):
        for model in _models():
            a = float(M.eval_psi(model, r))
            b = float(M.eval_psi(model, -r))
            assert abs(a + b) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_radial_component_bounded(self, r):
        for model in _models():
            val = float(M.eval_psi(model, r)) * r
            assert abs(val) <= abs(r) + 1e-12

    @pytest.mark.parametrize("mid", CATALOG_IDS)
    def test_ray_monotonicity(self, mid):
        # t -> psi(t r) * r is non-decreasing along every ray
        model = M.model_from_id(mid)
        for r in (0.3, 1.0, 7.0, -2.0):
            t = np.linspace(1e-3, 1.0, 200)
            vals = M.eval_psi(model, t * r) * r
            assert np.all(np.diff(vals) >= -1e-10)


class TestCheckAssumptions:
    @pytest.mark.parametrize("mid,core,persist", [
        ("rhe", True, True),
        ("wilson", True, False),
        ("larsen:p=4", True, True),
        ("larsen:p=1.5", True, True),
        ("coth", True, False),
        ("tanh:gamma=1", True, True),
    ])
    def test_catalog_classifications(self, mid, core, persist):
        report = M.check_assumptions(M.model_from_id(mid))
        assert report.core_pass == core
        assert report.persistence_pass == persist

    def test_linear_fails_saturation(self):
        report = M.check_assumptions(M.model_from_id("linear"))
        assert report.verdict("saturation") == "fail"
        assert not report.core_pass

    def test_rhe_tail_exponents(self):
        # d(r) ~ 1/(2 r^2) and psi'(r) ~ r^-3
        report = M.check_assumptions(M.model_from_id("rhe"))
        assert report.d_exponent == pytest.approx(2.0, abs=0.02)
        assert report.dpsi_exponent == pytest.approx(3.0, abs=0.02)

    def test_wilson_exponent_exactly_two(self):
        report = M.check_assumptions(M.model_from_id("wilson"))
        assert report.d_exponent == pytest.approx(1.0, abs=0.02)
        assert report.dpsi_exponent == pytest.approx(2.0, abs=0.02)
        assert report.verdict("persistence_psi_prime") == "fail"

    def test_power_family_exponents_scale_with_p(self):
        report = M.check_assumptions(M.model_from_id("larsen:p=4"))
        assert report.d_exponent == pytest.approx(4.0, abs=0.05)
        assert report.dpsi_exponent == pytest.approx(5.0, abs=0.05)

    def test_psd_minors_isotropic(self):
        report = M.check_assumptions(M.model_from_id("rhe", dimension=3))
        assert report.verdict("jacobian_psd") == "pass"

    def test_nonfinite_custom_marks_indeterminate(self):
        def bad(r):
            r = np.asarray(r, dtype=float)
            return np.where(np.abs(r) > 10.0, np.nan, np.tanh(r))

        model = M.ModelSpec(psi=PsiFamily.custom(bad), phi=PhiFamily.linear_speed(1.0))
        report = M.check_assumptions(model)
        assert any(it.verdict == "indeterminate" for it in report.items)

    def test_report_json_shape(self):
        import json

        report = M.check_assumptions(M.model_from_id("tanh:gamma=1"))
        payload = json.loads(report.to_json())
        assert {"item", "verdict", "worst_point", "residual", "fitted_exponent"} \
            <= set(payload["items"][0].keys())
        assert payload["d_exponent"] == "inf"  # exponential defect underflows

    def test_grid_requires_deep_tail(self):
        with pytest.raises(ModelError):
            M.SampleGrid(r_max=100.0)


class TestCheckPhi:
    def test_linear_speed(self):
        report = M.check_phi(PhiFamily.linear_speed(1.0), 1.0)
        assert report.all_pass
        assert report.slope_at_zero == pytest.approx(1.0, abs=1e-9)
        assert report.convex

    def test_power_two(self):
        report = M.check_phi(PhiFamily.power(2.0), 1.0)
        assert report.all_pass
        assert report.slope_at_zero == pytest.approx(0.0, abs=1e-7)
        assert report.convex

    def test_sqrt_fails_finite_slope(self):
        phi = PhiFamily.custom(lambda z: np.sqrt(np.abs(z)))
        report = M.check_phi(phi, 1.0)
        assert report.item("finite_slope_at_zero").verdict == "fail"

    def test_zero_zmax_rejected(self):
        with pytest.raises(ModelError):
            M.check_phi(PhiFamily.linear_speed(1.0), 0.0)


class TestCatalog:
    def test_ids_roundtrip(self):
        assert M.model_from_id("rhe").psi.p == 2.0
        assert M.model_from_id("wilson").psi.p == 1.0
        assert M.model_from_id("larsen:p=3.5").psi.p == 3.5
        assert M.model_from_id("tanh:gamma=0.25").psi.gamma == 0.25

    def test_unknown_id(self):
        with pytest.raises(ModelError):
            M.model_from_id("heat")

    def test_bad_parameters(self):
        with pytest.raises(ModelError):
            M.model_from_id("larsen:p=x")
        with pytest.raises(ModelError):
            PsiFamily.relativistic(0.5)
        with pytest.raises(ModelError):
            PhiFamily.power(0.9)
        with pytest.raises(ModelError):
            M.ModelSpec(psi=PsiFamily.linear(), phi=PhiFamily.linear_speed(1.0), s=-1.0)
