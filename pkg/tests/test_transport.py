import math

import numpy as np
import pytest

from saturex import models as M
from saturex.models import ModelError, PhiFamily, PsiFamily
from saturex.transport import (
    FINITE_BOUNDARY,
    FINITE_INTERIOR,
    INFINITE,
    boundary_value,
    conjugate,
    cost_table,
    kstar,
)


@pytest.fixture(scope="module")
def rhe():
    return M.model_from_id("rhe")


class TestKstar:
    def test_zero(self, rhe):
        assert kstar(rhe, 0.0) == 0.0

    def test_p2_closed_form(self, rhe):
        assert kstar(rhe, 1.0) == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-10)

    def test_linear_growth(self, rhe):
        val = kstar(rhe, 1e3)
        assert val == pytest.approx(math.sqrt(1.0 + 1e6) - 1.0, rel=1e-9)
        assert val == pytest.approx(1e3, rel=1e-2)

    def test_scales_with_s(self):
        m2 = M.model_from_id("rhe", s=2.0)
        assert kstar(m2, 1.0) == pytest.approx(2.0 * (math.sqrt(2.0) - 1.0), abs=1e-9)


class TestConjugate:
    def test_zero_velocity(self, rhe):
        cv = conjugate(rhe, 0.0)
        assert cv.value == 0.0
        assert cv.classification == FINITE_INTERIOR
        assert cv.pbar == 0.0

    def test_p2_closed_form_interior(self, rhe):
        # k(v) = 1 - sqrt(1 - v^2) for the p=2 model at s=1
        cv = conjugate(rhe, 0.6)
        assert cv.classification == FINITE_INTERIOR
        assert cv.value == pytest.approx(0.2, abs=1e-10)

    def test_outside_ball_is_infinite(self, rhe):
        cv = conjugate(rhe, 1.1)
        assert cv.classification == INFINITE
        assert math.isinf(cv.value)

    def test_wilson_closed_form(self):
        # pbar solves p/(1+p) = 1/2 -> pbar = 1; kstar(1) = 1 - log 2
        wilson = M.model_from_id("wilson")
        cv = conjugate(wilson, 0.5)
        assert cv.pbar == pytest.approx(1.0, abs=1e-9)
        assert cv.value == pytest.approx(math.log(2.0) - 0.5, abs=1e-10)

    def test_bisection_residual(self, rhe):
        for v in (0.1, 0.5, 0.9, 0.99):
            cv = conjugate(rhe, v)
            assert cv.residual < 1e-10

    def test_symmetry(self, rhe):
        for v in (0.25, 0.7, 1.3):
            assert conjugate(rhe, v).value == conjugate(rhe, -v).value

    def test_fenchel_young(self, rhe):
        from saturex.lagrangian import FluxObjects, potential

        fx = FluxObjects(rhe)
        for v in np.linspace(0.05, 0.95, 10):
            cv = conjugate(rhe, float(v))
            lhs = cv.pbar * v
            rhs = cv.value + rhe.s * potential(fx, cv.pbar)
            assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))

    def test_nonisotropic_custom_d2_refused(self):
        psi = PsiFamily.custom(lambda r: np.tanh(np.asarray(r, dtype=float)))
        model = M.ModelSpec(psi=psi, phi=PhiFamily.linear_speed(1.0), dimension=2)
        with pytest.raises(ModelError):
            conjugate(model, 0.5)


class TestBoundaryValue:
    def test_p2_equals_one(self, rhe):
        # antiderivative oracle: lambda - sqrt(1+lambda^2) + 1 -> 1
        bv = boundary_value(rhe)
        assert bv.classification == FINITE_BOUNDARY
        assert bv.value == pytest.approx(1.0, abs=1e-4)

    def test_wilson_diverges(self):
        bv = boundary_value(M.model_from_id("wilson"))
        assert bv.classification == INFINITE
        assert math.isinf(bv.value)

    def test_coth_diverges(self):
        # 1 - psi(lambda) ~ 1/lambda, not integrable
        bv = boundary_value(M.model_from_id("coth"))
        assert bv.classification == INFINITE

    def test_tanh_log_two(self):
        # integral_0^inf (1 - tanh(l)) dl = log 2
        bv = boundary_value(M.model_from_id("tanh:gamma=1"))
        assert bv.classification == FINITE_BOUNDARY
        assert bv.value == pytest.approx(math.log(2.0), abs=1e-8)

    def test_larsen_p4_finite(self):
        bv = boundary_value(M.model_from_id("larsen:p=4"))
        assert bv.classification == FINITE_BOUNDARY
        assert 0.0 < bv.value < 2.0


class TestCostTable:
    def test_invariants_on_uniform_grid(self, rhe):
        grid = np.linspace(-1.5, 1.5, 31)
        table = cost_table(rhe, grid)
        vals = table.values()
        fin = table.finite_mask()
        # k(0) = 0, k >= 0 on finite samples
        assert vals[15] == 0.0
        assert np.all(vals[fin] >= 0.0)
        # infinite exactly outside the ball
        for s, v in zip(table.samples, grid):
            if abs(v) > rhe.s * (1 + 1e-9):
                assert s.classification == INFINITE
        # convexity of the finite part (uniform sub-grid)
        inner = np.abs(grid) <= 0.9
        assert np.all(np.diff(vals[inner], 2) >= -1e-8)

    def test_closed_form_column(self, rhe):
        grid = np.array([0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9])
        table = cost_table(rhe, grid)
        assert table.closed_form is not None
        for sample, cf in zip(table.samples, table.closed_form):
            assert sample.value == pytest.approx(cf, abs=1e-6)

    def test_wide_speed_ball(self):
        fast = M.model_from_id("rhe", s=2.0)
        table = cost_table(fast, np.array([-2.5, 2.5]))
        assert all(s.classification == INFINITE for s in table.samples)
        assert table.closed_form is not None  # s matches the linear phi

    def test_trivial_grid(self, rhe):
        table = cost_table(rhe, np.array([0.0]))
        assert table.samples[0].value == 0.0

    def test_per_sample_errors_recorded(self):
        psi = PsiFamily.custom(lambda r: np.tanh(np.asarray(r, dtype=float)))
        model = M.ModelSpec(psi=psi, phi=PhiFamily.linear_speed(1.0), dimension=2)
        table = cost_table(model, np.array([0.5]))
        assert table.samples[0].classification == "indeterminate"
        assert table.diagnostics["per_sample_errors"]
