import numpy as np
import pytest

from saturex import models as M
from saturex.solver import Grid1D, SolverConfig, run


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed tests measure the math."""
    grid = Grid1D(-1.0, 1.0, 16)
    x = grid.centers()
    u0 = np.where(np.abs(x) <= 0.2, 1.0, 0.0)
    cfg = SolverConfig(cfl=0.4, end_time=1e-4, snapshot_times=(1e-4,))
    run(M.model_from_id("rhe"), grid, u0, cfg)
    m = M.ModelSpec(psi=M.PsiFamily.relativistic(2.0),
                    phi=M.PhiFamily.power(2.0, 1.0), s=1.0)
    run(m, grid, u0, cfg)


@pytest.fixture(scope="session")
def catalog_models():
    return {
        "rhe": M.model_from_id("rhe"),
        "wilson": M.model_from_id("wilson"),
        "larsen4": M.model_from_id("larsen:p=4"),
        "coth": M.model_from_id("coth"),
        "tanh": M.model_from_id("tanh:gamma=1"),
    }


@pytest.fixture(scope="session")
def catalog_reports(catalog_models):
    return {name: M.check_assumptions(m) for name, m in catalog_models.items()}
