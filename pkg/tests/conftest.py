import numpy as np
import pytest

from dotharvest import EngineParams, cycle_stats, simulate_ensemble


@pytest.fixture(scope="session")
def pstar() -> EngineParams:
    """x = 0.9, T_W = 5, T_H = 15, eps = 0, delta_mu = 1/4, U = 5."""
    return EngineParams()


@pytest.fixture(scope="session")
def pldf() -> EngineParams:
    """Same point with T_H = 2 T_W = 10 (large-deviation figure)."""
    return EngineParams(temp_h=10.0)


@pytest.fixture(scope="session")
def psemi() -> EngineParams:
    """Backaction-free regime T_H = 100 for the telegraph model."""
    return EngineParams(temp_h=100.0)


@pytest.fixture(scope="session")
def px0() -> EngineParams:
    """Energy-independent couplings (x = 0)."""
    return EngineParams(x=0.0)


# shared trajectory ensembles: 200 trajectories x 2000 inverse rates,
# fixed base seeds so every statistical assertion is reproducible
N_TRAJ = 200
DURATION = 2000.0
PSTAR_SEED = 15
X0_SEED = 16


@pytest.fixture(scope="session")
def pstar_ensemble(pstar):
    return simulate_ensemble(pstar, N_TRAJ, DURATION, PSTAR_SEED)


@pytest.fixture(scope="session")
def x0_ensemble(px0):
    return simulate_ensemble(px0, N_TRAJ, DURATION, X0_SEED)


@pytest.fixture(scope="session")
def pstar_stats(pstar, pstar_ensemble):
    return cycle_stats(pstar_ensemble, pstar)


@pytest.fixture(scope="session")
def x0_stats(px0, x0_ensemble):
    return cycle_stats(x0_ensemble, px0)


def ratio_se(n_a: np.ndarray, n_b: np.ndarray) -> tuple[float, float]:
    """Delta-method standard error of sum(a)/sum(b) over i.i.d. trajectories."""
    n_a = np.asarray(n_a, dtype=float)
    n_b = np.asarray(n_b, dtype=float)
    r = n_a.sum() / n_b.sum()
    ma, mb = n_a.mean(), n_b.mean()
    cov = np.cov(n_a, n_b)
    var = r * r * (cov[0, 0] / ma ** 2 + cov[1, 1] / mb ** 2
                   - 2.0 * cov[0, 1] / (ma * mb)) / len(n_a)
    return float(r), float(np.sqrt(max(var, 0.0)))
