import numpy as np
import pytest

from lossmodes import create_app
from lossmodes.models.circuit import CircuitParams
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.example_service import ExampleService


@pytest.fixture
def app():
    app = create_app({"TESTING": True})
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def oscillator():
    """Unit oscillator with unit damping."""
    return ExampleService.build_damped_oscillator(1.0)


@pytest.fixture
def circuit():
    """Two-loop circuit with unit parameters (beta = 1)."""
    return ExampleService.build_circuit(CircuitParams())


@pytest.fixture
def gyro_system():
    return ExampleService.random_system(3, 1, gyro=True, seed=7, beta=0.7)


@pytest.fixture
def make_systems():
    """Seeded batches of random systems with sizes drawn from the seed."""
    def make(count: int, seed: int, gyro: bool = False,
             full_rank: bool = False, partial: bool = False,
             n_max: int = 5) -> list[LagrangianSystem]:
        rng = np.random.default_rng(seed)
        systems = []
        for k in range(count):
            n = int(rng.integers(2 if partial else 1, n_max + 1))
            if full_rank:
                n_r = n
            elif partial:
                n_r = int(rng.integers(1, n))
            else:
                n_r = int(rng.integers(1, n + 1))
            systems.append(ExampleService.random_system(
                n, n_r, gyro=gyro, seed=seed * 1000 + k, nondegenerate=True))
        return systems
    return make
