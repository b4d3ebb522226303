from fractions import Fraction

import pytest

from noetherq.classical import LagrangianSystem, legendre
from noetherq.expr import parse
from noetherq.models import load_model
from noetherq.noether import Sampler, charge, solve_determining
from noetherq.parametrize import lift
from noetherq.quantum import DampedOscillator, Grid1D


GAMMA = Fraction(1, 10)


@pytest.fixture(scope="session")
def bateman_model():
    return load_model("bateman")


@pytest.fixture(scope="session")
def harmonic_model():
    return load_model("harmonic")


@pytest.fixture(scope="session")
def free_particle_model():
    return load_model("free_particle")


@pytest.fixture(scope="session")
def bateman():
    """Bound damped oscillator, m = ω₀ = 1, Γ = 1/10."""
    return LagrangianSystem(
        coords=("x",),
        lagrangian=parse("m/2*(xd^2 - omega0^2*x^2)*exp(2*gamma*t)"),
        params={"m": Fraction(1), "omega0": Fraction(1), "gamma": GAMMA},
        name="bateman",
    ).bound()


@pytest.fixture(scope="session")
def bateman_hamiltonian(bateman):
    return legendre(bateman)


@pytest.fixture(scope="session")
def bateman_charge(bateman, bateman_model):
    ps = lift(bateman)
    solution = solve_determining(ps, bateman_model.basis(), Sampler(seed=7))
    assert len(solution) == 1
    return charge(ps, solution[0], label="Q")


@pytest.fixture(scope="session")
def oscillator():
    return DampedOscillator(m=1.0, omega0=1.0, gamma=0.1, hbar=1.0)


@pytest.fixture(scope="session")
def grid(oscillator):
    return oscillator.grid(12.0, 2048)


@pytest.fixture(scope="session")
def small_grid(oscillator):
    return oscillator.grid(12.0, 512)


@pytest.fixture
def api_key(monkeypatch):
    from noetherq.conf import conf

    monkeypatch.setattr(conf, "API_KEY", "test-key")
    return "test-key"


@pytest.fixture(scope="session")
def unit_grid():
    return Grid1D(-1.0, 1.0, 64)
