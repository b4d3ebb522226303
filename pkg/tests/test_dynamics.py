import csv
import math
from fractions import Fraction

import numpy as np
import pytest

from noetherq.classical import LagrangianSystem, energy
from noetherq.dynamics import (
    convergence_order,
    integrate,
    integrate_parametrized,
    monitor,
    step_count,
    underdamped_solution,
)
from noetherq.exceptions import ConvergenceError, DegenerateInputError, OverdampedError
from noetherq.expr import const, parse, var
from noetherq.noether import AnsatzBasis, charge, solve_determining
from noetherq.parametrize import lift

OMEGA = math.sqrt(0.99)


@pytest.fixture(scope="module")
def bateman_run(bateman_model):
    return integrate(bateman_model.system, ([1.0], [0.0]), 0.0, 20.0, 1e-3)


def test_trajectory_shape(bateman_run):
    assert len(bateman_run) == 20001
    assert bateman_run.h == pytest.approx(1e-3)
    assert bateman_run.times[-1] == pytest.approx(20.0)
    assert bateman_run.q.shape == bateman_run.qd.shape == (20001, 1)
    q, qd = bateman_run.final_state
    assert q.shape == qd.shape == (1,)


def test_matches_closed_form(bateman_run):
    x, xd = underdamped_solution(bateman_run.times, 1.0, 0.0, gamma=0.1, omega0=1.0)
    assert np.max(np.abs(bateman_run.q[:, 0] - x)) <= 1e-8
    assert np.max(np.abs(bateman_run.qd[:, 0] - xd)) <= 1e-8


def test_closed_form_initial_values():
    x, xd = underdamped_solution(np.array([0.0]), 0.3, -0.7, gamma=0.1, omega0=1.0)
    assert x[0] == pytest.approx(0.3)
    assert xd[0] == pytest.approx(-0.7)
    x, _ = underdamped_solution(1.0, 1.0, 0.0, gamma=0.1, omega0=1.0)
    expected = math.exp(-0.1) * (math.cos(OMEGA) + 0.1 / OMEGA * math.sin(OMEGA))
    assert float(x) == pytest.approx(expected, rel=1e-14)


def test_charge_is_conserved_along_trajectory(bateman_run, bateman_charge):
    report = monitor(bateman_run, bateman_charge.q_velocity, label="Q")
    assert report.label == "Q"
    assert report.initial == pytest.approx(0.5)
    assert report.max_relative_drift <= 1e-8


def test_mechanical_energy_decays(bateman_run, bateman_model):
    weighted = energy(bateman_model.system)
    mechanical = parse("exp(-2*gamma*t)") * weighted
    report = monitor(bateman_run, mechanical)
    assert report.final < 0.5 * report.initial
    assert report.max_relative_drift > 0.5


def test_weighted_energy_is_not_conserved(bateman_run, bateman_model):
    report = monitor(bateman_run, energy(bateman_model.system), label="E")
    assert report.max_relative_drift > 1e-2


def test_convergence_order_against_oracle(bateman_model):
    def reference(t):
        return underdamped_solution(t, 1.0, 0.0, gamma=0.1, omega0=1.0)[0]

    result = convergence_order(
        bateman_model.system, ([1.0], [0.0]), 0.0, 10.0, [0.1, 0.05, 0.025], reference=reference
    )
    assert result.order == pytest.approx(4.0, abs=0.3)
    assert result.steps == pytest.approx((0.1, 0.05, 0.025))


def test_charge_drift_converges_at_fourth_order(bateman_model, bateman_charge):
    result = convergence_order(
        bateman_model.system,
        ([1.0], [0.0]),
        0.0,
        5.0,
        [0.2, 0.1, 0.05],
        quantity=bateman_charge.q_velocity,
    )
    assert result.order == pytest.approx(4.0, abs=0.5)
    assert result.errors[0] > result.errors[-1]


def _random_damped_system(seed: int) -> LagrangianSystem:
    """½m e^{2Γt}(ẋ² − ω²x²) with m, ω and Γ drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    m = Fraction(int(rng.integers(10, 41)), 20)
    omega = Fraction(int(rng.integers(10, 21)), 20)
    gamma = Fraction(int(rng.integers(1, 7)), 20)
    text = f"({m})/2*exp(2*({gamma})*t)*(xd^2 - ({omega})^2*x^2)"
    return LagrangianSystem(coords=("x",), lagrangian=parse(text), name=f"damped-{seed}")


@pytest.mark.parametrize("seed", [3, 17, 29])
def test_discovered_charge_drift_converges_at_fourth_order(seed):
    sys = _random_damped_system(seed)
    ps = lift(sys)
    (g,) = solve_determining(ps, AnsatzBasis((const(1),), ((var("x"),),)))
    cq = charge(ps, g)
    assert cq.certified
    result = convergence_order(
        sys, ([1.0], [0.0]), 0.0, 5.0, [0.2, 0.1, 0.05], quantity=cq.q_velocity
    )
    assert result.order == pytest.approx(4.0, abs=0.5)


def test_convergence_order_needs_nonzero_errors(free_particle_model):
    with pytest.raises(ConvergenceError):
        convergence_order(
            free_particle_model.system,
            ([0.0], [1.0]),
            0.0,
            1.0,
            [0.1, 0.05],
            quantity=parse("xd"),
        )


def test_convergence_order_needs_two_steps(bateman_model):
    with pytest.raises(DegenerateInputError):
        convergence_order(bateman_model.system, ([1.0], [0.0]), 0.0, 1.0, [0.1])


def test_backward_integration_returns_to_start(bateman_model):
    forward = integrate(bateman_model.system, ([1.0], [0.0]), 0.0, 5.0, 1e-3)
    backward = integrate(bateman_model.system, forward.final_state, 5.0, 0.0, 1e-3)
    assert backward.h < 0
    assert backward.times[-1] == pytest.approx(0.0)
    q, qd = backward.final_state
    assert q[0] == pytest.approx(1.0, abs=1e-9)
    assert qd[0] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("gauge", [1.0, 2.5])
def test_parametrized_integration_matches(bateman_model, gauge):
    sys = bateman_model.system
    plain = integrate(sys, ([1.0], [0.0]), 0.0, 5.0, 1e-2)
    lifted = integrate_parametrized(lift(sys), ([1.0], [0.0]), 0.0, 5.0, 1e-2, gauge=gauge)
    np.testing.assert_allclose(lifted.times, plain.times)
    np.testing.assert_allclose(lifted.q, plain.q, atol=1e-10)
    np.testing.assert_allclose(lifted.qd, plain.qd, atol=1e-10)
    assert lifted.integrator.startswith("rk4-parametrized")


def test_parametrized_integration_rejects_bad_gauge(bateman_model):
    with pytest.raises(DegenerateInputError):
        integrate_parametrized(lift(bateman_model.system), ([1.0], [0.0]), 0, 1, 0.1, gauge=0)


def test_step_count_rounds_to_uniform_steps():
    steps, h = step_count(0.0, 1.0, 0.3)
    assert steps == 3
    assert h == pytest.approx(1 / 3)
    steps, h = step_count(1.0, 0.0, 0.25)
    assert (steps, h) == (4, -0.25)


@pytest.mark.parametrize(
    "t0, t1, h",
    [(0.0, 1.0, 0.0), (0.0, 1.0, -0.1), (1.0, 1.0, 0.1), (0.0, math.inf, 0.1), (0.0, 1e-9, 1.0)],
)
def test_degenerate_integration_inputs(bateman_model, t0, t1, h):
    with pytest.raises(DegenerateInputError):
        integrate(bateman_model.system, ([1.0], [0.0]), t0, t1, h)


def test_initial_state_shape_is_checked(bateman_model):
    with pytest.raises(DegenerateInputError):
        integrate(bateman_model.system, ([1.0, 2.0], [0.0]), 0.0, 1.0, 0.1)


def test_overdamped_oracle_raises():
    with pytest.raises(OverdampedError):
        underdamped_solution([0.0, 1.0], 1.0, 0.0, gamma=2.0, omega0=1.0)


def test_trajectory_csv(tmp_path, bateman_model):
    traj = integrate(bateman_model.system, ([1.0], [0.0]), 0.0, 1.0, 0.25)
    path = traj.to_csv(tmp_path / "classical" / "trajectory.csv")
    with path.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "x", "xd"]
    assert len(rows) == 6
    assert [float(v) for v in rows[1]] == [0.0, 1.0, 0.0]
    assert float(rows[-1][0]) == 1.0
