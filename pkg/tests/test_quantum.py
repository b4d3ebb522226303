import math

import numpy as np
import pytest

from noetherq.classical import LagrangianSystem, legendre
from noetherq.exceptions import (
    GridError,
    ModelError,
    OverdampedError,
    UnsupportedOperatorError,
    ZeroNormError,
)
from noetherq.expr import const, parse
from noetherq.noether import ConservedQuantity, SymmetryGenerator, charge
from noetherq.parametrize import lift, primary_constraint
from noetherq.quantum import (
    DampedOscillator,
    Grid1D,
    OperatorAssembly,
    Wavefunction,
    analytic_dho_state,
    assemble_hamiltonian,
    assemble_Q,
    conservation_defect,
    constraint_check,
    dho_builder,
    eigencheck_Q,
    propagate_cn,
    tdse_residual,
    track_expectation,
    trial_states,
)

OMEGA = math.sqrt(0.99)


# --------------------------------------------------------------------------- #
# Grid and states
# --------------------------------------------------------------------------- #
@pytest.mark.parametrize(
    "x_min, x_max, n",
    [(-1.0, 1.0, 8), (1.0, 1.0, 64), (1.0, -1.0, 64), (-math.inf, 1.0, 64)],
)
def test_invalid_grids(x_min, x_max, n):
    with pytest.raises(GridError):
        Grid1D(x_min, x_max, n)


def test_grid_geometry(unit_grid):
    assert len(unit_grid) == 64
    assert unit_grid.spacing == pytest.approx(2 / 63)
    assert unit_grid.x[0] == -1.0 and unit_grid.x[-1] == 1.0
    refined = unit_grid.refined()
    assert refined.spacing == pytest.approx(unit_grid.spacing / 2)
    assert unit_grid.describe() == {"n": 64, "x_min": -1.0, "x_max": 1.0}


def test_oscillator_box_scales_with_length():
    grid = Grid1D.for_oscillator(m=4.0, omega=1.0, half_width=10.0, n=32)
    assert grid.x_max == pytest.approx(5.0)
    with pytest.raises(GridError):
        Grid1D.for_oscillator(m=0.0, omega=1.0)


def test_wavefunction_validation(unit_grid):
    with pytest.raises(GridError):
        Wavefunction(np.ones(10), unit_grid)
    with pytest.raises(GridError):
        Wavefunction(np.full(64, np.nan), unit_grid)
    zero = Wavefunction(np.zeros(64), unit_grid)
    assert zero.norm() == 0.0
    with pytest.raises(ZeroNormError):
        zero.normalized()
    with pytest.raises(ZeroNormError):
        zero.fidelity(zero)


def test_wavefunction_algebra(unit_grid):
    psi = Wavefunction(np.exp(-unit_grid.x**2) * (1 + 1j), unit_grid)
    unit = psi.normalized()
    assert unit.norm() == pytest.approx(1.0)
    assert unit.fidelity(psi) == pytest.approx(1.0)
    assert Wavefunction(psi.values * 1j, unit_grid).fidelity(psi) == pytest.approx(1.0)
    assert psi.distance(psi) == 0.0
    assert psi.inner(psi).real == pytest.approx(psi.norm_squared())


@pytest.mark.parametrize("n", [0, 2, 4])
@pytest.mark.parametrize("t", [0.0, 1.0, 2.0])
def test_analytic_states_stay_normalized(oscillator, grid, n, t):
    psi = analytic_dho_state(n, oscillator, grid, t)
    assert psi.norm_squared() == pytest.approx(1.0, abs=1e-8)
    assert psi.t == t


def test_analytic_states_are_orthogonal(oscillator, grid):
    states = [analytic_dho_state(n, oscillator, grid, 0.5) for n in range(4)]
    for i, a in enumerate(states):
        for b in states[i + 1 :]:
            assert abs(a.inner(b)) <= 1e-8


def test_small_box_warns(caplog, oscillator):
    cramped = Grid1D(-1.0, 1.0, 256)
    with caplog.at_level("WARNING"):
        analytic_dho_state(0, oscillator, cramped)
    assert "norm deficit" in caplog.text


def test_overdamped_parameters():
    overdamped = DampedOscillator(m=1.0, omega0=1.0, gamma=2.0)
    with pytest.raises(OverdampedError) as info:
        overdamped.omega
    assert "ω²" in str(info.value)
    with pytest.raises(OverdampedError):
        analytic_dho_state(0, overdamped, Grid1D(-5.0, 5.0, 64))
    with pytest.raises(ModelError):
        DampedOscillator(m=-1.0)


def test_eigenvalues(oscillator):
    assert oscillator.omega == pytest.approx(OMEGA)
    assert oscillator.eigenvalue(3) == pytest.approx(3.5 * OMEGA)


def test_state_csv(tmp_path, oscillator):
    psi = analytic_dho_state(1, oscillator, Grid1D(-8.0, 8.0, 32), 0.25)
    path = psi.to_csv(tmp_path / "psi.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "x,re,im"
    assert len(lines) == 33


# --------------------------------------------------------------------------- #
# Operators
# --------------------------------------------------------------------------- #
def test_assembled_operators_are_hermitian(bateman_charge, bateman_hamiltonian, small_grid):
    for op in (
        assemble_Q(bateman_charge, small_grid, t=0.5),
        assemble_hamiltonian(bateman_hamiltonian, small_grid, t=0.5),
    ):
        assert op.hermiticity_defect(skip=0) <= 1e-14
        dense = op.to_dense()
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-14)


@pytest.mark.parametrize("order", [2, 4])
def test_kinetic_stencil_on_polynomial(order):
    grid = Grid1D(-1.0, 1.0, 101)
    hsys = legendre(LagrangianSystem(coords=("x",), lagrangian=parse("xd^2/2")))
    T = assemble_hamiltonian(hsys, grid, order=order)
    applied = T.matvec(grid.x**2)
    # −½ d²/dx² x² = −1 away from the boundary rows
    np.testing.assert_allclose(applied[2:-2].real, -1.0, atol=1e-9)


def test_weyl_ordered_cross_term(unit_grid):
    hsys = legendre(LagrangianSystem(coords=("x",), lagrangian=parse("xd^2/2")))
    op = OperatorAssembly(parse("x*p_x"), hsys, unit_grid).at(0.0)
    # −i(x∂ₓ + ½) applied to a constant gives −i/2 in the interior
    applied = op.matvec(np.ones(unit_grid.n))
    np.testing.assert_allclose(applied[2:-2], -0.5j, atol=1e-12)


def test_matvec_matches_dense(bateman_charge, unit_grid):
    op = assemble_Q(bateman_charge, unit_grid, t=0.3)
    v = np.cos(3 * unit_grid.x) + 1j * unit_grid.x
    np.testing.assert_allclose(op.matvec(v), op.to_dense() @ v, atol=1e-10)


def test_damping_free_charge_equals_hamiltonian(harmonic_model, small_grid):
    ps = lift(harmonic_model.system.bound())
    cq = charge(ps, SymmetryGenerator(const(-1), (const(0),)))
    Q = assemble_Q(cq, small_grid, t=0.7)
    H = assemble_hamiltonian(cq.hamiltonian, small_grid, t=0.7)
    assert np.array_equal(Q.bands, H.bands)


@pytest.mark.parametrize(
    "expression, message",
    [("p_x^3", r"p_x\^3"), ("x*p_x^2", "ordering"), ("exp(p_x)", "p_x")],
)
def test_unsupported_operators(bateman_hamiltonian, unit_grid, expression, message):
    with pytest.raises(UnsupportedOperatorError, match=message):
        OperatorAssembly(parse(expression), bateman_hamiltonian, unit_grid)


def test_two_degrees_of_freedom_are_unsupported(unit_grid):
    sys = LagrangianSystem(coords=("x", "y"), lagrangian=parse("(xd^2 + yd^2)/2"))
    hsys = legendre(sys)
    with pytest.raises(UnsupportedOperatorError):
        OperatorAssembly(hsys.hamiltonian, hsys, unit_grid)


def test_bad_stencil_and_hbar(bateman_hamiltonian, unit_grid):
    with pytest.raises(GridError):
        assemble_hamiltonian(bateman_hamiltonian, unit_grid, order=6)
    with pytest.raises(GridError):
        assemble_hamiltonian(bateman_hamiltonian, unit_grid, hbar=0.0)


# --------------------------------------------------------------------------- #
# Eigenvalues of the charge
# --------------------------------------------------------------------------- #
def test_ground_state_eigencheck(bateman_charge, oscillator, grid):
    check = eigencheck_Q(bateman_charge, analytic_dho_state(0, oscillator, grid, 0.5))
    assert abs(check.q_estimate - 0.5 * OMEGA) <= 1e-5 * OMEGA
    assert check.residual <= 1e-4
    assert check.imaginary <= 1e-10


@pytest.mark.slow
@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_pure_state_eigenvalues(bateman_charge, oscillator, grid, n, t):
    check = eigencheck_Q(bateman_charge, analytic_dho_state(n, oscillator, grid, t))
    assert abs(check.q_estimate - oscillator.eigenvalue(n)) <= 1e-5 * OMEGA
    assert check.residual <= 1e-4


def test_eigen_residual_shrinks_with_refinement(bateman_charge, oscillator):
    residuals = [
        eigencheck_Q(
            bateman_charge, analytic_dho_state(0, oscillator, oscillator.grid(12.0, n), 0.5)
        ).residual
        for n in (256, 512)
    ]
    assert residuals[0] / residuals[1] >= 3.5


def test_hamiltonian_is_not_diagonal_on_pure_states(bateman_hamiltonian, oscillator, grid):
    energy = ConservedQuantity(
        q_phase=bateman_hamiltonian.hamiltonian,
        q_velocity=parse("0"),
        generator=SymmetryGenerator(const(-1), (const(0),)),
        hamiltonian=bateman_hamiltonian,
        label="H",
    )
    check = eigencheck_Q(energy, analytic_dho_state(0, oscillator, grid, 0.5))
    assert check.residual > 1e-2


# --------------------------------------------------------------------------- #
# Schrödinger equation
# --------------------------------------------------------------------------- #
@pytest.mark.parametrize("n", [0, 2])
def test_analytic_states_solve_schrodinger(bateman_hamiltonian, oscillator, grid, n):
    builder = dho_builder(n, oscillator, grid)
    assert tdse_residual(builder, bateman_hamiltonian, grid, 0.0, 1e-5) <= 1e-4
    assert tdse_residual(builder, bateman_hamiltonian, grid, 0.7, 1e-5) <= 1e-4


def test_schrodinger_residual_converges(bateman_hamiltonian, oscillator):
    coarse, fine = (
        tdse_residual(
            dho_builder(0, oscillator, oscillator.grid(12.0, n)),
            bateman_hamiltonian,
            oscillator.grid(12.0, n),
            0.0,
            1e-5,
        )
        for n in (256, 512)
    )
    assert coarse / fine >= 3.5


def test_noise_fails_schrodinger_check(bateman_hamiltonian, small_grid):
    rng = np.random.default_rng(3)
    noise = Wavefunction(rng.normal(size=small_grid.n), small_grid)
    residual = tdse_residual(lambda t: noise, bateman_hamiltonian, small_grid, 0.0, 1e-5)
    assert residual > 1.0


def test_zero_state_residual_raises(bateman_hamiltonian, small_grid):
    zero = Wavefunction(np.zeros(small_grid.n), small_grid)
    with pytest.raises(ZeroNormError):
        tdse_residual(lambda t: zero, bateman_hamiltonian, small_grid, 0.0, 1e-5)


def test_constraint_check_equals_schrodinger_residual(bateman, bateman_hamiltonian, oscillator, small_grid):
    builder = dho_builder(1, oscillator, small_grid)
    constraint = primary_constraint(lift(bateman))
    via_constraint = constraint_check(constraint, builder, small_grid, 0.3, 1e-5)
    direct = tdse_residual(builder, bateman_hamiltonian, small_grid, 0.3, 1e-5)
    assert via_constraint == pytest.approx(direct, rel=1e-9)
    assert constraint_check(bateman_hamiltonian, builder, small_grid, 0.3, 1e-5) == direct


# --------------------------------------------------------------------------- #
# Conservation and propagation
# --------------------------------------------------------------------------- #
def test_trial_states(small_grid):
    trials = trial_states(small_grid, count=4)
    assert len(trials) == 4
    assert all(p.norm() > 0 for p in trials)


def test_charge_commutes_with_schrodinger_operator(bateman_charge, bateman_hamiltonian, grid, small_grid):
    fine = conservation_defect(bateman_charge, grid, 0.5)
    coarse = conservation_defect(bateman_charge, small_grid, 0.5)
    assert fine < coarse
    assert fine <= 1e-3

    energy = ConservedQuantity(
        q_phase=bateman_hamiltonian.hamiltonian,
        q_velocity=parse("0"),
        generator=SymmetryGenerator(const(-1), (const(0),)),
        hamiltonian=bateman_hamiltonian,
    )
    assert conservation_defect(energy, grid, 0.5) > 100 * fine


def test_crank_nicolson_short_run(bateman_hamiltonian, oscillator, small_grid):
    psi0 = analytic_dho_state(0, oscillator, small_grid, 0.0)
    steps = []
    final = propagate_cn(
        psi0, bateman_hamiltonian, 0.0, 0.2, 1e-3, on_step=lambda k, psi: steps.append(k)
    )
    assert steps == list(range(1, 201))
    assert final.t == 0.2
    exact = analytic_dho_state(0, oscillator, small_grid, 0.2)
    assert final.distance(exact) <= 1e-3
    assert abs(np.linalg.norm(final.values) - np.linalg.norm(psi0.values)) <= 1e-10


def test_expectation_of_charge_is_constant(bateman_charge, oscillator, small_grid):
    psi0 = analytic_dho_state(1, oscillator, small_grid, 0.0)
    final, track = track_expectation(bateman_charge, psi0, 0.05, 1e-4, every=50)
    assert track.times[0] == 0.0
    assert track.times[-1] == pytest.approx(0.05)
    assert len(track.times) == 11
    assert track.max_relative_change <= 1e-6
    assert track.values[0] == pytest.approx(1.5 * OMEGA, rel=1e-5)


@pytest.mark.slow
def test_crank_nicolson_matches_analytic_state(bateman_hamiltonian, oscillator, grid):
    psi0 = analytic_dho_state(0, oscillator, grid, 0.0)
    final = propagate_cn(psi0, bateman_hamiltonian, 0.0, 1.0, 1e-4)
    exact = analytic_dho_state(0, oscillator, grid, 1.0)
    assert final.distance(exact) <= 1e-3


def test_undamped_ground_state_returns_after_one_period(harmonic_model):
    oscillator = DampedOscillator(m=1.0, omega0=1.0, gamma=0.0, hbar=1.0)
    grid = oscillator.grid(12.0, 512)
    hsys = legendre(harmonic_model.system.bound())
    psi0 = analytic_dho_state(0, oscillator, grid, 0.0)
    period = 2 * math.pi
    final = propagate_cn(psi0, hsys, 0.0, period, 1e-3)
    assert final.fidelity(psi0) >= 1 - 1e-6
    # global phase e^{-iω₀T/2} = -1
    overlap = psi0.inner(final) / (psi0.norm() * final.norm())
    assert overlap == pytest.approx(-1.0, abs=1e-4)
