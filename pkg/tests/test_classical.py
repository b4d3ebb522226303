from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noetherq.classical import (
    LagrangianSystem,
    energy,
    energy_balance,
    energy_rate,
    euler_lagrange,
    hamilton_equations,
    is_regular,
    legendre,
    momenta,
    poisson,
    time_derivative,
    to_phase_space,
    to_velocity_space,
    total_time_derivative,
)
from noetherq.exceptions import (
    ModelError,
    NonQuadraticError,
    SingularHessianError,
    UnboundVariableError,
)
from noetherq.expr import const, equivalent, evaluate, is_zero, parse, total


def system(lagrangian: str, coords=("x",), **params) -> LagrangianSystem:
    return LagrangianSystem(
        coords=coords,
        lagrangian=parse(lagrangian),
        params={k: Fraction(v) for k, v in params.items()},
    )


@pytest.fixture(scope="module")
def harmonic_hamiltonian():
    return legendre(system("(xd^2 - x^2)/2"))


# --------------------------------------------------------------------------- #
# Lagrangian side
# --------------------------------------------------------------------------- #
def test_bateman_equation_of_motion(bateman):
    (residual,) = euler_lagrange(bateman)
    expected = parse("-exp(t/5)*(xdd + xd/5 + x)")
    assert equivalent(residual, expected)


def test_bateman_momentum_and_energy(bateman):
    assert equivalent(momenta(bateman)[0], parse("exp(t/5)*xd"))
    assert equivalent(energy(bateman), parse("exp(t/5)*(xd^2 + x^2)/2"))


def test_bateman_energy_is_not_conserved(bateman):
    rate, conserved = energy_rate(bateman)
    assert not conserved
    assert equivalent(rate, parse("-exp(t/5)*(xd^2 - x^2)/10"))


def test_autonomous_energy_is_conserved():
    rate = energy_rate(system("(xd^2 - x^2)/2"))
    assert rate.conserved
    assert rate.rate.is_value(0)


@pytest.mark.parametrize(
    "lagrangian",
    [
        "m/2*(xd^2 - omega0^2*x^2)*exp(2*gamma*t)",
        "xd^2/2 - x^4/4 + t*x*xd",
        "(xd^2 + yd^2)/2 - x*y + sin(t)*x",
    ],
)
def test_energy_balance_is_total_derivative_of_energy(lagrangian):
    coords = ("x", "y") if "yd" in lagrangian else ("x",)
    sys = system(lagrangian, coords, m=1, omega0=2, gamma="0.3").bound()
    assert equivalent(energy_balance(sys), time_derivative(energy(sys), sys))


def test_energy_balance_on_shell_leaves_explicit_time_dependence(bateman):
    balance = energy_balance(bateman)
    (residual,) = euler_lagrange(bateman)
    on_shell = balance + parse("xd") * residual
    assert equivalent(on_shell, energy_rate(bateman).rate)


# --------------------------------------------------------------------------- #
# Legendre transform
# --------------------------------------------------------------------------- #
def test_bateman_hamiltonian(bateman_hamiltonian):
    expected = parse("exp(-t/5)*p_x^2/2 + exp(t/5)*x^2/2")
    assert equivalent(bateman_hamiltonian.hamiltonian, expected)
    assert equivalent(bateman_hamiltonian.velocities_of[0], parse("exp(-t/5)*p_x"))


def test_free_particle_hamiltonian(free_particle_model):
    hsys = legendre(free_particle_model.system)
    assert equivalent(hsys.hamiltonian, parse("p_x^2/(2*m)"))


def test_linear_velocity_term_shifts_momentum():
    hsys = legendre(system("xd^2/2 + x*xd - x^2/2"))
    assert equivalent(hsys.hamiltonian, parse("(p_x - x)^2/2 + x^2/2"))


def test_two_degrees_of_freedom_with_coupling():
    sys = system("xd^2 + xd*yd + yd^2 - x*y", coords=("x", "y"))
    assert is_regular(sys)
    hsys = legendre(sys)
    # A = [[2, 1], [1, 2]], A⁻¹ = [[2, -1], [-1, 2]]/3
    expected = parse("(p_x^2 - p_x*p_y + p_y^2)/3 + x*y")
    assert equivalent(hsys.hamiltonian, expected)


def test_phase_and_velocity_forms_invert(bateman, bateman_hamiltonian):
    e = energy(bateman)
    assert equivalent(to_velocity_space(to_phase_space(e, bateman_hamiltonian), bateman), e)


def test_hamilton_equations(bateman_hamiltonian):
    (qdot,), (pdot,) = hamilton_equations(bateman_hamiltonian)
    assert equivalent(qdot, parse("exp(-t/5)*p_x"))
    assert equivalent(pdot, parse("-exp(t/5)*x"))


@pytest.mark.parametrize("lagrangian", ["xd^4/4 - x^2/2", "exp(xd)", "sqrt(1 + xd^2)"])
def test_non_quadratic_lagrangian_is_rejected(lagrangian):
    with pytest.raises(NonQuadraticError):
        legendre(system(lagrangian))


@pytest.mark.parametrize(
    "lagrangian, coords",
    [("x*xd - x^2", ("x",)), ("(xd + yd)^2/2 - x^2 - y^2", ("x", "y"))],
)
def test_singular_hessian_is_rejected(lagrangian, coords):
    sys = system(lagrangian, coords)
    assert not is_regular(sys)
    with pytest.raises(SingularHessianError):
        legendre(sys)


# --------------------------------------------------------------------------- #
# Poisson brackets
# --------------------------------------------------------------------------- #
monomials = st.tuples(
    st.integers(min_value=-3, max_value=3).filter(bool),
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=2),
    st.integers(min_value=0, max_value=1),
).map(lambda m: f"{m[0]}*x^{m[1]}*p_x^{m[2]}*t^{m[3]}")
polynomials = st.lists(monomials, min_size=1, max_size=3).map(lambda ms: parse(" + ".join(ms)))
phase_points = st.fixed_dictionaries(
    {
        "x": st.floats(-1.5, 1.5),
        "p_x": st.floats(-1.5, 1.5),
        "t": st.floats(0.0, 1.0),
    }
)


def test_canonical_brackets(harmonic_hamiltonian):
    x, p = parse("x"), parse("p_x")
    assert poisson(x, p, harmonic_hamiltonian).is_value(1)
    assert poisson(p, x, harmonic_hamiltonian).is_value(-1)
    assert poisson(x, x, harmonic_hamiltonian).is_value(0)


@settings(max_examples=100, deadline=None)
@given(polynomials, polynomials)
def test_bracket_is_antisymmetric(harmonic_hamiltonian, F, G):
    assert is_zero(
        poisson(F, G, harmonic_hamiltonian) + poisson(G, F, harmonic_hamiltonian)
    )


@settings(max_examples=50, deadline=None)
@given(polynomials, polynomials, polynomials, phase_points)
def test_jacobi_identity(harmonic_hamiltonian, F, G, K, point):
    def bracket(a, b):
        return poisson(a, b, harmonic_hamiltonian)

    jacobi = total(
        [bracket(F, bracket(G, K)), bracket(G, bracket(K, F)), bracket(K, bracket(F, G))]
    )
    assert abs(evaluate(jacobi, point)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(polynomials, polynomials)
def test_leibniz_rule(harmonic_hamiltonian, F, G):
    H = harmonic_hamiltonian.hamiltonian
    lhs = poisson(F * G, H, harmonic_hamiltonian)
    rhs = F * poisson(G, H, harmonic_hamiltonian) + G * poisson(F, H, harmonic_hamiltonian)
    assert equivalent(lhs, rhs)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-10 * max(1.0, abs(a), abs(b))


scalars = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@settings(max_examples=100, deadline=None)
@given(polynomials, polynomials, polynomials, scalars, scalars, phase_points)
def test_bracket_is_bilinear(harmonic_hamiltonian, F, G, K, a, b, point):
    def bracket(u, v):
        return evaluate(poisson(u, v, harmonic_hamiltonian), point)

    combined = const(a) * F + const(b) * G
    assert _close(bracket(combined, K), float(a) * bracket(F, K) + float(b) * bracket(G, K))
    assert _close(bracket(K, combined), float(a) * bracket(K, F) + float(b) * bracket(K, G))


@settings(max_examples=100, deadline=None)
@given(polynomials, polynomials, polynomials, phase_points)
def test_leibniz_rule_with_any_third_function(harmonic_hamiltonian, F, G, K, point):
    def bracket(u, v):
        return evaluate(poisson(u, v, harmonic_hamiltonian), point)

    f, g = evaluate(F, point), evaluate(G, point)
    assert _close(bracket(F * G, K), f * bracket(G, K) + bracket(F, K) * g)


def test_energy_changes_along_bateman_flow(bateman_hamiltonian):
    rate = total_time_derivative(bateman_hamiltonian.hamiltonian, bateman_hamiltonian)
    assert equivalent(rate, parse("-exp(-t/5)*p_x^2/10 + exp(t/5)*x^2/10"))


# --------------------------------------------------------------------------- #
# Validation
# --------------------------------------------------------------------------- #
def test_unbound_variable_is_named():
    with pytest.raises(UnboundVariableError) as info:
        system("xd^2/2 - k*x^2/2")
    assert info.value.names == ("k",)
    assert "k" in str(info.value)


def test_velocity_names_follow_convention():
    sys = system("xd^2/2", coords=("x",))
    assert sys.velocities == ("xd",)
    assert sys.accelerations == ("xdd",)
    assert sys.momenta == ("p_x",)


def test_name_clash_is_rejected():
    with pytest.raises(ModelError):
        LagrangianSystem(coords=("x", "xd"), lagrangian=parse("xd"))


def test_with_params_rejects_unknown_parameter(bateman_model):
    with pytest.raises(UnboundVariableError):
        bateman_model.system.with_params(k=Fraction(1))
    lighter = bateman_model.system.with_params(gamma=Fraction(0))
    assert lighter.params["gamma"] == 0
    assert bateman_model.system.params["gamma"] == Fraction(1, 10)
