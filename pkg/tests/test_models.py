from fractions import Fraction

import pytest

from noetherq.exceptions import ModelError, UnboundVariableError
from noetherq.expr import equivalent, parse
from noetherq.models import builtin_models, builtin_text, load_model, parse_model

MINIMAL = """
[model]
name = spring
coordinates = x
lagrangian = m/2*xd^2 - k/2*x^2

[params]
m = 2
k = 0.5
"""


def test_builtin_models():
    assert builtin_models() == ["bateman", "free_particle", "harmonic"]
    assert "[model]" in builtin_text("bateman")
    with pytest.raises(ModelError, match="bateman"):
        builtin_text("pendulum")


def test_bateman_model(bateman_model):
    assert bateman_model.name == "bateman"
    assert bateman_model.source == "builtin:bateman"
    sys = bateman_model.system
    assert sys.coords == ("x",)
    assert sys.params == {"m": 1, "omega0": 1, "gamma": Fraction(1, 10)}
    assert bateman_model.spec.classical.initial == [1.0, 0.0]
    assert bateman_model.spec.quantum.modes == [0, 1, 2, 3, 4]
    assert bateman_model.spec.quantum.times == [0.0, 0.5, 1.0]


def test_parameters_are_exact():
    model = parse_model(MINIMAL)
    assert model.system.params == {"m": Fraction(2), "k": Fraction(1, 2)}
    assert model.spec.classical is None
    assert model.basis() is None


def test_oscillator_from_quantum_section(bateman_model, harmonic_model, free_particle_model):
    osc = bateman_model.oscillator()
    assert (osc.m, osc.omega0, osc.gamma, osc.hbar) == (1.0, 1.0, 0.1, 1.0)
    assert harmonic_model.oscillator().gamma == 0.0
    with pytest.raises(ModelError, match="quantum"):
        free_particle_model.oscillator()


def test_ansatz_uses_time_coordinate(free_particle_model):
    basis = free_particle_model.basis()
    assert [str(b) for b in basis.basis0] == ["1", "q0"]
    assert [str(b) for b in basis.basis[0]] == ["1", "x"]


def test_ansatz_accepts_physical_time():
    model = parse_model(MINIMAL + "\n[ansatz]\nxi0 = 1, t\nxi.x = x\n")
    basis = model.basis()
    assert equivalent(basis.basis0[1], parse("q0"))


def test_with_params_keeps_original(bateman_model):
    undamped = bateman_model.with_params(gamma=0)
    assert undamped.system.params["gamma"] == 0
    assert bateman_model.system.params["gamma"] == Fraction(1, 10)
    assert bateman_model.with_params(gamma=0.25).system.params["gamma"] == Fraction(1, 4)


def test_load_model_from_path(tmp_path):
    path = tmp_path / "spring.model"
    path.write_text(MINIMAL, encoding="utf-8")
    model = load_model(path)
    assert model.name == "spring"
    assert model.source == str(path)


@pytest.mark.parametrize("ref", ["missing/spring.model", "spring.model"])
def test_missing_model_file(ref):
    with pytest.raises(ModelError, match="not found"):
        load_model(ref)


def test_unknown_builtin_name():
    with pytest.raises(ModelError, match="no built-in model"):
        load_model("pendulum")


@pytest.mark.parametrize(
    "text, message",
    [
        ("[params]\nm = 1\n", "model"),
        (MINIMAL.replace("m = 2", "m = heavy"), "not a number"),
        (MINIMAL.replace("m/2*xd^2", "m/2*xd^^2"), "lagrangian"),
        (MINIMAL + "\n[classical]\ninitial = 1, 0\nh = -1\n", "h"),
        (MINIMAL.replace("name = spring", "name = spring\ncolour = red"), "colour"),
        (MINIMAL + "\n[ansatz]\nxi.y = 1\n", "unknown coordinate"),
        (MINIMAL + "\n[model]\nname = twice\n", "model"),
    ],
)
def test_malformed_models(text, message):
    with pytest.raises(ModelError, match=message):
        parse_model(text, source="broken.model")


def test_unbound_variable_is_reported():
    text = MINIMAL.replace("k/2*x^2", "k/2*x^2 + c*x")
    with pytest.raises(UnboundVariableError) as info:
        parse_model(text)
    assert info.value.names == ("c",)


def test_unbound_variable_in_ansatz():
    with pytest.raises(UnboundVariableError, match="s"):
        parse_model(MINIMAL + "\n[ansatz]\nxi0 = s\n")
