"""
Derivation, discovery and verification pipelines shared by the CLI and the API.

Every command takes a loaded :class:`~noetherq.models.Model` plus
:class:`RunOptions` and returns a :class:`~noetherq.reports.RunReport`. Files are
written only when an output directory is given.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .classical import (
    HamiltonianSystem,
    energy,
    energy_balance,
    energy_rate,
    euler_lagrange,
    hamilton_equations,
    legendre,
    momenta,
    time_derivative,
)
from .conf import conf
from .dynamics import integrate, monitor, underdamped_solution
from .exceptions import ModelError, NonQuadraticError, SingularHessianError
from .expr import Expr, is_zero, simplify, to_text
from .models import Model, build_basis
from .noether import (
    ConservedQuantity,
    DeterminingSolution,
    Sampler,
    charge,
    solve_determining,
    verify_conserved,
)
from .parametrize import ParametrizedSystem, lift, primary_constraint
from .quantum import (
    Grid1D,
    analytic_dho_state,
    dho_builder,
    eigencheck_Q,
    tdse_residual,
    track_expectation,
)
from .reports import RunReport

logger = logging.getLogger(conf.APP_NAME)


class RunOptions(BaseModel):
    """Overrides of what a model file declares; ``None`` keeps the file's value."""

    model_config = ConfigDict(extra="forbid")

    seed: int = conf.DEFAULT_SEED
    gamma: float | None = None
    basis0: list[str] | None = None
    basis: dict[str, list[str]] | None = None
    initial: list[float] | None = None
    t0: float | None = None
    t1: float | None = None
    h: float | None = Field(default=None, gt=0)
    tol: float | None = Field(default=None, gt=0)
    grid_n: int | None = Field(default=None, ge=16)
    box: float | None = Field(default=None, gt=0)
    stencil: int | None = None
    modes: list[int] | None = None
    times: list[float] | None = None
    cn: bool = False


def _text(e: Expr | None) -> str | None:
    return None if e is None else to_text(e)


def _inputs(model: Model, options: RunOptions) -> dict:
    return {
        "source": model.source,
        "lagrangian": model.spec.model.lagrangian,
        "params": {k: str(v) for k, v in model.system.params.items()},
        "options": options.model_dump(exclude_none=True),
    }


def apply_overrides(model: Model, options: RunOptions) -> Model:
    """``--gamma`` sets the model's damping parameter."""
    if options.gamma is None:
        return model
    quantum = model.spec.quantum
    name = quantum.damping if quantum and quantum.damping else "gamma"
    if name not in model.system.params:
        raise ModelError(f"model {model.name} has no damping parameter {name!r}")
    return model.with_params(**{name: options.gamma})


# --------------------------------------------------------------------------- #
# Discovery
# --------------------------------------------------------------------------- #
@dataclass(frozen=True, eq=False)
class Discovery:
    ps: ParametrizedSystem
    hsys: HamiltonianSystem
    solution: DeterminingSolution
    charges: tuple[ConservedQuantity, ...]

    @property
    def primary(self) -> ConservedQuantity | None:
        """First charge with a time component, the one that generalizes the energy."""
        for cq in self.charges:
            if not is_zero(cq.generator.xi0):
                return cq
        return self.charges[0] if self.charges else None


def discover(model: Model, options: RunOptions) -> Discovery:
    bound = model.system.bound()
    ps = lift(bound)
    if options.basis0 is not None or options.basis is not None:
        basis = build_basis(model.system, options.basis0 or [], options.basis or {})
    else:
        basis = model.basis()
    solution = solve_determining(ps, basis, Sampler(seed=options.seed))
    charges = tuple(
        charge(ps, g, label=f"Q{i}") for i, g in enumerate(solution, start=1)
    )
    return Discovery(ps=ps, hsys=legendre(bound), solution=solution, charges=charges)


def _charge_entry(cq: ConservedQuantity, coords) -> dict:
    return {
        "label": cq.label,
        "xi0": _text(cq.generator.xi0),
        "xi": {q: _text(x) for q, x in zip(coords, cq.generator.xi)},
        "phase_space": _text(cq.q_phase),
        "velocity_space": _text(cq.q_velocity),
        "certified": cq.certified,
    }


# --------------------------------------------------------------------------- #
# Commands
# --------------------------------------------------------------------------- #
def cmd_derive(model: Model, options: RunOptions | None = None) -> RunReport:
    options = options or RunOptions()
    model = apply_overrides(model, options)
    sys = model.system
    report = RunReport(
        command="derive", model=model.name, seed=options.seed, inputs=_inputs(model, options)
    )
    derived = report.derived
    derived["euler_lagrange"] = {
        q: _text(r) for q, r in zip(sys.coords, euler_lagrange(sys))
    }
    derived["energy"] = _text(energy(sys))
    derived["momenta"] = {p: _text(e) for p, e in zip(sys.momenta, momenta(sys))}
    rate = energy_rate(sys)
    derived["energy_rate"] = _text(rate.rate)
    report.results["energy_conserved"] = rate.conserved

    identity = simplify(time_derivative(energy(sys), sys) - energy_balance(sys))
    report.check("energy_balance_identity", is_zero(identity), detail=_text(identity))

    try:
        hsys = legendre(sys)
    except (NonQuadraticError, SingularHessianError) as e:
        logger.warning("No Hamiltonian for %s: %s", model.name, e)
        report.warnings.append(str(e))
        derived["hamiltonian"] = None
        return report

    derived["hamiltonian"] = _text(hsys.hamiltonian)
    derived["velocities"] = {
        v: _text(e) for v, e in zip(sys.velocities, hsys.velocities_of)
    }
    dq, dp = hamilton_equations(hsys)
    derived["hamilton_equations"] = {
        **{f"d{q}/d{sys.time}": _text(e) for q, e in zip(sys.coords, dq)},
        **{f"d{p}/d{sys.time}": _text(e) for p, e in zip(sys.momenta, dp)},
    }
    ps = lift(sys)
    derived["parametrized"] = {
        "lagrangian": _text(ps.lbar),
        "constraint": _text(primary_constraint(ps).phi),
    }
    return report


def cmd_noether(model: Model, options: RunOptions | None = None) -> RunReport:
    options = options or RunOptions()
    model = apply_overrides(model, options)
    report = RunReport(
        command="noether", model=model.name, seed=options.seed, inputs=_inputs(model, options)
    )
    found = discover(model, options)
    solution = found.solution
    report.derived["parametrized_lagrangian"] = _text(found.ps.lbar)
    report.results |= {
        "unknowns": solution.unknowns,
        "rows": solution.rows,
        "rank": solution.rank,
        "singular_values": list(solution.singular_values),
        "generators": [_charge_entry(cq, model.system.coords) for cq in found.charges],
    }
    report.warnings.extend(solution.warnings)
    if not found.charges:
        report.results["status"] = "none found"
        return report

    report.results["status"] = f"{len(found.charges)} found"
    for cq in found.charges:
        residual = verify_conserved(cq, found.hsys)
        report.check(f"{cq.label}_conserved", is_zero(residual), detail=_text(residual))
    return report


def _classical_inputs(model: Model, options: RunOptions):
    section = model.spec.classical
    initial = options.initial or (section.initial if section else None)
    if initial is None:
        raise ModelError(f"model {model.name} declares no initial state; pass --initial")
    dof = model.system.dof
    if len(initial) != 2 * dof:
        raise ModelError(f"initial state needs {2 * dof} numbers (positions, velocities)")
    t0 = options.t0 if options.t0 is not None else (section.t0 if section else 0.0)
    t1 = options.t1 if options.t1 is not None else (section.t1 if section else 20.0)
    h = options.h or (section.h if section else 1e-3)
    return (initial[:dof], initial[dof:]), t0, t1, h


def cmd_verify_classical(
    model: Model, options: RunOptions | None = None, out_dir: Path | None = None
) -> RunReport:
    options = options or RunOptions()
    model = apply_overrides(model, options)
    initial, t0, t1, h = _classical_inputs(model, options)
    tol = options.tol or conf.DRIFT_TOLERANCE
    report = RunReport(
        command="verify-classical",
        model=model.name,
        seed=options.seed,
        inputs=_inputs(model, options),
    )
    found = discover(model, options)
    bound = found.ps.origin
    traj = integrate(bound, initial, t0, t1, h)
    report.results |= {"steps": len(traj) - 1, "h": traj.h, "final_state": {
        "q": traj.q[-1].tolist(), "qd": traj.qd[-1].tolist()
    }}

    drifts = {}
    for cq in found.charges:
        drift = monitor(traj, cq.q_velocity, cq.label)
        drifts[cq.label] = drift.max_relative_drift
        report.check(
            f"{cq.label}_drift",
            drift.max_relative_drift <= tol,
            value=drift.max_relative_drift,
            tolerance=tol,
            detail=_text(cq.q_velocity),
        )
    if not found.charges:
        report.warnings.append("no conserved charge found in the ansatz span")

    rate = energy_rate(bound)
    e_drift = monitor(traj, energy(bound), "E").max_relative_drift
    drifts["E"] = e_drift
    if rate.conserved:
        report.check("energy_drift", e_drift <= tol, value=e_drift, tolerance=tol)
    else:
        # explicit time dependence: the energy must visibly change
        report.check(
            "energy_changes",
            e_drift > tol,
            value=e_drift,
            tolerance=tol,
            detail=f"dE/dt = {_text(rate.rate)}",
        )
    report.results["drift"] = drifts

    oscillator = _oscillator_or_none(model)
    if oscillator is not None and bound.dof == 1:
        (x0,), (v0,) = initial
        x, _ = underdamped_solution(
            traj.times, x0, v0, oscillator.gamma, oscillator.omega0, t0
        )
        report.results["closed_form_error"] = float(np.max(np.abs(traj.q[:, 0] - x)))

    if out_dir is not None:
        report.outputs.append(str(traj.to_csv(Path(out_dir) / "trajectory.csv")))
    return report


def _oscillator_or_none(model: Model):
    if model.spec.quantum is None:
        return None
    try:
        osc = model.oscillator()
        osc.omega
    except (ModelError, ValueError):
        return None
    return osc


def cmd_verify_quantum(
    model: Model, options: RunOptions | None = None, out_dir: Path | None = None
) -> RunReport:
    options = options or RunOptions()
    model = apply_overrides(model, options)
    section = model.spec.quantum
    if section is None:
        raise ModelError(f"model {model.name} has no [quantum] section")
    oscillator = model.oscillator()
    omega = oscillator.omega  # raises for overdamped parameters
    hbar = oscillator.hbar
    order = options.stencil or section.stencil
    grid = oscillator.grid(options.box or section.half_width, options.grid_n or section.n)
    modes = options.modes if options.modes is not None else section.modes
    times = options.times if options.times is not None else section.times
    eigen_tol = conf.EIGENVALUE_TOLERANCE * hbar * omega
    residual_tol = options.tol or conf.RESIDUAL_TOLERANCE

    report = RunReport(
        command="verify-quantum",
        model=model.name,
        seed=options.seed,
        inputs=_inputs(model, options),
    )
    report.results["grid"] = grid.describe()
    report.results["omega"] = omega

    found = discover(model, options)
    cq = found.primary
    if cq is None:
        report.check("charge_available", False, detail="no conserved charge to quantize")
        return report
    report.derived["charge"] = _text(cq.q_phase)

    rows = []
    for n in modes:
        builder = dho_builder(n, oscillator, grid)
        for t in times:
            psi = analytic_dho_state(n, oscillator, grid, t)
            eigen = eigencheck_Q(cq, psi, grid, hbar, order)
            tdse = tdse_residual(builder, found.hsys, grid, t, section.dt, hbar, order)
            expected = oscillator.eigenvalue(n)
            rows.append({
                "n": n,
                "t": t,
                "q_estimate": eigen.q_estimate,
                "q_expected": expected,
                "residual": eigen.residual,
                "tdse_residual": tdse,
                "grid_n": grid.n,
                "box": grid.x_max,
            })
            tag = f"n={n},t={t:g}"
            report.check(
                f"eigenvalue[{tag}]",
                abs(eigen.q_estimate - expected) <= eigen_tol,
                value=abs(eigen.q_estimate - expected),
                tolerance=eigen_tol,
            )
            report.check(
                f"eigen_residual[{tag}]",
                eigen.residual <= residual_tol,
                value=eigen.residual,
                tolerance=residual_tol,
            )
            report.check(
                f"tdse_residual[{tag}]",
                tdse <= residual_tol,
                value=tdse,
                tolerance=residual_tol,
            )
            if out_dir is not None:
                path = psi.to_csv(Path(out_dir) / f"psi_{n}_{t:g}.csv")
                report.outputs.append(str(path))
    report.results["eigenchecks"] = rows
    worst = max((max(r["residual"], r["tdse_residual"]) for r in rows), default=0.0)
    if worst > residual_tol:
        report.warnings.append(
            f"residual {worst:.3g} above {residual_tol:g} on {grid.n} points; "
            "the grid is not converged, raise --grid-n"
        )

    if options.cn:
        _cross_propagation(report, cq, oscillator, grid, times[0] if times else 0.0, order)
    return report


def _cross_propagation(report: RunReport, cq, oscillator, grid: Grid1D, t0: float, order):
    hbar = oscillator.hbar
    dt, span = conf.CN_TIME_STEP, conf.CN_SPAN
    psi0 = analytic_dho_state(0, oscillator, grid, t0)
    final, track = track_expectation(cq, psi0, t0 + span, dt, hbar, order, every=100)
    target = analytic_dho_state(0, oscillator, grid, final.t)
    error = final.distance(target)
    steps = round(span / dt)
    norm_drift = abs(final.norm() - psi0.norm()) * 1000 / steps
    report.results["propagation"] = {
        "t0": t0,
        "t1": final.t,
        "dt": dt,
        "l2_error": error,
        "norm_drift_per_1000_steps": norm_drift,
        "rayleigh_drift": track.max_relative_change,
    }
    report.check("cn_l2_error", error <= conf.CN_ERROR_TOLERANCE, error, conf.CN_ERROR_TOLERANCE)
    report.check("cn_norm_drift", norm_drift <= conf.CN_NORM_DRIFT, norm_drift, conf.CN_NORM_DRIFT)
    report.check(
        "cn_rayleigh_drift",
        track.max_relative_change <= conf.CN_RAYLEIGH_DRIFT,
        track.max_relative_change,
        conf.CN_RAYLEIGH_DRIFT,
    )


def cmd_reproduce_paper(
    model: Model | None = None,
    options: RunOptions | None = None,
    out_dir: Path | None = None,
) -> RunReport:
    """Run every enabled reproduction check against the damped oscillator."""
    from .checks import ReproductionContext, enabled_checks
    from .models import load_model

    options = options or RunOptions()
    model = apply_overrides(model or load_model("bateman"), options)
    report = RunReport(
        command="reproduce-paper",
        model=model.name,
        seed=options.seed,
        inputs=_inputs(model, options),
    )
    context = ReproductionContext(model=model, options=options, out_dir=out_dir)
    for entry in enabled_checks():
        check = entry["instance"]
        if not check.check_condition(context):
            logger.info("Skipping check %s", entry["alias"])
            continue
        logger.info("Running check %s", entry["alias"])
        result = check.run(context, report)
        check.on_complete(result, report)
        if result.passed:
            check.on_success(result, report)
        else:
            check.on_failure(result, report, result.detail)
    report.results["damping"] = float(context.damping)
    report.results["summary"] = report.summary()
    return report
