import logging

import numpy as np

from ..classical import energy, energy_rate
from ..conf import conf
from ..dynamics import monitor, underdamped_solution
from ..expr import Expr, const, equivalent, exp, is_zero, to_text, var
from ..noether import verify_conserved
from ..parametrize import canonical_hamiltonian, homogeneity_residual, primary_constraint
from ..quantum import constraint_check, dho_builder
from ..reports import CheckResult, RunReport
from .base import ReproductionCheck
from .context import ReproductionContext

logger = logging.getLogger(conf.APP_NAME)


def closed_form_charge(context: ReproductionContext) -> Expr:
    """(m/2)[(ẋ + Γx)² + ω²x²]e^{2Γt} with exact parameter values."""
    sys = context.bound
    x, xd, t = var(sys.coords[0]), var(sys.velocities[0]), var(sys.time)
    m, w0, g = context.mass, context.omega0, context.damping
    return (
        const(m / 2)
        * ((xd + const(g) * x) ** 2 + const(w0**2 - g**2) * x**2)
        * exp(const(2 * g) * t)
    )


class ChargeDiscoveryCheck(ReproductionCheck):
    """The determining system yields exactly the generator (−1, Γx) and its charge."""

    name = "charge_discovery"

    def check_condition(self, context: ReproductionContext) -> bool:
        return context.bound.dof == 1

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        solution = context.solution
        report.results["singular_values"] = list(solution.singular_values)
        logger.debug(
            "Determining system: rank %d of %d unknowns", solution.rank, solution.unknowns
        )
        if len(solution) != 1:
            return report.check(
                self.name, False, detail=f"expected one generator, found {len(solution)}"
            )
        g, cq = solution[0], context.charges[0]
        x = var(context.bound.coords[0])
        generator_ok = equivalent(g.xi0, const(-1)) and equivalent(
            g.xi[0], const(context.damping) * x
        )
        charge_ok = is_zero(cq.q_velocity - closed_form_charge(context))
        report.derived["generator"] = str(g)
        report.derived["charge"] = to_text(cq.q_velocity)
        report.derived["charge_phase_space"] = to_text(cq.q_phase)
        return report.check(
            self.name,
            generator_ok and charge_ok,
            detail=f"generator {g}, closed form {'matches' if charge_ok else 'differs'}",
        )


class SymbolicConservationCheck(ReproductionCheck):
    """∂Q/∂t + {Q, H} reduces to the literal 0."""

    name = "symbolic_conservation"

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        cq = context.primary_charge
        if cq is None:
            return report.check(self.name, False, detail="no unique charge to verify")
        residual = verify_conserved(cq, context.hsys)
        return report.check(self.name, residual.is_value(0), detail=to_text(residual))


class ParametrizedLiftCheck(ReproductionCheck):
    """
    The lift is degree-one homogeneous with H̄ ≡ 0, and its quantized constraint
    annihilates the analytic ground state.
    """

    name = "parametrized_lift"

    def __init__(self, tolerance: float = 1e-4, dt: float = 1e-5, **kwargs):
        super().__init__(**kwargs)
        self.tolerance = tolerance
        self.dt = dt

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        ps = context.ps
        homogeneous = is_zero(homogeneity_residual(ps))
        vanishing = is_zero(canonical_hamiltonian(ps))
        constraint = primary_constraint(ps)
        report.derived["constraint"] = to_text(constraint.phi)

        residual = None
        if context.model.spec.quantum is not None:
            builder = dho_builder(0, context.oscillator, context.grid)
            residual = constraint_check(
                constraint, builder, context.grid, 0.5, self.dt, context.oscillator.hbar,
                context.stencil,
            )
        passed = homogeneous and vanishing and (residual is None or residual <= self.tolerance)
        return report.check(
            self.name,
            passed,
            value=residual,
            tolerance=self.tolerance,
            detail=f"homogeneous={homogeneous}, canonical H vanishes={vanishing}",
        )


class NumericConservationCheck(ReproductionCheck):
    """
    RK4 keeps the charge to the drift tolerance; the energy follows its rate flag.

    With damping the mechanical energy E·e^{−2Γt} must lose more than
    ``energy_change`` of its initial value.
    """

    name = "numeric_conservation"

    def __init__(self, drift_tolerance: float = 1e-8, energy_change: float = 0.5, **kwargs):
        super().__init__(**kwargs)
        self.drift_tolerance = drift_tolerance
        self.energy_change = energy_change

    def check_condition(self, context: ReproductionContext) -> bool:
        return context.model.spec.classical is not None

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        cq = context.primary_charge
        if cq is None:
            return report.check(self.name, False, detail="no unique charge to monitor")
        traj = context.trajectory
        charge_drift = monitor(traj, cq.q_velocity, cq.label).max_relative_drift

        bound = context.bound
        e = energy(bound)
        energy_drift = monitor(traj, e, "E").max_relative_drift
        damping = context.damping
        mechanical = e * exp(const(-2 * damping) * var(bound.time))
        values = monitor(traj, mechanical, "E_mech").values
        loss = 1.0 - values[-1] / values[0] if values[0] else 0.0

        report.results["classical"] = {
            "charge_drift": charge_drift,
            "energy_drift": energy_drift,
            "mechanical_energy_loss": loss,
            "steps": len(traj) - 1,
        }
        if energy_rate(bound).conserved:
            energy_ok = energy_drift <= self.drift_tolerance
        else:
            energy_ok = energy_drift > self.drift_tolerance and loss > self.energy_change
        return report.check(
            self.name,
            charge_drift <= self.drift_tolerance and energy_ok,
            value=charge_drift,
            tolerance=self.drift_tolerance,
            detail=f"energy drift {energy_drift:.3g}, mechanical energy loss {loss:.3g}",
        )


class TrajectoryOracleCheck(ReproductionCheck):
    """RK4 against the closed-form underdamped solution."""

    name = "trajectory_oracle"

    def __init__(self, tolerance: float = 1e-8, **kwargs):
        super().__init__(**kwargs)
        self.tolerance = tolerance

    def check_condition(self, context: ReproductionContext) -> bool:
        return context.model.spec.classical is not None and context.bound.dof == 1

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        traj = context.trajectory
        section = context.model.spec.classical
        x0, v0 = section.initial
        x, _ = underdamped_solution(
            traj.times, x0, v0, float(context.damping), float(context.omega0), section.t0
        )
        error = float(np.max(np.abs(traj.q[:, 0] - x)))
        return report.check(self.name, error <= self.tolerance, error, self.tolerance)
