import logging

import numpy as np

from ..classical import energy
from ..conf import conf
from ..expr import is_zero
from ..quantum import (
    Grid1D,
    analytic_dho_state,
    assemble_hamiltonian,
    assemble_Q,
    dho_builder,
    eigencheck_Q,
    tdse_residual,
    track_expectation,
)
from ..reports import CheckResult, RunReport
from .base import ReproductionCheck
from .context import ReproductionContext

logger = logging.getLogger(conf.APP_NAME)


class QuantumCheck(ReproductionCheck):
    def check_condition(self, context: ReproductionContext) -> bool:
        return context.model.spec.quantum is not None and context.bound.dof == 1


class PureStateEigenvalueCheck(QuantumCheck):
    """Analytic states are eigenstates of Q̂ with eigenvalue (n + ½)ħω."""

    name = "pure_state_eigenvalues"

    def __init__(
        self,
        modes=(0, 1, 2, 3, 4),
        times=(0.0, 0.5, 1.0),
        eigenvalue_tolerance: float = 1e-5,
        residual_tolerance: float = 1e-4,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.modes = list(modes)
        self.times = list(times)
        self.eigenvalue_tolerance = eigenvalue_tolerance
        self.residual_tolerance = residual_tolerance

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        cq = context.primary_charge
        if cq is None:
            return report.check(self.name, False, detail="no unique charge to quantize")
        osc, grid = context.oscillator, context.grid
        worst_error = worst_residual = 0.0
        rows = []
        for n in self.modes:
            for t in self.times:
                psi = analytic_dho_state(n, osc, grid, t)
                result = eigencheck_Q(cq, psi, grid, osc.hbar, context.stencil)
                error = abs(result.q_estimate - osc.eigenvalue(n))
                worst_error = max(worst_error, error)
                worst_residual = max(worst_residual, result.residual)
                rows.append({
                    "n": n,
                    "t": t,
                    "q_estimate": result.q_estimate,
                    "q_expected": osc.eigenvalue(n),
                    "residual": result.residual,
                    "grid_n": grid.n,
                    "box": grid.x_max,
                })
        report.results["eigenchecks"] = rows
        tolerance = self.eigenvalue_tolerance * osc.hbar * osc.omega
        return report.check(
            self.name,
            worst_error <= tolerance and worst_residual <= self.residual_tolerance,
            value=worst_error,
            tolerance=tolerance,
            detail=f"max eigen-residual {worst_residual:.3g}",
        )


class SchrodingerMembershipCheck(QuantumCheck):
    """
    Analytic states solve the discretized Schrödinger equation and the residual
    converges under grid refinement.
    """

    name = "schrodinger_membership"

    def __init__(
        self,
        modes=(0, 2),
        tolerance: float = 1e-4,
        dt: float = 1e-5,
        convergence_points: int = 256,
        convergence_ratio: float = 3.5,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.modes = list(modes)
        self.tolerance = tolerance
        self.dt = dt
        self.convergence_points = convergence_points
        self.convergence_ratio = convergence_ratio

    def _residual(self, context, n: int, grid: Grid1D, t: float) -> float:
        osc = context.oscillator
        return tdse_residual(
            dho_builder(n, osc, grid), context.hsys, grid, t, self.dt, osc.hbar,
            context.stencil,
        )

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        grid = context.grid
        times = context.model.spec.quantum.times or [0.0]
        residuals = {
            f"n={n},t={t:g}": self._residual(context, n, grid, t)
            for n in self.modes
            for t in times
        }
        coarse = Grid1D(grid.x_min, grid.x_max, self.convergence_points)
        fine = Grid1D(grid.x_min, grid.x_max, 2 * self.convergence_points)
        ratios = {
            f"n={n}": self._residual(context, n, coarse, times[0])
            / self._residual(context, n, fine, times[0])
            for n in self.modes
        }
        report.results["tdse"] = {"residuals": residuals, "refinement_ratios": ratios}
        worst = max(residuals.values())
        slowest = min(ratios.values())
        return report.check(
            self.name,
            worst <= self.tolerance and slowest >= self.convergence_ratio,
            value=worst,
            tolerance=self.tolerance,
            detail=f"smallest refinement ratio {slowest:.3g}",
        )


class PropagationCheck(QuantumCheck):
    """Crank–Nicolson from the analytic ground state tracks the analytic solution."""

    name = "propagation"

    def __init__(
        self,
        t1: float = 1.0,
        dt: float = 1e-4,
        tolerance: float = 1e-3,
        norm_drift: float = 1e-10,
        rayleigh_drift: float = 1e-6,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.t1 = t1
        self.dt = dt
        self.tolerance = tolerance
        self.norm_drift = norm_drift
        self.rayleigh_drift = rayleigh_drift

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        cq = context.primary_charge
        if cq is None:
            return report.check(self.name, False, detail="no unique charge to track")
        osc, grid = context.oscillator, context.grid
        psi0 = analytic_dho_state(0, osc, grid, 0.0)
        final, track = track_expectation(
            cq, psi0, self.t1, self.dt, osc.hbar, context.stencil, every=100
        )
        error = final.distance(analytic_dho_state(0, osc, grid, final.t))
        steps = round(abs(self.t1) / self.dt)
        norm_drift = abs(final.norm() - psi0.norm()) * 1000 / steps
        rayleigh = track.max_relative_change
        report.results["propagation"] = {
            "l2_error": error,
            "norm_drift_per_1000_steps": norm_drift,
            "rayleigh_drift": rayleigh,
            "steps": steps,
        }
        if context.out_dir is not None:
            path = final.to_csv(context.out_dir / f"psi_0_{final.t:g}_cn.csv")
            report.outputs.append(str(path))
        return report.check(
            self.name,
            error <= self.tolerance
            and norm_drift <= self.norm_drift
            and rayleigh <= self.rayleigh_drift,
            value=error,
            tolerance=self.tolerance,
            detail=f"norm drift {norm_drift:.3g} per 1000 steps, Rayleigh drift {rayleigh:.3g}",
        )


class DampingFreeLimitCheck(QuantumCheck):
    """
    Without damping the charge is the energy and Q̂ = Ĥ entrywise; a vanishing but
    nonzero damping stays continuous with that limit.
    """

    name = "damping_free_limit"

    def __init__(
        self,
        modes=(0, 1, 2, 3, 4),
        eigenvalue_tolerance: float = 1e-5,
        epsilon: float = 1e-8,
        continuity_tolerance: float = 1e-6,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.modes = list(modes)
        self.eigenvalue_tolerance = eigenvalue_tolerance
        self.epsilon = epsilon
        self.continuity_tolerance = continuity_tolerance

    def _variant(self, context: ReproductionContext, damping) -> ReproductionContext:
        name = context.model.spec.quantum.damping
        model = context.model if name is None else context.model.with_params(**{name: damping})
        return ReproductionContext(model=model, options=context.options)

    def run(self, context: ReproductionContext, report: RunReport) -> CheckResult:
        free = self._variant(context, 0)
        cq = free.primary_charge
        if cq is None:
            return report.check(self.name, False, detail="no unique charge without damping")
        osc, grid = free.oscillator, free.grid
        is_energy = is_zero(cq.q_velocity - energy(free.bound))
        Q = assemble_Q(cq, grid, 0.7, osc.hbar, free.stencil)
        H = assemble_hamiltonian(free.hsys, grid, 0.7, osc.hbar, free.stencil)
        entrywise = bool(np.array_equal(Q.bands, H.bands))

        tolerance = self.eigenvalue_tolerance * osc.hbar * osc.omega0
        errors = []
        for n in self.modes:
            psi = analytic_dho_state(n, osc, grid, 0.0)
            q = eigencheck_Q(cq, psi, grid, osc.hbar, free.stencil).q_estimate
            errors.append(abs(q - (n + 0.5) * osc.hbar * osc.omega0))

        # Γ = ε goes through discovery like any damped run
        near = self._variant(context, self.epsilon)
        cq_near = near.primary_charge
        if cq_near is None:
            return report.check(
                self.name, False, detail=f"no unique charge at damping {self.epsilon:g}"
            )
        psi0 = analytic_dho_state(0, near.oscillator, near.grid, 0.5)
        q_near = eigencheck_Q(cq_near, psi0, near.grid, osc.hbar, free.stencil).q_estimate
        q_free = eigencheck_Q(
            cq, analytic_dho_state(0, osc, grid, 0.5), grid, osc.hbar, free.stencil
        ).q_estimate
        continuity = abs(q_near - q_free)
        logger.debug("Continuity gap at damping %g: %.3g", self.epsilon, continuity)

        report.results["damping_free"] = {
            "charge_is_energy": is_energy,
            "operators_equal": entrywise,
            "eigenvalue_errors": errors,
            "continuity_gap": continuity,
            "near_generator": str(cq_near.generator),
        }
        return report.check(
            self.name,
            is_energy
            and entrywise
            and max(errors) <= tolerance
            and continuity <= self.continuity_tolerance,
            value=max(errors),
            tolerance=tolerance,
            detail=f"charge is energy={is_energy}, Q̂ = Ĥ entrywise={entrywise}",
        )
