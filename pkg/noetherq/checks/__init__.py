from ..conf import checks
from ..utils import load_class
from .base import ReproductionCheck
from .classical import (
    ChargeDiscoveryCheck,
    NumericConservationCheck,
    ParametrizedLiftCheck,
    SymbolicConservationCheck,
    TrajectoryOracleCheck,
)
from .context import ReproductionContext
from .quantum import (
    DampingFreeLimitCheck,
    PropagationCheck,
    PureStateEigenvalueCheck,
    SchrodingerMembershipCheck,
)


def enabled_checks() -> list[dict]:
    """Instantiate the checks enabled in ``config.checks``, in declared order."""
    return [
        {**entry, "instance": load_class(entry["path"], entry["factory"])}
        for entry in checks.CHECKS
    ]


__all__ = [
    "ChargeDiscoveryCheck",
    "DampingFreeLimitCheck",
    "NumericConservationCheck",
    "ParametrizedLiftCheck",
    "PropagationCheck",
    "PureStateEigenvalueCheck",
    "ReproductionCheck",
    "ReproductionContext",
    "SchrodingerMembershipCheck",
    "SymbolicConservationCheck",
    "TrajectoryOracleCheck",
    "enabled_checks",
]
