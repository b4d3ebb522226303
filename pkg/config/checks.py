import os

## REPRODUCTION CHECKS

# Full canonical list of the end-to-end checks run by `noetherq reproduce-paper`
# Each check is a dict with:
# - key/alias: unique identifier for the check
# - path: import path to the check class
# - factory: callable returning the constructor kwargs (tolerances, sampling choices)
ALL_CHECKS = {
    "charge_discovery": {
        "path": "noetherq.checks.ChargeDiscoveryCheck",
        "factory": lambda: {},
    },
    "symbolic_conservation": {
        "path": "noetherq.checks.SymbolicConservationCheck",
        "factory": lambda: {},
    },
    "parametrized_lift": {
        "path": "noetherq.checks.ParametrizedLiftCheck",
        "factory": lambda: {
            "tolerance": 1e-4,
            "dt": 1e-5,
        },
    },
    "numeric_conservation": {
        "path": "noetherq.checks.NumericConservationCheck",
        "factory": lambda: {
            "drift_tolerance": float(os.getenv("NOETHERQ_CHARGE_DRIFT_TOLERANCE", 1e-8)),
            "energy_change": 0.5,
        },
    },
    "trajectory_oracle": {
        "path": "noetherq.checks.TrajectoryOracleCheck",
        "factory": lambda: {
            "tolerance": 1e-8,
        },
    },
    "pure_state_eigenvalues": {
        "path": "noetherq.checks.PureStateEigenvalueCheck",
        "factory": lambda: {
            "modes": [0, 1, 2, 3, 4],
            "times": [0.0, 0.5, 1.0],
            "eigenvalue_tolerance": 1e-5,
            "residual_tolerance": 1e-4,
        },
    },
    "schrodinger_membership": {
        "path": "noetherq.checks.SchrodingerMembershipCheck",
        "factory": lambda: {
            "modes": [0, 2],
            "tolerance": 1e-4,
            "dt": 1e-5,
            "convergence_points": 256,
            "convergence_ratio": 3.5,
        },
    },
    "propagation": {
        "path": "noetherq.checks.PropagationCheck",
        "factory": lambda: {
            "t1": 1.0,
            "dt": float(os.getenv("NOETHERQ_CN_TIME_STEP", 1e-4)),
            "tolerance": 1e-3,
            "norm_drift": 1e-10,
            "rayleigh_drift": 1e-6,
        },
    },
    "damping_free_limit": {
        "path": "noetherq.checks.DampingFreeLimitCheck",
        "factory": lambda: {
            "modes": [0, 1, 2, 3, 4],
            "eigenvalue_tolerance": 1e-5,
        },
    },
}

# Comma-separated whitelist. Enable *all* if empty
_ENABLED = {
    a.strip() for a in os.getenv("NOETHERQ_ENABLED_CHECKS", "").split(",") if a.strip()
}
_selected_aliases = _ENABLED or ALL_CHECKS.keys()

# Build ordered list (preserve the declared order in ALL_CHECKS)
CHECKS = [
    {
        "alias": alias,
        "path": spec["path"],
        "factory": spec["factory"](),  # factory runs only for enabled aliases
    }
    for alias, spec in ALL_CHECKS.items()
    if alias in _selected_aliases
]
