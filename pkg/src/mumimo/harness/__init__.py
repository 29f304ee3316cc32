"""Monte Carlo experiment engine and report serialization."""
from .montecarlo import (
    AsymptoticRow,
    ExperimentSpec,
    InfeasibleCell,
    RateReport,
    RateRow,
    SimMode,
    cell_seed,
    parse_modes,
    run_monte_carlo,
)
from .report import emit_report, read_report

__all__ = [
    "AsymptoticRow",
    "ExperimentSpec",
    "InfeasibleCell",
    "RateReport",
    "RateRow",
    "SimMode",
    "cell_seed",
    "emit_report",
    "parse_modes",
    "read_report",
    "run_monte_carlo",
]
