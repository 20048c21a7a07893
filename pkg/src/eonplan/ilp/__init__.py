"""Exact multi-period routing and spectrum assignment.

The integer program selects, for every connection, one candidate path and
one predicted interval whose slot requirement the connection is provisioned
for, placing a contiguous block on every link of the path.  The weighted
objective trades off disruptions, under/over-provisioning spread, total slot
usage, and the highest slot id in use.
"""

from .instance import (
    SC1_WEIGHTS,
    SC2_WEIGHTS,
    BuildError,
    DemandData,
    IlpInstance,
    build_instance,
)
from .solution import IlpSolution, check_solution, from_assignment, objective_value
from .solver import SolverReport, solve_exact
from .bruteforce import brute_force
from .lp_export import export_lp
from .apply import ApplyReport, apply_solution

__all__ = [
    "SC1_WEIGHTS",
    "SC2_WEIGHTS",
    "BuildError",
    "DemandData",
    "IlpInstance",
    "build_instance",
    "IlpSolution",
    "from_assignment",
    "objective_value",
    "check_solution",
    "SolverReport",
    "solve_exact",
    "brute_force",
    "export_lp",
    "ApplyReport",
    "apply_solution",
]
