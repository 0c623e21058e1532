"""Solvers, one per cost-function class, plus a declared-class dispatcher."""

from __future__ import annotations

from ..instances import Instance
from ..reports import SolveReport
from .additive import ItemPartition, partition_items, solve_additive
from .cancelable import Phase1Result, phase1, phase2, solve_cancelable
from .common import VERIFY_MAX_M, ensure_class
from .general import run_envy_loop, solve_general
from .submodular import compute_m1, solve_submodular

SOLVERS = {
    "additive": solve_additive,
    "cancelable": solve_cancelable,
    "submodular": solve_submodular,
    "general": solve_general,
}


def solve_auto(inst: Instance, **kwargs) -> SolveReport:
    """Run the solver matching the instance's declared class."""
    return SOLVERS[inst.declared_class](inst, **kwargs)


__all__ = [
    "ItemPartition",
    "Phase1Result",
    "SOLVERS",
    "VERIFY_MAX_M",
    "compute_m1",
    "ensure_class",
    "partition_items",
    "phase1",
    "phase2",
    "run_envy_loop",
    "solve_additive",
    "solve_auto",
    "solve_cancelable",
    "solve_general",
    "solve_submodular",
]
