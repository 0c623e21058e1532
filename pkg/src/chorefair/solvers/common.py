"""Shared solver plumbing: class gates, op counting, trace recording."""

from __future__ import annotations

from ..costs import CostFunction, check_class, evaluate, marginal
from ..errors import WrongClassError
from ..instances import CLASS_RANK, Instance, kind_guarantees
from ..itemset import ItemSet

# Ground sets at most this large get their declared class verified
# exhaustively before a solver trusts it.
VERIFY_MAX_M = 12


def ensure_class(inst: Instance, required: str) -> None:
    """Gate an instance for a solver that assumes membership in ``required``.

    The declaration must not be broader than the solver handles.  On small
    ground sets the declaration is then re-proved exhaustively per agent;
    on larger ones descriptor kinds that guarantee the class are trusted
    and the rest ride on the declaration (runtime invariant checks inside
    the solvers catch mis-declared inputs there).
    """
    if CLASS_RANK[inst.declared_class] > CLASS_RANK[required]:
        raise WrongClassError(
            f"instance is declared {inst.declared_class!r}, solver requires "
            f"{required!r} or narrower"
        )
    if inst.m > VERIFY_MAX_M:
        return
    for i, fn in enumerate(inst.agents):
        if kind_guarantees(fn, required):
            continue
        report = check_class(fn)
        if not report.binary_marginal:
            raise WrongClassError(f"agents[{i}] has marginals outside {{0, 1}}")
        ok = {
            "additive": report.additive,
            "cancelable": report.cancelable,
            "submodular": report.submodular,
            "general": True,
        }[required]
        if not ok:
            raise WrongClassError(
                f"agents[{i}] is declared {inst.declared_class!r} but is not "
                f"{required} (witness: {report.witnesses.get(required)})"
            )


class Trace:
    """Optional JSON-line event recorder; a no-op unless enabled."""

    __slots__ = ("events",)

    def __init__(self, enabled: bool):
        self.events: list[dict] | None = [] if enabled else None

    def emit(self, event: str, **data) -> None:
        if self.events is not None:
            self.events.append({"event": event, **data})


class OpCounter:
    """Counts cost-oracle queries, the unit reported by the benchmarks."""

    __slots__ = ("evals",)

    def __init__(self) -> None:
        self.evals = 0

    def evaluate(self, fn: CostFunction, mask: ItemSet) -> int:
        self.evals += 1
        return evaluate(fn, mask)

    def marginal(self, fn: CostFunction, item: int, mask: ItemSet) -> int:
        self.evals += 1
        return marginal(fn, item, mask)


__all__ = ["VERIFY_MAX_M", "ensure_class", "Trace", "OpCounter"]
