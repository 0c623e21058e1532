"""Allocations and exact fairness checking.

Everything here is checker-side: given an allocation, decide envy-freeness
(optionally scaled by a rational factor alpha), its removal-stable variant
(no agent may prefer another bundle after dropping any single item of her
own, "EFX"), Pareto optimality by exhaustive comparison, and the equality
envy graph used by the coarser solvers.

Costs are integers and alpha is an exact rational, so every comparison in
this module is exact; no floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from . import itemset
from .costs import CostFunction, evaluate, value_table
from .errors import InvalidInputError, UnsupportedSizeError
from .instances import Instance
from .itemset import ItemSet, full_set, iter_items

# Exhaustive dominance scans refuse to enumerate more than this many
# allocations no matter what limit the caller asks for.
ENUMERATION_HARD_CAP = 10**8
DEFAULT_ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class Allocation:
    """Disjoint bundles, one per agent, plus explicitly unallocated items.

    Bundles and the unallocated pool must partition {0, ..., m-1} exactly.
    """

    n: int
    m: int
    bundles: tuple[ItemSet, ...]
    unallocated: ItemSet = 0

    def __post_init__(self) -> None:
        if len(self.bundles) != self.n:
            raise InvalidInputError(f"n={self.n} but {len(self.bundles)} bundles")
        object.__setattr__(self, "bundles", tuple(self.bundles))
        union = self.unallocated
        if union < 0 or union >> self.m:
            raise InvalidInputError("unallocated set out of range")
        for i, b in enumerate(self.bundles):
            if b < 0 or b >> self.m:
                raise InvalidInputError(f"bundle {i} out of range for m={self.m}")
            if union & b:
                raise InvalidInputError(f"bundle {i} overlaps another bundle or the pool")
            union |= b
        if union != full_set(self.m):
            raise InvalidInputError("bundles plus unallocated must cover all items exactly")

    @property
    def complete(self) -> bool:
        return self.unallocated == 0

    @classmethod
    def make(cls, n: int, m: int, bundles: tuple[ItemSet, ...] | list[ItemSet]) -> "Allocation":
        """Build an allocation, treating items in no bundle as unallocated."""
        held = 0
        for b in bundles:
            held |= b
        return cls(n=n, m=m, bundles=tuple(bundles), unallocated=full_set(m) & ~held)

    @classmethod
    def from_assignment(cls, n: int, m: int, owners: list[int] | tuple[int, ...]) -> "Allocation":
        """Complete allocation from an item -> agent vector."""
        if len(owners) != m:
            raise InvalidInputError(f"assignment vector has {len(owners)} entries, expected {m}")
        bundles = [0] * n
        for e, i in enumerate(owners):
            if not 0 <= i < n:
                raise InvalidInputError(f"assignment for item {e} names agent {i}, n={n}")
            bundles[i] |= 1 << e
        return cls(n=n, m=m, bundles=tuple(bundles), unallocated=0)

    def to_json(self) -> dict:
        return {
            "bundles": [list(iter_items(b)) for b in self.bundles],
            "unallocated": list(iter_items(self.unallocated)),
        }

    @classmethod
    def from_json(cls, obj: dict, n: int, m: int) -> "Allocation":
        if not isinstance(obj, dict) or "bundles" not in obj:
            raise InvalidInputError("allocation: expected an object with a 'bundles' field")
        bundles_json = obj["bundles"]
        if not isinstance(bundles_json, list):
            raise InvalidInputError("allocation.bundles: expected a list of lists")
        bundles = tuple(itemset.from_indices(b, m) for b in bundles_json)
        pool = itemset.from_indices(obj.get("unallocated", []), m)
        return cls(n=n, m=m, bundles=bundles, unallocated=pool)


class Violation(NamedTuple):
    """A fairness counterexample: agent ``i`` against agent ``j``.

    ``item`` is the dropped item for removal-stable checks and None for
    plain envy checks.
    """

    kind: str
    i: int
    j: int
    item: int | None

    def to_json(self) -> dict:
        return {"kind": self.kind, "i": self.i, "j": self.j, "item": self.item}


def _as_alpha(alpha: Fraction | int | str) -> Fraction:
    if isinstance(alpha, float):
        raise InvalidInputError("alpha must be an exact rational (int, 'p/q' or Fraction)")
    try:
        frac = Fraction(alpha)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"cannot parse alpha {alpha!r}: {exc}") from exc
    if frac < 1:
        raise InvalidInputError(f"alpha must be >= 1, got {frac}")
    return frac


def _check_consistent(inst: Instance, alloc: Allocation) -> None:
    if alloc.n != inst.n or alloc.m != inst.m:
        raise InvalidInputError(
            f"allocation shaped ({alloc.n}, {alloc.m}) does not match instance "
            f"({inst.n}, {inst.m})"
        )


def social_cost(inst: Instance, alloc: Allocation) -> int:
    """Sum over agents of the cost of their own bundle."""
    _check_consistent(inst, alloc)
    return sum(evaluate(fn, b) for fn, b in zip(inst.agents, alloc.bundles))


# -- envy checks over raw cost functions (reused by solvers on residual views)


def ef_violations_funcs(
    funcs: list[CostFunction] | tuple[CostFunction, ...],
    bundles: tuple[ItemSet, ...] | list[ItemSet],
    alpha: Fraction | int | str = 1,
) -> list[Violation]:
    alpha = _as_alpha(alpha)
    out = []
    for i, fi in enumerate(funcs):
        own = evaluate(fi, bundles[i])
        for j in range(len(bundles)):
            if j != i and own > alpha * evaluate(fi, bundles[j]):
                out.append(Violation("ef", i, j, None))
    return out


def efx_violations_funcs(
    funcs: list[CostFunction] | tuple[CostFunction, ...],
    bundles: tuple[ItemSet, ...] | list[ItemSet],
    alpha: Fraction | int | str = 1,
) -> list[Violation]:
    alpha = _as_alpha(alpha)
    out = []
    for i, fi in enumerate(funcs):
        mine = bundles[i]
        if not mine:
            continue
        drops = [(e, evaluate(fi, mine ^ (1 << e))) for e in iter_items(mine)]
        for j in range(len(bundles)):
            if j == i:
                continue
            bound = alpha * evaluate(fi, bundles[j])
            for e, reduced in drops:
                if reduced > bound:
                    out.append(Violation("efx", i, j, e))
    return out


def is_efx_funcs(
    funcs: list[CostFunction] | tuple[CostFunction, ...],
    bundles: tuple[ItemSet, ...] | list[ItemSet],
) -> bool:
    """Early-exit plain EFX test used inside solver loops.

    Removal-stability against every rival reduces to one comparison per
    agent: the worst single-item removal must not exceed the cheapest
    rival bundle.
    """
    if len(bundles) < 2:
        return True
    for i, fi in enumerate(funcs):
        mine = bundles[i]
        if not mine:
            continue
        worst_drop = max(evaluate(fi, mine ^ (1 << e)) for e in iter_items(mine))
        best_other = min(evaluate(fi, bundles[j]) for j in range(len(bundles)) if j != i)
        if worst_drop > best_other:
            return False
    return True


def is_alpha_ef(
    inst: Instance, alloc: Allocation, alpha: Fraction | int | str = 1
) -> tuple[bool, list[Violation]]:
    """Scaled envy-freeness: c_i(X_i) <= alpha * c_i(X_j) for all i != j.

    Unallocated items never enter the comparison.
    """
    _check_consistent(inst, alloc)
    viols = ef_violations_funcs(inst.agents, alloc.bundles, alpha)
    return (not viols, viols)


def is_alpha_efx(
    inst: Instance, alloc: Allocation, alpha: Fraction | int | str = 1
) -> tuple[bool, list[Violation]]:
    """Scaled removal-stable envy-freeness.

    Agent i may not envy j (up to alpha) after dropping any single item of
    her own bundle: c_i(X_i - e) <= alpha * c_i(X_j) for every e in X_i.
    Empty own bundles satisfy the condition vacuously.
    """
    _check_consistent(inst, alloc)
    viols = efx_violations_funcs(inst.agents, alloc.bundles, alpha)
    return (not viols, viols)


# ---------------------------------------------------------------------------
# Pareto optimality by exhaustive dominance scan
# ---------------------------------------------------------------------------


def _assignment_masks(n: int, m: int, ranks: np.ndarray) -> list[np.ndarray]:
    """Bundle masks per agent for enumeration ranks.

    Rank r encodes the item -> agent vector in base n with item 0 as the
    most significant digit, so ascending rank is ascending lexicographic
    order of the vector.
    """
    masks = [np.zeros(len(ranks), dtype=np.int64) for _ in range(n)]
    for e in range(m):
        digit = (ranks // n ** (m - 1 - e)) % n
        bit = np.int64(1 << e)
        for i in range(n):
            masks[i] += (digit == i) * bit
    return masks


def allocation_from_rank(n: int, m: int, rank: int) -> Allocation:
    owners = []
    for e in range(m):
        owners.append(int(rank // n ** (m - 1 - e) % n))
    return Allocation.from_assignment(n, m, owners)


def is_po_bruteforce(
    inst: Instance,
    alloc: Allocation,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    chunk: int = 1 << 16,
) -> tuple[bool, Allocation | None]:
    """Exhaustive Pareto check for complete allocations.

    Scans every one of the n^m complete allocations for one that makes no
    agent worse off and some agent strictly better off.  Returns
    ``(True, None)`` or ``(False, first dominating allocation)`` in
    lexicographic assignment order.  The scan is chunked internally; the
    result does not depend on the chunk size.
    """
    _check_consistent(inst, alloc)
    if not alloc.complete:
        raise InvalidInputError("Pareto check requires a complete allocation")
    n, m = inst.n, inst.m
    total = n**m
    if limit > ENUMERATION_HARD_CAP:
        raise InvalidInputError(f"limit exceeds the hard cap of {ENUMERATION_HARD_CAP}")
    if total > limit:
        raise UnsupportedSizeError(
            f"{n}^{m} = {total} complete allocations exceed the limit of {limit}"
        )
    if chunk < 1:
        raise InvalidInputError("chunk size must be positive")
    tables = [value_table(fn, max_m=26).astype(np.int32) for fn in inst.agents]
    own = np.array(
        [evaluate(fn, b) for fn, b in zip(inst.agents, alloc.bundles)], dtype=np.int32
    )
    for start in range(0, total, chunk):
        ranks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        masks = _assignment_masks(n, m, ranks)
        le = np.ones(len(ranks), dtype=bool)
        lt = np.zeros(len(ranks), dtype=bool)
        for i in range(n):
            costs_i = tables[i][masks[i]]
            le &= costs_i <= own[i]
            lt |= costs_i < own[i]
        dominating = le & lt
        if dominating.any():
            rank = int(ranks[int(np.argmax(dominating))])
            return False, allocation_from_rank(n, m, rank)
    return True, None


# ---------------------------------------------------------------------------
# Equality envy graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnvyGraph:
    """Directed graph on agents with an edge (i, j) whenever agent i's cost
    for her own bundle equals her cost for j's bundle (i is on the verge of
    envying j)."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for i, j in self.edges:
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInputError(f"bad envy edge ({i}, {j}) for n={self.n}")

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self.edges


def build_envy_graph(inst: Instance, alloc: Allocation) -> EnvyGraph:
    _check_consistent(inst, alloc)
    edges = set()
    for i, fi in enumerate(inst.agents):
        own = evaluate(fi, alloc.bundles[i])
        for j in range(inst.n):
            if j != i and own == evaluate(fi, alloc.bundles[j]):
                edges.add((i, j))
    return EnvyGraph(n=inst.n, edges=frozenset(edges))


def strongly_connected_components(n: int, successors: Callable[[int], list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components are returned in completion order with
    sorted members."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    adjacency = [successors(v) for v in range(n)]
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ptr = work.pop()
            if ptr == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            succ = adjacency[v]
            while ptr < len(succ):
                w = succ[ptr]
                ptr += 1
                if index[w] == -1:
                    work.append((v, ptr))
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def tail_scc(graph: EnvyGraph) -> frozenset[int]:
    """A strongly connected component with no edges leaving it.

    Deterministic choice: among all such components, the one containing the
    lowest-numbered agent.
    """
    comps = strongly_connected_components(graph.n, graph.successors)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    has_exit = [False] * len(comps)
    for i, j in graph.edges:
        if comp_of[i] != comp_of[j]:
            has_exit[comp_of[i]] = True
    tails = [comp for ci, comp in enumerate(comps) if not has_exit[ci]]
    best = min(tails, key=lambda comp: comp[0])
    return frozenset(best)


def find_cycle_through_edge(graph: EnvyGraph, i: int, j: int) -> list[int] | None:
    """Shortest cycle using the edge (i, j), as an agent list starting at i.

    Runs a breadth-first search from j back to i, expanding neighbours in
    ascending index order; returns None when j cannot reach i.
    """
    if not graph.has_edge(i, j):
        raise InvalidInputError(f"({i}, {j}) is not an edge of the envy graph")
    if j == i:
        return [i]
    parent: dict[int, int] = {j: -1}
    frontier = [j]
    while frontier and i not in parent:
        nxt = []
        for v in frontier:
            for w in graph.successors(v):
                if w not in parent:
                    parent[w] = v
                    nxt.append(w)
        frontier = nxt
    if i not in parent:
        return None
    path = [i]
    while path[-1] != j:
        path.append(parent[path[-1]])
    path.reverse()  # j ... i
    return [i] + path[:-1]


# ---------------------------------------------------------------------------
# Combined report
# ---------------------------------------------------------------------------


@dataclass
class FairnessReport:
    """One-stop verification summary for an allocation."""

    alpha: Fraction
    ef: bool
    efx: bool
    social_cost: int
    complete: bool
    po: bool | None = None
    violations: list[Violation] = field(default_factory=list)
    dominated_by: Allocation | None = None

    def to_json(self) -> dict:
        return {
            "alpha": f"{self.alpha.numerator}/{self.alpha.denominator}",
            "ef": self.ef,
            "efx": self.efx,
            "social_cost": self.social_cost,
            "complete": self.complete,
            "po": self.po,
            "violations": [v.to_json() for v in self.violations],
            "dominated_by": self.dominated_by.to_json() if self.dominated_by else None,
        }


def fairness_report(
    inst: Instance,
    alloc: Allocation,
    alpha: Fraction | int | str = 1,
    include_po: bool = False,
    po_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> FairnessReport:
    alpha = _as_alpha(alpha)
    ef_ok, ef_viols = is_alpha_ef(inst, alloc, alpha)
    efx_ok, efx_viols = is_alpha_efx(inst, alloc, alpha)
    po: bool | None = None
    dominated = None
    if include_po:
        po, dominated = is_po_bruteforce(inst, alloc, limit=po_limit)
    return FairnessReport(
        alpha=alpha,
        ef=ef_ok,
        efx=efx_ok,
        social_cost=social_cost(inst, alloc),
        complete=alloc.complete,
        po=po,
        violations=ef_viols + efx_viols,
        dominated_by=dominated,
    )


__all__ = [
    "Allocation",
    "Violation",
    "EnvyGraph",
    "FairnessReport",
    "social_cost",
    "is_alpha_ef",
    "is_alpha_efx",
    "is_po_bruteforce",
    "allocation_from_rank",
    "build_envy_graph",
    "tail_scc",
    "find_cycle_through_edge",
    "strongly_connected_components",
    "fairness_report",
    "ef_violations_funcs",
    "efx_violations_funcs",
    "is_efx_funcs",
    "ENUMERATION_HARD_CAP",
    "DEFAULT_ENUMERATION_LIMIT",
]
