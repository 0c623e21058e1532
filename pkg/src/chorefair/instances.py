"""Problem instances: JSON schema, seeded generators, built-in examples.

An instance is ``n`` agents, ``m`` items, one cost descriptor per agent and
a declared function class.  The declared class is a promise the solvers
rely on; it must be at least as broad as what the descriptor kinds already
guarantee (an agent with a Threshold function cannot live in an instance
declared additive).

All generators draw from ``numpy``'s PCG64 stream seeded through
``SeedSequence(seed)``, with one spawned child stream per agent, so a given
(family, n, m, seed, params) tuple serialises to byte-identical JSON on any
platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import costs
from .costs import (
    Additive,
    CappedAdditive,
    Cardinality,
    Descriptor,
    PartitionMatroidRank,
    Table,
    Threshold,
)
from .errors import InvalidInputError, ParseError

CLASSES = ("additive", "cancelable", "submodular", "general")
CLASS_RANK = {name: rank for rank, name in enumerate(CLASSES)}

GENERATOR_FAMILIES = (
    "binary_additive",
    "capped_additive",
    "cardinality",
    "partition_matroid",
    "threshold",
    "table",
)

BUILTIN_NAMES = (
    "ternary-no-efxpo",
    "cancelable-cap5-n2",
    "appendixA-submodular-4",
    "appendixA-cap5-function",
)

# Random explicit tables need dense storage during generation.
TABLE_FAMILY_MAX_M = 12


def declaration_bound(fn: Descriptor) -> str:
    """Narrowest class an instance containing this kind may declare.

    Closed-form kinds pin the declaration to what they provably are:
    capped and symmetric functions are cancelable but not additive in
    general, matroid ranks are submodular, and thresholds have growing
    marginals, which rules every narrower class out.  Explicit tables are
    unconstrained here; a declaration naming a narrower class is a claim
    that solver gates verify exhaustively on small ground sets.
    """
    if isinstance(fn, (Additive, Table)):
        return "additive"
    if isinstance(fn, (CappedAdditive, Cardinality)):
        return "cancelable"
    if isinstance(fn, PartitionMatroidRank):
        return "submodular"
    return "general"  # Threshold


def kind_guarantees(fn: Descriptor, cls: str) -> bool:
    """True when the descriptor alone proves membership in ``cls``.

    Used by solver gates on ground sets too large to verify exhaustively:
    a kind-level guarantee is trusted, anything else falls back to the
    declaration plus runtime invariant checks.  Classes are nested, so a
    kind guaranteeing a narrow class proves every broader one; "general"
    here means monotone with binary marginals.
    """
    if isinstance(fn, Table):
        return cls == "general" and fn.binary_marginal
    guaranteed = {
        Additive: "additive",
        CappedAdditive: "cancelable",
        Cardinality: "cancelable",
        PartitionMatroidRank: "submodular",
        Threshold: "general",
    }[type(fn)]
    return CLASS_RANK[guaranteed] <= CLASS_RANK[cls]


@dataclass(frozen=True)
class Instance:
    n: int
    m: int
    agents: tuple[Descriptor, ...]
    declared_class: str
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"need at least one agent, got n={self.n}")
        if self.m < 0:
            raise InvalidInputError(f"item count must be non-negative, got m={self.m}")
        if len(self.agents) != self.n:
            raise InvalidInputError(f"n={self.n} but {len(self.agents)} agent descriptors")
        object.__setattr__(self, "agents", tuple(self.agents))
        for i, fn in enumerate(self.agents):
            if fn.m != self.m:
                raise InvalidInputError(
                    f"agents[{i}] has ground-set size {fn.m}, instance has m={self.m}"
                )
        if self.declared_class not in CLASS_RANK:
            raise InvalidInputError(
                f"declared_class must be one of {CLASSES}, got {self.declared_class!r}"
            )
        need = max(CLASS_RANK[declaration_bound(fn)] for fn in self.agents)
        if CLASS_RANK[self.declared_class] < need:
            raise InvalidInputError(
                f"declared_class {self.declared_class!r} is narrower than the "
                f"descriptor kinds allow (need at least {CLASSES[need]!r})"
            )

    @property
    def name(self) -> str:
        return str(self.metadata.get("name", ""))


# ---------------------------------------------------------------------------
# JSON codec
# ---------------------------------------------------------------------------


def descriptor_to_json(fn: Descriptor) -> dict:
    if isinstance(fn, Additive):
        return {"type": "additive", "costs": list(fn.costs)}
    if isinstance(fn, CappedAdditive):
        return {"type": "capped_additive", "costs": list(fn.costs), "cap": fn.cap}
    if isinstance(fn, Cardinality):
        return {"type": "cardinality", "cap": fn.cap}
    if isinstance(fn, PartitionMatroidRank):
        return {
            "type": "partition_matroid",
            "groups": [list(g) for g in fn.groups],
            "capacities": list(fn.capacities),
        }
    if isinstance(fn, Threshold):
        return {"type": "threshold", "k": fn.k}
    if isinstance(fn, Table):
        return {"type": "table", "m": fn.m, "values": list(fn.values)}
    raise InvalidInputError(f"unknown descriptor kind: {type(fn).__name__}")


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ParseError(f"{where}: missing required field {key!r}")
    return obj[key]


def _int_field(obj: dict, key: str, where: str) -> int:
    val = _require(obj, key, where)
    if not isinstance(val, int) or isinstance(val, bool):
        raise ParseError(f"{where}.{key}: expected an integer, got {val!r}")
    return val


def _int_list(val: Any, where: str) -> list[int]:
    if not isinstance(val, list) or any(not isinstance(x, int) or isinstance(x, bool) for x in val):
        raise ParseError(f"{where}: expected a list of integers")
    return val


def descriptor_from_json(obj: Any, m: int, where: str = "descriptor") -> Descriptor:
    """Decode one cost-function descriptor; ``m`` comes from the instance."""
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object, got {type(obj).__name__}")
    kind = _require(obj, "type", where)
    try:
        if kind == "additive":
            return Additive(tuple(_int_list(_require(obj, "costs", where), f"{where}.costs")))
        if kind == "capped_additive":
            return CappedAdditive(
                tuple(_int_list(_require(obj, "costs", where), f"{where}.costs")),
                cap=_int_field(obj, "cap", where),
            )
        if kind == "cardinality":
            return Cardinality(cap=_int_field(obj, "cap", where), m=m)
        if kind == "partition_matroid":
            groups = _require(obj, "groups", where)
            if not isinstance(groups, list):
                raise ParseError(f"{where}.groups: expected a list of lists")
            groups = tuple(
                tuple(_int_list(g, f"{where}.groups[{gi}]")) for gi, g in enumerate(groups)
            )
            caps = tuple(_int_list(_require(obj, "capacities", where), f"{where}.capacities"))
            return PartitionMatroidRank(groups, caps)
        if kind == "threshold":
            return Threshold(k=_int_field(obj, "k", where), m=m)
        if kind == "table":
            return Table(
                m=_int_field(obj, "m", where),
                values=tuple(_int_list(_require(obj, "values", where), f"{where}.values")),
            )
    except InvalidInputError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    raise ParseError(f"{where}.type: unknown descriptor type {kind!r}")


def instance_to_json(inst: Instance) -> dict:
    out = {
        "n": inst.n,
        "m": inst.m,
        "declared_class": inst.declared_class,
        "agents": [descriptor_to_json(fn) for fn in inst.agents],
    }
    if inst.metadata:
        out["metadata"] = inst.metadata
    return out


def serialize_instance(inst: Instance) -> str:
    """Canonical JSON form (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(instance_to_json(inst), sort_keys=True, separators=(",", ":")) + "\n"


def parse_instance(text: str | bytes) -> Instance:
    """Parse and validate an instance JSON document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("instance: expected a JSON object at top level")
    n = _int_field(obj, "n", "instance")
    m = _int_field(obj, "m", "instance")
    declared = _require(obj, "declared_class", "instance")
    agents_json = _require(obj, "agents", "instance")
    if not isinstance(agents_json, list):
        raise ParseError("instance.agents: expected a list")
    if len(agents_json) != n:
        raise ParseError(f"instance.agents: expected {n} descriptors, found {len(agents_json)}")
    agents = tuple(
        descriptor_from_json(a, m, where=f"agents[{i}]") for i, a in enumerate(agents_json)
    )
    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("instance.metadata: expected an object")
    try:
        return Instance(n=n, m=m, agents=agents, declared_class=declared, metadata=metadata)
    except InvalidInputError as exc:
        raise ParseError(f"instance: {exc}") from exc


def load_instance(path: str) -> Instance:
    with open(path, "rb") as handle:
        return parse_instance(handle.read())


# ---------------------------------------------------------------------------
# Seeded generators
# ---------------------------------------------------------------------------


def generate(
    family: str,
    n: int,
    m: int,
    seed: int,
    params: dict[str, Any] | None = None,
) -> Instance:
    """Build a pseudo-random instance of the given family.

    ``params`` tweaks the family: ``cap`` fixes the cap for every agent in
    the capped families, ``k`` fixes the threshold, ``groups`` the group
    count for partition matroids.  Left unset, those are drawn per agent.
    """
    params = dict(params or {})
    if family not in GENERATOR_FAMILIES:
        raise InvalidInputError(f"unknown family {family!r}; choose from {GENERATOR_FAMILIES}")
    if n < 1 or m < 0:
        raise InvalidInputError(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    streams = [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]

    agents: list[Descriptor] = []
    for i, rng in enumerate(streams):
        if family == "binary_additive":
            agents.append(Additive(tuple(int(b) for b in rng.integers(0, 2, size=m))))
        elif family == "capped_additive":
            row = tuple(int(b) for b in rng.integers(0, 2, size=m))
            cap = int(params.get("cap", rng.integers(0, m + 1)))
            agents.append(CappedAdditive(row, cap=cap))
        elif family == "cardinality":
            cap = int(params.get("cap", rng.integers(0, m + 1)))
            agents.append(Cardinality(cap=cap, m=m))
        elif family == "threshold":
            k = int(params.get("k", rng.integers(0, m + 1)))
            agents.append(Threshold(k=k, m=m))
        elif family == "partition_matroid":
            agents.append(_random_partition_matroid(m, rng, params))
        elif family == "table":
            if m > TABLE_FAMILY_MAX_M:
                raise InvalidInputError(
                    f"table family supports m <= {TABLE_FAMILY_MAX_M}, got {m}"
                )
            agents.append(Table(m=m, values=_random_binary_table(m, rng)))

    declared = {
        "binary_additive": "additive",
        "capped_additive": "cancelable",
        "cardinality": "cancelable",
        "partition_matroid": "submodular",
        "threshold": "general",
        "table": "general",
    }[family]
    metadata = {"name": f"{family}-n{n}-m{m}-s{seed}", "seed": seed}
    if params:
        metadata["params"] = params
    return Instance(n=n, m=m, agents=tuple(agents), declared_class=declared, metadata=metadata)


def _random_partition_matroid(m: int, rng: np.random.Generator, params: dict) -> PartitionMatroidRank:
    n_groups = int(params.get("groups", rng.integers(1, max(m, 1) + 1))) if m else 1
    n_groups = max(1, min(n_groups, max(m, 1)))
    assignment = [int(g) for g in rng.integers(0, n_groups, size=m)]
    groups: list[list[int]] = [[] for _ in range(n_groups)]
    for item, g in enumerate(assignment):
        groups[g].append(item)
    kept = [g for g in groups if g] or [[]]
    caps = [int(rng.integers(0, len(g) + 1)) for g in kept]
    return PartitionMatroidRank(tuple(tuple(g) for g in kept), tuple(caps))


def _random_binary_table(m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Sample a monotone function with {0,1} marginals.

    Work up the subset lattice: each value is pinned between the max of its
    children and the min of its children plus one (those bounds never cross
    because any two children differ by at most 1), and a coin decides when
    there is slack.
    """
    values = [0] * (1 << m)
    coins = rng.integers(0, 2, size=1 << m)
    for mask in range(1, 1 << m):
        lo, hi = 0, 1 << 62
        rest = mask
        while rest:
            low = rest & -rest
            rest ^= low
            child = values[mask ^ low]
            lo = max(lo, child)
            hi = min(hi, child + 1)
        values[mask] = hi if (lo < hi and coins[mask]) else lo
    return tuple(values)


# ---------------------------------------------------------------------------
# Built-in instances
# ---------------------------------------------------------------------------


def _weighted_table(weights: tuple[int, ...]) -> Table:
    """Additive function with arbitrary integer weights stored explicitly."""
    m = len(weights)
    values = [0] * (1 << m)
    for mask in range(1 << m):
        values[mask] = sum(w for i, w in enumerate(weights) if mask >> i & 1)
    return Table(m=m, values=tuple(values))


def _four_item_submodular() -> Table:
    # |X| - 1 once all of {0,1,2} are present, |X| otherwise; submodular,
    # binary-marginal, but equal-valued sets can disagree on a marginal.
    values = []
    for mask in range(16):
        sz = mask.bit_count()
        values.append(sz - 1 if mask & 0b0111 == 0b0111 else sz)
    return Table(m=4, values=tuple(values))


def builtin(name: str) -> Instance:
    """Named instances used throughout the test-suite and docs.

    - ``ternary-no-efxpo``: two agents, three items, additive weights
      (2,1,0) / (2,0,1) stored as explicit tables.  No allocation is both
      EFX and Pareto-optimal.  Non-binary costs: checkers and the oracle
      only.
    - ``cancelable-cap5-n2``: two identical min(|S|,5) agents over ten
      items; every EFX allocation is a 5/5 split and none is Pareto-optimal.
    - ``appendixA-submodular-4``: single agent holding the four-item
      submodular-but-not-cancelable function.
    - ``appendixA-cap5-function``: single agent holding min(|S|,5) on eight
      items (cancelable but not additive).
    """
    if name == "ternary-no-efxpo":
        return Instance(
            n=2,
            m=3,
            agents=(_weighted_table((2, 1, 0)), _weighted_table((2, 0, 1))),
            declared_class="general",
            metadata={"name": name},
        )
    if name == "cancelable-cap5-n2":
        return Instance(
            n=2,
            m=10,
            agents=(Cardinality(cap=5, m=10), Cardinality(cap=5, m=10)),
            declared_class="cancelable",
            metadata={"name": name},
        )
    if name == "appendixA-submodular-4":
        return Instance(
            n=1,
            m=4,
            agents=(_four_item_submodular(),),
            declared_class="submodular",
            metadata={"name": name},
        )
    if name == "appendixA-cap5-function":
        return Instance(
            n=1,
            m=8,
            agents=(Cardinality(cap=5, m=8),),
            declared_class="cancelable",
            metadata={"name": name},
        )
    raise InvalidInputError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}")


__all__ = [
    "Instance",
    "CLASSES",
    "CLASS_RANK",
    "GENERATOR_FAMILIES",
    "BUILTIN_NAMES",
    "declaration_bound",
    "kind_guarantees",
    "descriptor_to_json",
    "descriptor_from_json",
    "instance_to_json",
    "serialize_instance",
    "parse_instance",
    "load_instance",
    "generate",
    "builtin",
]
