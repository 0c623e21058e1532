"""End-to-end acceptance sweep: one test per shipped guarantee.

Each test states its full claim inline; the terminal summary prints a
per-criterion pass/fail table (see conftest).
"""

import time

import pytest

from chorefair.bench import run_bench
from chorefair.costs import check_class, evaluate
from chorefair.fairness import (
    is_alpha_ef,
    is_alpha_efx,
    is_po_bruteforce,
    social_cost,
)
from chorefair.instances import builtin, generate
from chorefair.itemset import size
from chorefair.oracle import analyze
from chorefair.solvers import (
    partition_items,
    solve_additive,
    solve_cancelable,
    solve_general,
    solve_submodular,
)
from helpers import (
    equal_sets_extend_equally,
    random_binary_table,
    submodular_lattice_holds,
)

PO_SCAN_GATE = 10**6


@pytest.fixture(scope="module")
def additive_sweep():
    """500 seeded binary additive instances and their solutions."""
    rows = []
    start = time.perf_counter()
    for i in range(500):
        inst = generate("binary_additive", 2 + i % 4, 1 + i % 12, seed=i)
        rows.append((inst, solve_additive(inst)))
    return rows, time.perf_counter() - start


def test_criterion_01(additive_sweep):
    # every binary additive solve is complete and removal-stable, and
    # Pareto-optimal wherever the brute-force scan is feasible
    rows, solve_elapsed = additive_sweep
    start = time.perf_counter()
    assert len(rows) == 500
    for inst, report in rows:
        assert report.allocation.complete
        assert is_alpha_efx(inst, report.allocation, 1)[0]
        if inst.n**inst.m <= PO_SCAN_GATE:
            assert is_po_bruteforce(inst, report.allocation)[0]
    assert solve_elapsed + time.perf_counter() - start < 60


def test_criterion_02(additive_sweep):
    # the social cost always equals the number of items costing one unit
    # to everybody, and matches the enumerated minimum where feasible
    rows, _ = additive_sweep
    for inst, report in rows:
        sc = social_cost(inst, report.allocation)
        assert sc == size(partition_items(inst).m_plus)
        if inst.n**inst.m <= PO_SCAN_GATE:
            oracle = analyze(inst, sections=("min-sc",))
            assert sc == oracle.min_social_cost


def test_criterion_03():
    # capped-additive and cardinality instances solve to complete
    # removal-stable allocations; the equal-price invariant holds on
    # every run (the solver raises otherwise) and the placement loop
    # never exceeds 2m iterations
    start = time.perf_counter()
    for i in range(500):
        family = "capped_additive" if i % 2 else "cardinality"
        inst = generate(family, 2 + i % 3, 1 + i % 12, seed=i)
        report = solve_cancelable(inst)
        assert report.allocation.complete
        assert is_alpha_efx(inst, report.allocation, 1)[0]
        assert report.counters["iterations"] <= 2 * inst.m
    assert time.perf_counter() - start < 60


def test_criterion_04():
    # arbitrary binary-marginal instances get an envy-free allocation
    # leaving at most n-1 items over
    for i in range(500):
        family = "threshold" if i % 2 else "table"
        inst = generate(family, 2 + i % 3, 1 + i % 12, seed=i)
        report = solve_general(inst)
        assert is_alpha_ef(inst, report.allocation, 1)[0]
        assert size(report.allocation.unallocated) <= inst.n - 1


def test_criterion_05():
    # matroid-rank instances always get a complete allocation within
    # factor 2 of removal stability; case 1 is removal-stable outright,
    # case 2 envy-free within factor 2
    for i in range(300):
        inst = generate("partition_matroid", 2 + i % 3, 1 + i % 12, seed=i)
        report = solve_submodular(inst)
        assert report.allocation.complete
        assert is_alpha_efx(inst, report.allocation, 2)[0]
        if report.counters["case"] == 1:
            assert is_alpha_efx(inst, report.allocation, 1)[0]
        else:
            assert is_alpha_ef(inst, report.allocation, 2)[0]


def test_criterion_06():
    # the ternary two-agent instance admits no allocation that is both
    # removal-stable and Pareto-optimal; its frontier is exactly two
    # allocations
    start = time.perf_counter()
    rep = analyze(builtin("ternary-no-efxpo"))
    elapsed = time.perf_counter() - start
    assert rep.efx_and_po_exists is False
    assert [a.bundles for a in rep.pareto_frontier] == [(0b101, 0b010), (0b100, 0b011)]
    assert elapsed < 1


def test_criterion_07():
    # on two min(|S|,5) agents over ten items every removal-stable
    # allocation is a 5/5 split, none is Pareto-optimal, and the solver's
    # own output shares that fate
    start = time.perf_counter()
    inst = builtin("cancelable-cap5-n2")
    rep = analyze(inst)
    assert rep.efx_allocations
    assert all(
        a.bundles[0].bit_count() == 5 and a.bundles[1].bit_count() == 5
        for a in rep.efx_allocations
    )
    assert rep.efx_and_po_exists is False
    report = solve_cancelable(inst)
    assert is_alpha_efx(inst, report.allocation, 1)[0]
    assert not is_po_bruteforce(inst, report.allocation)[0]
    assert time.perf_counter() - start < 5


def test_criterion_08():
    # headline class reports on the two named functions, then the
    # containment chain on a thousand random binary tables
    capped = check_class(builtin("appendixA-cap5-function").agents[0])
    assert capped.cancelable is True
    assert capped.additive is False
    four = check_class(builtin("appendixA-submodular-4").agents[0])
    assert four.submodular is True
    assert four.cancelable is False
    assert four.witnesses["cancelable"] is not None
    s, t, e = four.witnesses["cancelable"]
    fn = builtin("appendixA-submodular-4").agents[0]
    assert evaluate(fn, s) <= evaluate(fn, t)
    assert evaluate(fn, s | 1 << e) > evaluate(fn, t | 1 << e)

    import random

    rng = random.Random(2024)
    for i in range(1000):
        report = check_class(random_binary_table(1 + i % 8, rng))
        assert report.binary_marginal
        if report.additive:
            assert report.cancelable
        if report.cancelable:
            assert report.submodular


def test_criterion_09():
    # the structural consequences of membership hold exhaustively: equal
    # sets extend equally for every cancelable function, the lattice
    # inequality and unit reduction for every submodular one
    fns = []
    for name in (
        "ternary-no-efxpo",
        "cancelable-cap5-n2",
        "appendixA-submodular-4",
        "appendixA-cap5-function",
    ):
        fns.extend(builtin(name).agents)
    for i in range(200):
        family = ("capped_additive", "cardinality", "partition_matroid")[i % 3]
        fns.append(generate(family, 1, 1 + i % 10, seed=i).agents[0])
    assert len(fns) >= 205
    for fn in fns:
        report = check_class(fn)
        if report.cancelable:
            assert equal_sets_extend_equally(fn) is None
        if report.submodular:
            assert submodular_lattice_holds(fn) is None


def test_criterion_10():
    # operation counts stay under a fitted C*n*m^2 across the grid and
    # no single solve takes 100 ms
    report = run_bench("binary_additive")
    assert report.all_bounds_ok
    for cell in report.cells:
        assert cell.max_ms < 100
