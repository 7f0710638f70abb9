"""Shared helpers: differential drivers and the small-instance corpus."""
from __future__ import annotations

import numpy as np
import pytest

from onlinecolor.adversaries import ArrivalStream, oblivious_stream
from onlinecolor.core import Edge, Params, RngHandle, derive_params
from onlinecolor.ptable import DenseOracle, PTable


def all_pairs(n: int) -> list[Edge]:
    return [Edge(a, b) for a in range(n) for b in range(a + 1, n)]


def compare_tables(table: PTable, dense: DenseOracle, arrived: set[Edge], n: int,
                   rel: float = 1e-12) -> float:
    """Max relative gap between lazy and eager rows over all unseen pairs."""
    worst = 0.0
    for f in all_pairs(n):
        if f in arrived:
            continue
        lazy = table.reconstruct(f)
        eager = dense.reconstruct(f)
        gap = np.abs(lazy - eager) / np.maximum(np.abs(eager), 1e-12)
        worst = max(worst, float(np.max(gap)))
    assert worst <= rel, f"lazy/eager disagree by {worst:.3e}"
    return worst


def sampled_differential(edges: list[Edge], n: int, delta: int, params: Params,
                         seed: int) -> float:
    """Run the weighted sampling over `edges`, mirroring events into both stores."""
    table = PTable(params)
    dense = DenseOracle(params, n)
    gen = RngHandle(seed, 1).generator()
    arrived: set[Edge] = set()
    worst = 0.0
    for t, e in enumerate(edges, 1):
        pvec = table.reconstruct(e)
        cdf = np.cumsum(pvec)
        z = float(cdf[-1])
        if z <= 1.0:
            draw = gen.random()
            idx = int(np.searchsorted(cdf, draw, side="right"))
            color = idx + 1 if idx < delta else None
            table.record_sample(t, e, pvec, color)
            dense.record_sample(t, e, pvec, color)
        arrived.add(e)
        worst = max(worst, compare_tables(table, dense, arrived, n))
    return worst


def forced_differential(edges: list[Edge], n: int, delta: int, params: Params,
                        choose) -> float:
    """Drive both stores with outcomes picked by `choose(t, pvec)`.

    `choose` returns an alg color with positive weight, None for bottom, or
    the string "burn:<c>" to exercise the burn path.
    """
    table = PTable(params)
    dense = DenseOracle(params, n)
    arrived: set[Edge] = set()
    worst = 0.0
    for t, e in enumerate(edges, 1):
        pvec = table.reconstruct(e)
        outcome = choose(t, pvec)
        if isinstance(outcome, str) and outcome.startswith("burn:"):
            color = int(outcome.split(":")[1])
            table.record_burn(t, e, color)
            dense.record_burn(t, e, color)
        elif float(np.sum(pvec)) <= 1.0:
            if outcome is not None:
                assert pvec[outcome - 1] > 0.0, "forced outcome must be reachable"
            table.record_sample(t, e, pvec, outcome)
            dense.record_sample(t, e, pvec, outcome)
        arrived.add(e)
        worst = max(worst, compare_tables(table, dense, arrived, n))
    return worst


def path_edges(k: int) -> list[Edge]:
    return [Edge(i, i + 1) for i in range(k)]


def star_edges(leaves: int) -> list[Edge]:
    return [Edge(0, i + 1) for i in range(leaves)]


# (name, edge list, delta): everything with at most 8 vertices and 6 edges
SMALL_INSTANCES = [
    ("path2", path_edges(2), 2),
    ("path3", path_edges(3), 2),
    ("path5", path_edges(5), 2),
    ("star3", star_edges(3), 3),
    ("star4", star_edges(4), 4),
    ("triangle", [Edge(0, 1), Edge(1, 2), Edge(0, 2)], 2),
    ("c4", [Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(0, 3)], 2),
    (
        "c4_chord",
        [Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(0, 3), Edge(0, 2)],
        3,
    ),
    (
        "two_star2",
        [Edge(0, 2), Edge(1, 3), Edge(0, 1)],
        2,
    ),
    (
        "k4_minus",
        [Edge(0, 1), Edge(0, 2), Edge(1, 2), Edge(1, 3), Edge(2, 3)],
        3,
    ),
    (
        "k4",
        [Edge(0, 1), Edge(0, 2), Edge(0, 3), Edge(1, 2), Edge(1, 3), Edge(2, 3)],
        3,
    ),
]


def instance_stream(edges: list[Edge], delta: int) -> ArrivalStream:
    n = max(w for e in edges for w in e) + 1
    return oblivious_stream(n, delta, [(e.u, e.v) for e in edges])


@pytest.fixture
def small_params():
    return derive_params(8, 2, eps=0.5, cap=1.0)
