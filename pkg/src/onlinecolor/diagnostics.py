"""Analysis quantities computed during or after runs, and the exact oracle.

Everything here is a measurement.  The weight sum Z of a tracked edge, its
cap-ignoring twin Zbar, the accumulated martingale part Y, the bad-color
sets, and the S/R/Q scaling factors are replayed exactly from a retained run
trace.  ``enumerate_exact`` walks every branch of the sampling tree of a
small instance and yields exact probabilities and conditional drifts; it is
deliberately an independent implementation of the colorer update rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .adversaries import Arrival, ArrivalStream
from .core import BudgetExceeded, Edge, Params, TraceMissing

ALG1 = "alg1"
ALG2 = "alg2"
RANDGREEDY = "randgreedy"


# -- run metrics ---------------------------------------------------------------


@dataclass
class Metrics:
    """Per-run aggregates; one row of the summary CSV."""

    algorithm: str
    n: int
    delta: int
    total_colors: int
    greedy_palette_size: int
    marked_per_vertex: dict[int, int]
    max_marked_degree: int
    failure_count: int = 0
    badness_final: Optional[dict[int, int]] = None
    baddeg_final: Optional[dict[int, int]] = None
    bad_vertex_count: int = 0
    dangerous_vertex_count: int = 0


METRICS_COLUMNS = [
    "algorithm",
    "n",
    "delta",
    "total_colors",
    "greedy_palette_size",
    "max_marked_degree",
    "failure_count",
    "bad_vertex_count",
    "dangerous_vertex_count",
]


def metrics_row(m: Metrics) -> list[str]:
    return [
        m.algorithm,
        str(m.n),
        str(m.delta),
        str(m.total_colors),
        str(m.greedy_palette_size),
        str(m.max_marked_degree),
        str(m.failure_count),
        str(m.bad_vertex_count),
        str(m.dangerous_vertex_count),
    ]


# -- run traces ----------------------------------------------------------------


@dataclass(frozen=True)
class ArrivalRecord:
    """One processed arrival: branch taken, weights seen, color drawn/burned."""

    t: int
    edge: Edge
    action: str  # assign | mark_z | mark_bot | assign_bad | mark_bad
    z: float
    color: Optional[int]  # assigned alg color, or burned color for assign_bad
    pvec: Optional[np.ndarray]
    u_bad: bool = False
    v_bad: bool = False

    @property
    def good_branch(self) -> bool:
        return not (self.u_bad or self.v_bad)


@dataclass
class RunTrace:
    """Everything the post-hoc diagnostics need to replay a run exactly."""

    params: Params
    ptable: object  # PTable; kept loose to avoid an import cycle
    arrivals: list[ArrivalRecord] = field(default_factory=list)

    def arrival_time(self, edge: Edge) -> Optional[int]:
        for rec in self.arrivals:
            if rec.edge == edge:
                return rec.t
        return None

    def incident(self, edge: Edge, before: Optional[int] = None) -> list[ArrivalRecord]:
        out = []
        for rec in self.arrivals:
            if before is not None and rec.t >= before:
                break
            if rec.edge != edge and rec.edge.touches(edge):
                out.append(rec)
        return out


def _require_trace(trace: Optional[RunTrace]) -> RunTrace:
    if trace is None or trace.ptable is None:
        raise TraceMissing("run was executed without keep_trace=True")
    return trace


# -- trajectories ---------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryPoint:
    t: int
    z: float
    y: float
    zbar: float
    bad_colors: int


@dataclass
class Trajectory:
    """Z/Y/Zbar series of one tracked edge, restricted to a color subset."""

    edge: Edge
    colors: tuple[int, ...]
    points: list[TrajectoryPoint]
    z0: float
    _drift: list[float] = field(default_factory=list)  # sum of (Zbar - Z), good steps
    _nongood: list[float] = field(default_factory=list)  # sum of dZ over other steps

    def decomposition_residual(self) -> float:
        """Max deviation from Z = Z0 + Y - sum(Zbar - Z) + (non-good drift)."""
        worst = 0.0
        for k, pt in enumerate(self.points):
            lhs = pt.z
            rhs = self.z0 + pt.y - self._drift[k] + self._nongood[k]
            worst = max(worst, abs(lhs - rhs))
        return worst


TRAJECTORY_COLUMNS = ["t", "edge_u", "edge_v", "Z", "Y", "Zbar", "bad_colors"]


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    rows = []
    for pt in traj.points:
        rows.append(
            [
                str(pt.t),
                str(traj.edge.u),
                str(traj.edge.v),
                repr(pt.z),
                repr(pt.y),
                repr(pt.zbar),
                str(pt.bad_colors),
            ]
        )
    return rows


def compute_trajectory(
    trace: Optional[RunTrace],
    edge: Edge,
    colors: Optional[Iterable[int]] = None,
) -> Trajectory:
    """Replay the exact Z/Y/Zbar series of one edge from a retained trace.

    Zbar applies the scale-up ignoring the cap for that step only.  For runs
    with badness logic, Y accumulates only over arrivals whose endpoints were
    all good, matching the restricted definition.
    """
    trace = _require_trace(trace)
    params = trace.params
    delta = params.delta
    cap = params.cap
    csel = tuple(sorted(colors)) if colors is not None else tuple(range(1, delta + 1))
    cidx = np.array([c - 1 for c in csel], dtype=int)

    p = np.full(delta, params.p0)
    z = float(np.cumsum(p[cidx])[-1])
    z0 = z
    y = 0.0
    drift = 0.0
    nongood = 0.0
    points = [TrajectoryPoint(0, z, 0.0, z, int(np.count_nonzero(p > cap)))]
    drifts = [0.0]
    nongoods = [0.0]

    t_e = trace.arrival_time(edge)
    for rec in trace.arrivals:
        if t_e is not None and rec.t >= t_e:
            break
        if rec.edge == edge or not rec.edge.touches(edge):
            continue
        if rec.action in ("mark_z", "mark_bad"):
            zbar = z  # nothing recorded, values frozen
        elif rec.action == "assign_bad":
            p = p.copy()
            p[rec.color - 1] = 0.0
            zbar = float(np.cumsum(p[cidx])[-1])
            z_new = zbar  # burn makes no capped scale-up, Zbar == Z
            nongood += z_new - z
            z = z_new
        else:  # assign / mark_bot: a recorded sample event
            pvec = rec.pvec
            with np.errstate(divide="ignore", invalid="ignore"):
                pbar = p / (1.0 - pvec)
            scaled = np.where(p <= cap, pbar, p)
            if rec.color is not None:
                pbar[rec.color - 1] = 0.0
                scaled[rec.color - 1] = 0.0
            zbar = float(np.cumsum(pbar[cidx])[-1])
            z_new = float(np.cumsum(scaled[cidx])[-1])
            if rec.good_branch:
                y += zbar - z
                drift += zbar - z_new
            else:
                nongood += z_new - z
            p = scaled
            z = z_new
        points.append(TrajectoryPoint(rec.t, z, y, zbar, int(np.count_nonzero(p > cap))))
        drifts.append(drift)
        nongoods.append(nongood)

    return Trajectory(edge, csel, points, z0, drifts, nongoods)


def bad_colors(trace: Optional[RunTrace], edge: Edge, t: int) -> set[int]:
    """Colors whose weight exceeds the cap for this edge at time t."""
    trace = _require_trace(trace)
    p = trace.ptable.reconstruct_at(edge, t)
    return {c + 1 for c in np.flatnonzero(p > trace.params.cap)}


def classify_incident(
    trace: Optional[RunTrace], edge: Edge
) -> dict[str, list[ArrivalRecord]]:
    """Split the earlier incident arrivals of an edge into good/bad/rest.

    good: neither endpoint of the arriving edge was bad; rest: a bad endpoint
    that is also an endpoint of the tracked edge; bad: any other bad endpoint.
    Runs without badness logic classify everything good.
    """
    trace = _require_trace(trace)
    t_e = trace.arrival_time(edge)
    out: dict[str, list[ArrivalRecord]] = {"good": [], "bad": [], "rest": []}
    for rec in trace.incident(edge, before=t_e):
        if rec.good_branch:
            out["good"].append(rec)
            continue
        bad_endpoints = set()
        if rec.u_bad:
            bad_endpoints.add(rec.edge.u)
        if rec.v_bad:
            bad_endpoints.add(rec.edge.v)
        if bad_endpoints & {edge.u, edge.v}:
            out["rest"].append(rec)
        else:
            out["bad"].append(rec)
    return out


# -- scaling factors -------------------------------------------------------------


@dataclass
class ScalingFactors:
    """Realized S/R/Q quantities for one arrived edge.

    S multiplies (1 - weight) over every earlier incident arrival; R freezes
    each incident edge's own weight at arrival and reverts the scalings its
    shared endpoint produced; Q sums the frozen R per endpoint.
    """

    edge: Edge
    t_e: int
    s: np.ndarray  # per color, at t_e - 1
    q_u: np.ndarray
    q_v: np.ndarray
    r: dict[Edge, np.ndarray]
    prearrival: list[tuple[int, np.ndarray, np.ndarray]]  # (t, S^(t), P^(t))
    p0: float

    def identity_residual(self) -> float:
        """Max |S - (1 - Q_u)(1 - Q_v)| over colors."""
        return float(np.max(np.abs(self.s - (1.0 - self.q_u) * (1.0 - self.q_v))))

    def q_subset(self, endpoint: str, colors: Iterable[int]) -> float:
        q = self.q_u if endpoint == "u" else self.q_v
        return float(sum(q[c - 1] for c in colors))

    def max_p_bound_excess(self) -> float:
        """Max over pre-arrival steps and colors of P - p0/S (expected <= 0)."""
        worst = -math.inf
        for _, s_vec, p_vec in self.prearrival:
            with np.errstate(divide="ignore"):
                bound = np.where(s_vec > 0.0, self.p0 / s_vec, math.inf)
            worst = max(worst, float(np.max(p_vec - bound)))
        return worst

    def max_r_minus_p(self) -> float:
        worst = -math.inf
        for rec_edge, r_vec in self.r.items():
            worst = max(worst, float(np.max(r_vec - self._pvec[rec_edge])))
        return worst

    _pvec: dict[Edge, np.ndarray] = field(default_factory=dict)


def compute_scaling_factors(trace: Optional[RunTrace], edge: Edge) -> ScalingFactors:
    """S, R and Q over the realized neighborhood of an arrived edge."""
    trace = _require_trace(trace)
    t_e = trace.arrival_time(edge)
    if t_e is None:
        raise ValueError(f"edge {edge} never arrived")
    delta = trace.params.delta
    neigh = trace.incident(edge, before=t_e)

    s = np.ones(delta)
    prearrival = []
    for rec in neigh:
        s = s * (1.0 - rec.pvec)
        p_now = trace.ptable.reconstruct_at(edge, rec.t)
        prearrival.append((rec.t, s.copy(), p_now))

    r: dict[Edge, np.ndarray] = {}
    pvecs: dict[Edge, np.ndarray] = {}
    q = {"u": np.zeros(delta), "v": np.zeros(delta)}
    for side, w in (("u", edge.u), ("v", edge.v)):
        prefix = np.ones(delta)
        for rec in neigh:
            if w not in rec.edge:
                continue
            r_vec = rec.pvec * prefix
            r[rec.edge] = r_vec
            pvecs[rec.edge] = rec.pvec
            q[side] += r_vec
            prefix = prefix * (1.0 - rec.pvec)

    sf = ScalingFactors(
        edge=edge,
        t_e=t_e,
        s=s,
        q_u=q["u"],
        q_v=q["v"],
        r=r,
        prearrival=prearrival,
        p0=trace.params.p0,
    )
    sf._pvec = pvecs
    return sf


def matching_sum(
    trace: Optional[RunTrace], matching: Sequence[Edge], colors: Iterable[int], t: int
) -> float:
    """Sum of color-restricted weight sums over a matching at time t."""
    trace = _require_trace(trace)
    seen: set[int] = set()
    for e in matching:
        if e.u in seen or e.v in seen:
            raise ValueError("edges do not form a matching")
        seen.update(e)
        arrived = trace.arrival_time(e)
        if arrived is not None and arrived <= t:
            raise ValueError(f"edge {e} already arrived by time {t}")
    cidx = sorted(c - 1 for c in colors)
    total = 0.0
    for e in matching:
        p = trace.ptable.reconstruct_at(e, t)
        for c in cidx:
            total += p[c]
    return total


def azuma_bound(lam: float, steps: int, step_size: float) -> float:
    """Tail bound exp(-lam^2 / (2 * steps * step_size^2)) for bounded-step drift."""
    if lam < 0 or steps <= 0 or step_size <= 0:
        raise ValueError("need lam >= 0, steps > 0, step_size > 0")
    return math.exp(-(lam * lam) / (2.0 * steps * step_size * step_size))


# -- exact enumeration ------------------------------------------------------------


@dataclass
class EnumerationReport:
    """Every branch of a small instance, with exact probabilities and drifts."""

    algorithm: str
    branches: int
    leaves: list[tuple[float, tuple]]
    failure_probability: float
    max_conditional_z_drift: float
    max_abs_conditional_y_drift: float
    max_abs_z_step: float
    step_bound: float
    step_bound_violations: int
    max_decomposition_residual: float
    max_conditional_q_drift: float = -math.inf
    max_abs_q_step: float = 0.0
    q_step_violations: int = 0

    @property
    def total_probability(self) -> float:
        return math.fsum(p for p, _ in self.leaves)

    def outcome_probability(self, index: int, value) -> float:
        """Probability that the index-th arrival ended as `value`."""
        return math.fsum(p for p, out in self.leaves if out[index] == value)


def enumerate_exact(
    instance: ArrivalStream | Sequence[Arrival | Edge],
    params: Params,
    algorithm: str = ALG1,
    budget: int = 10**6,
    palette_size: Optional[int] = None,
    track_q: bool = False,
) -> EnumerationReport:
    """Walk every outcome branch of a small instance.

    For the weighted colorers every node branches over the sampled color
    (bottom last); drift statistics for every potential edge are accumulated
    at every node.  With ``track_q`` the per-endpoint scaling sums Q of every
    instance edge are also tracked for their supermartingale drift.  For the
    uniform colorer each node branches over the shared available palette,
    stopping a path at its first failure.
    """
    if isinstance(instance, ArrivalStream):
        arrivals = list(instance.sequence or [])
        if not instance.oblivious:
            raise ValueError("enumeration needs a fixed arrival sequence")
    else:
        arrivals = [a if isinstance(a, Arrival) else Arrival(a) for a in instance]
    edges = [a.edge for a in arrivals]
    if algorithm == RANDGREEDY:
        if palette_size is None:
            raise ValueError("randgreedy enumeration needs palette_size")
        return _enumerate_randgreedy(edges, palette_size, budget)
    if algorithm not in (ALG1, ALG2):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return _enumerate_weighted(edges, params, algorithm, budget, track_q)


class _Budget:
    def __init__(self, limit: int) -> None:
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"enumeration exceeded {self.limit} branches")


def _enumerate_weighted(
    edges: list[Edge], params: Params, algorithm: str, budget_limit: int,
    track_q: bool = False,
) -> EnumerationReport:
    delta = params.delta
    cap = params.cap
    vertices = sorted({w for e in edges for w in e})
    pairs = [
        Edge(vertices[i], vertices[j])
        for i in range(len(vertices))
        for j in range(i + 1, len(vertices))
    ]
    budget = _Budget(budget_limit)
    leaves: list[tuple[float, tuple]] = []
    stats = {
        "z_drift": -math.inf,
        "y_drift": 0.0,
        "z_step": 0.0,
        "violations": 0,
        "residual": 0.0,
        "q_drift": -math.inf,
        "q_step": 0.0,
        "q_violations": 0,
    }
    step_bound = 6.0 * cap
    check_steps = cap <= 0.25

    # realized per-endpoint neighborhoods are fixed by the arrival order:
    # U_w of edge j holds every earlier arrival incident at w, with its index
    neighborhoods: list[list[tuple[int, list[tuple[int, Edge]]]]] = []
    if track_q:
        for j, e in enumerate(edges):
            per_endpoint = []
            for w in e:
                u_w = [(i, f) for i, f in enumerate(edges[:j]) if w in f]
                per_endpoint.append((j, u_w))
            neighborhoods.append(per_endpoint)

    def q_value(P, pvx, u_w, t):
        """Sum over colors of the frozen-or-live scaling sums at time t."""
        total = 0.0
        for i, f in u_w:
            t_f = i + 1
            if t_f <= t:
                base = pvx[f]
                cutoff = t_f - 1
            else:
                base = P[f]
                cutoff = t
            prod = np.ones(delta)
            for i2, g in u_w:
                if i2 + 1 <= cutoff:
                    prod = prod * (1.0 - pvx[g])
            total += float(np.cumsum(base * prod)[-1])
        return total

    def z_of(row: np.ndarray) -> float:
        return float(np.cumsum(row)[-1])

    def scaled_rows(row: np.ndarray, pvec: np.ndarray, color: Optional[int]):
        """One branch update for one incident pair: (capped row, cap-free row)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            pbar = row / (1.0 - pvec)
        new = np.where(row <= cap, pbar, row)
        if color is not None:
            pbar[color - 1] = 0.0
            new[color - 1] = 0.0
        return new, pbar

    def q_targets_for(t):
        """(u_w, q-before placeholder) for every edge still ahead of step t+1."""
        out = []
        for j in range(t + 1, len(edges)):
            for _, u_w in neighborhoods[j]:
                if u_w:
                    out.append(u_w)
        return out

    def note_q_step(before, afters):
        """afters: list of (probability, q value after the step)."""
        drift = math.fsum(p * (after - before) for p, after in afters)
        stats["q_drift"] = max(stats["q_drift"], drift)
        for _, after in afters:
            step = abs(after - before)
            stats["q_step"] = max(stats["q_step"], step)
            if check_steps and step > 12.0 * cap:
                stats["q_violations"] += 1

    # walk state: P rows per pair, Y / capped drift / non-good drift per pair,
    # badness and baddeg counters (alg2), pvx = P row of each arrival at its
    # arrival time.  Dicts are copied on write.
    def walk(t, prob, P, arrived, Y, drift, nongood, badness, baddeg, outcome, pvx):
        budget.tick()
        if t == len(edges):
            leaves.append((prob, tuple(outcome)))
            return
        e = edges[t]
        arrived2 = arrived | {e}
        incident = [f for f in pairs if f not in arrived2 and f.touches(e)]

        def check_residual(f, z_new, Y2, drift2, nongood2):
            base = (1.0 - params.eps) + Y2[f] - drift2[f] + nongood2.get(f, 0.0)
            resid = abs(z_new - base)
            if resid > stats["residual"]:
                stats["residual"] = resid

        if algorithm == ALG2:
            baddeg = dict(baddeg)
            u_bad = badness.get(e.u, 0) >= params.badness_threshold
            v_bad = badness.get(e.v, 0) >= params.badness_threshold
            if v_bad:
                baddeg[e.u] = baddeg.get(e.u, 0) + 1
            if u_bad:
                baddeg[e.v] = baddeg.get(e.v, 0) + 1
            if u_bad or v_bad:
                dangerous = (
                    baddeg.get(e.u, 0) >= params.dangerous_threshold
                    or baddeg.get(e.v, 0) >= params.dangerous_threshold
                )
                pvec = P[e]
                pvx2 = {**pvx, e: pvec}
                if dangerous or not np.any(pvec > 0.0):
                    walk(t + 1, prob, P, arrived2, Y, drift, nongood,
                         badness, baddeg, outcome + ["marked"], pvx2)
                    return
                c = int(np.flatnonzero(pvec > 0.0)[0]) + 1
                P2 = dict(P)
                nongood2 = dict(nongood)
                for f in incident:
                    row = P[f].copy()
                    row[c - 1] = 0.0
                    P2[f] = row
                    nongood2[f] = nongood2.get(f, 0.0) + (z_of(row) - z_of(P[f]))
                walk(t + 1, prob, P2, arrived2, Y, drift, nongood2,
                     badness, baddeg, outcome + [c], pvx2)
                return

        pvec = P[e]
        pvx2 = {**pvx, e: pvec}
        z = z_of(pvec)
        if z > 1.0:
            if track_q and algorithm == ALG1:
                for u_w in q_targets_for(t):
                    before = q_value(P, pvx, u_w, t)
                    note_q_step(before, [(1.0, q_value(P, pvx2, u_w, t + 1))])
            if algorithm == ALG2:
                badness = dict(badness)
                badness[e.u] = badness.get(e.u, 0) + 1
                badness[e.v] = badness.get(e.v, 0) + 1
            walk(t + 1, prob, P, arrived2, Y, drift, nongood, badness, baddeg,
                 outcome + ["marked"], pvx2)
            return

        options: list[tuple[Optional[int], float]] = [
            (int(c) + 1, float(pvec[c])) for c in np.flatnonzero(pvec > 0.0)
        ]
        if 1.0 - z > 0.0:
            options.append((None, 1.0 - z))

        updates = {
            color: {f: scaled_rows(P[f], pvec, color) for f in incident}
            for color, _ in options
        }

        for f in incident:
            z_f = z_of(P[f])
            e_dz = 0.0
            e_dy = 0.0
            for color, p_br in options:
                new, pbar = updates[color][f]
                dz = z_of(new) - z_f
                e_dz += p_br * dz
                e_dy += p_br * (z_of(pbar) - z_f)
                stats["z_step"] = max(stats["z_step"], abs(dz))
                if check_steps and abs(dz) > step_bound:
                    stats["violations"] += 1
            stats["z_drift"] = max(stats["z_drift"], e_dz)
            stats["y_drift"] = max(stats["y_drift"], abs(e_dy))

        branch_rows = {}
        for color, _ in options:
            P2 = dict(P)
            for f in incident:
                P2[f] = updates[color][f][0]
            branch_rows[color] = P2

        if track_q and algorithm == ALG1:
            for u_w in q_targets_for(t):
                before = q_value(P, pvx, u_w, t)
                afters = [
                    (p_br, q_value(branch_rows[color], pvx2, u_w, t + 1))
                    for color, p_br in options
                ]
                note_q_step(before, afters)

        for color, p_br in options:
            P2 = branch_rows[color]
            Y2 = dict(Y)
            drift2 = dict(drift)
            for f in incident:
                new, pbar = updates[color][f]
                zbar = z_of(pbar)
                Y2[f] = Y2.get(f, 0.0) + (zbar - z_of(P[f]))
                drift2[f] = drift2.get(f, 0.0) + (zbar - z_of(new))
                check_residual(f, z_of(new), Y2, drift2, nongood)
            badness2 = badness
            if color is None and algorithm == ALG2:
                badness2 = dict(badness)
                badness2[e.u] = badness2.get(e.u, 0) + 1
                badness2[e.v] = badness2.get(e.v, 0) + 1
            walk(t + 1, prob * p_br, P2, arrived2, Y2, drift2, nongood,
                 badness2, baddeg, outcome + [color if color is not None else "marked"],
                 pvx2)

    P0 = {f: np.full(delta, params.p0) for f in pairs}
    walk(0, 1.0, P0, frozenset(), {}, {}, {}, {}, {}, [], {})
    return EnumerationReport(
        algorithm=algorithm,
        branches=budget.used,
        leaves=leaves,
        failure_probability=0.0,
        max_conditional_z_drift=stats["z_drift"],
        max_abs_conditional_y_drift=stats["y_drift"],
        max_abs_z_step=stats["z_step"],
        step_bound=step_bound,
        step_bound_violations=stats["violations"],
        max_decomposition_residual=stats["residual"],
        max_conditional_q_drift=stats["q_drift"],
        max_abs_q_step=stats["q_step"],
        q_step_violations=stats["q_violations"],
    )


def _enumerate_randgreedy(
    edges: list[Edge], palette_size: int, budget_limit: int
) -> EnumerationReport:
    budget = _Budget(budget_limit)
    leaves: list[tuple[float, tuple]] = []

    def walk(t, prob, used, outcome):
        budget.tick()
        if t == len(edges):
            leaves.append((prob, tuple(outcome)))
            return
        e = edges[t]
        avail = [
            c
            for c in range(1, palette_size + 1)
            if c not in used.get(e.u, ()) and c not in used.get(e.v, ())
        ]
        if not avail:
            tail = ["failed"] + [None] * (len(edges) - t - 1)
            leaves.append((prob, tuple(outcome + tail)))
            return
        share = 1.0 / len(avail)
        for c in avail:
            used2 = dict(used)
            used2[e.u] = used.get(e.u, frozenset()) | {c}
            used2[e.v] = used.get(e.v, frozenset()) | {c}
            walk(t + 1, prob * share, used2, outcome + [c])

    walk(0, 1.0, {}, [])
    failure = math.fsum(p for p, out in leaves if "failed" in out)
    return EnumerationReport(
        algorithm=RANDGREEDY,
        branches=budget.used,
        leaves=leaves,
        failure_probability=failure,
        max_conditional_z_drift=0.0,
        max_abs_conditional_y_drift=0.0,
        max_abs_z_step=0.0,
        step_bound=0.0,
        step_bound_violations=0,
        max_decomposition_residual=0.0,
    )
