"""Trajectories, bad colors, scaling factors, tail bound, exact enumeration."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

import onlinecolor as oc
from onlinecolor.adversaries import oblivious_stream
from onlinecolor.core import BudgetExceeded, Edge, RngHandle, TraceMissing
from onlinecolor.diagnostics import (
    TRAJECTORY_COLUMNS,
    azuma_bound,
    bad_colors,
    compute_scaling_factors,
    compute_trajectory,
    enumerate_exact,
    matching_sum,
    trajectory_rows,
)
from onlinecolor.ptable import PTable


def traced_run(n=30, delta=6, m=70, eps=0.3, seed=2, cap=None):
    overrides = {"eps": eps}
    if cap is not None:
        overrides["cap"] = cap
    stream = oc.gen_random_graph(n, delta, m, RngHandle(seed))
    params = oc.derive_params(n, delta, **overrides)
    return oc.run_alg1(stream, params, RngHandle(seed, 1), keep_trace=True)


class TestTrajectory:
    def test_initial_values(self):
        res = traced_run()
        traj = compute_trajectory(res.trace, res.edges[-1])
        assert traj.points[0].t == 0
        assert traj.points[0].z == pytest.approx(1 - 0.3)
        assert traj.points[0].y == 0.0
        assert traj.points[0].zbar == traj.points[0].z

    def test_zbar_equals_z_when_cap_never_binds(self):
        res = traced_run(cap=100.0)
        for e in res.edges[-5:]:
            traj = compute_trajectory(res.trace, e)
            for pt in traj.points:
                assert pt.zbar == pytest.approx(pt.z, abs=1e-15)
                assert pt.bad_colors == 0

    def test_decomposition_exact(self):
        for cap in (0.2, 1.0, None):
            res = traced_run(cap=cap)
            for e in res.edges[-8:]:
                traj = compute_trajectory(res.trace, e)
                assert traj.decomposition_residual() <= 1e-12

    def test_color_subset_restriction(self):
        res = traced_run()
        full = compute_trajectory(res.trace, res.edges[-1])
        sub = compute_trajectory(res.trace, res.edges[-1], colors=[1, 2])
        assert sub.points[0].z == pytest.approx(2 * res.trace.params.p0)
        assert len(sub.points) == len(full.points)

    def test_series_indexed_by_incident_arrivals(self):
        res = traced_run()
        e = res.edges[-1]
        traj = compute_trajectory(res.trace, e)
        incident = res.trace.incident(e, before=res.trace.arrival_time(e))
        assert [pt.t for pt in traj.points[1:]] == [r.t for r in incident]

    def test_requires_trace(self):
        stream = oblivious_stream(3, 2, [(0, 1)])
        res = oc.run_alg1(stream, oc.derive_params(3, 2, eps=0.5), RngHandle(1, 1))
        with pytest.raises(TraceMissing):
            compute_trajectory(res.trace, Edge(0, 1))

    def test_csv_rows_schema(self):
        res = traced_run()
        traj = compute_trajectory(res.trace, res.edges[-1])
        rows = trajectory_rows(traj)
        assert TRAJECTORY_COLUMNS == ["t", "edge_u", "edge_v", "Z", "Y", "Zbar", "bad_colors"]
        assert all(len(r) == len(TRAJECTORY_COLUMNS) for r in rows)


class TestClassifyIncident:
    def test_weighted_runs_without_badness_are_all_good(self):
        from onlinecolor.diagnostics import classify_incident

        res = traced_run()
        split = classify_incident(res.trace, res.edges[-1])
        assert not split["bad"] and not split["rest"]
        assert len(split["good"]) == len(
            res.trace.incident(res.edges[-1], before=res.trace.arrival_time(res.edges[-1]))
        )

    def test_forced_thresholds_populate_rest(self):
        from onlinecolor.adversaries import oblivious_stream
        from onlinecolor.diagnostics import classify_incident

        # seed-16 walkthrough; probe {0,4} never arrives and sees t1 (good),
        # t3 (its own endpoint 0 bad: rest), t4 (other vertex 2 bad: bad),
        # t5 (good)
        stream = oblivious_stream(6, 2, [(0, 2), (1, 3), (0, 1), (2, 4), (4, 5)])
        params = oc.derive_params(
            6, 2, eps=0.5, badness_threshold=1, dangerous_threshold=1000
        )
        res = oc.run_alg2(stream, params, RngHandle(16, 1), keep_trace=True)
        split = classify_incident(res.trace, Edge(0, 4))
        assert [r.t for r in split["good"]] == [1, 5]
        assert [r.t for r in split["rest"]] == [3]
        assert [r.t for r in split["bad"]] == [4]


class TestBadColors:
    def test_fresh_edge_empty_when_p0_below_cap(self):
        res = traced_run(cap=1.0)
        assert bad_colors(res.trace, Edge(0, 1), 0) == set()

    def test_degenerate_zero_cap_marks_every_positive_color(self):
        res = traced_run(delta=4, m=40)
        degenerate = dataclasses.replace(res.trace.params, cap=0.0)
        trace = dataclasses.replace(res.trace, params=degenerate)
        trace.ptable.cap = 0.0  # replay honours the same sharp comparison
        last_t = res.trace.arrivals[-1].t
        probe = Edge(res.edges[0].u, res.edges[0].v)
        p = trace.ptable.reconstruct_at(res.edges[-1], 0)
        assert bad_colors(trace, res.edges[-1], 0) == {
            c + 1 for c in np.flatnonzero(p > 0)
        }

    def test_counts_match_trajectory(self):
        res = traced_run(cap=0.12)
        e = res.edges[-1]
        traj = compute_trajectory(res.trace, e)
        for pt in traj.points[1:]:
            assert len(bad_colors(res.trace, e, pt.t)) == pt.bad_colors


class TestScalingFactors:
    def test_no_earlier_neighbors(self):
        res = traced_run()
        first = res.edges[0]
        sf = compute_scaling_factors(res.trace, first)
        assert np.all(sf.s == 1.0)
        assert np.all(sf.q_u == 0.0) and np.all(sf.q_v == 0.0)
        assert sf.identity_residual() == 0.0

    def test_identity_and_bound_on_runs(self):
        res = traced_run(n=50, delta=8, m=160, seed=5)
        for e in res.edges[-15:]:
            sf = compute_scaling_factors(res.trace, e)
            assert sf.identity_residual() <= 1e-10
            assert sf.max_p_bound_excess() <= 1e-10
            assert sf.max_r_minus_p() <= 1e-12

    def test_q_subset_sums(self):
        res = traced_run()
        sf = compute_scaling_factors(res.trace, res.edges[-1])
        full = sf.q_subset("u", range(1, 7))
        assert full == pytest.approx(float(sf.q_u.sum()))

    def test_unarrived_edge_rejected(self):
        res = traced_run()
        probe = next(
            Edge(a, b)
            for a in range(30)
            for b in range(a + 1, 30)
            if res.trace.arrival_time(Edge(a, b)) is None
        )
        with pytest.raises(ValueError):
            compute_scaling_factors(res.trace, probe)


class TestMatchingSum:
    def test_empty_matching(self):
        res = traced_run()
        assert matching_sum(res.trace, [], range(1, 7), 3) == 0.0

    def test_singleton_equals_z_value(self):
        res = traced_run()
        last_t = res.trace.arrivals[-1].t
        # probe a pair that never arrived
        probe = next(
            Edge(a, b)
            for a in range(30)
            for b in range(a + 1, 30)
            if res.trace.arrival_time(Edge(a, b)) is None
        )
        total = matching_sum(res.trace, [probe], range(1, 7), last_t)
        assert total == pytest.approx(float(res.trace.ptable.reconstruct_at(
            probe, last_t).sum()))

    def test_three_fresh_disjoint_edges(self):
        res = traced_run()
        m = [Edge(0, 1), Edge(2, 3), Edge(4, 5)]
        m = [e for e in m if res.trace.arrival_time(e) is None]
        got = matching_sum(res.trace, m, range(1, 7), 0)
        assert got == pytest.approx(len(m) * (1 - 0.3))

    def test_rejects_non_matching(self):
        res = traced_run()
        with pytest.raises(ValueError):
            matching_sum(res.trace, [Edge(0, 1), Edge(1, 2)], [1], 0)


class TestAzumaBound:
    def test_zero_lambda_is_one(self):
        assert azuma_bound(0.0, 10, 0.5) == 1.0

    def test_monotone_in_steps(self):
        values = [azuma_bound(0.5, s, 0.1) for s in (1, 10, 100, 1000)]
        assert values == sorted(values)
        assert values[-1] < 1.0

    def test_reproduces_drift_exponent(self):
        # lam=eps over 2*delta steps of size 6*cap gives exp(-eps^2/(144*delta*cap^2))
        eps, delta = 0.3, 16
        cap = 4 / (eps**2 * delta)
        got = azuma_bound(eps, 2 * delta, 6 * cap)
        assert got == pytest.approx(math.exp(-(eps**2) / (144 * delta * cap**2)))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            azuma_bound(-1, 5, 0.1)
        with pytest.raises(ValueError):
            azuma_bound(0.1, 0, 0.1)
        with pytest.raises(ValueError):
            azuma_bound(0.1, 5, 0.0)


class TestEnumerateExact:
    def test_single_edge_distribution(self):
        params = oc.derive_params(4, 3, eps=0.4, cap=1.0)
        report = enumerate_exact([Edge(0, 1)], params, "alg1")
        for c in (1, 2, 3):
            assert report.outcome_probability(0, c) == pytest.approx(0.6 / 3)
        assert report.outcome_probability(0, "marked") == pytest.approx(0.4)
        assert report.total_probability == pytest.approx(1.0, abs=1e-12)

    def test_two_edge_path_marginals_by_hand(self):
        # delta=2, eps=0.5, edges (0,1),(1,2).  Second edge takes color 1
        # with probability 1/4: its row is (0, 1/3) after e1=c1, (1/3, 0)
        # after e1=c2, (1/3, 1/3) after bottom, so
        # 1/4*0 + 1/4*(1/3) + 1/2*(1/3) = 1/4.
        params = oc.derive_params(3, 2, eps=0.5)
        report = enumerate_exact([Edge(0, 1), Edge(1, 2)], params, "alg1")
        assert report.outcome_probability(1, 1) == pytest.approx(0.25, abs=1e-15)
        assert report.outcome_probability(1, 2) == pytest.approx(0.25, abs=1e-15)
        assert report.outcome_probability(1, "marked") == pytest.approx(0.5, abs=1e-15)

    def test_gadget_failure_exactly_half(self):
        report = enumerate_exact(
            oc.gen_two_star_bridge(2), oc.derive_params(4, 2, eps=0.5),
            "randgreedy", palette_size=2,
        )
        assert report.failure_probability == 0.5

    def test_probabilities_sum_to_one(self):
        params = oc.derive_params(6, 2, eps=0.3, cap=0.2)
        report = enumerate_exact(
            [Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(0, 3)], params, "alg1"
        )
        assert report.total_probability == pytest.approx(1.0, abs=1e-12)

    def test_supermartingale_and_martingale_drifts(self):
        for cap in (0.2, 1.0):
            params = oc.derive_params(6, 3, eps=0.3, cap=cap)
            report = enumerate_exact(
                [Edge(0, 1), Edge(0, 2), Edge(1, 2), Edge(1, 3)], params, "alg1"
            )
            assert report.max_conditional_z_drift <= 1e-12
            assert report.max_abs_conditional_y_drift <= 1e-12
            assert report.max_decomposition_residual <= 1e-12
            if cap <= 0.25:
                assert report.step_bound_violations == 0
                assert report.max_abs_z_step <= 6 * cap

    def test_alg2_enumeration_matches_alg1_with_huge_thresholds(self):
        params = oc.derive_params(6, 2, eps=0.5, cap=1.0)
        edges = [Edge(0, 1), Edge(1, 2), Edge(0, 2)]
        a = enumerate_exact(edges, params, "alg1")
        b = enumerate_exact(edges, params, "alg2")
        key = lambda leaf: (leaf[0], [str(x) for x in leaf[1]])
        assert sorted(a.leaves, key=key) == sorted(b.leaves, key=key)

    def test_alg2_enumeration_with_forced_thresholds(self):
        params = oc.derive_params(
            6, 2, eps=0.5, cap=1.0, badness_threshold=1, dangerous_threshold=1000
        )
        edges = [Edge(0, 2), Edge(1, 3), Edge(0, 1)]
        report = enumerate_exact(edges, params, "alg2")
        assert report.total_probability == pytest.approx(1.0, abs=1e-12)
        # paths where the first star edge is marked route the bridge through
        # the bad branch, which picks the lowest positive color
        marked_first = [out for p, out in report.leaves if out[0] == "marked"]
        assert marked_first and all(out[2] != "marked" for out in marked_first)

    def test_budget_exceeded(self):
        params = oc.derive_params(8, 4, eps=0.3, cap=1.0)
        edges = [Edge(a, b) for a in range(6) for b in range(a + 1, 6)][:6]
        with pytest.raises(BudgetExceeded):
            enumerate_exact(edges, params, "alg1", budget=10)

    def test_z_gt_one_branch_is_deterministic(self):
        # engineer z > 1: tiny eps and repeated bottom scalings drive the sum up
        params = oc.derive_params(8, 2, eps=0.05, cap=10.0)
        edges = [Edge(0, 2), Edge(0, 3), Edge(1, 2), Edge(1, 3), Edge(0, 1)]
        report = enumerate_exact(edges, params, "alg1")
        assert report.total_probability == pytest.approx(1.0, abs=1e-12)
        assert report.max_conditional_z_drift <= 1e-12

    def test_q_scaling_sums_are_supermartingales(self):
        corpus = [
            ([Edge(0, 1), Edge(1, 2), Edge(2, 3)], 2),
            ([Edge(0, 2), Edge(1, 3), Edge(0, 1)], 2),
            ([Edge(0, 1), Edge(0, 2), Edge(0, 3), Edge(0, 4)], 4),
            ([Edge(0, 1), Edge(0, 2), Edge(1, 2), Edge(1, 3), Edge(2, 3)], 3),
        ]
        for edges, delta in corpus:
            for eps, cap in ((0.3, 0.2), (0.5, 1.0)):
                params = oc.derive_params(8, delta, eps=eps, cap=cap)
                rep = enumerate_exact(edges, params, "alg1", track_q=True)
                assert rep.max_conditional_q_drift <= 1e-12
                if cap <= 0.25:
                    assert rep.q_step_violations == 0
                    assert rep.max_abs_q_step <= 12 * cap
