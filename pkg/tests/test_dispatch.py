import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecbench.data import HOUR, LoadSeries, PriceSeries
from ecbench.dispatch import (
    BatteryParams,
    DispatchError,
    DispatchSchedule,
    InfeasibleError,
    NodeLimitError,
    PerfectForecast,
    TableForecast,
    build_battery,
    build_daily_milp,
    check_schedule,
    day_range,
    realized_cost,
    realized_grid,
    simulate_mpc,
    solve_lp,
    solve_milp,
)
from ecbench.dispatch.milp import ScheduleError
from ecbench.dispatch.simplex import linprog
from oracles import binary_patterns, hand_realized_cost, soc_dp, toy_grid_search


def vertex_oracle(c, A, b):
    """min c@x s.t. A x <= b, x >= 0 by enumerating every vertex (small n only)."""
    n = len(c)
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = np.inf
    for rows in itertools.combinations(range(len(G)), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


class TestSimplex:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 100_000))
    def test_matches_vertex_enumeration(self, seed):
        r = np.random.default_rng(seed)
        n, m = int(r.integers(2, 4)), int(r.integers(2, 5))
        A = r.uniform(-1, 2, (m, n))
        b = r.uniform(0.5, 3, m)  # x = 0 feasible
        A = np.vstack([A, np.ones((1, n))])  # keep the region bounded
        b = np.append(b, 5.0)
        c = r.uniform(-2, 2, n)
        res = linprog(c, A, b, lb=np.zeros(n))
        assert res.status == "optimal"
        assert res.fun == pytest.approx(vertex_oracle(c, A, b), abs=1e-8)
        assert np.all(A @ res.x <= b + 1e-7) and np.all(res.x >= -1e-9)

    def test_equalities_and_bounds(self):
        # min x + 2y, x + y = 3, 1 <= x <= 2, y >= 0
        res = linprog(np.array([1.0, 2.0]), A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([3.0]),
                      lb=np.array([1.0, 0.0]), ub=np.array([2.0, np.inf]))  # fmt: skip
        assert res.status == "optimal" and res.fun == pytest.approx(4.0)
        np.testing.assert_allclose(res.x, [2.0, 1.0])

    def test_infeasible(self):
        res = linprog(np.array([1.0]), A_ub=np.array([[1.0]]), b_ub=np.array([-1.0]), lb=np.zeros(1))
        assert res.status == "infeasible" and res.infeasible_row == 0

    def test_unbounded(self):
        res = linprog(np.array([-1.0, 0.0]), A_ub=np.array([[0.0, 1.0]]), b_ub=np.array([1.0]), lb=np.zeros(2))
        assert res.status == "unbounded"

    def test_degenerate_cycling_example(self):
        # Beale's classic cycling LP; Bland's rule terminates at -0.05
        c = np.array([-0.75, 150.0, -0.02, 6.0])
        A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
        res = linprog(c, A, np.array([0.0, 0.0, 1.0]), lb=np.zeros(4))
        assert res.status == "optimal" and res.fun == pytest.approx(-0.05)


def _lossless(E_max=1.0, P_max=1.0, E0=0.0):
    return BatteryParams(E_max, P_max, 1.0, 1.0, E_start=E0, E_end=E0)


class TestMilp:
    def test_two_period_toy(self):
        inst = build_daily_milp([0.0, 1.0], [1.0, 2.0], _lossless())
        s = solve_milp(inst)
        assert s.objective == pytest.approx(toy_grid_search(0.01), abs=1e-9)
        assert s.objective == pytest.approx(1.15, abs=1e-9)
        np.testing.assert_allclose(s.P_ch, [0.85, 0.0], atol=1e-9)
        np.testing.assert_allclose(s.P_dis, [0.0, 0.85], atol=1e-9)
        check_schedule(s, inst)

    def test_flat_prices_zero_action(self):
        f = np.array([1.0, 3.0, 2.0, 0.5])
        inst = build_daily_milp(f, np.full(4, 0.3), _lossless(4.0, 2.0, 2.0))
        s = solve_milp(inst)
        assert s.objective == pytest.approx(float(f.sum() * 0.3), abs=1e-9)

    def test_floor_respected(self, rng):
        for _ in range(10):
            f = rng.uniform(0, 5, 8)
            inst = build_daily_milp(f, rng.uniform(0.05, 0.5, 8), build_battery("capacity", capacity=40))
            s = solve_milp(inst)
            assert np.all(s.P_grid >= 0.15 * f - 1e-9)

    def test_zero_capacity(self, rng):
        f, pi = rng.uniform(0, 5, 24), rng.uniform(0.05, 0.5, 24)
        s = solve_milp(build_daily_milp(f, pi, BatteryParams.none()))
        assert np.all(s.P_ch == 0) and np.all(s.P_dis == 0)
        assert s.objective == pytest.approx(float(f @ pi), abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 100_000))
    def test_dp_and_enumeration_oracles(self, seed):
        r = np.random.default_rng(seed)
        E_max = r.uniform(1, 20)
        bat = BatteryParams(E_max, r.uniform(0.1, 1) * E_max, r.uniform(0.8, 1), r.uniform(0.8, 1),
                            E_start=E_max * int(r.integers(0, 401)) / 400)  # fmt: skip
        f, pi, floor = r.uniform(0, 10, 5), r.uniform(0.05, 0.5, 5), bool(r.integers(2))
        inst = build_daily_milp(f, pi, bat, floor)
        s = solve_milp(inst)
        check_schedule(s, inst)
        assert s.lp_bound <= s.objective + 1e-9
        dp = soc_dp(f, pi, bat.E_max, bat.P_max, bat.eta_ch, bat.eta_dis, bat.E_start, bat.E_end,
                    0.15 if floor else 0.0)  # fmt: skip
        assert s.objective <= dp + 1e-9
        assert (dp - s.objective) / s.objective < 0.01
        enum = min(res.fun for pat in binary_patterns(5)
                   if (res := solve_lp(inst, dict(enumerate(pat)))).status == "optimal")  # fmt: skip
        assert s.objective == pytest.approx(enum, abs=1e-6)

    def test_negative_prices_need_branching(self):
        # negative prices reward burning energy through simultaneous charge and discharge
        pi = np.array([-0.2, -0.1, 0.3, -0.3])
        inst = build_daily_milp(np.ones(4), pi, BatteryParams(10.0, 2.5, 0.9, 0.9))
        s = solve_milp(inst)
        check_schedule(s, inst)
        enum = min(solve_lp(inst, dict(enumerate(p))).fun for p in binary_patterns(4))
        assert s.objective == pytest.approx(enum, abs=1e-6)
        assert s.nodes > 1
        with pytest.raises(NodeLimitError) as e:
            solve_milp(inst, node_limit=1)
        assert e.value.gap >= 0 and e.value.nodes == 1

    def test_infeasible_names_class(self):
        # one hour cannot move 10 kWh with a 1 kW battery
        bat = BatteryParams(10.0, 1.0, 1.0, 1.0, E_start=0.0, E_end=10.0)
        with pytest.raises(InfeasibleError) as e:
            solve_milp(build_daily_milp([1.0], [0.2], bat))
        assert e.value.constraint_class in ("energy_balance", "variable_bounds", "charge_limit")

    def test_instance_validation(self):
        with pytest.raises(ValueError):
            build_daily_milp([1.0, -1.0], [0.1, 0.1], _lossless())
        with pytest.raises(ValueError):
            build_daily_milp([1.0], [0.1, 0.1], _lossless())

    def test_check_schedule_catches_violation(self):
        inst = build_daily_milp([0.0, 1.0], [1.0, 2.0], _lossless())
        s = solve_milp(inst)
        bad = DispatchSchedule(s.P_ch, s.P_dis, s.P_grid + 0.1, s.E, s.b_ch, s.b_dis, s.objective)
        with pytest.raises(ScheduleError, match="power balance"):
            check_schedule(bad, inst)


class TestRealizedCost:
    def _sched(self, ch, dis):
        ch, dis = np.asarray(ch, float), np.asarray(dis, float)
        z = np.zeros_like(ch)
        return DispatchSchedule(ch, dis, z, np.zeros(ch.size + 1), (ch > 0) * 1.0, 1.0 - (ch > 0), 0.0)

    def test_hand_toy(self):
        s = self._sched([1, 0], [0, 1])
        grid, cost = hand_realized_cost([1, 0], [0, 1], [1, 1], [1, 2])
        assert realized_grid(s, [1, 1]).tolist() == grid == [2, 0]
        assert realized_cost(s, [1, 1], [1, 2]) == cost == 2.0

    def test_feed_in_earns_nothing(self):
        assert realized_cost(self._sched([0], [1]), [0], [0.2]) == 0.0

    def test_perfect_forecast_matches_plan(self, rng):
        f, pi = rng.uniform(0, 5, 24), rng.uniform(0.05, 0.5, 24)
        s = solve_milp(build_daily_milp(f, pi, build_battery("capacity", capacity=50), grid_floor_enabled=False))
        np.testing.assert_allclose(realized_grid(s, f), s.P_grid, atol=1e-9)


class TestBattery:
    def test_per_household(self):
        b = build_battery("per_household", h=10)
        assert (b.E_max, b.P_max) == (120.0, 30.0)
        assert b.E_start == b.E_end == 60.0 and b.E_min == 0.0

    def test_round_trip(self):
        assert build_battery(1, h=1).round_trip == pytest.approx(0.850, abs=1e-3)

    def test_capacity(self):
        assert build_battery("capacity", capacity=5).P_max == 1.25

    @pytest.mark.parametrize("kw", [{"scheme": 1, "h": 0}, {"scheme": 2, "capacity": 0.0}, {"scheme": 3, "h": 1}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            build_battery(**kw)

    def test_param_invariants(self):
        with pytest.raises(ValueError):
            BatteryParams(10.0, 0.0)
        with pytest.raises(ValueError):
            BatteryParams(10.0, 2.0, eta_ch=1.2)
        with pytest.raises(ValueError):
            BatteryParams(10.0, 2.0, E_start=11.0)


def _series(values, start="2013-10-01"):
    ts = np.arange(len(values)) * HOUR + np.datetime64(start, "h")
    return ts, np.asarray(values, float)


@pytest.fixture(scope="module")
def setting():
    r = np.random.default_rng(5)
    hours = np.arange(24 * 7)
    load = LoadSeries("ec", *_series(3 + np.sin(hours * 2 * np.pi / 24) + r.random(hours.size)))
    prices = PriceSeries(*_series(0.2 + 0.1 * np.sin((hours - 12) * 2 * np.pi / 24)))
    return load, prices, day_range("2013-10-01", 7)


class TestMpc:
    def test_zero_capacity_zero_savings(self, setting):
        load, prices, days = setting
        rep = simulate_mpc(PerfectForecast(load), load, prices, BatteryParams.none(), days)
        assert rep.savings_pct == 0.0

    def test_perfect_never_worse_than_no_battery(self, setting):
        load, prices, days = setting
        rep = simulate_mpc(PerfectForecast(load), load, prices, build_battery("capacity", capacity=20), days)
        assert np.all(rep.optimized <= rep.unoptimized + 1e-9)
        assert rep.savings_pct > 0 and np.all(rep.nmae == 0)
        assert rep.savings_pct == pytest.approx(100 * (rep.total_unoptimized - rep.total_optimized)
                                                / rep.total_unoptimized)  # fmt: skip

    def test_floor_on_for_model_forecasts(self, setting):
        load, prices, days = setting
        fc = TableForecast(np.array(days), np.full((7, 24), 3.0), name="flat")
        rep = simulate_mpc(fc, load, prices, build_battery("capacity", capacity=20), days)
        for s, f in zip(rep.schedules, rep.forecasts):
            assert np.all(s.P_grid >= 0.15 * f - 1e-9)
        assert rep.forecaster == "flat"

    def test_failure_names_day(self, setting):
        load, prices, days = setting
        bad = TableForecast(np.array(days), np.ones((7, 23)), name="short")
        with pytest.raises(DispatchError, match="2013-10-01"):
            simulate_mpc(bad, load, prices, build_battery("capacity", capacity=20), days)

    def test_report_files(self, setting, tmp_path):
        load, prices, days = setting
        rep = simulate_mpc(PerfectForecast(load), load, prices, build_battery("capacity", capacity=20), days[:2])
        rep.write_json(tmp_path / "r.json")
        rep.write_schedule_csv(tmp_path / "s.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0].split(",") == ["date", "hour", "P_ch", "P_dis", "P_grid", "E", "price", "forecast", "actual"]
        assert len(lines) == 1 + 48
