"""Daily battery dispatch as a mixed-integer LP, solved by best-first branch and bound.

Variables per period p (N periods, Δt = 1 h by default)::

    P_ch[p], P_dis[p], P_grid[p] >= 0,   b[p] in {0, 1}   (b_dis = 1 - b)
    E[0..N]

    min  sum_p pi[p] * P_grid[p] * Δt
    s.t. P_grid + P_dis - P_ch = forecast                 (balance)
         P_ch <= P_max * b,  P_dis <= P_max * (1 - b)     (exclusive charge / discharge)
         E[p+1] - E[p] = (eta_ch P_ch - P_dis / eta_dis) Δt
         E_min <= E <= E_max,  E[0] = E_start,  E[N] = E_end
         P_grid >= 0.15 * forecast                        (only with the grid floor)
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .battery import BatteryParams
from .simplex import LPResult, linprog

GRID_FLOOR = 0.15
GAP_TOL = 1e-6
INT_TOL = 1e-7


class InfeasibleError(RuntimeError):
    def __init__(self, constraint_class: str, detail: str = ""):
        self.constraint_class = constraint_class
        super().__init__(f"infeasible dispatch problem ({constraint_class}){': ' + detail if detail else ''}")


class NodeLimitError(RuntimeError):
    def __init__(self, incumbent, gap: float, nodes: int):
        self.incumbent = incumbent
        self.gap = gap
        self.nodes = nodes
        super().__init__(f"branch and bound stopped after {nodes} nodes; incumbent gap {gap:.3g} EUR")


@dataclass(frozen=True, eq=False)
class MilpInstance:
    forecast: np.ndarray
    prices: np.ndarray
    battery: BatteryParams
    grid_floor_enabled: bool = True
    grid_floor_fraction: float = GRID_FLOOR
    dt: float = 1.0

    def __post_init__(self):
        f = np.asarray(self.forecast, dtype=float)
        pi = np.asarray(self.prices, dtype=float)
        if f.ndim != 1 or f.shape != pi.shape or f.size == 0:
            raise ValueError(f"forecast and prices must be equal-length vectors, got {f.shape} and {pi.shape}")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(pi))):
            raise ValueError("forecast and prices must be finite")
        if np.any(f < 0):
            raise ValueError("forecast must be non-negative")
        object.__setattr__(self, "forecast", f)
        object.__setattr__(self, "prices", pi)

    @property
    def N(self) -> int:
        return self.forecast.size

    @property
    def grid_lower(self) -> np.ndarray:
        frac = self.grid_floor_fraction if self.grid_floor_enabled else 0.0
        return frac * self.forecast


def build_daily_milp(forecast, prices, battery: BatteryParams, grid_floor_enabled: bool = True) -> MilpInstance:
    return MilpInstance(np.asarray(forecast, float), np.asarray(prices, float), battery, grid_floor_enabled)


@dataclass(frozen=True, eq=False)
class DispatchSchedule:
    P_ch: np.ndarray
    P_dis: np.ndarray
    P_grid: np.ndarray
    E: np.ndarray
    b_ch: np.ndarray
    b_dis: np.ndarray
    objective: float
    lp_bound: float = float("nan")
    nodes: int = 0
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------- LP assembly


@dataclass(frozen=True)
class _Layout:
    N: int

    @property
    def n(self) -> int:
        return 4 * self.N + self.N + 1

    def ch(self, p):
        return p

    def dis(self, p):
        return self.N + p

    def grid(self, p):
        return 2 * self.N + p

    def b(self, p):
        return 3 * self.N + p

    def e(self, t):
        return 4 * self.N + t


ROW_CLASSES = ("charge_limit", "discharge_limit", "power_balance", "energy_balance")


def _lp_data(inst: MilpInstance):
    N, bat, dt = inst.N, inst.battery, inst.dt
    L = _Layout(N)
    n = L.n
    c = np.zeros(n)
    c[[L.grid(p) for p in range(N)]] = inst.prices * dt

    A_ub = np.zeros((2 * N, n))
    b_ub = np.zeros(2 * N)
    for p in range(N):
        A_ub[p, L.ch(p)] = 1.0
        A_ub[p, L.b(p)] = -bat.P_max
        A_ub[N + p, L.dis(p)] = 1.0
        A_ub[N + p, L.b(p)] = bat.P_max
        b_ub[N + p] = bat.P_max

    A_eq = np.zeros((2 * N, n))
    b_eq = np.zeros(2 * N)
    for p in range(N):
        A_eq[p, [L.grid(p), L.dis(p), L.ch(p)]] = (1.0, 1.0, -1.0)
        b_eq[p] = inst.forecast[p]
        r = N + p
        A_eq[r, L.e(p + 1)] = 1.0
        A_eq[r, L.e(p)] = -1.0
        A_eq[r, L.ch(p)] = -bat.eta_ch * dt
        A_eq[r, L.dis(p)] = dt / bat.eta_dis

    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for p in range(N):
        lb[L.grid(p)] = inst.grid_lower[p]
        ub[L.ch(p)] = ub[L.dis(p)] = bat.P_max
        ub[L.b(p)] = 1.0
    lb[L.e(0) :] = bat.E_min
    ub[L.e(0) :] = bat.E_max
    lb[L.e(0)] = ub[L.e(0)] = bat.E_start
    lb[L.e(N)] = ub[L.e(N)] = bat.E_end
    row_class = [ROW_CLASSES[0]] * N + [ROW_CLASSES[1]] * N + [ROW_CLASSES[2]] * N + [ROW_CLASSES[3]] * N
    return L, c, A_ub, b_ub, A_eq, b_eq, lb, ub, row_class


def _infeasible_class(res: LPResult, row_class, n_bounds_rows_start: int) -> str:
    if res.infeasible_row is None:
        return "unknown"
    if res.infeasible_row < n_bounds_rows_start:
        return row_class[res.infeasible_row]
    return "variable_bounds"


def _schedule_from_x(inst: MilpInstance, L: _Layout, x: np.ndarray, objective: float, **kw) -> DispatchSchedule:
    N = inst.N
    ch = np.maximum(x[L.ch(0) : L.ch(0) + N], 0.0)
    dis = np.maximum(x[L.dis(0) : L.dis(0) + N], 0.0)
    b = np.where(ch > INT_TOL, 1.0, np.where(dis > INT_TOL, 0.0, np.round(x[L.b(0) : L.b(0) + N])))
    return DispatchSchedule(
        P_ch=ch,
        P_dis=dis,
        P_grid=x[L.grid(0) : L.grid(0) + N].copy(),
        E=x[L.e(0) : L.e(0) + N + 1].copy(),
        b_ch=b,
        b_dis=1.0 - b,
        objective=objective,
        **kw,
    )


def solve_lp(inst: MilpInstance, fixed: dict[int, int] | None = None) -> LPResult:
    """LP relaxation, optionally with some per-period binaries fixed."""
    L, c, A_ub, b_ub, A_eq, b_eq, lb, ub, _ = _lp_data(inst)
    for p, v in (fixed or {}).items():
        lb[L.b(p)] = ub[L.b(p)] = float(v)
    return linprog(c, A_ub, b_ub, A_eq, b_eq, lb, ub)


def _conflicts(inst: MilpInstance, L: _Layout, x: np.ndarray) -> list[int]:
    """Periods where the relaxation charges and discharges at once.

    Where at most one of the two flows is positive the binary can be rounded
    to the active side without changing feasibility or cost, so only these
    periods need branching.
    """
    tol = INT_TOL * max(1.0, inst.battery.P_max)
    N = inst.N
    ch, dis = x[L.ch(0) : L.ch(0) + N], x[L.dis(0) : L.dis(0) + N]
    return [p for p in range(N) if ch[p] > tol and dis[p] > tol]


def solve_milp(inst: MilpInstance, node_limit: int = 20_000) -> DispatchSchedule:
    L, c, A_ub, b_ub, A_eq, b_eq, lb0, ub0, row_class = _lp_data(inst)
    n_rows = A_ub.shape[0] + A_eq.shape[0]

    def relax(fixed: dict) -> LPResult:
        lb, ub = lb0.copy(), ub0.copy()
        for p, v in fixed.items():
            lb[L.b(p)] = ub[L.b(p)] = float(v)
        return linprog(c, A_ub, b_ub, A_eq, b_eq, lb, ub)

    root = relax({})
    if root.status == "infeasible":
        raise InfeasibleError(_infeasible_class(root, row_class, n_rows))
    if root.status != "optimal":
        raise InfeasibleError("objective", f"relaxation is {root.status}")

    best_x, best_obj = None, np.inf
    # rounding heuristic: follow the dominant flow of the relaxation
    conf = _conflicts(inst, L, root.x)
    if conf:
        guess = {p: int(root.x[L.ch(p)] >= root.x[L.dis(p)]) for p in conf}
        h = relax(guess)
        if h.status == "optimal":
            best_x, best_obj = h.x, h.fun
    else:
        best_x, best_obj = root.x, root.fun

    counter = itertools.count()
    heap = [(root.fun, next(counter), {}, root)] if conf else []
    nodes = 1
    while heap:
        bound, _, fixed, res = heapq.heappop(heap)
        if bound >= best_obj - GAP_TOL:
            continue
        conf = _conflicts(inst, L, res.x)
        if not conf:
            if res.fun < best_obj:
                best_x, best_obj = res.x, res.fun
            continue
        bvals = res.x[[L.b(p) for p in conf]]
        p = conf[int(np.argmin(np.abs(bvals - 0.5)))]  # most fractional
        for v in (0, 1):
            if nodes >= node_limit:
                inc = None if best_x is None else _schedule_from_x(inst, L, best_x, best_obj)
                raise NodeLimitError(inc, best_obj - bound, nodes)  # best-first: bound is the global lower bound
            child_fixed = {**fixed, p: v}
            child = relax(child_fixed)
            nodes += 1
            if child.status == "optimal" and child.fun < best_obj - GAP_TOL:
                heapq.heappush(heap, (child.fun, next(counter), child_fixed, child))

    if best_x is None:
        raise InfeasibleError("binary", "no charge/discharge pattern admits a feasible schedule")
    return _schedule_from_x(inst, L, best_x, best_obj, lp_bound=root.fun, nodes=nodes)


# ---------------------------------------------------------------- checks


class ScheduleError(AssertionError):
    pass


def check_schedule(s: DispatchSchedule, inst: MilpInstance, tol: float = 1e-6) -> None:
    """Raise :class:`ScheduleError` naming the first violated invariant."""
    bat, N, dt = inst.battery, inst.N, inst.dt

    def fail(what, p=None):
        where = "" if p is None else f" at period {p}"
        raise ScheduleError(f"{what} violated{where}")

    for name in ("P_ch", "P_dis", "P_grid", "b_ch", "b_dis"):
        if getattr(s, name).shape != (N,):
            fail(f"length of {name}")
    if s.E.shape != (N + 1,):
        fail("length of E")
    if not np.all(np.isin(s.b_ch, (0.0, 1.0))) or np.any(s.b_ch + s.b_dis != 1.0):
        fail("binary exclusivity")
    for p in range(N):
        if s.P_ch[p] < -tol or s.P_ch[p] > s.b_ch[p] * bat.P_max + tol:
            fail("charge bounds", p)
        if s.P_dis[p] < -tol or s.P_dis[p] > s.b_dis[p] * bat.P_max + tol:
            fail("discharge bounds", p)
        if min(s.P_ch[p], s.P_dis[p]) > tol:
            fail("no simultaneous charge and discharge", p)
        if abs(s.P_grid[p] + s.P_dis[p] - s.P_ch[p] - inst.forecast[p]) > tol:
            fail("power balance", p)
        if s.P_grid[p] < inst.grid_lower[p] - tol:
            fail("grid floor", p)
        delta = (bat.eta_ch * s.P_ch[p] - s.P_dis[p] / bat.eta_dis) * dt
        if abs(s.E[p + 1] - s.E[p] - delta) > tol:
            fail("energy balance", p)
    if np.any(s.E < bat.E_min - tol) or np.any(s.E > bat.E_max + tol):
        fail("state of charge bounds")
    if abs(s.E[0] - bat.E_start) > tol or abs(s.E[-1] - bat.E_end) > tol:
        fail("initial / final energy")
    if abs(float(np.dot(inst.prices, s.P_grid) * dt) - s.objective) > tol * max(1.0, abs(s.objective)):
        fail("objective value")


def realized_cost(schedule: DispatchSchedule, actual, prices, dt: float = 1.0) -> float:
    """Cost of running ``schedule`` against the actual load; feed-in earns nothing."""
    grid = realized_grid(schedule, actual)
    return float(np.sum(np.maximum(grid, 0.0) * np.asarray(prices, float)) * dt)


def realized_grid(schedule: DispatchSchedule, actual) -> np.ndarray:
    return schedule.P_ch - schedule.P_dis + np.asarray(actual, float)
