"""
Catch-and-throw cycle specifications and their constrained problems.

A cycle runs from one takeoff of a hand to its next takeoff. Its decision
variables are the ``n_steps`` jerk 3-vectors of a JerkTrajectory, flattened
row-major (index ``3*k + axis``). Constraint names:

    C1   catch position at the predicted touchdown
    C2   throw position, C3 throw velocity, C4 throw acceleration (= g)
    C5   post-takeoff collinearity with the released ball
    C6   pre-touchdown collinearity (approximate or exact form)
    C7   premature contact avoidance against the incoming ball
    C8   vertical hand-ball scheduling (incoming 3-throws)
    C9   horizontal hand-ball scheduling (incoming 3-throws)
    C10  roll-out: the cone keeps pushing the ball inward during dwell
    home_position / home_velocity / home_acceleration
         rest at the takeoff point after an empty-hand cycle

Inequalities are stored as ``g(x) >= 0``.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from jugglespec.config import OptimizerConfig
from jugglespec.errors import InfeasibleSpec, WindowOverlap
from jugglespec.trajectory import HandNormalSchedule, JerkTrajectory, boundary_terms, jerk_basis

EQ = "eq"
INEQ = "ineq"

UP = np.array([0.0, 0.0, 1.0])

_TIME_TOL = 1e-9
_NORM_FLOOR = 1e-9


@dataclass(frozen=True)
class ConstraintWindows:
    """Collinearity window lengths and hand-ball distance schedules."""

    post_takeoff: float = 0.04
    pre_touchdown: float = 0.04
    premature_peak: float = 0.15
    vertical_final: float = 0.05
    horizontal_final: float = 0.15
    inactive_bound: float = 1.0
    margin: float = 1e-4

    @classmethod
    def from_config(cls, optimizer: OptimizerConfig) -> "ConstraintWindows":
        return cls(
            post_takeoff=optimizer.post_takeoff_window,
            pre_touchdown=optimizer.pre_touchdown_window,
            premature_peak=optimizer.premature_contact_peak,
            vertical_final=optimizer.vertical_final,
            horizontal_final=optimizer.horizontal_final,
            inactive_bound=optimizer.schedule_inactive_bound,
            margin=optimizer.margin,
        )

    def premature_distance(self, t: float, t_start: float, t_touchdown: float) -> float:
        """Triangle from 0 at the vacant start to the peak mid-vacant and back to 0."""
        half = (t_touchdown - t_start) / 2
        if half <= 0:
            return 0.0
        mid = t_start + half
        return max(0.0, self.premature_peak * (1 - abs(t - mid) / half))

    def _ramp(self, t: float, t_start: float, t_touchdown: float, final: float) -> float:
        t_final = t_touchdown - self.pre_touchdown
        if t >= t_final or t_final <= t_start:
            return final
        s = (t - t_start) / (t_final - t_start)
        return self.inactive_bound + (final - self.inactive_bound) * max(s, 0.0)

    def vertical_bound(self, t: float, t_start: float, t_touchdown: float) -> float:
        return self._ramp(t, t_start, t_touchdown, self.vertical_final)

    def horizontal_bound(self, t: float, t_start: float, t_touchdown: float) -> float:
        return self._ramp(t, t_start, t_touchdown, self.horizontal_final)


@dataclass(frozen=True)
class ConstraintSwitches:
    premature_contact: bool = True
    three_throw_scheduling: bool = True
    rollout: bool = True
    exact_pre_touchdown: bool = False

    @classmethod
    def from_config(cls, optimizer: OptimizerConfig) -> "ConstraintSwitches":
        return cls(
            premature_contact=optimizer.premature_contact,
            three_throw_scheduling=optimizer.three_throw_scheduling,
            rollout=optimizer.rollout,
            exact_pre_touchdown=optimizer.exact_pre_touchdown,
        )


@dataclass(frozen=True, eq=False)
class BallPath:
    """Ballistic path of one ball, valid from its takeoff on."""

    t_takeoff: float
    p_takeoff: np.ndarray
    v_takeoff: np.ndarray
    gravity: np.ndarray
    height: int

    def position(self, t: float) -> np.ndarray:
        dt = t - self.t_takeoff
        return self.p_takeoff + self.v_takeoff * dt + 0.5 * self.gravity * dt * dt

    def velocity(self, t: float) -> np.ndarray:
        return self.v_takeoff + self.gravity * (t - self.t_takeoff)


@dataclass(frozen=True, eq=False)
class IncomingBall:
    """Predicted touchdown of the ball caught this cycle."""

    t_touchdown: float
    p_touchdown: np.ndarray
    v_touchdown: np.ndarray
    path: BallPath

    @property
    def height(self) -> int:
        return self.path.height


@dataclass(frozen=True, eq=False)
class ThrowTarget:
    """Desired takeoff state at the end of the cycle."""

    position: np.ndarray
    velocity: np.ndarray
    height: int


@dataclass(frozen=True, eq=False)
class CycleSpec:
    """Everything one catch-and-throw optimization needs."""

    t0: float
    duration: float
    n_steps: int
    p0: np.ndarray
    v0: np.ndarray
    a0: np.ndarray
    gravity: np.ndarray
    slope_angle: float
    windows: ConstraintWindows
    normals: HandNormalSchedule
    outgoing: Optional[ThrowTarget] = None
    incoming: Optional[IncomingBall] = None
    previous: Optional[BallPath] = None
    held_at_start: bool = False
    home: Optional[np.ndarray] = None
    switches: ConstraintSwitches = field(default_factory=ConstraintSwitches)

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    @property
    def knot_times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def dwell_start(self) -> Optional[float]:
        """When the hand starts carrying a ball in this cycle, None for empty cycles."""
        if self.outgoing is None:
            return None
        if self.held_at_start:
            return self.t0
        return self.incoming.t_touchdown if self.incoming is not None else None

    def signature(self) -> str:
        """Canonical description relative to ``t0``, used for cycle cache keys."""

        def vec(value: Optional[np.ndarray]) -> Optional[List[float]]:
            return None if value is None else [round(float(c), 9) for c in value]

        def path(p: Optional[BallPath]) -> Optional[Dict[str, Any]]:
            if p is None:
                return None
            return {"t": round(p.t_takeoff - self.t0, 9), "p": vec(p.p_takeoff), "v": vec(p.v_takeoff), "h": p.height}

        payload = {
            "duration": round(self.duration, 9),
            "n": self.n_steps,
            "start": [vec(self.p0), vec(self.v0), vec(self.a0)],
            "g": vec(self.gravity),
            "alpha": round(self.slope_angle, 9),
            "windows": self.windows.__dict__,
            "switches": self.switches.__dict__,
            "out": None if self.outgoing is None else [vec(self.outgoing.position), vec(self.outgoing.velocity), self.outgoing.height],
            "in": None if self.incoming is None else {
                "t": round(self.incoming.t_touchdown - self.t0, 9),
                "p": vec(self.incoming.p_touchdown),
                "v": vec(self.incoming.v_touchdown),
                "path": path(self.incoming.path),
            },
            "prev": path(self.previous),
            "held": self.held_at_start,
            "home": vec(self.home),
            "normals": [[round(t - self.t0, 9) for t in self.normals.times], [vec(n) for n in self.normals.normals]],
        }
        return json.dumps(payload, sort_keys=True)


def _unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def schedule_normals(
    t0: float,
    t_end: float,
    windows: ConstraintWindows,
    dt: float,
    previous: Optional[BallPath],
    incoming: Optional[IncomingBall],
    outgoing: Optional[ThrowTarget],
    blend_steps: int = 2,
    throw_blend_steps: int = 4,
) -> HandNormalSchedule:
    """
    Hand axis over one cycle.

    Aligned with the released ball after takeoff, against the incoming ball
    before touchdown, with the outgoing throw at the end and vertical in
    between.
    """
    n_prev = _unit(previous.v_takeoff) if previous is not None else UP
    n_throw = _unit(outgoing.velocity) if outgoing is not None else UP

    fixed: List[Tuple[float, np.ndarray]] = [(t0, n_prev), (t0 + windows.post_takeoff, n_prev)]
    blends: List[Tuple[float, np.ndarray]] = [(t0 + windows.post_takeoff + blend_steps * dt, UP)]
    if incoming is not None:
        n_catch = _unit(-incoming.v_touchdown)
        t_td = incoming.t_touchdown
        fixed += [(t_td - windows.pre_touchdown, n_catch), (t_td, n_catch)]
        blends += [(t_td - windows.pre_touchdown - blend_steps * dt, UP), (t_td + blend_steps * dt, UP)]
    fixed.append((t_end, n_throw))
    blends.append((t_end - throw_blend_steps * dt, UP))

    fixed.sort(key=lambda item: item[0])
    anchors: List[Tuple[float, np.ndarray]] = []
    for t, n in fixed:
        if anchors and t - anchors[-1][0] <= _TIME_TOL:
            anchors[-1] = (t, n)
        else:
            anchors.append((t, n))
    for t, n in sorted(blends, key=lambda item: item[0]):
        times = [a[0] for a in anchors]
        k = int(np.searchsorted(times, t))
        if 0 < k < len(anchors) and t - times[k - 1] > _TIME_TOL and times[k] - t > _TIME_TOL:
            anchors.insert(k, (t, n))
    return HandNormalSchedule(np.array([a[0] for a in anchors]), np.array([a[1] for a in anchors]))


def build_cycle_spec(
    optimizer: OptimizerConfig,
    t0: float,
    duration: float,
    start: Tuple[np.ndarray, np.ndarray, np.ndarray],
    gravity: np.ndarray,
    outgoing: Optional[ThrowTarget] = None,
    incoming: Optional[IncomingBall] = None,
    previous: Optional[BallPath] = None,
    held_at_start: bool = False,
    home: Optional[np.ndarray] = None,
    n_steps: Optional[int] = None,
) -> CycleSpec:
    """Assemble a CycleSpec with windows, switches and normals taken from the optimizer config."""
    n_steps = n_steps or optimizer.n_steps
    windows = ConstraintWindows.from_config(optimizer)
    dt = duration / n_steps
    normals = schedule_normals(
        t0, t0 + duration, windows, dt, previous, incoming, outgoing,
        optimizer.normal_blend_steps, optimizer.throw_blend_steps,
    )
    if outgoing is None and home is None and optimizer.empty_cycle_homing and not held_at_start:
        raise InfeasibleSpec("empty-hand cycles need a home position when homing is enabled")
    return CycleSpec(
        t0=t0,
        duration=duration,
        n_steps=n_steps,
        p0=np.asarray(start[0], dtype=float),
        v0=np.asarray(start[1], dtype=float),
        a0=np.asarray(start[2], dtype=float),
        gravity=np.asarray(gravity, dtype=float),
        slope_angle=optimizer.slope_angle,
        windows=windows,
        normals=normals,
        outgoing=outgoing,
        incoming=incoming,
        previous=previous,
        held_at_start=held_at_start,
        home=None if outgoing is not None else home,
        switches=ConstraintSwitches.from_config(optimizer),
    )


def active_constraints(spec: CycleSpec, respect_switches: bool = True) -> List[str]:
    """
    Names of the constraints that apply to a cycle.

    Args:
        spec: Cycle specification
        respect_switches: When False the ablation switches are ignored and
            the full set is returned

    Returns:
        List[str]: Constraint names in evaluation order
    """
    sw = spec.switches
    names: List[str] = []
    incoming = spec.incoming
    if incoming is not None:
        names.append("C1")
    if spec.outgoing is not None:
        names += ["C2", "C3", "C4"]
    elif spec.home is not None:
        names += ["home_position", "home_velocity", "home_acceleration"]
    if spec.previous is not None:
        names.append("C5")
    if incoming is not None:
        names.append("C6")
        if incoming.height != 3 and (sw.premature_contact or not respect_switches):
            names.append("C7")
        if incoming.height == 3 and (sw.three_throw_scheduling or not respect_switches):
            names += ["C8", "C9"]
    if spec.dwell_start is not None and (sw.rollout or not respect_switches):
        names.append("C10")
    return names


def _skew(v: np.ndarray) -> np.ndarray:
    """Matrix form of ``v x``."""
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


@dataclass(eq=False)
class ConstraintBlock:
    """A group of residuals sharing one name.

    ``fun`` returns natural-unit residuals, ``scale`` converts them to the
    comparable units the solver works in.
    """

    name: str
    kind: str
    times: np.ndarray
    fun: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    scale: np.ndarray
    linear: bool
    per_time: int

    @classmethod
    def affine(cls, name: str, kind: str, times: np.ndarray, matrix: np.ndarray, offset: np.ndarray,
               scale: np.ndarray, per_time: int) -> "ConstraintBlock":
        return cls(
            name=name,
            kind=kind,
            times=np.asarray(times, dtype=float),
            fun=lambda x: matrix @ x + offset,
            jac=lambda x: matrix,
            scale=np.asarray(scale, dtype=float),
            linear=True,
            per_time=per_time,
        )


@dataclass(eq=False)
class CycleProblem:
    """Quadratic objective over the jerks plus named constraint blocks."""

    spec: CycleSpec
    hessian: np.ndarray
    gradient_offset: np.ndarray
    objective_offset: float
    blocks: List[ConstraintBlock]

    @property
    def n_var(self) -> int:
        return 3 * self.spec.n_steps

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.hessian @ x + self.gradient_offset @ x + self.objective_offset)

    def objective_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.hessian @ x + self.gradient_offset

    def block(self, name: str) -> ConstraintBlock:
        for block in self.blocks:
            if block.name == name:
                return block
        raise KeyError(name)

    def names(self) -> List[str]:
        return [b.name for b in self.blocks]

    def _stack(self, kind: str, x: np.ndarray, scaled: bool) -> Tuple[np.ndarray, np.ndarray]:
        values, jacobians = [], []
        for block in self.blocks:
            if block.kind != kind:
                continue
            factor = block.scale if scaled else 1.0
            values.append(block.fun(x) * factor)
            jacobians.append(block.jac(x) * (block.scale[:, None] if scaled else 1.0))
        if not values:
            return np.zeros(0), np.zeros((0, self.n_var))
        return np.concatenate(values), np.vstack(jacobians)

    def equalities(self, x: np.ndarray, scaled: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        return self._stack(EQ, x, scaled)

    def inequalities(self, x: np.ndarray, scaled: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        return self._stack(INEQ, x, scaled)

    def linear_equalities(self) -> Tuple[np.ndarray, np.ndarray]:
        """(A, b) with ``A x = b`` for the equality blocks, all of which are affine."""
        zero = np.zeros(self.n_var)
        values, matrix = self.equalities(zero)
        return matrix, -values

    def has_inequalities(self) -> bool:
        return any(b.kind == INEQ for b in self.blocks)

    def trajectory(self, x: np.ndarray) -> JerkTrajectory:
        spec = self.spec
        return JerkTrajectory(spec.t0, spec.dt, spec.p0.copy(), spec.v0.copy(), spec.a0.copy(),
                              np.asarray(x, dtype=float).reshape(spec.n_steps, 3).copy())


def _window(knots: np.ndarray, lower: float, upper: float, include_upper: bool) -> np.ndarray:
    inside = knots >= lower - _TIME_TOL
    inside &= knots <= upper + _TIME_TOL if include_upper else knots < upper - _TIME_TOL
    return np.flatnonzero(inside)


def _objective(spec: CycleSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """Exact integral of squared piecewise-linear acceleration."""
    n, dt = spec.n_steps, spec.dt
    knots = spec.knot_times
    _, _, Ra = jerk_basis(knots, spec.t0, dt, n)
    _, _, oa = boundary_terms(knots, spec.t0, spec.p0, spec.v0, spec.a0)
    Q = np.zeros((n + 1, n + 1))
    for k in range(n):
        Q[k, k] += dt / 3
        Q[k + 1, k + 1] += dt / 3
        Q[k, k + 1] += dt / 6
        Q[k + 1, k] += dt / 6
    A = np.kron(Ra, np.eye(3))
    Qf = np.kron(Q, np.eye(3))
    o = oa.reshape(-1)
    G = A.T @ Qf @ A
    c = A.T @ Qf @ o
    return 2 * G, 2 * c, float(o @ Qf @ o)


def _validate(spec: CycleSpec) -> None:
    incoming = spec.incoming
    if spec.outgoing is not None and incoming is None and not spec.held_at_start:
        raise InfeasibleSpec("a cycle that throws needs an incoming ball or a ball held from the start")
    if incoming is None:
        return
    t_td = incoming.t_touchdown
    if not spec.t0 + _TIME_TOL < t_td < spec.t_end - _TIME_TOL:
        raise InfeasibleSpec(f"predicted touchdown {t_td:.4f} s lies outside the cycle ({spec.t0:.4f}, {spec.t_end:.4f})")
    pre_start = t_td - spec.windows.pre_touchdown
    if spec.previous is not None and pre_start < spec.t0 + spec.windows.post_takeoff - _TIME_TOL:
        raise WindowOverlap("pre-touchdown window starts before the post-takeoff window ends")
    if pre_start < spec.t0 - _TIME_TOL:
        raise WindowOverlap("pre-touchdown window starts before the cycle")


def assemble_cycle(spec: CycleSpec, names: Optional[Sequence[str]] = None) -> CycleProblem:
    """
    Build the constrained problem of one cycle.

    Args:
        spec: Cycle specification
        names: Constraints to include; defaults to ``active_constraints(spec)``

    Returns:
        CycleProblem: Objective and constraint blocks

    Raises:
        InfeasibleSpec: If the touchdown lies outside the cycle
        WindowOverlap: If the collinearity windows overlap
    """
    _validate(spec)
    names = list(active_constraints(spec) if names is None else names)
    hessian, grad_offset, f0 = _objective(spec)
    builders = {
        "C1": _catch_position,
        "C2": _throw_position,
        "C3": _throw_velocity,
        "C4": _throw_acceleration,
        "C5": _post_takeoff,
        "C6": _pre_touchdown,
        "C7": _premature_contact,
        "C8": _vertical_scheduling,
        "C9": _horizontal_scheduling,
        "C10": _rollout,
        "home_position": _home_position,
        "home_velocity": _home_velocity,
        "home_acceleration": _home_acceleration,
    }
    blocks = []
    for name in names:
        block = builders[name](spec)
        if block is not None:
            blocks.append(block)
    return CycleProblem(spec, hessian, grad_offset, f0, blocks)


class _Maps:
    """Affine maps from the flat jerk vector to hand kinematics at given times."""

    def __init__(self, spec: CycleSpec, times: Sequence[float]):
        self.times = np.asarray(times, dtype=float)
        Rp, Rv, Ra = jerk_basis(self.times, spec.t0, spec.dt, spec.n_steps)
        op, ov, oa = boundary_terms(self.times, spec.t0, spec.p0, spec.v0, spec.a0)
        eye = np.eye(3)
        self.Kp, self.Kv, self.Ka = np.kron(Rp, eye), np.kron(Rv, eye), np.kron(Ra, eye)
        self.op, self.ov, self.oa = op.reshape(-1), ov.reshape(-1), oa.reshape(-1)

    def position(self, x: np.ndarray) -> np.ndarray:
        return (self.Kp @ x + self.op).reshape(-1, 3)

    def acceleration(self, x: np.ndarray) -> np.ndarray:
        return (self.Ka @ x + self.oa).reshape(-1, 3)


def _vector_target(name: str, spec: CycleSpec, t: float, kind: str, target: np.ndarray) -> ConstraintBlock:
    maps = _Maps(spec, [t])
    matrix, offset, weight = {
        "p": (maps.Kp, maps.op, 1 / spec.dt**2),
        "v": (maps.Kv, maps.ov, 1 / spec.dt),
        "a": (maps.Ka, maps.oa, 1.0),
    }[kind]
    return ConstraintBlock.affine(name, EQ, [t], matrix, offset - target, np.full(3, weight), 3)


def _catch_position(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("C1", spec, spec.incoming.t_touchdown, "p", spec.incoming.p_touchdown)


def _throw_position(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("C2", spec, spec.t_end, "p", spec.outgoing.position)


def _throw_velocity(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("C3", spec, spec.t_end, "v", spec.outgoing.velocity)


def _throw_acceleration(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("C4", spec, spec.t_end, "a", spec.gravity)


def _home_position(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("home_position", spec, spec.t_end, "p", spec.home)


def _home_velocity(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("home_velocity", spec, spec.t_end, "v", np.zeros(3))


def _home_acceleration(spec: CycleSpec) -> ConstraintBlock:
    return _vector_target("home_acceleration", spec, spec.t_end, "a", np.zeros(3))


def _at_least_one(indices: np.ndarray, fallback: int) -> np.ndarray:
    return indices if indices.size else np.array([fallback])


def _post_takeoff(spec: CycleSpec) -> ConstraintBlock:
    knots = spec.knot_times
    idx = _window(knots, spec.t0 + _TIME_TOL * 10, spec.t0 + spec.windows.post_takeoff, include_upper=True)
    idx = _at_least_one(idx[idx > 0], 1)
    maps = _Maps(spec, knots[idx])
    rows, offsets = [], []
    for i, t in enumerate(maps.times):
        # (a - g) x n = -skew(n) (a - g)
        S = -_skew(spec.normals.at(t))
        rows.append(S @ maps.Ka[3 * i:3 * i + 3])
        offsets.append(S @ (maps.oa[3 * i:3 * i + 3] - spec.gravity))
    return ConstraintBlock.affine("C5", EQ, maps.times, np.vstack(rows), np.concatenate(offsets),
                                  np.ones(3 * len(idx)), 3)


def _pre_touchdown(spec: CycleSpec) -> ConstraintBlock:
    knots = spec.knot_times
    t_td = spec.incoming.t_touchdown
    idx = _window(knots, t_td - spec.windows.pre_touchdown, t_td, include_upper=False)
    idx = idx[idx > 0]
    if not idx.size:
        before = np.flatnonzero(knots < t_td - _TIME_TOL)
        idx = before[-1:] if before[-1] > 0 else np.array([1])
    maps = _Maps(spec, knots[idx])
    rows, offsets = [], []
    if spec.switches.exact_pre_touchdown:
        # (v - v_ball) x n = -skew(n) (v - v_ball)
        for i, t in enumerate(maps.times):
            S = -_skew(spec.normals.at(t))
            rows.append(S @ maps.Kv[3 * i:3 * i + 3])
            offsets.append(S @ (maps.ov[3 * i:3 * i + 3] - spec.incoming.path.velocity(t)))
        weight = 1 / spec.dt
    else:
        # v x v_td = -skew(v_td) v
        v_td = spec.incoming.v_touchdown
        S = -_skew(v_td)
        for i in range(len(maps.times)):
            rows.append(S @ maps.Kv[3 * i:3 * i + 3])
            offsets.append(S @ maps.ov[3 * i:3 * i + 3])
        weight = 1 / (np.linalg.norm(v_td) * spec.dt)
    return ConstraintBlock.affine("C6", EQ, maps.times, np.vstack(rows), np.concatenate(offsets),
                                  np.full(3 * len(idx), weight), 3)


def _airborne_vacant_knots(spec: CycleSpec) -> np.ndarray:
    knots = spec.knot_times
    path = spec.incoming.path
    idx = _window(knots, max(spec.t0, path.t_takeoff), spec.incoming.t_touchdown, include_upper=True)
    return idx[idx > 0]


def _premature_contact(spec: CycleSpec) -> Optional[ConstraintBlock]:
    knots = spec.knot_times
    t_td = spec.incoming.t_touchdown
    idx = [k for k in _airborne_vacant_knots(spec)
           if spec.windows.premature_distance(knots[k], spec.t0, t_td) > 0]
    if not idx:
        return None
    maps = _Maps(spec, knots[idx])
    ball = np.array([spec.incoming.path.position(t) for t in maps.times])
    required = np.array([spec.windows.premature_distance(t, spec.t0, t_td) + spec.windows.margin for t in maps.times])

    def fun(x: np.ndarray) -> np.ndarray:
        diff = maps.position(x) - ball
        return np.sum(diff * diff, axis=1) - required**2

    def jac(x: np.ndarray) -> np.ndarray:
        diff = maps.position(x) - ball
        return np.vstack([2 * diff[i] @ maps.Kp[3 * i:3 * i + 3] for i in range(len(maps.times))])

    return ConstraintBlock("C7", INEQ, maps.times, fun, jac, 1 / (2 * required * spec.dt**2), False, 1)


def _vertical_scheduling(spec: CycleSpec) -> Optional[ConstraintBlock]:
    idx = _airborne_vacant_knots(spec)
    if not idx.size:
        return None
    knots = spec.knot_times
    t_td = spec.incoming.t_touchdown
    maps = _Maps(spec, knots[idx])
    rows, offsets = [], []
    for i, t in enumerate(maps.times):
        bound = spec.windows.vertical_bound(t, spec.t0, t_td) - spec.windows.margin
        ball_z = spec.incoming.path.position(t)[2]
        # bound - (x_z - ball_z) >= 0
        rows.append(-maps.Kp[3 * i + 2])
        offsets.append(bound + ball_z - maps.op[3 * i + 2])
    return ConstraintBlock.affine("C8", INEQ, maps.times, np.vstack(rows), np.array(offsets),
                                  np.full(len(idx), 1 / spec.dt**2), 1)


def _horizontal_scheduling(spec: CycleSpec) -> Optional[ConstraintBlock]:
    idx = _airborne_vacant_knots(spec)
    if not idx.size:
        return None
    knots = spec.knot_times
    t_td = spec.incoming.t_touchdown
    maps = _Maps(spec, knots[idx])
    ball = np.array([spec.incoming.path.position(t) for t in maps.times])
    bound = np.array([spec.windows.horizontal_bound(t, spec.t0, t_td) - spec.windows.margin for t in maps.times])

    def fun(x: np.ndarray) -> np.ndarray:
        diff = (maps.position(x) - ball)[:, :2]
        return bound**2 - np.sum(diff * diff, axis=1)

    def jac(x: np.ndarray) -> np.ndarray:
        diff = (maps.position(x) - ball)[:, :2]
        return np.vstack([-2 * diff[i] @ maps.Kp[3 * i:3 * i + 2] for i in range(len(maps.times))])

    return ConstraintBlock("C9", INEQ, maps.times, fun, jac, 1 / (2 * bound * spec.dt**2), False, 1)


def seat_margin(normals: np.ndarray, u: np.ndarray, sin_alpha: float) -> np.ndarray:
    """
    Smooth roll-out residual ``-n.u - sin(alpha) |u|`` per row.

    Positive exactly when the angle between the hand axis and the specific
    load ``u = g - a`` exceeds 90 degrees plus the slope angle.
    """
    norm = np.sqrt(np.sum(u * u, axis=1) + _NORM_FLOOR**2)
    return -np.sum(normals * u, axis=1) - sin_alpha * norm


def _rollout(spec: CycleSpec) -> Optional[ConstraintBlock]:
    knots = spec.knot_times
    idx = _window(knots, spec.dwell_start, spec.t_end, include_upper=False)
    idx = idx[idx > 0]
    if not idx.size:
        return None
    maps = _Maps(spec, knots[idx])
    normals = spec.normals.sample(maps.times)
    sin_alpha = math.sin(spec.slope_angle)
    margin = spec.windows.margin

    def fun(x: np.ndarray) -> np.ndarray:
        return seat_margin(normals, spec.gravity - maps.acceleration(x), sin_alpha) - margin

    def jac(x: np.ndarray) -> np.ndarray:
        u = spec.gravity - maps.acceleration(x)
        norm = np.sqrt(np.sum(u * u, axis=1) + _NORM_FLOOR**2)
        grad_a = normals + sin_alpha * u / norm[:, None]
        return np.vstack([grad_a[i] @ maps.Ka[3 * i:3 * i + 3] for i in range(len(maps.times))])

    return ConstraintBlock("C10", INEQ, maps.times, fun, jac, np.ones(len(idx)), False, 1)


@dataclass
class ConstraintResidual:
    name: str
    kind: str
    times: np.ndarray
    values: np.ndarray

    @property
    def violation(self) -> float:
        if self.values.size == 0:
            return 0.0
        if self.kind == EQ:
            return float(np.max(np.abs(self.values)))
        return float(max(0.0, -np.min(self.values)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "violation": self.violation,
        }


@dataclass
class ResidualReport:
    """Per-constraint, per-step signed residuals of a trajectory."""

    entries: Dict[str, ConstraintResidual]

    @property
    def max_equality(self) -> float:
        return max((e.violation for e in self.entries.values() if e.kind == EQ), default=0.0)

    @property
    def max_inequality(self) -> float:
        return max((e.violation for e in self.entries.values() if e.kind == INEQ), default=0.0)

    @property
    def max_violation(self) -> float:
        return max(self.max_equality, self.max_inequality)

    def violated(self, tolerance: float = 1e-6) -> List[str]:
        return [name for name, entry in self.entries.items() if entry.violation > tolerance]

    def to_dict(self) -> Dict[str, Any]:
        return {name: entry.to_dict() for name, entry in self.entries.items()}


def evaluate_constraints(traj: JerkTrajectory, spec: CycleSpec, names: Optional[Sequence[str]] = None) -> ResidualReport:
    """
    Residuals of a trajectory against a cycle's constraints.

    By default the full constraint set is used, whatever the ablation
    switches of the spec say, so ablated solutions can be judged against it.

    Args:
        traj: Trajectory covering the cycle
        spec: Cycle specification
        names: Constraints to evaluate; defaults to the full set

    Returns:
        ResidualReport: Signed residuals in natural units
    """
    names = active_constraints(spec, respect_switches=False) if names is None else list(names)
    problem = assemble_cycle(spec, names)
    x = np.asarray(traj.jerks, dtype=float).reshape(-1)
    entries = {}
    for block in problem.blocks:
        values = block.fun(x)
        entries[block.name] = ConstraintResidual(block.name, block.kind, block.times, values)
    return ResidualReport(entries)
