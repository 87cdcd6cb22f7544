"""
Piecewise-constant-jerk hand trajectories and hand-normal schedules.

A trajectory starts from a known position, velocity and acceleration and
holds jerk ``j_k`` constant on ``[t0 + k*dt, t0 + (k+1)*dt)``. Position,
velocity and acceleration are affine in the jerks, which is what the
optimizer exploits: ``jerk_basis`` returns the linear part and
``boundary_terms`` the part fixed by the initial state.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from jugglespec.errors import OutOfDomain

_DOMAIN_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class JerkTrajectory:
    """Hand point trajectory over one cycle."""

    t0: float
    dt: float
    p0: np.ndarray
    v0: np.ndarray
    a0: np.ndarray
    jerks: np.ndarray

    @property
    def n_steps(self) -> int:
        return int(self.jerks.shape[0])

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    @cached_property
    def knots(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Position, velocity and acceleration at every segment boundary, shape (n+1, 3)."""
        n, dt = self.n_steps, self.dt
        P = np.empty((n + 1, 3))
        V = np.empty((n + 1, 3))
        A = np.empty((n + 1, 3))
        P[0], V[0], A[0] = self.p0, self.v0, self.a0
        for k in range(n):
            j = self.jerks[k]
            P[k + 1] = P[k] + V[k] * dt + A[k] * dt**2 / 2 + j * dt**3 / 6
            V[k + 1] = V[k] + A[k] * dt + j * dt**2 / 2
            A[k + 1] = A[k] + j * dt
        return P, V, A

    def contains(self, t: float) -> bool:
        return self.t0 - _DOMAIN_TOLERANCE <= t <= self.t_end + _DOMAIN_TOLERANCE

    def end_state(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        P, V, A = self.knots
        return P[-1].copy(), V[-1].copy(), A[-1].copy()

    def shifted(self, t0: float) -> "JerkTrajectory":
        return JerkTrajectory(t0, self.dt, self.p0, self.v0, self.a0, self.jerks)

    def sample(self, times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorised rollout at many times inside the domain."""
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < self.t0 - _DOMAIN_TOLERANCE or times.max() > self.t_end + _DOMAIN_TOLERANCE):
            raise OutOfDomain(f"times outside [{self.t0}, {self.t_end}]")
        P, V, A = self.knots
        local = times - self.t0
        k = np.clip(np.floor(local / self.dt).astype(int), 0, self.n_steps - 1)
        s = (local - k * self.dt)[:, None]
        j = self.jerks[k]
        pos = P[k] + V[k] * s + A[k] * s**2 / 2 + j * s**3 / 6
        vel = V[k] + A[k] * s + j * s**2 / 2
        acc = A[k] + j * s
        return pos, vel, acc

    def peak_speed(self) -> float:
        _, V, _ = self.knots
        return float(np.linalg.norm(V, axis=1).max())

    def peak_acceleration(self) -> float:
        _, _, A = self.knots
        return float(np.linalg.norm(A, axis=1).max())

    def to_records(self, normals: Optional["HandNormalSchedule"] = None) -> List[Dict[str, Any]]:
        """One record per knot: ``{t, p, v, a, j, n_hat}``."""
        P, V, A = self.knots
        records = []
        for k in range(self.n_steps + 1):
            t = self.t0 + k * self.dt
            jerk = self.jerks[min(k, self.n_steps - 1)]
            record = {
                "t": t,
                "p": P[k].tolist(),
                "v": V[k].tolist(),
                "a": A[k].tolist(),
                "j": jerk.tolist(),
            }
            if normals is not None:
                record["n_hat"] = normals.at(t).tolist()
            records.append(record)
        return records


def rollout(traj: JerkTrajectory, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Exact position, velocity and acceleration at time ``t``.

    Raises:
        OutOfDomain: If ``t`` lies outside the trajectory span
    """
    if not traj.contains(t):
        raise OutOfDomain(f"t={t} outside [{traj.t0}, {traj.t_end}]")
    P, V, A = traj.knots
    local = t - traj.t0
    k = min(max(int(local // traj.dt), 0), traj.n_steps - 1)
    s = local - k * traj.dt
    j = traj.jerks[k]
    return (
        P[k] + V[k] * s + A[k] * s**2 / 2 + j * s**3 / 6,
        V[k] + A[k] * s + j * s**2 / 2,
        A[k] + j * s,
    )


def jerk_basis(times: Sequence[float], t0: float, dt: float, n_steps: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Linear maps from per-axis jerks to position, velocity and acceleration.

    Returns:
        Tuple of (Rp, Rv, Ra), each of shape (len(times), n_steps), such that
        ``p(t)[axis] = boundary + Rp[t] @ jerks[:, axis]``.
    """
    times = np.asarray(times, dtype=float)
    starts = t0 + dt * np.arange(n_steps)
    u = times[:, None] - starts[None, :]
    done = u >= dt
    active = (u >= 0) & ~done
    Ra = np.where(done, dt, np.where(active, u, 0.0))
    Rv = np.where(done, dt * u - dt**2 / 2, np.where(active, u**2 / 2, 0.0))
    Rp = np.where(done, dt * u**2 / 2 - dt**2 * u / 2 + dt**3 / 6, np.where(active, u**3 / 6, 0.0))
    return Rp, Rv, Ra


def boundary_terms(
    times: Sequence[float], t0: float, p0: np.ndarray, v0: np.ndarray, a0: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Contribution of the initial state, each of shape (len(times), 3)."""
    tau = (np.asarray(times, dtype=float) - t0)[:, None]
    p0, v0, a0 = (np.asarray(x, dtype=float)[None, :] for x in (p0, v0, a0))
    return p0 + v0 * tau + a0 * tau**2 / 2, v0 + a0 * tau, np.repeat(a0, tau.shape[0], axis=0)


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ValueError("cannot normalise a zero vector")
    return np.asarray(vector, dtype=float) / norm


def slerp(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """Spherical interpolation between unit vectors."""
    cos_theta = float(np.clip(np.dot(a, b), -1.0, 1.0))
    theta = np.arccos(cos_theta)
    if theta < 1e-9:
        return _unit((1 - s) * a + s * b)
    if theta > np.pi - 1e-6:
        raise ValueError("cannot interpolate between opposite directions")
    return (np.sin((1 - s) * theta) * a + np.sin(s * theta) * b) / np.sin(theta)


@dataclass(frozen=True, eq=False)
class HandNormalSchedule:
    """Hand symmetry axis over time, slerped between anchors and held outside them."""

    times: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        normals = np.array([_unit(n) for n in np.asarray(self.normals, dtype=float)])
        if times.ndim != 1 or len(times) != len(normals) or len(times) == 0:
            raise ValueError("need one normal per anchor time")
        if np.any(np.diff(times) <= 0):
            raise ValueError("anchor times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "normals", normals)

    @classmethod
    def constant(cls, normal: Sequence[float], t: float = 0.0) -> "HandNormalSchedule":
        return cls(np.array([t]), np.array([normal], dtype=float))

    def _segment(self, t: float) -> Tuple[int, float]:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        if k < 0:
            return 0, 0.0
        if k >= len(self.times) - 1:
            return len(self.times) - 1, 0.0
        span = self.times[k + 1] - self.times[k]
        return k, (t - self.times[k]) / span

    def at(self, t: float) -> np.ndarray:
        k, s = self._segment(t)
        if s == 0.0:
            return self.normals[k].copy()
        return slerp(self.normals[k], self.normals[k + 1], s)

    def rate(self, t: float) -> np.ndarray:
        """Time derivative of the normal."""
        k, s = self._segment(t)
        if s == 0.0 and (t < self.times[0] or k == len(self.times) - 1):
            return np.zeros(3)
        a, b = self.normals[k], self.normals[k + 1]
        theta = np.arccos(float(np.clip(np.dot(a, b), -1.0, 1.0)))
        if theta < 1e-9:
            return np.zeros(3)
        span = self.times[k + 1] - self.times[k]
        ds = theta / np.sin(theta) * (-np.cos((1 - s) * theta) * a + np.cos(s * theta) * b)
        return ds / span

    def sample(self, times: Sequence[float]) -> np.ndarray:
        normals, _ = self.sample_with_rates(times)
        return normals

    def sample_with_rates(self, times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorised ``at`` and ``rate`` over many times, each of shape (len(times), 3)."""
        t = np.asarray(times, dtype=float)
        last = len(self.times) - 1
        k = np.searchsorted(self.times, t, side="right") - 1
        inside = (k >= 0) & (k < last)
        k = np.clip(k, 0, last)
        k_next = np.minimum(k + 1, last)
        span = np.where(inside, self.times[k_next] - self.times[k], 1.0)
        s = np.where(inside, (t - self.times[k]) / span, 0.0)[:, None]
        a, b = self.normals[k], self.normals[k_next]
        theta = np.arccos(np.clip(np.sum(a * b, axis=1), -1.0, 1.0))[:, None]
        turning = (theta > 1e-9) & inside[:, None]
        sin_theta = np.where(turning, np.sin(theta), 1.0)
        slerped = (np.sin((1 - s) * theta) * a + np.sin(s * theta) * b) / sin_theta
        normals = np.where(turning, slerped, a)
        rates = theta / sin_theta * (-np.cos((1 - s) * theta) * a + np.cos(s * theta) * b) / span[:, None]
        return normals, np.where(turning, rates, 0.0)
