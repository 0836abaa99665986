"""Adaptive Dormand-Prince 5(4) integration with cubic Hermite dense output,
section-crossing events and joint state + tangent-frame propagation."""

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from . import _core
from .errors import StepLimitError, StepUnderflowError
from .formats import fmt


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class EventSpec:
    """Zero of ``g(state)``. direction +1 counts upward crossings only, -1
    downward only, 0 both."""
    g: Callable
    direction: int = 0
    terminal: bool = True

    @classmethod
    def plane(cls, axis, value, direction=0, terminal=True):
        return cls(lambda s: s[axis] - value, direction, terminal)

    @classmethod
    def cylinder(cls, radius, direction=0, terminal=True):
        r2 = radius * radius
        return cls(lambda s: s[0] * s[0] + s[1] * s[1] - r2, direction, terminal)


@dataclass(frozen=True)
class Event:
    t: float
    state: np.ndarray
    index: int


@dataclass
class Trajectory:
    """Accepted steps of one integration. ``derivs`` feeds the Hermite
    interpolant. Times are strictly monotone in the integration direction."""
    t: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    events: list = dc_field(default_factory=list)

    @property
    def samples(self):
        return [(float(t), s.copy()) for t, s in zip(self.t, self.states)]

    def __len__(self):
        return len(self.t)

    @property
    def final(self):
        return self.states[-1]

    def at(self, t):
        """Cubic Hermite interpolation at time(s) t inside the span."""
        ts = self.t
        flip = ts[-1] < ts[0]
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        key = -ts if flip else ts
        q = -tq if flip else tq
        i = np.clip(np.searchsorted(key, q, side="right") - 1, 0, len(ts) - 2)
        out = hermite(ts[i], self.states[i], self.derivs[i],
                      ts[i + 1], self.states[i + 1], self.derivs[i + 1], tq)
        return out[0] if np.ndim(t) == 0 else out

    def to_csv(self, path):
        write_trajectory_csv(self, path)


def hermite(t0, y0, f0, t1, y1, f1, t):
    t0 = np.asarray(t0, dtype=float)
    h = np.asarray(t1, dtype=float) - t0
    th = ((np.asarray(t, dtype=float) - t0) / h)
    if np.ndim(th) > 0 and np.ndim(y0) > 1:
        th = th[:, None]
        h = h[:, None] if np.ndim(h) else h
    h00 = (1 + 2 * th) * (1 - th) ** 2
    h10 = th * (1 - th) ** 2
    h01 = th * th * (3 - 2 * th)
    h11 = th * th * (th - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def write_trajectory_csv(traj, path):
    with open(path, "w", newline="") as fh:
        fh.write("t,x,y,z\n")
        for t, s in zip(traj.t, traj.states):
            fh.write(f"{fmt(t)},{fmt(s[0])},{fmt(s[1])},{fmt(s[2])}\n")


def _raise_for(status, t, y):
    if status == _core.MAX_STEPS:
        raise StepLimitError(f"step limit reached at t={t}", t, y[:3].copy())
    if status == _core.UNDERFLOW:
        raise StepUnderflowError(f"step size underflow at t={t}", t, y[:3].copy())


def _run(field, y0, t0, t1, cfg, k, record, max_steps=None, h0=0.0, escape=0.0):
    return _core.solve(field.kind, field.params, k, np.ascontiguousarray(y0, dtype=float),
                       float(t0), float(t1), cfg.rel_tol, cfg.abs_tol,
                       float(cfg.max_step), int(max_steps or cfg.max_steps),
                       float(h0), record, float(escape))


def integrate(field, s0, t_span, cfg=None, events=()):
    """Integrate ``field`` over ``t_span``. Non-terminal events are recorded
    in ``Trajectory.events``; the first terminal event ends integration there."""
    cfg = cfg or IntegratorConfig()
    t0, t1 = map(float, t_span)
    s0 = np.asarray(s0, dtype=float)
    if not events:
        status, t, y, _, _, _, ts, ys, fs = _run(field, s0, t0, t1, cfg, 0, True)
        _raise_for(status, t, y)
        return Trajectory(ts, ys, fs)
    return _integrate_events(field, s0, t0, t1, cfg, list(events))


_CHUNK = 512


def _crossed(g0, g1, direction):
    if direction > 0:
        return g0 < 0 <= g1
    if direction < 0:
        return g0 > 0 >= g1
    return (g0 < 0 <= g1) or (g0 > 0 >= g1)


def _locate(field, ev, ta, ya, fa, tb, yb, fb, ga, gb, tol):
    """Root of g along the step [ta, tb]: bisection on the Hermite
    interpolant, then Illinois iterations on exact Dormand-Prince steps."""
    lo, hi, glo = ta, tb, ga
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        gm = ev.g(hermite(ta, ya, fa, tb, yb, fb, mid))
        if (gm < 0) == (glo < 0) and gm != 0:
            lo, glo = mid, gm
        else:
            hi = mid
        if abs(gm) < tol or abs(hi - lo) <= 1e-15 * max(1.0, abs(ta)):
            break
    tm = 0.5 * (lo + hi)

    def exact(tc):
        if tc == ta:
            return ya.copy()
        return _core.single_step(field.kind, field.params, 0, ya, tc - ta)

    a, b = ta, tb
    fa_, fb_ = ga, gb
    sm = exact(tm)
    gmv = ev.g(sm)
    side = 0
    for _ in range(50):
        if abs(gmv) < tol:
            break
        if (gmv < 0) == (fa_ < 0):
            a, fa_ = tm, gmv
            if side == -1:
                fb_ *= 0.5
            side = -1
        else:
            b, fb_ = tm, gmv
            if side == 1:
                fa_ *= 0.5
            side = 1
        tm = (a * fb_ - b * fa_) / (fb_ - fa_)
        sm = exact(tm)
        gmv = ev.g(sm)
    return tm, sm


def _integrate_events(field, s0, t0, t1, cfg, events, tol=1e-10):
    ts_all, ys_all, fs_all = [], [], []
    hits = []
    t, y, h = t0, s0.copy(), 0.0
    used = 0
    g_prev = [ev.g(s0) for ev in events]
    while True:
        budget = min(_CHUNK, cfg.max_steps - used)
        if budget <= 0:
            raise StepLimitError(f"step limit reached at t={t}", t, y.copy())
        status, tn, yn, _, h, n, ts, ys, fs = _run(field, y, t, t1, cfg, 0, True,
                                                   max_steps=budget, h0=h)
        used += n
        if status == _core.UNDERFLOW:
            _raise_for(status, tn, yn)
        start = 1 if ts_all else 0
        stop_at = None
        for i in range(1, len(ts)):
            gi = [ev.g(ys[i]) for ev in events]
            for e, ev in enumerate(events):
                if _crossed(g_prev[e], gi[e], ev.direction):
                    te, se = _locate(field, ev, ts[i - 1], ys[i - 1], fs[i - 1],
                                     ts[i], ys[i], fs[i], g_prev[e], gi[e], tol)
                    hits.append(Event(float(te), se, e))
                    if ev.terminal:
                        stop_at = (i, te, se)
                        break
            if stop_at:
                break
            g_prev = gi
        if stop_at:
            i, te, se = stop_at
            ts_all.append(ts[start:i])
            ys_all.append(ys[start:i])
            fs_all.append(fs[start:i])
            ts_all.append(np.array([te]))
            ys_all.append(se[None, :])
            fs_all.append(field(se)[None, :])
            break
        ts_all.append(ts[start:])
        ys_all.append(ys[start:])
        fs_all.append(fs[start:])
        t, y = tn, yn
        if status == _core.OK:
            break
    traj = Trajectory(np.concatenate(ts_all), np.concatenate(ys_all), np.concatenate(fs_all))
    traj.events = hits
    return traj


def integrate_to_event(field, s0, ev, cfg=None, t_max=1e3, t0=0.0):
    """First occurrence of ``ev`` after t0. Returns (t*, s*), or None when no
    crossing happens before t_max."""
    cfg = cfg or IntegratorConfig()
    ev = EventSpec(ev.g, ev.direction, True)
    traj = _integrate_events(field, np.asarray(s0, dtype=float), float(t0),
                             float(t_max), cfg, [ev])
    if not traj.events:
        return None
    hit = traj.events[0]
    return hit.t, hit.state


def integrate_with_tangent(field, s0, frame, t_span, cfg=None):
    """Propagate the state and the 3 x k frame W with dW/dt = J(s(t)) W.
    Returns (state, frame) at the end of ``t_span``."""
    cfg = cfg or IntegratorConfig()
    W = np.asarray(frame, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    if W.shape[0] != 3 or not 1 <= W.shape[1] <= 3:
        raise ValueError("frame must be 3 x k with k in 1..3")
    k = W.shape[1]
    y0 = np.concatenate([np.asarray(s0, dtype=float), W.ravel()])
    t0, t1 = map(float, t_span)
    status, t, y, *_ = _run(field, y0, t0, t1, cfg, k, False)
    _raise_for(status, t, y)
    return y[:3].copy(), y[3:].reshape(3, k).copy()
