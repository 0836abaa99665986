"""Lyapunov spectra by QR-renormalised tangent propagation, and a
checkpointed parameter-sweep engine built on it."""

from dataclasses import dataclass, field as dc_field, asdict
import math
import multiprocessing
import os

import numpy as np

from . import _core
from .eigen import eig3, real_eigenvector
from .errors import InvalidRegimeError
from .formats import CheckpointWriter, fmt, read_checkpoint, write_heatmap
from .integrator import IntegratorConfig
from .systems import (PhysParams, RescaledParams, SMParams, SystemCoefficients,
                      general_field, rescaled_field, sm_field)


@dataclass(frozen=True)
class LyapunovConfig:
    t_transient: float = 2e3
    t_total: float = 2e4
    renorm_dt: float = 1.0
    n_exponents: int = 3
    seed: int = 0
    escape_radius: float = 1e3
    threshold: float = 5e-3

    def __post_init__(self):
        if not self.t_total > self.t_transient > 0:
            raise ValueError("need t_total > t_transient > 0")
        if not self.renorm_dt > 0:
            raise ValueError("renorm_dt must be positive")
        if self.n_exponents not in (1, 2, 3):
            raise ValueError("n_exponents must be 1, 2 or 3")


# Lyapunov runs do not need the shooting tolerances
LYAPUNOV_TOLERANCES = IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11)


@dataclass(frozen=True)
class LyapunovResult:
    exponents: np.ndarray
    divergent: bool
    t_reached: float
    final_state: np.ndarray

    @property
    def top(self):
        return float(self.exponents[0])


def initial_frame(k, seed):
    """Orthonormal 3 x k frame drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    return np.ascontiguousarray(q[:, :k])


def lyapunov_spectrum(field, s0, cfg=None, icfg=None, frame=None):
    """Benettin estimate of the first ``cfg.n_exponents`` exponents, in units
    of the field's own time. Escape beyond ``cfg.escape_radius`` returns a
    divergent result whose exponents are averaged over the time reached."""
    cfg = cfg or LyapunovConfig()
    icfg = icfg or LYAPUNOV_TOLERANCES
    k = cfg.n_exponents
    W0 = initial_frame(k, cfg.seed) if frame is None else np.asarray(frame, dtype=float)
    status, sums, t_avg, sums_all, t_reached, y = _core.benettin(
        field.kind, field.params, k, np.asarray(s0, dtype=float), W0,
        float(cfg.t_transient), float(cfg.t_total), float(cfg.renorm_dt),
        icfg.rel_tol, icfg.abs_tol, float(icfg.max_step), int(icfg.max_steps),
        float(cfg.escape_radius))
    divergent = status == _core.ESCAPED or not np.all(np.isfinite(y))
    if status == _core.OK and t_avg > 0:
        ex = sums / t_avg
    else:
        ex = sums_all / max(t_reached, 1e-300)
    ex = np.where(np.isfinite(ex), ex, 0.0) if divergent else ex
    return LyapunovResult(np.sort(ex)[::-1], bool(divergent), float(t_reached), y)


def mean_divergence(field, traj, t_from):
    """Time average of trace J along a recorded trajectory after ``t_from``."""
    ts = traj.t
    keep = ts >= t_from
    tr = np.array([np.trace(field.jacobian(s)) for s in traj.states[keep]])
    tk = ts[keep]
    return float(np.sum(0.5 * (tr[1:] + tr[:-1]) * np.diff(tk)) / (tk[-1] - tk[0]))


# sweeps

SYSTEMS = ("normal_form", "rescaled", "sm")
_PARAM_NAMES = {"normal_form": ("gamma", "beta", "mu"),
                "rescaled": ("rho", "omega", "mu"),
                "sm": ("alpha", "lambda")}


def coefficients_to_dict(c):
    return {k: ([getattr(c, k).real, getattr(c, k).imag] if k[0] == "a" or k == "b0"
                else getattr(c, k))
            for k in ("a0", "a1", "a2", "a3", "b0", "b1", "b2")}


def coefficients_from_dict(d):
    base = SystemCoefficients.concrete()
    kw = {}
    for k, v in d.items():
        kw[k] = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else v
    return base.replace(**kw)


@dataclass(frozen=True)
class SweepGrid:
    x_name: str
    x_range: tuple
    x_count: int
    y_name: str
    y_range: tuple
    y_count: int
    fixed: dict = dc_field(default_factory=dict)
    system: str = "normal_form"
    coefficients: SystemCoefficients = dc_field(default_factory=SystemCoefficients.concrete)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if self.x_count < 1 or self.y_count < 1:
            raise ValueError("grid counts must be at least 1")
        for rng in (self.x_range, self.y_range):
            if len(rng) != 2 or not all(math.isfinite(v) for v in rng):
                raise ValueError("grid ranges must be two finite numbers")
        names = _PARAM_NAMES[self.system]
        for n in (self.x_name, self.y_name, *self.fixed):
            if n not in names:
                raise ValueError(f"parameter {n!r} not known for system {self.system}")
        missing = set(names) - {self.x_name, self.y_name, *self.fixed}
        if missing:
            raise ValueError(f"missing fixed parameters: {sorted(missing)}")

    @staticmethod
    def _axis(rng, n):
        if n == 1:
            return np.array([float(rng[0])])
        return np.linspace(float(rng[0]), float(rng[1]), n)

    @property
    def x_values(self):
        return self._axis(self.x_range, self.x_count)

    @property
    def y_values(self):
        return self._axis(self.y_range, self.y_count)

    def cells(self):
        """(i, j, params) in row-major order (j outer)."""
        xs, ys = self.x_values, self.y_values
        out = []
        for j in range(self.y_count):
            for i in range(self.x_count):
                prm = dict(self.fixed)
                prm[self.x_name] = float(xs[i])
                prm[self.y_name] = float(ys[j])
                out.append((i, j, prm))
        return out


def system_field(system, c, prm):
    """Field and launch equilibrium for a parameter point. Normal-form points
    with mu > 0 are integrated in rescaled coordinates and time."""
    if system == "sm":
        return sm_field(SMParams(prm["alpha"], prm["lambda"])), np.zeros(3)
    if system == "rescaled":
        r = RescaledParams(prm["rho"], prm["omega"], prm["mu"])
        return rescaled_field(c, r), np.array([0.0, 0.0, 1.0])
    p = PhysParams(prm["gamma"], prm["beta"], prm["mu"])
    if p.mu > 0:
        from .normal_form import phys_to_rescaled
        return rescaled_field(c, phys_to_rescaled(c, p)), np.array([0.0, 0.0, 1.0])
    return general_field(c, p), np.zeros(3)


def unstable_direction(field, point):
    """Unit eigenvector of the largest positive real eigenvalue at ``point``,
    oriented with a non-negative leading nonzero component; None if absent."""
    J = field.jacobian(point)
    ev = eig3(J)
    real_pos = [v.real for v in ev if v.imag == 0 and v.real > 0]
    if not real_pos:
        return None
    v = real_eigenvector(J, max(real_pos))
    lead = v[np.argmax(np.abs(v) > 1e-12)]
    return v if lead >= 0 else -v


def launch_point(field, point, offset=1e-3):
    v = unstable_direction(field, point)
    if v is None:
        v = np.ones(3) / math.sqrt(3.0)
    return np.asarray(point, dtype=float) + offset * v


def _label(res, threshold):
    if res.divergent:
        return "divergent"
    return "chaotic" if res.top > threshold else "regular"


def compute_cell(task):
    i, j, prm, system, cdict, cfg_d, icfg_d = task
    c = coefficients_from_dict(cdict)
    cfg = LyapunovConfig(**cfg_d)
    icfg = IntegratorConfig(**icfg_d)
    field, eq = system_field(system, c, prm)
    res = lyapunov_spectrum(field, launch_point(field, eq), cfg, icfg)
    return {"i": i, "j": j, "params": prm,
            "exponents": [float(v) for v in res.exponents],
            "label": _label(res, cfg.threshold), "status": "done"}


@dataclass
class SweepResult:
    grid: SweepGrid
    cells: list

    def le1_grid(self):
        g = np.zeros((self.grid.y_count, self.grid.x_count))
        for rec in self.cells:
            g[rec["j"], rec["i"]] = rec["exponents"][0]
        return g

    def cell(self, i, j):
        for rec in self.cells:
            if rec["i"] == i and rec["j"] == j:
                return rec
        raise KeyError((i, j))

    def to_csv(self, path):
        write_sweep_csv(self, path)

    def to_heatmap(self, path):
        write_heatmap(self.le1_grid(), path)


def sweep_csv_text(result):
    g = result.grid
    lines = [f"i,j,{g.x_name},{g.y_name},le1,le2,le3,label"]
    for rec in result.cells:
        ex = list(rec["exponents"]) + [None] * (3 - len(rec["exponents"]))
        le = ",".join("" if v is None else fmt(v) for v in ex)
        lines.append(f"{rec['i']},{rec['j']},{fmt(rec['params'][g.x_name])},"
                     f"{fmt(rec['params'][g.y_name])},{le},{rec['label']}")
    return "\n".join(lines) + "\n"


def write_sweep_csv(result, path):
    with open(path, "w", newline="") as fh:
        fh.write(sweep_csv_text(result))


def _pool_context():
    methods = multiprocessing.get_all_start_methods()
    return multiprocessing.get_context("fork" if "fork" in methods else "spawn")


def run_sweep(grid, cfg=None, checkpoint=None, workers=1, icfg=None, stop_after=None):
    """Compute every grid cell once. Cells already in ``checkpoint`` (same
    indices and parameters) are reused; new ones are appended as they finish.
    ``stop_after`` ends the run after that many new cells, leaving the rest
    pending (used to exercise resume)."""
    cfg = cfg or LyapunovConfig(t_transient=200.0, t_total=2000.0)
    icfg = icfg or LYAPUNOV_TOLERANCES
    cells = grid.cells()
    done = {}
    if checkpoint:
        want = {(i, j): prm for i, j, prm in cells}
        for rec in read_checkpoint(checkpoint):
            key = (rec.get("i"), rec.get("j"))
            if rec.get("status") == "done" and want.get(key) == rec.get("params"):
                done[key] = rec
    cdict = coefficients_to_dict(grid.coefficients)
    cfg_d, icfg_d = asdict(cfg), asdict(icfg)
    tasks = [(i, j, prm, grid.system, cdict, cfg_d, icfg_d)
             for i, j, prm in cells if (i, j) not in done]
    if stop_after is not None:
        tasks = tasks[:stop_after]

    writer = CheckpointWriter(checkpoint) if checkpoint else None
    try:
        if workers <= 1:
            results = map(compute_cell, tasks)
            for rec in results:
                done[(rec["i"], rec["j"])] = rec
                if writer:
                    writer.write(rec)
        else:
            with _pool_context().Pool(workers) as pool:
                for rec in pool.imap_unordered(compute_cell, tasks):
                    done[(rec["i"], rec["j"])] = rec
                    if writer:
                        writer.write(rec)
    finally:
        if writer:
            writer.close()
    ordered = [done[(i, j)] for i, j, _ in cells if (i, j) in done]
    return SweepResult(grid, ordered)


def resolve_workers(threads=None):
    if threads:
        return int(threads)
    env = os.environ.get("Z4LAB_THREADS")
    if env:
        return int(env)
    return 1
