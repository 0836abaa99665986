"""Flow-level attractor labels from Lyapunov exponents, near-passes of the
saddles O+- and the S-symmetry of the orbit's occupancy set."""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .errors import IntegrationError, PreconditionError
from .integrator import integrate
from .lyapunov import LYAPUNOV_TOLERANCES, LyapunovConfig, lyapunov_spectrum, unstable_direction
from .normal_form import phys_to_rescaled
from .systems import SYMMETRY, rescaled_field


class ClassLabel(enum.Enum):
    STABLE = "STABLE"
    DIVERGENT = "DIVERGENT"
    LORENZ_PAIR = "LORENZ_PAIR"
    SIMO_FOUR_WING = "SIMO_FOUR_WING"
    SIMO_TWO_WING_PAIR = "SIMO_TWO_WING_PAIR"
    UNCLASSIFIED = "UNCLASSIFIED"


@dataclass(frozen=True)
class ClassifyConfig:
    """Times are in rescaled units. ``threshold`` applies to the top
    exponent per unit rescaled time."""
    t_total: float = 2e4
    t_lyap_transient: float = 2e3
    transient_frac: float = 0.2
    radius: float = 0.4
    d_sym: float = 0.2
    cell: float = 0.05
    sample_dt: float = 0.25
    threshold: float = 5e-3
    launch_offset: float = 1e-6
    escape_radius: float = 1e3

    def __post_init__(self):
        if not 0 <= self.transient_frac < 1:
            raise ValueError("transient_frac must lie in [0, 1)")
        if not (self.radius > 0 and self.cell > 0 and self.sample_dt > 0):
            raise ValueError("radius, cell and sample_dt must be positive")


@dataclass(frozen=True)
class Evidence:
    top_exponent: float
    visits: str
    symmetry_distance: float
    n_samples: int
    min_dist_plus: float
    min_dist_minus: float
    radius: float
    d_sym: float
    reason: str = ""


_POINTS = {"O+": np.array([0.0, 0.0, 1.0]), "O-": np.array([0.0, 0.0, -1.0])}


def separatrix_orbit(field, source="O-", t_total=2e4, offset=1e-6, sample_dt=0.25):
    """Uniformly resampled orbit of the unstable separatrix of ``source``.
    The O- separatrix is the S-image of the O+ one, so both launches are
    exact mirror images."""
    eq = _POINTS["O+"]
    v = unstable_direction(field, eq)
    if v is None:
        raise PreconditionError("O+ has no real unstable direction")
    s0 = eq + offset * v
    if source == "O-":
        s0 = SYMMETRY @ s0
    elif source != "O+":
        raise ValueError(f"unknown source {source!r}")
    traj = integrate(field, s0, (0.0, t_total))
    n = int(math.floor(traj.t[-1] / sample_dt))
    ts = np.arange(n + 1) * sample_dt
    return ts, traj.at(ts)


def _visits_from(states, radius):
    dp = np.linalg.norm(states - _POINTS["O+"], axis=1)
    dm = np.linalg.norm(states - _POINTS["O-"], axis=1)
    out = []
    for d, sym in ((dp, "+"), (dm, "-")):
        loc = np.nonzero((d[1:-1] < d[:-2]) & (d[1:-1] <= d[2:]) & (d[1:-1] < radius))[0] + 1
        out.extend((int(i), sym) for i in loc)
    out.sort()
    return "".join(s for _, s in out), float(dp.min()), float(dm.min())


def visit_sequence(c, r, t_total=2e4, radius=0.4, transient_frac=0.2, source="O-",
                   sample_dt=0.25):
    """Symbols '+'/'-' for each close pass of O+/O- by the separatrix of
    ``source`` after the transient."""
    field = rescaled_field(c, r)
    ts, states = separatrix_orbit(field, source, t_total, sample_dt=sample_dt)
    keep = ts >= transient_frac * t_total
    return _visits_from(states[keep], radius)[0]


def symmetry_distance(states, cell=0.05):
    """Jaccard distance between the occupied cells of an orbit sample and of
    its S-image: 0 for an S-invariant set, 1 for disjoint ones."""
    states = np.asarray(states, dtype=float)
    if states.size == 0:
        raise PreconditionError("empty sample")
    img = states @ SYMMETRY.T

    def cells(p):
        return set(map(tuple, np.floor(p / cell).astype(np.int64)))
    a, b = cells(states), cells(img)
    return 1.0 - len(a & b) / len(a | b)


def _evidence(field, cfg, source):
    try:
        ts, states = separatrix_orbit(field, source, cfg.t_total, cfg.launch_offset,
                                      cfg.sample_dt)
    except IntegrationError as exc:
        return None, f"integration failed: {exc}"
    keep = ts >= cfg.transient_frac * cfg.t_total
    tail = states[keep]
    if not np.all(np.isfinite(tail)) or np.abs(tail).max() > cfg.escape_radius:
        return None, "separatrix escapes"
    lcfg = LyapunovConfig(t_transient=cfg.t_lyap_transient, t_total=cfg.t_total,
                          escape_radius=cfg.escape_radius, threshold=cfg.threshold)
    lyap = lyapunov_spectrum(field, states[min(len(states) - 1, 4)], lcfg, LYAPUNOV_TOLERANCES)
    visits, dmin_p, dmin_m = _visits_from(tail, cfg.radius)
    d = symmetry_distance(tail, cfg.cell)
    return Evidence(lyap.top, visits, d, len(tail), dmin_p, dmin_m, cfg.radius, cfg.d_sym), (
        "divergent" if lyap.divergent else "")


def label_from_evidence(ev, cfg, source="O-"):
    own, other = ("-", "+") if source == "O-" else ("+", "-")
    if ev.top_exponent <= cfg.threshold:
        return ClassLabel.STABLE, "top exponent below threshold"
    if not ev.visits:
        return ClassLabel.UNCLASSIFIED, "chaotic but no close passes of O+-"
    if other not in ev.visits:
        return ClassLabel.LORENZ_PAIR, f"only '{own}' passes"
    if own not in ev.visits:
        return ClassLabel.UNCLASSIFIED, f"only '{other}' passes"
    if ev.symmetry_distance < cfg.d_sym:
        return ClassLabel.SIMO_FOUR_WING, "mixed passes, S-symmetric occupancy"
    return ClassLabel.SIMO_TWO_WING_PAIR, "mixed passes, asymmetric occupancy"


def classify(c, p, cfg=None, source="O-"):
    """Label the attractor reached by the unstable separatrix of ``source``
    at the physical point ``p`` (mu > 0)."""
    cfg = cfg or ClassifyConfig()
    r = phys_to_rescaled(c, p)
    field = rescaled_field(c, r)
    ev, note = _evidence(field, cfg, source)
    if ev is None:
        e = Evidence(math.nan, "", math.nan, 0, math.nan, math.nan, cfg.radius, cfg.d_sym, note)
        return ClassLabel.DIVERGENT, e
    if note == "divergent":
        return ClassLabel.DIVERGENT, _with_reason(ev, "Lyapunov orbit escapes")
    label, why = label_from_evidence(ev, cfg, source)
    return label, _with_reason(ev, why)


def _with_reason(ev, reason):
    return Evidence(ev.top_exponent, ev.visits, ev.symmetry_distance, ev.n_samples,
                    ev.min_dist_plus, ev.min_dist_minus, ev.radius, ev.d_sym, reason)
