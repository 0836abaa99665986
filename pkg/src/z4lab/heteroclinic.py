"""Planar integrable limit, separatrix shooting for the four-winged
heteroclinic surface rho = h(omega, mu), and arrival angles at O.

Sign convention: the split of a separatrix launched from O+ (O-) is minus
(plus) its z-coordinate on the cylinder, so both splits agree under S and a
positive split means the separatrix passes to the far side of W^s(O).
"""

from collections import namedtuple
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import quad

from . import _core
from .eigen import eig3
from .errors import BracketError, PreconditionError
from .integrator import EventSpec, IntegratorConfig, integrate
from .lyapunov import unstable_direction
from .systems import SYMMETRY, RescaledParams, VectorField, rescaled_field


def planar_separatrix(A, t):
    """x0 = e^(t/2) / (sqrt(2|A|) (1 + e^t)),  z0 = 1 / (1 + e^t)."""
    if not A < 0:
        raise PreconditionError("planar separatrix needs A < 0")
    t = np.asarray(t, dtype=float)
    # the forms in e^(-|t|) avoid overflow for large |t|
    e = np.exp(-np.abs(t))
    k = math.sqrt(2 * abs(A))
    x0 = np.sqrt(e) / (k * (1 + e))
    z0 = np.where(t >= 0, e / (1 + e), 1 / (1 + e))
    return x0, z0


def planar_separatrix_velocity(A, t):
    """Closed-form time derivatives of the planar separatrix."""
    t = np.asarray(t, dtype=float)
    et = np.exp(t)
    k = math.sqrt(2 * abs(A))
    dx = np.exp(t / 2) * (0.5 * (1 + et) - et) / (k * (1 + et) ** 2)
    dz = -et / (1 + et) ** 2
    return dx, dz


def planar_separatrix_acceleration(A, t):
    t = np.asarray(t, dtype=float)
    et = np.exp(t)
    k = math.sqrt(2 * abs(A))
    # log-derivative g = 1/2 - e^t/(1+e^t), x0'' = x0 (g^2 + g')
    x0 = np.exp(t / 2) / (k * (1 + et))
    ddx = x0 * (0.25 - 2 * et / (1 + et) ** 2)
    ddz = -et * (1 - et) / (1 + et) ** 3
    return ddx, ddz


def energy_E(x, z, rho, A):
    """Integral (z - rho)^2 - 2 A x^2 of the planar restricted system."""
    return (z - rho) ** 2 - 2 * A * x ** 2


def limit_field(A, B=0.0, rho=0.5):
    """The omega = mu = 0 system x' = (z - rho) x, y' = -(rho + z) y,
    z' = 2A(x^2 - y^2) - 4Bxy as a general-form field."""
    v = np.zeros(_core.N_GENERAL)
    v[0] = rho
    v[3] = 1.0
    v[11], v[12] = A, B
    return VectorField(_core.GENERAL, v, "planar-limit")


FundamentalResidual = namedtuple("FundamentalResidual", "first second")


def fundamental_solution_residual(A, B=0.0, rho=0.5, ts=None):
    """Residuals of (X1, 0, Z1) and (X2, 0, Z2) in the linearisation along
    the planar separatrix (the Y-equation decouples for Y = 0, so B drops
    out). The integral of 1/x0^2 is evaluated by adaptive quadrature."""
    if not A < 0:
        raise PreconditionError("needs A < 0")
    if ts is None:
        ts = np.linspace(-10, 10, 81)
    x0, z0 = planar_separatrix(A, ts)
    dx, dz = planar_separatrix_velocity(A, ts)
    ddx, ddz = planar_separatrix_acceleration(A, ts)

    def lin(X, Z, x0_, z0_):
        return (z0_ - rho) * X + x0_ * Z, 4 * A * x0_ * X

    r1 = 0.0
    r2 = 0.0
    for i, t in enumerate(ts):
        fx, fz = lin(dx[i], dz[i], x0[i], z0[i])
        r1 = max(r1, abs(ddx[i] - fx), abs(ddz[i] - fz))
        I = quad(lambda s: 1.0 / planar_separatrix(A, s)[0] ** 2, 0.0, t,
                 epsabs=0.0, epsrel=1e-13, limit=200)[0]
        X2 = dx[i] * I + 1.0 / (2 * x0[i])
        Z2 = dz[i] * I
        # d/dt of the integral is 1/x0^2
        dX2 = ddx[i] * I + dx[i] / x0[i] ** 2 - dx[i] / (2 * x0[i] ** 2)
        dZ2 = ddz[i] * I + dz[i] / x0[i] ** 2
        fx, fz = lin(X2, Z2, x0[i], z0[i])
        scale = 1.0 + abs(X2) + abs(Z2)
        r2 = max(r2, abs(dX2 - fx) / scale, abs(dZ2 - fz) / scale)
    return FundamentalResidual(r1, r2)


def z2_asymptote(A, t):
    """Z2(t) of the second fundamental solution (integral by quadrature)."""
    I = quad(lambda s: 1.0 / planar_separatrix(A, s)[0] ** 2, 0.0, t,
             epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return float(planar_separatrix_velocity(A, t)[1] * I)


@dataclass(frozen=True)
class SplitResult:
    delta: float
    state: np.ndarray
    time: float
    delta_outer: float
    delta_inner: float


SHOOTING = IntegratorConfig()


def _source(which):
    if which == "O+":
        return np.array([0.0, 0.0, 1.0])
    if which == "O-":
        return np.array([0.0, 0.0, -1.0])
    raise ValueError(f"unknown source {which!r}")


def separatrix_launch(c, r, which="O+", h=1e-6):
    """Field and launch point on the unstable separatrix of ``which``.
    The O- launch is the S-image of the O+ launch."""
    field = rescaled_field(c, r, allow_limit=True)
    eq = _source("O+")
    ev = eig3(field.jacobian(eq))
    tiny = 1e-12 * max(abs(v) for v in ev)
    n_unstable = sum(1 for v in ev if v.real > tiny)
    if n_unstable != 1 or ev[0].imag != 0:
        raise PreconditionError(f"O+ must have one real unstable eigenvalue, got {ev}")
    v = unstable_direction(field, eq)
    if which == "O-":
        return field, SYMMETRY @ (eq + h * v)
    return field, eq + h * v


def separatrix_split(c, r, r_cyl=0.2, h=1e-6, which="O+", levels=2,
                     cfg=None, t_max=1e3):
    """Signed split of the separatrix on the cylinder x^2 + y^2 = r_cyl^2,
    taken at its first inward crossing.

    W^s(O) is tangent to z = 0, so the raw z-value carries a bias that is a
    series in r_cyl^2. ``levels`` Richardson steps with the crossings of the
    cylinders of radius r_cyl/2, r_cyl/4, ... cancel its leading terms.
    """
    cfg = cfg or SHOOTING
    field, s0 = separatrix_launch(c, r, which, h)
    sign = -1.0 if which == "O+" else 1.0
    radii = [r_cyl / 2 ** i for i in range(levels + 1)]
    evs = [EventSpec.cylinder(rad, direction=-1, terminal=(i == levels))
           for i, rad in enumerate(radii)]
    traj = integrate(field, s0, (0.0, t_max), cfg, events=evs)
    hits = []
    t_last = -math.inf
    for i in range(levels + 1):
        found = [e for e in traj.events if e.index == i and e.t > t_last]
        if not found:
            raise PreconditionError(f"separatrix did not reach the cylinder r={radii[i]}")
        hits.append(found[0])
        t_last = found[0].t
    vals = [sign * e.state[2] for e in hits]
    raw = list(vals)
    for lev in range(1, levels + 1):
        f = 4.0 ** lev
        vals = [(f * vals[i + 1] - vals[i]) / (f - 1) for i in range(len(vals) - 1)]
    first = hits[0]
    return SplitResult(vals[0], first.state, first.t, raw[0],
                       raw[1] if levels else math.nan)


@dataclass(frozen=True)
class HetSurfaceSample:
    omega: float
    mu: float
    rho_star: float
    width: float
    lo: float
    hi: float


def find_het_rho(c, omega, mu, bracket=(0.3, 0.7), tol=1e-10, **split_kw):
    """Bisection in rho for a zero of the split at fixed (omega, mu)."""
    lo, hi = map(float, bracket)

    def f(rho):
        return separatrix_split(c, RescaledParams(rho, omega, mu), **split_kw).delta

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return HetSurfaceSample(omega, mu, lo, 0.0, lo, lo)
    if f_hi == 0:
        return HetSurfaceSample(omega, mu, hi, 0.0, hi, hi)
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(f"split has the same sign at rho={lo} and rho={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid == 0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return HetSurfaceSample(omega, mu, 0.5 * (lo + hi), hi - lo, lo, hi)


def fold_angle(theta):
    """Map an angle to (-pi/2, pi/2] (directions of lines)."""
    theta = math.remainder(theta, math.pi)
    if theta <= -math.pi / 2:
        theta += math.pi
    return theta


def arrival_angle(c, mu, which="+", rho=None, r2_stop=1e-5, h=1e-6, cfg=None, t_max=1e3):
    """Direction in which the O+ ("+") or O- ("-") separatrix enters O at
    omega = 0 on the heteroclinic surface, folded to (-pi/2, pi/2]."""
    if not mu > 0:
        raise PreconditionError("needs mu > 0")
    if rho is None:
        rho = find_het_rho(c, 0.0, mu).rho_star
    src = {"+": "O+", "-": "O-"}[which]
    field, s0 = separatrix_launch(c, RescaledParams(rho, 0.0, mu), src, h)
    ev = EventSpec(lambda s: s[0] * s[0] + s[1] * s[1] - r2_stop, -1, True)
    traj = integrate(field, s0, (0.0, t_max), cfg or SHOOTING, events=[ev])
    if not traj.events:
        raise PreconditionError("separatrix does not converge to O")
    s = traj.events[0].state
    if abs(s[2]) > 0.05:
        raise PreconditionError(f"separatrix reached the axis away from O (z={s[2]})")
    return fold_angle(math.atan2(s[1], s[0]))
