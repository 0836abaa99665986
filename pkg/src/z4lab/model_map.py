"""The two-dimensional model Poincare map T near the stem point, its
derivative, cone-field certificates of singular hyperbolicity, the sigma and
attractor-region formulas, and the 3D Henon map fixed-point analysis."""

from dataclasses import dataclass
import math

import numpy as np

from .eigen import eig3
from .errors import DiscontinuityError, PreconditionError, SingularDerivativeError

PERTURBATIONS = ("none", "trig")


@dataclass(frozen=True)
class ModelMapParams:
    """X' = (1 + c_hat|Y|^nu + |delta|^s eta1) sgn Y,
    Y' = sigma (-1 + c|Y|^nu + |delta|^s eta2) sgn Y.

    The "trig" family is eta1 = amp sin X sgn Y |Y|^nt e^(-Y^2),
    eta2 = amp cos X |Y|^nt e^(-Y^2) with nt = nu_tilde; both are even
    under (X, Y) -> (-X, -Y), so T stays odd."""
    nu: float
    c: float
    c_hat: float = 0.0
    sigma: int = 1
    delta: float = 0.0
    s_exp: float = 0.5
    perturbation: str = "none"
    amplitude: float = 0.0
    nu_tilde: float = None

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError("nu must lie in (0, 1)")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.perturbation not in PERTURBATIONS:
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if self.nu_tilde is None:
            object.__setattr__(self, "nu_tilde", 1.5 * self.nu)
        if self.perturbation == "trig" and not self.nu < self.nu_tilde < 2 * self.nu:
            raise ValueError("nu_tilde must lie in (nu, 2 nu)")

    @property
    def eps(self):
        """|delta|^s, the size of the perturbation terms."""
        if self.perturbation == "none" or self.amplitude == 0:
            return 0.0
        return abs(self.delta) ** self.s_exp


def _eta(p, X, Y):
    """(eta1, eta2) and their partials (d1/dX, d1/dY, d2/dX, d2/dY)."""
    if p.perturbation == "none" or p.amplitude == 0:
        return 0.0, 0.0, (0.0, 0.0, 0.0, 0.0)
    a, nt = p.amplitude, p.nu_tilde
    ay = abs(Y)
    sg = math.copysign(1.0, Y)
    w = ay ** nt * math.exp(-Y * Y)
    # d/dY of |Y|^nt e^(-Y^2), which is odd in Y
    dw = sg * ay ** (nt - 1) * math.exp(-Y * Y) * (nt - 2 * Y * Y)
    e1 = a * math.sin(X) * sg * w
    e2 = a * math.cos(X) * w
    d = (a * math.cos(X) * sg * w, a * math.sin(X) * sg * dw,
         -a * math.sin(X) * w, a * math.cos(X) * dw)
    return e1, e2, d


def map_T(p, X, Y):
    if Y == 0:
        raise DiscontinuityError("Y = 0 is the discontinuity line of T")
    e1, e2, _ = _eta(p, X, Y)
    sg = math.copysign(1.0, Y)
    ay = abs(Y) ** p.nu
    eps = p.eps
    Xb = (1 + p.c_hat * ay + eps * e1) * sg
    Yb = p.sigma * (-1 + p.c * ay + eps * e2) * sg
    return Xb, Yb


def map_derivative(p, X, Y):
    if Y == 0:
        raise DiscontinuityError("T is not differentiable on Y = 0")
    _, _, (d1x, d1y, d2x, d2y) = _eta(p, X, Y)
    sg = math.copysign(1.0, Y)
    eps = p.eps
    # d/dY |Y|^nu = nu |Y|^(nu-1) sgn Y, times the outer sgn Y
    g = p.nu * abs(Y) ** (p.nu - 1)
    return np.array([[eps * d1x * sg, p.c_hat * g + eps * d1y * sg],
                     [p.sigma * eps * d2x * sg, p.sigma * (p.c * g + eps * d2y * sg)]])


def finite_difference_derivative(p, X, Y, h=1e-7):
    J = np.zeros((2, 2))
    for k, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
        fp = map_T(p, X + dx, Y + dy)
        fm = map_T(p, X - dx, Y - dy)
        J[0, k] = (fp[0] - fm[0]) / (2 * h)
        J[1, k] = (fp[1] - fm[1]) / (2 * h)
    return J


# cones

@dataclass(frozen=True)
class ConeCertificate:
    slope_ss: float
    slope_u: float
    y_min: float
    n_y: int
    n_x: int
    min_expansion: float
    max_contraction: float
    u_invariant: bool
    ss_invariant: bool
    worst_point: tuple

    @property
    def valid(self):
        return (self.u_invariant and self.ss_invariant
                and self.min_expansion > 1 and self.max_contraction < 1)


def _sector_extrema(Q, kappa, vertical):
    """Min and max of v'Qv / v'v over v = (t, 1) (vertical) or v = (1, t),
    |t| <= kappa. Extrema sit at the ends or at eigen-directions of Q."""
    if vertical:
        Q = Q[::-1, ::-1]
    # now v = (1, t)
    def ratio(t):
        return (Q[0, 0] + 2 * Q[0, 1] * t + Q[1, 1] * t * t) / (1 + t * t)
    cands = [ratio(-kappa), ratio(kappa), ratio(0.0)]
    _, vecs = np.linalg.eigh(Q)
    for v in vecs.T:
        if v[0] != 0:
            t = v[1] / v[0]
            if abs(t) <= kappa:
                cands.append(ratio(t))
    return min(cands), max(cands)


def _u_invariant(J, kappa):
    """Boundary rays (+-kappa, 1) must land in one nappe of the cone."""
    w1 = J @ np.array([kappa, 1.0])
    w2 = J @ np.array([-kappa, 1.0])
    if w1[1] == 0 or w2[1] == 0 or (w1[1] > 0) != (w2[1] > 0):
        return False
    return abs(w1[0]) <= kappa * abs(w1[1]) and abs(w2[0]) <= kappa * abs(w2[1])


def _ss_invariant(J, kappa):
    """DT^-1 C^ss inside C^ss, i.e. nothing outside C^ss maps into it.
    Outside is v = (t, 1) with |t| < 1/kappa; the quadratic
    g(t) = kappa^2 (r1.v)^2 - (r2.v)^2 must stay negative there."""
    r1, r2 = J[0], J[1]
    a = kappa ** 2 * r1[0] ** 2 - r2[0] ** 2
    b = 2 * (kappa ** 2 * r1[0] * r1[1] - r2[0] * r2[1])
    c0 = kappa ** 2 * r1[1] ** 2 - r2[1] ** 2

    def g(t):
        return a * t * t + b * t + c0
    if kappa == 0:
        # complement is every non-horizontal direction
        if r2[0] != 0:
            return False
        return c0 < 0
    lim = 1.0 / kappa
    if g(-lim) > 0 or g(lim) > 0 or g(0.0) >= 0:
        return False
    if a < 0:
        tv = -b / (2 * a)
        if abs(tv) < lim and g(tv) >= 0:
            return False
    return True


def default_cone_slopes(p):
    """10 |delta|^s for C^u, widened by the image slope c_hat/c of the
    vertical direction, and 10 |delta|^s amp for C^ss."""
    eps = abs(p.delta) ** p.s_exp if p.delta else 0.0
    ku = 10.0 * eps + 1.01 * abs(p.c_hat) / p.c
    kss = 10.0 * eps * (p.amplitude if p.perturbation != "none" else 0.0)
    return kss, ku


def verify_cones(p, y_min=1e-3, y_max=1.0, n_y=200, n_x=21, slope_ss=None, slope_u=None):
    """Check C^u = {|dX| <= k_u |dY|} is DT-invariant and expanded, and
    C^ss = {|dY| <= k_ss |Y|^(nt - nu + 1) |dX|} is DT^-1-invariant and
    contracted, on a grid of both signs of Y."""
    if not y_min > 0:
        raise PreconditionError("y_min must be positive")
    dss, du = default_cone_slopes(p)
    kss = dss if slope_ss is None else float(slope_ss)
    ku = du if slope_u is None else float(slope_u)
    ys = np.geomspace(y_min, y_max, n_y)
    xs = np.linspace(-1.0, 1.0, n_x)
    min_exp, max_con = math.inf, 0.0
    u_ok = ss_ok = True
    worst = None
    for yv in ys:
        for sgn in (1.0, -1.0):
            Y = sgn * yv
            kss_y = kss * yv ** (p.nu_tilde - p.nu + 1)
            for X in xs:
                J = map_derivative(p, X, Y)
                if not np.all(np.isfinite(J)):
                    raise SingularDerivativeError(f"non-finite DT at ({X}, {Y})")
                Q = J.T @ J
                lo, _ = _sector_extrema(Q, ku, vertical=True)
                _, hi = _sector_extrema(Q, kss_y, vertical=False)
                e = math.sqrt(max(lo, 0.0))
                if e < min_exp:
                    min_exp, worst = e, (float(X), float(Y))
                max_con = max(max_con, math.sqrt(max(hi, 0.0)))
                if u_ok and not _u_invariant(J, ku):
                    u_ok = False
                if ss_ok and not _ss_invariant(J, kss_y):
                    ss_ok = False
    return ConeCertificate(kss, ku, y_min, n_y, n_x, min_exp, max_con, u_ok, ss_ok, worst)


def sigma_sign(k, sign_a22, Omega, sign_delta):
    """sigma = (-1)^k sign(a22 (Omega - pi k)) sign(delta)."""
    d = Omega - math.pi * k
    if d == 0:
        raise PreconditionError("sigma is undefined at Omega = pi k")
    if sign_a22 == 0 or sign_delta == 0:
        raise PreconditionError("signs must be nonzero")
    s = (-1) ** (k % 2) * math.copysign(1.0, sign_a22 * d) * math.copysign(1.0, sign_delta)
    return int(s)


# attractor regions near the stem point

@dataclass(frozen=True)
class RegionSpec:
    """Region A_k^- (kind "-", delta < 0) or A_k^+ (kind "+", delta > 0):
    K1 exp(-nu|Omega - pi k|/|theta|) < |delta| < K2 exp(...) in the
    quadrant theta (Omega - pi k) < 0."""
    k: int
    Omega: float
    nu: float
    nu_hat: float = math.nan
    K1: float = 0.5
    K2: float = 2.0
    kind: str = "-"

    def __post_init__(self):
        if not 0 < self.K1 < self.K2:
            raise ValueError("need 0 < K1 < K2")
        if self.k == 0 and self.Omega == 0:
            raise ValueError("k = 0 is excluded when Omega = 0")
        if self.kind not in ("-", "+"):
            raise ValueError("kind must be '-' or '+'")
        if not self.nu > 0:
            raise ValueError("nu must be positive")


def region_bounds(rs, theta):
    if theta == 0:
        raise PreconditionError("theta must be nonzero")
    e = math.exp(-rs.nu * abs(rs.Omega - math.pi * rs.k) / abs(theta))
    return rs.K1 * e, rs.K2 * e


def region_predicate(rs, theta, delta):
    """(inside, reason)."""
    if theta == 0:
        raise PreconditionError("theta must be nonzero")
    if theta * (rs.Omega - math.pi * rs.k) >= 0:
        return False, "wrong quadrant: theta (Omega - pi k) >= 0"
    if (rs.kind == "-" and not delta < 0) or (rs.kind == "+" and not delta > 0):
        return False, f"delta has the wrong sign for an A{rs.kind} region"
    lo, hi = region_bounds(rs, theta)
    d = abs(delta)
    if d <= lo:
        return False, "below the lower bound"
    if d >= hi:
        return False, "above the upper bound"
    return True, "inside"


@dataclass(frozen=True)
class Itinerary:
    signs: tuple
    hit_discontinuity: bool


def itinerary(p, start, n):
    """Signs of Y along the first n points of the orbit (start included)."""
    X, Y = map(float, start)
    out = []
    for _ in range(int(n)):
        if Y == 0:
            return Itinerary(tuple(out), True)
        out.append(1 if Y > 0 else -1)
        X, Y = map_T(p, X, Y)
    return Itinerary(tuple(out), False)


# Henon map x' = y, y' = z, z' = M1 + B x + M2 y - z^2

@dataclass(frozen=True)
class HenonFixedPoint:
    point: tuple
    multipliers: tuple


def henon_map(M1, M2, B, s):
    x, y, z = s
    return np.array([y, z, M1 + B * x + M2 * y - z * z])


def henon_jacobian(M2, B, p):
    return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [B, M2, -2.0 * p]])


def henon_analysis(M1, M2, B):
    """Fixed points x = y = z = p with p^2 + (1 - B - M2) p - M1 = 0.
    Complex pairs are returned as well; their multipliers come from numpy."""
    b = 1.0 - B - M2
    disc = b * b + 4.0 * M1
    if disc >= 0:
        r = math.sqrt(disc)
        # stable quadratic formula
        q = -0.5 * (b + math.copysign(r, b)) if b != 0 else 0.5 * r
        roots = sorted({q, -M1 / q} if q != 0 else {0.0, -b})
    else:
        r = math.sqrt(-disc)
        roots = [complex(-b / 2, -r / 2), complex(-b / 2, r / 2)]
    out = []
    for p in roots:
        if isinstance(p, complex):
            J = np.array([[0, 1, 0], [0, 0, 1], [B, M2, -2 * p]], dtype=complex)
            mult = tuple(sorted(np.linalg.eigvals(J), key=lambda v: (-v.real, -v.imag)))
        else:
            mult = tuple(eig3(henon_jacobian(M2, B, p)))
        out.append(HenonFixedPoint((p, p, p), mult))
    return out
