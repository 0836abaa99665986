"""Parameter and coordinate chain: physical -> rescaled -> Shimizu-Morioka,
its inverse, and the closed-form coefficients of the heteroclinic surface.

Near O+ = (0, 0, 1) of the rescaled cubic field the linear part is exactly

    [[1 - rho', -omega', 0], [omega', -1 - rho', 0], [0, 0, -alpha0 sqrt(mu)]]

with rho' = rho - C sqrt(mu), omega' = omega + D sqrt(mu) and
alpha0 = 2 sqrt|b1| / |a0|.  Hence mu1 = 1 - omega'^2 - rho'^2 and
mu2 = -2 rho' carry no O(mu) corrections for the truncated field.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import (DegenerateCoefficientsError, InvalidRegimeError, MuTooLargeError,
                     OutsideWindowError, WrongCaseError)
from .systems import (DerivedConstants, PhysParams, RescaledParams, SMParams,
                      rescaled_field, sm_field)


def derived_constants(c, mu=None):
    if c.a0 == 0 or c.b1 == 0:
        raise DegenerateCoefficientsError("need a0 != 0 and b1 != 0")
    m = abs(c.a0)
    sb = math.sqrt(abs(c.b1))
    ab = c.a0 * c.b0 * sb / m ** 2
    cd = c.a2 / (m * sb)
    if mu is None:
        z0 = math.nan
    else:
        if not (mu > 0 and c.b1 < 0):
            raise InvalidRegimeError("z0 needs mu > 0 and b1 < 0")
        z0 = math.sqrt(mu / abs(c.b1))
    return DerivedConstants(A=ab.real, B=ab.imag, C=cd.real, D=cd.imag, z0=z0)


def _unit(c, mu):
    if not (mu > 0 and c.b1 < 0):
        raise InvalidRegimeError(f"rescaling needs mu > 0 and b1 < 0 (mu={mu}, b1={c.b1})")
    if c.a0 == 0:
        raise DegenerateCoefficientsError("a0 = 0")
    return math.sqrt(mu / abs(c.b1)) * abs(c.a0)


def phys_to_rescaled(c, p):
    s = _unit(c, p.mu)
    return RescaledParams(rho=p.gamma / s, omega=p.beta / s, mu=p.mu)


def rescaled_to_phys(c, r):
    s = _unit(c, r.mu)
    return PhysParams(gamma=r.rho * s, beta=r.omega * s, mu=r.mu)


def alpha0(c):
    return 2.0 * math.sqrt(abs(c.b1)) / abs(c.a0)


def in_window(c, r, K1=10.0, K2=0.1, K3=10.0):
    """|rho| <= K1 sqrt(mu) and K2 mu <= -s (omega - s + D sqrt(mu)) <= K3 mu,
    s = sign(B)."""
    k = derived_constants(c)
    s = math.copysign(1.0, k.B)
    sm = math.sqrt(r.mu)
    gap = -s * (r.omega - s + k.D * sm)
    return abs(r.rho) <= K1 * sm and K2 * r.mu <= gap <= K3 * r.mu


@dataclass(frozen=True)
class SMReduction:
    mu1: float
    mu2: float
    alpha: float
    lam: float
    x_scale: float
    y_scale: float
    z_scale: float
    t_scale: float
    rho_shift: float
    omega_shift: float
    sign_b: float

    def matrix(self):
        """Linear part M of s = (0, 0, 1) + M X."""
        p, w = 1.0 - self.rho_shift, self.omega_shift
        return np.array([[self.x_scale, 0.0, 0.0],
                         [p * self.x_scale / w, -self.y_scale / w, 0.0],
                         [0.0, 0.0, self.z_scale]])

    def to_rescaled(self, X):
        return np.array([0.0, 0.0, 1.0]) + self.matrix() @ np.asarray(X, dtype=float)

    def from_rescaled(self, s):
        d = np.asarray(s, dtype=float) - np.array([0.0, 0.0, 1.0])
        return np.linalg.solve(self.matrix(), d)

    @property
    def sm_params(self):
        return SMParams(self.alpha, self.lam)


def sm_reduction(c, r):
    k = derived_constants(c)
    if k.B == 0:
        raise DegenerateCoefficientsError("B = 0: no Shimizu-Morioka scaling")
    sm = math.sqrt(r.mu)
    rho_p = r.rho - k.C * sm
    omega_p = r.omega + k.D * sm
    mu1 = 1.0 - omega_p ** 2 - rho_p ** 2
    mu2 = -2.0 * rho_p
    if not mu1 > 0:
        raise OutsideWindowError(f"mu1 = {mu1} <= 0")
    if omega_p == 0:
        raise OutsideWindowError("omega' = 0")
    root = math.sqrt(mu1)
    nb = math.sqrt(8.0 * abs(k.B))
    return SMReduction(
        mu1=mu1, mu2=mu2,
        alpha=alpha0(c) * sm / root,
        lam=-mu2 / root,
        x_scale=mu1 ** 0.75 / nb,
        y_scale=mu1 ** 1.25 / nb,
        z_scale=-mu1 / 2.0,
        t_scale=root,
        rho_shift=rho_p, omega_shift=omega_p,
        sign_b=math.copysign(1.0, k.B))


def transformed_field(c, r, red=None):
    """The rescaled field written in the coordinates and time of the
    Shimizu-Morioka scaling, as a callable X -> dX/dtau."""
    red = red or sm_reduction(c, r)
    G = rescaled_field(c, r)
    M = red.matrix()
    Minv = np.linalg.inv(M)

    def F(X):
        return Minv @ G(red.to_rescaled(X)) / red.t_scale
    return F


def sm_point_to_rescaled(c, sm, mu):
    if not mu > 0:
        raise InvalidRegimeError("mu must be positive")
    k = derived_constants(c)
    if k.B == 0:
        raise DegenerateCoefficientsError("B = 0")
    mu1 = alpha0(c) ** 2 * mu / sm.alpha ** 2
    if mu1 >= 1:
        raise MuTooLargeError(f"mu1 = {mu1} >= 1")
    rho_p = sm.lam * math.sqrt(mu1) / 2.0
    rad = 1.0 - mu1 - rho_p ** 2
    if rad < 0:
        raise MuTooLargeError("no real omega for this (alpha, lambda, mu)")
    s = math.copysign(1.0, k.B)
    sq = math.sqrt(mu)
    return RescaledParams(rho=k.C * sq + rho_p, omega=s * math.sqrt(rad) - k.D * sq, mu=mu)


def sm_point_to_phys(c, sm, mu):
    return rescaled_to_phys(c, sm_point_to_rescaled(c, sm, mu))


def sm_residual(c, r, radius=1.0, n_samples=100, seed=0):
    """Max over a uniform sample of the ball of |F_transformed - F_SM|."""
    red = sm_reduction(c, r)
    F = transformed_field(c, r, red)
    ref = sm_field(red.sm_params)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n_samples, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v *= radius * rng.random(n_samples)[:, None] ** (1.0 / 3.0)
    return float(max(np.linalg.norm(F(X) - ref(X)) for X in v))


@dataclass(frozen=True)
class HetCurveCoeffs:
    k1: float
    k2: float


def het_curve_coeffs(c):
    """rho = 1/2 + k1 sqrt(mu) + k2 omega + ... with sqrt|b1| throughout."""
    k = derived_constants(c)
    A, B = k.A, k.B
    if A >= 0:
        raise WrongCaseError(f"heteroclinic surface formula needs A < 0, got {A}")
    m = abs(c.a0)
    sb = math.sqrt(abs(c.b1))
    q = c.a3 / c.a0 ** 2
    k1 = (sb / (12 * m)
          + (c.a1.real + c.a1.imag * B / (3 * A)) / (12 * abs(A) * m)
          + (c.a2.real - c.a2.imag * B / (6 * A)) / (3 * m * sb)
          + (q.real + q.imag * B / (3 * A)) * m / (12 * abs(A))
          + c.b2 / (24 * abs(A) * m))
    k2 = (math.pi ** 2 - 9) * B / (3 * A)
    return HetCurveCoeffs(k1=k1, k2=k2)


def omega_plus_coefficient(c):
    """Leading coefficient w of the arrival angle Omega+ = w sqrt(mu) + O(mu)."""
    k = derived_constants(c)
    if k.A >= 0:
        raise WrongCaseError("needs A < 0")
    m = abs(c.a0)
    sb = math.sqrt(abs(c.b1))
    q = c.a3 / c.a0 ** 2
    return -(c.a1.imag / m + abs(k.A) * c.a2.imag / (m * sb) + q.imag * m) / (6 * k.A)
