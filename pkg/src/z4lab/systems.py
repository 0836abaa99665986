"""Vector fields of the Z4-symmetric cubic normal form, the symmetry S,
equilibria on the z-axis and linear stability at them.

With u = x + iy the general field is

    u' = (-gamma + i beta) u + a0 z conj(u) + a1 u^2 conj(u) + a2 z^2 u + a3 conj(u)^3
    z' = mu z + b0 u^2 + conj(b0) conj(u)^2 + b1 z^3 + b2 z |u|^2

and S(x, y, z) = (-y, x, -z).  The rescaled field is the exact pushforward
of this cubic field under

    u = z0 |b1|^(1/4) e^(i arg(a0)/2) u_new,  z = z0 z_new,  t_new = z0 |a0| t,

with z0 = sqrt(mu/|b1|).  It is again of the general form, so one compiled
kernel evaluates the general, the rescaled and the time-reversed fields.
"""

from collections import namedtuple
from dataclasses import dataclass
import cmath
import math

import numpy as np

from . import _core
from .eigen import eig3
from .errors import DegenerateCoefficientsError, InvalidRegimeError

SYMMETRY = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


@dataclass(frozen=True)
class SystemCoefficients:
    a0: complex
    a1: complex
    a2: complex
    a3: complex
    b0: complex
    b1: float
    b2: float

    def __post_init__(self):
        for name in ("a0", "a1", "a2", "a3", "b0"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        for name in ("b1", "b2"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def concrete(cls):
        """Coefficients of the concrete system studied numerically."""
        return cls(a0=-(1 - 1j) / 2, a1=(1 - 1j) / 8, a2=(3 + 1j) / 8,
                   a3=-(1 - 1j) / 8, b0=0.5, b1=-0.25, b2=-0.5)

    @property
    def nondegenerate(self):
        return self.b1 != 0 and self.a0 != 0 and self.b0 != 0

    def degeneracy_flags(self):
        return {"b1": self.b1 != 0, "a0": self.a0 != 0, "b0": self.b0 != 0}

    def replace(self, **kw):
        d = {k: getattr(self, k) for k in ("a0", "a1", "a2", "a3", "b0", "b1", "b2")}
        d.update(kw)
        return SystemCoefficients(**d)


@dataclass(frozen=True)
class PhysParams:
    gamma: float
    beta: float
    mu: float


@dataclass(frozen=True)
class RescaledParams:
    """Rescaled unfolding parameters.

    mu = 0 is accepted as the limiting system (used by the heteroclinic
    module); mu < 0 has no rescaling.
    """
    rho: float
    omega: float
    mu: float

    def __post_init__(self):
        if not self.mu >= 0:
            raise InvalidRegimeError(f"rescaled parameters need mu >= 0, got {self.mu}")


@dataclass(frozen=True)
class SMParams:
    alpha: float
    lam: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.lam > 0):
            raise InvalidRegimeError("Shimizu-Morioka parameters must be positive")


@dataclass(frozen=True)
class DerivedConstants:
    A: float
    B: float
    C: float
    D: float
    z0: float


def apply_symmetry(s):
    x, y, z = s
    return np.array([-y, x, -z], dtype=float)


class VectorField:
    """A compiled vector field: kernel ``kind`` with flat parameter vector."""

    def __init__(self, kind, params, name=""):
        self.kind = int(kind)
        self.params = np.ascontiguousarray(params, dtype=np.float64)
        self.name = name

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.array(_core.field3(self.kind, self.params, s[0], s[1], s[2]))

    def jacobian(self, s):
        s = np.asarray(s, dtype=float)
        J = np.empty((3, 3))
        _core.jac3(self.kind, self.params, s[0], s[1], s[2], J)
        return J

    def __repr__(self):
        return f"VectorField({self.name or self.kind})"


def _general_vector(gamma, beta, mu, a0, a1, a2, a3, b0, b1, b2):
    return np.array([gamma, beta, mu, a0.real, a0.imag, a1.real, a1.imag,
                     a2.real, a2.imag, a3.real, a3.imag, b0.real, b0.imag, b1, b2])


def general_field(c, p):
    v = _general_vector(p.gamma, p.beta, p.mu, c.a0, c.a1, c.a2, c.a3, c.b0, c.b1, c.b2)
    return VectorField(_core.GENERAL, v, "general")


def numeric_field(p):
    return VectorField(_core.NUMERIC, [p.gamma, p.beta, p.mu], "numeric")


def _check_rescalable(c, mu, allow_limit=False):
    if c.b1 >= 0:
        raise InvalidRegimeError(f"rescaling needs b1 < 0, got {c.b1}")
    if c.a0 == 0:
        raise DegenerateCoefficientsError("a0 = 0")
    if mu < 0 or (mu == 0 and not allow_limit):
        raise InvalidRegimeError(f"rescaling needs mu > 0, got {mu}")


def rescaled_coefficients(c, r):
    """Coefficients of the rescaled field written in the general form."""
    _check_rescalable(c, r.mu, allow_limit=True)
    m = abs(c.a0)
    sb = math.sqrt(abs(c.b1))
    sm = math.sqrt(r.mu)
    lam_z = sm * sb / m
    return dict(
        gamma=r.rho, beta=r.omega, mu=lam_z,
        a0=1.0 + 0j,
        a1=sm * c.a1 / m,
        a2=sm * c.a2 / (m * sb),
        a3=sm * c.a3 * m / c.a0 ** 2,
        b0=c.a0 * c.b0 * sb / m ** 2,
        b1=-lam_z,
        b2=sm * c.b2 / m,
    )


def rescaled_field(c, r, allow_limit=False):
    """Rescaled field; ``allow_limit`` admits the mu = 0 limiting system."""
    _check_rescalable(c, r.mu, allow_limit)
    k = rescaled_coefficients(c, r)
    v = _general_vector(k["gamma"], k["beta"], k["mu"], k["a0"], k["a1"], k["a2"],
                        k["a3"], k["b0"], k["b1"], k["b2"])
    return VectorField(_core.GENERAL, v, "rescaled")


def sm_field(sm):
    return VectorField(_core.SM, [sm.alpha, sm.lam], "shimizu-morioka")


def linear_field(M):
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError("linear field needs a 3x3 matrix")
    return VectorField(_core.LINEAR, M.ravel(), "linear")


def eval_general_field(c, p, s):
    return general_field(c, p)(s)


def eval_numeric_field(p, s):
    return numeric_field(p)(s)


def eval_rescaled_field(c, r, s):
    return rescaled_field(c, r)(s)


def eval_sm_field(sm, s):
    return sm_field(sm)(s)


def jacobian(field, s):
    return field.jacobian(s)


def finite_difference_jacobian(field, s, h=1e-6):
    s = np.asarray(s, dtype=float)
    J = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, j] = (field(s + e) - field(s - e)) / (2 * h)
    return J


# scaling between physical and rescaled phase space

def state_scale(c, mu):
    """(kappa, z0): u = kappa u_new and z = z0 z_new."""
    _check_rescalable(c, mu)
    z0 = math.sqrt(mu / abs(c.b1))
    kappa = z0 * abs(c.b1) ** 0.25 * cmath.exp(0.5j * cmath.phase(c.a0))
    return kappa, z0


def time_scale(c, mu):
    """t_new = time_scale * t."""
    return math.sqrt(mu / abs(c.b1)) * abs(c.a0)


def phys_state_to_rescaled(c, mu, s):
    kappa, z0 = state_scale(c, mu)
    u = complex(s[0], s[1]) / kappa
    return np.array([u.real, u.imag, s[2] / z0])


def rescaled_state_to_phys(c, mu, s):
    kappa, z0 = state_scale(c, mu)
    u = complex(s[0], s[1]) * kappa
    return np.array([u.real, u.imag, s[2] * z0])


AxisEquilibrium = namedtuple("AxisEquilibrium", "z stability multiplicity")


def find_axis_equilibria(c, p):
    """Equilibria of the axis dynamics z' = mu z + b1 z^3, sorted by z."""
    mu, b1 = p.mu, c.b1

    def kind(z):
        d = mu + 3 * b1 * z * z
        return "stable" if d < 0 else ("unstable" if d > 0 else "degenerate")

    if mu == 0:
        return [AxisEquilibrium(0.0, kind(0.0), 3 if b1 != 0 else 1)]
    out = [AxisEquilibrium(0.0, kind(0.0), 1)]
    if b1 != 0 and -mu / b1 > 0:
        zr = math.sqrt(-mu / b1)
        out = [AxisEquilibrium(-zr, kind(-zr), 1)] + out + [AxisEquilibrium(zr, kind(zr), 1)]
    return out


EQUILIBRIA = {"O": (0.0, 0.0, 0.0), "O+": (0.0, 0.0, 1.0), "O-": (0.0, 0.0, -1.0)}


@dataclass(frozen=True)
class SpectrumReport:
    which: str
    point: tuple
    eigenvalues: np.ndarray
    nu: float
    nu_hat: float
    a2: bool
    b3: bool
    complex_pair: bool
    dicritical: bool


def _saddle_index(ev_pm, J_pm):
    """nu = -lambda2/lambda1 at O+/O-, with lambda2 the z-axis eigenvalue."""
    if np.any(ev_pm.imag != 0):
        return math.nan, False
    l1, l2, l3 = ev_pm.real
    lz = J_pm[2, 2]
    axis_leading = abs(lz - l2) <= 1e-9 * max(1.0, abs(l2))
    a2 = l1 > 0 > l2 > l3 and l1 + l2 > 0 and axis_leading
    return -l2 / l1, a2


def spectrum_report(c, r, which):
    """Eigenvalues at O, O+ or O- of the rescaled field, with nu, nu_hat and
    the A2/B3 flags."""
    if which not in EQUILIBRIA:
        raise ValueError(f"unknown equilibrium {which!r}")
    if not r.mu > 0:
        raise InvalidRegimeError("spectrum_report needs mu > 0")
    field = rescaled_field(c, r)
    J_o = field.jacobian(EQUILIBRIA["O"])
    J_p = field.jacobian(EQUILIBRIA["O+"])
    ev_o = eig3(J_o)
    ev_p = eig3(J_p)
    nu, a2 = _saddle_index(ev_p, J_p)

    # O: unstable direction is the z-axis, stable pair in the (x, y)-plane
    lam_u = J_o[2, 2]
    stable = [v for v in ev_o if v.real < 0]
    if lam_u > 0 and len(stable) == 2:
        nu_hat = lam_u / abs(stable[0].real)
    else:
        nu_hat = math.nan
    b3 = bool(0 < nu_hat < nu < (1 + nu_hat) / 2 < 1)

    J = {"O": J_o, "O+": J_p, "O-": field.jacobian(EQUILIBRIA["O-"])}[which]
    ev = ev_o if which == "O" else eig3(J)
    complex_pair = bool(np.any(ev.imag != 0))
    dicritical = False
    if which == "O":
        st = [v for v in ev if v.real < 0]
        dicritical = (len(st) == 2 and not complex_pair
                      and abs(st[0].real - st[1].real) <= 1e-9 * abs(st[0].real))
    return SpectrumReport(which=which, point=EQUILIBRIA[which], eigenvalues=ev,
                          nu=nu, nu_hat=nu_hat, a2=bool(a2) and which != "O",
                          b3=b3, complex_pair=complex_pair, dicritical=bool(dicritical))
