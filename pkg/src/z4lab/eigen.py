"""Eigenvalues of 3x3 real matrices from the characteristic cubic."""

import cmath
import math

import numpy as np

_OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)


def char_poly(M):
    """Coefficients (a, b, c) of det(lambda I - M) = lambda^3 + a lambda^2 + b lambda + c."""
    M = np.asarray(M, dtype=float)
    a = -(M[0, 0] + M[1, 1] + M[2, 2])
    b = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
         + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
         + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    c = -(M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))
    return a, b, c


def _polish(r, a, b, c, iters=3):
    for _ in range(iters):
        pv = ((r + a) * r + b) * r + c
        dp = (3.0 * r + 2.0 * a) * r + b
        if dp == 0:
            break
        r_new = r - pv / dp
        if abs(((r_new + a) * r_new + b) * r_new + c) < abs(pv):
            r = r_new
        else:
            break
    return r


def cubic_roots(a, b, c):
    """Roots of lambda^3 + a lambda^2 + b lambda + c with real coefficients.

    Conjugate pairs come out exactly conjugate and real roots exactly real.
    """
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = (q / 2.0) ** 2 + abs(p / 3.0) ** 3
    if scale == 0.0:
        r = -shift
        return np.array([r, r, r], dtype=complex)
    near_double = abs(disc) <= 1e-12 * scale

    sq = cmath.sqrt(disc)
    w = -q / 2.0 + sq
    if abs(-q / 2.0 - sq) > abs(w):
        w = -q / 2.0 - sq
    u = w ** (1.0 / 3.0) if w != 0 else 0j
    roots = []
    for m in range(3):
        um = u * _OMEGA ** m
        vm = -p / (3.0 * um) if um != 0 else 0j
        roots.append(um + vm - shift)
    roots = [_polish(r, a, b, c) for r in roots]

    if disc < 0.0 or near_double:
        out = [complex(r.real, 0.0) for r in roots]
        if near_double:
            out = [complex(_polish(r.real, a, b, c), 0.0) for r in out]
    else:
        i_real = min(range(3), key=lambda i: abs(roots[i].imag))
        real_root = _polish(roots[i_real].real, a, b, c)
        rest = [roots[i] for i in range(3) if i != i_real]
        re = 0.5 * (rest[0].real + rest[1].real)
        im = 0.5 * (abs(rest[0].imag) + abs(rest[1].imag))
        out = [complex(real_root, 0.0), complex(re, im), complex(re, -im)]
    return np.array(out, dtype=complex)


def sort_eigenvalues(ev):
    return np.array(sorted(ev, key=lambda v: (-v.real, -v.imag)), dtype=complex)


def eig3(M):
    """Eigenvalues of a real 3x3 matrix, sorted by decreasing real part."""
    return sort_eigenvalues(cubic_roots(*char_poly(M)))


def real_eigenvector(M, lam):
    """Unit null vector of M - lam I for a simple real eigenvalue lam."""
    A = np.asarray(M, dtype=float) - lam * np.eye(3)
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(A[i], A[j])
        if best is None or np.linalg.norm(v) > np.linalg.norm(best):
            best = v
    n = np.linalg.norm(best)
    if n == 0:
        raise ValueError("eigenvalue is not simple")
    return best / n
