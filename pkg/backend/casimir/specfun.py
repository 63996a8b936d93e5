"""
Spherical Bessel, Neumann and Hankel functions for real and complex arguments,
Wigner 3j and Gaunt coefficients, spherical harmonics and Wigner rotation
matrices.

The ``*_sequence`` functions return every order ``0..L`` at once, stacked along
the first axis, and accept scalar or array arguments.
"""
import logging
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, lpmv

from .constants import MAX_IMAGINARY_ARGUMENT
from .exceptions import ArgumentOverflowError, SingularArgumentError

logger = logging.getLogger(__name__)

SERIES_TERMS = 60
MILLER_OFFSET = 40
RESCALE_THRESHOLD = 1e200
EXACT_3J_LIMIT = 40


def _as_complex(x):
    return np.asarray(x, dtype=np.complex128)


def _check_overflow(x):
    if np.any(np.abs(x.imag) > MAX_IMAGINARY_ARGUMENT):
        raise ArgumentOverflowError(
            f"|Im x| exceeds {MAX_IMAGINARY_ARGUMENT}; use the scaled Hankel functions"
        )


def _check_nonzero(x, name):
    if np.any(x == 0):
        raise SingularArgumentError(f"{name} is singular at x = 0")


def _j_series(order, x):
    """Power series of j_order(x); accurate for |x| below max(1, order/2)"""
    x = _as_complex(x)
    half_sq = -0.5 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, SERIES_TERMS):
        term = term * half_sq / (k * (2 * order + 2 * k + 1))
        total = total + term
    double_factorial = math.prod(range(1, 2 * order + 2, 2))
    return x ** order / double_factorial * total


def _j_miller(L, x):
    """Downward (Miller) recurrence for j_0..j_L, normalised on j_0 or j_1"""
    x = _as_complex(x)
    start = int(max(L, float(np.max(np.abs(x)))) + MILLER_OFFSET
                + 2.0 * math.sqrt(float(np.max(np.abs(x))) + 1.0))
    values = np.zeros((L + 1,) + x.shape, dtype=np.complex128)
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    for n in range(start, 0, -1):
        lower = (2 * n + 1) / x * current - upper
        scale = np.where(np.abs(lower) > RESCALE_THRESHOLD, 1.0 / RESCALE_THRESHOLD, 1.0)
        lower = lower * scale
        current = current * scale
        values = values * scale
        if n <= L:
            values[n] = current
        upper, current = current, lower
    values[0] = current

    j0 = np.sin(x) / x
    j1 = np.sin(x) / (x * x) - np.cos(x) / x
    use_j0 = np.abs(j0) >= np.abs(j1)
    if L >= 1:
        norm = np.where(use_j0, j0 / values[0], j1 / values[1])
    else:
        norm = j0 / values[0]
    return values * norm


def bessel_j_sequence(L, x):
    """j_0(x)..j_L(x)"""
    x = _as_complex(x)
    _check_overflow(x)
    out = np.empty((L + 1,) + x.shape, dtype=np.complex128)
    small = np.abs(x) < 1.0
    safe_x = np.where(small, 1.0, x)
    miller = _j_miller(L, safe_x)
    for n in range(L + 1):
        use_series = np.abs(x) < max(1.0, 0.5 * n)
        out[n] = np.where(use_series, _j_series(n, x), miller[n])
    return out


def neumann_n_sequence(L, x):
    """n_0(x)..n_L(x) by upward recurrence"""
    x = _as_complex(x)
    _check_nonzero(x, 'spherical_neumann_n')
    _check_overflow(x)
    out = np.empty((L + 1,) + x.shape, dtype=np.complex128)
    out[0] = -np.cos(x) / x
    if L >= 1:
        out[1] = -np.cos(x) / (x * x) - np.sin(x) / x
    for n in range(1, L):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def hankel_h1_sequence(L, x):
    """h+_0(x)..h+_L(x), composed as j + i n"""
    return bessel_j_sequence(L, x) + 1j * neumann_n_sequence(L, x)


def scaled_hankel_sequence(L, x):
    """exp(-i x) h+_n(x) for n = 0..L, free of the exponential growth or decay"""
    x = _as_complex(x)
    _check_nonzero(x, 'scaled_hankel_sequence')
    out = np.empty((L + 1,) + x.shape, dtype=np.complex128)
    out[0] = -1j / x
    if L >= 1:
        out[1] = -(x + 1j) / (x * x)
    for n in range(1, L):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def derivative_sequence(values, x):
    """Derivatives f'_0..f'_L from f_0..f_L using f'_n = f_{n-1} - (n+1) f_n / x"""
    x = _as_complex(x)
    L = values.shape[0] - 1
    out = np.empty_like(values)
    out[0] = -values[1] if L >= 1 else np.nan
    for n in range(1, L + 1):
        out[n] = values[n - 1] - (n + 1) * values[n] / x
    return out


def spherical_bessel_j(L, x):
    """Spherical Bessel function j_L(x)"""
    return complex(bessel_j_sequence(L, x)[L])


def spherical_neumann_n(L, x):
    """Spherical Neumann function n_L(x)"""
    return complex(neumann_n_sequence(L, x)[L])


def spherical_hankel_h1(L, x):
    """Outgoing spherical Hankel function h+_L(x) = j_L(x) + i n_L(x)"""
    return complex(hankel_h1_sequence(L, x)[L])


class RadialFunctionTriple:
    """Values of j, n and h+ of one order at one argument"""

    def __init__(self, order, x):
        self.order = order
        self.x = complex(x)
        self.j = spherical_bessel_j(order, x)
        self.n = spherical_neumann_n(order, x)
        self.h_plus = self.j + 1j * self.n

    def __repr__(self):
        return f"RadialFunctionTriple(order={self.order}, x={self.x})"


# Angular momentum coupling


def _triangle_ok(j1, j2, j3):
    return abs(j1 - j2) <= j3 <= j1 + j2


def _racah_terms(j1, j2, j3, m1, m2, m3):
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    return k_min, k_max


def _wigner_3j_exact(j1, j2, j3, m1, m2, m3):
    fact = math.factorial
    delta = Fraction(fact(j1 + j2 - j3) * fact(j1 - j2 + j3) * fact(-j1 + j2 + j3),
                     fact(j1 + j2 + j3 + 1))
    prefactor_sq = delta * (fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2)
                            * fact(j3 + m3) * fact(j3 - m3))
    k_min, k_max = _racah_terms(j1, j2, j3, m1, m2, m3)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denominator = (fact(k) * fact(j1 + j2 - j3 - k) * fact(j1 - m1 - k)
                       * fact(j2 + m2 - k) * fact(j3 - j2 + m1 + k) * fact(j3 - j1 - m2 + k))
        total += Fraction((-1) ** k, denominator)
    if total == 0:
        return 0.0
    sign = (-1) ** (j1 - j2 - m3) * (1 if total > 0 else -1)
    return sign * math.sqrt(prefactor_sq * total * total)


def _wigner_3j_float(j1, j2, j3, m1, m2, m3):
    log_prefactor = 0.5 * (gammaln(j1 + j2 - j3 + 1) + gammaln(j1 - j2 + j3 + 1)
                           + gammaln(-j1 + j2 + j3 + 1) - gammaln(j1 + j2 + j3 + 2)
                           + gammaln(j1 + m1 + 1) + gammaln(j1 - m1 + 1)
                           + gammaln(j2 + m2 + 1) + gammaln(j2 - m2 + 1)
                           + gammaln(j3 + m3 + 1) + gammaln(j3 - m3 + 1))
    k_min, k_max = _racah_terms(j1, j2, j3, m1, m2, m3)
    total = 0.0
    for k in range(k_min, k_max + 1):
        log_den = (gammaln(k + 1) + gammaln(j1 + j2 - j3 - k + 1) + gammaln(j1 - m1 - k + 1)
                   + gammaln(j2 + m2 - k + 1) + gammaln(j3 - j2 + m1 + k + 1)
                   + gammaln(j3 - j1 - m2 + k + 1))
        total += (-1) ** k * math.exp(log_prefactor - log_den)
    return (-1) ** (j1 - j2 - m3) * total


@lru_cache(maxsize=None)
def wigner_3j(j1, j2, j3, m1, m2, m3):
    """Wigner 3j symbol for integer angular momenta"""
    if m1 + m2 + m3 != 0 or not _triangle_ok(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if m1 == m2 == m3 == 0 and (j1 + j2 + j3) % 2:
        return 0.0
    if max(j1, j2, j3) <= EXACT_3J_LIMIT:
        return _wigner_3j_exact(j1, j2, j3, m1, m2, m3)
    return _wigner_3j_float(j1, j2, j3, m1, m2, m3)


@lru_cache(maxsize=None)
def gaunt_coefficient(l1, m1, l2, m2, l3, m3):
    """Integral of Y_l1m1 Y_l2m2 Y_l3m3 over the unit sphere"""
    parity = wigner_3j(l1, l2, l3, 0, 0, 0)
    if parity == 0.0:
        return 0.0
    orientation = wigner_3j(l1, l2, l3, m1, m2, m3)
    if orientation == 0.0:
        return 0.0
    norm = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4.0 * math.pi))
    return norm * parity * orientation


def warm_up(l_max):
    """Fill the 3j and rotation caches used by translations up to l_max"""
    p_max = 2 * l_max + 1
    for l in range(0, l_max + 2):
        for q in range(0, l_max + 2):
            for p in range(abs(l - q), min(l + q, p_max) + 1):
                wigner_3j(l, q, p, 0, 0, 0)
                for m in range(-min(l, q), min(l, q) + 1):
                    wigner_3j(l, q, p, m, -m, 0)
    for l in range(1, l_max + 2):
        _small_d_terms(l)
    logger.debug(f"Coupling tables warmed up to l_max={l_max}")


# Spherical harmonics and rotations


def spherical_harmonic(l, m, theta, phi):
    """Y_lm(theta, phi) with the Condon-Shortley phase"""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    norm = np.exp(0.5 * (np.log((2 * l + 1) / (4.0 * np.pi))
                         + gammaln(l - am + 1) - gammaln(l + am + 1)))
    value = norm * lpmv(am, l, np.cos(theta)) * np.exp(1j * am * phi)
    if m < 0:
        value = (-1) ** am * np.conj(value)
    return value


@lru_cache(maxsize=None)
def _small_d_terms(l):
    """(row, column, coefficient, cos power, sin power) for every term of d^l"""
    fact = math.factorial
    rows, cols, coefs, cos_pow, sin_pow = [], [], [], [], []
    for i, mp in enumerate(range(-l, l + 1)):
        for k, m in enumerate(range(-l, l + 1)):
            root = math.sqrt(fact(l + mp) * fact(l - mp) * fact(l + m) * fact(l - m))
            for s in range(max(0, m - mp), min(l + m, l - mp) + 1):
                den = fact(l + m - s) * fact(s) * fact(mp - m + s) * fact(l - mp - s)
                rows.append(i)
                cols.append(k)
                coefs.append((-1) ** (mp - m + s) * root / den)
                cos_pow.append(2 * l + m - mp - 2 * s)
                sin_pow.append(mp - m + 2 * s)
    return (np.array(rows), np.array(cols), np.array(coefs),
            np.array(cos_pow), np.array(sin_pow))


def wigner_small_d(l, beta, derivative=False):
    """
    Wigner small-d matrix d^l_{m'm}(beta), rows m' and columns m from -l to l.

    With ``derivative=True`` the element-wise derivative with respect to beta is
    returned instead. ``beta`` may be an array; the matrix axes come last.
    """
    beta = np.asarray(beta, dtype=float)
    rows, cols, coefs, a, b = _small_d_terms(l)
    c = np.cos(0.5 * beta)[..., None]
    s = np.sin(0.5 * beta)[..., None]
    if derivative:
        first = np.where(a > 0, -a * c ** np.maximum(a - 1, 0) * s ** (b + 1), 0.0)
        second = np.where(b > 0, b * c ** (a + 1) * s ** np.maximum(b - 1, 0), 0.0)
        terms = 0.5 * coefs * (first + second)
    else:
        terms = coefs * c ** a * s ** b
    size = 2 * l + 1
    scatter = np.zeros((rows.size, size * size))
    scatter[np.arange(rows.size), rows * size + cols] = 1.0
    return (terms @ scatter).reshape(beta.shape + (size, size))


def wigner_D(l, alpha, beta, derivative=None):
    """
    Rotation matrix D^l_{m'm}(alpha, beta, 0) = exp(-i m' alpha) d^l_{m'm}(beta).

    ``derivative`` may be ``'alpha'`` or ``'beta'`` for the matching partial derivative.
    """
    alpha = np.asarray(alpha, dtype=float)
    mp = np.arange(-l, l + 1)
    phase = np.exp(-1j * mp * alpha[..., None])[..., :, None]
    small = wigner_small_d(l, beta, derivative=(derivative == 'beta'))
    out = phase * small
    if derivative == 'alpha':
        out = out * (-1j * mp)[:, None]
    return out
