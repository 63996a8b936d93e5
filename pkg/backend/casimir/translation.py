"""
Vector spherical-wave translation operators.

A wave about one origin is re-expanded about an origin displaced by ``d``:

    M_lm(r' + d) = sum_q A_ql M'_qm(r') + B_ql N'_qm(r')
    N_lm(r' + d) = sum_q B_ql M'_qm(r') + A_ql N'_qm(r')

``kind='outgoing'`` maps outgoing waves onto regular ones (valid for |r'| < |d|),
``kind='regular'`` maps regular waves onto regular ones. The axial form is built
from Gaunt-type coupling coefficients; other directions are reached by Wigner
rotation. With ``scaled=True`` the factor exp(i k d) is removed from every entry.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import mode_count, mode_index
from .exceptions import DimensionMismatchError, SingularArgumentError
from .specfun import (
    bessel_j_sequence, derivative_sequence, hankel_h1_sequence, scaled_hankel_sequence,
    spherical_harmonic, wigner_3j, wigner_D,
)

logger = logging.getLogger(__name__)

KIND_OUTGOING = 'outgoing'
KIND_REGULAR = 'regular'
POLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TranslationOperator:
    """A and B blocks of a translation, stacked over any leading node axes"""

    l_max: int
    A: np.ndarray
    B: np.ndarray
    kd: object
    direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    kind: str = KIND_OUTGOING
    scaled: bool = False

    @property
    def size(self):
        return mode_count(self.l_max)

    @property
    def matrix(self):
        """Full operator on [M block, N block] coefficient vectors"""
        top = np.concatenate([self.A, self.B], axis=-1)
        bottom = np.concatenate([self.B, self.A], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def __matmul__(self, other):
        if other.l_max != self.l_max:
            raise DimensionMismatchError(
                f"Cannot compose translations with l_max {self.l_max} and {other.l_max}"
            )
        return self.matrix @ other.matrix

    def block(self, l, q, m):
        """(A, B) entries coupling source (l, m) to target (q, m)"""
        row, col = mode_index(q, m), mode_index(l, m)
        return self.A[..., row, col], self.B[..., row, col]


def _a_coefficient(p, m):
    return math.sqrt((p * p - m * m) / ((2 * p + 1) * (2 * p - 1)))


@lru_cache(maxsize=None)
def _axial_coefficients(l_max):
    """
    Table C[|m|, q, l, p] with S^m_ql(x) = sum_p C f_p(x), q = 0..l_max+1, l = 0..l_max.

    The table is filled once per l_max and only read afterwards.
    """
    p_max = 2 * l_max + 1
    table = np.zeros((l_max + 1, l_max + 2, l_max + 1, p_max + 1), dtype=np.complex128)
    for m in range(l_max + 1):
        for q in range(m, l_max + 2):
            for l in range(max(m, 1), l_max + 1):
                for p in range(abs(l - q), l + q + 1):
                    parity = wigner_3j(l, q, p, 0, 0, 0)
                    if parity == 0.0:
                        continue
                    coupling = parity * wigner_3j(l, q, p, m, -m, 0)
                    table[m, q, l, p] = (1j ** (p + q - l) * (2 * p + 1)
                                         * math.sqrt((2 * l + 1) * (2 * q + 1)) * (-1) ** m * coupling)
    table.setflags(write=False)
    return table


def _radial_sequences(kind, p_max, x, scaled, with_derivative):
    if kind == KIND_REGULAR:
        f = bessel_j_sequence(p_max, x)
    elif scaled:
        f = scaled_hankel_sequence(p_max, x)
    else:
        f = hankel_h1_sequence(p_max, x)
    df = derivative_sequence(f, x) if with_derivative else None
    return f, df


def _axial_blocks(l_max, x, kind=KIND_OUTGOING, scaled=False, with_derivative=False):
    """
    Axial A, B blocks (and their x-derivatives) for arguments x = k d.

    Returns arrays of shape ``x.shape + (n, n)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if kind == KIND_OUTGOING and np.any(x == 0):
        raise SingularArgumentError("Outgoing translation is singular at kd = 0")
    n = mode_count(l_max)
    table = _axial_coefficients(l_max)
    f, df = _radial_sequences(kind, 2 * l_max + 1, x, scaled, with_derivative)
    f = np.moveaxis(f, 0, -1)
    A = np.zeros(x.shape + (n, n), dtype=np.complex128)
    B = np.zeros_like(A)
    dA = np.zeros_like(A) if with_derivative else None
    dB = np.zeros_like(A) if with_derivative else None
    if with_derivative:
        df = np.moveaxis(df, 0, -1)

    for m in range(l_max + 1):
        S = np.einsum('qlp,...p->...ql', table[m], f)
        dS = np.einsum('qlp,...p->...ql', table[m], df) if with_derivative else None
        for q in range(max(m, 1), l_max + 1):
            a_low = _a_coefficient(q, m)
            a_high = _a_coefficient(q + 1, m)
            for l in range(max(m, 1), l_max + 1):
                norm = math.sqrt(q * (q + 1) / (l * (l + 1)))
                cross = 1.0 / math.sqrt(q * (q + 1) * l * (l + 1))
                ladder = a_low * S[..., q - 1, l] / q + a_high * S[..., q + 1, l] / (q + 1)
                a_val = norm * (S[..., q, l] + x * ladder)
                b_val = 1j * m * x * S[..., q, l] * cross
                if with_derivative:
                    d_ladder = a_low * dS[..., q - 1, l] / q + a_high * dS[..., q + 1, l] / (q + 1)
                    da_val = norm * (dS[..., q, l] + ladder + x * d_ladder)
                    db_val = 1j * m * (S[..., q, l] + x * dS[..., q, l]) * cross
                for sign in ((1, -1) if m else (1,)):
                    row, col = mode_index(q, sign * m), mode_index(l, sign * m)
                    A[..., row, col] = a_val
                    B[..., row, col] = sign * b_val
                    if with_derivative:
                        dA[..., row, col] = da_val
                        dB[..., row, col] = sign * db_val
    return A, B, dA, dB


def axial_translation(l_max, kd, kind=KIND_OUTGOING, scaled=False):
    """Translation along +z by d for background wavenumber k, given kd"""
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    A, B, _, _ = _axial_blocks(l_max, kd, kind=kind, scaled=scaled)
    return TranslationOperator(l_max, A, B, kd, kind=kind, scaled=scaled)


def _direction_angles(separation):
    separation = np.asarray(separation, dtype=float)
    distance = float(np.linalg.norm(separation))
    if distance == 0.0:
        raise SingularArgumentError("Translation direction undefined for zero separation")
    unit = separation / distance
    transverse = math.hypot(unit[0], unit[1])
    beta = math.atan2(transverse, unit[2])
    alpha = math.atan2(unit[1], unit[0]) if transverse > 0 else 0.0
    return distance, unit, alpha, beta


def _rotation(l_max, alpha, beta, derivative=None):
    """Block-diagonal D^l(alpha, beta, 0) over l = 1..l_max"""
    n = mode_count(l_max)
    out = np.zeros((n, n), dtype=np.complex128)
    for l in range(1, l_max + 1):
        start = l * l - 1
        out[start:start + 2 * l + 1, start:start + 2 * l + 1] = wigner_D(l, alpha, beta, derivative)
    return out


def _m_values(l_max):
    return np.concatenate([np.arange(-l, l + 1) for l in range(1, l_max + 1)])


def _rotate(block, D):
    return D @ block @ D.conj().T


def _rotate_beta_derivative(block, D, dD):
    return dD @ block @ D.conj().T + D @ block @ dD.conj().T


def translation_blocks(l_max, k, separation, kind=KIND_OUTGOING, scaled=False, gradient=False):
    """
    A, B for translation by ``separation`` at wavenumbers ``k`` (scalar or 1D array).

    Returns ``(A, B, gradA, gradB)``; the gradients have a leading axis of length 3
    and are ``None`` unless requested. For scaled operators the gradient is
    exp(-i k d) times the gradient of the unscaled operator.
    """
    k = np.asarray(k, dtype=np.complex128)
    distance, unit, alpha, beta = _direction_angles(separation)
    x = k * distance
    A0, B0, dA0, dB0 = _axial_blocks(l_max, x, kind=kind, scaled=scaled, with_derivative=gradient)
    D = _rotation(l_max, alpha, beta)
    A, B = _rotate(A0, D), _rotate(B0, D)
    if not gradient:
        return A, B, None, None

    kk = k[..., None, None]
    radial_A = kk * _rotate(dA0, D)
    radial_B = kk * _rotate(dB0, D)

    grad_A = np.multiply.outer(unit, radial_A)
    grad_B = np.multiply.outer(unit, radial_B)

    sin_beta = math.sin(beta)
    if abs(sin_beta) > POLE_TOLERANCE:
        theta_hat = np.array([math.cos(beta) * math.cos(alpha), math.cos(beta) * math.sin(alpha), -sin_beta])
        phi_hat = np.array([-math.sin(alpha), math.cos(alpha), 0.0])
        dD = _rotation(l_max, alpha, beta, derivative='beta')
        dbeta_A = _rotate_beta_derivative(A0, D, dD) / distance
        dbeta_B = _rotate_beta_derivative(B0, D, dD) / distance
        m = _m_values(l_max)
        phase = 1j * (m[None, :] - m[:, None])
        dalpha_A = phase * A / (distance * sin_beta)
        dalpha_B = phase * B / (distance * sin_beta)
        grad_A = grad_A + np.multiply.outer(theta_hat, dbeta_A) + np.multiply.outer(phi_hat, dalpha_A)
        grad_B = grad_B + np.multiply.outer(theta_hat, dbeta_B) + np.multiply.outer(phi_hat, dalpha_B)
    else:
        # on the z axis the transverse gradient is taken along two meridians
        for meridian in (0.0, 0.5 * math.pi):
            direction = np.array([math.cos(beta) * math.cos(meridian),
                                  math.cos(beta) * math.sin(meridian), -sin_beta])
            Dm = _rotation(l_max, meridian, beta)
            dDm = _rotation(l_max, meridian, beta, derivative='beta')
            grad_A = grad_A + np.multiply.outer(direction, _rotate_beta_derivative(A0, Dm, dDm) / distance)
            grad_B = grad_B + np.multiply.outer(direction, _rotate_beta_derivative(B0, Dm, dDm) / distance)
    return A, B, grad_A, grad_B


def general_translation(l_max, k, separation, kind=KIND_OUTGOING, scaled=False):
    """Translation by an arbitrary separation vector (lengths in the units of 1/k)"""
    A, B, _, _ = translation_blocks(l_max, k, separation, kind=kind, scaled=scaled)
    distance, unit, _, _ = _direction_angles(separation)
    return TranslationOperator(l_max, A, B, np.asarray(k) * distance, unit, kind, scaled)


def translation_gradient(l_max, k, separation, kind=KIND_OUTGOING, scaled=False):
    """Derivatives of the translation with respect to the x, y and z components of the separation"""
    _, _, grad_A, grad_B = translation_blocks(l_max, k, separation, kind=kind, scaled=scaled, gradient=True)
    distance, unit, _, _ = _direction_angles(separation)
    kd = np.asarray(k) * distance
    return tuple(TranslationOperator(l_max, grad_A[axis], grad_B[axis], kd, unit, kind, scaled)
                 for axis in range(3))


def vector_wave(l_max, k, points, kind=KIND_REGULAR):
    """
    M_lm and N_lm evaluated at Cartesian points.

    Returns ``(M, N)`` of shape ``points.shape[:-1] + (n, 3)``.
    """
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    theta = np.arccos(np.clip(points[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(points[..., 1], points[..., 0])
    x = k * r
    if kind == KIND_REGULAR:
        f = bessel_j_sequence(l_max + 1, x)
    else:
        f = hankel_h1_sequence(l_max + 1, x)
    df = derivative_sequence(f, x)
    r_hat = points / r[..., None]

    n = mode_count(l_max)
    M = np.zeros(points.shape[:-1] + (n, 3), dtype=np.complex128)
    N = np.zeros_like(M)
    for l in range(1, l_max + 1):
        root = math.sqrt(l * (l + 1))
        for m in range(-l, l + 1):
            Y = spherical_harmonic(l, m, theta, phi)
            up = (math.sqrt(l * (l + 1) - m * (m + 1)) * spherical_harmonic(l, m + 1, theta, phi)
                  if m < l else 0.0)
            down = (math.sqrt(l * (l + 1) - m * (m - 1)) * spherical_harmonic(l, m - 1, theta, phi)
                    if m > -l else 0.0)
            LY = np.stack(np.broadcast_arrays(0.5 * (up + down), (up - down) / 2j, m * Y), axis=-1)
            X = LY / root
            index = mode_index(l, m)
            M[..., index, :] = f[l][..., None] * X
            radial = 1j * root * (f[l] / x)[..., None] * Y[..., None] * r_hat
            tangential = ((f[l] + x * df[l]) / x)[..., None] * np.cross(r_hat, X)
            N[..., index, :] = radial + tangential
    return M, N
