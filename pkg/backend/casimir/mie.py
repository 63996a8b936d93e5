"""
Mie scattering coefficients of a dielectric sphere in a dielectric background,
their static-polarizability limits, and the loop couplings built from them.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from .constants import COUPLING_FULL, COUPLING_STATIC
from .exceptions import SingularArgumentError
from .specfun import bessel_j_sequence, derivative_sequence, hankel_h1_sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MaterialPair:
    """Static permittivity of a sphere, of its background, and the sphere radius (m)"""

    eps_sphere: float
    eps_background: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        for name in ('eps_sphere', 'eps_background'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be finite and positive, got {value}")
        if not math.isfinite(self.radius) or self.radius <= 0:
            raise ValidationError(f"radius must be positive, got {self.radius}")

    @property
    def relative_index(self):
        """Refractive index of the sphere relative to the background"""
        return math.sqrt(self.eps_sphere / self.eps_background)



def _double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def reduced_polarizability(L, mat):
    """Dimensionless multipole polarizability (eps/eps_B - 1) / (eps/eps_B + (L+1)/L)"""
    if L < 1:
        raise ValueError(f"Multipole order must be >= 1, got {L}")
    ratio = mat.eps_sphere / mat.eps_background
    return (ratio - 1.0) / (ratio + (L + 1.0) / L)


def static_polarizability(L, mat):
    """Static multipole polarizability alpha_L in m^(2L+1)"""
    return reduced_polarizability(L, mat) * mat.radius ** (2 * L + 1)


def small_argument_prefactor(L):
    """(L+1) / (L (2L+1)!! (2L-1)!!), the coefficient of the leading Mie term"""
    return (L + 1) / (L * _double_factorial(2 * L + 1) * _double_factorial(2 * L - 1))


def mie_alpha_leading(L, mat, kR):
    """Leading small-argument form of the TM coefficient"""
    x = np.asarray(kR, dtype=np.complex128)
    value = -1j * small_argument_prefactor(L) * x ** (2 * L + 1) * reduced_polarizability(L, mat)
    return value if np.ndim(value) else complex(value)


def _riccati(L, x, m):
    """psi_n, psi_n' at m x and at x, and xi_n, xi_n' at x, for n = 0..L"""
    mx = m * x
    j_in = bessel_j_sequence(L + 1, mx)
    j_out = bessel_j_sequence(L + 1, x)
    h_out = hankel_h1_sequence(L + 1, x)
    dj_in = derivative_sequence(j_in, mx)
    dj_out = derivative_sequence(j_out, x)
    dh_out = derivative_sequence(h_out, x)
    psi_in = mx * j_in
    dpsi_in = j_in + mx * dj_in
    psi_out = x * j_out
    dpsi_out = j_out + x * dj_out
    xi_out = x * h_out
    dxi_out = h_out + x * dh_out
    return psi_in, dpsi_in, psi_out, dpsi_out, xi_out, dxi_out


def _mie_coefficients(L, mat, kR):
    x = np.asarray(kR, dtype=np.complex128)
    if np.any(x == 0):
        raise SingularArgumentError("Mie coefficients are singular at kR = 0; use static_polarizability")
    m = mat.relative_index
    psi_in, dpsi_in, psi_out, dpsi_out, xi_out, dxi_out = _riccati(L, x, m)
    a = ((m * psi_in[L] * dpsi_out[L] - psi_out[L] * dpsi_in[L])
         / (m * psi_in[L] * dxi_out[L] - xi_out[L] * dpsi_in[L]))
    b = ((psi_in[L] * dpsi_out[L] - m * psi_out[L] * dpsi_in[L])
         / (psi_in[L] * dxi_out[L] - m * xi_out[L] * dpsi_in[L]))
    return a, b


def mie_alpha(L, mat, kR):
    """TM (electric) Mie coefficient a_L at background size parameter kR"""
    a, _ = _mie_coefficients(L, mat, kR)
    return a if np.ndim(a) else complex(a)


def mie_beta(L, mat, kR):
    """TE (magnetic) Mie coefficient b_L at background size parameter kR"""
    _, b = _mie_coefficients(L, mat, kR)
    return b if np.ndim(b) else complex(b)


def loop_couplings(mat, l_max, kappa_r, coupling=COUPLING_STATIC, te_channel=False, radius=1.0):
    """
    Couplings C = -T at imaginary wavenumber kappa for l = 1..l_max.

    ``kappa_r`` is kappa in units of the length scale that ``radius`` is expressed
    in. Returns ``(te, tm)`` real arrays of shape ``kappa_r.shape + (l_max,)``.
    The static form keeps only the leading small-argument term of a_l; its TE
    part vanishes for non-magnetic spheres.
    """
    y = np.asarray(kappa_r, dtype=float) * radius
    tm = np.zeros(y.shape + (l_max,))
    te = np.zeros(y.shape + (l_max,))
    if coupling == COUPLING_STATIC:
        for L in range(1, l_max + 1):
            tm[..., L - 1] = mie_alpha_leading(L, mat, 1j * y).real
        return te, tm
    if coupling != COUPLING_FULL:
        raise ValueError(f"Unknown coupling '{coupling}'")
    for L in range(1, l_max + 1):
        a, b = _mie_coefficients(L, mat, 1j * y)
        tm[..., L - 1] = a.real
        if te_channel:
            te[..., L - 1] = b.real
    return te, tm
