"""
Free dyadic Green tensor of the Helmholtz operator and its composition rule.

    g(r) = exp(i k r) / (4 pi r)
    G(x, y) = (I + grad grad / k**2) g(|x - y|)

The composition rule integral d3z g(x - z) g(z - y) = (1 / 2k) d/dk g(x - y) is
checked numerically after reducing the angular part analytically. Only the
validation suite uses this module.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SingularArgumentError
from .specfun import bessel_j_sequence, hankel_h1_sequence

logger = logging.getLogger(__name__)

DAMPING = 1e-4
PANEL_NODES = 16


@dataclass(frozen=True)
class GreenTensorSample:
    x: np.ndarray
    y: np.ndarray
    k: complex
    value: np.ndarray

    def swapped(self):
        return free_green_tensor(self.y, self.x, self.k)


def _separation(x, y, k):
    if k == 0:
        raise SingularArgumentError("The free Green tensor needs k != 0")
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0:
        raise SingularArgumentError("The free Green tensor diverges at x = y")
    return r, d / r


def scalar_green(r, k):
    return np.exp(1j * k * r) / (4 * math.pi * r)


def scalar_green_k_derivative(r, k):
    """d/dk of exp(i k r) / (4 pi r)"""
    return 1j * np.exp(1j * k * r) / (4 * math.pi)


def radial_hessian(r, unit, g, dg, d2g):
    """grad grad f(|x|) from f, f', f'' at r"""
    nn = np.outer(unit, unit)
    return d2g * nn + dg / r * (np.eye(3) - nn)


def free_green_tensor(x, y, k):
    """(I + grad grad / k**2) g evaluated with the analytic Hessian of g"""
    r, unit = _separation(x, y, k)
    g = scalar_green(r, k)
    dg = g * (1j * k - 1.0 / r)
    d2g = g * ((1j * k - 1.0 / r) ** 2 + 1.0 / r ** 2)
    value = g * np.eye(3) + radial_hessian(r, unit, g, dg, d2g) / k ** 2
    return GreenTensorSample(np.asarray(x, dtype=float), np.asarray(y, dtype=float), k, value)


def green_tensor_k_derivative(x, y, k):
    """Analytic d/dk of the free Green tensor"""
    r, unit = _separation(x, y, k)
    u = k * r
    prefactor = np.exp(1j * u) / (4 * math.pi * r)
    transverse = 1j * r - 1.0 / k - 2j / (k * u) + 2.0 / (k * u * u)
    longitudinal = -1j * r + 3.0 / k + 6j / (k * u) - 6.0 / (k * u * u)
    return prefactor * (transverse * np.eye(3) + longitudinal * np.outer(unit, unit))


def imaginary_green_tensor(x, y, k):
    """
    Im G for real k written with j_0 and j_1, which stays finite as x -> y.

    At coincidence it is k / (6 pi) I.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0:
        return k / (6 * math.pi) * np.eye(3)
    unit = d / r
    u = k * r
    j = bessel_j_sequence(1, u).real
    transverse = j[0] - j[1] / u
    longitudinal = -j[0] + 3.0 * j[1] / u
    return k / (4 * math.pi) * (transverse * np.eye(3) + longitudinal * np.outer(unit, unit))


def helmholtz_residual(x, y, k, step=None):
    """
    |(laplacian + k**2) G| / |G| at x, with the Laplacian from a five-point
    stencil along each axis.
    """
    r, _ = _separation(x, y, k)
    step = step or 1e-3 / abs(k)
    x = np.asarray(x, dtype=float)
    centre = free_green_tensor(x, y, k).value
    laplacian = np.zeros((3, 3), dtype=complex)
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = step
        samples = [free_green_tensor(x + n * shift, y, k).value for n in (-2, -1, 1, 2)]
        laplacian += (-samples[0] + 16 * samples[1] - 30 * centre + 16 * samples[2] - samples[3]) / (12 * step ** 2)
    return float(np.linalg.norm(laplacian + k ** 2 * centre) / np.linalg.norm(centre))


def shell_average(rho, separation, k):
    """integral dOmega g(|rho w - a|) for |a| = separation, by the addition theorem"""
    inner = np.minimum(rho, separation)
    outer = np.maximum(rho, separation)
    j0 = bessel_j_sequence(0, k * inner)[0]
    h0 = hankel_h1_sequence(0, k * outer)[0]
    return 1j * k * j0 * h0


def _panel_integral(function, start, stop, width):
    nodes, weights = np.polynomial.legendre.leggauss(PANEL_NODES)
    edges = np.linspace(start, stop, max(1, int(math.ceil((stop - start) / width))) + 1)
    total = 0.0 + 0.0j
    for lower, upper in zip(edges[:-1], edges[1:]):
        half = 0.5 * (upper - lower)
        points = lower + half * (nodes + 1.0)
        total += half * np.sum(weights * function(points))
    return total


def composed_scalar(separation, k, radius, eta=DAMPING):
    """
    integral d3z g(z) g(z - a) over |z| < radius at k (1 + i eta), averaged over
    the cut-offs radius and radius + pi / (2k).
    """
    damped = k * (1 + 1j * eta)

    def integrand(rho):
        return rho * rho * scalar_green(rho, damped) * shell_average(rho, separation, damped)

    width = 1.0 / k
    core = _panel_integral(integrand, 0.0, separation, min(width, separation))
    results = []
    for cutoff in (radius, radius + 0.5 * math.pi / k):
        results.append(core + _panel_integral(integrand, separation, cutoff, width))
    return 0.5 * (results[0] + results[1])


@dataclass
class CompositionResult:
    separation: float
    k: float
    lhs: complex
    rhs: complex
    residual: float
    radii: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    converged: bool = True


def composition_check(x, y, k, radius=None, eta=DAMPING, doublings=2, tolerance=1e-3):
    """
    Relative residual of integral d3z g(x - z) g(z - y) against (1 / 2k) d/dk g(x - y).

    The integral is repeated with the radius doubled ``doublings`` times; the check
    is flagged as not converged unless the residual shrinks and ends below
    ``tolerance``.
    Both sides are evaluated at k (1 + i eta); the identity holds at every such k.
    """
    if k <= 0:
        raise SingularArgumentError(f"The composition check needs real k > 0, got {k}")
    separation, _ = _separation(x, y, k)
    radius = radius or 60.0 / k
    damped = k * (1 + 1j * eta)
    rhs = complex(scalar_green_k_derivative(separation, damped) / (2 * damped))

    radii, residuals, lhs = [], [], 0.0
    for step in range(doublings + 1):
        current = radius * 2 ** step
        lhs = complex(composed_scalar(separation, k, current, eta))
        radii.append(current)
        residuals.append(abs(lhs - rhs) / abs(rhs))

    shrinking = all(b < a for a, b in zip(residuals, residuals[1:]))
    converged = shrinking and residuals[-1] < tolerance
    if not converged:
        logger.warning(f"Composition integral did not converge: residuals {residuals}")
    return CompositionResult(separation, k, lhs, rhs, residuals[-1], radii, residuals, converged)
