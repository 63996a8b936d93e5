"""
Two-sphere interaction as a multipole series.

At zero temperature every (l, q) multipole pair contributes a pure power of the
separation x = r / R1:

    V = -sum alpha1_l alpha2_q (v~_lq / x**(3+2l+2q) + w~_lq / x**(5+2l+2q))
    F = -sum alpha1_l alpha2_q (v_lq / x**(4+2l+2q) + w_lq / x**(6+2l+2q))

The coefficients come from integrating the pair loop at unit separation; the
w terms are the curvature corrections of the stress kernel. At finite temperature
the frequency integral becomes a Matsubara sum of exponentially damped terms.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from .constants import ENERGY_UNIT_FACTOR, mode_count, mode_index
from .diagrams import enumerate_simply_connected
from .ensemble_models import build_ensemble
from .exceptions import OverlapError
from .force import StressKernel, loop_traces, path_ordered_product
from .mie import reduced_polarizability, small_argument_prefactor
from .spectral import build_zero_T_grid, matsubara_spacing
from .translation import KIND_OUTGOING, TranslationOperator, translation_blocks

logger = logging.getLogger(__name__)

MATSUBARA_TAIL_TOLERANCE = 0.01


@dataclass
class SeriesTerm:
    l: int
    q: int
    v: float
    w: float
    potential: float
    force: float


@dataclass
class TwoSphereSeries:
    """Potential (hbar c / 4 pi R1) and z-force on sphere 1 (hbar c / 4 pi R1**2)"""

    separation: float
    potential: float
    force: float
    max_order: int
    terms: list = field(default_factory=list)


@dataclass
class MatsubaraTerm:
    index: int
    kappa: float
    damping: float
    potential: float
    force: float


@dataclass
class ThermalSeries:
    separation: float
    temperature: float
    potential: float
    force: float
    terms: list = field(default_factory=list)


def _single_multipole(L, l_max, kappa):
    """Unit-polarizability static coupling of multipole L on the mode axis"""
    n = mode_count(l_max)
    diagonal = np.zeros(kappa.shape + (2 * n,))
    value = (-1) ** L * small_argument_prefactor(L) * kappa ** (2 * L + 1)
    for m in range(-L, L + 1):
        diagonal[..., n + mode_index(L, m)] = value
    return diagonal


@lru_cache(maxsize=None)
def pair_coefficients(max_order, eps_background=1.0, n_nodes=None):
    """
    Potential coefficients (v~, w~) of every (l, q) pair, l, q = 1..max_order.

    The loop is integrated at unit separation with unit polarizabilities; the
    integrand is exp(-X) times a polynomial, so the quadrature is exact.
    """
    n_nodes = n_nodes or settings.CASIMIR_QUADRATURE_NODES
    grid = build_zero_T_grid(n_nodes)
    loop_length = 2.0
    kappa = grid.nodes / loop_length
    k = 1j * kappa
    operators = []
    for sign in (1.0, -1.0):
        A, B, _, _ = translation_blocks(max_order, k, np.array([0.0, 0.0, sign]),
                                        kind=KIND_OUTGOING, scaled=True)
        operators.append(TranslationOperator(max_order, A, B, None, scaled=True).matrix)

    kernel = StressKernel(max_order, eps_background)
    v = np.zeros((max_order, max_order))
    w = np.zeros((max_order, max_order))
    for l in range(1, max_order + 1):
        for q in range(1, max_order + 1):
            couplings = [_single_multipole(l, max_order, kappa), _single_multipole(q, max_order, kappa)]
            trace = np.trace(path_ordered_product(couplings, operators), axis1=-2, axis2=-1).real
            # v~ is minus the loop energy at unit separation
            scale = ENERGY_UNIT_FACTOR / loop_length
            v[l - 1, q - 1] = scale * grid.integrate(trace)
            w[l - 1, q - 1] = scale * grid.integrate(trace * kernel.curvature_coefficient(l) * kappa ** 2)
    v.setflags(write=False)
    w.setflags(write=False)
    return v, w


def force_coefficients(max_order, eps_background=1.0):
    """(v, w) of the force series from the potential coefficients"""
    v_tilde, w_tilde = pair_coefficients(max_order, eps_background)
    order = np.add.outer(np.arange(1, max_order + 1), np.arange(1, max_order + 1))
    return (3 + 2 * order) * v_tilde, (5 + 2 * order) * w_tilde


def _check_pair(mat1, mat2, r):
    if not math.isclose(mat1.eps_background, mat2.eps_background):
        raise ValidationError("Both spheres must share the background permittivity")
    radii_sum = mat1.radius + mat2.radius
    if r < radii_sum * (1.0 - 1e-12):
        raise OverlapError(1, 2, r, radii_sum)
    if r <= radii_sum * (1.0 + 1e-12):
        logger.warning("Spheres touch; the multipole series converges slowly")


def two_sphere_retarded_series(mat1, mat2, r, max_order=None, curvature=False):
    """Zero-temperature potential and force between two spheres a distance r (m) apart"""
    max_order = max_order or settings.CASIMIR_L_MAX
    _check_pair(mat1, mat2, r)
    eps_background = mat1.eps_background
    x = r / mat1.radius
    rho2 = mat2.radius / mat1.radius
    v_tilde, w_tilde = pair_coefficients(max_order, eps_background)
    v, w = force_coefficients(max_order, eps_background)
    medium = 1.0 / math.sqrt(eps_background)

    terms = []
    by_order = {}
    for l in range(1, max_order + 1):
        for q in range(1, max_order + 1):
            strength = (medium * reduced_polarizability(l, mat1)
                        * reduced_polarizability(q, mat2) * rho2 ** (2 * q + 1))
            power = 3 + 2 * l + 2 * q
            potential = -strength * v_tilde[l - 1, q - 1] / x ** power
            force = -strength * v[l - 1, q - 1] / x ** (power + 1)
            if curvature:
                potential -= strength * w_tilde[l - 1, q - 1] / x ** (power + 2)
                force -= strength * w[l - 1, q - 1] / x ** (power + 3)
            terms.append(SeriesTerm(l, q, float(v[l - 1, q - 1]), float(w[l - 1, q - 1]), potential, force))
            by_order[l + q] = by_order.get(l + q, 0.0) + force

    sizes = [abs(by_order[s]) for s in sorted(by_order)]
    if any(later > earlier > 0 for earlier, later in zip(sizes, sizes[1:])):
        logger.warning(f"Multipole series grows at x={x:.4g}; the separation is too small for max_order={max_order}")

    return TwoSphereSeries(x, sum(t.potential for t in terms), sum(t.force for t in terms), max_order, terms)


def two_sphere_finite_T(mat1, mat2, r, temperature, l_max=None, max_order=None, curvature=False):
    """
    Matsubara-summed potential and force between two spheres at temperature T.

    Term l is evaluated at kappa_l = l * pi k_B T sqrt(eps_B) R1 / (hbar c) and
    carries the damping exp(-2 x kappa_l).
    """
    l_max = l_max or settings.CASIMIR_MATSUBARA_L_MAX
    max_order = max_order or settings.CASIMIR_L_MAX
    if temperature <= 0:
        raise ValidationError(f"Finite-temperature series needs T > 0, got {temperature}")
    _check_pair(mat1, mat2, r)
    eps_background = mat1.eps_background
    ensemble = build_ensemble([(0.0, 0.0, r), (0.0, 0.0, 0.0)], [mat1, mat2], eps_background, temperature)
    diagram = enumerate_simply_connected(ensemble, 1)[0]
    x = r / mat1.radius

    spacing = matsubara_spacing(temperature, mat1.radius, eps_background)
    kappa = spacing * np.arange(1, l_max + 1)
    kernel = StressKernel(max_order, eps_background) if curvature else None
    (trace, grad), = loop_traces(ensemble, diagram, max_order, kappa, kernel=kernel)
    damping = np.exp(-2.0 * x * kappa)
    prefactor = -ENERGY_UNIT_FACTOR / math.sqrt(eps_background) * spacing

    terms = [
        MatsubaraTerm(l, float(kappa[l - 1]), float(damping[l - 1]),
                      float(prefactor * damping[l - 1] * trace[l - 1].real),
                      float(-prefactor * damping[l - 1] * grad[2, l - 1].real))
        for l in range(1, l_max + 1)
    ]
    force = sum(t.force for t in terms)
    if force != 0 and abs(terms[-1].force) > MATSUBARA_TAIL_TOLERANCE * abs(force):
        logger.warning(f"Matsubara sum truncated at l_max={l_max} while its last term is "
                       f"{abs(terms[-1].force / force):.2%} of the total")
    return ThermalSeries(x, temperature, sum(t.potential for t in terms), force, terms)
