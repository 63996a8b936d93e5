"""
Scaling estimate of the simply-connected N-sphere potential for many weak scatterers.

N identical spheres with dipole polarizability alpha_S = lambda / N, each with two
nearest neighbours at separation s, are dominated by the shortest closed loop of
length N s. In units of hbar c / (4 pi R), with sigma = s / R:

    leading integral   V = 4 sign_N / sigma * (lambda / (N sigma**3))**N * integral dX exp(-X) S_N(X)
    closed form        V = 4 pi sign_N exp(-N) lambda**N / (N! sigma**(1+3N))

S_N is the dipole loop around a regular N-gon of side s relative to its static
value, so S_N(0) = 1. With S_N = 1 the two forms differ by pi N**N exp(-N) / N!,
which tends to sqrt(pi / (2N)).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import gammaln

from .constants import BOLTZMANN, HBAR_C
from .spectral import spectral_context
from .three_sphere import dipole_propagator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LargeNRow:
    N: int
    V_dimensionless: float
    sign: int
    ratio: float


def _validate(N, radius, separation):
    if N < 3:
        raise ValidationError(f"The large-N estimate needs N >= 3, got {N}")
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    if separation <= 2 * radius:
        raise ValidationError(f"Neighbour separation {separation} must exceed the diameter {2 * radius}")


def loop_sign(N):
    """-(-1)**N, the sign every N-sphere loop carries"""
    return -(-1) ** N


def stirling_ratio(N):
    """pi N**N exp(-N) / N!, closed form over leading integral"""
    return math.exp(math.log(math.pi) + N * math.log(N) - N - gammaln(N + 1))


def thermal_suppression(N, separation, temperature, eps_background=1.0):
    """Matsubara sum over the loop of length N s relative to the zero-temperature integral"""
    if temperature <= 0:
        return 1.0
    spacing = math.pi * BOLTZMANN * temperature * N * separation * math.sqrt(eps_background) / HBAR_C
    return spacing / math.expm1(spacing)


def large_N_potential(N, coupling, radius, separation, temperature=0.0, eps_background=1.0):
    """Closed-form large-N potential in units of hbar c / (4 pi R)"""
    _validate(N, radius, separation)
    sigma = separation / radius
    log_magnitude = (math.log(4 * math.pi) - N + N * math.log(abs(coupling))
                     - gammaln(N + 1) - (1 + 3 * N) * math.log(sigma)) if coupling else -math.inf
    sign = loop_sign(N) * (1 if coupling >= 0 or N % 2 == 0 else -1)
    return sign * math.exp(log_magnitude) * thermal_suppression(N, separation, temperature, eps_background)

def ring_loop(N, sigma, kappa):
    """
    Tr[G_1 G_2 ... G_N] around a regular N-gon of side ``sigma`` (units of R).

    Each G is the dipole propagator with its exponential removed, at reduced
    wavenumbers ``kappa``; the result has the shape of ``kappa``.
    """
    angles = 2.0 * math.pi * np.arange(N) / N
    rho = sigma / (2.0 * math.sin(math.pi / N))
    corners = rho * np.stack([np.cos(angles), np.sin(angles), np.zeros(N)], axis=-1)
    edges = corners - np.roll(corners, -1, axis=0)
    distance = np.linalg.norm(edges, axis=-1)
    G, _ = dipole_propagator(distance, edges / distance[:, None], np.atleast_1d(kappa))
    product = G[0]
    for step in G[1:]:
        product = product @ step
    return np.trace(product, axis1=-2, axis2=-1).reshape(np.shape(kappa))


def large_N_integral(N, coupling, radius, separation, temperature=0.0, eps_background=1.0, n_nodes=None,
                     retardation=True):
    """
    Leading-order integral form evaluated on the spectral grid of the loop.

    At zero temperature the X-integral is done by Gauss-Laguerre quadrature; at
    T > 0 by the Matsubara nodes of the loop of length N s. The ring factor is a
    polynomial of degree 2N in X, so N + 1 quadrature nodes integrate it exactly.
    With ``retardation=False`` the bracket keeps only its static value.
    """
    _validate(N, radius, separation)
    sigma = separation / radius
    context = spectral_context(temperature, eps_background, n_nodes=n_nodes)
    context = context.for_loop_distance(N * separation)
    if retardation:
        shape = ring_loop(N, sigma, context.nodes / (N * sigma)) / ring_loop(N, sigma, 0.0)
    else:
        shape = np.ones(context.nodes.shape)
    static = (coupling / (N * sigma ** 3)) ** N
    return loop_sign(N) * 4.0 / sigma * static * float(context.integrate(shape))


def large_N_table(N_values, coupling, radius, separation, temperature=0.0, eps_background=1.0):
    """One row per N with the potential, its sign and the ratio to the static leading integral"""
    rows = []
    for N in N_values:
        value = large_N_potential(N, coupling, radius, separation, temperature, eps_background)
        rows.append(LargeNRow(N, value, int(np.sign(value)), stirling_ratio(N)))
    logger.info(f"Large-N estimate for {len(rows)} values of N")
    return rows
