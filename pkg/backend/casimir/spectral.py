"""
Frequency integration on the imaginary axis.

Every loop contribution has the form ``integral dX exp(-X) g(X)`` with
``X = kappa * D`` for a loop of length ``D``. At zero temperature the integral is
done by Gauss-Laguerre quadrature; at finite temperature the thermal cotangent
turns it into a sum over Matsubara nodes.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.special import roots_laguerre

from .constants import BOLTZMANN, ENERGY_UNIT_FACTOR, HBAR_C, THERMAL_POLE_TOLERANCE
from .exceptions import ThermalPoleError

logger = logging.getLogger(__name__)

MODE_ZERO_T = 'zero_T_quadrature'
MODE_MATSUBARA = 'matsubara'


@dataclass(frozen=True)
class SpectralContext:
    """
    Frequency nodes X (dimensionless) and weights for one loop length.

    For Matsubara contexts built without a loop distance the nodes are created
    per loop with ``for_loop_distance``.
    """

    mode: str
    nodes: np.ndarray
    weights: np.ndarray
    temperature: float = 0.0
    loop_distance: float = None
    eps_background: float = 1.0
    vacuum_weight: float = ENERGY_UNIT_FACTOR
    l_max: int = None

    def __post_init__(self):
        if self.mode == MODE_ZERO_T:
            if np.any(self.nodes <= 0) or np.any(self.weights <= 0):
                raise ValueError("Zero-temperature nodes and weights must be positive")

    @property
    def is_thermal(self):
        return self.mode == MODE_MATSUBARA

    def for_loop_distance(self, loop_distance):
        """Context for a loop of the given length in meters"""
        if not self.is_thermal:
            return self
        if self.loop_distance is not None and math.isclose(loop_distance, self.loop_distance):
            return self
        return build_matsubara_grid(self.temperature, loop_distance, self.eps_background, self.l_max)

    def integrate(self, values):
        """Weighted sum over the node axis (the last axis of ``values``)"""
        return np.tensordot(values, self.weights, axes=([-1], [0]))


def build_zero_T_grid(n_nodes=None, eps_background=1.0):
    """Gauss-Laguerre nodes and weights for the weight exp(-X) on (0, inf)"""
    n_nodes = n_nodes or settings.CASIMIR_QUADRATURE_NODES
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    nodes, weights = roots_laguerre(n_nodes)
    return SpectralContext(MODE_ZERO_T, nodes, weights, eps_background=eps_background)


def jacobian(loop_distance, eps_background=1.0):
    """Change of variables from kappa to X for a constant background"""
    return math.sqrt(eps_background) * loop_distance


def matsubara_spacing(temperature, loop_distance, eps_background=1.0):
    """Node spacing pi k_B T D sqrt(eps_B) / (hbar c) in X"""
    return math.pi * BOLTZMANN * temperature * jacobian(loop_distance, eps_background) / HBAR_C


def build_matsubara_grid(temperature, loop_distance, eps_background=1.0, l_max=None):
    """
    Matsubara nodes X_l = l * spacing for l = 1..l_max.

    The weight of node l is ``spacing * exp(-X_l)`` so the same scaled integrand
    serves both the quadrature and the Matsubara sum.
    """
    l_max = l_max or settings.CASIMIR_MATSUBARA_L_MAX
    if temperature <= 0:
        raise ValueError(f"Matsubara grids need T > 0, got {temperature}")
    if loop_distance <= 0:
        raise ValueError(f"Loop distance must be positive, got {loop_distance}")
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    spacing = matsubara_spacing(temperature, loop_distance, eps_background)
    nodes = spacing * np.arange(1, l_max + 1)
    weights = spacing * np.exp(-nodes)
    return SpectralContext(MODE_MATSUBARA, nodes, weights, temperature=temperature,
                           loop_distance=loop_distance, eps_background=eps_background, l_max=l_max)


def matsubara_context(temperature, eps_background=1.0, l_max=None):
    """Matsubara settings whose nodes are built per loop"""
    l_max = l_max or settings.CASIMIR_MATSUBARA_L_MAX
    return SpectralContext(MODE_MATSUBARA, np.empty(0), np.empty(0), temperature=temperature,
                           eps_background=eps_background, l_max=l_max)


def spectral_context(temperature=0.0, eps_background=1.0, n_nodes=None, l_max=None):
    """Zero-temperature quadrature for T = 0, Matsubara settings otherwise"""
    if temperature > 0:
        return matsubara_context(temperature, eps_background, l_max)
    return build_zero_T_grid(n_nodes, eps_background)


def thermal_factor(X, temperature, loop_distance, eps_background=1.0):
    """cot(hbar c X / (k_B T D sqrt(eps_B))); 1 in the zero-temperature limit"""
    if X <= 0:
        raise ValueError(f"X must be positive, got {X}")
    if temperature == 0:
        return 1.0
    argument = HBAR_C * X / (BOLTZMANN * temperature * jacobian(loop_distance, eps_background))
    nearest = round(argument / math.pi)
    if nearest >= 1 and abs(argument - nearest * math.pi) < THERMAL_POLE_TOLERANCE:
        raise ThermalPoleError(f"Thermal factor evaluated on the Matsubara pole l={nearest}")
    return 1.0 / math.tan(argument)