"""
Physical constants and the conventions every other module relies on.

Conventions
-----------
* Vector spherical waves: ``M_lm = f_l(kr) X_lm`` with
  ``X_lm = L Y_lm / sqrt(l(l+1))`` and ``N_lm = curl(M_lm) / k``. ``Y_lm`` carries
  the Condon-Shortley phase. ``f_l`` is ``j_l`` for regular waves and
  ``h_l = j_l + i n_l`` for outgoing waves.
* Mode vectors are ordered ``[M block, N block]``; inside a block the index runs
  over ``l = 1..L_max`` and ``m = -l..l``.
* Sphere response: the scattered coefficient equals ``-a_l`` (N, TM) or ``-b_l``
  (M, TE) times the incident one. Loops are assembled from the coupling
  ``C = -T``, which puts ``-(-1)**N`` in front of every N-sphere loop.
* Lengths are measured in units of the radius of sphere 1. Potentials are in
  units of ``hbar c / (4 pi R1)`` and forces in ``hbar c / (4 pi R1**2)``.
* Frequencies live on the imaginary axis: ``k = i kappa`` with ``kappa`` the
  background wavenumber; ``X = kappa * D`` for a loop of length ``D``.
"""
import math

from scipy import constants as _sc

HBAR = _sc.hbar
SPEED_OF_LIGHT = _sc.c
BOLTZMANN = _sc.Boltzmann
HBAR_C = HBAR * SPEED_OF_LIGHT

# Surface-integral normalisation of the stress kernel
SURFACE_NORMALIZATION = 1.0 / (4.0 * math.pi)

# Spectral mode density of the Wick-rotated frequency integral
MODE_DENSITY = 1.0 / (2.0 * math.pi)

# Ratio converting hbar c / (2 pi) into the output unit hbar c / (4 pi R1)
ENERGY_UNIT_FACTOR = MODE_DENSITY / SURFACE_NORMALIZATION

# Arguments beyond this |Im x| overflow unscaled Bessel functions
MAX_IMAGINARY_ARGUMENT = 700.0

THERMAL_POLE_TOLERANCE = 1e-8

CHANNEL_TE = 'TE'
CHANNEL_TM = 'TM'

COUPLING_STATIC = 'static'
COUPLING_FULL = 'full'
COUPLING_CHOICES = (COUPLING_STATIC, COUPLING_FULL)

UNITS_RADIUS = 'radius'
UNITS_METERS = 'meters'
UNITS_CHOICES = (UNITS_RADIUS, UNITS_METERS)


def mode_count(l_max):
    """Number of (l, m) pairs with 1 <= l <= l_max"""
    return l_max * (l_max + 2)


def mode_index(l, m):
    """Position of (l, m) inside one polarisation block"""
    return l * l - 1 + (l + m)
