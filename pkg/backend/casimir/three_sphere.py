"""
Three-sphere potential in the dipole approximation, and scans of the third sphere.

With only dipoles the loop of three spheres reduces to the trace of three free
dyadic propagators,

    E = 4 / sqrt(eps_B) * (-a1 a2 a3) * integral dkappa Tr[G12 G23 G31]

with G(d) = exp(-kappa d) / d**3 [(1 + u)(3 nn - I) - u**2 (I - nn)], u = kappa d,
both orientations of the loop included. Everything is vectorised over arrays of
sphere-3 positions.
"""
import logging
import math

import numpy as np
from django.conf import settings

from .constants import ENERGY_UNIT_FACTOR
from .ensemble_models import Ensemble, Sphere
from .force import force_on_sphere
from .mie import reduced_polarizability
from .spectral import build_zero_T_grid, matsubara_spacing

logger = logging.getLogger(__name__)


def _polar(d):
    """Lengths and unit vectors of separations (..., 3)"""
    distance = np.asarray(np.linalg.norm(d, axis=-1))
    unit = d / distance[..., None]
    return distance, unit


def dipole_propagator(distance, unit, kappa, with_gradient=False):
    """exp(kappa d) G(d) for nodes ``kappa`` (..., n); shape (..., n, 3, 3) and gradient (..., n, 3, 3, 3)"""
    d = distance[..., None]
    u = kappa * d
    a = -(1.0 + u + u * u) / d ** 3
    b = (3.0 + 3.0 * u + u * u) / d ** 3
    nn = unit[..., None, :, None] * unit[..., None, None, :]
    eye = np.eye(3)
    G = a[..., None, None] * eye + b[..., None, None] * nn
    if not with_gradient:
        return G, None
    # d-derivatives of exp(-u) a and exp(-u) b, divided by exp(-u)
    da = (3.0 + 3.0 * u + 2.0 * u * u + u ** 3) / d ** 4
    db = -(9.0 + 9.0 * u + 4.0 * u * u + u ** 3) / d ** 4
    n = unit[..., None, :]
    # dG_ij / dd_k
    grad = (da[..., None, None, None] * eye[:, :, None] * n[..., None, None, :]
            + db[..., None, None, None] * nn[..., None] * n[..., None, None, :]
            + (b / d)[..., None, None, None] * (eye[:, None, :] * n[..., None, :, None]
                                                + eye[None, :, :] * n[..., :, None, None]
                                                - 2.0 * nn[..., None] * n[..., None, None, :]))
    return G, grad


def _frequency_grid(loop_length, temperature, eps_background, length_unit, n_nodes=None, l_max=None):
    """Reduced wavenumbers and weights of integral dkappa exp(-kappa D) f(kappa)"""
    if temperature > 0:
        spacing = matsubara_spacing(temperature, length_unit, eps_background)
        l_max = l_max or settings.CASIMIR_MATSUBARA_L_MAX
        kappa = spacing * np.arange(1, l_max + 1)
        kappa = np.broadcast_to(kappa, loop_length.shape + kappa.shape)
        weights = spacing * np.exp(-kappa * loop_length[..., None])
        return kappa, weights
    grid = build_zero_T_grid(n_nodes)
    kappa = grid.nodes / loop_length[..., None]
    weights = grid.weights / loop_length[..., None]
    return kappa, weights


def dipole_loop(centers, alphas, eps_background=1.0, temperature=0.0, length_unit=1.0, target=None,
                n_nodes=None, l_max=None):
    """
    Three-body dipole potential for positions ``centers`` (..., 3, 3) in units of R1.

    ``alphas`` are the dipole polarizabilities in units of R1**3. When ``target``
    (0, 1 or 2) is given the force on that sphere is returned as well.
    """
    centers = np.asarray(centers, dtype=float)
    d12, u12 = _polar(centers[..., 0, :] - centers[..., 1, :])
    d23, u23 = _polar(centers[..., 1, :] - centers[..., 2, :])
    d31, u31 = _polar(centers[..., 2, :] - centers[..., 0, :])
    loop_length = d12 + d23 + d31
    kappa, weights = _frequency_grid(loop_length, temperature, eps_background, length_unit, n_nodes, l_max)

    gradient = target is not None
    G12, g12 = dipole_propagator(d12, u12, kappa, gradient)
    G23, g23 = dipole_propagator(d23, u23, kappa, gradient)
    G31, g31 = dipole_propagator(d31, u31, kappa, gradient)
    trace = np.einsum('...ij,...jk,...ki->...', G12, G23, G31)

    strength = -2.0 * ENERGY_UNIT_FACTOR / math.sqrt(eps_background) * float(np.prod(alphas))
    potential = strength * np.sum(weights * trace, axis=-1)
    if not gradient:
        return potential, None

    # the target enters two edges: + for separations starting at it, - for those ending at it
    grad = np.zeros(trace.shape + (3,))
    if target == 0:
        grad += np.einsum('...ijl,...jk,...ki->...l', g12, G23, G31)
        grad -= np.einsum('...ij,...jk,...kil->...l', G12, G23, g31)
    elif target == 1:
        grad -= np.einsum('...ijl,...jk,...ki->...l', g12, G23, G31)
        grad += np.einsum('...ij,...jkl,...ki->...l', G12, g23, G31)
    elif target == 2:
        grad -= np.einsum('...ij,...jkl,...ki->...l', G12, g23, G31)
        grad += np.einsum('...ij,...jk,...kil->...l', G12, G23, g31)
    else:
        raise ValueError(f"target must be 0, 1 or 2, got {target}")
    force = -strength * np.sum(weights[..., None] * grad, axis=-2)
    return potential, force


def _scan_frame(ensemble):
    """Origin at sphere 1, z along 1 -> 2, x perpendicular"""
    first, second = ensemble.spheres[0], ensemble.spheres[1]
    origin = ensemble.reduced_center(first.id)
    axis = ensemble.reduced_center(second.id) - origin
    axis = axis / np.linalg.norm(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    perpendicular = trial - axis * (trial @ axis)
    return origin, axis, perpendicular / np.linalg.norm(perpendicular)


def scan_positions(ensemble, x_values, theta_values):
    """Reduced sphere-3 centres on the (x, theta) grid, shape (len(x), len(theta), 3)"""
    origin, axis, perpendicular = _scan_frame(ensemble)
    x = np.asarray(x_values, dtype=float)[:, None, None]
    theta = np.asarray(theta_values, dtype=float)[None, :, None]
    return origin + x * (np.sin(theta) * perpendicular + np.cos(theta) * axis)


def three_sphere_potential(ensemble, x_values, theta_values, l_max=1, spectral=None):
    """
    Simply-connected three-body potential on sphere 1 as sphere 3 moves on an
    (x, theta) grid; x = r13 / R1 and theta is measured from the 1 -> 2 axis.

    Sphere 3 keeps its material; its centre is replaced by each grid point. Grid
    points where sphere 3 overlaps sphere 1 or 2 are NaN.
    """
    if ensemble.size != 3:
        raise ValueError(f"three_sphere_potential needs three spheres, got {ensemble.size}")
    positions = scan_positions(ensemble, x_values, theta_values)
    first, second, third = ensemble.spheres
    radii = [ensemble.reduced_radius(s.id) for s in ensemble.spheres]
    c1 = ensemble.reduced_center(first.id)
    c2 = ensemble.reduced_center(second.id)
    overlap = ((np.linalg.norm(positions - c1, axis=-1) < radii[0] + radii[2])
               | (np.linalg.norm(positions - c2, axis=-1) < radii[1] + radii[2]))
    if np.any(overlap):
        logger.warning(f"{int(overlap.sum())} scan points overlap and are left as NaN")

    if l_max == 1 and spectral is None:
        alphas = [reduced_polarizability(1, s.material) * radius ** 3 for s, radius in zip(ensemble.spheres, radii)]
        safe = np.where(overlap[..., None], c2 + 3.0 * (radii[1] + radii[2]) * (c2 - c1), positions)
        centers = np.stack(np.broadcast_arrays(c1, c2, safe), axis=-2)
        potential, _ = dipole_loop(centers, alphas, ensemble.eps_background, ensemble.temperature,
                                   ensemble.length_unit)
        return np.where(overlap, np.nan, potential)

    surface = np.full(overlap.shape, np.nan)
    scale = ensemble.length_unit
    for index in np.ndindex(overlap.shape):
        if overlap[index]:
            continue
        moved = Ensemble((first, second, Sphere(third.id, tuple(positions[index] * scale), third.material)),
                         ensemble.eps_background, ensemble.temperature)
        surface[index] = force_on_sphere(moved, first.id, l_max, spectral).potential
    return surface


def three_sphere_force(ensemble, target_id, n_nodes=None):
    """Dipole-approximation potential and force on ``target_id`` for a three-sphere ensemble"""
    if ensemble.size != 3:
        raise ValueError(f"three_sphere_force needs three spheres, got {ensemble.size}")
    ids = ensemble.ids
    radii = [ensemble.reduced_radius(i) for i in ids]
    alphas = [reduced_polarizability(1, s.material) * r ** 3 for s, r in zip(ensemble.spheres, radii)]
    centers = np.stack([ensemble.reduced_center(i) for i in ids])
    potential, force = dipole_loop(centers, alphas, ensemble.eps_background, ensemble.temperature,
                                   ensemble.length_unit, target=ids.index(target_id), n_nodes=n_nodes)
    return float(potential), np.asarray(force)
