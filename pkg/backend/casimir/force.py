"""
Casimir force on one sphere of an N-sphere ensemble.

Every simply-connected diagram through the target contributes

    E = s_N * w / (sqrt(eps_B) D) * integral dX exp(-X) Tr[C_t U C_i U ... C_j U]
    F = -grad_t E

with ``s_N = -(-1)**N`` and ``w`` the vacuum weight of the spectral context. The
translations are built with the exponential removed so the loop integrand is
exp(-X) times a smooth function of X. Potentials are in units of
hbar c / (4 pi R1) and forces in hbar c / (4 pi R1**2).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .constants import COUPLING_STATIC, SURFACE_NORMALIZATION, mode_count
from .diagrams import connected_subsets, enumerate_simply_connected, loop_distance
from .exceptions import ConvergenceError, DimensionMismatchError
from .mie import loop_couplings
from .spectral import spectral_context
from .specfun import bessel_j_sequence, neumann_n_sequence, warm_up
from .translation import KIND_OUTGOING, TranslationOperator, translation_blocks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StressKernel:
    """
    Stress-tensor measure of the surface integral around the target sphere.

    ``measure`` is W(L, eps_B, y) = L(L+1) (L(L+1) - (1+eps_B) y**2 / 2) and
    ``radial_product`` is y j_L(y) n_L(y) / (4 pi). Their product, normalised to
    its value at y = 0, is 1 + c_L y**2 + O(y**4).
    """

    l_max: int
    eps_background: float = 1.0

    def measure(self, L, y):
        ll = L * (L + 1)
        return ll * (ll - 0.5 * (1.0 + self.eps_background) * np.square(y))

    def radial_product(self, L, y):
        y = np.asarray(y, dtype=float)
        return y * bessel_j_sequence(L, y)[L].real * neumann_n_sequence(L, y)[L].real * SURFACE_NORMALIZATION

    def curvature_coefficient(self, L):
        """Second-order coefficient c_L of the normalised kernel"""
        return 2.0 / ((2 * L - 1) * (2 * L + 3)) - (1.0 + self.eps_background) / (2.0 * L * (L + 1))

    def weights(self, y):
        """1 + c_L y**2 for L = 1..l_max, shape ``y.shape + (l_max,)``"""
        y = np.asarray(y, dtype=float)
        c = np.array([self.curvature_coefficient(L) for L in range(1, self.l_max + 1)])
        return 1.0 + np.multiply.outer(np.square(y), c)


@dataclass
class ForceResult:
    """Force and potential on one target sphere, with the contribution of every diagram"""

    target_id: int
    force: np.ndarray
    potential: float
    l_max: int
    spectral_mode: str
    n_nodes: int
    temperature: float = 0.0
    per_diagram: dict = field(default_factory=dict)
    convergence_estimate: float = None


def _expand_modes(per_l):
    """(..., l_max) values onto the (..., l_max (l_max+2)) mode axis"""
    l_max = per_l.shape[-1]
    return np.repeat(per_l, [2 * L + 1 for L in range(1, l_max + 1)], axis=-1)


def sphere_couplings(ensemble, sphere_id, l_max, kappa, coupling=COUPLING_STATIC,
                     te_channel=False, kernel=None):
    """Diagonal of C on the [M block, N block] mode axis at reduced wavenumbers ``kappa``"""
    sphere = ensemble.sphere(sphere_id)
    radius = ensemble.reduced_radius(sphere_id)
    te, tm = loop_couplings(sphere.material, l_max, kappa, coupling, te_channel, radius=radius)
    if kernel is not None:
        weights = kernel.weights(np.asarray(kappa) * radius)
        te, tm = te * weights, tm * weights
    return np.concatenate([_expand_modes(te), _expand_modes(tm)], axis=-1)


def path_ordered_product(couplings, operators):
    """
    C_0 U_0 C_1 U_1 ... C_{k-1} U_{k-1} stacked over the node axis.

    ``couplings`` are diagonals of shape (nodes, 2n); ``operators`` are
    TranslationOperator instances or full (nodes, 2n, 2n) matrices.
    """
    if len(couplings) != len(operators):
        raise DimensionMismatchError(f"{len(couplings)} couplings for {len(operators)} translations")
    product = None
    for diagonal, operator in zip(couplings, operators):
        matrix = operator.matrix if isinstance(operator, TranslationOperator) else operator
        if matrix.shape[-1] != diagonal.shape[-1]:
            raise DimensionMismatchError(
                f"Coupling of size {diagonal.shape[-1]} against a translation of size {matrix.shape[-1]}"
            )
        term = diagonal[..., :, None] * matrix
        product = term if product is None else product @ term
    return product


def _loop_traces(ensemble, diagram, l_max, k, coupling_sets):
    """
    Traces of the loop and of its derivative with respect to the target centre.

    ``coupling_sets`` holds one list of diagonals per truncation; the translations
    are shared between them.
    """
    edges = diagram.edges
    operators, gradients = [], {}
    for position, (to_id, from_id) in enumerate(edges):
        touches_target = position in (0, len(edges) - 1)
        A, B, grad_A, grad_B = translation_blocks(
            l_max, k, ensemble.separation(to_id, from_id), kind=KIND_OUTGOING,
            scaled=True, gradient=touches_target,
        )
        operators.append(TranslationOperator(l_max, A, B, None, kind=KIND_OUTGOING, scaled=True).matrix)
        if touches_target:
            gradients[position] = [TranslationOperator(l_max, grad_A[axis], grad_B[axis], None,
                                                       kind=KIND_OUTGOING, scaled=True).matrix
                                   for axis in range(3)]

    results = []
    last = len(edges) - 1
    for couplings in coupling_sets:
        trace = np.trace(path_ordered_product(couplings, operators), axis1=-2, axis2=-1)
        grad = np.zeros((3,) + trace.shape, dtype=complex)
        for axis in range(3):
            # the first edge starts at c_t, the last one ends there
            first = list(operators)
            first[0] = gradients[0][axis]
            grad[axis] += np.trace(path_ordered_product(couplings, first), axis1=-2, axis2=-1)
            final = list(operators)
            final[last] = gradients[last][axis]
            grad[axis] -= np.trace(path_ordered_product(couplings, final), axis1=-2, axis2=-1)
        results.append((trace, grad))
    return results


def _truncated(couplings, l_max):
    """Couplings with the l = l_max modes removed"""
    if l_max < 2:
        return None
    keep = np.ones(2 * mode_count(l_max), dtype=bool)
    top = mode_count(l_max - 1)
    keep[top:mode_count(l_max)] = False
    keep[mode_count(l_max) + top:] = False
    return [c * keep for c in couplings]


def loop_traces(ensemble, diagram, l_max, kappa, coupling=COUPLING_STATIC, te_channel=False,
                kernel=None, with_estimate=False):
    """
    Scaled loop traces and their target gradients at reduced wavenumbers ``kappa``.

    Returns one ``(trace, grad)`` pair, plus a second one at l_max - 1 when
    ``with_estimate`` is set and l_max > 1.
    """
    couplings = [
        sphere_couplings(ensemble, sid, l_max, kappa, coupling, te_channel,
                         kernel if sid == diagram.target else None)
        for sid in diagram.cycle[:-1]
    ]
    coupling_sets = [couplings]
    lower = _truncated(couplings, l_max) if with_estimate else None
    if lower is not None:
        coupling_sets.append(lower)
    return _loop_traces(ensemble, diagram, l_max, 1j * np.asarray(kappa), coupling_sets)


def evaluate_diagram(ensemble, diagram, l_max, spectral, coupling=COUPLING_STATIC,
                     te_channel=False, kernel=None, with_estimate=True):
    """
    Potential and force of one diagram.

    Returns ``((potential, force), (potential, force) at l_max - 1 or None)``.
    """
    distance = loop_distance(diagram, ensemble, reduced=True)
    context = spectral.for_loop_distance(distance * ensemble.length_unit)
    traces = loop_traces(ensemble, diagram, l_max, context.nodes / distance, coupling,
                         te_channel, kernel, with_estimate)

    sign = -(-1) ** diagram.order
    prefactor = sign * context.vacuum_weight / (math.sqrt(context.eps_background) * distance)
    values = []
    for trace, grad in traces:
        potential = prefactor * context.integrate(trace).real
        force = -prefactor * context.integrate(grad).real
        values.append((float(potential), np.asarray(force, dtype=float)))
    return values[0], (values[1] if len(values) > 1 else None)


def worker_count(threads=None):
    """Requested worker threads, capped by CASIMIR_THREADS"""
    limit = settings.CASIMIR_THREADS
    return max(1, min(threads, limit)) if threads else limit


def _diagrams(ensemble, target_id, subsets):
    if not subsets:
        return enumerate_simply_connected(ensemble, target_id)
    diagrams = []
    for ids in connected_subsets(ensemble, target_id):
        diagrams.extend(enumerate_simply_connected(ensemble, target_id, ids))
    return diagrams


def force_on_sphere(ensemble, target_id, l_max=None, spectral=None, coupling=COUPLING_STATIC,
                    te_channel=False, curvature=False, subsets=False, threads=None):
    """
    Force and potential on ``target_id`` summed over simply-connected diagrams.

    With ``subsets=True`` the diagrams of every sub-ensemble containing the target
    are included as well. Diagrams run on ``threads`` workers and are reduced in
    enumeration order.
    """
    l_max = l_max or settings.CASIMIR_L_MAX
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    spectral = spectral or spectral_context(ensemble.temperature, ensemble.eps_background)
    threads = worker_count(threads)
    kernel = StressKernel(l_max, ensemble.eps_background) if curvature else None
    ensemble.sphere(target_id)

    diagrams = _diagrams(ensemble, target_id, subsets)
    logger.info(f"Evaluating {len(diagrams)} diagrams on sphere {target_id} at l_max={l_max}")

    def run(diagram):
        return evaluate_diagram(ensemble, diagram, l_max, spectral, coupling, te_channel, kernel)

    if threads > 1:
        warm_up(l_max)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            evaluated = list(pool.map(run, diagrams))
    else:
        evaluated = [run(d) for d in diagrams]

    force = np.zeros(3)
    potential = 0.0
    lower_force = np.zeros(3)
    lower_potential = 0.0
    per_diagram = {}
    for diagram, (value, lower) in zip(diagrams, evaluated):
        per_diagram[diagram.label()] = value
        potential += value[0]
        force = force + value[1]
        if lower is not None:
            lower_potential += lower[0]
            lower_force = lower_force + lower[1]

    if not (np.all(np.isfinite(force)) and math.isfinite(potential)):
        raise ConvergenceError(f"Non-finite force on sphere {target_id} at l_max={l_max}")

    estimate = None
    if l_max > 1:
        estimate = _relative_change(force, lower_force, potential, lower_potential)
        if estimate > settings.CASIMIR_CONVERGENCE_TOLERANCE:
            logger.warning(
                f"Truncation at l_max={l_max} changes the result by {estimate:.2%} on sphere {target_id}"
            )

    n_nodes = spectral.l_max if spectral.is_thermal else len(spectral.nodes)
    return ForceResult(target_id, force, potential, l_max, spectral.mode, n_nodes,
                       spectral.temperature, per_diagram, estimate)


def _relative_change(force, lower_force, potential, lower_potential):
    scale = np.linalg.norm(force)
    if scale > 0:
        return float(np.linalg.norm(force - lower_force) / scale)
    if potential != 0:
        return abs(potential - lower_potential) / abs(potential)
    return 0.0


def finite_difference_force(ensemble, target_id, l_max=None, spectral=None, step=None, **options):
    """-grad of the potential by central differences in reduced units"""
    center = ensemble.reduced_center(target_id)
    scale = ensemble.length_unit
    step = step or 1e-6 * max(
        float(np.linalg.norm(ensemble.separation(target_id, other)))
        for other in ensemble.ids if other != target_id
    )
    force = np.zeros(3)
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = step
        plus = ensemble.with_center(target_id, (center + shift) * scale)
        minus = ensemble.with_center(target_id, (center - shift) * scale)
        e_plus = force_on_sphere(plus, target_id, l_max, spectral, **options).potential
        e_minus = force_on_sphere(minus, target_id, l_max, spectral, **options).potential
        force[axis] = -(e_plus - e_minus) / (2.0 * step)
    return force
