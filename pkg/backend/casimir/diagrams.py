"""
Enumeration and classification of multiple-scattering diagrams.

A simply-connected diagram is a closed path that starts and ends at the target
sphere and visits every other sphere exactly once. Both orientations of each
cycle are enumerated as separate diagrams.
"""
import enum
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


class DiagramKind(enum.Enum):
    SIMPLY_CONNECTED = 'simply_connected'
    REDUCIBLE = 'reducible'
    DISCONNECTED = 'disconnected'


@dataclass(frozen=True)
class PathDiagram:
    """Closed scattering path target -> ... -> target and its total length"""

    cycle: tuple
    loop_distance: float

    @property
    def target(self):
        return self.cycle[0]

    @property
    def order(self):
        return len(self.cycle) - 1

    @property
    def edges(self):
        """(to, from) pairs in the order the loop product is written"""
        return list(zip(self.cycle[:-1], self.cycle[1:]))

    def reversed(self):
        return PathDiagram(tuple(reversed(self.cycle)), self.loop_distance)

    def label(self):
        return '-'.join(str(i) for i in self.cycle)


def classify_walk(walk, sphere_ids):
    """Classify a closed walk over the given spheres"""
    if walk[0] != walk[-1]:
        raise ValidationError(f"Walk {walk} is not closed")
    inner = list(walk[1:-1])
    if walk[0] in inner or len(set(inner)) != len(inner):
        return DiagramKind.REDUCIBLE
    if set(walk) != set(sphere_ids):
        return DiagramKind.DISCONNECTED
    return DiagramKind.SIMPLY_CONNECTED


def loop_distance(diagram, ensemble, reduced=False):
    """Sum of centre-to-centre distances around the cycle (m, or units of R1)"""
    cycle = diagram.cycle if isinstance(diagram, PathDiagram) else tuple(diagram)
    total = 0.0
    for to_id, from_id in zip(cycle[:-1], cycle[1:]):
        total += float(np.linalg.norm(ensemble.separation(to_id, from_id)))
    return total if reduced else total * ensemble.length_unit


def enumerate_simply_connected(ensemble, target_id, sphere_ids=None):
    """
    All (N-1)! simply-connected diagrams through ``sphere_ids`` (default: every
    sphere) that start and end at the target.
    """
    ids = list(sphere_ids) if sphere_ids is not None else ensemble.ids
    if target_id not in ids:
        raise ValidationError(f"Target sphere {target_id} is not part of {ids}")
    if len(ids) < 2:
        raise ValidationError("Diagrams need at least two spheres")
    others = [i for i in ids if i != target_id]
    diagrams = []
    for order in itertools.permutations(others):
        cycle = (target_id,) + order + (target_id,)
        diagrams.append(PathDiagram(cycle, loop_distance(cycle, ensemble)))
    logger.debug(f"{len(diagrams)} simply-connected diagrams for target {target_id}")
    return diagrams


def connected_subsets(ensemble, target_id):
    """Every subset of two or more spheres that contains the target, smallest first"""
    others = [i for i in ensemble.ids if i != target_id]
    for size in range(1, len(others) + 1):
        for chosen in itertools.combinations(others, size):
            yield (target_id,) + chosen
