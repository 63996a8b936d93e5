"""
Sphere ensembles: geometry and materials of N spheres in a common background.

Centres and radii are stored in meters; ``reduced_*`` accessors return them in
units of the radius of the first sphere.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import OverlapError
from .mie import MaterialPair

logger = logging.getLogger(__name__)

TOUCH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Sphere:
    id: int
    center: tuple
    material: MaterialPair

    @property
    def radius(self):
        return self.material.radius


@dataclass(frozen=True)
class Ensemble:
    """N >= 2 non-overlapping spheres sharing one background permittivity"""

    spheres: tuple
    eps_background: float = 1.0
    temperature: float = 0.0
    touching: tuple = field(default=(), init=False, compare=False)

    def __post_init__(self):
        spheres = tuple(self.spheres)
        object.__setattr__(self, 'spheres', spheres)
        if len(spheres) < 2:
            raise ValidationError(f"An ensemble needs at least two spheres, got {len(spheres)}")
        ids = [s.id for s in spheres]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"Sphere ids must be unique: {ids}")
        if self.temperature < 0:
            raise ValidationError(f"Temperature must be non-negative, got {self.temperature}")
        for sphere in spheres:
            if not math.isclose(sphere.material.eps_background, self.eps_background):
                raise ValidationError(
                    f"Sphere {sphere.id} has background {sphere.material.eps_background}, "
                    f"ensemble has {self.eps_background}"
                )
        touching = []
        for first, second in itertools.combinations(spheres, 2):
            distance = float(np.linalg.norm(np.subtract(first.center, second.center)))
            radii_sum = first.radius + second.radius
            if distance < radii_sum * (1.0 - TOUCH_TOLERANCE):
                raise OverlapError(first.id, second.id, distance, radii_sum)
            if distance <= radii_sum * (1.0 + TOUCH_TOLERANCE):
                logger.warning(f"Spheres {first.id} and {second.id} touch; expansions converge slowly")
                touching.append((first.id, second.id))
        object.__setattr__(self, 'touching', tuple(touching))

    @property
    def size(self):
        return len(self.spheres)

    @property
    def ids(self):
        return [s.id for s in self.spheres]

    @property
    def length_unit(self):
        """Radius of the first sphere, in meters"""
        return self.spheres[0].radius

    def sphere(self, sphere_id):
        for s in self.spheres:
            if s.id == sphere_id:
                return s
        raise ValidationError(f"No sphere with id {sphere_id}")

    def reduced_center(self, sphere_id):
        return np.asarray(self.sphere(sphere_id).center, dtype=float) / self.length_unit

    def reduced_radius(self, sphere_id):
        return self.sphere(sphere_id).radius / self.length_unit

    def separation(self, to_id, from_id):
        """Reduced vector c_to - c_from"""
        return self.reduced_center(to_id) - self.reduced_center(from_id)

    def with_center(self, sphere_id, center):
        """Copy with one sphere moved"""
        spheres = tuple(Sphere(s.id, tuple(center), s.material) if s.id == sphere_id else s
                        for s in self.spheres)
        return Ensemble(spheres, self.eps_background, self.temperature)

    def subset(self, ids):
        return Ensemble(tuple(s for s in self.spheres if s.id in set(ids)),
                        self.eps_background, self.temperature)


def build_ensemble(centers, materials, eps_background=1.0, temperature=0.0, ids=None):
    """Ensemble from parallel lists of centres (m) and materials"""
    ids = ids or list(range(1, len(centers) + 1))
    spheres = tuple(Sphere(i, tuple(float(c) for c in center), mat)
                    for i, center, mat in zip(ids, centers, materials))
    return Ensemble(spheres, eps_background, temperature)
