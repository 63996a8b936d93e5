"""
Errors raised by the casimir application.

Numerical failures derive from ``CasimirError``; geometry problems are Django
validation errors so the configuration layer reports them alongside field errors.
"""
from django.core.exceptions import ValidationError


class CasimirError(Exception):
    """Base class for numerical failures"""


class SingularArgumentError(CasimirError, ValueError):
    """Function evaluated at its singular point"""


class ArgumentOverflowError(CasimirError, OverflowError):
    """Argument outside the representable range"""


class ThermalPoleError(CasimirError, ValueError):
    """Thermal factor requested on a Matsubara pole"""


class DimensionMismatchError(CasimirError, ValueError):
    """Operators built at different truncations were combined"""


class ConvergenceError(CasimirError):
    """A result is not finite or did not converge"""


class OverlapError(ValidationError):
    """Two spheres of an ensemble intersect"""

    def __init__(self, first_id, second_id, distance, radii_sum):
        self.pair = (first_id, second_id)
        super().__init__(
            f"Spheres {first_id} and {second_id} overlap: "
            f"separation {distance:.6g} < radii sum {radii_sum:.6g}",
            code='overlap',
        )
