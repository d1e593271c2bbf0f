"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about bad
input can catch that.
"""


class DimensionError(ValueError):
    """Mode or photon count outside the allowed range."""


class ModeIndexError(ValueError):
    """Mode index out of range, or a repeated index where distinct ones are needed."""


class ShapeError(ValueError):
    """Array has the wrong shape for the requested operation."""


class UnitarityError(ValueError):
    def __init__(self, deviation, tol):
        self.deviation = float(deviation)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not unitary: max |U^dag U - 1| = {self.deviation:.3e} > {self.tol:.1e}"
        )


class ZeroProbabilityError(ValueError):
    """Post-selection target has vanishing amplitude."""


class SymmetryError(ValueError):
    """Matrix expected to be Hermitian is not."""


class ArityError(ValueError):
    """Operation defined only for a specific number of modes."""


class CapacityError(ValueError):
    """Requested tensor order exceeds the supported cap."""


class UnresolvableOutcomeError(ValueError):
    """More photons in a mode than the 4-way splitter cascade can resolve."""


class UndeterminedEfficiencyError(ValueError):
    """Calibration data do not determine a detector efficiency."""


class EmptyReconstructionError(ValueError):
    """Click tally contains no usable events."""


class InvalidGramError(ValueError):
    """Gram matrix is not Hermitian, unit-diagonal and positive semidefinite."""
