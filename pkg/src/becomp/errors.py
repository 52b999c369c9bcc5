"""Exception types shared across the toolkit."""


class AdmissibilityError(ValueError):
    """A decay profile has a divergent moment (or a manifold fails its bound).

    Carries a human-readable message naming the divergent quantity,
    e.g. ``"b0 diverges: power-law exponent p=2 <= 2"``.
    """


class HypothesisError(ValueError):
    """An input to a comparison check violates the check's own hypothesis.

    Distinct from a comparison *failure*: this means the caller handed us
    data the statement does not apply to (e.g. a curve that is not an
    actual Riccati subsolution), so no verdict is meaningful.
    """


class CompatibilityError(ValueError):
    """Neumann data violates the flux/scaling balance required for solvability."""


class PoleSmoothnessError(ValueError):
    """A density family breaks w'(0) = 0 and cannot sit on a manifold pole."""
