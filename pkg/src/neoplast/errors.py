"""Exception types raised across the package."""


class NeoplastError(Exception):
    pass


class SchemaError(NeoplastError):
    """A composition or manifest document does not match its schema.

    ``path`` is a JSON pointer into the offending document.
    """

    def __init__(self, path, reason, source=None):
        self.path = path
        self.reason = reason
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{path or '/'}: {reason}")


class OutsideCanvas(NeoplastError, ValueError):
    pass


class OrdinalGap(NeoplastError):
    def __init__(self, t_prev, t_curr):
        self.t_prev = t_prev
        self.t_curr = t_curr
        super().__init__(f"expected ordinal {t_prev + 1} after {t_prev}, got {t_curr}")


class InapplicableOp(NeoplastError):
    def __init__(self, index, reason="referenced element does not exist"):
        self.index = index
        super().__init__(f"op {index}: {reason}")


class EmptyProfile(NeoplastError):
    pass


class UnlabeledCandidate(NeoplastError):
    def __init__(self, candidate_id):
        self.candidate_id = candidate_id
        super().__init__(f"candidate {candidate_id!r} has no in_style/off_style label")


class InvalidComposition(NeoplastError):
    def __init__(self, composition_id, violations):
        self.composition_id = composition_id
        self.violations = violations
        first = violations[0]
        super().__init__(
            f"{composition_id}: {first.kind} at element {first.element}: {first.detail}")
