"""Exception hierarchy shared by every pipeline stage."""


class KgqgError(ValueError):
    """Base class for validation failures (CLI exit code 1)."""


class MalformedRecord(KgqgError):
    def __init__(self, reason: str, line: int | None = None, path: str | None = None):
        self.reason = reason
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{reason}")


class MalformedDialog(KgqgError):
    def __init__(self, dialog_id: str, reason: str):
        self.dialog_id = dialog_id
        self.reason = reason
        super().__init__(f"dialog {dialog_id!r}: {reason}")


class LengthViolation(MalformedDialog):
    pass


class NoCandidate(KgqgError):
    """A distractor sampler found nothing to draw; callers skip the slot."""


class EmptyOutput(KgqgError):
    pass


class EmptyReferenceSet(KgqgError):
    pass


class NoReferent(KgqgError):
    pass


class InsufficientOverlap(KgqgError):
    pass


class DegenerateSample(KgqgError):
    pass


class MissingVerbalization(KgqgError):
    pass
