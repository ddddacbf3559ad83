"""Exception hierarchy shared by every saltstore subsystem."""


class SaltError(Exception):
    """Base class for all saltstore errors."""


class InvalidInputError(SaltError, ValueError):
    """An argument violates an operation's precondition."""


class DecodeError(SaltError):
    """A serialized payload is truncated or malformed."""


class IntegrityError(SaltError):
    """A checksum did not match its payload."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


class DriveFailure(SaltError):
    """A drive is missing or was marked failed."""

    def __init__(self, drive_id):
        super().__init__(f"drive {drive_id} is unavailable")
        self.drive_id = drive_id


class UnrecoverableError(SaltError):
    """More chunks are missing from a stripe than parity can restore."""

    def __init__(self, stripe, missing):
        drives = ", ".join(str(d) for d in sorted(missing))
        super().__init__(f"stripe {stripe} unrecoverable: drives {drives} missing")
        self.stripe = stripe
        self.missing = tuple(sorted(missing))


class CapacityError(SaltError):
    """The pool cannot hold the requested object."""


class TrainingDivergedError(SaltError, ArithmeticError):
    """Autoencoder loss became non-finite."""

    def __init__(self, epoch):
        super().__init__(f"loss diverged at epoch {epoch}")
        self.epoch = epoch


class PowerLoss(SaltError):
    """Raised by the archive pipeline to simulate an abrupt power cut."""
