"""Exception hierarchy for the extension toolkit."""


class ExtensionError(Exception):
    """Base class of every error raised by the toolkit"""


class InputError(ExtensionError, ValueError):
    """A precondition of an operation is violated by its input"""

    def __init__(self, message, position=None, max_safe_N=None):
        self.position = position
        self.max_safe_N = max_safe_N
        super().__init__(message)


class NotHolderError(InputError):
    """The partial map breaks its declared (K, alpha) bound"""

    def __init__(self, pair, excess, ratio=None):
        self.pair = tuple(pair)
        self.excess = float(excess)
        self.ratio = ratio
        super().__init__(
            f"Partial map is not Hölder on pair {self.pair}: "
            f"target distance exceeds K*d^alpha by {self.excess:.3e}"
        )


class ConeCoverError(ExtensionError):
    """
    The unit-sphere net could not be verified (or a point could not be
    assigned to a cone) at the requested resolution.

    Retrying with a finer resolution is expected to succeed.
    """
    retryable = True

    def __init__(self, message, resolution=None, worst_distance=None, n_directions=None):
        self.resolution = resolution
        self.worst_distance = worst_distance
        self.n_directions = n_directions
        super().__init__(message)

    def diagnostics(self):
        return {
            "resolution": self.resolution,
            "worst_distance": self.worst_distance,
            "n_directions": self.n_directions,
        }


class InfeasibleExtensionError(ExtensionError):
    """No extension exists for the given data; carries the certificate"""

    def __init__(self, message, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class VerificationError(ExtensionError):
    """Re-verification of an emitted result failed"""

    def __init__(self, message, failing=None):
        self.failing = failing
        super().__init__(message)
