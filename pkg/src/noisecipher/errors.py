"""Exception types shared by the cipher, channel, adversary and harness layers."""


class NoiseCipherError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(NoiseCipherError):
    """Probabilities, sizes or counts violate a precondition."""


class EmptyMessage(NoiseCipherError):
    """Asked to encode a message containing no bits."""


class EmptyInput(NoiseCipherError):
    """A statistic was requested over zero blocks."""


class LengthMismatch(NoiseCipherError):
    """A block's length does not match the partition it is decoded against."""


class Erasure(NoiseCipherError):
    """Decode tie: the log-likelihood ratio is exactly balanced.

    Carries the observed flip fractions so callers can report the tie.
    Downstream accounting treats erasures as errors, never as guesses.
    """

    def __init__(self, f_alpha: float, f_beta: float):
        super().__init__(f"decode tie: f_alpha={f_alpha:.6g}, f_beta={f_beta:.6g}")
        self.f_alpha = f_alpha
        self.f_beta = f_beta


class SearchSpaceTooLarge(NoiseCipherError):
    """The exhaustive attack would exceed its candidate budget.

    Exposes the exact candidate count and its base-2 logarithm; hitting this
    error at full-size parameters is the desk-scale form of the scheme's
    security claim.
    """

    def __init__(self, message: str, count: int, log2_count: float):
        super().__init__(message)
        self.count = count
        self.log2_count = log2_count


class InvalidConfig(NoiseCipherError):
    """An experiment configuration is malformed."""


class FormatError(NoiseCipherError):
    """A key, block or bit file does not match its wire format."""
