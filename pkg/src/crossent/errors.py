"""Exception types shared across the package."""


class CrossentError(Exception):
    """Base class for all package errors."""


class NonStochastic(CrossentError):
    """A transition-matrix row does not sum to one (or has entries outside [0, 1])."""


class NonUniqueStationary(CrossentError):
    """The chain admits more than one stationary distribution (reducible)."""


class SymbolOutOfRange(CrossentError):
    """A word contains a symbol index outside the model's alphabet."""


class AlphabetMismatch(CrossentError):
    """Two models that must share an alphabet do not."""


class TruncationBreach(CrossentError):
    """A ladder-chain walk reached the truncation boundary."""


class TruncationTooSmall(CrossentError):
    """Certified stationary tail mass outside the truncation exceeds tolerance."""


class NotSurjective(CrossentError):
    """An observation map misses at least one observed symbol."""


class BudgetExceeded(CrossentError):
    """An enumeration would visit more words than the configured budget."""


class PatternTooLong(CrossentError):
    """A waiting-time query asks for a prefix longer than the pattern."""


class GridExceedsWindow(CrossentError):
    """A match-length grid point exceeds the reference sequence length."""


class AbsoluteContinuityViolation(CrossentError):
    """A sampled word has zero probability under the reference model."""


class NoGapFound(CrossentError):
    """No gap within budget yields a positive joint probability."""
