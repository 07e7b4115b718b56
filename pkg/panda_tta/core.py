"""
panda_tta/core.py - Error types

Every precondition the library checks surfaces as a ``PandaError``
subclass with a message that says what was wrong and, where useful, how to
fix it. Bad-value errors also subclass ``ValueError`` so generic callers can
catch them without importing this module.

Example output::

    PandaError: Patch height 30 does not divide image height 224.
      Try: a patch size that divides the image, e.g. 32 for 224x224 inputs.
"""

from __future__ import annotations


# ---------------------------------------------------------------------------
# PandaError - base exception
# ---------------------------------------------------------------------------


class PandaError(Exception):
    """Base exception for all panda_tta precondition failures."""

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)

    def __str__(self) -> str:
        return f"{type(self).__name__}: {self.message}"


# ---------------------------------------------------------------------------
# Shape and input errors
# ---------------------------------------------------------------------------


class DimensionMismatch(PandaError, ValueError):
    """Shapes or vector dimensions do not line up."""


class EmptyBatch(PandaError, ValueError):
    """A batch with no images was supplied."""


class HeterogeneousBatch(PandaError, ValueError):
    """Images in one batch have different shapes."""


class PoolExhausted(PandaError, ValueError):
    """More patches were requested than the pool holds."""


class EmptyInput(PandaError, ValueError):
    """A reduction was asked for over zero items."""


class EmptyStream(EmptyInput):
    """An adaptation stream with no samples."""


class EmptyNegatives(EmptyInput):
    """A prototype was requested from zero negative embeddings."""


class LabelOutOfRange(PandaError, ValueError):
    """A class index is negative or not below the class count."""


class ParseError(PandaError, ValueError):
    """A file could not be decoded."""


class ManifestError(PandaError, ValueError):
    """A run manifest is missing fields or names an unknown subcommand."""


# ---------------------------------------------------------------------------
# Numerical errors
# ---------------------------------------------------------------------------


class ZeroVector(PandaError, ValueError):
    """Normalization of a vector with zero norm."""


class NonFiniteLogits(PandaError, ValueError):
    """Logits contain NaN or infinity."""


class NotUnitVector(PandaError, ValueError):
    """A direction that must have unit L2 norm does not."""


class AsymmetricMatrix(PandaError, ValueError):
    """A correlation matrix is not symmetric or has entries outside [-1, 1]."""


# ---------------------------------------------------------------------------
# Theory and world errors
# ---------------------------------------------------------------------------


class NonPositiveSeverity(PandaError, ValueError):
    """Corruption severity ``s`` must be strictly positive."""


class CorrelationOutOfRange(PandaError, ValueError):
    """Corruption-negative correlation ``r`` must lie in [0, 1)."""


class TooFewSamples(PandaError, ValueError):
    """Monte Carlo budget below the minimum."""


class InvalidSpec(PandaError, ValueError):
    """A world specification violates its invariants."""


class UnknownDomain(PandaError, KeyError):
    """A corruption domain name the world does not define."""

    def __str__(self) -> str:
        return PandaError.__str__(self)
