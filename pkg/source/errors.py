#!/usr/bin/env python

"""errors.py  :  Exceptions raised by the semrel tools """

__version__ = "0.1"
__status__ = "development"


class SemrelError(Exception):
    """
    Base class for every failure the tools report to the user.
    tools.py catches it, prints the message and exits with a non-zero code.
    """


# ----------
# Data ingestion and output
# ----------
class EncodingError(SemrelError, ValueError):
    pass

class MalformedRow(SemrelError, ValueError):
    pass

class ScoreOutOfRange(SemrelError, ValueError):
    pass

class DuplicateId(SemrelError, ValueError):
    pass

class MixedSplits(SemrelError, ValueError):
    pass

class EmptyInput(SemrelError, ValueError):
    pass

class LengthMismatch(SemrelError, ValueError):
    pass

class NonFiniteScore(SemrelError, ValueError):
    pass


# ----------
# Translation
# ----------
class InvalidBackend(SemrelError, ValueError):
    pass

class UnsupportedLanguage(SemrelError):
    pass

class BackendFailure(SemrelError):
    pass

class NoPrimaryBackend(SemrelError):
    pass


# ----------
# Models and training
# ----------
class EmptyPooling(SemrelError, ValueError):
    pass

class ZeroNorm(SemrelError, ValueError):
    pass

class NonFiniteGradient(SemrelError, ValueError):
    pass

class UndefinedSpearman(SemrelError, ValueError):
    """Either input of the rank correlation has zero rank variance."""

class CheckpointMismatch(SemrelError):
    pass

class MissingModel(SemrelError, KeyError):
    def __str__(self):
        # KeyError would quote the message
        return Exception.__str__(self)


# ----------
# Configuration
# ----------
class ConfigError(SemrelError):
    pass
