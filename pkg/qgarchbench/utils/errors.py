"""
Exception hierarchy shared by the model, samplers, diagnostics and CLI.

Anything derived from ValidationError maps to CLI exit code 2, every other
QgarchBenchError to exit code 1.
"""

from typing import Optional


class QgarchBenchError(Exception):
    pass


class ValidationError(QgarchBenchError, ValueError):
    pass


class InvalidParamsError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class DataFormatError(ValidationError):
    pass


class SimulationError(QgarchBenchError):
    pass


class DegenerateScatterError(QgarchBenchError):
    pass


class SamplerError(QgarchBenchError):
    pass


class ActNotConvergedError(QgarchBenchError):
    pass


class ComparisonError(QgarchBenchError):
    pass


class PhaseError(QgarchBenchError):
    """Wraps a failure with the experiment phase it happened in."""

    def __init__(self, phase: str, cause: Exception, artifacts: Optional[list] = None):
        self.phase = phase
        self.cause = cause
        # files already flushed to disk before the failure
        self.artifacts = artifacts or []
        super().__init__(f"{phase}: {cause}")

    @property
    def is_validation(self) -> bool:
        return isinstance(self.cause, ValidationError)
