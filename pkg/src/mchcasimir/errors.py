"""Error hierarchy shared by every module.

Each error carries a module-qualified ``code`` and the process exit status
the command line front end maps it to.
"""

from __future__ import annotations


class CasimirError(Exception):
    module = "core"
    exit_code = 4

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class ConfigError(CasimirError):
    module = "cli"
    exit_code = 2


class NumericalError(CasimirError):
    exit_code = 3


class InvariantViolation(CasimirError):
    exit_code = 4


# params
class NonPositiveInput(ConfigError, ValueError):
    module = "params"


class DegenerateMasses(ConfigError, ValueError):
    module = "params"


# fock
class TruncationTooLarge(ConfigError, ValueError):
    module = "fock"


# perturbation
class PerturbationTooLarge(ConfigError, ValueError):
    module = "perturbation"


class DegenerateGroundState(NumericalError):
    module = "perturbation"


class BasisMismatch(InvariantViolation, ValueError):
    module = "perturbation"


# response
class OnResonance(NumericalError, ValueError):
    module = "response"


class OffShell(ConfigError, ValueError):
    module = "response"


class NotTransverse(OffShell):
    module = "response"


# semiclassical / qed
class QuadratureNotConverged(NumericalError):
    module = "semiclassical"


class NonNegativeTransitionEnergy(ConfigError, ValueError):
    module = "qed"


class ResolventSingular(NumericalError):
    module = "qed"


class GridTooCoarse(NumericalError):
    module = "qed"


# cli
class ParseError(ConfigError):
    pass


class UnknownField(ConfigError, KeyError):
    def __init__(self, field: str):
        super().__init__(field)
        self.field = field

    def __str__(self) -> str:
        return f"unknown field {self.field!r}"


class RangeError(ConfigError, ValueError):
    pass
