from typing import List, Optional


class OpenBiphotonError(Exception):
    """Base class for every error raised by openbiphoton."""


class CatalogParseError(OpenBiphotonError, ValueError):
    """The catalog document could not be parsed.

    Args:
        message: Human readable description.
        line: 1-based line number in the source document, when known.
        field: Dotted path of the offending field, when known.
    """

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class InvariantViolation(OpenBiphotonError, ValueError):
    def __init__(self, record: str, invariant: str, detail: str = ""):
        message = f"record '{record}' violates invariant '{invariant}'"
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.record = record
        self.invariant = invariant


class DuplicateRecordError(CatalogParseError):
    pass


class UnknownCrystalError(OpenBiphotonError, KeyError):
    def __init__(self, name: str, suggestions: List[str]):
        hint = f" Did you mean: {', '.join(suggestions)}?" if suggestions else ""
        super().__init__(f"Crystal '{name}' not found in catalog.{hint}")
        self.name = name
        self.suggestions = suggestions

    def __str__(self) -> str:
        return str(self.args[0])


class TransparencyError(OpenBiphotonError, ValueError):
    """A wavelength fell outside the transparency range of a crystal."""


class ProfileDomainError(OpenBiphotonError, ValueError):
    """A longitudinal profile was evaluated outside [0, L] or is malformed."""


class ConfigError(OpenBiphotonError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class NoRootError(OpenBiphotonError, RuntimeError):
    """No sign change (and no tangential zero) inside the search bracket."""


class ConvergenceError(OpenBiphotonError, RuntimeError):
    def __init__(self, message: str, best: Optional[float] = None):
        super().__init__(message)
        self.best = best
