"""Exception types shared by all qmultimeter modules."""


class QMultimeterError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QMultimeterError):
    """Operator shapes or Hilbert-space dimensions are inconsistent,
    or a tensor product would exceed the configured dimension cap."""


class ValidationError(QMultimeterError):
    """A constructed object violates one of its defining invariants
    (normalization, positivity, unitarity, sharpness, ...)."""


class ScenarioError(QMultimeterError):
    """Base class for scenario-file errors."""


class ScenarioParseError(ScenarioError):
    """The scenario file is malformed (bad syntax, missing or ill-typed
    fields, or randomness requested without a seed)."""


class ScenarioReferenceError(ScenarioError):
    """A run or object definition refers to a name that does not resolve."""
