"""Exception types shared across the package."""


class SchemaError(ValueError):
    """Input does not match the expected schema (columns, feature set, versions)."""


class DataError(ValueError):
    """A row-level ingestion problem, e.g. an unmappable group or outcome value."""


class ParameterError(ValueError):
    """Invalid or infeasible user-supplied parameters."""


class ModelFormatError(ValueError):
    """A model document is malformed or violates its invariants."""


class EmptyGroupError(ValueError):
    """An operation needs both treatment and control rows but one group is empty."""


class ZeroParentUpliftError(ValueError):
    """Lift gain ratio is undefined because the parent uplift is zero."""


class IneligibleSplitError(ValueError):
    """A candidate split violates the preconditions of the divergence gain."""


class DegenerateNormalizerError(ValueError):
    """The Qini normalizer is zero (optimal targeting equals random targeting)."""
