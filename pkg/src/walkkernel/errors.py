"""Typed errors raised across the package.

Every computational failure carries the name of the module that raised it so
the CLI can report it verbatim.
"""


class WalkKernelError(Exception):
    module = "walkkernel"


# exact_series

class SeriesError(WalkKernelError):
    module = "exact_series"


class NonMonomialLeadingTerm(SeriesError):
    pass


class NonSquareLeadingTerm(SeriesError):
    pass


class PrecisionExhausted(SeriesError):
    pass


class IndistinctLeadingTerms(SeriesError):
    pass


class NonRationalLeadingCoefficient(SeriesError):
    pass


class PrecisionComparison(SeriesError):
    """Raised when two series are compared beyond what either one knows."""


# walk_oracle

class OracleError(WalkKernelError):
    module = "walk_oracle"


class SelectorOutOfRange(OracleError):
    pass


# linear_forms

class FormError(WalkKernelError):
    module = "linear_forms"


class UnboundedSupport(FormError):
    pass


class NotEliminable(FormError):
    pass


class KernelNotCancelled(FormError):
    pass


class SingularSystem(FormError):
    pass


# kernel_pipeline

class PipelineError(WalkKernelError):
    module = "kernel_pipeline"


class UnknownModel(PipelineError):
    pass


class NullvectorCheckFailed(PipelineError):
    pass


class UnknownSetMismatch(PipelineError):
    pass


class DegenerateRegime(PipelineError):
    pass


class AllSystemsSingular(PipelineError):
    pass


class DivisibilityFailure(PipelineError):
    pass


# cli_reporting

class MalformedDocument(WalkKernelError):
    module = "cli_reporting"
