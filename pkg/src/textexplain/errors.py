"""Exception hierarchy shared by all engine modules."""


class ExplainError(Exception):
    """Base class for all engine errors."""


class BadConfig(ExplainError):
    """Run configuration is invalid or inconsistent."""


class MissingLexicon(ExplainError):
    """A lexicon file could not be located or parsed."""


class ModelUnavailable(ExplainError):
    """The model handle cannot serve requests (dead process, broken pipe)."""


class ProtocolViolation(ExplainError):
    """An external model sent a malformed or misaligned reply."""


class RemoteModelError(ExplainError):
    """An external model answered a request with an explicit error."""


class EmptyInput(ExplainError):
    """An operation that needs at least one token received none."""


class EmptyDocument(ExplainError):
    """A document has no tokens and cannot be explained."""


class DegenerateInput(ExplainError):
    """Clustering input has too little structure (fewer than 2 distinct rows)."""


class EmptyCorpus(ExplainError):
    """Global aggregation received no usable local explanations."""


class InvalidFeature(ExplainError):
    """A feature's token positions do not match the document being perturbed."""


class BadReport(ExplainError):
    """A serialized report is malformed or has an unsupported schema version."""


class IoFailure(ExplainError):
    """A report could not be written to its destination."""
