"""Exception hierarchy shared across the package."""


class AdvisorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AdvisorError):
    """Invalid or incomplete application configuration."""


class DimensionMismatch(AdvisorError):
    """Vector dimensions disagree (query vs index, endpoint vs spec, ...)."""


class RemoteUnavailable(AdvisorError):
    """Remote embeddings endpoint failed after bounded retries."""


class BackendUnavailable(AdvisorError):
    """Chat-completion backend failed after bounded retries."""


class NoRuleMatched(AdvisorError):
    """Scripted backend had no matching rule and no fallback."""


class ResponseEmpty(AdvisorError):
    """Backend returned an empty completion."""


class MissingSlot(AdvisorError):
    """Prompt template rendered without a value for a slot in its body."""

    def __init__(self, slot: str):
        super().__init__(f"missing value for template slot {{{slot}}}")
        self.slot = slot


class UnknownSlot(AdvisorError):
    """Prompt rendering received a slot name the template body does not use."""

    def __init__(self, slot: str):
        super().__init__(f"template body has no slot {{{slot}}}")
        self.slot = slot


class CorruptIndex(AdvisorError):
    """Index file failed magic/checksum/structure validation."""


class VersionUnsupported(AdvisorError):
    """Index file was written by an unsupported format version."""


class UnparseableResponse(AdvisorError):
    """Backend response could not be parsed into the expected structure."""


class ExamConversionError(AdvisorError):
    """Exam item could not be converted into a usable Q&A pair."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class InsufficientCategory(AdvisorError):
    """A category holds fewer pairs than the requested sample size."""

    def __init__(self, category, available: int, requested: int):
        super().__init__(
            f"category {category} has {available} pairs, {requested} requested"
        )
        self.category = category
        self.available = available
        self.requested = requested


class UnknownSystemName(AdvisorError):
    """Comparison referenced a report name that is not present."""


class ForgeError(AdvisorError):
    """Dataset forging failed outright (e.g. nothing survived filtering)."""
