"""Exception types shared across the toolkit."""

from __future__ import annotations


class CitecheckError(Exception):
    """Base class for all toolkit errors."""


# --- citation record schema ---------------------------------------------


class MissingField(CitecheckError):
    """A required field is absent or empty in a citation record."""


class UnknownField(CitecheckError):
    """A citation record carries a key outside the known schema."""


# --- document extraction --------------------------------------------------


class UnreadableDocument(CitecheckError):
    """The PDF cannot be parsed (corrupt, encrypted, unsupported)."""


class EmptyDocument(CitecheckError):
    """The PDF has no extractable text layer (likely scanned images)."""


class NoReferenceSection(CitecheckError):
    """No reference-section heading was found in the document."""


# --- recognition -----------------------------------------------------------


class ModelUnavailable(CitecheckError):
    """A configured learned labeler's weights could not be found."""


class LengthMismatch(CitecheckError):
    """Tag sequence length disagrees with the token count."""


class RecognitionError(CitecheckError):
    """A labeler failed while parsing a batch of citations."""

    def __init__(self, message: str, citation_index: int | None = None):
        super().__init__(message)
        self.citation_index = citation_index


# --- databases and matching -----------------------------------------------


class EmptyDatabase(CitecheckError):
    """The bibliographic database contains no entries."""


class MissingTitleColumn(CitecheckError):
    """An ingestion source lacks the required `title` column."""


class CorruptDatabase(CitecheckError):
    """A persisted database failed an integrity invariant on load."""


class ManifestMismatch(CitecheckError):
    """Entry-stream hash does not match the manifest version."""


class LockfileMissing(CitecheckError):
    """The version lockfile does not exist."""


# --- reporting --------------------------------------------------------------


class AnnotationFailure(CitecheckError):
    """Writing the highlighted copy of a PDF failed."""
