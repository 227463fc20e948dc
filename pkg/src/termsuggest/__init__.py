"""Type-ahead term suggestion services with co-word recommendations and
query-log analytics."""

__version__ = "0.1.0"

from .vocabulary import Term, VocabularyEntry, normalize  # noqa: F401
from .suggesters import Source, Suggestion  # noqa: F401
