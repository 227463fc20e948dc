"""Combined suggestion service: thesaurus completions stacked with an
"Alternative Search Terms" section from the association recommender.

Short inputs get thesaurus completions only; once the input is long enough
to give the recommender something to work with, an extra section of
statistically associated terms appears under the thesaurus list. A term
offered by both sides shows up only in the thesaurus section.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .recommender import AssociationTable, str_suggest
from .suggesters import Source, Suggestion, ts_suggest
from .vocabulary import PrefixIndex, normalize

#: Alternative section appears for normalized inputs longer than this.
DEFAULT_ALTERNATIVE_THRESHOLD = 3


@dataclass(frozen=True)
class SectionedSuggestionList:
    """Ordered suggestions in two stacked sections with one global rank axis.

    Positions run 1..n through the thesaurus section and continue into the
    alternative section, matching how a selection's position is logged.
    """

    thesaurus_section: tuple[Suggestion, ...]
    alternative_section: tuple[Suggestion, ...]

    def __iter__(self) -> Iterator[Suggestion]:
        yield from self.thesaurus_section
        yield from self.alternative_section

    def __len__(self) -> int:
        return len(self.thesaurus_section) + len(self.alternative_section)


def cts_suggest(
    descriptor_index: PrefixIndex,
    table: AssociationTable,
    text: str,
    *,
    ts_limit: int = 10,
    alt_limit: int = 5,
    threshold: int = DEFAULT_ALTERNATIVE_THRESHOLD,
) -> SectionedSuggestionList:
    """Thesaurus completions plus, for inputs of normalized length greater
    than ``threshold``, recommender terms not already in the thesaurus
    section.

    The threshold is evaluated on the normalized input so that padding
    whitespace cannot toggle the alternative section.
    """
    if ts_limit < 1:
        raise ValueError("ts_limit must be >= 1")
    if alt_limit < 0:
        raise ValueError("alt_limit must be >= 0")
    thesaurus_section = tuple(ts_suggest(descriptor_index, text, ts_limit))
    alternative: list[Suggestion] = []
    if alt_limit > 0 and len(normalize(text)) > threshold:
        shown = {s.term.normalized for s in thesaurus_section}
        # Over-fetch by the thesaurus section length: that is the largest
        # number of candidates the dedup step can remove.
        candidates = str_suggest(table, text, alt_limit + len(thesaurus_section))
        kept = [s.term for s in candidates if s.term.normalized not in shown]
        alternative = [
            Suggestion(term, Source.STR, len(thesaurus_section) + offset)
            for offset, term in enumerate(kept[:alt_limit], 1)
        ]
    return SectionedSuggestionList(thesaurus_section, tuple(alternative))
