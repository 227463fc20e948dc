"""Term normalization, vocabulary storage, and ordered prefix lookup.

Every suggestion service matches user input against a shared normalized
form: Unicode NFC, lowercased, whitespace collapsed. Diacritics are kept
intact by default (the vocabularies are German; "Militär" and "Militar"
are different words), with an opt-in folding flag for sources that need it.
"""

from __future__ import annotations

import heapq
import re
import unicodedata
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

_WHITESPACE = re.compile(r"\s+")


class InputFileError(ValueError):
    """Malformed line in a vocabulary, thesaurus, concordance or corpus file."""

    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def normalize(raw: str, *, fold_diacritics: bool = False) -> str:
    """Return the canonical matching form of ``raw``.

    NFC composition, lowercase, trimmed, internal whitespace runs collapsed
    to single spaces. Idempotent and total. ``lower()`` rather than
    ``casefold()`` so the German sharp s survives ("Straße" must not match
    "strasse" unless diacritic folding is requested explicitly).
    """
    text = unicodedata.normalize("NFC", raw)
    if fold_diacritics:
        decomposed = unicodedata.normalize("NFD", text)
        text = unicodedata.normalize(
            "NFC", "".join(ch for ch in decomposed if not unicodedata.combining(ch))
        )
    return _WHITESPACE.sub(" ", text).strip().lower()


@dataclass(frozen=True)
class Term:
    """A display string plus the normalized form used for matching."""

    display: str
    normalized: str

    @classmethod
    def of(cls, display: str, *, fold_diacritics: bool = False) -> "Term":
        return cls(display, normalize(display, fold_diacritics=fold_diacritics))


class TermKind(Enum):
    DESCRIPTOR = "descriptor"
    NON_DESCRIPTOR = "non-descriptor"
    FREE_USER_TERM = "free-user-term"
    MAPPED_TERM = "mapped-term"


_KIND_ALIASES = {
    "d": TermKind.DESCRIPTOR,
    "nd": TermKind.NON_DESCRIPTOR,
    **{kind.value: kind for kind in TermKind},
}


@dataclass(frozen=True)
class VocabularyEntry:
    """One vocabulary term with its optional ordering data.

    ``rank_key`` is the usage frequency for frequency-ranked vocabularies
    and ``None`` for purely alphabetical ones.
    """

    term: Term
    rank_key: int | None = None
    kind: TermKind | None = None


OrderKey = Callable[[VocabularyEntry], Any]

#: Ascending on the normalized form.
ALPHABETICAL: OrderKey = lambda entry: entry.term.normalized

#: Frequency descending, alphabetical tie-break; entries without a
#: frequency sort as frequency 0.
BY_FREQUENCY: OrderKey = lambda entry: (-(entry.rank_key or 0), entry.term.normalized)


#: Prefix blocks larger than this answer frequency-ordered lookups by
#: scanning a precomputed global frequency ranking instead of heap-selecting
#: within the block; for dense prefixes ("a" on a big vocabulary) the scan
#: finds `limit` hits after a handful of steps.
_DENSE_BLOCK = 2048


class PrefixIndex:
    """Immutable prefix-lookup table over vocabulary entries.

    Entries are kept sorted by normalized term, so a lookup bisects to the
    matching block in O(log n). The structure is never mutated after
    construction; concurrent readers need no coordination, and a reload is
    a fresh build swapped in by the caller.
    """

    def __init__(
        self, entries: Iterable[VocabularyEntry], *, fold_diacritics: bool = False
    ):
        merged: dict[str, VocabularyEntry] = {}
        for entry in entries:
            if entry.rank_key is not None and entry.rank_key < 0:
                raise ValueError(
                    f"negative frequency for term {entry.term.display!r}"
                )
            key = entry.term.normalized
            previous = merged.get(key)
            if previous is None:
                merged[key] = entry
            else:
                merged[key] = _merge_duplicates(previous, entry)
        self._entries = sorted(merged.values(), key=ALPHABETICAL)
        self._keys = [entry.term.normalized for entry in self._entries]
        self._by_frequency = sorted(self._entries, key=BY_FREQUENCY)
        self._fold_diacritics = fold_diacritics

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[VocabularyEntry]:
        return iter(self._entries)

    def matching(self, prefix: str) -> list[VocabularyEntry]:
        """All entries whose normalized term starts with normalize(prefix),
        in alphabetical order."""
        lo, hi = self._range(prefix)
        return self._entries[lo:hi]

    def top_by_frequency(self, prefix: str, limit: int) -> list[VocabularyEntry]:
        """The ``limit`` most frequent entries matching ``prefix``
        (alphabetical tie-break)."""
        lo, hi = self._range(prefix)
        if hi - lo <= _DENSE_BLOCK:
            return heapq.nsmallest(limit, self._entries[lo:hi], key=BY_FREQUENCY)
        p = normalize(prefix, fold_diacritics=self._fold_diacritics)
        hits: list[VocabularyEntry] = []
        for entry in self._by_frequency:
            if entry.term.normalized.startswith(p):
                hits.append(entry)
                if len(hits) == limit:
                    break
        return hits

    def _range(self, prefix: str) -> tuple[int, int]:
        p = normalize(prefix, fold_diacritics=self._fold_diacritics)
        lo = bisect_left(self._keys, p)
        # Keys >= p that share the prefix form one contiguous block, so the
        # end can be bisected on the startswith predicate itself.
        hi = bisect_left(
            self._keys, True, lo, len(self._keys), key=lambda k: not k.startswith(p)
        )
        return lo, hi


def _merge_duplicates(
    first: VocabularyEntry, second: VocabularyEntry
) -> VocabularyEntry:
    # First-seen display and kind win; the larger frequency wins so a noisy
    # duplicate line cannot deflate a term's rank.
    frequencies = [e.rank_key for e in (first, second) if e.rank_key is not None]
    return VocabularyEntry(
        term=first.term,
        rank_key=max(frequencies) if frequencies else None,
        kind=first.kind,
    )


def build_prefix_index(
    entries: Iterable[VocabularyEntry], *, fold_diacritics: bool = False
) -> PrefixIndex:
    """Build an immutable prefix index; duplicate normalized terms are merged,
    keeping the maximum frequency and the first-seen display form."""
    return PrefixIndex(entries, fold_diacritics=fold_diacritics)


def prefix_lookup(
    index: PrefixIndex,
    prefix: str,
    limit: int,
    *,
    order: OrderKey = ALPHABETICAL,
) -> list[VocabularyEntry]:
    """At most ``limit`` entries prefix-matching ``prefix``, in ``order``.

    An empty prefix returns the first ``limit`` entries of the whole
    vocabulary in the requested order.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if order is BY_FREQUENCY:
        return index.top_by_frequency(prefix, limit)
    block = index.matching(prefix)
    if order is ALPHABETICAL:
        return block[:limit]
    return heapq.nsmallest(limit, block, key=order)


def load_vocabulary(
    path: str | Path,
    *,
    default_kind: TermKind | None = None,
    fold_diacritics: bool = False,
) -> list[VocabularyEntry]:
    """Read a tab-separated vocabulary file.

    One record per line: ``display_term<TAB>optional_frequency<TAB>optional_kind``.
    Lines starting with ``#`` and blank lines are ignored. Raises
    :class:`InputFileError` with the offending line number on bad input.
    """
    entries: list[VocabularyEntry] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            display = fields[0]
            term = Term.of(display, fold_diacritics=fold_diacritics)
            if not term.normalized:
                raise InputFileError(path, line_no, "empty term")
            frequency: int | None = None
            if len(fields) > 1 and fields[1].strip():
                try:
                    frequency = int(fields[1])
                except ValueError:
                    raise InputFileError(
                        path, line_no, f"frequency is not an integer: {fields[1]!r}"
                    ) from None
                if frequency < 0:
                    raise InputFileError(path, line_no, "frequency must be >= 0")
            kind = default_kind
            if len(fields) > 2 and fields[2].strip():
                try:
                    kind = _KIND_ALIASES[fields[2].strip()]
                except KeyError:
                    raise InputFileError(
                        path, line_no, f"unknown term kind: {fields[2]!r}"
                    ) from None
            if len(fields) > 3:
                raise InputFileError(
                    path, line_no, f"expected at most 3 fields, got {len(fields)}"
                )
            entries.append(VocabularyEntry(term, frequency, kind))
    return entries
