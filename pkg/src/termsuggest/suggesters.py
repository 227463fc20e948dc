"""The three base suggestion services, each returning a flat ordered list.

* user search terms, ranked by how often users entered them,
* intellectually mapped terms from cross-vocabulary concordances,
* thesaurus descriptors, plain alphabetical.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .vocabulary import (
    ALPHABETICAL,
    BY_FREQUENCY,
    InputFileError,
    PrefixIndex,
    Term,
    TermKind,
    VocabularyEntry,
    build_prefix_index,
    prefix_lookup,
)


class Source(Enum):
    """Which service produced a suggestion."""

    UST = "UST"
    HTS = "HTS"
    TS = "TS"
    STR = "STR"


@dataclass(frozen=True)
class Suggestion:
    term: Term
    source: Source
    position: int  # 1-based rank in the displayed list


def _as_suggestions(
    terms: Iterable[Term], source: Source, start: int = 1
) -> list[Suggestion]:
    return [
        Suggestion(term, source, position)
        for position, term in enumerate(terms, start)
    ]


def ust_suggest(index: PrefixIndex, text: str, limit: int) -> list[Suggestion]:
    """Prefix-matching user search terms, most frequently used first,
    alphabetical tie-break."""
    entries = prefix_lookup(index, text, limit, order=BY_FREQUENCY)
    return _as_suggestions((entry.term for entry in entries), Source.UST)


class Relation(Enum):
    EQUIVALENCE = "eq"
    BROADER = "bt"
    NARROWER = "nt"
    ASSOCIATION = "rel"


@dataclass(frozen=True)
class ConcordanceMapping:
    source_vocab: str
    source_term: Term
    relation: Relation
    target_vocab: str
    target_term: Term


class CrossConcordance:
    """Intellectually created term mappings between member vocabularies.

    Holds a prefix index over all mapped source terms plus, per source
    term, the union of its mapped targets across every relation kind.
    """

    def __init__(self, mappings: Iterable[ConcordanceMapping]):
        targets: dict[str, list[Term]] = {}
        sources: dict[str, Term] = {}
        count = 0
        for mapping in mappings:
            if (
                mapping.source_vocab == mapping.target_vocab
                and mapping.source_term.normalized == mapping.target_term.normalized
            ):
                raise ValueError(
                    f"self-mapping for {mapping.source_term.display!r} "
                    f"in vocabulary {mapping.source_vocab!r}"
                )
            count += 1
            key = mapping.source_term.normalized
            sources.setdefault(key, mapping.source_term)
            bucket = targets.setdefault(key, [])
            if all(t.normalized != mapping.target_term.normalized for t in bucket):
                bucket.append(mapping.target_term)
        self._targets = {key: tuple(terms) for key, terms in targets.items()}
        self._source_index = build_prefix_index(
            VocabularyEntry(term, kind=TermKind.MAPPED_TERM)
            for term in sources.values()
        )
        self._size = count

    def __len__(self) -> int:
        return self._size

    @property
    def source_index(self) -> PrefixIndex:
        return self._source_index

    def targets_for(self, source_normalized: str) -> tuple[Term, ...]:
        return self._targets.get(source_normalized, ())


def hts_suggest(
    concordance: CrossConcordance,
    text: str,
    limit: int,
    *,
    max_sources: int = 5,
) -> list[Suggestion]:
    """Mapped terms for controlled terms prefix-matching ``text``.

    Expands the alphabetically first ``max_sources`` matched source terms
    (bounding worst-case latency for short prefixes), merges their targets
    across all relation kinds, and returns them deduplicated and sorted
    alphabetically on the normalized form.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    matched = prefix_lookup(
        concordance.source_index, text, max_sources, order=ALPHABETICAL
    )
    seen: dict[str, Term] = {}
    for entry in matched:
        for target in concordance.targets_for(entry.term.normalized):
            seen.setdefault(target.normalized, target)
    ordered = [seen[key] for key in sorted(seen)][:limit]
    return _as_suggestions(ordered, Source.HTS)


class Thesaurus:
    """Descriptors plus non-descriptor synonyms pointing at them.

    Only descriptors are ever suggested; the USE pointers are retained for
    future resolvers but stay out of every suggestion list.
    """

    def __init__(
        self,
        descriptors: Iterable[Term],
        non_descriptors: Mapping[Term, Term] | Sequence[tuple[Term, Term]] = (),
    ):
        self._descriptors: dict[str, Term] = {}
        for term in descriptors:
            self._descriptors.setdefault(term.normalized, term)
        pairs = (
            non_descriptors.items()
            if isinstance(non_descriptors, Mapping)
            else non_descriptors
        )
        self._use_instead: dict[str, tuple[Term, Term]] = {}
        for synonym, target in pairs:
            if synonym.normalized in self._descriptors:
                raise ValueError(
                    f"{synonym.display!r} is both descriptor and non-descriptor"
                )
            if target.normalized not in self._descriptors:
                raise ValueError(
                    f"USE target {target.display!r} of {synonym.display!r} "
                    "is not a descriptor"
                )
            self._use_instead[synonym.normalized] = (synonym, target)
        self._index = build_prefix_index(
            VocabularyEntry(term, kind=TermKind.DESCRIPTOR)
            for term in self._descriptors.values()
        )

    @property
    def descriptors(self) -> Iterator[Term]:
        return iter(self._descriptors.values())

    @property
    def descriptor_count(self) -> int:
        return len(self._descriptors)

    @property
    def non_descriptor_count(self) -> int:
        return len(self._use_instead)

    @property
    def descriptor_index(self) -> PrefixIndex:
        return self._index

    def use_instead(self, term: str) -> Term | None:
        """The preferred descriptor for a non-descriptor, if ``term`` is one."""
        entry = self._use_instead.get(term)
        return entry[1] if entry else None


def ts_suggest(
    descriptor_index: PrefixIndex, text: str, limit: int
) -> list[Suggestion]:
    """Thesaurus descriptors prefix-matching ``text``, alphabetical."""
    entries = prefix_lookup(descriptor_index, text, limit, order=ALPHABETICAL)
    return _as_suggestions((entry.term for entry in entries), Source.TS)


def load_concordance(path: str | Path) -> CrossConcordance:
    """Read a tab-separated concordance file.

    One mapping per line:
    ``source_vocab<TAB>source_term<TAB>relation<TAB>target_vocab<TAB>target_term``
    with relation one of ``eq``, ``bt``, ``nt``, ``rel``.
    """
    mappings: list[ConcordanceMapping] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise InputFileError(
                    path, line_no, f"expected 5 fields, got {len(fields)}"
                )
            source_vocab, source, relation_code, target_vocab, target = fields
            try:
                relation = Relation(relation_code.strip())
            except ValueError:
                raise InputFileError(
                    path, line_no, f"unknown relation: {relation_code!r}"
                ) from None
            mapping = ConcordanceMapping(
                source_vocab.strip(),
                Term.of(source),
                relation,
                target_vocab.strip(),
                Term.of(target),
            )
            if not mapping.source_term.normalized or not mapping.target_term.normalized:
                raise InputFileError(path, line_no, "empty term")
            mappings.append(mapping)
    try:
        return CrossConcordance(mappings)
    except ValueError as exc:
        raise InputFileError(path, 0, str(exc)) from None


def load_thesaurus(path: str | Path) -> Thesaurus:
    """Read a tab-separated thesaurus file.

    One term per line: ``term<TAB>kind<TAB>optional_use_instead`` where kind
    is ``d`` (descriptor) or ``nd`` (non-descriptor, USE target required).
    """
    descriptors: list[Term] = []
    non_descriptors: list[tuple[Term, Term]] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise InputFileError(path, line_no, "expected term and kind")
            term = Term.of(fields[0])
            if not term.normalized:
                raise InputFileError(path, line_no, "empty term")
            kind = fields[1].strip()
            if kind == "d":
                descriptors.append(term)
            elif kind == "nd":
                if len(fields) < 3 or not fields[2].strip():
                    raise InputFileError(
                        path, line_no, "non-descriptor without USE target"
                    )
                non_descriptors.append((term, Term.of(fields[2])))
            else:
                raise InputFileError(
                    path, line_no, f"kind must be 'd' or 'nd', got {kind!r}"
                )
    try:
        return Thesaurus(descriptors, non_descriptors)
    except ValueError as exc:
        raise InputFileError(path, 0, str(exc)) from None
