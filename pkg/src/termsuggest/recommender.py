"""Search term recommender: co-word training and association-ranked lookup.

Training pairs the free natural-language terms of each document (title and
abstract words) with the controlled vocabulary terms assigned to it, counts
document-level co-occurrence, and weights each (free, controlled) pair with
the log-likelihood-ratio statistic. At query time, free input maps to the
controlled terms it is most strongly associated with.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import AbstractSet, Iterable, Iterator, NamedTuple, Sequence

from .suggesters import Source, Suggestion
from .vocabulary import InputFileError, Term, normalize

# Word tokens: letters (any script) with optional internal hyphens.
# Digits and underscores never start, end, or appear inside a token.
_TOKEN = re.compile(r"[^\W\d_]+(?:-[^\W\d_]+)*")

TABLE_FORMAT = "term-association-table"
TABLE_VERSION = 1


def tokenize_free_text(
    title: str,
    abstract: str | None = None,
    *,
    stopwords: AbstractSet[str] = frozenset(),
) -> set[str]:
    """Normalized word tokens of a title/abstract pair.

    Lowercase, letters plus internal hyphens, minimum length 2,
    deduplicated per document, optional stopword removal.
    """
    text = normalize(f"{title} {abstract}" if abstract else title)
    tokens = {match.group(0) for match in _TOKEN.finditer(text)}
    return {t for t in tokens if len(t) >= 2 and t not in stopwords}


@dataclass(frozen=True)
class DocumentRecord:
    """One training document: free text plus its assigned controlled terms."""

    id: str
    title: str
    abstract: str | None = None
    controlled_terms: frozenset[Term] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")


@dataclass(frozen=True)
class ContingencyCounts:
    """2x2 document counts for one (free term, controlled term) pair.

    k11 = docs with both, k12 = free only, k21 = controlled only,
    k22 = neither.
    """

    k11: int
    k12: int
    k21: int
    k22: int

    def __post_init__(self):
        if min(self.k11, self.k12, self.k21, self.k22) < 0:
            raise ValueError("contingency cells must be non-negative")

    @property
    def n(self) -> int:
        return self.k11 + self.k12 + self.k21 + self.k22

    def transposed(self) -> "ContingencyCounts":
        return ContingencyCounts(self.k11, self.k21, self.k12, self.k22)


def llr(counts: ContingencyCounts) -> float:
    """Log-likelihood-ratio association weight of a contingency table.

    G2 = 2 * sum over cells of k * ln(k / expected), with empty cells
    contributing nothing (the x*ln(x) -> 0 limit). Zero when either
    marginal of the tested pair is empty; never negative.
    """
    n = counts.n
    if n < 1:
        raise ValueError("contingency table is empty")
    row1 = counts.k11 + counts.k12
    row2 = counts.k21 + counts.k22
    col1 = counts.k11 + counts.k21
    col2 = counts.k12 + counts.k22
    if row1 == 0 or col1 == 0:
        return 0.0
    g = 0.0
    for k, row, col in (
        (counts.k11, row1, col1),
        (counts.k12, row1, col2),
        (counts.k21, row2, col1),
        (counts.k22, row2, col2),
    ):
        if k:
            g += k * math.log(k * n / (row * col))
    return max(2.0 * g, 0.0)


class CooccurrenceCounts:
    """Document-level co-occurrence statistics over one corpus."""

    def __init__(
        self,
        n_docs: int,
        free_doc_counts: Counter,
        ctrl_doc_counts: Counter,
        pair_doc_counts: Counter,
        ctrl_terms: dict[str, Term],
    ):
        self.n_docs = n_docs
        self.free_doc_counts = free_doc_counts
        self.ctrl_doc_counts = ctrl_doc_counts
        self.pair_doc_counts = pair_doc_counts
        self.ctrl_terms = ctrl_terms

    def contingency(self, free: str, ctrl: str) -> ContingencyCounts:
        k11 = self.pair_doc_counts.get((free, ctrl), 0)
        k12 = self.free_doc_counts.get(free, 0) - k11
        k21 = self.ctrl_doc_counts.get(ctrl, 0) - k11
        return ContingencyCounts(k11, k12, k21, self.n_docs - k11 - k12 - k21)

    def pairs(self) -> Iterator[tuple[str, Term, ContingencyCounts]]:
        """Every (free term, controlled term) pair seen together at least once."""
        for free, ctrl in self.pair_doc_counts:
            yield free, self.ctrl_terms[ctrl], self.contingency(free, ctrl)


def count_cooccurrences(
    corpus: Sequence[DocumentRecord],
    *,
    stopwords: AbstractSet[str] = frozenset(),
) -> CooccurrenceCounts:
    """Count per-document term co-occurrence across the corpus.

    Rejects an empty corpus and duplicate document ids.
    """
    if not corpus:
        raise ValueError("corpus must not be empty")
    seen_ids: set[str] = set()
    free_counts: Counter = Counter()
    ctrl_counts: Counter = Counter()
    pair_counts: Counter = Counter()
    ctrl_terms: dict[str, Term] = {}
    for doc in corpus:
        if doc.id in seen_ids:
            raise ValueError(f"duplicate document id: {doc.id!r}")
        seen_ids.add(doc.id)
        free = tokenize_free_text(doc.title, doc.abstract, stopwords=stopwords)
        ctrl = set()
        for term in doc.controlled_terms:
            ctrl.add(term.normalized)
            ctrl_terms.setdefault(term.normalized, term)
        free_counts.update(free)
        ctrl_counts.update(ctrl)
        pair_counts.update((f, c) for f in free for c in ctrl)
    return CooccurrenceCounts(
        len(corpus), free_counts, ctrl_counts, pair_counts, ctrl_terms
    )


class AssociationEntry(NamedTuple):
    term: Term
    weight: float


@dataclass
class AssociationTable:
    """Trained mapping from free terms to weighted controlled terms.

    Per free term, entries are sorted by weight descending with an
    alphabetical tie-break, at most ``top_k`` of them, each backed by at
    least ``min_count`` co-occurring documents. Immutable once built.
    """

    entries: dict[str, tuple[AssociationEntry, ...]] = field(default_factory=dict)
    corpus_size: int = 0
    min_count: int = 1
    top_k: int = 1
    built_at: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, free_token: str) -> tuple[AssociationEntry, ...]:
        return self.entries.get(free_token, ())

    def save(self, path: str | Path) -> None:
        payload = {
            "format": TABLE_FORMAT,
            "version": TABLE_VERSION,
            "corpus_size": self.corpus_size,
            "min_count": self.min_count,
            "top_k": self.top_k,
            "built_at": self.built_at,
            "terms": {
                free: [[entry.term.display, entry.weight] for entry in entry_list]
                for free, entry_list in self.entries.items()
            },
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "AssociationTable":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != TABLE_FORMAT:
            raise ValueError(f"{path}: not an association table file")
        if payload.get("version") != TABLE_VERSION:
            raise ValueError(
                f"{path}: unsupported table version {payload.get('version')!r}"
            )
        top_k = int(payload["top_k"])
        entries: dict[str, tuple[AssociationEntry, ...]] = {}
        for free, raw in payload["terms"].items():
            entry_list = tuple(
                AssociationEntry(Term.of(display), float(weight))
                for display, weight in raw
            )
            if len(entry_list) > top_k:
                raise ValueError(
                    f"{path}: entry list for {free!r} exceeds top_k={top_k}"
                )
            keys = [(-e.weight, e.term.normalized) for e in entry_list]
            if any(a >= b for a, b in zip(keys, keys[1:])):
                raise ValueError(f"{path}: entry list for {free!r} is not sorted")
            entries[free] = entry_list
        return cls(
            entries=entries,
            corpus_size=int(payload["corpus_size"]),
            min_count=int(payload["min_count"]),
            top_k=top_k,
            built_at=str(payload["built_at"]),
        )


def build_association_table(
    corpus: Sequence[DocumentRecord],
    min_count: int = 2,
    top_k: int = 50,
    *,
    stopwords: AbstractSet[str] = frozenset(),
    built_at: datetime | None = None,
) -> AssociationTable:
    """Train an association table over the corpus.

    Keeps, per free term, the ``top_k`` strongest-associated controlled
    terms among pairs co-occurring in at least ``min_count`` documents.
    Deterministic for a fixed corpus and ``built_at``.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    counts = count_cooccurrences(corpus, stopwords=stopwords)
    weighted: dict[str, list[AssociationEntry]] = {}
    for free, ctrl_term, table in counts.pairs():
        if table.k11 < min_count:
            continue
        weighted.setdefault(free, []).append(
            AssociationEntry(ctrl_term, llr(table))
        )
    entries = {
        free: tuple(
            sorted(bucket, key=lambda e: (-e.weight, e.term.normalized))[:top_k]
        )
        for free, bucket in weighted.items()
    }
    stamp = (built_at or datetime.now(timezone.utc)).isoformat()
    return AssociationTable(
        entries=entries,
        corpus_size=len(corpus),
        min_count=min_count,
        top_k=top_k,
        built_at=stamp,
    )


def str_suggest(
    table: AssociationTable, text: str, limit: int
) -> list[Suggestion]:
    """Controlled terms associated with ``text``, strongest first.

    The input is tokenized with the training rules; multi-token input
    merges the per-token lists by summing weights, so terms supported by
    several tokens rise. Unknown tokens contribute nothing.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    sums: dict[str, float] = {}
    terms: dict[str, Term] = {}
    for token in sorted(tokenize_free_text(text)):
        for entry in table.lookup(token):
            key = entry.term.normalized
            sums[key] = sums.get(key, 0.0) + entry.weight
            terms.setdefault(key, entry.term)
    ranked = sorted(sums, key=lambda key: (-sums[key], key))[:limit]
    return [
        Suggestion(terms[key], Source.STR, position)
        for position, key in enumerate(ranked, 1)
    ]


def load_corpus(path: str | Path) -> list[DocumentRecord]:
    """Read a corpus file: one JSON record per line with fields
    ``id``, ``title``, ``abstract`` (nullable), ``controlled_terms``."""
    records: list[DocumentRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFileError(path, line_no, f"invalid JSON: {exc}") from None
            try:
                doc = DocumentRecord(
                    id=str(raw["id"]),
                    title=str(raw["title"]),
                    abstract=raw.get("abstract"),
                    controlled_terms=frozenset(
                        Term.of(t) for t in raw.get("controlled_terms", ())
                    ),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InputFileError(path, line_no, f"bad record: {exc}") from None
            if doc.id in seen:
                raise InputFileError(path, line_no, f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)
            records.append(doc)
    return records


def unknown_controlled_terms(
    corpus: Iterable[DocumentRecord], descriptors: AbstractSet[str]
) -> list[tuple[str, Term]]:
    """Controlled terms used by corpus documents but missing from the
    descriptor set, as (document id, term) pairs for ingest reporting."""
    violations: list[tuple[str, Term]] = []
    for doc in corpus:
        for term in sorted(doc.controlled_terms, key=lambda t: t.normalized):
            if term.normalized not in descriptors:
                violations.append((doc.id, term))
    return violations
