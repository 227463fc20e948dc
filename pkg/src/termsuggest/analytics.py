"""Interaction-log schema, sessionization, usage metrics, and the
reformulation-pattern classifier.

Two record kinds drive every evaluation: a selection (the user picked a
suggestion from the list) and a search (the user submitted a query). Both
are kept as JSON lines in an append-only log; all analysis here runs as
read-only batch jobs over closed files.
"""

from __future__ import annotations

import io
import json
import os
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence, Union

from .vocabulary import normalize

#: A session stays valid while the user keeps acting within this many seconds.
SESSION_GAP_SECONDS = 7200

#: Position histogram ranks reported individually; higher ranks pool into
#: an overflow bucket.
MAX_REPORTED_RANK = 10

OVERFLOW_BUCKET = "overflow"


class ServiceType(Enum):
    UST = "UST"
    HTS = "HTS"
    TS = "TS"
    CTS = "CTS"


class Section(Enum):
    MAIN = "main"
    ALTERNATIVE = "alternative"


class LogFormatError(ValueError):
    """A log line that cannot be decoded into an event."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class SelectionEvent:
    """A suggestion picked from the list, with everything needed to rank
    and classify the pick later."""

    entered_term: str
    chosen_term: str
    position: int
    section: Section
    service_type: ServiceType
    timestamp: datetime
    session_id: str

    def __post_init__(self):
        if self.position < 1:
            raise ValueError("position must be >= 1")
        if self.section is Section.ALTERNATIVE and self.service_type is not ServiceType.CTS:
            raise ValueError("only the combined service has an alternative section")
        if not self.session_id:
            raise ValueError("session_id must be non-empty")


@dataclass(frozen=True)
class SearchEvent:
    """A submitted search. ``service_type`` tags which service cohort was
    active, letting one log hold several evaluation periods."""

    submitted_term: str
    timestamp: datetime
    session_id: str
    service_type: ServiceType | None = None

    def __post_init__(self):
        if not self.session_id:
            raise ValueError("session_id must be non-empty")


Event = Union[SelectionEvent, SearchEvent]


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp ('Z' accepted for UTC)."""
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def event_to_record(event: Event) -> dict:
    if isinstance(event, SelectionEvent):
        return {
            "kind": "selection",
            "entered_term": event.entered_term,
            "chosen_term": event.chosen_term,
            "position": event.position,
            "section": event.section.value,
            "service_type": event.service_type.value,
            "timestamp": event.timestamp.isoformat(),
            "session_id": event.session_id,
        }
    record = {
        "kind": "search",
        "submitted_term": event.submitted_term,
        "timestamp": event.timestamp.isoformat(),
        "session_id": event.session_id,
    }
    if event.service_type is not None:
        record["service_type"] = event.service_type.value
    return record


def event_from_record(record: dict, line_no: int = 0) -> Event:
    kind = record.get("kind")
    try:
        if kind == "selection":
            return SelectionEvent(
                entered_term=str(record["entered_term"]),
                chosen_term=str(record["chosen_term"]),
                position=int(record["position"]),
                section=Section(record["section"]),
                service_type=ServiceType(record["service_type"]),
                timestamp=parse_timestamp(record["timestamp"]),
                session_id=str(record["session_id"]),
            )
        if kind == "search":
            service = record.get("service_type")
            return SearchEvent(
                submitted_term=str(record["submitted_term"]),
                timestamp=parse_timestamp(record["timestamp"]),
                session_id=str(record["session_id"]),
                service_type=ServiceType(service) if service is not None else None,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise LogFormatError(line_no, f"bad {kind} record: {exc}") from None
    raise LogFormatError(line_no, f"unknown event kind: {kind!r}")


class EventLog:
    """Append-only JSONL event log with one logical writer.

    ``append`` serializes writers through a lock and flushes to disk before
    returning, so an acknowledged event survives a crash. Reads always work
    from the file, never from writer state.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._handle: io.TextIOWrapper | None = None

    def append(self, event: Event) -> None:
        line = json.dumps(event_to_record(event), ensure_ascii=False)
        with self._lock:
            if self._handle is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._handle = open(self.path, "a", encoding="utf-8")
            self._handle.write(line + "\n")
            self._handle.flush()
            os.fsync(self._handle.fileno())

    def close(self) -> None:
        with self._lock:
            if self._handle is not None:
                self._handle.close()
                self._handle = None

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def write_events(path: str | Path, events: Iterable[Event]) -> int:
    """Write a whole event log in one pass (batch jobs, fixtures); returns
    the record count. One flush and fsync at the end, unlike the
    per-record durability of :class:`EventLog`."""
    count = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            handle.write(json.dumps(event_to_record(event), ensure_ascii=False) + "\n")
            count += 1
        handle.flush()
        os.fsync(handle.fileno())
    return count


def read_events(path: str | Path) -> tuple[list[Event], list[str]]:
    """Read a log file, returning (events, warnings).

    A malformed final line is tolerated as crash truncation and reported
    as a single warning; malformed lines anywhere else raise
    :class:`LogFormatError` with their line number.
    """
    events: list[Event] = []
    warnings: list[str] = []
    with open(path, encoding="utf-8") as handle:
        lines = handle.readlines()
    last_content = len(lines)
    while last_content and not lines[last_content - 1].strip():
        last_content -= 1
    for index, line in enumerate(lines[:last_content], 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise LogFormatError(index, "record is not an object")
            events.append(event_from_record(record, index))
        except (json.JSONDecodeError, LogFormatError) as exc:
            if index == last_content:
                warnings.append(
                    f"{path}: discarded truncated trailing record at line {index}"
                )
            else:
                if isinstance(exc, LogFormatError):
                    raise
                raise LogFormatError(index, f"invalid JSON: {exc}") from None
    return events, warnings


@dataclass(frozen=True)
class Session:
    """One visitor's contiguous activity: events sorted by time with no
    gap above the session validity window."""

    session_id: str
    events: tuple[Event, ...]

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    @property
    def end(self) -> datetime:
        return self.events[-1].timestamp


def sessionize(
    events: Iterable[Event], *, max_gap_seconds: float = SESSION_GAP_SECONDS
) -> list[Session]:
    """Group events by session id and split at inactivity gaps.

    Within one id, events are ordered by timestamp and cut wherever the gap
    to the previous event exceeds ``max_gap_seconds``.
    """
    by_id: dict[str, list[Event]] = {}
    for event in events:
        by_id.setdefault(event.session_id, []).append(event)
    sessions: list[Session] = []
    for session_id, bucket in by_id.items():
        bucket.sort(key=lambda e: e.timestamp)
        current: list[Event] = []
        for event in bucket:
            if current and (
                (event.timestamp - current[-1].timestamp).total_seconds()
                > max_gap_seconds
            ):
                sessions.append(Session(session_id, tuple(current)))
                current = []
            current.append(event)
        if current:
            sessions.append(Session(session_id, tuple(current)))
    sessions.sort(key=lambda s: (s.start, s.session_id))
    return sessions


def count_unique_users(events: Iterable[Event]) -> int:
    """Distinct visitor ids in a reporting window."""
    return len({event.session_id for event in events})


@dataclass(frozen=True)
class MetricsReport:
    """Key figures for one service's evaluation window.

    ``share_per_users`` follows the selections-per-user arithmetic;
    ``share_users_selecting`` is the stricter share of users who picked at
    least one suggestion. Undefined averages are ``None``, never zero.
    """

    unique_users: int
    search_queries: int
    selected_recommendations: int
    share_per_searches: float | None
    share_per_users: float | None
    share_users_selecting: float | None
    avg_position: float | None
    avg_letters_entered: float | None
    avg_word_length_all: float | None
    avg_word_length_single: float | None


def _nonspace_length(term: str) -> int:
    return sum(1 for ch in term if not ch.isspace())


def compute_metrics(
    selections: Sequence[SelectionEvent], searches: int, unique_users: int
) -> MetricsReport:
    """Key figures over one window: usage shares plus averages describing
    how users interact with the suggestion list."""
    if unique_users < 1:
        raise ValueError("unique_users must be >= 1")
    if searches < 0:
        raise ValueError("searches must be >= 0")
    selected = len(selections)
    share_searches = 100.0 * selected / searches if searches else None
    share_users = 100.0 * selected / unique_users
    users_selecting = len({event.session_id for event in selections})
    share_selecting = 100.0 * users_selecting / unique_users
    positions = [event.position for event in selections]
    letters = [len(event.entered_term.strip()) for event in selections]
    lengths_all = [_nonspace_length(event.chosen_term.strip()) for event in selections]
    lengths_single = [
        _nonspace_length(event.chosen_term.strip())
        for event in selections
        if len(event.chosen_term.split()) == 1
    ]
    return MetricsReport(
        unique_users=unique_users,
        search_queries=searches,
        selected_recommendations=selected,
        share_per_searches=share_searches,
        share_per_users=share_users,
        share_users_selecting=share_selecting,
        avg_position=fmean(positions) if positions else None,
        avg_letters_entered=fmean(letters) if letters else None,
        avg_word_length_all=fmean(lengths_all) if lengths_all else None,
        avg_word_length_single=fmean(lengths_single) if lengths_single else None,
    )


def position_histogram(
    selections: Sequence[SelectionEvent], *, max_rank: int = MAX_REPORTED_RANK
) -> dict:
    """Counts per list rank 1..max_rank, everything higher pooled under
    the overflow bucket. Bucket counts always sum to len(selections)."""
    buckets: dict = {rank: 0 for rank in range(1, max_rank + 1)}
    buckets[OVERFLOW_BUCKET] = 0
    for event in selections:
        if event.position <= max_rank:
            buckets[event.position] += 1
        else:
            buckets[OVERFLOW_BUCKET] += 1
    return buckets


def letters_histogram(selections: Sequence[SelectionEvent]) -> dict[int, int]:
    """Counts per number of characters entered before the pick (leading and
    trailing whitespace ignored). Empty inputs land in bucket 0."""
    lengths = [len(event.entered_term.strip()) for event in selections]
    top = max(lengths, default=-1)
    buckets = {length: 0 for length in range(0, top + 1)}
    for length in lengths:
        buckets[length] += 1
    return buckets


class PatternCategory(Enum):
    """The seven observed entered-to-chosen transition shapes."""

    C1_COMPLETION = "C1"
    C2_FULL_ENTRY_SELECTED = "C2"
    C3_FULL_AFTER_COMPLETION = "C3"
    C4_EXTENSION = "C4"
    C5_SECOND_TERM_CHANGED = "C5"
    C6_MORE_ABSTRACT = "C6"
    C7_STATISTICALLY_NEAR = "C7"
    UNCATEGORIZED = "uncategorized"


#: Shared stem heuristic: two terms count as sharing a stem when their
#: normalized forms agree on a prefix at least this long.
DEFAULT_STEM_PREFIX = 4

_SUBTOKEN_SPLIT = re.compile(r"[\s-]+")


def _is_completion(entered: str, chosen: str) -> bool:
    # The last typed token must be a strict prefix of the token it lines up
    # with; a fully typed final token is an extension, not a completion.
    if not entered or not chosen.startswith(entered):
        return False
    entered_tokens = entered.split()
    chosen_tokens = chosen.split()
    if len(entered_tokens) > len(chosen_tokens):
        return False
    aligned = chosen_tokens[len(entered_tokens) - 1]
    last = entered_tokens[-1]
    return aligned != last and aligned.startswith(last)


def _is_subtoken_prefix(shorter: str, longer: str) -> bool:
    # "mother" cuts "mother-child clinic" at a hyphen boundary: treat
    # hyphen-joined parts as their own tokens for the abstraction check.
    a = _SUBTOKEN_SPLIT.split(shorter)
    b = _SUBTOKEN_SPLIT.split(longer)
    return 0 < len(a) < len(b) and b[: len(a)] == a


def _common_prefix_length(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def classify_pattern(
    event: SelectionEvent,
    session_history: Sequence[SelectionEvent] = (),
    *,
    lookback: str = "session",
    stem_prefix: int = DEFAULT_STEM_PREFIX,
) -> PatternCategory:
    """Classify one selection's entered-to-chosen transition.

    ``session_history`` holds the earlier selections of the same session in
    time order; it only matters for the repeat-after-completion category.
    ``lookback`` is either ``"session"`` (any earlier selection counts) or
    ``"previous"`` (only the most recent one). First matching rule wins:

    1. repeat of a term completed earlier in the session,
    2. fully entered term selected as-is,
    3. mid-word completion of the last typed token,
    4. extension with additional tokens,
    5. more abstract concept (token prefix, hyphen parts included),
    6. two-token input with the second token changed,
    7. statistically near pick from the alternative section (no shared stem).
    """
    if lookback not in ("session", "previous"):
        raise ValueError(f"unknown lookback mode: {lookback!r}")
    entered = normalize(event.entered_term)
    chosen = normalize(event.chosen_term)
    entered_tokens = entered.split()
    chosen_tokens = chosen.split()

    if entered == chosen:
        scope = session_history if lookback == "session" else session_history[-1:]
        for earlier in scope:
            if normalize(earlier.chosen_term) == chosen and _is_completion(
                normalize(earlier.entered_term), chosen
            ):
                return PatternCategory.C3_FULL_AFTER_COMPLETION
        return PatternCategory.C2_FULL_ENTRY_SELECTED
    if _is_completion(entered, chosen):
        return PatternCategory.C1_COMPLETION
    if (
        len(entered_tokens) >= 1
        and len(chosen_tokens) > len(entered_tokens)
        and chosen_tokens[: len(entered_tokens)] == entered_tokens
    ):
        return PatternCategory.C4_EXTENSION
    if (
        len(chosen_tokens) >= 1
        and len(entered_tokens) > len(chosen_tokens)
        and entered_tokens[: len(chosen_tokens)] == chosen_tokens
    ) or _is_subtoken_prefix(chosen, entered):
        return PatternCategory.C6_MORE_ABSTRACT
    if (
        len(entered_tokens) == 2
        and len(chosen_tokens) == 2
        and entered_tokens[0] == chosen_tokens[0]
        and entered_tokens[1] != chosen_tokens[1]
    ):
        return PatternCategory.C5_SECOND_TERM_CHANGED
    if (
        event.section is Section.ALTERNATIVE
        and _common_prefix_length(entered, chosen) < stem_prefix
    ):
        return PatternCategory.C7_STATISTICALLY_NEAR
    return PatternCategory.UNCATEGORIZED


def classify_selections(
    selections: Sequence[SelectionEvent],
    *,
    lookback: str = "session",
    stem_prefix: int = DEFAULT_STEM_PREFIX,
) -> list[tuple[SelectionEvent, PatternCategory]]:
    """Classify every selection, accumulating per-session history so the
    repeat-after-completion rule sees what came before."""
    classified: list[tuple[SelectionEvent, PatternCategory]] = []
    for session in sessionize(selections):
        history: list[SelectionEvent] = []
        for event in session.events:
            assert isinstance(event, SelectionEvent)
            category = classify_pattern(
                event, history, lookback=lookback, stem_prefix=stem_prefix
            )
            classified.append((event, category))
            history.append(event)
    return classified


@dataclass(frozen=True)
class PatternShare:
    category: PatternCategory
    count: int
    share: float  # percent of all classified events of the service
    main_share: float | None = None  # per-section split, combined service only
    alternative_share: float | None = None


@dataclass(frozen=True)
class PatternReport:
    service_type: ServiceType | None
    total: int
    rows: tuple[PatternShare, ...]

    def share_of(self, category: PatternCategory) -> float:
        for row in self.rows:
            if row.category is category:
                return row.share
        return 0.0


def pattern_report(
    classified: Sequence[tuple[SelectionEvent, PatternCategory]],
    service_type: ServiceType | None = None,
) -> PatternReport:
    """Per-category frequency shares; the combined service additionally
    reports each category split by originating section."""
    if service_type is not None:
        classified = [
            (event, category)
            for event, category in classified
            if event.service_type is service_type
        ]
    total = len(classified)
    if total == 0:
        return PatternReport(service_type, 0, ())
    split_sections = service_type is ServiceType.CTS
    counts: dict[PatternCategory, int] = {}
    main_counts: dict[PatternCategory, int] = {}
    for event, category in classified:
        counts[category] = counts.get(category, 0) + 1
        if event.section is Section.MAIN:
            main_counts[category] = main_counts.get(category, 0) + 1
    rows = []
    for category in PatternCategory:
        count = counts.get(category, 0)
        if count == 0:
            continue
        main = main_counts.get(category, 0)
        rows.append(
            PatternShare(
                category=category,
                count=count,
                share=100.0 * count / total,
                main_share=100.0 * main / total if split_sections else None,
                alternative_share=(
                    100.0 * (count - main) / total if split_sections else None
                ),
            )
        )
    return PatternReport(service_type, total, tuple(rows))


def _format_cell(value: float | int | None, digits: int = 2) -> str:
    if value is None:
        return "-"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}f}"


METRICS_ROWS = (
    ("Unique users", "unique_users"),
    ("Search queries", "search_queries"),
    ("Selected recommendations", "selected_recommendations"),
    ("Share of selections per search (%)", "share_per_searches"),
    ("Selections per unique user (%)", "share_per_users"),
    ("Users with at least one selection (%)", "share_users_selecting"),
    ("Average position of the selected term", "avg_position"),
    ("Average letters entered before the pick", "avg_letters_entered"),
    ("Average chosen word length (all)", "avg_word_length_all"),
    ("Average chosen word length (single terms)", "avg_word_length_single"),
)


def format_metrics_table(reports: dict[str, MetricsReport]) -> str:
    """Aligned key-figures table with one column per service."""
    names = list(reports)
    header = ["Key figure"] + names
    rows = [header]
    for label, attr in METRICS_ROWS:
        rows.append(
            [label] + [_format_cell(getattr(reports[name], attr)) for name in names]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [
            cell.rjust(widths[i]) for i, cell in enumerate(row[1:], 1)
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def metrics_csv(reports: dict[str, MetricsReport]) -> str:
    names = list(reports)
    lines = ["key_figure," + ",".join(names)]
    for label, attr in METRICS_ROWS:
        cells = [_format_cell(getattr(reports[name], attr)) for name in names]
        lines.append(f"\"{label}\"," + ",".join(cells))
    return "\n".join(lines) + "\n"


def format_pattern_report(report: PatternReport) -> str:
    """Aligned per-category share table; the combined service gets
    main/alternative columns next to the total."""
    if report.total == 0:
        return "no classified selections\n"
    split = any(row.main_share is not None for row in report.rows)
    lines = []
    header = ["Category", "Count", "Share %"]
    if split:
        header += ["Main %", "Alternative %"]
    rows = [header]
    for row in report.rows:
        cells = [row.category.value, str(row.count), f"{row.share:.2f}"]
        if split:
            cells += [f"{row.main_share:.2f}", f"{row.alternative_share:.2f}"]
        rows.append(cells)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(r)
            ).rstrip()
        )
    return "\n".join(lines) + "\n"


def pattern_report_csv(report: PatternReport) -> str:
    split = any(row.main_share is not None for row in report.rows)
    header = "category,count,share"
    if split:
        header += ",main_share,alternative_share"
    lines = [header]
    for row in report.rows:
        line = f"{row.category.value},{row.count},{row.share:.4f}"
        if split:
            line += f",{row.main_share:.4f},{row.alternative_share:.4f}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def histogram_csv(buckets: dict, label: str = "bucket") -> str:
    """Two-column CSV of a histogram, buckets in natural order."""
    lines = [f"{label},count"]
    for key in buckets:
        lines.append(f"{key},{buckets[key]}")
    return "\n".join(lines) + "\n"
