"""Deterministic synthetic event logs for rehearsing the reporting pipeline.

The default cohort volumes mirror the bundled demo evaluation: four service
cohorts of 1000 visitors each with a few thousand searches and a few hundred
selections apiece. Generation is pure arithmetic over cycle positions, so
the same arguments always produce the same log, byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .analytics import (
    Event,
    Section,
    SearchEvent,
    SelectionEvent,
    ServiceType,
    write_events,
)


@dataclass(frozen=True)
class CohortSpec:
    """Search and selection volumes for one service's evaluation window."""

    searches: int
    selections: int


DEFAULT_COHORTS: dict[ServiceType, CohortSpec] = {
    ServiceType.UST: CohortSpec(searches=3566, selections=252),
    ServiceType.HTS: CohortSpec(searches=3572, selections=104),
    ServiceType.TS: CohortSpec(searches=4165, selections=375),
    ServiceType.CTS: CohortSpec(searches=3604, selections=509),
}

DEFAULT_START = datetime(2026, 1, 5, 8, 0, tzinfo=timezone.utc)

# Positions cycle to an average rank of 2, front-loaded like real pick data.
_POSITION_CYCLE = (1, 1, 1, 1, 2, 2, 2, 3, 3, 4)

# Mid-word completions, full entries, and extensions for the main section.
_MAIN_PAIRS = (
    ("acci", "accident"),
    ("pover", "poverty"),
    ("accident", "accident"),
    ("migrat", "migration"),
    ("accident", "accident analysis"),
    ("famil", "family"),
    ("sozia", "soziale ungleichheit"),
    ("poverty", "poverty"),
    ("bildun", "bildungsforschung"),
    ("family", "family policy"),
)

# Statistically associated picks with no shared stem, for the alternative
# section of the combined service.
_NEAR_PAIRS = (
    ("medicine", "Doctor-patient-relationship"),
    ("school", "Bildungsforschung"),
    ("children", "Familienpolitik"),
    ("inequality", "Soziale Ungleichheit"),
)

#: Share of combined-service selections drawn from the alternative section.
ALTERNATIVE_PERMILLE = 220


def _submitted_term(index: int) -> str:
    pool = ("poverty", "accident analysis", "bildung", "migration", "family policy")
    return pool[index % len(pool)]


def generate_study_log(
    cohorts: dict[ServiceType, CohortSpec] | None = None,
    *,
    users_per_cohort: int = 1000,
    start: datetime = DEFAULT_START,
) -> list[Event]:
    """Build the synthetic evaluation log as an in-memory event list.

    Every cohort sees exactly ``users_per_cohort`` distinct visitor ids;
    searches and selections are dealt round-robin across them.
    """
    if users_per_cohort < 1:
        raise ValueError("users_per_cohort must be >= 1")
    cohorts = DEFAULT_COHORTS if cohorts is None else cohorts
    events: list[Event] = []
    for cohort_index, (service, spec) in enumerate(cohorts.items()):
        base = start + timedelta(days=10 * cohort_index)
        prefix = service.value.lower()
        users = [f"{prefix}-u{i:04d}" for i in range(users_per_cohort)]
        for j in range(spec.searches):
            events.append(
                SearchEvent(
                    submitted_term=_submitted_term(j),
                    timestamp=base + timedelta(seconds=20 * j),
                    session_id=users[j % users_per_cohort],
                    service_type=service,
                )
            )
        for j in range(spec.selections):
            alternative = service is ServiceType.CTS and (
                (j * 1000) // spec.selections < ALTERNATIVE_PERMILLE
            )
            if alternative:
                entered, chosen = _NEAR_PAIRS[j % len(_NEAR_PAIRS)]
                section = Section.ALTERNATIVE
            else:
                entered, chosen = _MAIN_PAIRS[j % len(_MAIN_PAIRS)]
                section = Section.MAIN
            events.append(
                SelectionEvent(
                    entered_term=entered,
                    chosen_term=chosen,
                    position=_POSITION_CYCLE[j % len(_POSITION_CYCLE)],
                    section=section,
                    service_type=service,
                    timestamp=base + timedelta(seconds=20 * j + 10),
                    session_id=users[j % users_per_cohort],
                )
            )
    return events


def write_study_log(
    path: str | Path,
    cohorts: dict[ServiceType, CohortSpec] | None = None,
    *,
    users_per_cohort: int = 1000,
    start: datetime = DEFAULT_START,
) -> int:
    """Write the synthetic log to ``path``; returns the record count."""
    events = generate_study_log(
        cohorts, users_per_cohort=users_per_cohort, start=start
    )
    return write_events(path, events)
