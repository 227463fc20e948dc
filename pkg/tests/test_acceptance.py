"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Run with ``pytest tests/test_acceptance.py -s`` to see the
lines alongside the asserts."""

import math
import random
import time
from contextlib import contextmanager
from datetime import datetime, timedelta, timezone
from itertools import product

import pytest

from termsuggest.analytics import (
    PatternCategory,
    SearchEvent,
    Section,
    SelectionEvent,
    ServiceType,
    classify_pattern,
    classify_selections,
    compute_metrics,
    pattern_report,
    sessionize,
)
from termsuggest.combined import cts_suggest
from termsuggest.recommender import (
    ContingencyCounts,
    DocumentRecord,
    build_association_table,
    llr,
    str_suggest,
)
from termsuggest.suggesters import Thesaurus, ts_suggest, ust_suggest
from termsuggest.synthlog import DEFAULT_COHORTS, generate_study_log
from termsuggest.vocabulary import (
    ALPHABETICAL,
    BY_FREQUENCY,
    Term,
    VocabularyEntry,
    build_prefix_index,
    normalize,
    prefix_lookup,
)

T0 = datetime(2026, 3, 2, 9, 0, tzinfo=timezone.utc)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[acceptance] FAIL  {name}")
        raise
    print(f"[acceptance] PASS  {name}")


def _selection(entered, chosen, *, section=Section.MAIN, service=ServiceType.TS,
               session="s", position=1, at=T0):
    return SelectionEvent(
        entered_term=entered,
        chosen_term=chosen,
        position=position,
        section=section,
        service_type=service,
        timestamp=at,
        session_id=session,
    )


# --- criterion: key-figure share reproduction ---


def test_key_figure_share_reproduction():
    expected = {
        ServiceType.UST: ((7.06, 7.07), 25.2),
        ServiceType.HTS: ((2.91, 2.91), 10.4),
        ServiceType.TS: ((9.00, 9.00), 37.5),
        ServiceType.CTS: ((14.12, 14.12), 50.9),
    }
    with criterion("key-figure shares within 0.02pp, under one second"):
        started = time.perf_counter()
        events = generate_study_log()
        for service, (search_band, user_share) in expected.items():
            cohort = [e for e in events if e.service_type is service]
            selections = [e for e in cohort if isinstance(e, SelectionEvent)]
            searches = sum(1 for e in cohort if isinstance(e, SearchEvent))
            users = len({e.session_id for e in cohort})
            assert users == 1000
            assert searches == DEFAULT_COHORTS[service].searches
            assert len(selections) == DEFAULT_COHORTS[service].selections
            report = compute_metrics(selections, searches, users)
            low, high = search_band
            assert low - 0.02 <= report.share_per_searches <= high + 0.02
            assert abs(report.share_per_users - user_share) <= 0.02
        elapsed = time.perf_counter() - started
        assert elapsed < 1.0, f"took {elapsed:.3f}s"


# --- criterion: classifier golden transitions ---


def test_classifier_golden_transitions():
    with criterion("all seven worked transitions classify to their category"):
        golden = [
            ("acci", "accident", Section.MAIN, ServiceType.TS,
             PatternCategory.C1_COMPLETION),
            ("accident", "accident", Section.MAIN, ServiceType.TS,
             PatternCategory.C2_FULL_ENTRY_SELECTED),
            ("accident", "accident analysis", Section.MAIN, ServiceType.TS,
             PatternCategory.C4_EXTENSION),
            ("cognitive maps", "cognitive development", Section.MAIN,
             ServiceType.UST, PatternCategory.C5_SECOND_TERM_CHANGED),
            ("mother-child clinic", "mother", Section.MAIN, ServiceType.UST,
             PatternCategory.C6_MORE_ABSTRACT),
            ("medicine", "Doctor-patient-relationship", Section.ALTERNATIVE,
             ServiceType.CTS, PatternCategory.C7_STATISTICALLY_NEAR),
        ]
        for entered, chosen, section, service, want in golden:
            event = _selection(entered, chosen, section=section, service=service)
            assert classify_pattern(event) is want, (entered, chosen)

        # the repeat-after-completion row, expressed as its two events
        first = _selection("acci", "accident", session="r")
        second = _selection(
            "accident", "accident", session="r", at=T0 + timedelta(minutes=1)
        )
        pairs = classify_selections([first, second])
        assert [category for _, category in pairs] == [
            PatternCategory.C1_COMPLETION,
            PatternCategory.C3_FULL_AFTER_COMPLETION,
        ]


# --- criterion: per-section share report ---


def test_section_share_report_shape():
    with criterion("per-section and total pattern shares reproduce exactly"):
        spec = [
            # (count, entered, chosen, section)
            (4971, "acci", "accident", Section.MAIN),
            (235, "acci", "accident", Section.ALTERNATIVE),
            (1375, "accident", "accident", Section.MAIN),
            (40, "accident", "accident", Section.ALTERNATIVE),
            (490, "accident", "accident analysis", Section.MAIN),
            (629, "accident", "accident analysis", Section.ALTERNATIVE),
            (2200, "medicine", "Doctor-patient-relationship", Section.ALTERNATIVE),
            (60, "reliability", "sports research", Section.MAIN),
        ]
        events = []
        for count, entered, chosen, section in spec:
            for i in range(count):
                events.append(
                    _selection(
                        entered,
                        chosen,
                        section=section,
                        service=ServiceType.CTS,
                        session=f"{entered}-{section.value}-{i}",
                    )
                )
        assert len(events) == 10000
        report = pattern_report(classify_selections(events), ServiceType.CTS)
        shares = {
            row.category: (row.main_share, row.alternative_share, row.share)
            for row in report.rows
        }
        approx = lambda value: pytest.approx(value, abs=1e-9)
        assert shares[PatternCategory.C1_COMPLETION] == (
            approx(49.71), approx(2.35), approx(52.06))
        assert shares[PatternCategory.C2_FULL_ENTRY_SELECTED] == (
            approx(13.75), approx(0.40), approx(14.15))
        assert shares[PatternCategory.C4_EXTENSION] == (
            approx(4.90), approx(6.29), approx(11.19))
        assert shares[PatternCategory.C7_STATISTICALLY_NEAR] == (
            approx(0.0), approx(22.0), approx(22.0))
        assert shares[PatternCategory.UNCATEGORIZED][2] == approx(0.60)
        assert sum(row.share for row in report.rows) == approx(100.0)


# --- criterion: likelihood-ratio oracle equivalence ---


def _entropy(counts):
    n = sum(counts)
    h = 0.0
    for k in counts:
        if k:
            p = k / n
            h -= p * math.log(p)
    return h


def _g2_oracle(k11, k12, k21, k22):
    n = k11 + k12 + k21 + k22
    rows = (k11 + k12, k21 + k22)
    cols = (k11 + k21, k12 + k22)
    return 2.0 * n * (_entropy(rows) + _entropy(cols) - _entropy((k11, k12, k21, k22)))


def test_llr_oracle_equivalence():
    with criterion("likelihood-ratio weight matches entropy-form oracle"):
        started = time.perf_counter()
        for k11, k12, k21, k22 in product(range(21), repeat=4):
            if k11 + k12 + k21 + k22 == 0:
                continue
            got = llr(ContingencyCounts(k11, k12, k21, k22))
            want = _g2_oracle(k11, k12, k21, k22)
            assert abs(got - max(want, 0.0)) <= 1e-9, (k11, k12, k21, k22)
        for a in range(1, 7):
            for b in range(1, 7):
                for c in range(1, 7):
                    for d in range(1, 7):
                        got = llr(ContingencyCounts(a * c, a * d, b * c, b * d))
                        assert got <= 1e-9
        rng = random.Random(1234)
        for _ in range(10000):
            cells = [rng.randint(0, 400) for _ in range(4)]
            if sum(cells) == 0:
                continue
            counts = ContingencyCounts(*cells)
            assert llr(counts) == pytest.approx(llr(counts.transposed()), rel=1e-12)
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


# --- criterion: prefix index oracle equivalence ---

_SYLLABLES = [
    "ab", "al", "an", "ar", "be", "bi", "ch", "de", "ei", "en", "er", "ge",
    "heit", "in", "ke", "li", "lo", "ma", "mi", "ne", "ni", "po", "ra", "re",
    "so", "sta", "te", "ti", "un", "ung", "ver", "zi",
]


def _random_vocab(rng, size):
    entries = []
    for _ in range(size):
        word = "".join(rng.choices(_SYLLABLES, k=rng.randint(1, 4)))
        if rng.random() < 0.2:
            word += " " + "".join(rng.choices(_SYLLABLES, k=rng.randint(1, 2)))
        freq = rng.randint(0, 99) if rng.random() < 0.8 else None
        entries.append(VocabularyEntry(Term.of(word), freq))
    return entries


def _merge_like_documented(entries):
    merged = {}
    for e in entries:
        key = e.term.normalized
        if key in merged:
            prev = merged[key]
            freqs = [x.rank_key for x in (prev, e) if x.rank_key is not None]
            merged[key] = VocabularyEntry(
                prev.term, max(freqs) if freqs else None, prev.kind
            )
        else:
            merged[key] = e
    return list(merged.values())


def test_prefix_index_oracle_equivalence():
    with criterion("10,000 prefix lookups equal naive filter-sort-truncate"):
        started = time.perf_counter()
        rng = random.Random(987654)
        fixtures = []
        for size in (50, 100, 200, 400, 800, 1600, 3200, 10000):
            entries = _random_vocab(rng, size)
            fixtures.append(
                (entries, _merge_like_documented(entries), build_prefix_index(entries))
            )
        trials = 10000
        for trial in range(trials):
            entries, merged, index = fixtures[trial % len(fixtures)]
            source = rng.choice(entries).term.normalized
            prefix = source[: rng.randint(0, len(source))]
            limit = rng.randint(1, 20)
            key = BY_FREQUENCY if trial % 2 else ALPHABETICAL
            p = normalize(prefix)
            expected = sorted(
                (e for e in merged if e.term.normalized.startswith(p)), key=key
            )[:limit]
            assert prefix_lookup(index, prefix, limit, order=key) == expected
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


# --- criterion: combined-service invariants ---

_WORDS = [
    "arbeit", "armut", "bildung", "einkommen", "familie", "gesundheit",
    "jugend", "kindheit", "kultur", "medien", "migration", "politik",
    "religion", "stadt", "umwelt", "wirtschaft",
]


def test_combined_service_invariants():
    with criterion("combined service: gate, dedup, and section consistency"):
        rng = random.Random(555)
        for _ in range(300):
            descriptors = rng.sample(_WORDS, rng.randint(3, 10))
            thesaurus = Thesaurus(Term.of(d) for d in descriptors)
            corpus = []
            for i in range(rng.randint(4, 15)):
                title = " ".join(rng.choices(_WORDS, k=rng.randint(1, 3)))
                ctrl = rng.sample(descriptors, rng.randint(0, 2))
                corpus.append(
                    DocumentRecord(
                        id=f"d{i}",
                        title=title,
                        controlled_terms=frozenset(Term.of(c) for c in ctrl),
                    )
                )
            table = build_association_table(corpus, min_count=1, top_k=10)
            word = rng.choice(_WORDS)
            text = word[: rng.randint(0, len(word))]
            if rng.random() < 0.15:
                text = f"  {text.upper()}  "
            ts_limit = rng.randint(1, 8)
            alt_limit = rng.randint(0, 5)
            got = cts_suggest(
                thesaurus.descriptor_index, table, text,
                ts_limit=ts_limit, alt_limit=alt_limit,
            )
            ts_terms = {s.term.normalized for s in got.thesaurus_section}
            alt_terms = {s.term.normalized for s in got.alternative_section}
            assert not ts_terms & alt_terms
            if len(normalize(text)) <= 3:
                assert got.alternative_section == ()
            assert list(got.thesaurus_section) == ts_suggest(
                thesaurus.descriptor_index, text, ts_limit
            )
            if got.alternative_section:
                assert got.alternative_section[0].position == len(
                    got.thesaurus_section
                ) + 1


# --- criterion: sessionization splits ---


def test_sessionization_splits_exactly_at_gap():
    with criterion("session splits exactly at gaps above 7200 seconds"):
        rng = random.Random(777)
        gap_pool = [5, 60, 600, 3600, 7199, 7200, 7201, 7300, 9000, 30000]
        events = []
        expected_segments = {}
        for user in range(40):
            session_id = f"u{user}"
            at = T0 + timedelta(minutes=user)
            segments = [[]]
            for i in range(rng.randint(1, 30)):
                if i:
                    gap = rng.choice(gap_pool)
                    at = at + timedelta(seconds=gap)
                    if gap > 7200:
                        segments.append([])
                event = SearchEvent(f"q{i}", at, session_id)
                segments[-1].append(event)
                events.append(event)
            expected_segments[session_id] = segments
        rng.shuffle(events)
        sessions = sessionize(events)
        got = {}
        for session in sessions:
            got.setdefault(session.session_id, []).append(list(session.events))
        for session_id, segments in expected_segments.items():
            parts = sorted(got[session_id], key=lambda seg: seg[0].timestamp)
            assert parts == segments


# --- criterion: suggestion latency at scale ---


def _scale_vocabulary(count):
    terms = []
    pool = _SYLLABLES
    rng = random.Random(31337)
    seen = set()
    while len(terms) < count:
        word = "".join(rng.choices(pool, k=rng.randint(2, 5)))
        if rng.random() < 0.3:
            word += " " + "".join(rng.choices(pool, k=rng.randint(1, 3)))
        if word in seen:
            continue
        seen.add(word)
        terms.append(word)
    return terms


def test_suggestion_latency_at_scale():
    with criterion("p95 suggestion latency under 10 ms at desk scale"):
        rng = random.Random(2468)
        vocab_terms = _scale_vocabulary(100_000)
        descriptor_index = build_prefix_index(
            VocabularyEntry(Term.of(t)) for t in vocab_terms
        )
        ust_index = build_prefix_index(
            VocabularyEntry(Term.of(t), rng.randint(0, 5000)) for t in vocab_terms
        )
        assert len(descriptor_index) == 100_000
        controlled = rng.sample(vocab_terms, 500)
        corpus = [
            DocumentRecord(
                id=f"d{i}",
                title=" ".join(rng.choices(vocab_terms, k=6)),
                controlled_terms=frozenset(
                    Term.of(c) for c in rng.sample(controlled, rng.randint(1, 3))
                ),
            )
            for i in range(10_000)
        ]
        build_started = time.perf_counter()
        table = build_association_table(corpus, min_count=2, top_k=50)
        build_elapsed = time.perf_counter() - build_started
        assert len(table) > 0
        assert build_elapsed < 60.0, f"table build took {build_elapsed:.1f}s"

        queries = []
        for _ in range(2000):
            source = rng.choice(vocab_terms)
            prefix = source[: rng.randint(1, min(8, len(source)))]
            queries.append(prefix)

        timings = []
        for i, query in enumerate(queries):
            started = time.perf_counter()
            if i % 2:
                cts_suggest(descriptor_index, table, query)
            else:
                ust_suggest(ust_index, query, 10)
            timings.append(time.perf_counter() - started)
        timings.sort()
        p95 = timings[int(len(timings) * 0.95)]
        assert p95 < 0.010, f"p95 was {p95 * 1000:.2f} ms"
