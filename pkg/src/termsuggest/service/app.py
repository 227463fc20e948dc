"""HTTP surface: suggestion endpoint, logging endpoints, metrics.

Suggestion responses depend only on (query, config, loaded indexes), so
replaying a query returns a byte-identical payload. Log appends are
serialized and durable before the request is acknowledged.
"""

from __future__ import annotations

import pickle
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, model_validator

from ..analytics import (
    EventLog,
    MetricsReport,
    SearchEvent,
    Section,
    SelectionEvent,
    ServiceType,
    compute_metrics,
    parse_timestamp,
    read_events,
)
from ..combined import cts_suggest
from ..recommender import (
    AssociationTable,
    Suggestion,
    build_association_table,
    load_corpus,
    tokenize_free_text,
)
from ..suggesters import (
    CrossConcordance,
    Thesaurus,
    hts_suggest,
    load_concordance,
    load_thesaurus,
    ts_suggest,
    ust_suggest,
)
from ..vocabulary import PrefixIndex, TermKind, build_prefix_index, load_vocabulary
from .config import ServiceConfig

BUNDLE_VERSION = 1


class Backend:
    """Immutable suggestion data for every service the config provides.

    All lookups are pure reads; replacing data means building a new
    backend and swapping it in whole.
    """

    def __init__(
        self,
        ust_index: PrefixIndex | None = None,
        thesaurus: Thesaurus | None = None,
        concordance: CrossConcordance | None = None,
        table: AssociationTable | None = None,
        corpus_postings: dict[str, frozenset[str]] | None = None,
        corpus_doc_count: int | None = None,
    ):
        self.ust_index = ust_index
        self.thesaurus = thesaurus
        self.concordance = concordance
        self.table = table
        self.corpus_postings = corpus_postings
        self.corpus_doc_count = corpus_doc_count

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "Backend":
        ust_index = None
        if config.ust_vocabulary:
            entries = load_vocabulary(
                config.ust_vocabulary, default_kind=TermKind.FREE_USER_TERM
            )
            ust_index = build_prefix_index(entries)
        thesaurus = load_thesaurus(config.thesaurus) if config.thesaurus else None
        concordance = (
            load_concordance(config.concordance) if config.concordance else None
        )
        table = None
        if config.association_table and Path(config.association_table).exists():
            table = AssociationTable.load(config.association_table)
        postings = None
        doc_count = None
        corpus = None
        if config.corpus:
            corpus = load_corpus(config.corpus)
            doc_count = len(corpus)
            postings = _build_postings(corpus)
            if table is None:
                table = build_association_table(corpus)
        return cls(ust_index, thesaurus, concordance, table, postings, doc_count)

    def save_bundle(self, path: str | Path) -> None:
        with open(path, "wb") as handle:
            pickle.dump({"version": BUNDLE_VERSION, "backend": self}, handle)

    @classmethod
    def load_bundle(cls, path: str | Path) -> "Backend":
        with open(path, "rb") as handle:
            payload = pickle.load(handle)
        if payload.get("version") != BUNDLE_VERSION:
            raise ValueError(f"{path}: unsupported index bundle version")
        backend = payload["backend"]
        if not isinstance(backend, cls):
            raise ValueError(f"{path}: not an index bundle")
        return backend

    def available_services(self) -> list[ServiceType]:
        services = []
        if self.ust_index is not None:
            services.append(ServiceType.UST)
        if self.concordance is not None:
            services.append(ServiceType.HTS)
        if self.thesaurus is not None:
            services.append(ServiceType.TS)
        if self.thesaurus is not None and self.table is not None:
            services.append(ServiceType.CTS)
        return services

    def result_count(self, query: str) -> int | None:
        """Stub hit count for the demo UI: documents containing every
        query token. Not a retrieval engine."""
        if self.corpus_postings is None:
            return None
        tokens = tokenize_free_text(query)
        if not tokens:
            return 0
        doc_sets = [self.corpus_postings.get(t, frozenset()) for t in tokens]
        return len(frozenset.intersection(*doc_sets)) if doc_sets else 0


def _build_postings(corpus) -> dict[str, frozenset[str]]:
    postings: dict[str, set[str]] = {}
    for doc in corpus:
        tokens = tokenize_free_text(doc.title, doc.abstract)
        tokens.update(term.normalized for term in doc.controlled_terms)
        for token in tokens:
            postings.setdefault(token, set()).add(doc.id)
    return {token: frozenset(ids) for token, ids in postings.items()}


class SelectionIn(BaseModel):
    entered_term: str
    chosen_term: str
    position: int = Field(ge=1)
    section: Literal["main", "alternative"] = "main"
    service_type: Literal["UST", "HTS", "TS", "CTS"]
    timestamp: str | None = None
    session_id: str = Field(min_length=1)

    @model_validator(mode="after")
    def _section_requires_cts(self):
        if self.section == "alternative" and self.service_type != "CTS":
            raise ValueError(
                "section: alternative section requires service_type CTS"
            )
        return self


class SearchIn(BaseModel):
    submitted_term: str
    service_type: Literal["UST", "HTS", "TS", "CTS"] | None = None
    timestamp: str | None = None
    session_id: str = Field(min_length=1)


def _event_time(raw: str | None) -> datetime:
    if raw is None:
        return datetime.now(timezone.utc)
    try:
        return parse_timestamp(raw)
    except ValueError:
        raise HTTPException(
            status_code=422, detail=f"timestamp: not RFC 3339: {raw!r}"
        ) from None


def _suggestion_payload(
    suggestions: list[Suggestion], section: Section
) -> list[dict]:
    return [
        {
            "term": s.term.display,
            "position": s.position,
            "section": section.value,
            "source": s.source.value,
        }
        for s in suggestions
    ]


def create_app(config: ServiceConfig, backend: Backend | None = None) -> FastAPI:
    backend = backend if backend is not None else Backend.from_config(config)
    app = FastAPI(title="termsuggest")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    log = EventLog(config.log_path)
    app.state.backend = backend
    app.state.config = config
    app.state.log = log

    def _resolve_service(name: str | None) -> ServiceType:
        if name is None:
            return config.active_service
        try:
            service = ServiceType(name.upper())
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown service {name!r}")
        return service

    @app.get("/suggest")
    def suggest(
        q: str = Query(..., description="current input field content"),
        service: str | None = None,
        limit: int | None = Query(None, ge=1),
    ):
        active = _resolve_service(service)
        if active not in backend.available_services():
            raise HTTPException(
                status_code=503,
                detail=f"service {active.value} has no data configured",
            )
        main_limit = limit if limit is not None else config.ts_limit
        if active is ServiceType.CTS:
            sectioned = cts_suggest(
                backend.thesaurus.descriptor_index,
                backend.table,
                q,
                ts_limit=main_limit,
                alt_limit=config.alt_limit,
                threshold=config.cts_threshold,
            )
            items = _suggestion_payload(
                list(sectioned.thesaurus_section), Section.MAIN
            ) + _suggestion_payload(
                list(sectioned.alternative_section), Section.ALTERNATIVE
            )
        else:
            if active is ServiceType.UST:
                flat = ust_suggest(backend.ust_index, q, main_limit)
            elif active is ServiceType.HTS:
                flat = hts_suggest(backend.concordance, q, main_limit)
            else:
                flat = ts_suggest(backend.thesaurus.descriptor_index, q, main_limit)
            items = _suggestion_payload(flat, Section.MAIN)
        return {"query": q, "service_type": active.value, "suggestions": items}

    @app.get("/session")
    def session():
        return {"session_id": uuid.uuid4().hex}

    @app.get("/search")
    def search(q: str = Query(...)):
        return {"submitted_term": q, "result_count": backend.result_count(q)}

    @app.post("/log/selection")
    def log_selection(body: SelectionIn):
        try:
            event = SelectionEvent(
                entered_term=body.entered_term,
                chosen_term=body.chosen_term,
                position=body.position,
                section=Section(body.section),
                service_type=ServiceType(body.service_type),
                timestamp=_event_time(body.timestamp),
                session_id=body.session_id,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        log.append(event)
        return {"status": "ok", "kind": "selection"}

    @app.post("/log/search")
    def log_search(body: SearchIn):
        event = SearchEvent(
            submitted_term=body.submitted_term,
            timestamp=_event_time(body.timestamp),
            session_id=body.session_id,
            service_type=ServiceType(body.service_type)
            if body.service_type
            else config.active_service,
        )
        log.append(event)
        return {"status": "ok", "kind": "search"}

    @app.get("/metrics")
    def metrics(service: str | None = None):
        wanted = _resolve_service(service)
        if not Path(config.log_path).exists():
            return _metrics_payload(wanted, None)
        events, _ = read_events(config.log_path)
        cohort = [e for e in events if e.service_type is wanted]
        selections = [e for e in cohort if isinstance(e, SelectionEvent)]
        searches = sum(1 for e in cohort if isinstance(e, SearchEvent))
        users = len({e.session_id for e in cohort})
        if users == 0:
            return _metrics_payload(wanted, None)
        report = compute_metrics(selections, searches, users)
        return _metrics_payload(wanted, report)

    return app


def _metrics_payload(service: ServiceType, report: MetricsReport | None) -> dict:
    if report is None:
        report = MetricsReport(0, 0, 0, None, None, None, None, None, None, None)
    return {
        "service_type": service.value,
        "unique_users": report.unique_users,
        "search_queries": report.search_queries,
        "selected_recommendations": report.selected_recommendations,
        "share_per_searches": report.share_per_searches,
        "share_per_users": report.share_per_users,
        "share_users_selecting": report.share_users_selecting,
        "avg_position": report.avg_position,
        "avg_letters_entered": report.avg_letters_entered,
        "avg_word_length_all": report.avg_word_length_all,
        "avg_word_length_single": report.avg_word_length_single,
    }
