import pytest

from termsuggest.recommender import DocumentRecord, build_association_table
from termsuggest.suggesters import Thesaurus
from termsuggest.vocabulary import Term


def _doc(doc_id, title, ctrl, abstract=None):
    return DocumentRecord(
        id=doc_id,
        title=title,
        abstract=abstract,
        controlled_terms=frozenset(Term.of(t) for t in ctrl),
    )


@pytest.fixture(scope="session")
def study_thesaurus():
    """Descriptors covering the worked transition examples."""
    descriptors = [
        "accident",
        "accident analysis",
        "acceptance",
        "Doctor-patient-relationship",
        "cognitive development",
        "mother",
        "poverty",
        "social inequality",
        "sociology",
    ]
    non_descriptors = [("traffic mishap", "accident"), ("pauperism", "poverty")]
    return Thesaurus(
        (Term.of(d) for d in descriptors),
        [(Term.of(a), Term.of(b)) for a, b in non_descriptors],
    )


@pytest.fixture(scope="session")
def study_corpus():
    """Small training corpus; "medicine" co-occurs only with the
    doctor-patient descriptor, which must therefore rank first for it."""
    return [
        _doc("d01", "Medicine and communication", ["Doctor-patient-relationship"]),
        _doc("d02", "Medicine in practice", ["Doctor-patient-relationship"]),
        _doc("d03", "Trust in medicine", ["Doctor-patient-relationship"]),
        _doc("d04", "Accident analysis methods", ["accident", "accident analysis"]),
        _doc("d05", "Accident prevention at work", ["accident"]),
        _doc("d06", "Cognitive development of children", ["cognitive development"]),
        _doc("d07", "Cognitive maps in spatial research", ["cognitive development"]),
        _doc("d08", "Mother-child clinic stays", ["mother"]),
        _doc("d09", "Poverty and social inequality", ["poverty", "social inequality"]),
        _doc("d10", "Social inequality in education", ["social inequality"]),
        _doc("d11", "Poverty research methods", ["poverty"]),
        _doc("d12", "Unemployment statistics", []),
    ]


@pytest.fixture(scope="session")
def study_table(study_corpus):
    return build_association_table(study_corpus, min_count=2, top_k=50)
