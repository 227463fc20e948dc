import random

import pytest

from termsuggest.suggesters import (
    ConcordanceMapping,
    CrossConcordance,
    Relation,
    Source,
    Thesaurus,
    hts_suggest,
    load_concordance,
    load_thesaurus,
    ts_suggest,
    ust_suggest,
)
from termsuggest.vocabulary import (
    InputFileError,
    Term,
    VocabularyEntry,
    build_prefix_index,
)


def freq_index(pairs):
    return build_prefix_index(VocabularyEntry(Term.of(t), f) for t, f in pairs)


def mapping(src, rel, dst, src_vocab="V1", dst_vocab="V2"):
    return ConcordanceMapping(src_vocab, Term.of(src), rel, dst_vocab, Term.of(dst))


# --- user search terms ---


def test_ust_frequency_then_alphabetical():
    index = freq_index([("social", 40), ("society", 25), ("sociable", 25)])
    got = ust_suggest(index, "soc", 10)
    assert [s.term.display for s in got] == ["social", "sociable", "society"]
    assert [s.position for s in got] == [1, 2, 3]
    assert all(s.source is Source.UST for s in got)


def test_ust_single_match():
    index = freq_index([("social", 40), ("society", 25), ("sociable", 25)])
    assert [s.term.display for s in ust_suggest(index, "social", 10)] == ["social"]


def test_ust_no_match():
    index = freq_index([("social", 40)])
    assert ust_suggest(index, "x", 10) == []


# --- cross-concordance ---


def test_hts_single_mapping():
    concordance = CrossConcordance(
        [mapping("armut", Relation.EQUIVALENCE, "poverty")]
    )
    got = hts_suggest(concordance, "armut", 10)
    assert [s.term.display for s in got] == ["poverty"]
    assert got[0].source is Source.HTS


def test_hts_no_match():
    concordance = CrossConcordance([mapping("armut", Relation.EQUIVALENCE, "poverty")])
    assert hts_suggest(concordance, "xyz", 10) == []


def test_hts_overlapping_targets_deduplicated_alphabetical():
    concordance = CrossConcordance(
        [
            mapping("armut", Relation.EQUIVALENCE, "poverty"),
            mapping("armutsforschung", Relation.BROADER, "poverty"),
            mapping("armutsforschung", Relation.ASSOCIATION, "deprivation"),
            mapping("armut", Relation.NARROWER, "child poverty"),
        ]
    )
    got = [s.term.display for s in hts_suggest(concordance, "armut", 10)]
    assert got == ["child poverty", "deprivation", "poverty"]


def test_hts_expands_only_first_five_sources():
    mappings = [
        mapping(f"term{i}", Relation.EQUIVALENCE, f"target{i}") for i in range(8)
    ]
    concordance = CrossConcordance(mappings)
    got = {s.term.display for s in hts_suggest(concordance, "term", 20)}
    assert got == {f"target{i}" for i in range(5)}


def test_hts_union_matches_bruteforce_oracle():
    rng = random.Random(4242)
    sources = [f"s{i:02d}" for i in range(30)]
    targets = [f"t{i:02d}" for i in range(20)]
    mappings = [
        mapping(rng.choice(sources), rng.choice(list(Relation)), rng.choice(targets))
        for _ in range(120)
    ]
    concordance = CrossConcordance(mappings)
    for _ in range(50):
        prefix = "s" + rng.choice("0123")
        got = [s.term.display for s in hts_suggest(concordance, prefix, 100)]
        matched = sorted({m.source_term.normalized for m in mappings
                          if m.source_term.normalized.startswith(prefix)})[:5]
        expected = sorted(
            {
                m.target_term.normalized
                for m in mappings
                if m.source_term.normalized in matched
            }
        )
        assert got == expected


def test_concordance_rejects_self_mapping():
    with pytest.raises(ValueError, match="self-mapping"):
        CrossConcordance(
            [mapping("armut", Relation.EQUIVALENCE, "armut", "V1", "V1")]
        )


def test_concordance_same_term_other_vocab_allowed():
    concordance = CrossConcordance(
        [mapping("armut", Relation.EQUIVALENCE, "armut", "V1", "V2")]
    )
    assert len(concordance) == 1


# --- thesaurus ---


def test_ts_prefix_examples(study_thesaurus):
    index = study_thesaurus.descriptor_index
    got = [s.term.display for s in ts_suggest(index, "acci", 10)]
    assert got == ["accident", "accident analysis"]
    got = [s.term.display for s in ts_suggest(index, "accident", 10)]
    assert got == ["accident", "accident analysis"]


def test_ts_empty_prefix_alphabetical(study_thesaurus):
    got = [s.term.normalized for s in ts_suggest(study_thesaurus.descriptor_index, "", 3)]
    assert got == ["acceptance", "accident", "accident analysis"]


def test_ts_never_returns_non_descriptors(study_thesaurus):
    index = study_thesaurus.descriptor_index
    assert ts_suggest(index, "traffic mishap", 10) == []
    assert ts_suggest(index, "pauperism", 10) == []
    # the USE pointer stays available for resolvers
    assert study_thesaurus.use_instead("pauperism").display == "poverty"


def test_ts_sorted_and_duplicate_free(study_thesaurus):
    got = [s.term.normalized for s in ts_suggest(study_thesaurus.descriptor_index, "", 50)]
    assert got == sorted(set(got))


def test_thesaurus_rejects_overlap():
    with pytest.raises(ValueError, match="both descriptor and non-descriptor"):
        Thesaurus([Term.of("poverty")], [(Term.of("poverty"), Term.of("poverty"))])


def test_thesaurus_rejects_dangling_use_target():
    with pytest.raises(ValueError, match="is not a descriptor"):
        Thesaurus([Term.of("poverty")], [(Term.of("pauperism"), Term.of("wealth"))])


# --- file loading ---


def test_load_concordance(tmp_path):
    path = tmp_path / "concordance.tsv"
    path.write_text(
        "V1\tArmut\teq\tV2\tpoverty\n"
        "V1\tArmut\tnt\tV2\tchild poverty\n",
        "utf-8",
    )
    concordance = load_concordance(path)
    assert [t.display for t in concordance.targets_for("armut")] == [
        "poverty",
        "child poverty",
    ]


def test_load_concordance_unknown_relation_reports_line(tmp_path):
    path = tmp_path / "concordance.tsv"
    path.write_text("V1\tArmut\teq\tV2\tpoverty\nV1\tArmut\tfoo\tV2\tx\n", "utf-8")
    with pytest.raises(InputFileError, match=r":2: unknown relation"):
        load_concordance(path)


def test_load_concordance_field_count(tmp_path):
    path = tmp_path / "concordance.tsv"
    path.write_text("V1\tArmut\teq\tV2\n", "utf-8")
    with pytest.raises(InputFileError, match="expected 5 fields"):
        load_concordance(path)


def test_load_thesaurus(tmp_path):
    path = tmp_path / "thesaurus.tsv"
    path.write_text(
        "accident\td\n"
        "accident analysis\td\n"
        "traffic mishap\tnd\taccident\n",
        "utf-8",
    )
    thesaurus = load_thesaurus(path)
    assert thesaurus.descriptor_count == 2
    assert thesaurus.non_descriptor_count == 1


def test_load_thesaurus_nd_requires_target(tmp_path):
    path = tmp_path / "thesaurus.tsv"
    path.write_text("accident\td\nmishap\tnd\n", "utf-8")
    with pytest.raises(InputFileError, match=r":2: non-descriptor without USE"):
        load_thesaurus(path)
