from __future__ import annotations

import random
from fractions import Fraction

import pytest

from apirec.corpus import Corpus, Declaration, Project
from apirec.engine import (
    combined_rating,
    mean_rating,
    popularity_baseline,
    predict_rating,
    recommend_apis,
    recommend_snippets,
    tensor_for,
)
from apirec.similarity import top_k_projects, top_m_declarations
from dense_ref import ref_popularity, ref_recommend
from synthgen import random_active, random_corpus

# Worked by hand on the toy corpus before the engine was written: with k=2
# the two unknown cells of pa's fourth declaration score
#   i1 -> 1/2 - (33/16)/(23/4) = 13/92
#   i2 -> 1/2 - (131/48)/(23/4) = 7/276
# evaluated left-to-right in ranked neighbor order with IEEE doubles.
GOLDEN_I1 = 0.14130434782608697
GOLDEN_I2 = 0.025362318840579712


def project_of(pid: str, *invocation_lists: list[str]) -> Project:
    decls = tuple(
        Declaration(name=f"m{i}()", invocations=tuple(invs))
        for i, invs in enumerate(invocation_lists)
    )
    return Project(id=pid, declarations=decls)


class TestMeanRating:
    def test_no_invocations(self):
        assert mean_rating(Declaration(name="d()"), 10) == 0.0

    def test_full_vocabulary(self):
        d = Declaration(name="d()", invocations=("a()", "b()", "c()"))
        assert mean_rating(d, 3) == 1.0

    def test_three_of_thirty(self):
        d = Declaration(name="d()", invocations=("a()", "b()", "c()", "a()"))
        assert mean_rating(d, 30) == pytest.approx(0.1)


class TestCombinedRating:
    def test_invoking_declaration_with_positive_similarity(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=2)
        i3 = toy_corpus.vocabulary.id_of("i3")
        assert combined_rating(tensor, ("p1", "d2"), i3, topsim_p) == 1.0

    def test_non_invoking_declaration(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=2)
        i2 = toy_corpus.vocabulary.id_of("i2")
        assert combined_rating(tensor, ("p1", "d2"), i2, topsim_p) == 0.0

    def test_zero_similarity_project_contributes_zero(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=2)
        i2 = toy_corpus.vocabulary.id_of("i2")
        # p2/d1 invokes i2, but cos(pa, p2) = 0
        assert combined_rating(tensor, ("p2", "d1"), i2, topsim_p) == 0.0

    def test_outside_neighborhood_rejected(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=1)
        with pytest.raises(ValueError, match="not in a neighbor project"):
            combined_rating(tensor, ("p2", "d1"), 0, topsim_p)

    def test_toy_matches_dense_formula_for_all_cells(self, toy_corpus: Corpus):
        # oracle: literal weighted average over the neighbor projects
        # containing the declaration
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=2)
        sim = dict(topsim_p.neighbors)
        for pid in ("p1", "p2"):
            project = toy_corpus.project(pid)
            for decl in project.declarations:
                for canonical in toy_corpus.vocabulary:
                    num = (1.0 if canonical in decl.invocation_set else 0.0) * sim[pid]
                    den = sim[pid]
                    expected = num / den if den > 0 else 0.0
                    idx = toy_corpus.vocabulary.id_of(canonical)
                    assert combined_rating(tensor, (pid, decl.name), idx, topsim_p) == expected


class TestPredictRating:
    def test_collapses_to_one_when_every_neighbor_invokes(self):
        # equal row means make the formula collapse to mean + (1 - mean) = 1
        from apirec.similarity import NeighborSet

        corpus = Corpus.build(
            [project_of("p1", ["s1()", "i()"]), project_of("p2", ["s2()", "i()"])]
        )
        tensor = tensor_for(corpus)
        topsim_p = NeighborSet("wip", (("p1", 0.9), ("p2", 0.4)))
        topsim_d = NeighborSet("d()", ((("p1", "m0()"), 0.5), (("p2", "m0()"), 0.25)))
        known = frozenset(
            {corpus.vocabulary.id_of("s1()"), corpus.vocabulary.id_of("s2()")}
        )
        i_id = corpus.vocabulary.id_of("i()")
        score = predict_rating(tensor, known, i_id, topsim_d, topsim_p)
        assert score == pytest.approx(1.0, abs=1e-12)

    def test_collapses_to_zero_when_no_neighbor_invokes(self):
        from apirec.similarity import NeighborSet

        corpus = Corpus.build(
            [project_of("p1", ["s1()", "j()"], ["z()"]), project_of("p2", ["s2()", "j()"])]
        )
        tensor = tensor_for(corpus)
        topsim_p = NeighborSet("wip", (("p1", 0.9), ("p2", 0.4)))
        topsim_d = NeighborSet("d()", ((("p1", "m0()"), 0.5), (("p2", "m0()"), 0.25)))
        known = frozenset(
            {corpus.vocabulary.id_of("s1()"), corpus.vocabulary.id_of("s2()")}
        )
        # z() is in the vocabulary but invoked by neither neighbor declaration
        candidate = corpus.vocabulary.id_of("z()")
        score = predict_rating(tensor, known, candidate, topsim_d, topsim_p)
        assert score == pytest.approx(0.0, abs=1e-12)

    def test_toy_golden_cells(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        pa = toy_corpus.project("pa")
        d_a = pa.declaration("da")
        topsim_p = top_k_projects(toy_corpus, pa, k=2)
        topsim_d = top_m_declarations(
            [toy_corpus.project(str(pid)) for pid in topsim_p.keys()], d_a, 25
        )
        known = frozenset(
            toy_corpus.vocabulary.id_of(s) for s in d_a.invocation_set
        )
        i1 = toy_corpus.vocabulary.id_of("i1")
        i2 = toy_corpus.vocabulary.id_of("i2")
        assert predict_rating(tensor, known, i1, topsim_d, topsim_p) == GOLDEN_I1
        assert predict_rating(tensor, known, i2, topsim_d, topsim_p) == GOLDEN_I2
        assert GOLDEN_I1 == pytest.approx(float(Fraction(13, 92)), abs=1e-12)
        assert GOLDEN_I2 == pytest.approx(float(Fraction(7, 276)), abs=1e-12)

    def test_empty_neighborhood_rejected(self, toy_corpus: Corpus):
        tensor = tensor_for(toy_corpus)
        topsim_p = top_k_projects(toy_corpus, toy_corpus.project("pa"), k=2)
        from apirec.similarity import NeighborSet

        with pytest.raises(ValueError, match="non-empty"):
            predict_rating(tensor, frozenset(), 0, NeighborSet("d", ()), topsim_p)


class TestRecommendApis:
    def test_planted_clone_surfaces_extra_invocation(self):
        corpus = Corpus.build(
            [
                project_of("twin", ["a()", "b()"], ["a()", "c()", "x()"]),
                project_of("other", ["z()"]),
            ]
        )
        active = project_of("mine", ["a()", "b()"], ["a()", "c()"])
        rec = recommend_apis(corpus, active, active.declarations[1], k=1, m=5, n=5)
        assert "x()" in rec.top(5)
        assert not rec.fallback_used

    def test_full_vocabulary_query_yields_empty_list(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        everything = Declaration(name="da", invocations=("i1", "i2", "i3", "i4"))
        active = Project(id="wip", declarations=(everything,))
        rec = recommend_apis(toy_corpus, active, everything, k=2, m=5, n=10)
        assert rec.items == ()
        assert not rec.fallback_used

    def test_no_overlap_falls_back_to_popularity(self, toy_corpus: Corpus):
        lonely = Declaration(name="d()", invocations=("nothing/like/this()",))
        active = Project(id="wip", declarations=(lonely,))
        rec = recommend_apis(toy_corpus, active, lonely, k=2, m=5, n=3)
        assert rec.fallback_used
        assert rec.items == tuple(ref_popularity(toy_corpus, set(lonely.invocations), 3))

    def test_foreign_declaration_rejected(self, toy_corpus: Corpus):
        active = Project(id="wip", declarations=(Declaration(name="d()"),))
        with pytest.raises(ValueError, match="does not belong"):
            recommend_apis(toy_corpus, active, Declaration(name="other()"), 1, 1, 1)

    def test_exclusion_of_known_invocations(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        d_a = pa.declaration("da")
        rec = recommend_apis(toy_corpus, pa, d_a, k=2, m=25, n=10)
        assert not (set(rec.invocations()) & d_a.invocation_set)

    def test_toy_end_to_end_ranking(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        rec = recommend_apis(toy_corpus, pa, pa.declaration("da"), k=2, m=25, n=10)
        assert rec.items == (("i1", GOLDEN_I1), ("i2", GOLDEN_I2))

    def test_determinism(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        a = recommend_apis(toy_corpus, pa, pa.declaration("da"), k=2, m=25, n=10)
        b = recommend_apis(toy_corpus, pa, pa.declaration("da"), k=2, m=25, n=10)
        assert a.items == b.items
        assert a.fallback_used == b.fallback_used

    def test_top_n_nesting(self):
        rng = random.Random(7)
        corpus = random_corpus(rng, max_projects=8, max_decls=10, vocab_size=25)
        active, d_a = random_active(rng, corpus)
        lists = [
            recommend_apis(corpus, active, d_a, k=3, m=10, n=n).invocations()
            for n in range(1, 12)
        ]
        for shorter, longer in zip(lists, lists[1:]):
            assert longer[: len(shorter)] == shorter

    def test_long_tail_invocation_recommended(self):
        # the signal invocation appears in exactly one corpus project, yet
        # wins because that project is the sole similar neighbor
        corpus = Corpus.build(
            [
                project_of("niche", ["rare/sig()", "shared/a()", "shared/b()"]),
                project_of("big1", ["common/x()"], ["common/x()", "common/y()"]),
                project_of("big2", ["common/x()", "common/y()"], ["common/y()"]),
            ]
        )
        active = project_of("wip", ["shared/a()", "shared/b()"])
        rec = recommend_apis(corpus, active, active.declarations[0], k=1, m=5, n=5)
        assert rec.top(1) == ["rare/sig()"]
        assert corpus.project_count("rare/sig()") == 1

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_dense_reference(self, seed: int):
        rng = random.Random(4200 + seed)
        corpus = random_corpus(rng)
        active, d_a = random_active(rng, corpus)
        k, m, n = rng.randint(1, 5), rng.randint(1, 30), 30
        rec = recommend_apis(corpus, active, d_a, k, m, n)
        expected, fallback = ref_recommend(corpus, active, d_a, k, m, n)
        assert rec.fallback_used == fallback
        assert rec.invocations() == [c for c, _ in expected]
        for (_, got), (_, want) in zip(rec.items, expected):
            assert got == pytest.approx(want, abs=1e-9)

    def test_similarity_weighted_mode_is_distinct_and_deterministic(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        d_a = pa.declaration("da")
        plain = recommend_apis(toy_corpus, pa, d_a, k=2, m=25, n=10)
        weighted = recommend_apis(
            toy_corpus, pa, d_a, k=2, m=25, n=10, similarity_weighted=True
        )
        again = recommend_apis(
            toy_corpus, pa, d_a, k=2, m=25, n=10, similarity_weighted=True
        )
        assert weighted.items == again.items
        # scaling the neighbor ratings by cos(pa, p1) = 2/sqrt(5) < 1 must
        # lower the positive-signal scores
        assert weighted.items != plain.items
        assert weighted.items[0][1] < plain.items[0][1]

    def test_member_anchor_matches_dense_reference(self):
        rng = random.Random(99)
        corpus = random_corpus(rng)
        anchor = corpus.projects[0]
        d_a = anchor.declarations[-1]
        rec = recommend_apis(corpus, anchor, d_a, k=3, m=10, n=20)
        expected, fallback = ref_recommend(corpus, anchor, d_a, 3, 10, 20)
        assert rec.fallback_used == fallback
        assert rec.invocations() == [c for c, _ in expected]


class TestPopularityBaseline:
    def test_most_frequent_first(self, tiny_corpus: Corpus):
        rec = popularity_baseline(tiny_corpus, known=set(), n=3)
        # three invocations tie at 4 declarations each; lexicographic order
        assert rec.items[0] == ("http/Client/get(java.lang.String)", 1.0)
        assert rec.items[1] == ("json/Parser/parse(java.lang.String)", 1.0)
        assert rec.items[2] == ("log/Logger/info(java.lang.String)", 1.0)
        assert rec.fallback_used

    def test_known_excluded(self, tiny_corpus: Corpus):
        rec = popularity_baseline(
            tiny_corpus, known={"log/Logger/info(java.lang.String)"}, n=3
        )
        assert "log/Logger/info(java.lang.String)" not in rec.invocations()

    def test_entire_vocabulary_known_yields_empty(self, tiny_corpus: Corpus):
        rec = popularity_baseline(tiny_corpus, known=set(tiny_corpus.vocabulary), n=5)
        assert rec.items == ()

    def test_full_ordering_matches_counting_script(self, tiny_corpus: Corpus):
        rec = popularity_baseline(tiny_corpus, known=set(), n=100)
        assert list(rec.items) == ref_popularity(tiny_corpus, set(), 100)


class TestRecommendSnippets:
    def test_exact_match_ranks_first(self, toy_corpus: Corpus):
        pa = toy_corpus.project("pa")
        d_a = pa.declaration("da")
        topsim_p = top_k_projects(toy_corpus, pa, k=2)
        rec = recommend_apis(toy_corpus, pa, d_a, k=2, m=25, n=2)
        snippets = recommend_snippets(toy_corpus, rec, d_a, topsim_p, query_size=5, s=3)
        assert snippets, "expected snippet candidates"
        assert snippets[0].jaccard_score <= 1.0
        scores = [s.jaccard_score for s in snippets]
        assert scores == sorted(scores, reverse=True)

    def test_identical_set_scores_one(self, tiny_corpus: Corpus):
        d_a = Declaration(
            name="mine()",
            invocations=("db/Connection/open()", "db/Connection/query(java.lang.String)"),
        )
        active = Project(id="wip", declarations=(d_a,))
        topsim_p = top_k_projects(tiny_corpus, active, k=3)
        rec = recommend_apis(tiny_corpus, active, d_a, k=3, m=25, n=1)
        snippets = recommend_snippets(tiny_corpus, rec, d_a, topsim_p, query_size=1, s=5)
        # query = {open, query} + 1 recommended; beta/Store/open() has both
        assert snippets[0].project_id == "beta"
        assert snippets[0].declaration_name == "com/example/beta/Store/open()"
        assert snippets[0].body is not None and "conn.open()" in snippets[0].body

    def test_no_overlap_yields_empty(self, toy_corpus: Corpus):
        d_a = Declaration(name="d()", invocations=("stranger()",))
        active = Project(id="wip", declarations=(d_a,))
        topsim_p = top_k_projects(toy_corpus, active, k=2)
        rec = recommend_apis(toy_corpus, active, d_a, k=2, m=5, n=2)
        # force an empty query overlap by replacing recommendations
        from apirec.engine import RecommendationList

        empty_rec = RecommendationList(items=(), fallback_used=True, timing=0.0)
        assert recommend_snippets(toy_corpus, empty_rec, d_a, topsim_p) == []

    def test_ranking_matches_exhaustive_scan(self, tiny_corpus: Corpus):
        d_a = Declaration(
            name="mine()",
            invocations=("http/Client/get(java.lang.String)", "json/Parser/parse(java.lang.String)"),
        )
        active = Project(id="wip", declarations=(d_a,))
        topsim_p = top_k_projects(tiny_corpus, active, k=3)
        rec = recommend_apis(tiny_corpus, active, d_a, k=3, m=25, n=3)
        snippets = recommend_snippets(tiny_corpus, rec, d_a, topsim_p, query_size=3, s=10)

        query = set(d_a.invocations) | set(rec.top(3))
        expected = []
        for pid in topsim_p.keys():
            project = tiny_corpus.project(str(pid))
            for decl in project.declarations:
                e = decl.invocation_set
                union = query | e
                score = len(query & e) / len(union) if union else 0.0
                if score > 0:
                    expected.append(((project.id, decl.name), score))
        expected.sort(key=lambda kv: (-kv[1], kv[0]))
        got = [((s.project_id, s.declaration_name), s.jaccard_score) for s in snippets]
        assert got == expected[:10]

    def test_body_absent_without_source_ref(self, tiny_corpus: Corpus):
        d_a = Declaration(name="mine()", invocations=("ui/Widget/show()",))
        active = Project(id="wip", declarations=(d_a,))
        topsim_p = top_k_projects(tiny_corpus, active, k=3)
        rec = recommend_apis(tiny_corpus, active, d_a, k=3, m=25, n=2)
        snippets = recommend_snippets(tiny_corpus, rec, d_a, topsim_p, s=10)
        by_name = {s.declaration_name: s for s in snippets}
        flash = by_name.get("com/example/gamma/View/flash()")
        assert flash is not None and flash.body is None
