"""Recommendation engine over the sparse project x declaration x invocation tensor.

Ratings are binary: cell (project, declaration, invocation) is 1 iff the
declaration contains the invocation. A missing rating for the declaration
under development is predicted from the most similar declarations found in
the most similar projects:

    score(d, i) = mean(d) + sum_e (R(e, i) - mean(e)) * jaccard(d, e)
                            / sum_e jaccard(d, e)

where e ranges over the neighbor declarations, mean(.) is the binary row
mean over the corpus vocabulary, and R(e, i) combines e's rating for i over
the neighbor projects weighted by project similarity. A declaration lives in
exactly one project, so the combination reduces to e's own rating when its
project has positive similarity to the active project, and to 0 otherwise.

Scores are used for ranking only and may leave [0, 1]. When no declaration
overlaps the query at all, a corpus-popularity baseline answers instead and
the result is flagged as a fallback.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence
from weakref import WeakKeyDictionary

from .corpus import Corpus, Declaration, Project
from .similarity import NeighborSet, top_k_projects, top_m_declarations

DeclKey = tuple[str, str]

DEFAULT_K = 4
DEFAULT_M = 25
DEFAULT_N = 20
DEFAULT_QUERY_SIZE = 5
DEFAULT_SNIPPET_COUNT = 5


@dataclass(frozen=True)
class RecommendationList:
    """Ranked invocations with scores, strictly non-increasing.

    `fallback_used` marks popularity-baseline answers; `timing` is the
    wall-clock seconds spent producing the list (corpus load excluded).
    """

    items: tuple[tuple[str, float], ...]
    fallback_used: bool
    timing: float

    def invocations(self) -> list[str]:
        return [c for c, _ in self.items]

    def top(self, n: int) -> list[str]:
        return [c for c, _ in self.items[:n]]


@dataclass(frozen=True)
class SnippetRecommendation:
    """A corpus declaration proposed as a code snippet for the query."""

    declaration_name: str
    project_id: str
    jaccard_score: float
    invocation_sequence: tuple[str, ...]
    body: str | None


class RatingTensor:
    """Per-project sparse binary slices of the corpus rating tensor.

    Rows are declarations, columns the corpus vocabulary; storage is one
    id-set per declaration, so memory tracks the number of (declaration,
    invocation) pairs.
    """

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self.vocabulary_size = len(corpus.vocabulary)
        self._cells: dict[DeclKey, frozenset[int]] = {}
        for p in corpus.projects:
            for d in p.declarations:
                ids = frozenset(
                    idx
                    for canonical in d.invocation_set
                    if (idx := corpus.vocabulary.id_of(canonical)) is not None
                )
                self._cells[(p.id, d.name)] = ids

    def row(self, key: DeclKey) -> frozenset[int]:
        return self._cells[key]

    def rating(self, key: DeclKey, invocation_id: int) -> int:
        return 1 if invocation_id in self._cells[key] else 0


_tensor_cache: "WeakKeyDictionary[Corpus, RatingTensor]" = WeakKeyDictionary()


def tensor_for(corpus: Corpus) -> RatingTensor:
    tensor = _tensor_cache.get(corpus)
    if tensor is None:
        tensor = RatingTensor(corpus)
        _tensor_cache[corpus] = tensor
    return tensor


def mean_rating(d: Declaration, vocabulary_size: int) -> float:
    """Binary row mean: distinct invocations over the vocabulary size."""
    if vocabulary_size < 1:
        raise ValueError("vocabulary_size must be >= 1")
    return len(d.invocation_set) / vocabulary_size


def combined_rating(
    tensor: RatingTensor,
    e_key: DeclKey,
    invocation_id: int,
    topsim_p: NeighborSet,
    similarity_weighted: bool = False,
) -> float:
    """Rating of declaration e for an invocation, combined over neighbor projects.

    e belongs to exactly one project, so the similarity-weighted average over
    the neighbor projects containing e collapses to e's own binary rating when
    that project's similarity is positive, and to 0 when it is zero.
    `similarity_weighted` enables the experimental variant that scales the
    rating by the project similarity instead.
    """
    project_id = e_key[0]
    sim = topsim_p.score_of(project_id)
    if sim is None:
        raise ValueError(f"declaration {e_key!r} is not in a neighbor project")
    if sim == 0.0:
        return 0.0
    r = float(tensor.rating(e_key, invocation_id))
    return r * sim if similarity_weighted else r


def predict_rating(
    tensor: RatingTensor,
    d_a_known: frozenset[int],
    invocation_id: int,
    topsim_d: NeighborSet,
    topsim_p: NeighborSet,
    similarity_weighted: bool = False,
) -> float:
    """Predicted rating of the active declaration for one candidate invocation.

    Neighbor terms are accumulated in ranked order (left to right) so the
    result is bit-identical across runs and worker counts.
    """
    if not topsim_d.neighbors:
        raise ValueError("topsim_d must be non-empty")
    r_bar_d = len(d_a_known) / tensor.vocabulary_size
    num = 0.0
    den = 0.0
    for e_key, sim_b in topsim_d.neighbors:
        combined = combined_rating(tensor, e_key, invocation_id, topsim_p, similarity_weighted)
        r_bar_e = len(tensor.row(e_key)) / tensor.vocabulary_size
        num += (combined - r_bar_e) * sim_b
        den += sim_b
    if den == 0.0:
        raise ValueError("total declaration similarity is zero")
    return r_bar_d + num / den


def popularity_baseline(corpus: Corpus, known: Iterable[str], n: int) -> RecommendationList:
    """Top-n invocations by corpus-wide declaration count, excluding `known`.

    Scores are declaration counts normalized by the corpus maximum; ties
    break by ascending canonical string.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    started = time.perf_counter()
    known_set = set(known)
    counts = [
        (canonical, corpus.stats_by_id(idx).declaration_count)
        for idx, canonical in enumerate(corpus.vocabulary)
    ]
    max_count = max((c for _, c in counts), default=0)
    candidates = [
        (canonical, count / max_count)
        for canonical, count in counts
        if canonical not in known_set
    ]
    candidates.sort(key=lambda kv: (-kv[1], kv[0]))
    return RecommendationList(
        items=tuple(candidates[:n]),
        fallback_used=True,
        timing=time.perf_counter() - started,
    )


def recommend_apis(
    corpus: Corpus,
    active: Project,
    d_a: Declaration,
    k: int = DEFAULT_K,
    m: int = DEFAULT_M,
    n: int = DEFAULT_N,
    *,
    topsim_p: NeighborSet | None = None,
    similarity_weighted: bool = False,
) -> RecommendationList:
    """Ranked next-invocation predictions for the active declaration.

    Candidates are the invocations of the neighbor declarations minus those
    d_a already makes; each is scored by the collaborative-filtering formula.
    With no overlapping neighbor declaration the popularity baseline answers
    instead (`fallback_used` set). Pass a precomputed `topsim_p` to reuse the
    project neighborhood across calls.
    """
    if k < 1 or m < 1 or n < 1:
        raise ValueError("k, m and n must be >= 1")
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    if all(d is not d_a and d.name != d_a.name for d in active.declarations):
        raise ValueError(f"declaration {d_a.name!r} does not belong to project {active.id!r}")
    started = time.perf_counter()

    if topsim_p is None:
        topsim_p = top_k_projects(corpus, active, k)
    neighbor_projects = [corpus.project(pid) for pid in topsim_p.keys()]  # type: ignore[arg-type]
    topsim_d = top_m_declarations(neighbor_projects, d_a, m)
    if not topsim_d.neighbors:
        baseline = popularity_baseline(corpus, d_a.invocation_set, n)
        return RecommendationList(
            items=baseline.items, fallback_used=True, timing=time.perf_counter() - started
        )

    tensor = tensor_for(corpus)
    known_strings = d_a.invocation_set
    known_ids = frozenset(
        idx for s in known_strings if (idx := corpus.vocabulary.id_of(s)) is not None
    )
    candidate_ids: set[int] = set()
    for e_key, _ in topsim_d.neighbors:
        candidate_ids |= tensor.row(e_key)
    candidate_ids -= known_ids

    scored = [
        (
            corpus.vocabulary.canonical_of(idx),
            predict_rating(tensor, known_ids, idx, topsim_d, topsim_p, similarity_weighted),
        )
        for idx in candidate_ids
    ]
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return RecommendationList(
        items=tuple(scored[:n]), fallback_used=False, timing=time.perf_counter() - started
    )


def recommend_snippets(
    corpus: Corpus,
    recs: RecommendationList,
    d_a: Declaration,
    topsim_p: NeighborSet,
    query_size: int = DEFAULT_QUERY_SIZE,
    s: int = DEFAULT_SNIPPET_COUNT,
) -> list[SnippetRecommendation]:
    """Top-s neighbor declarations matching the query invocation set.

    The query is d_a's known invocations plus the first `query_size`
    recommended ones; candidates are ranked by Jaccard against it and their
    bodies resolved from the snippet store when the source_ref is present.
    """
    if query_size < 1 or s < 1:
        raise ValueError("query_size and s must be >= 1")
    query = set(d_a.invocation_set) | set(recs.top(query_size))
    query_decl = Declaration(name=d_a.name or "(query)", invocations=tuple(sorted(query)))
    neighbor_projects = [corpus.project(pid) for pid in topsim_p.keys()]  # type: ignore[arg-type]
    ranked = top_m_declarations(neighbor_projects, query_decl, s)
    out: list[SnippetRecommendation] = []
    for (pid, name), score in ranked.neighbors:
        decl = corpus.project(pid).declaration(name)
        out.append(
            SnippetRecommendation(
                declaration_name=name,
                project_id=pid,
                jaccard_score=score,
                invocation_sequence=decl.invocations,
                body=corpus.snippet_for(decl),
            )
        )
    return out
