"""Project- and declaration-level similarity.

Projects are compared through a weighted project -> invocation graph: the
edge weight is how many times the project performs the invocation, and each
project's feature vector holds TF-IDF weights ``f_i * ln(n / a_i)`` over its
invoked set, where ``n`` counts the projects in the similarity universe and
``a_i`` counts those containing invocation ``i``. Project similarity is the
cosine of two feature vectors; declaration similarity is the Jaccard index
of the de-duplicated invocation sets.

When the anchor project is not a corpus member (a project still being
written), the universe is the corpus plus the anchor: ``n`` grows by one and
``a_i`` by one for each invocation the anchor makes. Invocations unknown to
the corpus vocabulary carry no signal and are ignored. Cosine scores are
quantized to 12 decimals so that equal-by-construction similarities compare
equal regardless of summation strategy; ranking ties break by ascending
lexicographic key.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence
from weakref import WeakKeyDictionary

import numpy as np

from .corpus import Corpus, Declaration, Project

SCORE_DECIMALS = 12


@dataclass(frozen=True)
class FeatureVector:
    """Sparse TF-IDF weights for one project's invoked set."""

    owner: str
    entries: Mapping[int, float]

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.entries.values()))


@dataclass(frozen=True)
class NeighborSet:
    """Ranked neighbors of an anchor: (key, score) descending, anchor excluded."""

    anchor: object
    neighbors: tuple[tuple[object, float], ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def keys(self) -> list[object]:
        return [k for k, _ in self.neighbors]

    def score_of(self, key: object) -> float | None:
        for k, s in self.neighbors:
            if k == key:
                return s
        return None


class _ProjectMatrix:
    """CSR-ish invocation-count matrix over a corpus, cached per corpus."""

    def __init__(self, corpus: Corpus):
        vocab_size = len(corpus.vocabulary)
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for p in corpus.projects:
            counts: Counter[int] = Counter()
            for d in p.declarations:
                for canonical in d.invocations:
                    counts[corpus.vocabulary.id_of(canonical)] += 1  # type: ignore[index]
            for idx in sorted(counts):
                indices.append(idx)
                data.append(float(counts[idx]))
            indptr.append(len(indices))
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        self.rows = np.repeat(np.arange(len(corpus.projects)), np.diff(self.indptr))
        self.project_counts = np.zeros(vocab_size, dtype=np.float64)
        for idx in range(vocab_size):
            self.project_counts[idx] = corpus.stats_by_id(idx).project_count


_matrix_cache: "WeakKeyDictionary[Corpus, _ProjectMatrix]" = WeakKeyDictionary()


def _matrix_for(corpus: Corpus) -> _ProjectMatrix:
    mat = _matrix_cache.get(corpus)
    if mat is None:
        mat = _ProjectMatrix(corpus)
        _matrix_cache[corpus] = mat
    return mat


def _invocation_counts(project: Project, corpus: Corpus) -> dict[int, int]:
    counts: dict[int, int] = {}
    for d in project.declarations:
        for canonical in d.invocations:
            idx = corpus.vocabulary.id_of(canonical)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
    return counts


def project_features(corpus: Corpus, project: Project) -> FeatureVector:
    """TF-IDF feature vector of a corpus member (natural-log idf)."""
    if project.id not in corpus:
        raise ValueError(f"project {project.id!r} is not a corpus member")
    n = len(corpus)
    entries = {
        idx: count * math.log(n / corpus.stats_by_id(idx).project_count)
        for idx, count in _invocation_counts(project, corpus).items()
    }
    return FeatureVector(owner=project.id, entries=entries)


def cosine(u: FeatureVector, v: FeatureVector) -> float:
    """Cosine similarity over the union of supports, in [0, 1].

    Zero-norm vectors yield 0. The result is rounded to 12 decimals so that
    structurally equal similarities are exactly equal across code paths.
    """
    small, large = (u.entries, v.entries) if len(u.entries) <= len(v.entries) else (v.entries, u.entries)
    dot = 0.0
    for idx in sorted(small):
        w = large.get(idx)
        if w is not None:
            dot += small[idx] * w
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return round(dot / (nu * nv), SCORE_DECIMALS)


def jaccard(d: Declaration, e: Declaration) -> float:
    """Jaccard index of the two de-duplicated invocation sets (empty/empty -> 0)."""
    fd, fe = d.invocation_set, e.invocation_set
    union = len(fd | fe)
    if union == 0:
        return 0.0
    return len(fd & fe) / union


def top_k_projects(corpus: Corpus, active: Project, k: int) -> NeighborSet:
    """The k most cosine-similar corpus projects to `active`.

    `active` may be a corpus member (matched by id; the universe is the
    corpus itself) or an in-progress project (the universe is the corpus
    plus `active`). Ties break by ascending project id; fewer than k
    neighbors are returned when the corpus is small.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mat = _matrix_for(corpus)
    vocab_size = len(corpus.vocabulary)
    member = active.id in corpus

    active_counts = _invocation_counts(active, corpus)
    if member:
        n_universe = len(corpus)
        a = mat.project_counts
    else:
        n_universe = len(corpus) + 1
        a = mat.project_counts.copy()
        if active_counts:
            a[list(active_counts)] += 1.0

    scores: np.ndarray
    if vocab_size == 0 or not active_counts:
        scores = np.zeros(len(corpus), dtype=np.float64)
    else:
        idf = np.log(n_universe / a)
        w_active = np.zeros(vocab_size, dtype=np.float64)
        ids = np.asarray(sorted(active_counts), dtype=np.int64)
        w_active[ids] = np.asarray([active_counts[i] for i in sorted(active_counts)], dtype=np.float64) * idf[ids]
        norm_active = math.sqrt(float(w_active[ids] @ w_active[ids]))
        weights = mat.data * idf[mat.indices]
        nproj = len(corpus)
        norms_sq = np.bincount(mat.rows, weights=weights * weights, minlength=nproj)
        dots = np.bincount(mat.rows, weights=weights * w_active[mat.indices], minlength=nproj)
        norms = np.sqrt(norms_sq)
        denom = norms * norm_active
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = np.where(denom > 0.0, dots / denom, 0.0)
        scores = np.round(raw, SCORE_DECIMALS)

    ranked = sorted(
        ((p.id, float(scores[i])) for i, p in enumerate(corpus.projects) if p.id != active.id),
        key=lambda kv: (-kv[1], kv[0]),
    )
    return NeighborSet(anchor=active.id, neighbors=tuple(ranked[:k]))


def top_m_declarations(
    neighbor_projects: Sequence[Project], d_a: Declaration, m: int
) -> NeighborSet:
    """Up to m declarations from the given projects with Jaccard(d_a, .) > 0.

    Keys are (project_id, declaration_name) pairs; ties break by ascending
    key. Returns an empty set when nothing overlaps (callers fall back).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    scored: list[tuple[tuple[str, str], float]] = []
    for p in neighbor_projects:
        for d in p.declarations:
            s = jaccard(d_a, d)
            if s > 0.0:
                scored.append(((p.id, d.name), s))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return NeighborSet(anchor=d_a.name, neighbors=tuple(scored[:m]))
