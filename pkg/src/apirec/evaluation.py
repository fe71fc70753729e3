"""Developer-behavior simulation, cross-validation, and ranking metrics.

A testing project is split into three parts: completed context declarations
kept as input, an active declaration whose first invocations form the query
while the rest become the ground truth, and discarded declarations. Four
configurations pair the amount of retained context (about half of the
declarations, or all but the last) with the query length (one or four
invocations). Folding is either balanced ten-fold or leave-one-out; each
fold's training projects form the background corpus and every eligible test
project is queried once, scored at every requested cut-off N.
"""

from __future__ import annotations

import csv
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .corpus import Corpus, Declaration, Project
from .engine import (
    DEFAULT_M,
    DEFAULT_QUERY_SIZE,
    RecommendationList,
    recommend_apis,
    recommend_snippets,
)
from .similarity import top_k_projects

CONFIGURATIONS = ("C1.1", "C1.2", "C2.1", "C2.2")
TEN_FOLD = "ten-fold"
LEAVE_ONE_OUT = "leave-one-out"

REPORT_SCHEMA = "apirec-eval-report"
REPORT_VERSION = 1

CSV_COLUMNS = (
    "project_id",
    "category",
    "configuration",
    "k",
    "n",
    "hit",
    "precision",
    "recall",
    "levenshtein",
    "fallback_used",
)

UNCATEGORIZED = "(uncategorized)"


class AllProjectsSkippedError(RuntimeError):
    """Every testing project was skipped; carries the reason histogram."""

    def __init__(self, skips: dict[str, int]):
        super().__init__(f"all projects skipped: {skips}")
        self.skips = skips


def query_length(configuration: str) -> int:
    if configuration in ("C1.1", "C2.1"):
        return 1
    if configuration in ("C1.2", "C2.2"):
        return 4
    raise ValueError(f"unknown configuration {configuration!r}")


def context_size(configuration: str, total_declarations: int) -> int:
    """Number of context declarations retained for a project of given size."""
    if configuration.startswith("C1."):
        return total_declarations // 2 - 1
    if configuration.startswith("C2."):
        return total_declarations - 1
    raise ValueError(f"unknown configuration {configuration!r}")


@dataclass(frozen=True)
class EvalConfig:
    configuration: str
    k: int
    m: int = DEFAULT_M
    n_values: tuple[int, ...] = (1, 5, 10, 15, 20)
    folds: str = TEN_FOLD
    seed: int = 0
    query_size: int = DEFAULT_QUERY_SIZE

    def __post_init__(self) -> None:
        if self.configuration not in CONFIGURATIONS:
            raise ValueError(f"unknown configuration {self.configuration!r}")
        if self.folds not in (TEN_FOLD, LEAVE_ONE_OUT):
            raise ValueError(f"unknown folds {self.folds!r}")
        if self.k < 1 or self.m < 1 or not self.n_values or min(self.n_values) < 1:
            raise ValueError("k, m and every n must be >= 1")


@dataclass(frozen=True)
class EvalSplit:
    """One testing project partitioned into context, query, and ground truth."""

    project_id: str
    category: str | None
    context_declarations: tuple[Declaration, ...]
    active_full: Declaration
    active_query: tuple[str, ...]
    ground_truth: frozenset[str]
    removed: tuple[Declaration, ...]

    @property
    def active_partial(self) -> Declaration:
        return Declaration(
            name=self.active_full.name,
            param_types=self.active_full.param_types,
            invocations=self.active_query,
        )

    def active_project(self) -> Project:
        return Project(
            id=self.project_id,
            category=self.category,
            declarations=self.context_declarations + (self.active_partial,),
        )


class SkippedProject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def split_project(project: Project, configuration: str) -> EvalSplit:
    """Partition a testing project per the configuration.

    Raises SkippedProject when the project has too few declarations or the
    active declaration does not outlast the query prefix.
    """
    decls = project.declarations
    delta = len(decls)
    pi = query_length(configuration)
    keep = context_size(configuration, delta)
    if keep < 1:
        raise SkippedProject("too-few-declarations")
    context = decls[:keep]
    active = decls[keep]
    removed = decls[keep + 1 :]
    if len(active.invocations) <= pi:
        raise SkippedProject("active-declaration-too-short")
    query = active.invocations[:pi]
    ground_truth = frozenset(active.invocations[pi:]) - frozenset(query)
    return EvalSplit(
        project_id=project.id,
        category=project.category,
        context_declarations=context,
        active_full=active,
        active_query=query,
        ground_truth=ground_truth,
        removed=removed,
    )


def make_folds(corpus: Corpus, folds: str, seed: int) -> list[tuple[list[str], list[str]]]:
    """(train ids, test ids) pairs for the requested cross-validation.

    Ten-fold shuffles with the seed, then assigns projects largest-first to
    the fold with the smallest total declaration count (capped so fold sizes
    stay within one of each other). Leave-one-out tests each project alone,
    in corpus order.
    """
    ids = corpus.project_ids
    if folds == LEAVE_ONE_OUT:
        return [([q for q in ids if q != pid], [pid]) for pid in ids]
    if folds != TEN_FOLD:
        raise ValueError(f"unknown folds {folds!r}")
    n_folds = 10
    if len(ids) < n_folds:
        raise ValueError(f"ten-fold requires >= {n_folds} projects, got {len(ids)}")
    rng = random.Random(seed)
    shuffled = list(ids)
    rng.shuffle(shuffled)
    sizes = {pid: len(corpus.project(pid).declarations) for pid in ids}
    shuffled.sort(key=lambda pid: -sizes[pid])  # stable: shuffle breaks ties
    capacity = math.ceil(len(ids) / n_folds)
    fold_members: list[list[str]] = [[] for _ in range(n_folds)]
    fold_load = [0] * n_folds
    for pid in shuffled:
        open_folds = [i for i in range(n_folds) if len(fold_members[i]) < capacity]
        target = min(open_folds, key=lambda i: (fold_load[i], len(fold_members[i]), i))
        fold_members[target].append(pid)
        fold_load[target] += sizes[pid]
    result = []
    for members in fold_members:
        member_set = set(members)
        train = [pid for pid in ids if pid not in member_set]
        result.append((train, sorted(members)))
    return result


def match_count(recommended: Sequence[str], ground_truth: frozenset[str], n: int) -> int:
    return sum(1 for item in recommended[:n] if item in ground_truth)


def precision_at(rec: RecommendationList, ground_truth: frozenset[str], n: int) -> float:
    """Fraction of the top-n slots holding ground-truth items (n denominator)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return match_count(rec.invocations(), ground_truth, n) / n


def recall_at(rec: RecommendationList, ground_truth: frozenset[str], n: int) -> float:
    """Fraction of the ground truth found in the top n (0 when it is empty)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not ground_truth:
        return 0.0
    return match_count(rec.invocations(), ground_truth, n) / len(ground_truth)


def success_rate(hits: Sequence[bool]) -> float:
    """Percentage of projects with at least one top-N hit."""
    if not hits:
        raise ValueError("success_rate needs at least one row")
    return 100.0 * sum(1 for h in hits if h) / len(hits)


def levenshtein(s1: Sequence[str], s2: Sequence[str]) -> int:
    """Edit distance with unit insert/delete/substitute costs over symbols."""
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    previous = list(range(len(s2) + 1))
    for i, a in enumerate(s1, start=1):
        current = [i]
        for j, b in enumerate(s2, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (0 if a == b else 1),
                )
            )
        previous = current
    return previous[len(s2)]


def _fractional_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman's rho: Pearson over fractional ranks (mean ranks for ties).

    Returns None when either series has zero rank variance.
    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("spearman needs two equal-length series of size >= 2")
    rx, ry = _fractional_ranks(xs), _fractional_ranks(ys)
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    return sxy / math.sqrt(sxx * syy)


def kendall(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Kendall's tau-b (tie-corrected). None when a series has no variance."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("kendall needs two equal-length series of size >= 2")
    n = len(xs)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0.0:
        return None
    return (concordant - discordant) / denom


@dataclass(frozen=True)
class EvalRow:
    project_id: str
    category: str | None
    configuration: str
    k: int
    n: int
    hit: bool
    precision: float
    recall: float
    levenshtein: int | None
    fallback_used: bool
    elapsed_s: float


@dataclass
class EvalReport:
    """Per-project rows plus everything needed to recompute the aggregates."""

    rows: list[EvalRow]
    skips: dict[str, int]
    skipped_projects: list[tuple[str, str]]
    folds: str
    fold_count: int
    seed: int
    corpus_projects: int
    corpus_declarations: int
    corpus_vocabulary: int

    def merge(self, other: "EvalReport") -> "EvalReport":
        merged_skips = dict(self.skips)
        for reason, count in other.skips.items():
            merged_skips[reason] = merged_skips.get(reason, 0) + count
        return EvalReport(
            rows=self.rows + other.rows,
            skips=merged_skips,
            skipped_projects=self.skipped_projects + other.skipped_projects,
            folds=self.folds,
            fold_count=self.fold_count,
            seed=self.seed,
            corpus_projects=self.corpus_projects,
            corpus_declarations=self.corpus_declarations,
            corpus_vocabulary=self.corpus_vocabulary,
        )

    def sorted_rows(self) -> list[EvalRow]:
        return sorted(
            self.rows, key=lambda r: (r.configuration, r.k, r.project_id, r.n)
        )

    def aggregates(self) -> list[dict]:
        """Success rate, mean P/R, per-category precision and correlation
        per (configuration, k, N), recomputed from the rows."""
        rows = self.sorted_rows()
        groups: dict[tuple[str, int, int], list[EvalRow]] = {}
        for r in rows:
            groups.setdefault((r.configuration, r.k, r.n), []).append(r)
        out = []
        for (configuration, k, n) in sorted(groups):
            members = groups[(configuration, k, n)]
            categories: dict[str, list[EvalRow]] = {}
            for r in members:
                categories.setdefault(r.category or UNCATEGORIZED, []).append(r)
            per_category = [
                {
                    "category": cat,
                    "cardinality": len(categories[cat]),
                    "mean_precision": sum(r.precision for r in categories[cat])
                    / len(categories[cat]),
                }
                for cat in sorted(categories)
            ]
            rho = tau = None
            if len(per_category) >= 2:
                xs = [float(c["cardinality"]) for c in per_category]
                ys = [c["mean_precision"] for c in per_category]
                rho = spearman(xs, ys)
                tau = kendall(xs, ys)
            out.append(
                {
                    "configuration": configuration,
                    "k": k,
                    "n": n,
                    "projects": len(members),
                    "success_rate": success_rate([r.hit for r in members]),
                    "mean_precision": sum(r.precision for r in members) / len(members),
                    "mean_recall": sum(r.recall for r in members) / len(members),
                    "per_category": per_category,
                    "spearman": rho,
                    "kendall": tau,
                }
            )
        return out

    def levenshtein_summary(self) -> list[dict]:
        """Mean top-snippet edit distance per (configuration, k)."""
        per_project: dict[tuple[str, int], dict[str, int]] = {}
        for r in self.sorted_rows():
            if r.levenshtein is not None:
                per_project.setdefault((r.configuration, r.k), {})[r.project_id] = r.levenshtein
        out = []
        for (configuration, k) in sorted(per_project):
            distances = [per_project[(configuration, k)][pid] for pid in sorted(per_project[(configuration, k)])]
            out.append(
                {
                    "configuration": configuration,
                    "k": k,
                    "projects": len(distances),
                    "mean_levenshtein": sum(distances) / len(distances),
                }
            )
        return out

    def to_json_dict(self) -> dict:
        """Canonical, wall-clock-free report document (byte-stable given a seed)."""
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "seed": self.seed,
            "folds": self.folds,
            "fold_count": self.fold_count,
            "corpus": {
                "projects": self.corpus_projects,
                "declarations": self.corpus_declarations,
                "vocabulary": self.corpus_vocabulary,
            },
            "rows": [
                {
                    "project_id": r.project_id,
                    "category": r.category,
                    "configuration": r.configuration,
                    "k": r.k,
                    "n": r.n,
                    "hit": r.hit,
                    "precision": r.precision,
                    "recall": r.recall,
                    "levenshtein": r.levenshtein,
                    "fallback_used": r.fallback_used,
                }
                for r in self.sorted_rows()
            ],
            "skips": {reason: self.skips[reason] for reason in sorted(self.skips)},
            "skipped_projects": [list(t) for t in sorted(self.skipped_projects)],
            "aggregates": self.aggregates(),
            "levenshtein": self.levenshtein_summary(),
        }

    def timing_dict(self) -> dict:
        """Wall-clock sidecar: per-project recommendation seconds."""
        per_project: dict[tuple[str, int, str], float] = {}
        for r in self.rows:
            per_project[(r.configuration, r.k, r.project_id)] = r.elapsed_s
        rows = [
            {"configuration": c, "k": k, "project_id": p, "elapsed_s": per_project[(c, k, p)]}
            for (c, k, p) in sorted(per_project)
        ]
        elapsed = sorted(t["elapsed_s"] for t in rows)
        median = elapsed[len(elapsed) // 2] if elapsed else None
        return {
            "rows": rows,
            "mean_s": sum(elapsed) / len(elapsed) if elapsed else None,
            "median_s": median,
        }

    def write_json(self, fp: IO[str]) -> None:
        json.dump(self.to_json_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")

    def write_csv(self, fp: IO[str]) -> None:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.sorted_rows():
            writer.writerow(
                [
                    r.project_id,
                    r.category or "",
                    r.configuration,
                    r.k,
                    r.n,
                    int(r.hit),
                    repr(r.precision),
                    repr(r.recall),
                    "" if r.levenshtein is None else r.levenshtein,
                    int(r.fallback_used),
                ]
            )


@dataclass(frozen=True)
class _ProjectResult:
    rows: tuple[EvalRow, ...]


def _evaluate_project(
    training: Corpus, project: Project, cfg: EvalConfig
) -> _ProjectResult:
    split = split_project(project, cfg.configuration)
    active_project = split.active_project()
    d_a = active_project.declarations[-1]
    topsim_p = top_k_projects(training, active_project, cfg.k)
    rec = recommend_apis(
        training, active_project, d_a, cfg.k, cfg.m, max(cfg.n_values), topsim_p=topsim_p
    )
    snippets = recommend_snippets(
        training, rec, d_a, topsim_p, query_size=cfg.query_size, s=1
    )
    distance = (
        levenshtein(snippets[0].invocation_sequence, split.active_full.invocations)
        if snippets
        else None
    )
    recommended = rec.invocations()
    rows = tuple(
        EvalRow(
            project_id=project.id,
            category=project.category,
            configuration=cfg.configuration,
            k=cfg.k,
            n=n,
            hit=match_count(recommended, split.ground_truth, n) > 0,
            precision=precision_at(rec, split.ground_truth, n),
            recall=recall_at(rec, split.ground_truth, n),
            levenshtein=distance,
            fallback_used=rec.fallback_used,
            elapsed_s=rec.timing,
        )
        for n in cfg.n_values
    )
    return _ProjectResult(rows=rows)


def run_evaluation(corpus: Corpus, cfg: EvalConfig, jobs: int = 1) -> EvalReport:
    """Cross-validated simulation of the whole corpus under one configuration.

    Rows are canonicalized after collection, so the report is identical for
    any worker count. Raises AllProjectsSkippedError when nothing is eligible.
    """
    folds = make_folds(corpus, cfg.folds, cfg.seed)
    rows: list[EvalRow] = []
    skips: dict[str, int] = {}
    skipped: list[tuple[str, str]] = []

    for train_ids, test_ids in folds:
        training = corpus.subset(train_ids)
        tasks = [corpus.project(pid) for pid in test_ids]

        def run_one(project: Project) -> tuple[str, _ProjectResult | SkippedProject]:
            try:
                return project.id, _evaluate_project(training, project, cfg)
            except SkippedProject as skip:
                return project.id, skip

        if jobs > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(run_one, tasks))
        else:
            outcomes = [run_one(p) for p in tasks]
        for pid, outcome in outcomes:
            if isinstance(outcome, SkippedProject):
                skips[outcome.reason] = skips.get(outcome.reason, 0) + 1
                skipped.append((pid, outcome.reason))
            else:
                rows.extend(outcome.rows)

    if not rows:
        raise AllProjectsSkippedError(skips)
    return EvalReport(
        rows=rows,
        skips=skips,
        skipped_projects=skipped,
        folds=cfg.folds,
        fold_count=len(folds),
        seed=cfg.seed,
        corpus_projects=len(corpus),
        corpus_declarations=corpus.declaration_total,
        corpus_vocabulary=len(corpus.vocabulary),
    )
