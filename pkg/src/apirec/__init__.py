"""Context-aware collaborative-filtering recommender for API invocations."""

from .corpus import (
    Corpus,
    CorpusError,
    Declaration,
    DuplicateError,
    EmptyCorpusError,
    ParseError,
    Project,
    Vocabulary,
    load_snippets,
    parse_facts,
    serialize_facts,
    serialize_snippets,
)
from .engine import (
    RatingTensor,
    RecommendationList,
    SnippetRecommendation,
    combined_rating,
    mean_rating,
    popularity_baseline,
    predict_rating,
    recommend_apis,
    recommend_snippets,
    tensor_for,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    EvalSplit,
    kendall,
    levenshtein,
    make_folds,
    precision_at,
    recall_at,
    run_evaluation,
    spearman,
    split_project,
    success_rate,
)
from .similarity import (
    FeatureVector,
    NeighborSet,
    cosine,
    jaccard,
    project_features,
    top_k_projects,
    top_m_declarations,
)

__all__ = [
    "Corpus",
    "CorpusError",
    "Declaration",
    "DuplicateError",
    "EmptyCorpusError",
    "EvalConfig",
    "EvalReport",
    "EvalSplit",
    "FeatureVector",
    "NeighborSet",
    "ParseError",
    "Project",
    "RatingTensor",
    "RecommendationList",
    "SnippetRecommendation",
    "Vocabulary",
    "combined_rating",
    "cosine",
    "jaccard",
    "kendall",
    "levenshtein",
    "load_snippets",
    "make_folds",
    "mean_rating",
    "parse_facts",
    "popularity_baseline",
    "precision_at",
    "predict_rating",
    "project_features",
    "recall_at",
    "recommend_apis",
    "recommend_snippets",
    "run_evaluation",
    "serialize_facts",
    "serialize_snippets",
    "spearman",
    "split_project",
    "success_rate",
    "tensor_for",
    "top_k_projects",
    "top_m_declarations",
]

__version__ = "0.1.0"
