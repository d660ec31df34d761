"""Python access to the t2ibench native core."""

import json
import os

from ._core import (
    Error,
    GaussianStats,
    PromptType,
    build_metadata_prompt,
    clip_prompt_score,
    cosine_similarity,
    evaluate_to_csv,
    fid,
    frechet_distance,
    gaussian_stats,
    generate_prompt_csv,
    matrix_sqrt_psd,
    mean_reciprocal_rank,
    min_max_normalize,
    rank_of_truth,
    recall_at_k,
    similarity_matrix,
    weighted_score,
    write_synthetic_dataset,
)
from . import _core

__all__ = [
    "Error",
    "GaussianStats",
    "PromptType",
    "build_metadata_prompt",
    "clip_prompt_score",
    "cosine_similarity",
    "evaluate",
    "evaluate_to_csv",
    "fid",
    "frechet_distance",
    "gaussian_stats",
    "generate_prompt_csv",
    "matrix_sqrt_psd",
    "mean_reciprocal_rank",
    "min_max_normalize",
    "profiles",
    "rank",
    "rank_of_truth",
    "recall_at_k",
    "similarity_matrix",
    "validate",
    "weighted_score",
    "write_synthetic_dataset",
]


def _profile_dir(profile_dir):
    if profile_dir is None:
        profile_dir = os.environ.get("T2IBENCH_PROFILE_DIR")
    return profile_dir


def evaluate(dataset, k=3, workers=1):
    """Cohort metric rows of a dataset directory, as dicts."""
    return json.loads(_core.evaluate_dataset_json(os.fspath(dataset), k, workers))


def validate(dataset):
    ok, issues = _core.validate_dataset(os.fspath(dataset))
    return ok, [dict(zip(("severity", "location", "message"), i)) for i in issues]


def rank(results, profile=None, weights=None, cohort_scope=None, profile_dir=None):
    """Leaderboard for an evaluation_results.csv.

    Returns (csv_text, leaderboard) where leaderboard is the decoded JSON
    document served by /api/rank.
    """
    text, board = _core.rank_results(
        os.fspath(results),
        profile=profile,
        weights=None if weights is None else list(weights),
        profile_dir=_profile_dir(profile_dir),
        cohort_scope=cohort_scope,
    )
    return text, json.loads(board)


def profiles(profile_dir=None):
    return json.loads(_core.profiles_json(_profile_dir(profile_dir)))
