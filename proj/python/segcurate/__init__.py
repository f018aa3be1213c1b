"""Batch curation of robot demonstrations.

Thin wrapper around the compiled `_segcurate` extension: keyframe
segmentation, contrastively learned segment quality voting, and greedy
trajectory optimization with action relabeling. File based entry points
(`synth_dataset`, `curate`) operate on the same JSONL datasets and JSON
configs as the `segcurate` command line tool.
"""

import json as _json

from ._segcurate import (
    ConfigError,
    DataError,
    curate as _curate,
    default_config as _default_config,
    greedy_retention,
    keyframes,
    relabel_targets,
    segment_spans,
    supcon_loss,
    synth_dataset,
    vote_score,
)

__all__ = [
    "ConfigError",
    "DataError",
    "curate",
    "default_config",
    "greedy_retention",
    "keyframes",
    "relabel_targets",
    "segment_spans",
    "supcon_loss",
    "synth_dataset",
    "vote_score",
]


def default_config():
    """Resolved default configuration as a dict."""
    return _json.loads(_default_config())


def curate(config_path, mixed_path, expert_path, out_dir, truth_path=""):
    """Runs the full curation pipeline and returns the report as a dict."""
    return _json.loads(_curate(config_path, mixed_path, expert_path, out_dir, truth_path))
