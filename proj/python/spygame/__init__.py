"""SpyGame engine, game logs and metrics."""

import json
import os

from . import _core
from ._core import (
    AnnotationError,
    ConfigError,
    DeckError,
    IntegrityError,
    SchemaError,
    agreement_band,
    corpus_stats,
    detect_exposure,
    fingerprint,
    fleiss_kappa,
    kappa_report,
    load_game_text,
    locations,
    match_location,
    metrics_table,
    replay,
    run_cli,
    tally_entropy,
)

__all__ = [
    "AnnotationError", "ConfigError", "DeckError", "IntegrityError", "SchemaError",
    "agreement_band", "corpus_stats", "default_experiment", "detect_exposure",
    "fingerprint", "fleiss_kappa", "kappa_report", "load_game", "load_game_text",
    "locations", "match_location", "metrics", "metrics_table", "replay", "run_cli",
    "run_experiment", "schedule", "tally_entropy",
]


def default_experiment():
    return json.loads(_core.default_experiment_json())


def schedule(config):
    return json.loads(_core.schedule_json(json.dumps(config)))


def run_experiment(config, base_dir=".", resume=True):
    """Run every scheduled game; `config` is a dict or a path to a JSON file."""
    if isinstance(config, (str, os.PathLike)):
        base_dir = os.path.dirname(os.path.abspath(config))
        with open(config) as f:
            config = json.load(f)
    return json.loads(_core.run_experiment_json(json.dumps(config), str(base_dir), resume))


def load_game(path):
    """Header, events and outcome of one log as a list of dicts."""
    return [json.loads(line) for line in load_game_text(path).splitlines() if line]


def metrics(directory, group_by="matchup", vote_sources=None,
            include_aborted=False, strict_caught=False):
    return json.loads(_core.metrics_json(directory, group_by, vote_sources,
                                         include_aborted, strict_caught))
