"""Evaluation toolkit for graph generative models: perturbation sweeps,
pluggable graph embedders, distribution metrics and Spearman scoring."""

from .extractors import (
    DegreeOneHot,
    GraphMAEExtractor,
    NodeLabelOneHot,
    RandomGNNExtractor,
    StatisticsExtractor,
    attach_features,
    make_extractor,
)
from .graphs import Graph, GraphSet, erdos_renyi, filter_by_size, load_tud_dataset
from .harness import aggregate_runs, run_sweep, spearman
from .metrics import density_coverage, frechet_distance, mmd, precision_recall

__all__ = [
    "Graph",
    "GraphSet",
    "load_tud_dataset",
    "filter_by_size",
    "erdos_renyi",
    "attach_features",
    "DegreeOneHot",
    "NodeLabelOneHot",
    "StatisticsExtractor",
    "RandomGNNExtractor",
    "GraphMAEExtractor",
    "make_extractor",
    "frechet_distance",
    "mmd",
    "precision_recall",
    "density_coverage",
    "run_sweep",
    "aggregate_runs",
    "spearman",
]
