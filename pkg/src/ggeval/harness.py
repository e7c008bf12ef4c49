"""Experiment orchestration: perturbation sweeps, metric scoring, score
normalization, Spearman rank correlation and aggregation over seeded runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata
from sklearn.base import clone

from . import metrics as M
from . import perturb
from .graphs import GraphSet

METRIC_NAMES = (
    "fd",
    "mmd-linear",
    "mmd-rbf",
    "precision",
    "recall",
    "f1-pr",
    "density",
    "coverage",
    "f1-dc",
)

# Orientation: distances already grow with dissimilarity; similarity-type
# scores are flipped to 1 - value (density clipped to 1 first).
DISTANCE_METRICS = frozenset({"fd", "mmd-linear", "mmd-rbf"})

_KIND_IDS = {kind: i for i, kind in enumerate(perturb.KINDS)}


@dataclass(frozen=True)
class SweepResult:
    run_seed: int
    extractor: str
    kind: str
    severities: tuple[float, ...]
    raw: dict[str, tuple[float, ...]]
    oriented: dict[str, tuple[float, ...]]
    normalized: dict[str, tuple[float, ...]]
    spearman: dict[str, float]


@dataclass(frozen=True)
class ExperimentSummary:
    extractor: str
    kind: str
    num_runs: int
    values: dict[str, tuple[float, ...]]
    median: dict[str, float]
    q1: dict[str, float]
    q3: dict[str, float]
    iqr: dict[str, float]


def spearman(xs, ys) -> float:
    """Pearson correlation of average ranks; a constant ys series maps to 0."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise ValueError("series lengths differ")
    if xs.size < 2 or np.all(xs == xs[0]):
        raise ValueError("xs must have at least two distinct values")
    if np.all(ys == ys[0]):
        return 0.0
    rx = rankdata(xs, method="average")
    ry = rankdata(ys, method="average")
    rx -= rx.mean()
    ry -= ry.mean()
    return float(rx @ ry / np.sqrt((rx @ rx) * (ry @ ry)))


def orient_score(name: str, value: float) -> float:
    if name in DISTANCE_METRICS:
        return value
    return 1.0 - min(value, 1.0)


def normalize_scores(series, orientation: str = "distance") -> np.ndarray:
    """Orient a raw score series (larger = more different), then min-max
    normalize over the sweep; constant series map to all-zeros."""
    series = np.asarray(series, dtype=np.float64)
    if series.size < 2:
        raise ValueError("series must have at least two entries")
    if orientation == "similarity":
        oriented = 1.0 - np.minimum(series, 1.0)
    elif orientation == "distance":
        oriented = series
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    lo, hi = oriented.min(), oriented.max()
    if hi == lo:
        return np.zeros_like(oriented)
    return (oriented - lo) / (hi - lo)


def compute_metric_report(
    real_emb: np.ndarray,
    gen_emb: np.ndarray,
    metric_names,
    knn_k: int = 5,
    sigma: float | None = None,
) -> dict[str, float]:
    """Raw scores for every requested metric at one severity level."""
    unknown = [m for m in metric_names if m not in METRIC_NAMES]
    if unknown:
        raise ValueError(f"unknown metrics: {unknown}")
    names = set(metric_names)
    report: dict[str, float] = {}
    if "fd" in names:
        report["fd"] = M.frechet_distance(real_emb, gen_emb)
    if "mmd-linear" in names:
        report["mmd-linear"] = M.mmd(real_emb, gen_emb, "linear")
    if "mmd-rbf" in names:
        if sigma is None:
            sigma = M.rbf_sigma(real_emb)
        report["mmd-rbf"] = M.mmd(real_emb, gen_emb, "rbf", sigma=sigma)
    if names & {"precision", "recall", "f1-pr"}:
        p, r = M.precision_recall(real_emb, gen_emb, k=knn_k)
        if "precision" in names:
            report["precision"] = p
        if "recall" in names:
            report["recall"] = r
        if "f1-pr" in names:
            report["f1-pr"] = M.f1(p, r)
    if names & {"density", "coverage", "f1-dc"}:
        d, c = M.density_coverage(real_emb, gen_emb, k=knn_k)
        if "density" in names:
            report["density"] = d
        if "coverage" in names:
            report["coverage"] = c
        if "f1-dc" in names:
            report["f1-dc"] = M.f1(min(d, 1.0), c)
    return {name: report[name] for name in metric_names}


def _level_seed(run_seed: int, kind: str, level_index: int) -> int:
    ss = np.random.SeedSequence([run_seed, _KIND_IDS[kind], level_index])
    return int(ss.generate_state(1)[0])


def _perturbation_plan(real_set, kind, step, run_seed, clusters_k):
    """Return (severities, level builders). Mode kinds map cluster counts onto
    a [0, 1] severity axis; dropping ends at (k-1)/(k-1) since at least one
    cluster must survive."""
    if kind in ("mixing", "rewiring"):
        levels = perturb.sweep_levels(step)
        op = perturb.mix_random if kind == "mixing" else perturb.rewire_edges
        return levels, [("t", op, t) for t in levels]
    assignment = perturb.cluster_graphs(
        real_set, clusters_k, _level_seed(run_seed, kind, 10**6)
    )
    if kind == "mode-collapse":
        counts = list(range(clusters_k + 1))
        severities = [c / clusters_k for c in counts]
        return severities, [("count", perturb.mode_collapse, c, assignment) for c in counts]
    if kind == "mode-dropping":
        if clusters_k < 2:
            raise ValueError("mode-dropping needs at least 2 clusters")
        counts = list(range(clusters_k))
        severities = [c / (clusters_k - 1) for c in counts]
        return severities, [("count", perturb.mode_drop, c, assignment) for c in counts]
    raise ValueError(f"unknown perturbation kind {kind!r}")


def run_sweep(
    real_set: GraphSet,
    kind: str,
    extractor,
    metric_names=METRIC_NAMES,
    *,
    step: float = 0.01,
    run_seed: int = 0,
    clusters_k: int = 10,
    knn_k: int = 5,
    mixing_edge_prob: float | None = None,
    workers: int = 1,
) -> SweepResult:
    """Train the extractor once on the real set, embed every perturbed level
    with frozen parameters, score all metrics against the real embeddings and
    correlate oriented scores with severity."""
    if len(real_set) == 0:
        raise ValueError("real set is empty")
    unknown = [m for m in metric_names if m not in METRIC_NAMES]
    if unknown:
        raise ValueError(f"unknown metrics: {unknown}")
    if not (1 <= knn_k < len(real_set)):
        raise ValueError(f"knn_k={knn_k} must be below the set size {len(real_set)}")

    ext = clone(extractor)
    if "seed" in ext.get_params():
        ext.set_params(seed=run_seed)
    ext.fit(real_set)
    real_emb = ext.transform(real_set)
    sigma = M.rbf_sigma(real_emb) if "mmd-rbf" in metric_names else None

    severities, plan = _perturbation_plan(real_set, kind, step, run_seed, clusters_k)

    def eval_level(level_index, entry):
        seed = _level_seed(run_seed, kind, level_index)
        if entry[0] == "t":
            _, op, t = entry
            if op is perturb.mix_random:
                perturbed = op(real_set, t, seed, edge_prob=mixing_edge_prob)
            else:
                perturbed = op(real_set, t, seed)
        else:
            _, op, count, assignment = entry
            perturbed = op(real_set, assignment, count, seed)
        gen_emb = ext.transform(perturbed)
        return compute_metric_report(real_emb, gen_emb, metric_names, knn_k, sigma)

    if workers > 1:
        reports = Parallel(n_jobs=workers)(
            delayed(eval_level)(i, entry) for i, entry in enumerate(plan)
        )
    else:
        reports = [eval_level(i, entry) for i, entry in enumerate(plan)]

    raw = {m: tuple(rep[m] for rep in reports) for m in metric_names}
    oriented = {
        m: tuple(orient_score(m, v) for v in raw[m]) for m in metric_names
    }
    orientations = {
        m: "distance" if m in DISTANCE_METRICS else "similarity" for m in metric_names
    }
    normalized = {
        m: tuple(float(v) for v in normalize_scores(raw[m], orientations[m]))
        for m in metric_names
    }
    corr = {m: spearman(severities, oriented[m]) for m in metric_names}
    return SweepResult(
        run_seed=run_seed,
        extractor=type(extractor).__name__,
        kind=kind,
        severities=tuple(severities),
        raw=raw,
        oriented=oriented,
        normalized=normalized,
        spearman=corr,
    )


def aggregate_runs(results: list[SweepResult]) -> ExperimentSummary:
    """Collect per-metric Spearman values across runs; median and IQR use
    linear-interpolation quantiles."""
    if not results:
        raise ValueError("no sweep results to aggregate")
    first = results[0]
    for r in results[1:]:
        if (
            r.extractor != first.extractor
            or r.kind != first.kind
            or set(r.spearman) != set(first.spearman)
        ):
            raise ValueError("sweep results have mixed configurations")
    values = {
        m: tuple(r.spearman[m] for r in results) for m in first.spearman
    }
    median = {m: float(np.median(v)) for m, v in values.items()}
    q1 = {m: float(np.percentile(v, 25)) for m, v in values.items()}
    q3 = {m: float(np.percentile(v, 75)) for m, v in values.items()}
    iqr = {m: q3[m] - q1[m] for m in values}
    return ExperimentSummary(
        extractor=first.extractor,
        kind=first.kind,
        num_runs=len(results),
        values=values,
        median=median,
        q1=q1,
        q3=q3,
        iqr=iqr,
    )
