"""Command-line surface: dataset inspection, synthetic corpus generation,
full evaluation runs and violin-plot emission.

Exit codes: 0 success, 2 usage/config error, 1 runtime failure.
"""

from __future__ import annotations

import csv
import json
import os
import sys
import time

import click
import numpy as np

from . import harness, perturb
from .extractors import attach_features, default_feature_spec, make_extractor
from .graphs import (
    DatasetLoadError,
    GraphSet,
    dataset_stats,
    erdos_renyi,
    filter_by_size,
    load_tud_dataset,
    sample_subset,
    save_tud_dataset,
)

SCHEMA_VERSION = 1


def _preset_min_nodes(name: str) -> int:
    return 20 if name.lower().startswith("proteins") else 3


def _fail(stage: str, exc: Exception) -> None:
    click.echo(f"error during {stage}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Evaluate graph generative models with perturbation sweeps."""


@main.command()
@click.option("--dataset-dir", required=True, type=click.Path())
@click.option("--dataset-name", required=True)
@click.option("--min-nodes", type=int, default=None, help="Override the dataset preset.")
@click.option("--max-nodes", type=int, default=1000, show_default=True)
def stats(dataset_dir, dataset_name, min_nodes, max_nodes):
    """Print size statistics of a TUDataset after preset filtering."""
    if not os.path.isdir(dataset_dir):
        click.echo(f"dataset directory not found: {dataset_dir}", err=True)
        sys.exit(2)
    if min_nodes is None:
        min_nodes = _preset_min_nodes(dataset_name)
    try:
        gset = load_tud_dataset(dataset_dir, dataset_name)
        gset = filter_by_size(gset, min_nodes, max_nodes)
        st = dataset_stats(gset)
    except DatasetLoadError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    except Exception as exc:
        _fail("dataset loading", exc)
    rows = [
        ("num of graphs", str(st.num_graphs)),
        ("mean num nodes", f"{st.mean_nodes:.1f}"),
        ("min num nodes", str(st.min_nodes)),
        ("max num nodes", str(st.max_nodes)),
        ("mean num edges", f"{st.mean_edges:.1f}"),
        ("min num edges", str(st.min_edges)),
        ("max num edges", str(st.max_edges)),
    ]
    width = max(len(k) for k, _ in rows)
    click.echo(dataset_name)
    for k, v in rows:
        click.echo(f"  {k:<{width}}  {v}")


@main.command()
@click.option("--n-graphs", type=int, required=True)
@click.option("--nodes", nargs=2, type=int, default=(10, 30), show_default=True,
              help="Inclusive node-count range sampled per graph.")
@click.option("--edge-prob", nargs=2, type=float, default=(0.1, 0.1), show_default=True,
              help="Edge-probability range sampled per graph.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--name", default="SYNTH", show_default=True)
def synth(n_graphs, nodes, edge_prob, seed, out_dir, name):
    """Write an Erdős–Rényi corpus in TUDataset flat-file format."""
    lo, hi = nodes
    plo, phi = edge_prob
    if n_graphs < 1 or lo < 1 or hi < lo or not (0 <= plo <= phi <= 1):
        click.echo("invalid synthesis parameters", err=True)
        sys.exit(2)
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(n_graphs):
        n = int(rng.integers(lo, hi + 1))
        p = float(rng.uniform(plo, phi))
        graphs.append(erdos_renyi(n, p, int(rng.integers(0, 2**63)), graph_id=i))
    try:
        save_tud_dataset(GraphSet(tuple(graphs)), out_dir, name)
    except OSError as exc:
        _fail("writing dataset files", exc)
    click.echo(f"wrote {n_graphs} graphs to {out_dir}/{name}_*.txt")


@main.command()
@click.option("--dataset-dir", required=True, type=click.Path())
@click.option("--dataset-name", required=True)
@click.option("--sample-size", type=int, default=1000, show_default=True)
@click.option("--extractor", "extractor_name", default="stats", show_default=True,
              type=click.Choice(["stats", "random-gnn", "gmae"]))
@click.option("--perturbation", "perturbations", multiple=True,
              type=click.Choice(perturb.KINDS), default=("mixing",), show_default=True)
@click.option("--metrics", "metric_list", default=",".join(harness.METRIC_NAMES),
              show_default=True, help="Comma-separated metric names.")
@click.option("--step", type=float, default=0.01, show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--clusters", type=int, default=10, show_default=True)
@click.option("--knn-k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--hidden-dim", type=int, default=32, show_default=True)
@click.option("--num-layers", type=int, default=2, show_default=True)
@click.option("--epochs", type=int, default=30, show_default=True)
@click.option("--mask-rate", type=float, default=0.2, show_default=True)
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
@click.option("--mixing-edge-prob", type=float, default=None,
              help="Fixed edge probability for mixing replacements (default: match each graph).")
@click.option("--min-nodes", type=int, default=None)
@click.option("--max-nodes", type=int, default=1000, show_default=True)
@click.option("--workers", type=int, default=None,
              help="Parallel severity levels (default: $GGEVAL_WORKERS or 1).")
@click.option("--out", required=True, type=click.Path(), help="Report JSON path; a CSV is written next to it.")
def evaluate(dataset_dir, dataset_name, sample_size, extractor_name, perturbations,
             metric_list, step, runs, clusters, knn_k, seed, hidden_dim, num_layers,
             epochs, mask_rate, learning_rate, mixing_edge_prob, min_nodes, max_nodes,
             workers, out):
    """Run the full sweep experiment and write a report document plus CSV."""
    metric_names = [m.strip() for m in metric_list.split(",") if m.strip()]
    unknown = [m for m in metric_names if m not in harness.METRIC_NAMES]
    if unknown:
        click.echo(f"unknown metrics: {', '.join(unknown)}", err=True)
        sys.exit(2)
    if not (0.0 < step <= 1.0) or runs < 1:
        click.echo("step must be in (0, 1] and runs >= 1", err=True)
        sys.exit(2)
    if workers is None:
        workers = int(os.environ.get("GGEVAL_WORKERS", "1"))
    if min_nodes is None:
        min_nodes = _preset_min_nodes(dataset_name)

    timings = {}
    t0 = time.perf_counter()
    try:
        gset = load_tud_dataset(dataset_dir, dataset_name)
        gset = filter_by_size(gset, min_nodes, max_nodes)
        if len(gset) > sample_size:
            gset = sample_subset(gset, sample_size, seed)
    except DatasetLoadError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    except Exception as exc:
        _fail("dataset loading", exc)
    timings["load_s"] = time.perf_counter() - t0

    feature_spec = None
    try:
        if extractor_name in ("random-gnn", "gmae"):
            feature_spec = default_feature_spec(gset)
            gset = attach_features(gset, feature_spec)
    except Exception as exc:
        _fail("feature attachment", exc)

    params = {}
    if extractor_name == "random-gnn":
        params = {"hidden_dim": hidden_dim, "num_layers": num_layers, "seed": seed}
    elif extractor_name == "gmae":
        params = {
            "hidden_dim": hidden_dim,
            "num_layers": num_layers,
            "mask_rate": mask_rate,
            "epochs": epochs,
            "learning_rate": learning_rate,
            "seed": seed,
        }
    extractor = make_extractor(
        extractor_name, **params, **({"feature_spec": feature_spec} if feature_spec else {})
    )

    config = {
        "dataset_dir": dataset_dir,
        "dataset_name": dataset_name,
        "sample_size": sample_size,
        "extractor": extractor_name,
        "extractor_params": params,
        "feature_spec": repr(feature_spec) if feature_spec else None,
        "perturbations": list(perturbations),
        "metrics": metric_names,
        "step": step,
        "runs": runs,
        "clusters": clusters,
        "knn_k": knn_k,
        "master_seed": seed,
        "mixing_edge_prob": mixing_edge_prob,
        "min_nodes": min_nodes,
        "max_nodes": max_nodes,
    }

    run_payloads = []
    summaries = []
    for kind in perturbations:
        t1 = time.perf_counter()
        results = []
        for run_index in range(runs):
            run_seed = int(
                np.random.SeedSequence([seed, run_index]).generate_state(1)[0]
            )
            try:
                res = harness.run_sweep(
                    gset,
                    kind,
                    extractor,
                    metric_names,
                    step=step,
                    run_seed=run_seed,
                    clusters_k=clusters,
                    knn_k=knn_k,
                    mixing_edge_prob=mixing_edge_prob,
                    workers=workers,
                )
            except Exception as exc:
                _fail(f"sweep ({kind}, run {run_index})", exc)
            results.append(res)
            run_payloads.append(
                {
                    "run_index": run_index,
                    "run_seed": res.run_seed,
                    "extractor": extractor_name,
                    "perturbation": kind,
                    "severities": list(res.severities),
                    "raw": {m: list(v) for m, v in res.raw.items()},
                    "oriented": {m: list(v) for m, v in res.oriented.items()},
                    "normalized": {m: list(v) for m, v in res.normalized.items()},
                    "spearman": res.spearman,
                }
            )
        summary = harness.aggregate_runs(results)
        summaries.append(
            {
                "extractor": extractor_name,
                "perturbation": kind,
                "num_runs": summary.num_runs,
                "values": {m: list(v) for m, v in summary.values.items()},
                "median": summary.median,
                "q1": summary.q1,
                "q3": summary.q3,
                "iqr": summary.iqr,
            }
        )
        timings[f"sweep_{kind}_s"] = time.perf_counter() - t1

    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "runs": run_payloads,
        "summaries": summaries,
        "timings": timings,
    }
    try:
        _write_report(report, out)
    except OSError as exc:
        _fail("writing the report", exc)
    click.echo(f"report written to {out}")


def _write_report(report: dict, out_path: str) -> None:
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    csv_path = os.path.splitext(out_path)[0] + ".csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["run", "perturbation", "metric", "severity", "raw", "oriented", "normalized"]
        )
        for payload in report["runs"]:
            for metric in payload["raw"]:
                for i, sev in enumerate(payload["severities"]):
                    writer.writerow(
                        [
                            payload["run_index"],
                            payload["perturbation"],
                            metric,
                            repr(sev),
                            repr(payload["raw"][metric][i]),
                            repr(payload["oriented"][metric][i]),
                            repr(payload["normalized"][metric][i]),
                        ]
                    )


@main.command()
@click.argument("report_path", type=click.Path())
@click.option("--out", required=True, type=click.Path(), help="Output SVG path.")
def plot(report_path, out):
    """Render per-metric violin plots of Spearman values from a report."""
    try:
        with open(report_path) as fh:
            report = json.load(fh)
        if report.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"unsupported schema_version {report.get('schema_version')!r}"
            )
        summaries = report["summaries"]
    except FileNotFoundError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    except Exception as exc:
        _fail("reading the report", exc)
    try:
        _render_violins(summaries, out)
    except Exception as exc:
        _fail("rendering the plot", exc)
    click.echo(f"plot written to {out}")


def _render_violins(summaries: list[dict], out_path: str) -> None:
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "ggeval"
    import matplotlib.pyplot as plt
    from scipy.stats import gaussian_kde

    n_panels = max(len(summaries), 1)
    fig, axes = plt.subplots(
        1, n_panels, figsize=(4.5 * n_panels, 4.0), squeeze=False, sharey=True
    )
    for ax, summary in zip(axes[0], summaries):
        metrics = sorted(summary["values"])
        for pos, metric in enumerate(metrics):
            vals = np.asarray(summary["values"][metric], dtype=np.float64)
            med = float(np.median(vals))
            q1, q3 = np.percentile(vals, [25, 75])
            iqr = q3 - q1
            lo = vals[vals >= q1 - 1.5 * iqr].min()
            hi = vals[vals <= q3 + 1.5 * iqr].max()
            if np.ptp(vals) > 0 and len(vals) > 1:
                kde = gaussian_kde(vals, bw_method="silverman")
                ys = np.linspace(vals.min(), vals.max(), 100)
                dens = kde(ys)
                dens = dens / dens.max() * 0.38
                ax.fill_betweenx(ys, pos - dens, pos + dens, color="mediumseagreen", alpha=0.8)
            ax.plot([pos, pos], [lo, hi], color="black", lw=1)
            ax.plot([pos, pos], [q1, q3], color="black", lw=4)
            ax.plot([pos], [med], marker="o", color="white", markeredgecolor="black", ms=5, zorder=3)
        ax.set_xticks(range(len(metrics)))
        ax.set_xticklabels(metrics, rotation=45, ha="right")
        ax.set_title(f"{summary['extractor']} / {summary['perturbation']}")
        ax.set_ylim(-1.05, 1.05)
    axes[0][0].set_ylabel("Spearman correlation")
    fig.tight_layout()
    fig.savefig(out_path, metadata={"Date": None})
    plt.close(fig)


if __name__ == "__main__":
    main()
