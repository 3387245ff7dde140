"""Command-line shell: ingestion, model builds, retrieval, reports, service.

Exit codes: 0 success, 1 domain error (with a diagnostic on stderr),
2 usage error.  Report-producing subcommands write delimited tables and
render matching figures next to them.  All randomness is seeded through
explicit flags and echoed back in the output.
"""

from __future__ import annotations

import csv as csv_mod
import json
import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import __version__
from .asymptotics import SeparableDensity, continuum_comparison, quasiconcavity_probe
from .data import (
    QuerySet,
    RetrievalConfig,
    load_dataset,
    normalize_features,
    save_dataset,
)
from .emr import build_emr_model, load_model, save_model
from .engine import (
    mq_avg_retrieve,
    mq_max_retrieve,
    pfm_retrieve,
    scalarized_retrieve,
)
from .errors import FrontrankError
from .metrics import make_bridge_benchmark, run_query_pair_experiment, sample_query_pairs
from .service import ModelRegistry, grouped_fronts


def _sniff_format(path: str | Path) -> str:
    return "csv" if str(path).endswith(".csv") else "binary"


def _domain_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FrontrankError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _write_csv(path: Path, rows: list[dict], fieldnames: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv_mod.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


@click.group()
@click.version_option(version=__version__, prog_name="frontrank")
def main():
    """Multi-query retrieval with Pareto-front depth ranking."""


@main.command()
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="Source dataset file (csv or binary).")
@click.option("--input-format", type=click.Choice(["csv", "binary"]), default=None,
              help="Defaults to csv for .csv files, binary otherwise.")
@click.option("--synthetic-bridge", is_flag=True,
              help="Generate the labeled bridge benchmark instead of reading a file.")
@click.option("--sizes", default="60,30,40",
              help="Benchmark sizes: core,bridge,distractor.")
@click.option("--seed", default=0, show_default=True)
@click.option("--normalize", type=click.Choice(["none", "zscore", "unit"]),
              default="none", show_default=True,
              help="Explicit feature normalization; never applied implicitly.")
@click.option("--output", required=True, type=click.Path())
@click.option("--output-format", type=click.Choice(["csv", "binary"]), default=None)
@_domain_errors
def ingest(input_path, input_format, synthetic_bridge, sizes, seed, normalize,
           output, output_format):
    """Load (or synthesize) a dataset and persist it in a chosen format."""
    if synthetic_bridge == (input_path is not None):
        raise click.UsageError("provide exactly one of --input or --synthetic-bridge")
    if synthetic_bridge:
        try:
            n_core, n_bridge, n_distractor = (int(v) for v in sizes.split(","))
        except ValueError:
            raise click.UsageError("--sizes must be three comma-separated integers")
        ds, labels = make_bridge_benchmark(
            n_core=n_core, n_bridge=n_bridge, n_distractor=n_distractor, seed=seed
        )
    else:
        ds, labels = load_dataset(input_path, format=input_format or _sniff_format(input_path))
    if normalize != "none":
        ds = normalize_features(ds, normalize)
    out_format = output_format or _sniff_format(output)
    save_dataset(ds, output, format=out_format, labels=labels)
    click.echo(json.dumps({
        "output": str(output),
        "format": out_format,
        "n": ds.n,
        "m": ds.m,
        "classes": labels.n_classes if labels is not None else 0,
        "normalize": normalize,
        "seed": seed if synthetic_bridge else None,
    }))


@main.command("build-model")
@click.option("--dataset", required=True, type=click.Path(exists=True))
@click.option("--dataset-format", type=click.Choice(["csv", "binary"]), default=None)
@click.option("--anchors", default=32, show_default=True)
@click.option("--neighbors", default=3, show_default=True)
@click.option("--alpha", default=0.99, show_default=True)
@click.option("--sigma", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--output", type=click.Path(), default=None,
              help="Write the model file here.")
@click.option("--data-dir", type=click.Path(), default=None,
              help="Register the model in this service data directory instead.")
@_domain_errors
def build_model(dataset, dataset_format, anchors, neighbors, alpha, sigma, seed,
                output, data_dir):
    """Build the anchor-graph ranking model for a dataset."""
    if (output is None) == (data_dir is None):
        raise click.UsageError("provide exactly one of --output or --data-dir")
    fmt = dataset_format or _sniff_format(dataset)
    cfg = RetrievalConfig(
        alpha=alpha, anchor_count=anchors, nearest_anchors=neighbors, sigma=sigma
    )
    if data_dir is not None:
        entry = ModelRegistry(Path(data_dir)).register(dataset, fmt, cfg, seed)
        click.echo(json.dumps({"model_id": entry.model_id,
                               "model_file": entry.model_file,
                               "fingerprint": entry.fingerprint, "seed": seed}))
        return
    ds, _ = load_dataset(dataset, format=fmt)
    cfg.check_dataset(ds)
    model = build_emr_model(ds, cfg, rng_seed=seed)
    save_model(model, output)
    click.echo(json.dumps({
        "model_file": str(output), "n": ds.n, "m": ds.m,
        "anchors": anchors, "alpha": alpha, "seed": seed,
    }))


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="Dataset the model was built on (required with --model).")
@click.option("--dataset-format", type=click.Choice(["csv", "binary"]), default=None)
@click.option("--model-id", default=None, help="Registry id (with --data-dir).")
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--queries", required=True, help="Comma-separated item indices.")
@click.option("--k", default=20, show_default=True)
@click.option("--method", type=click.Choice(["pfm", "mq_avg", "mq_max", "scalarized"]),
              default="pfm", show_default=True)
@click.option("--weights", default=None, help="Comma-separated scalarization weights.")
@_domain_errors
def retrieve(model_path, dataset, dataset_format, model_id, data_dir, queries, k,
             method, weights):
    """Rank the database against the given queries; prints JSON."""
    if model_path is not None:
        if dataset is None:
            raise click.UsageError("--model requires --dataset")
        ds, _ = load_dataset(dataset, format=dataset_format or _sniff_format(dataset))
        model = load_model(model_path, dataset=ds)
    elif model_id is not None and data_dir is not None:
        entry = ModelRegistry(Path(data_dir)).get(model_id)
        if entry is None:
            raise click.UsageError(f"unknown model id {model_id!r}")
        ds, _ = load_dataset(entry.dataset_path, format=entry.dataset_format)
        model = load_model(entry.model_file, dataset=ds)
    else:
        raise click.UsageError("provide --model/--dataset or --model-id/--data-dir")
    try:
        qs = QuerySet(tuple(int(v) for v in queries.split(",")))
    except ValueError:
        raise click.UsageError("--queries must be comma-separated integers")
    if method == "pfm":
        result = pfm_retrieve(ds, model, qs, k=k)
    elif method == "mq_avg":
        result = mq_avg_retrieve(ds, model, qs, k=k)
    elif method == "mq_max":
        result = mq_max_retrieve(ds, model, qs, k=k)
    else:
        w = (
            [float(v) for v in weights.split(",")]
            if weights is not None
            else [1.0] * qs.t
        )
        result = scalarized_retrieve(ds, model, qs, weights=w, k=k)
    click.echo(json.dumps({
        "method": result.method,
        "query_ids": list(qs.indices),
        "k": k,
        "fronts": grouped_fronts(result),
    }))


@main.command()
@click.option("--dataset", type=click.Path(exists=True), default=None,
              help="Labeled dataset; defaults to the synthetic bridge benchmark.")
@click.option("--dataset-format", type=click.Choice(["csv", "binary"]), default=None)
@click.option("--pairs", default=100, show_default=True)
@click.option("--models", "n_models", default=5, show_default=True,
              help="Number of independently seeded models to average over.")
@click.option("--methods", default="pfm,mq_avg,mq_max", show_default=True)
@click.option("--k-max", default=20, show_default=True)
@click.option("--fronts", "n_fronts", default=5, show_default=True)
@click.option("--grid-size", default=50, show_default=True)
@click.option("--anchors", default=32, show_default=True)
@click.option("--alpha", default=0.99, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
@_domain_errors
def evaluate(dataset, dataset_format, pairs, n_models, methods, k_max, n_fronts,
             grid_size, anchors, alpha, seed, outdir):
    """Run the query-pair experiment; writes CSV tables and figures."""
    from .plots import save_ndcg_figure, save_profile_figure

    if dataset is not None:
        ds, labels = load_dataset(dataset, format=dataset_format or _sniff_format(dataset))
        if labels is None:
            raise click.UsageError("evaluation requires a labeled dataset")
    else:
        ds, labels = make_bridge_benchmark(seed=seed)
    method_list = tuple(m.strip() for m in methods.split(",") if m.strip())
    cfg = RetrievalConfig(alpha=alpha, anchor_count=min(anchors, ds.n), nearest_anchors=3)
    models = [build_emr_model(ds, cfg, rng_seed=seed + i) for i in range(n_models)]
    batch = sample_query_pairs(labels, count=pairs, rng_seed=seed)
    report = run_query_pair_experiment(
        ds, labels, models, batch, methods=method_list, k_max=k_max,
        n_fronts=n_fronts, grid_size=grid_size,
    )

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    # wide table: one k column plus one column per method
    wide_rows = []
    for i in range(k_max):
        row = {"k": i + 1}
        row.update({m: float(report.ndcg[m][i]) for m in method_list})
        wide_rows.append(row)
    _write_csv(outdir / "ndcg.csv", wide_rows, ["k", *method_list])
    _write_csv(outdir / "ndcg_long.csv", report.ndcg_rows(),
               ["method", "k", "ndcg", "std"])
    _write_csv(outdir / "profiles.csv", report.profile_rows(),
               ["front", "position", "mq_uniq_rel"])
    (outdir / "report.json").write_text(json.dumps(report.to_json(), indent=2))
    save_ndcg_figure(report, outdir / "ndcg.png")
    if "pfm" in method_list:
        save_profile_figure(report, outdir / "profiles.png")
    click.echo(json.dumps({
        "outdir": str(outdir),
        "pairs": pairs,
        "models": n_models,
        "seed": seed,
        "ndcg_at_k_max": {m: float(report.ndcg[m][k_max - 1]) for m in method_list},
    }))


@main.command()
@click.option("--density", type=click.Choice(["uniform", "truncexp", "twobump"]),
              default="uniform", show_default=True)
@click.option("--rate", default=2.0, show_default=True,
              help="Rate of the truncated-exponential axes.")
@click.option("--dim", default=2, show_default=True)
@click.option("--n-schedule", default="1000,10000,100000", show_default=True)
@click.option("--reps", default=3, show_default=True)
@click.option("--levels", default="0.5,0.75,1.0", show_default=True)
@click.option("--probe-n", default=100000, show_default=True)
@click.option("--no-probe", is_flag=True, help="Skip the level-curve probe.")
@click.option("--seed", default=0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
@_domain_errors
def asymptotics(density, rate, dim, n_schedule, reps, levels, probe_n, no_probe,
                seed, outdir):
    """Monte Carlo depth-field reports: error table, level-curve probe, figures."""
    from .plots import save_continuum_figure, save_level_curves_figure

    kwargs = {"rate": rate} if density == "truncexp" else {}
    dens = SeparableDensity.of(density, dim, **kwargs)
    schedule = [int(v) for v in n_schedule.split(",")]
    table = continuum_comparison(dens, schedule, seed=seed, reps=reps)

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "continuum.csv", table.rows(),
               ["n", "max_rel_error", "mean_rel_error"])
    (outdir / "continuum.json").write_text(json.dumps(table.to_json(), indent=2))
    save_continuum_figure(table, outdir / "continuum.png")

    summary = {"outdir": str(outdir), "density": density, "dim": dim, "seed": seed,
               "rate_estimate": table.rate,
               "max_rel_errors": dict(zip(table.ns, table.max_rel_errors))}
    if not no_probe and dim == 2:
        level_list = [float(v) for v in levels.split(",")]
        probe = quasiconcavity_probe(dens, n=probe_n, levels=level_list, seed=seed)
        (outdir / "probe.json").write_text(json.dumps(probe.to_json(), indent=2))
        save_level_curves_figure(probe, outdir / "levels.png")
        for row in probe.levels:
            curve = row.get("curve")
            if curve is None:
                continue
            # gnuplot-friendly: two columns, one point per line
            dat = "\n".join(f"{x:.10g} {y:.10g}" for x, y in curve)
            (outdir / f"level_{row['level']:g}.dat").write_text(dat + "\n")
        summary["defects"] = {
            str(row["level"]): row["defect"] for row in probe.levels
        }
    click.echo(json.dumps(summary))


@main.command()
@click.option("--data-dir", required=True, type=click.Path(),
              envvar="FRONTRANK_DATA", show_envvar=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True)
@_domain_errors
def serve(data_dir, host, port):
    """Serve retrieval and front-exploration endpoints over HTTP."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(Path(data_dir)), host=host, port=port)


if __name__ == "__main__":
    main()
