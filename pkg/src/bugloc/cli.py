"""Command-line entry points.

Four commands cover the pipeline: ``train-global`` builds the offline
models, ``localize`` ranks one bug report, ``evaluate`` runs whole
benchmarks and writes metric reports, ``report`` summarizes a finished
evaluation. Options may come from a ``key=value`` config file; explicit
flags win over file values. Failures print one machine-readable JSON line
to stderr and exit nonzero.
"""

from __future__ import annotations

import csv
import json
import statistics
import sys
from functools import wraps
from pathlib import Path

import click

from . import embedding, metrics, rank
from .cache import ArtifactCache
from .corpus import load_benchmark
from .errors import BugLocError
from .preprocess import PreprocessConfig, preprocess_benchmark


def read_config_file(path) -> dict[str, str]:
    """Parse a line-oriented key=value config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text("utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BugLocError(f"bad config line (expected key=value): {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


class Settings:
    """Resolved option values: CLI flag > config file > default."""

    _DEFAULTS = {
        "seed": 1,
        "methods": "3,4",
        "history_policy": "earlier",
        "vector_size": 100,
        "alpha": 0.045,
        "window": 5,
        "min_count": 2,
        "negative": 5,
        "sample": 0.0,
        "epochs": 20,
        "infer_epochs": None,
        "min_token_length": 2,
        "split_compounds": True,
        "stopwords_path": None,
        "keywords_path": None,
    }

    def __init__(self, config_path, cli_values: dict):
        self.file_values = read_config_file(config_path) if config_path else {}
        self.cli_values = cli_values

    def get(self, key, cast=str):
        value = self.cli_values.get(key)
        if value is None:
            value = self.file_values.get(key)
        if value is None:
            value = self._DEFAULTS.get(key)
            return value
        if cast is bool and isinstance(value, str):
            return value.lower() in ("1", "true", "yes", "on")
        return cast(value)

    def method_ids(self) -> list[int]:
        raw = str(self.get("methods"))
        try:
            ids = sorted({int(part) for part in raw.replace(" ", "").split(",") if part})
        except ValueError:
            raise click.UsageError(f"bad method list: {raw!r}")
        for mid in ids:
            if not 1 <= mid <= 7:
                raise click.UsageError(f"unknown method id {mid} (valid: 1..7)")
        if not ids:
            raise click.UsageError("no methods requested")
        return ids

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig.load(
            stopwords_path=self.get("stopwords_path"),
            keywords_path=self.get("keywords_path"),
            min_token_length=self.get("min_token_length", int),
            split_compound_identifiers=self.get("split_compounds", bool),
        )

    def embedding_config(self) -> embedding.EmbeddingConfig:
        return embedding.EmbeddingConfig(
            vector_size=self.get("vector_size", int),
            alpha=self.get("alpha", float),
            window=self.get("window", int),
            min_count=self.get("min_count", int),
            negative=self.get("negative", int),
            sample=self.get("sample", float),
            epochs=self.get("epochs", int),
            seed=self.get("seed", int),
        )

    def infer_epochs(self) -> int | None:
        value = self.get("infer_epochs")
        return None if value in (None, "") else int(value)


def fail_cleanly(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (BugLocError, ValueError, OSError) as exc:
            click.echo(json.dumps({"error": str(exc)}), err=True)
            sys.exit(1)

    return wrapper


def _load(settings, benchmark_path):
    benchmark = load_benchmark(benchmark_path, strict=False)
    preprocess_benchmark(benchmark, settings.preprocess_config())
    return benchmark


def _artifacts_for(project, benchmark, method_ids, cache_dir, settings) -> rank.Artifacts:
    """Artifacts covering the union of the given methods' model needs."""
    configs = [rank.MethodConfig.from_id(m) for m in method_ids]
    needs_tfidf = any(c.needs_global_tfidf for c in configs)
    needs_embeddings = any(c.needs_embeddings for c in configs)
    global_vocab = dm = dbow = None
    if needs_tfidf or needs_embeddings:
        if cache_dir is None:
            raise BugLocError(
                f"methods {sorted(c.method_id for c in configs)} need global "
                "models: pass --cache")
        cache = ArtifactCache(cache_dir, benchmark, settings.preprocess_config(),
                              settings.embedding_config())
        if needs_tfidf:
            global_vocab = cache.global_vocabulary(project.name)
        if needs_embeddings:
            dm = cache.embedding_model(project.name, embedding.PV_DM)
            dbow = cache.embedding_model(project.name, embedding.PV_DBOW)
    return rank.Artifacts(project, global_vocab=global_vocab, dm_model=dm,
                          dbow_model=dbow, infer_epochs=settings.infer_epochs())


_common_options = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="key=value config file"),
    click.option("--seed", type=int, default=None, help="RNG seed"),
    click.option("--vector-size", "vector_size", type=int, default=None),
    click.option("--alpha", type=float, default=None),
    click.option("--window", type=int, default=None),
    click.option("--min-count", "min_count", type=int, default=None),
    click.option("--negative", type=int, default=None),
    click.option("--sample", type=float, default=None),
    click.option("--epochs", type=int, default=None),
    click.option("--infer-epochs", "infer_epochs", type=int, default=None),
    click.option("--min-token-length", "min_token_length", type=int, default=None),
    click.option("--stopwords", "stopwords_path", type=click.Path(exists=True),
                 default=None),
    click.option("--keywords", "keywords_path", type=click.Path(exists=True),
                 default=None),
]

_COMMON_KEYS = ("config_path", "seed", "vector_size", "alpha", "window",
                "min_count", "negative", "sample", "epochs", "infer_epochs",
                "min_token_length", "stopwords_path", "keywords_path")


def common_options(fn):
    for option in reversed(_common_options):
        fn = option(fn)
    return fn


def _settings(kwargs: dict, **extra) -> Settings:
    """Pop the shared option values out of a command's kwargs."""
    cli_values = {key: kwargs.pop(key) for key in _COMMON_KEYS}
    config_path = cli_values.pop("config_path")
    cli_values.update(extra)
    return Settings(config_path, cli_values)


@click.group()
def main():
    """Fault localization: rank source files by relevance to bug reports."""


@main.command("train-global")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--cache", "cache_dir", required=True, type=click.Path(file_okay=False))
@click.option("--held-out", "held_out", multiple=True,
              help="project to hold out (repeatable; default: every project)")
@click.option("--embeddings/--no-embeddings", default=True,
              help="also train the paragraph-vector models")
@common_options
@fail_cleanly
def cmd_train_global(benchmark_path, cache_dir, held_out, embeddings, **kwargs):
    """Build global IDF and paragraph-vector models per held-out project."""
    settings = _settings(kwargs)
    benchmark = _load(settings, benchmark_path)
    names = list(held_out) or benchmark.project_names
    for name in names:
        benchmark.project(name)  # validate early, raises on unknown names
    cache = ArtifactCache(cache_dir, benchmark, settings.preprocess_config(),
                          settings.embedding_config())
    built = cache.train_all(sorted(names), with_embeddings=embeddings)
    for name, artifacts in built.items():
        for kind, path in artifacts.items():
            click.echo(f"{name}\t{kind}\t{path}")


def _print_top(ranked: rank.RankedList, limit: int = 10) -> None:
    click.echo(f"top {limit} of {len(ranked.entries)} files for {ranked.query_bug_id} "
               f"(method {ranked.method_id}):")
    click.echo(f"{'rank':>4}  {'final':>10}  {'direct':>10}  {'indirect':>10}  file")
    for i, e in enumerate(ranked.entries[:limit], start=1):
        click.echo(f"{i:>4}  {e.final_score:>10.6f}  {e.direct_score:>10.6f}  "
                   f"{e.indirect_score:>10.6f}  {e.file_id}")


@main.command("localize")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--project", "project_name", required=True)
@click.option("--bug", "bug_id", required=True)
@click.option("--method", "method_id", type=int, default=3, show_default=True)
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--history", "history_policy", type=click.Choice(["earlier", "all"]),
              default=None)
@common_options
@fail_cleanly
def cmd_localize(benchmark_path, project_name, bug_id, method_id, cache_dir,
                 out_dir, history_policy, **kwargs):
    """Rank one project's files for one bug report; writes a ranking CSV."""
    if not 1 <= method_id <= 7:
        raise click.UsageError(f"unknown method id {method_id} (valid: 1..7)")
    settings = _settings(kwargs, history_policy=history_policy)
    benchmark = _load(settings, benchmark_path)
    project = benchmark.project(project_name)
    try:
        query = project.report(bug_id)
    except KeyError:
        raise BugLocError(f"unknown bug id {bug_id!r} in project {project_name}")
    method = rank.MethodConfig.from_id(method_id)
    artifacts = _artifacts_for(project, benchmark, [method_id], cache_dir, settings)
    history = rank.history_for(query, project, settings.get("history_policy"))
    ranked = rank.localize(query, project, method, artifacts, history=history)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"ranking_{project_name}_m{method_id}_{bug_id}.csv"
    ranked.write_csv(csv_path)
    _print_top(ranked)
    click.echo(f"wrote {csv_path}")


def _evaluate_project(project, artifacts, method_id, settings):
    method = rank.MethodConfig.from_id(method_id)
    policy = settings.get("history_policy")
    results = []
    for query in project.bug_reports:
        history = rank.history_for(query, project, policy)
        ranked = rank.localize(query, project, method, artifacts, history=history)
        results.append(metrics.QueryResult(
            bug_id=query.id,
            ranked_file_ids=ranked.file_ids,
            relevant_file_ids=set(query.fixed_files),
        ))
    return metrics.compute_metrics(results), results


def _write_metrics_outputs(out, rows, per_query_rows, wilcoxon_rows):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["project", "method", "mrr", "map", "top1", "top5",
                         "top10", "n_queries"])
        writer.writerows(rows)
    with open(out / "metrics.json", "w") as fh:
        json.dump([dict(zip(["project", "method", "mrr", "map", "top1", "top5",
                             "top10", "n_queries"], row)) for row in rows], fh, indent=2)
        fh.write("\n")
    with open(out / "per_query.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["project", "method", "bug_id", "reciprocal_rank",
                         "average_precision"])
        writer.writerows(per_query_rows)
    with open(out / "wilcoxon.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "method_a", "method_b", "n", "statistic",
                         "p_value", "note"])
        writer.writerows(wilcoxon_rows)


@main.command("evaluate")
@click.option("--benchmark", "benchmark_path", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--methods", "methods_raw", default=None,
              help="comma-separated method ids (default 3,4)")
@click.option("--projects", "projects_raw", default=None,
              help="comma-separated project names (default: all)")
@click.option("--cache", "cache_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--history", "history_policy", type=click.Choice(["earlier", "all"]),
              default=None)
@common_options
@fail_cleanly
def cmd_evaluate(benchmark_path, methods_raw, projects_raw, cache_dir, out_dir,
                 history_policy, **kwargs):
    """Run methods over the benchmark; writes metrics, per-query values and
    pairwise significance tests under --out."""
    settings = _settings(kwargs, methods=methods_raw, history_policy=history_policy)
    benchmark = _load(settings, benchmark_path)
    method_ids = settings.method_ids()
    if projects_raw:
        project_names = sorted(projects_raw.replace(" ", "").split(","))
    else:
        project_names = sorted(benchmark.project_names)

    rows, per_query_rows = [], []
    per_project: dict[int, dict[str, metrics.MetricsReport]] = {m: {} for m in method_ids}
    for name in project_names:
        project = benchmark.project(name)
        if not project.has_queries:
            click.echo(f"skipping {name}: no queries", err=True)
            continue
        # one Artifacts per project covering every requested method, so
        # vectorization and doc-vector inference are shared across methods
        artifacts = _artifacts_for(project, benchmark, method_ids, cache_dir, settings)
        for method_id in method_ids:
            report, results = _evaluate_project(project, artifacts, method_id, settings)
            per_project[method_id][name] = report
            rows.append([name, method_id, f"{report.mrr:.6f}", f"{report.map:.6f}",
                         report.top_n[1], report.top_n[5], report.top_n[10],
                         report.n_queries])
            for result in results:
                rr, ap = report.per_query[result.bug_id]
                per_query_rows.append([name, method_id, result.bug_id,
                                       f"{rr:.6f}", f"{ap:.6f}"])

    for method_id in method_ids:
        reports = [per_project[method_id][n] for n in sorted(per_project[method_id])]
        if not reports:
            continue
        rows.append(["ALL", method_id,
                     f"{statistics.mean(r.mrr for r in reports):.6f}",
                     f"{statistics.mean(r.map for r in reports):.6f}",
                     sum(r.top_n[1] for r in reports),
                     sum(r.top_n[5] for r in reports),
                     sum(r.top_n[10] for r in reports),
                     sum(r.n_queries for r in reports)])

    wilcoxon_rows = []
    for i, method_a in enumerate(method_ids):
        for method_b in method_ids[i + 1:]:
            shared = sorted(set(per_project[method_a]) & set(per_project[method_b]))
            for metric_name in ("mrr", "map"):
                a = [getattr(per_project[method_a][n], metric_name) for n in shared]
                b = [getattr(per_project[method_b][n], metric_name) for n in shared]
                try:
                    stat, p = metrics.wilcoxon_signed_rank(a, b)
                    wilcoxon_rows.append([metric_name, method_a, method_b, len(shared),
                                          f"{stat:.6f}", f"{p:.6g}", ""])
                except ValueError as exc:
                    wilcoxon_rows.append([metric_name, method_a, method_b, len(shared),
                                          "", "", str(exc)])

    _write_metrics_outputs(Path(out_dir), rows, per_query_rows, wilcoxon_rows)
    click.echo(f"wrote metrics for {len(project_names)} project(s), "
               f"methods {','.join(map(str, method_ids))} to {out_dir}")


@main.command("report")
@click.option("--results", "results_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--pair", "pair", default=None,
              help="two method ids to compare, e.g. 3:4")
@fail_cleanly
def cmd_report(results_dir, pair):
    """Print a summary table from an evaluate output directory."""
    results = Path(results_dir)
    with open(results / "metrics.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise BugLocError("metrics.csv is empty")

    click.echo(f"{'project':<16} {'method':>6} {'MRR':>8} {'MAP':>8} "
               f"{'top1':>5} {'top5':>5} {'top10':>5}")
    for row in rows:
        click.echo(f"{row['project']:<16} {row['method']:>6} {float(row['mrr']):>8.4f} "
                   f"{float(row['map']):>8.4f} {row['top1']:>5} {row['top5']:>5} "
                   f"{row['top10']:>5}")

    if pair:
        try:
            method_a, method_b = (int(x) for x in pair.split(":"))
        except ValueError:
            raise click.UsageError(f"bad --pair value: {pair!r} (expected A:B)")
        per_project = {}
        for row in rows:
            if row["project"] == "ALL":
                continue
            per_project.setdefault(row["project"], {})[int(row["method"])] = row
        deltas_mrr, deltas_map = [], []
        for name, by_method in sorted(per_project.items()):
            if method_a in by_method and method_b in by_method:
                deltas_mrr.append(float(by_method[method_b]["mrr"]) -
                                  float(by_method[method_a]["mrr"]))
                deltas_map.append(float(by_method[method_b]["map"]) -
                                  float(by_method[method_a]["map"]))
        if not deltas_mrr:
            raise BugLocError(f"no shared projects for methods {method_a} and {method_b}")
        click.echo(f"\nmethod {method_b} vs method {method_a} over {len(deltas_mrr)} project(s):")
        click.echo(f"  mean MRR delta {statistics.mean(deltas_mrr):+.4f}, "
                   f"mean MAP delta {statistics.mean(deltas_map):+.4f}")
        wilcoxon_path = results / "wilcoxon.csv"
        if wilcoxon_path.is_file():
            with open(wilcoxon_path, newline="") as fh:
                for row in csv.DictReader(fh):
                    if {int(row["method_a"]), int(row["method_b"])} == {method_a, method_b}:
                        value = row["p_value"] or f"n/a ({row['note']})"
                        click.echo(f"  wilcoxon {row['metric']}: p = {value}")


if __name__ == "__main__":
    main()
