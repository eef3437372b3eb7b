"""Command-line interface.

Subcommands: simulate, sample, hc, estimate, centrality, metrics, bench.
Every flag can come from (in order of precedence) the command line, an
environment variable prefixed BDMPL_<COMMAND>_<FLAG>, or a JSON config file
passed as --config whose top-level keys are subcommand names. Every command
writes a RunManifest JSON before any output artifact and finalizes it after.
"""

import hashlib
import json
import sys
import time
from pathlib import Path

import click

from . import __version__, analysis, estimate, hillclimb, simbench
from . import sampler as samplermod
from .data import load_csv, load_sparse_binary, save_csv
from .graph import GraphPrior, read_edge_list, write_edge_list
from .kernels import BACKEND
from .score import DirichletHyper


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    """Configuration echo, seed, version, input digests, and timestamps."""

    def __init__(self, path, command, params, inputs=()):
        self.path = Path(path)
        self.doc = {
            "command": command,
            "config": {k: _jsonable(v) for k, v in params.items()},
            "seed": params.get("seed"),
            "version": __version__,
            "kernel_backend": BACKEND,
            "inputs": {str(p): _sha256(p) for p in inputs},
            "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "finished": None,
            "outputs": [],
        }
        self._write()

    def _write(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self, outputs):
        self.doc["outputs"] = [str(p) for p in outputs]
        self.doc["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self._write()


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    return v


def _load_dataset(path, fmt="auto"):
    path = str(path)
    if fmt == "csv" or (fmt == "auto" and path.endswith(".csv")):
        return load_csv(path)
    return load_sparse_binary(path)


def _fail(message):
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(1)


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file; top-level keys name subcommands.")
@click.pass_context
def main(ctx, config):
    """Structure learning for categorical data via birth-death MCMC."""
    if config:
        with open(config, "r", encoding="utf-8") as fh:
            ctx.default_map = json.load(fh)


@main.command()
@click.option("--kind", type=click.Choice(["random", "cluster", "scalefree"]),
              default="random", show_default=True)
@click.option("--p", type=int, required=True, help="Vertex count.")
@click.option("--beta", type=float, default=0.4, show_default=True,
              help="Edge probability for random/cluster graphs.")
@click.option("--m", type=int, default=1, show_default=True,
              help="Scale-free attachment count.")
@click.option("--n", type=int, required=True, help="Sample count.")
@click.option("--weight-low", type=float, default=0.5, show_default=True)
@click.option("--weight-high", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-prefix", type=click.Path(), required=True)
def simulate(kind, p, beta, m, n, weight_low, weight_high, seed, out_prefix):
    """Generate a synthetic graph and a dataset sampled from it."""
    params = dict(kind=kind, p=p, beta=beta, m=m, n=n, weight_low=weight_low,
                  weight_high=weight_high, seed=seed, out_prefix=str(out_prefix))
    manifest = Manifest(f"{out_prefix}.manifest.json", "simulate", params)
    try:
        if kind == "scalefree":
            spec = simbench.GraphSpec(kind=kind, p=p, m=m)
        else:
            spec = simbench.GraphSpec(kind=kind, p=p, edge_prob=beta)
        graph = simbench.gen_graph(spec, seed)
        model = simbench.sample_mrf_model(graph, seed, weight_low, weight_high)
        data = simbench.gen_data(model, n, seed)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    graph_path = f"{out_prefix}.graph.txt"
    data_path = f"{out_prefix}.data.csv"
    write_edge_list(graph, graph_path)
    save_csv(data, data_path)
    manifest.finish([graph_path, data_path])
    click.echo(f"wrote {graph_path} ({graph.n_edges} edges) and {data_path} "
               f"({data.n} samples)")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "sparse"]),
              default="auto", show_default=True)
@click.option("--iters", type=int, required=True)
@click.option("--burnin", type=int, default=0, show_default=True)
@click.option("--beta", type=float, default=0.5, show_default=True,
              help="Edge inclusion probability of the graph prior.")
@click.option("--alpha", type=float, default=0.5, show_default=True,
              help="Symmetric Dirichlet pseudo-count.")
@click.option("--n0", type=int, default=0, show_default=True,
              help="Enable multiple-edge updates with this batch size (>= 2).")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--start", default="empty", show_default=True,
              help="empty | full | prior | path to an edge-list file.")
@click.option("--trace-format", type=click.Choice(["csv", "npz"]), default="csv",
              show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def sample(data_path, fmt, iters, burnin, beta, alpha, n0, threads, seed, start,
           trace_format, out_path):
    """Run the birth-death sampler and write the chain trace."""
    params = dict(data=str(data_path), format=fmt, iters=iters, burnin=burnin,
                  beta=beta, alpha=alpha, n0=n0, threads=threads, seed=seed,
                  start=start, trace_format=trace_format, out=str(out_path))
    inputs = [data_path] + ([start] if Path(str(start)).is_file() else [])
    manifest = Manifest(f"{out_path}.manifest.json", "sample", params, inputs)
    try:
        data = _load_dataset(data_path, fmt)
        start_arg = start
        if start not in ("empty", "full", "prior"):
            start_arg = read_edge_list(start)
        config = samplermod.SamplerConfig(
            iterations=iters, burnin=burnin, beta=beta, alpha=alpha, seed=seed,
            mode="multiple" if n0 >= 2 else "single", n0=max(n0, 2),
            threads=threads, start=start_arg,
        )
        trace = samplermod.run(data, config)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    if trace_format == "npz":
        samplermod.write_trace_npz(trace, out_path)
    else:
        samplermod.write_trace_csv(trace, out_path)
    manifest.finish([out_path])
    click.echo(f"wrote {out_path}: {trace.n_iterations} iterations, "
               f"final edge count {trace.final_graph().n_edges}")


@main.command()
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "sparse"]),
              default="auto", show_default=True)
@click.option("--criterion", type=click.Choice(["and", "or"]), default="and",
              show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--beta", type=float, default=0.5, show_default=True)
@click.option("--no-prior-term", is_flag=True,
              help="Drop the neighborhood-size prior term from the objective.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def hc(data_path, fmt, criterion, alpha, beta, no_prior_term, threads, out_path):
    """Hill-climbing baseline estimate of the graph."""
    params = dict(data=str(data_path), format=fmt, criterion=criterion,
                  alpha=alpha, beta=beta, no_prior_term=no_prior_term,
                  threads=threads, out=str(out_path), seed=None)
    manifest = Manifest(f"{out_path}.manifest.json", "hc", params, [data_path])
    try:
        data = _load_dataset(data_path, fmt)
        graph = hillclimb.hc_learn(
            data, DirichletHyper(alpha), GraphPrior(beta), criterion=criterion,
            include_prior=not no_prior_term, threads=threads,
        )
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    write_edge_list(graph, out_path)
    manifest.finish([out_path])
    click.echo(f"wrote {out_path} ({graph.n_edges} edges)")


@main.command(name="estimate")
@click.option("--trace", "trace_path", type=click.Path(exists=True), required=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--include-burnin", is_flag=True,
              help="Keep burn-in iterations in the estimates.")
@click.option("--out-prefix", type=click.Path(), required=True)
def estimate_cmd(trace_path, threshold, include_burnin, out_prefix):
    """Edge probabilities, median graph, and convergence trace from a chain."""
    params = dict(trace=str(trace_path), threshold=threshold,
                  include_burnin=include_burnin, out_prefix=str(out_prefix),
                  seed=None)
    manifest = Manifest(f"{out_prefix}.manifest.json", "estimate", params,
                        [trace_path])
    try:
        trace = samplermod.read_trace(trace_path)
        probs = estimate.edge_inclusion_probs(trace, skip_burnin=not include_burnin)
        median = estimate.median_graph(probs, threshold)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    probs_path = f"{out_prefix}.probs.csv"
    matrix_path = f"{out_prefix}.matrix.csv"
    median_path = f"{out_prefix}.median.txt"
    conv_path = f"{out_prefix}.convergence.csv"
    estimate.write_edge_probs_csv(probs, probs_path)
    estimate.write_prob_matrix_csv(probs, matrix_path)
    write_edge_list(median, median_path)
    estimate.write_convergence_csv(trace, conv_path)
    manifest.finish([probs_path, matrix_path, median_path, conv_path])
    click.echo(f"median graph: {median.n_edges} edges "
               f"(threshold {threshold}); outputs at {out_prefix}.*")


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="Optional file with one vertex label per line.")
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def centrality(graph_path, labels_path, top_k, out_path):
    """Degree, closeness, betweenness, and page rank of a graph."""
    params = dict(graph=str(graph_path), labels=labels_path, top_k=top_k,
                  out=str(out_path), seed=None)
    inputs = [graph_path] + ([labels_path] if labels_path else [])
    manifest = Manifest(f"{out_path}.manifest.json", "centrality", params, inputs)
    try:
        g = read_edge_list(graph_path)
        labels = None
        if labels_path:
            with open(labels_path, "r", encoding="utf-8") as fh:
                labels = [line.strip() for line in fh if line.strip()]
        report = analysis.centrality_report(g, labels)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    analysis.write_centrality_csv(report, out_path)
    manifest.finish([out_path])
    k = min(top_k, g.p)
    for measure in analysis.MEASURES:
        ranked = analysis.top_k(report, measure, k)
        names = ", ".join(report.labels[v] for v in ranked)
        click.echo(f"top {k} by {measure}: {names}")


@main.command()
@click.option("--true-graph", type=click.Path(exists=True), required=True)
@click.option("--est-graph", type=click.Path(exists=True), required=True)
@click.option("--probs", "probs_path", type=click.Path(exists=True), default=None,
              help="Edge probability CSV for ROC/AUC.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def metrics(true_graph, est_graph, probs_path, out_path):
    """F1 score and structural Hamming distance between two graphs."""
    params = dict(true_graph=str(true_graph), est_graph=str(est_graph),
                  probs=probs_path, out=str(out_path), seed=None)
    inputs = [true_graph, est_graph] + ([probs_path] if probs_path else [])
    manifest = Manifest(f"{out_path}.manifest.json", "metrics", params, inputs)
    try:
        t = read_edge_list(true_graph)
        e = read_edge_list(est_graph)
        f1 = simbench.f1_score(t, e)
        hamming = simbench.shd(t, e)
        auc_value = ""
        if probs_path:
            probs = estimate.read_edge_probs_csv(probs_path)
            auc_value = repr(simbench.auc(simbench.roc_points(probs, t)))
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("f1,shd,auc\n")
        fh.write(f"{f1!r},{hamming},{auc_value}\n")
    manifest.finish([out_path])
    click.echo(f"f1={f1:.4f} shd={hamming}" +
               (f" auc={float(auc_value):.4f}" if auc_value else ""))


@main.command()
@click.option("--kinds", default="random,cluster,scalefree", show_default=True)
@click.option("--ps", default="10,20", show_default=True)
@click.option("--ns", default="200,500,1000", show_default=True)
@click.option("--replicates", type=int, default=50, show_default=True)
@click.option("--iters", type=int, default=100_000, show_default=True)
@click.option("--burnin", type=int, default=60_000, show_default=True)
@click.option("--alpha", type=float, default=0.5, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def bench(kinds, ps, ns, replicates, iters, burnin, alpha, workers, seed, out_dir):
    """Run the simulation benchmark and write the results table plus ROC points."""
    params = dict(kinds=kinds, ps=ps, ns=ns, replicates=replicates, iters=iters,
                  burnin=burnin, alpha=alpha, workers=workers, seed=seed,
                  out_dir=str(out_dir))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out_dir / "bench.manifest.json", "bench", params)
    try:
        protocol = simbench.BenchmarkProtocol(
            kinds=tuple(kinds.split(",")),
            ps=tuple(int(x) for x in ps.split(",")),
            ns=tuple(int(x) for x in ns.split(",")),
            replicates=replicates, iterations=iters, burnin=burnin,
            alpha=alpha, seed=seed, workers=workers,
        )
        results = simbench.run_benchmark(protocol)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    table_path = out_dir / "table.csv"
    roc_path = out_dir / "roc.csv"
    rows = simbench.summarize_benchmark(results)
    simbench.write_benchmark_csv(rows, table_path)
    simbench.write_roc_csv(results, roc_path)
    manifest.finish([table_path, roc_path])
    for row in rows:
        click.echo(f"{row['kind']} p={row['p']} n={row['n']} {row['method']}: "
                   f"F1 {row['mean_f1']:.2f}({row['sd_f1']:.2f}) "
                   f"SHD {row['mean_shd']:.1f}({row['sd_shd']:.1f})")


def entry():
    main(auto_envvar_prefix="BDMPL")


if __name__ == "__main__":
    entry()
