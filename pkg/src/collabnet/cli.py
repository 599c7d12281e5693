"""collabnet command line: build, rank, cohort, netstats, influence.

Every subcommand reloads the inputs, rebuilds the graph and writes its
outputs plus a ``manifest_<command>.json`` into the output directory.

Exit codes: 0 success, 1 analysis failure, 2 input or configuration error.
"""
from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .centrality import (
    DEFAULT_ALPHA,
    DEFAULT_DAMPING,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    ConvergenceError,
    build_personalization,
    closeness_centrality,
    degree_centrality,
    personalized_pagerank,
    top_k,
    write_scores,
)
from .cohort import (
    cohort_statistics,
    extract_features,
    hop_histogram,
    label_cohort,
    report_json,
    write_correlation,
    write_features,
    write_hop_histogram,
)
from .graph import (
    average_path_length,
    build_graph,
    clustering_coefficient,
    connected_components,
    degree_distribution,
    write_edge_list,
    write_node_table,
)
from .influence import (
    InfluenceParams,
    effective_influence,
    max_effective_influence,
    write_breakdown,
    write_influence,
)
from .ingest import (
    IngestError,
    PreprocessConfig,
    YearWindow,
    cohort_films,
    parse_films,
    parse_relations,
    preprocess,
)

log = logging.getLogger("collabnet")

EXIT_OK, EXIT_ANALYSIS, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad path, bad parameter or unparseable input (exit code 2)."""


@dataclass
class RunConfig:
    films_path: Path
    relations_path: Path | None = None
    films_format: str | None = None
    graph_window: YearWindow = YearWindow(1990, 2014)
    cohort_window: YearWindow = YearWindow(2015, 2019)
    actor_cap: int = 10
    winsorize_quantile: float | None = None
    alpha_pagerank: float = DEFAULT_ALPHA
    alpha_influence: float = DEFAULT_ALPHA
    damping: float = DEFAULT_DAMPING
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    director_personalization: bool = True
    top_k_directors: int = 100
    top_k_report: int = 7
    cocast_agg: str = "mean"
    corr: str = "pearson"
    output_dir: Path = Path("collabnet-out")
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("alpha_pagerank", "alpha_influence", "damping"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise InputError(f"{name} must lie in (0, 1)")
        if self.tolerance <= 0:
            raise InputError("tolerance must be positive")
        for name in ("actor_cap", "top_k_directors", "top_k_report", "max_iterations", "threads"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1")
        try:
            self.preprocess_config()
        except ValueError as exc:
            raise InputError(str(exc)) from None

    def preprocess_config(self) -> PreprocessConfig:
        return PreprocessConfig(self.actor_cap, self.graph_window, self.cohort_window, self.winsorize_quantile)

    def echo(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k in ("films_path", "relations_path", "output_dir", "extra"):
                continue
            out[k] = str(v) if isinstance(v, YearWindow) else v
        out.update(self.extra)
        return out


@dataclass
class Loaded:
    graph_films: list
    cohort_films: list
    graph: object
    parse_errors: int


def _read_text(path: Path) -> str:
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load(config: RunConfig) -> Loaded:
    fmt = config.films_format or ("json" if config.films_path.suffix.lower() in (".json", ".jsonl") else "csv")
    try:
        parsed = parse_films(_read_text(config.films_path), fmt)
    except IngestError as exc:
        raise InputError(f"{config.films_path}: {exc}") from None
    pc = config.preprocess_config()
    films = preprocess(parsed.records, pc)
    g = build_graph(films)
    log.info("graph: %d nodes, %d edges from %d films", g.n_nodes, g.n_edges, len(films))
    return Loaded(films, cohort_films(parsed.records, pc), g, len(parsed.errors))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc) if epoch else dt.datetime.now(dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


class Outputs:
    """Collects files written by one command and finishes with the manifest."""

    def __init__(self, config: RunConfig, command: str):
        self.config = config
        self.command = command
        self.dir = config.output_dir
        self.files: list[str] = []
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise InputError(f"cannot create output directory {self.dir}: {exc}") from None

    def open(self, name: str):
        self.files.append(name)
        return open(self.dir / name, "w", encoding="utf-8", newline="")

    def json(self, name: str, payload) -> None:
        with self.open(name) as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")

    def manifest(self, loaded: Loaded, **summary) -> Path:
        inputs = [{"file": self.config.films_path.name, "sha256": _sha256(self.config.films_path)}]
        if self.config.relations_path is not None and self.command == "cohort":
            inputs.append({"file": self.config.relations_path.name, "sha256": _sha256(self.config.relations_path)})
        payload = {
            "command": self.command,
            "version": __version__,
            "created": _timestamp(),
            "parameters": self.config.echo(),
            "inputs": inputs,
            "graph": {
                "nodes": loaded.graph.n_nodes,
                "edges": loaded.graph.n_edges,
                "films": len(loaded.graph_films),
                "cohort_films": len(loaded.cohort_films),
                "film_rows_rejected": loaded.parse_errors,
            },
            "summary": summary,
            "outputs": sorted(self.files),
        }
        name = f"manifest_{self.command}.json"
        path = self.dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
        return path


def pagerank_table(config: RunConfig, loaded: Loaded):
    p = build_personalization(loaded.graph, loaded.graph_films, config.alpha_pagerank, config.director_personalization)
    return personalized_pagerank(
        loaded.graph, p, config.damping, config.tolerance, config.max_iterations,
        params={"alpha": config.alpha_pagerank},
    )


def cmd_build(config: RunConfig) -> Loaded:
    loaded = load(config)
    out = Outputs(config, "build")
    with out.open("edges.csv") as fh:
        write_edge_list(loaded.graph, fh)
    with out.open("nodes.csv") as fh:
        write_node_table(loaded.graph, fh)
    out.manifest(loaded)
    return loaded


def cmd_rank(config: RunConfig, metric: str):
    loaded = load(config)
    g = loaded.graph
    if metric == "degree":
        table = degree_centrality(g)
    elif metric == "closeness":
        table = closeness_centrality(g, threads=config.threads)
    elif metric == "pagerank":
        table = pagerank_table(config, loaded)
    else:
        raise InputError(f"unknown metric {metric!r}")
    out = Outputs(config, f"rank_{metric}")
    with out.open(f"scores_{metric}.csv") as fh:
        write_scores(table, fh)
    with out.open(f"top_{metric}.csv") as fh:
        write_scores(table, fh, k=config.top_k_report)
    summary = {"top": [[g.name(v), s] for v, s in top_k(table, config.top_k_report)]}
    if table.iterations is not None:
        summary["iterations"] = table.iterations
    out.manifest(loaded, **summary)
    return table


def cmd_cohort(config: RunConfig):
    if config.relations_path is None:
        raise InputError("cohort needs --relations")
    try:
        relations = parse_relations(_read_text(config.relations_path))
    except IngestError as exc:
        raise InputError(f"{config.relations_path}: {exc}") from None
    loaded = load(config)
    g = loaded.graph
    params = InfluenceParams(pagerank_table(config, loaded), config.alpha_influence)
    labels = label_cohort(relations.records, g)
    features = extract_features(labels, loaded.cohort_films, g, params, config.top_k_directors, config.cocast_agg)
    report = cohort_statistics(features, config.corr)
    if report.insider_count == 0:
        log.warning("no insiders resolved against the graph; cohort deltas are absent")
    out = Outputs(config, "cohort")
    out.json("cohort_report.json", report_json(g, report))
    with out.open("cohort_features.csv") as fh:
        write_features(g, report, fh)
    with out.open("correlation_matrix.csv") as fh:
        write_correlation(report, fh)
    with out.open("hop_histogram.csv") as fh:
        write_hop_histogram(hop_histogram(report.features), fh)
    out.manifest(
        loaded,
        relations=len(relations.records),
        relation_errors=len(relations.errors),
        insiders=report.insider_count,
        outsiders=report.outsider_count,
    )
    return report


def cmd_netstats(config: RunConfig) -> dict:
    loaded = load(config)
    g = loaded.graph
    if g.n_nodes == 0:
        raise InputError("graph is empty; nothing in the graph window")
    apl = average_path_length(g, threads=config.threads)
    dist = degree_distribution(g)
    comps = connected_components(g)
    stats = {
        "nodes": g.n_nodes,
        "edges": g.n_edges,
        "clustering_coefficient": clustering_coefficient(g),
        "average_path_length": apl.mean,
        "path_pairs": apl.pairs,
        "largest_component_size": apl.component_size,
        "components": len(comps),
        "component_sizes": [len(c) for c in comps],
        "degree_histogram": {str(k): c for k, c in dist.histogram.items()},
        "loglog_slope": dist.loglog_slope,
        "loglog_intercept": dist.loglog_intercept,
    }
    out = Outputs(config, "netstats")
    out.json("netstats.json", stats)
    with out.open("degree_histogram.csv") as fh:
        fh.write("degree,count\n")
        for k, c in dist.histogram.items():
            fh.write(f"{k},{c}\n")
    out.manifest(loaded)
    return stats


def cmd_influence(config: RunConfig, pairs, all_shortest: bool = False, breakdown: bool = False, include_target: bool = True):
    loaded = load(config)
    g = loaded.graph
    ids = []
    for a, d in pairs:
        missing = [n for n in (a, d) if g.find(n) is None]
        if missing:
            raise InputError(f"not in graph: {', '.join(missing)}")
        ids.append((g.find(a), g.find(d)))
    params = InfluenceParams(pagerank_table(config, loaded), config.alpha_influence, include_target)
    compute = max_effective_influence if all_shortest else effective_influence
    results = [compute(g, a, d, params) for a, d in ids]
    out = Outputs(config, "influence")
    with out.open("influence.csv") as fh:
        write_influence(g, results, fh)
    if breakdown:
        with out.open("influence_breakdown.json") as fh:
            write_breakdown(g, results, fh)
    out.manifest(loaded, pairs=len(results))
    return results


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--films", required=True, type=Path, help="films CSV or JSON")
    common.add_argument("--films-format", choices=("csv", "json"), help="default: from file extension")
    common.add_argument("--relations", type=Path, help="debutant relation JSON")
    common.add_argument("--graph-years", type=YearWindow.parse, default=YearWindow(1990, 2014), metavar="Y1-Y2")
    common.add_argument("--cohort-years", type=YearWindow.parse, default=YearWindow(2015, 2019), metavar="Y1-Y2")
    common.add_argument("--cap", type=int, default=10, help="actors kept per film (default 10)")
    common.add_argument("--winsorize-quantile", type=float, help="clip votes at this quantile before scaling")
    common.add_argument("--alpha-pagerank", type=float, default=DEFAULT_ALPHA, help="billing attenuation")
    common.add_argument("--alpha-influence", type=float, default=DEFAULT_ALPHA, help="per-hop attenuation")
    common.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS)
    common.add_argument("--no-director-personalization", action="store_true",
                        help="directors get no restart weight in PageRank")
    common.add_argument("--top-directors", type=int, default=100)
    common.add_argument("--top", type=int, default=7, help="rows in top-k tables")
    common.add_argument("--cocast-agg", choices=("mean", "max", "sum"), default="mean")
    common.add_argument("--corr", choices=("pearson", "spearman"), default="pearson")
    common.add_argument("--out", type=Path, default=Path("collabnet-out"), help="output dir (env COLLABNET_OUT wins)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="collabnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"collabnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="write edge list, node table and manifest")
    rank = sub.add_parser("rank", parents=[common], help="degree, closeness or PageRank scores")
    rank.add_argument("--metric", choices=("degree", "closeness", "pagerank"), default="pagerank")
    sub.add_parser("cohort", parents=[common], help="insider/outsider debut report")
    sub.add_parser("netstats", parents=[common], help="clustering, path length, degree histogram")
    infl = sub.add_parser("influence", parents=[common], help="effective influence for name pairs")
    infl.add_argument("--pair", nargs=2, action="append", required=True, metavar=("SOURCE", "TARGET"))
    infl.add_argument("--all-shortest", action="store_true", help="max over every shortest path (small graphs)")
    infl.add_argument("--breakdown", action="store_true", help="also write per-term JSON")
    infl.add_argument("--exclude-target", action="store_true", help="leave the target's own term out")
    return parser


def config_from_args(args) -> RunConfig:
    out = os.environ.get("COLLABNET_OUT") or args.out
    config = RunConfig(
        films_path=args.films,
        relations_path=args.relations,
        films_format=args.films_format,
        graph_window=args.graph_years,
        cohort_window=args.cohort_years,
        actor_cap=args.cap,
        winsorize_quantile=args.winsorize_quantile,
        alpha_pagerank=args.alpha_pagerank,
        alpha_influence=args.alpha_influence,
        damping=args.damping,
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        director_personalization=not args.no_director_personalization,
        top_k_directors=args.top_directors,
        top_k_report=args.top,
        cocast_agg=args.cocast_agg,
        corr=args.corr,
        output_dir=Path(out),
        threads=args.threads,
    )
    config.validate()
    return config


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "build":
            loaded = cmd_build(config)
            print(f"{loaded.graph.n_nodes} nodes, {loaded.graph.n_edges} edges -> {config.output_dir}")
        elif args.command == "rank":
            table = cmd_rank(config, args.metric)
            for rank, (v, s) in enumerate(top_k(table, config.top_k_report), start=1):
                print(f"{rank:>3}  {s:.6f}  {table.names[v]}")
        elif args.command == "cohort":
            report = cmd_cohort(config)
            print(f"{report.insider_count} insiders, {report.outsider_count} outsiders -> {config.output_dir}")
        elif args.command == "netstats":
            stats = cmd_netstats(config)
            print(f"clustering {stats['clustering_coefficient']:.4f}, "
                  f"average path length {stats['average_path_length']:.4f}")
        elif args.command == "influence":
            for r in cmd_influence(config, args.pair, args.all_shortest, args.breakdown, not args.exclude_target):
                print(f"hops={r.hops}  value={r.value!r}")
    except InputError as exc:
        print(f"collabnet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"collabnet: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ValueError as exc:
        print(f"collabnet: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
