"""Experiment harness: configs, dataset ingestion, runs, and CSV emission.

A benchmark is described by a flat INI file with one section per algorithm::

    [objective]
    kind = nqp
    dim = 20
    seed = 7

    [constraint]
    kind = block_budget
    blocks = 0-5 6-11 12-19
    budgets = 6 4 4

    [run]
    seeds = 1 2 3
    out_dir = out

    [bcg]
    T = 100
    B = 1
    delta = 0.05

Running it produces a trace CSV (``algorithm,seed,iteration,queries,
elapsed_ms,value``, one row per iteration of every cell) and a summary CSV
(``algorithm,final_value_mean,final_value_sd,total_queries,relative_runtime``)
with runtimes normalized to the zeroth-order conditional-gradient run.
Cells are deterministic given their seed; rows are emitted in sorted order,
so repeated runs agree except for wall-clock columns.
"""

from __future__ import annotations

import concurrent.futures
import csv
import math
from dataclasses import dataclass, replace
from configparser import ConfigParser
from importlib import resources
from itertools import chain, combinations, product
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .algorithms import AlgoParams, RunTrace, bcg, dbg, ga, scg, zga
from .constraints import BoxDomain, ConstraintSpec, contains, independent
from .objectives import (
    Graph,
    coverage_set_oracle,
    coverage_value_oracle,
    influence_set_oracle,
    logdet_set_oracle,
    nqp_generate,
    nqp_oracle,
    rbf_covariance,
)
from .oracles import SetOracle, ValueOracle, multilinear_value_oracle, noisy_wrap
from .polytope import project, swap_round

MAX_BRUTE_FORCE_SETS = 10**6

CONTINUOUS_ALGOS = ("bcg", "scg", "ga", "zga")
DISCRETE_ALGOS = ("dbg", "scg", "ga", "zga")

TRACE_HEADER = ["algorithm", "seed", "iteration", "queries", "elapsed_ms", "value"]
SUMMARY_HEADER = [
    "algorithm",
    "final_value_mean",
    "final_value_sd",
    "total_queries",
    "relative_runtime",
]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# Dataset ingestion
# ---------------------------------------------------------------------------

def load_edge_list(path) -> Graph:
    """Parse an undirected edge list: one ``u v`` pair of 0-based ints per line.

    Blank lines and ``#`` comments are skipped; duplicate edges collapse; the
    node count is the largest index seen plus one.
    """
    edges: set[tuple[int, int]] = set()
    max_index = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'u v', got {raw!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: non-integer node id") from exc
            if u < 0 or v < 0:
                raise ValueError(f"{path}: line {lineno}: negative node index")
            max_index = max(max_index, u, v)
            if u != v:
                edges.add((min(u, v), max(u, v)))
    if max_index < 0:
        raise ValueError(f"{path}: empty edge list")
    return Graph.from_edges(max_index + 1, edges)


def load_matrix_csv(path, unit_interval: bool = False) -> np.ndarray:
    """Read a header-free rectangular numeric CSV into a row-major matrix."""
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                row = [float(cell) for cell in record]
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: non-numeric cell") from exc
            if rows and len(row) != len(rows[0]):
                raise ValueError(
                    f"{path}: row {lineno}: has {len(row)} columns, expected {len(rows[0])}"
                )
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: empty matrix")
    matrix = np.array(rows, dtype=float)
    if unit_interval and (np.any(matrix < 0) or np.any(matrix > 1)):
        raise ValueError(f"{path}: entries must lie in [0, 1]")
    return matrix


def karate_club_graph() -> Graph:
    """The bundled 34-node, 78-edge social network used by the influence demo."""
    ref = resources.files("zogreedy").joinpath("data/karate_club_edges.txt")
    with resources.as_file(ref) as path:
        graph = load_edge_list(path)
    if graph.num_nodes != 34 or graph.num_edges != 78:
        raise RuntimeError("bundled social-network data is corrupted")
    return graph


def synthetic_topics(num_topics: int, num_articles: int, seed: int) -> np.ndarray:
    """Random topic matrix: each article column is Dirichlet over topics."""
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(num_topics), size=num_articles).T


def synthetic_data_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, cols))


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    objective: dict
    constraint: ConstraintSpec
    discrete: bool
    dim: int
    algorithms: dict
    seeds: tuple[int, ...]
    out_dir: str
    noise: float = 0.0


def _parse_blocks(text: str) -> tuple[tuple[int, ...], ...]:
    blocks = []
    for token in text.split():
        if "-" in token:
            lo, hi = token.split("-", 1)
            blocks.append(tuple(range(int(lo), int(hi) + 1)))
        else:
            blocks.append(tuple(int(i) for i in token.split(",") if i != ""))
    return tuple(blocks)


def _parse_constraint(section, dim: int) -> ConstraintSpec:
    kind = section.get("kind", "box").strip()
    try:
        if kind == "box":
            cap = float(section.get("cap", "1.0"))
            return ConstraintSpec.box(np.full(dim, cap))
        blocks = _parse_blocks(section.get("blocks", ""))
        budgets = tuple(float(b) for b in section.get("budgets", "").split())
        if kind == "block_budget":
            cap = float(section.get("cap", "1.0"))
            return ConstraintSpec.block_budget(dim, blocks, budgets, cap=cap)
        if kind == "partition_matroid":
            return ConstraintSpec.partition_matroid(dim, blocks, budgets)
    except ValueError as exc:
        raise ConfigError(f"constraint: {exc}") from exc
    raise ConfigError(f"constraint: unknown kind {kind!r}")


def _parse_algo_params(section) -> AlgoParams:
    kwargs = {}
    for key in ("T", "B", "l", "trace_value_samples"):
        if key in section:
            kwargs[key] = int(section[key])
    for key in ("delta", "eta0"):
        if key in section:
            kwargs[key] = float(section[key])
    try:
        return AlgoParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _objective_dim(spec: dict) -> int:
    kind = spec["kind"]
    if kind == "nqp":
        return int(spec["dim"])
    if kind == "coverage":
        if "topics_csv" in spec:
            return load_matrix_csv(spec["topics_csv"], unit_interval=True).shape[1]
        return int(spec.get("articles", 24))
    if kind == "logdet":
        if "data_csv" in spec:
            return load_matrix_csv(spec["data_csv"]).shape[1]
        return int(spec.get("attributes", 22))
    if kind == "influence":
        return _load_graph(spec).num_nodes
    raise ConfigError(f"objective: unknown kind {kind!r}")


def _load_graph(spec: dict) -> Graph:
    edges = spec.get("edges", "karate")
    if edges == "karate":
        return karate_club_graph()
    return load_edge_list(edges)


def build_objective(cfg: ExperimentConfig) -> Union[ValueOracle, SetOracle]:
    """Construct a fresh oracle for one run cell (query counters start at 0)."""
    spec = cfg.objective
    kind = spec["kind"]
    seed = int(spec.get("seed", 0))
    if kind == "nqp":
        H, b = nqp_generate(int(spec["dim"]), seed)
        return nqp_oracle(H, b)
    if kind == "coverage":
        if "topics_csv" in spec:
            P = load_matrix_csv(spec["topics_csv"], unit_interval=True)
        else:
            P = synthetic_topics(int(spec.get("topics", 10)), int(spec.get("articles", 24)), seed)
        if cfg.discrete:
            return coverage_set_oracle(P)
        return coverage_value_oracle(P)
    if kind == "logdet":
        if "data_csv" in spec:
            X = load_matrix_csv(spec["data_csv"])
        else:
            X = synthetic_data_matrix(int(spec.get("rows", 60)), int(spec.get("attributes", 22)), seed)
        sigma = rbf_covariance(X, float(spec.get("bandwidth", 0.75)))
        return logdet_set_oracle(sigma)
    if kind == "influence":
        return influence_set_oracle(_load_graph(spec))
    raise ConfigError(f"objective: unknown kind {kind!r}")


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment INI file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser = ConfigParser()
    try:
        parser.read(path)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if "objective" not in parser:
        raise ConfigError(f"{path}: missing [objective] section")
    spec = dict(parser["objective"])
    if "kind" not in spec:
        raise ConfigError(f"{path}: objective needs a kind")
    for key in ("topics_csv", "data_csv"):
        if key in spec:
            spec[key] = str((path.parent / spec[key]).resolve())
    if "edges" in spec and spec["edges"] != "karate":
        spec["edges"] = str((path.parent / spec["edges"]).resolve())
    as_set = spec.get("discrete", "false").strip().lower() in ("1", "true", "yes")
    discrete = spec["kind"] in ("logdet", "influence") or as_set
    if as_set and spec["kind"] != "coverage":
        raise ConfigError("objective.discrete applies to the coverage kind only")
    try:
        dim = _objective_dim(spec)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: objective: {exc}") from exc

    if "constraint" not in parser:
        raise ConfigError(f"{path}: missing [constraint] section")
    constraint = _parse_constraint(parser["constraint"], dim)
    if discrete and constraint.kind != "partition_matroid":
        raise ConfigError("discrete objectives need a partition_matroid constraint")

    run = parser["run"] if "run" in parser else {}
    try:
        seeds = tuple(int(s) for s in run.get("seeds", "0").split())
    except ValueError as exc:
        raise ConfigError(f"{path}: run.seeds: {exc}") from exc
    if not seeds:
        raise ConfigError(f"{path}: run.seeds must list at least one seed")

    allowed = DISCRETE_ALGOS if discrete else CONTINUOUS_ALGOS
    algorithms = {}
    for section in parser.sections():
        if section in ("objective", "constraint", "run"):
            continue
        if section not in allowed:
            raise ConfigError(
                f"{path}: algorithm {section!r} does not apply to this objective "
                f"(allowed: {', '.join(allowed)})"
            )
        algorithms[section] = _parse_algo_params(parser[section])
    if not algorithms:
        raise ConfigError(f"{path}: no algorithm sections found")

    noise = float(spec.get("noise", "0"))
    if noise < 0:
        raise ConfigError("objective.noise must be non-negative")

    return ExperimentConfig(
        name=run.get("name", path.stem),
        objective=spec,
        constraint=constraint,
        discrete=discrete,
        dim=dim,
        algorithms=algorithms,
        seeds=seeds,
        out_dir=run.get("out_dir", "out"),
        noise=noise,
    )


# ---------------------------------------------------------------------------
# Brute-force optimum
# ---------------------------------------------------------------------------

def count_feasible_sets(matroid: ConstraintSpec) -> int:
    total = 1
    covered = set(chain.from_iterable(matroid.blocks))
    for block, limit in zip(matroid.blocks, matroid.budgets):
        k = int(round(limit))
        total *= sum(math.comb(len(block), r) for r in range(min(k, len(block)) + 1))
    total *= 2 ** (matroid.dim - len(covered))
    return total


def iter_feasible_sets(matroid: ConstraintSpec) -> Iterator[frozenset]:
    """Yield every independent set of a partition matroid (free coords too)."""
    covered = set(chain.from_iterable(matroid.blocks))
    free = [i for i in range(matroid.dim) if i not in covered]
    per_block: list[list[tuple[int, ...]]] = []
    for block, limit in zip(matroid.blocks, matroid.budgets):
        k = int(round(limit))
        choices = [
            subset
            for r in range(min(k, len(block)) + 1)
            for subset in combinations(block, r)
        ]
        per_block.append(choices)
    free_choices = [
        subset for r in range(len(free) + 1) for subset in combinations(free, r)
    ]
    for combo in product(*per_block) if per_block else [()]:
        base = frozenset(chain.from_iterable(combo))
        for extra in free_choices:
            yield base | frozenset(extra)


def brute_force_opt(f: SetOracle, matroid: ConstraintSpec) -> tuple[frozenset, float]:
    """Exhaustive maximum of a set function over a small partition matroid."""
    if matroid.kind != "partition_matroid":
        raise ValueError("brute force optimum needs a partition matroid")
    n = count_feasible_sets(matroid)
    if n > MAX_BRUTE_FORCE_SETS:
        raise ValueError(f"{n} feasible sets exceed the enumeration budget")
    best_set: frozenset = frozenset()
    best_value = -math.inf
    for candidate in iter_feasible_sets(matroid):
        value = f.peek(candidate)
        if value > best_value:
            best_set, best_value = candidate, value
    return best_set, best_value


# ---------------------------------------------------------------------------
# Running experiments
# ---------------------------------------------------------------------------

@dataclass
class CellResult:
    algorithm: str
    seed: int
    trace: Optional[RunTrace]
    final_value: float
    total_queries: int
    wall_s: float
    error: Optional[str] = None


def _cell_seed(base_seed: int, algorithm: str) -> int:
    """Stable per-cell seed derivation, independent of execution order."""
    digest = sum(ord(c) * 131**k for k, c in enumerate(algorithm)) % (2**31)
    return (base_seed * 2654435761 + digest) % (2**31)


def run_cell(cfg: ExperimentConfig, algorithm: str, seed: int) -> CellResult:
    """Execute one (algorithm, seed) cell on a freshly built oracle."""
    params = replace(cfg.algorithms[algorithm], seed=_cell_seed(seed, algorithm))
    oracle = build_objective(cfg)
    try:
        if cfg.discrete:
            output, trace = _run_discrete(oracle, cfg, algorithm, params)
            final_value = oracle.peek(output)
        else:
            output, trace = _run_continuous(oracle, cfg, algorithm, params)
            final_value = oracle.peek(output)
            if not contains(cfg.constraint, output, tol=1e-9):
                raise RuntimeError("output violates the constraint")
        return CellResult(
            algorithm=algorithm,
            seed=seed,
            trace=trace,
            final_value=final_value,
            total_queries=int(trace.final.queries),
            wall_s=float(trace.final.elapsed_s),
        )
    except Exception as exc:  # keep the remaining cells running
        return CellResult(
            algorithm=algorithm,
            seed=seed,
            trace=None,
            final_value=float("nan"),
            total_queries=0,
            wall_s=0.0,
            error=f"{type(exc).__name__}: {exc}",
        )


def _run_continuous(oracle: ValueOracle, cfg, algorithm, params):
    domain = oracle.domain if oracle.domain is not None else BoxDomain.unit_cube(cfg.dim)
    if algorithm == "bcg":
        target = noisy_wrap(oracle, cfg.noise, seed=params.seed + 1) if cfg.noise else oracle
        return bcg(target, domain, cfg.constraint, params)
    if algorithm == "zga":
        target = noisy_wrap(oracle, cfg.noise, seed=params.seed + 1) if cfg.noise else oracle
        return zga(target, domain, cfg.constraint, params)
    if algorithm == "scg":
        return scg(oracle, cfg.constraint, params)
    if algorithm == "ga":
        return ga(oracle, cfg.constraint, params)
    raise ConfigError(f"unknown continuous algorithm {algorithm!r}")


def _run_discrete(f: SetOracle, cfg, algorithm, params):
    if algorithm == "dbg":
        subset, trace = dbg(f, cfg.constraint, params)
    elif algorithm == "scg":
        subset, trace = scg(f, cfg.constraint, params)
    elif algorithm in ("ga", "zga"):
        wrapper = multilinear_value_oracle(
            f, l=params.l, seed=params.seed + 7, peek_samples=params.trace_value_samples
        )
        if algorithm == "ga":
            x, trace = ga(wrapper, cfg.constraint, params)
        else:
            x, trace = zga(wrapper, BoxDomain.unit_cube(f.ground_size), cfg.constraint, params)
        rng = np.random.default_rng(params.seed + 13)
        subset = swap_round(project(cfg.constraint, x), cfg.constraint, rng)
    else:
        raise ConfigError(f"unknown discrete algorithm {algorithm!r}")
    if not independent(cfg.constraint, subset):
        raise RuntimeError("output set violates the matroid")
    return subset, trace


def _cell_worker(args) -> CellResult:
    cfg, algorithm, seed = args
    return run_cell(cfg, algorithm, seed)


def run_experiment(
    cfg: ExperimentConfig, jobs: int = 1, out_dir: Optional[str] = None
) -> tuple[Path, Path]:
    """Run every (algorithm, seed) cell and write trace + summary CSVs.

    Returns the two output paths.  Failed cells are skipped in the CSVs and
    reported in the summary's stderr companion ``<name>_failures.txt``.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(cfg, algo, seed) for algo in cfg.algorithms for seed in cfg.seeds]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_worker, cells))
    else:
        results = [_cell_worker(c) for c in cells]

    by_algo: dict[str, list[CellResult]] = {a: [] for a in cfg.algorithms}
    for res in results:
        by_algo[res.algorithm].append(res)

    trace_path = out / f"{cfg.name}_trace.csv"
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for algo in cfg.algorithms:
            for res in sorted(by_algo[algo], key=lambda r: r.seed):
                if res.trace is None:
                    continue
                for rec in res.trace.records:
                    writer.writerow(
                        [
                            algo,
                            res.seed,
                            rec.t,
                            rec.queries,
                            f"{rec.elapsed_s * 1000.0:.3f}",
                            repr(rec.value),
                        ]
                    )

    reference = "bcg" if "bcg" in cfg.algorithms else ("dbg" if "dbg" in cfg.algorithms else next(iter(cfg.algorithms)))
    ref_results = [r for r in by_algo[reference] if r.error is None]
    ref_time = float(np.mean([r.wall_s for r in ref_results])) if ref_results else float("nan")

    summary_path = out / f"{cfg.name}_summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for algo in cfg.algorithms:
            ok = [r for r in by_algo[algo] if r.error is None]
            if not ok:
                writer.writerow([algo, "nan", "nan", 0, "nan"])
                continue
            finals = np.array([r.final_value for r in ok])
            mean_time = float(np.mean([r.wall_s for r in ok]))
            rel = mean_time / ref_time if ref_time and not math.isnan(ref_time) else float("nan")
            writer.writerow(
                [
                    algo,
                    repr(float(np.mean(finals))),
                    repr(float(np.std(finals))),
                    int(ok[0].total_queries),
                    repr(float(rel)),
                ]
            )

    failures = [r for r in results if r.error is not None]
    if failures:
        with open(out / f"{cfg.name}_failures.txt", "w", encoding="utf-8") as fh:
            for r in failures:
                fh.write(f"{r.algorithm} seed={r.seed}: {r.error}\n")
    return trace_path, summary_path


# ---------------------------------------------------------------------------
# SVG chart (value vs. queries)
# ---------------------------------------------------------------------------

_SVG_COLORS = ["#1f6fb2", "#e07b39", "#4c9f70", "#9b5de5", "#d1495b", "#5f6caf"]


def write_svg(trace_csv, out_path, width: int = 640, height: int = 400) -> Path:
    """Render mean value vs. mean queries per algorithm from a trace CSV."""
    series: dict[str, dict[int, list[tuple[float, float]]]] = {}
    with open(trace_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ValueError(f"{trace_csv}: unexpected header {reader.fieldnames}")
        for row in reader:
            series.setdefault(row["algorithm"], {}).setdefault(
                int(row["iteration"]), []
            ).append((float(row["queries"]), float(row["value"])))
    if not series:
        raise ValueError(f"{trace_csv}: no rows to plot")

    lines: dict[str, list[tuple[float, float]]] = {}
    for algo, by_iter in series.items():
        pts = []
        for it in sorted(by_iter):
            qs, vs = zip(*by_iter[it])
            pts.append((float(np.mean(qs)), float(np.mean(vs))))
        lines[algo] = pts

    xs = [p[0] for pts in lines.values() for p in pts]
    ys = [p[1] for pts in lines.values() for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = x_hi - x_lo or 1.0
    y_span = y_hi - y_lo or 1.0
    margin = 50

    def sx(x: float) -> float:
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 10}" text-anchor="middle" '
        f'font-size="12">oracle queries</text>',
        f'<text x="{margin}" y="{height - margin + 15}" font-size="10">{x_lo:.4g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 15}" text-anchor="end" '
        f'font-size="10">{x_hi:.4g}</text>',
        f'<text x="{margin - 5}" y="{height - margin}" text-anchor="end" '
        f'font-size="10">{y_lo:.4g}</text>',
        f'<text x="{margin - 5}" y="{margin + 4}" text-anchor="end" '
        f'font-size="10">{y_hi:.4g}</text>',
    ]
    for k, (algo, pts) in enumerate(lines.items()):
        color = _SVG_COLORS[k % len(_SVG_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - margin + 4}" y="{margin + 14 * k + 10}" '
            f'font-size="11" fill="{color}">{algo}</text>'
        )
    parts.append("</svg>")
    out_path = Path(out_path)
    out_path.write_text("\n".join(parts), encoding="utf-8")
    return out_path
