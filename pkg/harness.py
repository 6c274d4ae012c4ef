"""
HiddenShift — experiment harness
Seeded sweeps over instance families, CSV/JSON reports, scaling fits and
the run history kept by the CLI.
"""
from __future__ import annotations

import csv
import datetime
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from packaging.version import InvalidVersion, Version

from boolfn import BhspInstance, TruthTable, from_file, influence_profile, make_bent, make_delta, make_random
from cli import config as cfg
from cli.config import C
from cli.streamer import emit, section
from errors import (BudgetExceededError, CapacityError, ConfigError,
                    InsufficientCoverageError)
from solver import Mode, SolveConfig, promise_cutoff, solve_classical, solve_quantum

FAMILIES = ("bent", "delta", "random", "file")
SOLVERS = ("quantum", "classical")
FORMATS = ("csv", "json")

ROW_FIELDS = [
    "n", "trial", "family", "solver", "mode", "seed", "gamma_min",
    "queries", "f_queries", "g_queries", "subroutine_runs", "trials_per_rank_step", "rank", "cutoff",
    "found_shift", "planted_shift", "success",
]


# ── Seeds ───────────────────────────────────────────────────────────────────

def derive_seed(master_seed: int, n: int, trial: int, tag: str) -> int:
    """BLAKE2b-64 of 'master:n:trial:tag', little endian."""
    digest = hashlib.blake2b(f"{master_seed}:{n}:{trial}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


# ── Config ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    n_range: tuple[int, ...]
    trials: int = 100
    mode: Mode = Mode.PLAIN
    delta: float | None = None
    epsilon: float | None = None
    max_queries: int = cfg.DEFAULTS["max_queries"]
    master_seed: int = 0
    solvers: tuple[str, ...] = ("quantum",)
    output: str | None = None
    format: str = "csv"
    file: str | None = None
    workers: int = 1
    timing: bool = False
    path: str = "circuit"

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError:
            raise ConfigError(f"unknown mode '{self.mode}' (plain, amplified or promise)")
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family '{self.family}' (expected one of {FAMILIES})")
        if not self.n_range:
            raise ConfigError("n_range is empty")
        if len(set(self.n_range)) != len(self.n_range):
            raise ConfigError(f"n_range lists a size more than once: {self.n_range}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.solvers or any(s not in SOLVERS for s in self.solvers):
            raise ConfigError(f"solvers must be drawn from {SOLVERS}, got {self.solvers}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be csv or json, got '{self.format}'")
        if self.family == "file" and not self.file:
            raise ConfigError("family=file needs file=<path>")
        if self.family == "bent" and any(n % 2 for n in self.n_range):
            raise ConfigError("bent family needs even n")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        # fails early on bad mode/delta/epsilon combinations
        self.solve_config(0)

    def solve_config(self, seed: int) -> SolveConfig:
        return SolveConfig(self.mode, self.delta, self.epsilon, seed, self.max_queries, path=self.path)

    @classmethod
    def from_mapping(cls, values: dict) -> ExperimentConfig:
        known = {
            "family", "n_range", "trials", "mode", "delta", "epsilon", "max_queries",
            "master_seed", "solvers", "output", "format", "file", "workers", "timing", "path",
        }
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        if "family" not in values or "n_range" not in values:
            raise ConfigError("config needs at least family= and n_range=")

        def number(key, kind, default=None):
            if key not in values or values[key] in ("", None):
                return default
            try:
                return kind(values[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key}: cannot read '{values[key]}' as {kind.__name__}")

        n_range = values["n_range"]
        if isinstance(n_range, str):
            n_range = cfg.parse_n_range(n_range)
        solvers = values.get("solvers", "quantum")
        if isinstance(solvers, str):
            solvers = [s.strip() for s in solvers.split(",") if s.strip()]
        timing = str(values.get("timing", "false")).strip().lower() in ("1", "true", "yes")

        return cls(
            family=str(values["family"]).strip(),
            n_range=tuple(int(n) for n in n_range),
            trials=number("trials", int, 100),
            mode=str(values.get("mode", "plain")).strip(),
            delta=number("delta", float),
            epsilon=number("epsilon", float),
            max_queries=number("max_queries", int, cfg.DEFAULTS["max_queries"]),
            master_seed=number("master_seed", int, 0),
            solvers=tuple(solvers),
            output=values.get("output") or None,
            format=str(values.get("format", "csv")).strip(),
            file=values.get("file") or None,
            workers=number("workers", int, 1),
            timing=timing,
            path=str(values.get("path", "circuit")).strip(),
        )

    @classmethod
    def from_file(cls, path) -> ExperimentConfig:
        return cls.from_mapping(cfg.parse_kv_file(path))

# ── Instances ───────────────────────────────────────────────────────────────

def make_instance(family: str, n: int, seed: int, table: TruthTable | None = None) -> BhspInstance:
    """Family member plus a uniform shift, both from one seed. Random tables are
    redrawn until well-posed."""
    rng = np.random.default_rng(seed)
    shift = int(rng.integers(0, 1 << n))
    if family == "bent":
        f = make_bent(n, variant=int(rng.integers(1, 2 ** 63)))
    elif family == "delta":
        f = make_delta(n, 0)
    elif family == "random":
        attempt = 0
        while True:
            f = make_random(n, derive_seed(seed, n, attempt, "table"))
            if influence_profile(f).gamma_min > 0:
                break
            attempt += 1
    elif family == "file":
        if table is None or table.n != n:
            raise ConfigError(f"file family needs a table with n={n}")
        f = table
    else:
        raise ConfigError(f"unknown family '{family}'")
    return BhspInstance(f, shift)


# ── Sweep ───────────────────────────────────────────────────────────────────

@dataclass
class SweepReport:
    config: ExperimentConfig
    rows: list[dict]
    aggregates: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(f"# schema={cfg.SCHEMA_VERSION}\n")
        fields = ROW_FIELDS + (["wall_time"] if self.config.timing else [])
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: _cell(row.get(k)) for k in fields})
        for agg in self.aggregates:
            out.write("# aggregate " + " ".join(f"{k}={_cell(v)}" for k, v in agg.items()) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        fields = ROW_FIELDS + (["wall_time"] if self.config.timing else [])
        return json.dumps({
            "schema": cfg.SCHEMA_VERSION,
            "rows": [{k: row.get(k) for k in fields} for row in self.rows],
            "aggregates": self.aggregates,
        }, indent=2)

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = self.to_json() if self.config.format == "json" else self.to_csv()
        with open(path, "w", newline="") as f:
            f.write(text)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def _estimate_bytes(config: ExperimentConfig, n: int) -> int:
    size = 1 << n
    estimate = 4 * 8 * size                # tables, spectrum, autocorrelation
    if "quantum" in config.solvers:
        estimate += 6 * 8 * size           # two-branch state, cdf, masks
    if "classical" in config.solvers:
        estimate += size // 4              # candidate and visited bit sets
    return estimate * config.workers


def check_capacity(config: ExperimentConfig):
    for n in config.n_range:
        if not 1 <= n <= cfg.MAX_N:
            raise CapacityError(f"n={n} outside [1, {cfg.MAX_N}]")
        if "classical" in config.solvers and n > cfg.MAX_CLASSICAL_N:
            raise CapacityError(f"classical baseline is limited to n <= {cfg.MAX_CLASSICAL_N}")
        need = _estimate_bytes(config, n)
        if need > cfg.MAX_SWEEP_BYTES:
            raise CapacityError(f"n={n} needs about {need / 2**30:.1f} GiB, above the "
                                f"{cfg.MAX_SWEEP_BYTES / 2**30:.1f} GiB sweep limit")


def _cutoff(config: ExperimentConfig, n: int) -> int | None:
    if config.mode is not Mode.PROMISE:
        return None
    return promise_cutoff(n, config.delta, config.epsilon)


def _run_trial(task) -> list[dict]:
    config, n, trial, table = task
    instance_seed = derive_seed(config.master_seed, n, trial, "instance")
    instance = make_instance(config.family, n, instance_seed, table)
    gamma_min = influence_profile(instance.f).gamma_min
    planted = instance.planted_shift
    rows = []

    for solver in config.solvers:
        seed = derive_seed(config.master_seed, n, trial, solver)
        f0, g0 = instance.f_queries, instance.g_queries
        found = None
        wall = 0.0
        try:
            if solver == "quantum":
                report = solve_quantum(instance, config.solve_config(seed))
            else:
                report = solve_classical(instance, seed, config.max_queries)
            found, wall = report.found_shift, report.wall_time
            runs, steps = report.subroutine_runs, report.trials_per_rank_step
            rank, cutoff = report.rank, report.cutoff
        except BudgetExceededError as err:
            runs, steps, rank = err.runs, err.trials_per_rank_step, err.rank
            cutoff = _cutoff(config, n) if solver == "quantum" else None
        if solver == "classical":
            rank = None
        fq = instance.f_queries - f0
        gq = instance.g_queries - g0
        rows.append({
            "n": n,
            "trial": trial,
            "family": config.family,
            "solver": solver,
            "mode": config.mode.value if solver == "quantum" else "baseline",
            "seed": seed,
            "gamma_min": gamma_min,
            "queries": fq + gq,
            "f_queries": fq,
            "g_queries": gq,
            "subroutine_runs": runs,
            "trials_per_rank_step": " ".join(str(t) for t in steps),
            "rank": rank,
            "cutoff": cutoff,
            "found_shift": "" if found is None else format(found, "x"),
            "planted_shift": format(planted, "x"),
            "success": found is not None and found == planted,
            "wall_time": wall,
        })
    return rows


def aggregate(rows: list[dict]) -> list[dict]:
    """mean / median / p95 queries and success rate per (n, solver)."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((int(row["n"]), row["solver"]), []).append(row)
    out = []
    for (n, solver), group in sorted(groups.items(), key=lambda kv: (kv[0][0], SOLVERS.index(kv[0][1]))):
        q = np.array([int(r["queries"]) for r in group], dtype=np.float64)
        ok = sum(1 for r in group if _truthy(r["success"]))
        out.append({
            "n": n,
            "solver": solver,
            "trials": len(group),
            "mean_queries": float(np.mean(q)),
            "median_queries": float(np.median(q)),
            "p95_queries": float(np.percentile(q, 95)),
            "success_rate": ok / len(group),
        })
    return out


def _truthy(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() == "true"
    return bool(value)


def run_sweep(config: ExperimentConfig) -> SweepReport:
    check_capacity(config)
    table = from_file(config.file) if config.family == "file" else None
    if table is not None and any(n != table.n for n in config.n_range):
        raise ConfigError(f"file table has n={table.n}; n_range must be [{table.n}]")

    rows: list[dict] = []
    for n in sorted(config.n_range):
        section(f"n = {n}")
        tasks = [(config, n, trial, table) for trial in range(config.trials)]
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
        else:
            results = [_run_trial(task) for task in tasks]
        for trial_rows in results:
            rows.extend(trial_rows)
        done = [r for r in rows if r["n"] == n]
        for solver in config.solvers:
            mine = [r for r in done if r["solver"] == solver]
            ok = sum(1 for r in mine if r["success"])
            mean_q = sum(r["queries"] for r in mine) / len(mine)
            emit(f"  {C.GRAY}{solver:<9}{C.RESET} mean queries {mean_q:10.1f}   "
                 f"success {ok}/{len(mine)}")

    rows.sort(key=lambda r: (r["n"], r["trial"], SOLVERS.index(r["solver"])))
    return SweepReport(config, rows, aggregate(rows))


# ── Reading reports back ────────────────────────────────────────────────────

def _check_schema(found: str, path):
    try:
        if Version(str(found)) > Version(str(cfg.SCHEMA_VERSION)):
            raise ConfigError(f"{path}: schema {found} is newer than supported {cfg.SCHEMA_VERSION}")
    except InvalidVersion:
        raise ConfigError(f"{path}: unreadable schema version '{found}'")


def read_report(path) -> list[dict]:
    """Rows of a CSV or JSON sweep report, numbers converted."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read report {path}: {e}")

    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: bad JSON: {e}")
        _check_schema(data.get("schema", ""), path)
        raw_rows = data.get("rows", [])
    else:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# schema="):
            raise ConfigError(f"{path}: missing '# schema=' header")
        _check_schema(lines[0].partition("=")[2].strip(), path)
        body = [line for line in lines[1:] if not line.startswith("#")]
        raw_rows = list(csv.DictReader(body))

    rows = []
    for raw in raw_rows:
        row = dict(raw)
        for key in ("n", "trial", "queries", "f_queries", "g_queries", "subroutine_runs", "rank", "cutoff", "seed"):
            if key in row and row[key] not in ("", None):
                row[key] = int(row[key])
        if row.get("gamma_min") not in ("", None):
            row["gamma_min"] = float(row["gamma_min"])
        row["success"] = _truthy(row.get("success", False))
        rows.append(row)
    return rows


# ── Fitting ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FitResult:
    solver: str
    scale: str                    # "log2" (classical) or "linear" (quantum)
    slope: float
    intercept: float
    ci_low: float
    ci_high: float
    residual_rms: float
    ns: tuple[int, ...]


def fit_scaling(rows: list[dict], n_boot: int = 1000, seed: int = 0, min_points: int = 4) -> list[FitResult]:
    """
    Least-squares slope of median queries against n, per solver: log2 scale
    for classical rows, linear for quantum rows. 95% CI from resampling the
    trials within each n.
    """
    rng = np.random.default_rng(seed)
    results = []
    for solver in SOLVERS:
        by_n: dict[int, list[int]] = {}
        for row in rows:
            if row["solver"] == solver and _truthy(row["success"]):
                by_n.setdefault(int(row["n"]), []).append(int(row["queries"]))
        if not by_n:
            continue
        ns = sorted(by_n)
        if len(ns) < min_points:
            raise InsufficientCoverageError(
                f"{solver}: report covers {len(ns)} distinct n, need at least {min_points}")

        log_scale = solver == "classical"
        transform = np.log2 if log_scale else (lambda v: v)
        x = np.array(ns, dtype=np.float64)
        y = transform(np.array([np.median(by_n[n]) for n in ns], dtype=np.float64))
        slope, intercept = np.polyfit(x, y, 1)
        residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))

        boot = np.empty((n_boot, len(ns)))
        for j, n in enumerate(ns):
            q = np.array(by_n[n], dtype=np.float64)
            picks = rng.choice(q, size=(n_boot, q.size), replace=True)
            boot[:, j] = transform(np.median(picks, axis=1))
        slopes = np.polyfit(x, boot.T, 1)[0]
        low, high = np.percentile(slopes, [2.5, 97.5])

        results.append(FitResult(solver, "log2" if log_scale else "linear", float(slope),
                                 float(intercept), float(low), float(high), residual, tuple(ns)))
    if not results:
        raise InsufficientCoverageError("report has no successful rows to fit")
    return results


# ── History ─────────────────────────────────────────────────────────────────

def save_run(record: dict):
    """Prepend one CLI solve to the history file."""
    limit = cfg.load_config().get("history_limit", cfg.DEFAULTS["history_limit"])
    history = load_history()
    history.insert(0, {**record, "completed": datetime.datetime.now(datetime.timezone.utc).isoformat()})
    cfg.ensure_config_dir()
    with open(cfg.HISTORY_FILE, "w") as f:
        json.dump(history[:limit], f, indent=2)


def load_history() -> list[dict]:
    if not cfg.HISTORY_FILE.exists():
        return []
    try:
        with open(cfg.HISTORY_FILE) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError):
        return []
