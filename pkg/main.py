#!/usr/bin/env python3
"""
HiddenShift — CLI entry point
Usage:
  hiddenshift solve --family bent --n 8 --shift random
  hiddenshift solve --file table.txt --shift 2a --mode amplified
  hiddenshift solve --family random --n 12 --mode promise --delta 0.33 --epsilon 0.1
  hiddenshift spectrum --file table.txt --out spectrum.csv
  hiddenshift sweep --config sweep.conf
  hiddenshift verify
  hiddenshift fit --report sweep.csv
  hiddenshift history
"""
import dataclasses
import functools
import hashlib
import json
import sys
import time

import click

from cli import config as cfg
from cli.config import C
from cli.streamer import banner, emit, fail, section, set_quiet
from errors import EXIT_INVARIANT, ArgumentError, HiddenShiftError


def _guarded(fn):
    """Turn HiddenShiftError into one red line and its exit code."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HiddenShiftError as e:
            fail(str(e))
            sys.exit(e.exit_code)
    return wrapper


@click.group()
@click.option("--quiet", "-q", is_flag=True, help="Suppress progress output")
def cli(quiet):
    """HiddenShift — simulate and measure the Boolean hidden shift algorithm."""
    set_quiet(quiet)


# ── Solve ──────────────────────────────────────────────────────────────────

@cli.command()
@click.option("--family", type=click.Choice(["bent", "delta", "random"]), help="Built-in function family")
@click.option("--file", "table_file", type=click.Path(exists=True, dir_okay=False), help="Truth-table file")
@click.option("--n", "n", type=int, help="Number of input bits (families only)")
@click.option("--shift", default="random", show_default=True, help="Hidden shift in hex, or 'random'")
@click.option("--mode", type=click.Choice(["plain", "amplified", "promise"]), default="plain", show_default=True)
@click.option("--solver", type=click.Choice(["quantum", "classical"]), default="quantum", show_default=True)
@click.option("--delta", type=float, help="Promise lower bound on the minimum influence")
@click.option("--epsilon", type=float, help="Promise-mode failure budget")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-queries", type=int, help="Oracle-call cap (default from config)")
@click.option("--path", type=click.Choice(["circuit", "direct"]), default="circuit", show_default=True,
              help="Simulate gate by gate or from the two spectra")
@click.option("--json", "as_json", is_flag=True, help="Print the run report as JSON")
@_guarded
def solve(family, table_file, n, shift, mode, solver, delta, epsilon, seed, max_queries, path, as_json):
    """Plant a shift and recover it through the oracles."""
    from boolfn import BhspInstance, from_file, influence_profile
    from harness import make_instance, save_run
    from solver import SolveConfig, solve_classical, solve_quantum

    if as_json:
        set_quiet(True)
    if (family is None) == (table_file is None):
        raise ArgumentError("give exactly one of --family or --file")
    if max_queries is None:
        max_queries = cfg.load_config()["max_queries"]

    if table_file:
        table = from_file(table_file)
        if n is not None and n != table.n:
            raise ArgumentError(f"--n {n} does not match the file's n={table.n}")
        instance = make_instance("file", table.n, seed, table)
        family = "file"
    else:
        if n is None:
            raise ArgumentError("--n is required with --family")
        instance = make_instance(family, n, seed)

    if shift != "random":
        try:
            planted = int(shift, 16)
        except ValueError:
            raise ArgumentError(f"--shift must be hex or 'random', got '{shift}'")
        instance = BhspInstance(instance.f, planted)

    run_id = hashlib.md5(f"{family}{instance.n}{seed}{time.time()}".encode()).hexdigest()[:8]
    banner()
    emit(f"  {C.BOLD}Run ID    :{C.RESET} {run_id}")
    emit(f"  {C.BOLD}Function  :{C.RESET} {family}, n={instance.n}")
    emit(f"  {C.BOLD}Solver    :{C.RESET} {solver}" + (f" ({mode})" if solver == "quantum" else ""))
    emit(f"  {C.BOLD}Min infl. :{C.RESET} {influence_profile(instance.f).gamma_min:.6g}")

    section("Solving")
    if solver == "quantum":
        report = solve_quantum(instance, SolveConfig(mode, delta, epsilon, seed, max_queries, path=path))
    else:
        report = solve_classical(instance, seed, max_queries)

    planted = instance.planted_shift
    width = (instance.n + 3) // 4
    found = None if report.found_shift is None else format(report.found_shift, f"0{width}x")
    success = report.found_shift == planted

    emit(f"  Oracle queries   : {report.queries}  (f {report.f_queries}, g {report.g_queries})")
    emit(f"  Subroutine runs  : {report.subroutine_runs}")
    if report.trials_per_rank_step:
        emit(f"  {C.GRAY}Runs per rank step: {report.trials_per_rank_step}{C.RESET}")
    if report.cutoff is not None:
        emit(f"  {C.GRAY}Cutoff: {report.cutoff} runs{C.RESET}")

    record = {
        "run_id": run_id,
        "family": family,
        "n": instance.n,
        "solver": solver,
        "mode": report.mode,
        "seed": seed,
        "found_shift": found,
        "planted_shift": format(planted, f"0{width}x"),
        "success": success,
        "queries": report.queries,
        "subroutine_runs": report.subroutine_runs,
    }
    save_run(record)

    if as_json:
        click.echo(json.dumps({**report.to_dict(), **record}, indent=2, default=str))

    if found is None:
        fail(f"no shift found within the cutoff of {report.cutoff} runs")
        sys.exit(1)
    if not success:
        fail(f"solver returned {found} but the planted shift is {record['planted_shift']}")
        sys.exit(EXIT_INVARIANT)
    emit(f"\n  {C.GREEN}✅ Recovered shift {found}{C.RESET}\n")


# ── Spectrum ───────────────────────────────────────────────────────────────

@cli.command()
@click.option("--file", "table_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default="-", show_default=True, help="CSV destination, '-' for stdout")
@_guarded
def spectrum(table_file, out):
    """Walsh-Hadamard spectrum of a truth-table file as `u,coeff` CSV."""
    from boolfn import from_file, influence_profile, is_bent, spectrum_to_csv, wht

    table = from_file(table_file)
    sp = wht(table)
    if out == "-":
        spectrum_to_csv(sp, sys.stdout)
        return

    with open(out, "w", newline="") as f:
        spectrum_to_csv(sp, f)
    profile = influence_profile(table)
    emit(f"  n={table.n}  parseval error {sp.parseval_error():.3g}  "
         f"min influence {profile.gamma_min:.6g} at v={profile.argmin:0{table.n}b}"
         + ("  (bent)" if is_bent(table) else ""))
    emit(f"  {C.GREEN}✓ Spectrum written to {out}{C.RESET}")


# ── Sweep ──────────────────────────────────────────────────────────────────

@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="key=value experiment file")
@click.option("--output", type=click.Path(dir_okay=False), help="Override the config's output path")
@click.option("--workers", type=int, help="Override the worker count")
@_guarded
def sweep(config_path, output, workers):
    """Seeded experiment over families, sizes and solvers."""
    from harness import ExperimentConfig, run_sweep

    values = cfg.parse_kv_file(config_path)
    user = cfg.load_config()
    values.setdefault("max_queries", str(user["max_queries"]))
    values.setdefault("workers", str(user["workers"]))
    config = ExperimentConfig.from_mapping(values)
    overrides = {k: v for k, v in (("output", output), ("workers", workers)) if v is not None}
    if overrides:
        config = dataclasses.replace(config, **overrides)
    if not config.output:
        # report goes to stdout
        set_quiet(True)

    banner()
    emit(f"  {C.BOLD}Family  :{C.RESET} {config.family}   n = {list(config.n_range)}   trials = {config.trials}")
    emit(f"  {C.BOLD}Solvers :{C.RESET} {', '.join(config.solvers)}   mode = {config.mode.value}")

    report = run_sweep(config)
    if config.output:
        report.write(config.output)
        emit(f"\n  {C.GREEN}✓ {len(report.rows)} rows written to {config.output}{C.RESET}\n")
    else:
        click.echo(report.to_json() if config.format == "json" else report.to_csv(), nl=False)


# ── Verify ─────────────────────────────────────────────────────────────────

@cli.command()
@click.option("--samples", default=500, show_default=True, help="Random functions per n in [4, 10]")
@click.option("--json", "as_json", is_flag=True)
@_guarded
def verify(samples, as_json):
    """Run every invariant on the built-in corpus; exit 3 on any failure."""
    from verifier import verify_corpus

    if as_json:
        set_quiet(True)
    banner("HiddenShift — Invariant Suite")
    report = verify_corpus(samples_per_n=samples)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    if not report.passed:
        fail(f"{len(report.failed)} invariant(s) failed: {', '.join(c.name for c in report.failed)}")
        sys.exit(EXIT_INVARIANT)


# ── Fit ────────────────────────────────────────────────────────────────────

@cli.command()
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--boot", default=1000, show_default=True, help="Bootstrap resamples")
@click.option("--seed", default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@_guarded
def fit(report_path, boot, seed, as_json):
    """Scaling slope (with 95% CI) of median queries against n."""
    from harness import fit_scaling, read_report

    if as_json:
        set_quiet(True)
    results = fit_scaling(read_report(report_path), n_boot=boot, seed=seed)
    if as_json:
        click.echo(json.dumps([dataclasses.asdict(r) for r in results], indent=2))
        return

    section("Scaling fit")
    for r in results:
        axis = "log2(median queries)" if r.scale == "log2" else "median queries"
        emit(f"  {C.BOLD}{r.solver:<9}{C.RESET} {axis} vs n: slope {r.slope:.4f}  "
             f"95% CI [{r.ci_low:.4f}, {r.ci_high:.4f}]  "
             f"{C.GRAY}rms residual {r.residual_rms:.3g}, n = {list(r.ns)}{C.RESET}")


# ── History ────────────────────────────────────────────────────────────────

@cli.command()
def history():
    """Show past solves."""
    _show_history()


def _show_history():
    from harness import load_history

    runs = load_history()
    if not runs:
        emit(f"\n{C.YELLOW}No solve history found. Run `hiddenshift solve` first.{C.RESET}\n")
        return

    emit(f"\n{C.CYAN}{C.BOLD}HiddenShift — Solve History ({len(runs)} runs){C.RESET}\n")
    emit(f"{'─'*70}")
    for record in runs[:20]:
        ok = f"{C.GREEN}OK" if record.get("success") else f"{C.RED}FAIL"
        emit(f"  {C.BOLD}{record.get('family', '?')}{C.RESET} n={record.get('n', '?')}  "
             f"{record.get('solver', '?')}/{record.get('mode', '?')}  "
             f"[{ok}{C.RESET}]  shift {record.get('found_shift') or '-'}  "
             f"{C.GRAY}{record.get('run_id', '')}{C.RESET}")
        emit(f"  {C.GRAY}Queries: {record.get('queries', 0)}  "
             f"Runs: {record.get('subroutine_runs', 0)}  "
             f"Seed: {record.get('seed', 0)}  "
             f"| {record.get('completed', '')[:10]}{C.RESET}")
        emit(f"{'─'*70}")
    emit()


def main():
    cli(prog_name="hiddenshift")


if __name__ == "__main__":
    main()
