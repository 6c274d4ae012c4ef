"""
HiddenShift — invariant suite
Runs every module invariant over a built-in corpus of Boolean functions
(exhaustive for n <= 3, seeded random samples above) and reports the worst
deviation seen per check.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from boolfn import (BhspInstance, Spectrum, TruthTable, fwht_inplace, indices,
                    influence_of, influence_profile, influence_spectral, is_bent, make_affine,
                    make_bent, make_delta, make_random, well_posed, wht)
from cli.streamer import check_line, emit, section
from errors import ArgumentError, PromiseViolationError
from gf2 import Gf2Basis, InsertResult, dot, parity
from harness import derive_seed, make_instance
from qsim import SamplingSubroutine, closed_form_state, direct_state, evolve, outcome_distribution, u_marginal
from solver import Mode, SolveConfig, solve_quantum

SPECTRAL_TOL = 1e-9
AMPLITUDE_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.__dict__ for c in self.checks],
        }


class _Tracker:
    """Worst deviation and first offending case for one check."""

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.worst = 0.0
        self.cases = 0
        self.first_failure = None

    def record(self, deviation: float, case: str):
        self.cases += 1
        deviation = float(deviation)
        if np.isnan(deviation):
            deviation = float("inf")
        self.worst = max(self.worst, deviation)
        if self.first_failure is None and not deviation <= self.tolerance:
            self.first_failure = case

    def result(self) -> Check:
        passed = self.first_failure is None
        detail = f"{self.cases} cases, max deviation {self.worst:.3g} (tol {self.tolerance:g})"
        if not passed:
            detail += f"; first failure: {self.first_failure}"
        return Check(self.name, passed, self.worst, self.tolerance, detail)


# ── Corpus ──────────────────────────────────────────────────────────────────

def exhaustive_tables(n: int) -> list[TruthTable]:
    """All 2^(2^n) functions on n bits."""
    size = 1 << n
    bits = np.arange(size)
    return [TruthTable.from_bits((code >> bits) & 1) for code in range(1 << size)]


def build_corpus(samples_per_n: int = 500, max_random_n: int = 10, seed: int = 0) -> list[TruthTable]:
    corpus = []
    for n in (1, 2, 3):
        corpus.extend(exhaustive_tables(n))
    for n in range(4, max_random_n + 1):
        corpus.extend(make_random(n, derive_seed(seed, n, k, "corpus")) for k in range(samples_per_n))
    return corpus


@functools.lru_cache(maxsize=16)
def _xor_matrix(n: int) -> np.ndarray:
    idx = indices(n)
    return idx[:, None] ^ idx[None, :]


@functools.lru_cache(maxsize=16)
def _parity_matrix(n: int) -> np.ndarray:
    """P[v, u] = <v, u> as float, for all-v spectral sums."""
    idx = indices(n)
    return parity(idx[:, None] & idx[None, :]).astype(np.float64)


def _pairwise_influences(t: TruthTable) -> np.ndarray:
    vals = t.values
    return np.count_nonzero(vals[None, :] != vals[_xor_matrix(t.n)], axis=1) / float(t.size)


def _spectral_influences(sp: Spectrum) -> np.ndarray:
    return _parity_matrix(sp.n) @ sp.squared()


def _sample(items: list, count: int, rng: np.random.Generator) -> list:
    if len(items) <= count:
        return items
    return [items[i] for i in sorted(rng.choice(len(items), size=count, replace=False))]


# ── Checks ──────────────────────────────────────────────────────────────────

def _check_spectra(corpus, transform) -> list[Check]:
    parseval = _Tracker("parseval", SPECTRAL_TOL)
    lattice = _Tracker("spectrum lattice", SPECTRAL_TOL)
    lemma = _Tracker("influence equivalence", SPECTRAL_TOL)
    profile = _Tracker("influence profile", SPECTRAL_TOL)
    involution = _Tracker("wht involution", 0.0)

    for t in corpus:
        sp = transform(t)
        case = repr(t)
        parseval.record(abs(float(np.dot(sp.coeffs, sp.coeffs)) - 1.0), case)
        scaled = sp.coeffs * (1 << (t.n - 1))
        lattice.record(float(np.max(np.abs(scaled - np.round(scaled)))), case)

        combinatorial = _pairwise_influences(t)
        spectral = _spectral_influences(sp)
        lemma.record(float(np.max(np.abs(combinatorial - spectral))), case)
        if t.n <= 4:
            # the pointwise entry points, every v
            for v in range(t.size):
                lemma.record(abs(influence_of(t, v) - influence_spectral(sp, v)), f"{case} v={v}")

        prof = influence_profile(t)
        dev = float(np.max(np.abs(prof.gamma - combinatorial)))
        dev = max(dev, abs(float(prof.gamma[0])))
        profile.record(dev, case)

        signs = t.signs(np.int64)
        twice = fwht_inplace(fwht_inplace(signs.copy())) >> t.n
        involution.record(float(np.max(np.abs(twice - signs))), case)

    return [parseval.result(), lattice.result(), lemma.result(), profile.result(), involution.result()]


def _check_families(transform, max_n: int) -> list[Check]:
    bent = _Tracker("bent flatness", AMPLITUDE_TOL)
    for n in range(2, max_n + 1, 2):
        for variant in range(4):
            t = make_bent(n, variant)
            flat = 2.0 ** (-n / 2)
            dev = float(np.max(np.abs(np.abs(transform(t).coeffs) - flat)))
            dev = max(dev, abs(influence_profile(t).gamma_min - 0.5))
            bent.record(dev, f"n={n} variant={variant}")
            if not is_bent(t):
                bent.record(float("inf"), f"is_bent false for n={n} variant={variant}")

    delta = _Tracker("delta influence", 0.0)
    rng = np.random.default_rng(11)
    for n in range(1, max_n + 1):
        x0 = int(rng.integers(0, 1 << n))
        gamma = influence_profile(make_delta(n, x0)).gamma
        delta.record(float(np.max(np.abs(gamma[1:] - 2.0 ** (1 - n)))), f"n={n} x0={x0}")

    posed = _Tracker("well-posedness", 0.0)
    for n in range(2, max_n + 1):
        a = int(rng.integers(1, 1 << n))
        posed.record(1.0 if well_posed(make_affine(n, a)) else 0.0, f"affine n={n} a={a} reported well-posed")
        posed.record(0.0 if well_posed(make_delta(n)) else 1.0, f"delta n={n} reported ill-posed")

    return [bent.result(), delta.result(), posed.result()]


def _check_shift_covariance(corpus, transform, rng) -> Check:
    tracker = _Tracker("shift covariance", SPECTRAL_TOL)
    for t in corpus:
        s = int(rng.integers(0, t.size))
        dev = np.max(np.abs(np.abs(transform(t).coeffs) - np.abs(transform(t.shifted(s)).coeffs)))
        tracker.record(float(dev), f"{t!r} s={s}")
    return tracker.result()


def _check_circuit(corpus, transform, rng, closed_form_random: int) -> list[Check]:
    closed = _Tracker("closed-form state", AMPLITUDE_TOL)
    norm = _Tracker("state norm", SPECTRAL_TOL)
    direct = _Tracker("direct path", AMPLITUDE_TOL)
    marginal = _Tracker("g-independence", AMPLITUDE_TOL)
    orth = _Tracker("orthogonality", 0.0)
    ledger = _Tracker("query accounting", 0.0)

    def run(t: TruthTable, s: int, check_direct: bool):
        inst = BhspInstance(t, s, allow_ill_posed=True)
        state = evolve(inst)
        case = f"{t!r} s={s}"
        ledger.record(abs(inst.f_queries - 1) + abs(inst.g_queries - 1), case)
        expected = closed_form_state(transform(t), s)
        closed.record(float(np.max(np.abs(state.amps - expected.amps))), case)
        norm.record(state.norm_error(), case)
        if check_direct:
            direct.record(float(np.max(np.abs(state.amps - direct_state(inst).amps))), case)
        probs = outcome_distribution(state)
        violating = parity(indices(t.n) & s) != np.arange(2)[:, None]
        orth.record(float(probs[violating].sum()), case)
        return probs

    small = [t for t in corpus if t.n <= 6]
    for t in _sample(small, 60, rng):
        for s in range(t.size):
            run(t, s, check_direct=True)
    larger = [t for t in corpus if 7 <= t.n <= 10]
    for t in _sample(larger, closed_form_random, rng):
        run(t, int(rng.integers(0, t.size)), check_direct=True)

    for t in _sample([t for t in corpus if t.n <= 8], 40, rng):
        reference = transform(t).squared()
        for s in range(t.size):
            inst = BhspInstance(t, s, allow_ill_posed=True)
            u = u_marginal(outcome_distribution(evolve(inst, charge=False)))
            marginal.record(float(np.max(np.abs(u - reference))), f"{t!r} s={s}")

    return [closed.result(), norm.result(), direct.result(), marginal.result(), orth.result(), ledger.result()]


def _check_sampled_orthogonality(corpus, rng, samples: int) -> Check:
    tracker = _Tracker("sampled orthogonality", 0.0)
    posed = [t for t in corpus if t.n >= 2 and well_posed(t)]
    picks = _sample(posed, 50, rng)
    per = max(1, samples // max(1, len(picks)))
    for t in picks:
        s = int(rng.integers(0, t.size))
        sampler = SamplingSubroutine(BhspInstance(t, s), path="direct")
        violations = 0
        for _ in range(per):
            out = sampler.run(rng)
            violations += out.b != dot(out.u.bits, s)
        tracker.record(float(violations), f"{t!r} s={s}")
    return tracker.result()


def _check_gf2(rng, trials: int) -> Check:
    tracker = _Tracker("gf2 solve", 0.0)
    for k in range(trials):
        n = int(rng.integers(1, 17))
        s = int(rng.integers(0, 1 << n))
        basis = Gf2Basis(n)
        equations = []
        while basis.rank < n:
            u = int(rng.integers(0, 1 << n))
            b = dot(u, s)
            equations.append((u, b))
            if basis.insert(u, b) is InsertResult.INCONSISTENT:
                tracker.record(1.0, f"inconsistent insert n={n} s={s:b}")
                break
        else:
            found = basis.solve().bits
            bad = sum(dot(u, found) != b for u, b in equations)
            tracker.record(float(bad + (found != s)), f"n={n} s={s:b} found={found:b}")
    return tracker.result()


def _check_solver(trials: int, seed: int) -> list[Check]:
    sound = _Tracker("solver soundness", 0.0)
    ledger = _Tracker("solver query ledger", 0.0)
    rng = np.random.default_rng(seed)
    for k in range(trials):
        n = int(rng.integers(1, 13))
        mode = Mode.AMPLIFIED if k % 4 == 3 else Mode.PLAIN
        inst = make_instance("random", n, derive_seed(seed, n, k, "soundness"))
        case = f"n={n} trial={k} mode={mode.value}"
        try:
            report = solve_quantum(inst, SolveConfig(mode, seed=derive_seed(seed, n, k, "solve")))
        except PromiseViolationError:
            sound.record(1.0, f"{case}: inconsistent sample")
            continue
        sound.record(0.0 if report.found_shift == inst.planted_shift else 1.0, case)
        gap = abs(report.f_queries - report.subroutine_runs) + abs(report.g_queries - report.subroutine_runs)
        gap += 0 if all(x >= 1 for x in report.trials_per_rank_step) else 1
        ledger.record(float(gap), case)
    return [sound.result(), ledger.result()]


# ── Entry point ─────────────────────────────────────────────────────────────

def verify_corpus(samples_per_n: int = 500,
                  max_random_n: int = 10,
                  seed: int = 0,
                  transform: Callable[[TruthTable], Spectrum] = wht,
                  closed_form_random: int = 100,
                  orthogonality_samples: int = 100_000,
                  gf2_trials: int = 500,
                  solver_trials: int = 2000) -> VerifyReport:
    """
    Run the full invariant suite. `transform` is the spectrum routine under
    test; swapping in a broken one must make the spectral checks fail.
    """
    if not 3 <= max_random_n <= 10:
        raise ArgumentError(f"max_random_n must be in [3, 10], got {max_random_n}")
    rng = np.random.default_rng(seed)
    corpus = build_corpus(samples_per_n, max_random_n, seed)
    report = VerifyReport()

    def add(checks):
        for check in checks:
            report.checks.append(check)
            check_line(check.name, check.passed, check.detail)

    section(f"Spectra ({len(corpus)} functions)")
    add(_check_spectra(corpus, transform))
    add(_check_families(transform, max_random_n))
    add([_check_shift_covariance(_sample(corpus, 2000, rng), transform, rng)])

    section("Sampling subroutine")
    add(_check_circuit(corpus, transform, rng, closed_form_random))
    add([_check_sampled_orthogonality(corpus, rng, orthogonality_samples)])

    section("GF(2) and solvers")
    add([_check_gf2(rng, gf2_trials)])
    add(_check_solver(solver_trials, seed))

    failed = len(report.failed)
    emit(f"\n  {len(report.checks) - failed}/{len(report.checks)} invariants hold")
    return report
