"""
HiddenShift — solvers
Quantum rank loop (plain, amplified, promise-with-cutoff) and the classical
collision baseline. Solvers reach f and g only through the instance oracles.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from boolfn import BhspInstance
from cli.config import MAX_CLASSICAL_N, PROMISE_CONSTANT
from errors import BudgetExceededError, CapacityError, ConfigError, PromiseViolationError
from gf2 import Gf2Basis, InsertResult
from qsim import SamplingSubroutine, rotation_count


class Mode(str, Enum):
    PLAIN = "plain"
    AMPLIFIED = "amplified"
    PROMISE = "promise"


@dataclass(frozen=True)
class SolveConfig:
    mode: Mode = Mode.PLAIN
    delta: float | None = None
    epsilon: float | None = None
    seed: int = 0
    max_queries: int = 1_000_000
    cutoff: int | None = None     # overrides the promise-mode formula
    path: str = "circuit"

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError:
            raise ConfigError(f"unknown mode '{self.mode}' (plain, amplified or promise)")
        if self.delta is not None and not 0.0 < self.delta <= 1.0:
            raise ConfigError(f"delta must be in (0, 1], got {self.delta}")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.mode is Mode.PROMISE and (self.delta is None or self.epsilon is None):
            raise ConfigError("promise mode needs both delta and epsilon")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError(f"cutoff must be at least one subroutine run, got {self.cutoff}")
        if self.max_queries < 1:
            raise ConfigError(f"max_queries must be positive, got {self.max_queries}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")


@dataclass
class RunReport:
    """
    One solve. For the classical baseline `subroutine_runs` counts query
    rounds (one f and one g call at the same point) and the rank fields stay
    empty.
    """
    solver: str
    mode: str
    n: int
    seed: int
    found_shift: int | None
    f_queries: int = 0
    g_queries: int = 0
    subroutine_runs: int = 0
    trials_per_rank_step: list[int] = field(default_factory=list)
    rank: int = 0
    cutoff: int | None = None
    wall_time: float = 0.0

    @property
    def queries(self) -> int:
        return self.f_queries + self.g_queries

    def to_dict(self) -> dict:
        record = asdict(self)
        record["queries"] = self.queries
        return record


# ── Quantum ─────────────────────────────────────────────────────────────────

def promise_cutoff(n: int, delta: float, epsilon: float, constant: float = PROMISE_CONSTANT) -> int:
    """ceil(C * n * ln(1/eps) / sqrt(delta)) subroutine runs."""
    return math.ceil(constant * n * math.log(1.0 / epsilon) / math.sqrt(delta))


def solve_quantum(instance: BhspInstance, config: SolveConfig) -> RunReport:
    """Sample, grow the span, solve once it is all of Z_2^n."""
    amplify = config.mode is not Mode.PLAIN
    cutoff = None
    if config.mode is Mode.PROMISE:
        cutoff = config.cutoff or promise_cutoff(instance.n, config.delta, config.epsilon)
    elif config.cutoff is not None:
        cutoff = config.cutoff
    return _rank_loop(instance, config, amplify, cutoff)


def solve_promise(instance: BhspInstance, config: SolveConfig) -> RunReport:
    """Amplified rank loop that gives up (found_shift None) after the cutoff."""
    if config.mode is not Mode.PROMISE:
        config = SolveConfig(Mode.PROMISE, config.delta, config.epsilon, config.seed,
                             config.max_queries, config.cutoff, config.path)
    return solve_quantum(instance, config)


def _rank_loop(instance: BhspInstance, config: SolveConfig, amplify: bool, cutoff: int | None) -> RunReport:
    started = time.perf_counter()
    n = instance.n
    rng = np.random.default_rng(config.seed)
    sampler = SamplingSubroutine(instance, path=config.path)
    basis = Gf2Basis(n)
    trials = [0] * n
    f0, g0 = instance.f_queries, instance.g_queries

    def report(found):
        return RunReport(
            solver="quantum", mode=config.mode.value, n=n, seed=config.seed,
            found_shift=found,
            f_queries=instance.f_queries - f0,
            g_queries=instance.g_queries - g0,
            subroutine_runs=sampler.runs,
            trials_per_rank_step=trials,
            rank=basis.rank,
            cutoff=cutoff,
            wall_time=time.perf_counter() - started,
        )

    def over_budget(used):
        return BudgetExceededError(used, config.max_queries, rank=basis.rank,
                                   runs=sampler.runs, trials_per_rank_step=trials)

    while basis.rank < n:
        if cutoff is not None and sampler.runs >= cutoff:
            return report(None)
        used = (instance.f_queries - f0) + (instance.g_queries - g0)
        rank = basis.rank

        if amplify:
            fresh = ~basis.span_mask()
            runs_needed = 2 * rotation_count(sampler.good_mass(fresh)) + 1
            # the cutoff is hard: never start a draw that would cross it
            if cutoff is not None and sampler.runs + runs_needed > cutoff:
                return report(None)
            if used + 2 * runs_needed > config.max_queries:
                raise over_budget(used)
            before = sampler.runs
            outcome, _ = sampler.run_amplified(fresh, rng)
            trials[rank] += sampler.runs - before
        else:
            if used + 2 > config.max_queries:
                raise over_budget(used)
            outcome = sampler.run(rng)
            trials[rank] += 1

        if basis.insert(outcome.u, outcome.b) is InsertResult.INCONSISTENT:
            raise PromiseViolationError(
                f"sample (b={outcome.b}, u={outcome.u}) contradicts earlier samples; "
                "g is not a shift of f")

    return report(basis.solve().bits)


# ── Classical ───────────────────────────────────────────────────────────────

def _packed_ones(size: int) -> np.ndarray:
    """One bit per index, little-endian within each byte, all set."""
    mask = np.full((size + 7) // 8, 0xFF, dtype=np.uint8)
    if size % 8:
        mask[-1] = (1 << (size % 8)) - 1
    return mask


def _bit(mask: np.ndarray, i: int) -> int:
    return (int(mask[i >> 3]) >> (i & 7)) & 1


def _clear_bits(mask: np.ndarray, idx: np.ndarray) -> int:
    """Clear every listed bit (indices distinct); returns how many were set."""
    byte = idx >> 3
    bit = np.left_shift(1, idx & 7).astype(np.uint8)
    alive = (mask[byte] & bit) != 0
    np.bitwise_and.at(mask, byte[alive], np.invert(bit[alive]))
    return int(np.count_nonzero(alive))


def _grown(log: np.ndarray, limit: int) -> np.ndarray:
    extra = min(log.size, limit - log.size)
    return np.concatenate([log, np.empty(extra, dtype=log.dtype)])


def solve_classical(instance: BhspInstance, seed: int, max_queries: int) -> RunReport:
    """
    Query (f(x), g(x)) at fresh uniform points and strike every shift s'
    contradicted by a pair x, x ^ s' already seen. Stops at one survivor.

    Candidates and visited points are packed bit sets over Z_2^n; the log of
    queried points grows with the number of queries, about 2^(n/2) of them.
    """
    n = instance.n
    if n > MAX_CLASSICAL_N:
        raise CapacityError(f"classical baseline keeps 2^n candidates; n={n} > {MAX_CLASSICAL_N}")
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    size = 1 << n

    candidates = _packed_ones(size)
    seen = np.zeros_like(candidates)
    left = size
    xs = np.empty(min(size, 64), dtype=np.int64)
    fx = np.empty(xs.size, dtype=np.uint8)
    gx = np.empty(xs.size, dtype=np.uint8)
    f0, g0 = instance.f_queries, instance.g_queries
    found = None
    k = 0

    while k < size:
        used = (instance.f_queries - f0) + (instance.g_queries - g0)
        if used + 2 > max_queries:
            raise BudgetExceededError(used, max_queries, candidates_left=left, runs=k)
        x = int(rng.integers(size))
        while _bit(seen, x):
            x = int(rng.integers(size))
        seen[x >> 3] |= np.uint8(1 << (x & 7))
        fv = instance.query_f(x)
        gv = instance.query_g(x)

        if _bit(candidates, 0) and fv != gv:
            candidates[0] &= np.uint8(0xFE)
            left -= 1
        if k:
            # candidate x ^ y must satisfy g(x) = f(y) and g(y) = f(x)
            bad = (fx[:k] != gv) | (gx[:k] != fv)
            left -= _clear_bits(candidates, xs[:k][bad] ^ x)
        if k == xs.size:
            xs, fx, gx = _grown(xs, size), _grown(fx, size), _grown(gx, size)
        xs[k], fx[k], gx[k] = x, fv, gv
        k += 1

        if left == 1:
            byte = int(np.flatnonzero(candidates)[0])
            found = 8 * byte + int(candidates[byte]).bit_length() - 1
            break

    if found is None:
        raise PromiseViolationError(f"{left} shifts remain consistent with the full tables; f has self-shifts")

    return RunReport(
        solver="classical", mode="baseline", n=n, seed=seed, found_shift=found,
        f_queries=instance.f_queries - f0, g_queries=instance.g_queries - g0,
        subroutine_runs=k, wall_time=time.perf_counter() - started,
    )


# ── Reference predictions ───────────────────────────────────────────────────

def _rank_step_masses(n: int, p_zero: float) -> list[float]:
    """P(u outside a rank-k span) when D_f^U is p_zero at u=0, uniform elsewhere."""
    size = 1 << n
    q = (1.0 - p_zero) / (size - 1)
    return [(size - (1 << k)) * q for k in range(n)]


def absorption_time(n: int, p_zero: float) -> float:
    """Exact expected subroutine runs of the plain loop for that distribution."""
    return sum(1.0 / p for p in _rank_step_masses(n, p_zero))


def amplified_absorption_cost(n: int, p_zero: float) -> int:
    """Total oracle calls of the amplified loop for that distribution (deterministic)."""
    return sum(2 * (2 * rotation_count(p) + 1) for p in _rank_step_masses(n, p_zero))


def bent_p_zero(n: int) -> float:
    return 2.0 ** -n


def delta_p_zero(n: int) -> float:
    return (1.0 - 2.0 ** (1 - n)) ** 2


def theorem_bound(n: int, gamma_min: float) -> float:
    """n / gamma_f: the plain loop's expected-runs ceiling."""
    return n / gamma_min
