"""
HiddenShift — sampling subroutine simulator
H^n -> O_f -> Z -> O_g -> H^n on n register qubits plus one ancilla, with
real amplitudes, measured jointly as (b, u).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from boolfn import BhspInstance, Spectrum, fwht_inplace, indices, wht
from cli.config import STATE_DUMP_MAX_N
from errors import AmplificationError, ArgumentError, SizeError
from gf2 import Gf2Vector, parity


@dataclass(frozen=True, eq=False)
class CircuitState:
    """amps[b * 2^n + u] is the amplitude of |b>|u> after the last Hadamard layer."""
    n: int
    amps: np.ndarray

    @property
    def table(self) -> np.ndarray:
        return self.amps.reshape(2, 1 << self.n)

    def norm_error(self) -> float:
        return abs(float(np.dot(self.amps, self.amps)) - 1.0)


@dataclass(frozen=True)
class SampleOutcome:
    b: int
    u: Gf2Vector


def evolve(instance: BhspInstance, charge: bool = True) -> CircuitState:
    """
    Gate-by-gate run of the sampling circuit. Each oracle layer is one query
    (pass charge=False to prepare a cached state without billing it).

    The Hadamard layers run unnormalized and their combined 2^-n factor is
    applied once at the end, so every amplitude is exact.
    """
    n = instance.n
    amps = np.zeros((2, 1 << n), dtype=np.float64)
    amps[0, 0] = 1.0

    _hadamard_register(amps)
    if charge:
        instance.apply_oracle_f(amps)
    else:
        f, _ = instance.simulation_tables()
        _flip(amps, f.values)
    amps[1] *= -1.0
    if charge:
        instance.apply_oracle_g(amps)
    else:
        _, g = instance.simulation_tables()
        _flip(amps, g.values)
    _hadamard_register(amps)
    amps /= float(1 << n)
    amps += 0.0   # clears negative zeros
    return CircuitState(n, amps.reshape(-1))


def _hadamard_register(amps: np.ndarray):
    for branch in amps:
        fwht_inplace(branch)


def _flip(amps: np.ndarray, values: np.ndarray):
    mask = values.astype(bool)
    amps[:, mask] = amps[::-1, mask]


def closed_form_state(spectrum: Spectrum, shift: int) -> CircuitState:
    """The analytic post-circuit state: ((1 ± chi_u(s)) / 2) * F^(u)."""
    chi = 1.0 - 2.0 * parity(indices(spectrum.n) & shift)
    amps = np.concatenate([(1.0 + chi) / 2.0 * spectrum.coeffs,
                           (1.0 - chi) / 2.0 * spectrum.coeffs]) + 0.0
    return CircuitState(spectrum.n, amps)


def direct_state(instance: BhspInstance) -> CircuitState:
    """Same state from the two spectra: ((F^ ± G^) / 2). O(n 2^n), no gate loop."""
    f, g = instance.simulation_tables()
    sf, sg = wht(f), wht(g)
    amps = np.concatenate([(sf.coeffs + sg.coeffs) / 2.0, (sf.coeffs - sg.coeffs) / 2.0])
    return CircuitState(instance.n, amps)


def outcome_distribution(state: CircuitState) -> np.ndarray:
    """Exact probabilities, shape (2, 2^n), indexed [b, u]."""
    return state.table ** 2


def u_marginal(probs: np.ndarray) -> np.ndarray:
    return probs.sum(axis=0)


def state_to_csv(state: CircuitState, stream):
    """Debug dump `b,u,amplitude`, small n only."""
    if state.n > STATE_DUMP_MAX_N:
        raise SizeError(f"state dumps are limited to n <= {STATE_DUMP_MAX_N}")
    stream.write("b,u,amplitude\n")
    table = state.table
    for b in (0, 1):
        for u, amp in enumerate(table[b]):
            stream.write(f"{b},{u:0{state.n}b},{float(amp)!r}\n")


def rotation_count(p: float) -> int:
    """
    Grover iterations for exact amplitude amplification at success mass p:
    k = max(0, ceil(pi / (4 asin sqrt p) - 1/2)), the rotation angle being
    shrunk slightly so k rounds land on the good subspace exactly.
    """
    if p <= 0.0:
        raise AmplificationError("good outcomes have zero probability; nothing to amplify")
    theta = math.asin(math.sqrt(min(p, 1.0)))
    return max(0, math.ceil(math.pi / (4.0 * theta) - 0.5 - 1e-12))


def amplified_cost(p: float) -> int:
    """Oracle calls for one amplified sample: 2 per circuit use, 2k+1 uses."""
    return 2 * (2 * rotation_count(p) + 1)


class _Sampler:
    """Inverse-CDF draws over a flattened (b, u) table."""

    def __init__(self, probs: np.ndarray):
        flat = probs.reshape(-1)
        self.cdf = np.cumsum(flat)
        self.total = float(self.cdf[-1])
        self.last = int(np.flatnonzero(flat)[-1])

    def draw(self, rng: np.random.Generator) -> int:
        idx = int(np.searchsorted(self.cdf, rng.random() * self.total, side="right"))
        return min(idx, self.last)


def _outcome(n: int, index: int) -> SampleOutcome:
    return SampleOutcome(index >> n, Gf2Vector(n, index & ((1 << n) - 1)))


def sample(state: CircuitState, rng: np.random.Generator) -> SampleOutcome:
    return _outcome(state.n, _Sampler(outcome_distribution(state)).draw(rng))


def _good_mask(n: int, good: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    mask = np.asarray(good(indices(n)), dtype=bool)
    if mask.shape != (1 << n,):
        raise ArgumentError("good predicate must return one flag per u")
    return mask


def sample_amplified(state: CircuitState, good: Callable[[np.ndarray], np.ndarray],
                     rng: np.random.Generator) -> tuple[SampleOutcome, int]:
    """
    Outcome conditioned on good(u), plus its oracle cost 2(2k+1). `good` is
    vectorized: it maps an array of u indices to an array of flags.
    """
    probs = outcome_distribution(state)
    mask = _good_mask(state.n, good)
    p = float(u_marginal(probs)[mask].sum())
    cost = amplified_cost(p)
    restricted = probs * mask[np.newaxis, :]
    return _outcome(state.n, _Sampler(restricted).draw(rng)), cost


class SamplingSubroutine:
    """
    Repeated runs of the sampling circuit on one instance. The state is
    simulated once (path "circuit" = gate by gate, "direct" = from the two
    spectra); every run bills one f-query and one g-query.
    """

    PATHS = ("circuit", "direct")

    def __init__(self, instance: BhspInstance, path: str = "circuit"):
        if path not in self.PATHS:
            raise ArgumentError(f"unknown sampler path '{path}' (expected one of {self.PATHS})")
        self.instance = instance
        self.path = path
        self.runs = 0
        self._state = None
        self._sampler = None

    @property
    def state(self) -> CircuitState:
        if self._state is None:
            if self.path == "circuit":
                self._state = evolve(self.instance, charge=False)
            else:
                self._state = direct_state(self.instance)
        return self._state

    @property
    def probabilities(self) -> np.ndarray:
        return outcome_distribution(self.state)

    def run(self, rng: np.random.Generator) -> SampleOutcome:
        if self._sampler is None:
            self._sampler = _Sampler(self.probabilities)
        self.instance.charge_runs(1)
        self.runs += 1
        return _outcome(self.instance.n, self._sampler.draw(rng))

    def good_mass(self, mask: np.ndarray) -> float:
        return float(u_marginal(self.probabilities)[mask].sum())

    def run_amplified(self, mask: np.ndarray, rng: np.random.Generator) -> tuple[SampleOutcome, int]:
        """Amplified draw restricted to u with mask[u]; bills 2k+1 runs."""
        outcome, cost = sample_amplified(self.state, lambda u: mask[u], rng)
        runs = cost // 2
        self.instance.charge_runs(runs)
        self.runs += runs
        return outcome, cost
