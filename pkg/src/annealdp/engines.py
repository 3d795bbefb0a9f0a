"""Sampling engines over binary quadratic models.

Three interchangeable backends: an exact state-vector integrator of the
time-dependent transverse-field Hamiltonian (small n), a seeded
Metropolis annealer that honors the same schedule semantics (any n),
and a deterministic sequential-greedy idealization of grouped cyclic
anneals. Plus the device timing model used for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bqm import CapacityError, IsingModel, QuboModel, energy_of_bits
from .pbf import Poly
from .schedules import AnnealSchedule, GroupedSchedule

STATE_VECTOR_MAX_VARS = 16


class IntegrationError(Exception):
    """State-vector norm drifted beyond tolerance in one step."""


@dataclass(frozen=True)
class TimingReport:
    """Device-style wall time: one programming stage plus per-read anneal
    and readout. All times in microseconds."""

    reads: int
    t_anneal: float
    t_program: float = 9000.0
    t_readout: float = 120.0

    @property
    def total(self) -> float:
        return self.t_program + self.reads * (self.t_anneal + self.t_readout)


def timing_report(
    reads: int,
    t_anneal: float,
    t_program: float = 9000.0,
    t_readout: float = 120.0,
) -> TimingReport:
    if reads < 1:
        raise ValueError("reads must be >= 1")
    if t_anneal < 5.0:
        raise ValueError("anneal time below the 5 microsecond device minimum")
    return TimingReport(reads, t_anneal, t_program, t_readout)


@dataclass(frozen=True)
class SamplerRequest:
    model: IsingModel | QuboModel
    schedule: AnnealSchedule
    reads: int = 1
    initial_state: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        sched = self.schedule
        if isinstance(sched, GroupedSchedule):
            sched = sched.schedule
            object.__setattr__(self, "schedule", sched)
        if self.reads < 1:
            raise ValueError("reads must be >= 1")
        if self.initial_state is not None:
            object.__setattr__(self, "initial_state", tuple(self.initial_state))
            if len(self.initial_state) != self.model.n:
                raise ValueError(
                    f"initial_state length {len(self.initial_state)} != n={self.model.n}"
                )
            allowed = (0, 1) if isinstance(self.model, QuboModel) else (-1, 1)
            for v in self.initial_state:
                if v not in allowed:
                    raise ValueError(f"initial_state value {v!r} not in {allowed}")
        elif sched.needs_initial_state(self.model.n):
            raise ValueError("schedule starts above s=0: initial_state is required")


@dataclass(frozen=True)
class SampleRecord:
    state: tuple[int, ...]
    energy: float
    occurrences: int


@dataclass(frozen=True)
class SampleSet:
    records: tuple[SampleRecord, ...]
    timing: TimingReport
    norm_drift: float = 0.0

    def lowest(self) -> SampleRecord:
        return self.records[0]

    @property
    def total_reads(self) -> int:
        return sum(r.occurrences for r in self.records)

    def expand_states(self) -> list[tuple[int, ...]]:
        out: list[tuple[int, ...]] = []
        for r in self.records:
            out.extend([r.state] * r.occurrences)
        return out


def _assemble(
    model: IsingModel | QuboModel,
    states: Iterable[tuple[int, ...]],
    timing: TimingReport,
    norm_drift: float = 0.0,
) -> SampleSet:
    counts: dict[tuple[int, ...], int] = {}
    for s in states:
        counts[s] = counts.get(s, 0) + 1
    records = [
        SampleRecord(s, energy_of_bits(model, _to_bits(model, s)), c) for s, c in counts.items()
    ]
    records.sort(key=lambda r: (r.energy, -r.occurrences, r.state))
    return SampleSet(tuple(records), timing, norm_drift)


def _to_bits(model, state: Sequence[int]) -> list[int]:
    if isinstance(model, QuboModel):
        return list(state)
    return [(v + 1) // 2 for v in state]


def _from_bits(model, bits: Sequence[int]) -> tuple[int, ...]:
    if isinstance(model, QuboModel):
        return tuple(int(b) for b in bits)
    return tuple(2 * int(b) - 1 for b in bits)


def _schedule_timing(reads: int, total_time: float) -> TimingReport:
    # device floor: a read is never billed below the 5 microsecond minimum
    return TimingReport(reads, max(5.0, total_time))


def initial_hamiltonian_spectrum(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and ground vector of -sum_i sigma^x_i.

    The ground state is the uniform superposition with energy -n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 12:
        raise CapacityError(f"dense spectrum of {n} qubits exceeds the guard of 12")
    dim = 1 << n
    h = np.zeros((dim, dim))
    idx = np.arange(dim)
    for i in range(n):
        h[idx, idx ^ (1 << i)] -= 1.0
    evals, evecs = np.linalg.eigh(h)
    ground = evecs[:, 0]
    if ground[int(np.argmax(np.abs(ground)))] < 0:
        ground = -ground
    return evals, ground


def measure(amplitudes: np.ndarray, reads: int, rng: np.random.Generator) -> np.ndarray:
    """Sample basis-state indices from |amplitudes|^2."""
    probs = np.abs(amplitudes) ** 2
    probs = probs / probs.sum()
    return rng.choice(len(amplitudes), size=reads, p=probs)


def _model_terms(model):
    """(linear, quadratic) term dicts in the model's native domain."""
    if isinstance(model, QuboModel):
        lin = {i: w for (i, j), w in model.q.items() if i == j}
        quad = {(i, j): w for (i, j), w in model.q.items() if i != j}
    else:
        lin = dict(model.biases)
        quad = dict(model.couplings)
    return lin, quad


def _transverse_ground(model, convention: str) -> np.ndarray:
    n = model.n
    dim = 1 << n
    if convention == "standard":
        return np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
    # literal form: qubit i sees +h_i sigma^x; its ground is (1, -sign(h_i))/sqrt(2)
    lin, _ = _model_terms(model)
    psi = np.ones(1, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        h = lin.get(i, 0.0)
        comp = -1.0 if h > 0 else 1.0
        psi = np.concatenate([psi, comp * psi]) / math.sqrt(2.0)
    # concatenation above builds amplitudes so that bit i selects the
    # second half at tensor slot i (state index k, bit i = (k>>i)&1)
    return psi


def _check_statevector(model, convention: str) -> None:
    if model.n > STATE_VECTOR_MAX_VARS:
        raise CapacityError(
            f"state vector over {model.n} variables exceeds the guard of {STATE_VECTOR_MAX_VARS}")
    if convention not in ("standard", "literal"):
        raise ValueError(f"unknown convention {convention!r}")
    if convention == "literal" and not isinstance(model, IsingModel):
        raise ValueError("the literal convention is defined for Ising models")


def _integrate(model, sched: AnnealSchedule, psi: np.ndarray,
               steps: int | None, convention: str) -> tuple[np.ndarray, float]:
    """Strang-split evolution of one schedule pass; returns (psi, worst drift)."""
    n = model.n
    dim = 1 << n
    lin, quad = _model_terms(model)
    idx = np.arange(dim)
    if isinstance(model, QuboModel):
        vals = [((idx >> i) & 1).astype(np.float64) for i in range(n)]
    else:
        vals = [2.0 * ((idx >> i) & 1).astype(np.float64) - 1.0 for i in range(n)]
    lows = [np.flatnonzero((idx >> i) & 1 == 0) for i in range(n)]
    if steps is None:
        steps = max(256, int(32 * sched.total_time))

    def diagonal(s: np.ndarray) -> np.ndarray:
        d = np.zeros(dim)
        if convention == "standard":
            for i, w in lin.items():
                d += (w * s[i]) * vals[i]
        for (i, j), w in quad.items():
            d += (w * s[i] * s[j]) * (vals[i] * vals[j])
        return d

    worst_drift = 0.0
    dt = sched.total_time / steps
    for k in range(steps):
        tm = (k + 0.5) * dt
        s = np.array([sched.s_at(tm, v) for v in range(n)])
        phase = np.exp(-0.5j * dt * diagonal(s))
        psi = phase * psi
        for i in range(n):
            if convention == "standard":
                theta = (1.0 - s[i]) * dt
            else:
                theta = -(1.0 - s[i]) * lin.get(i, 0.0) * dt
            if theta == 0.0:
                continue
            lo = lows[i]
            hi = lo + (1 << i)
            a0 = psi[lo]
            a1 = psi[hi]
            c, sn = math.cos(theta), math.sin(theta)
            psi[lo] = c * a0 + 1j * sn * a1
            psi[hi] = 1j * sn * a0 + c * a1
        psi = phase * psi
        nrm = float(np.linalg.norm(psi))
        drift = abs(nrm - 1.0)
        if drift > 1e-6:
            raise IntegrationError(f"norm drifted by {drift:.2e} in one step")
        worst_drift = max(worst_drift, drift)
        psi = psi / nrm
    return psi, worst_drift


def _start_vector(req: SamplerRequest, convention: str) -> np.ndarray:
    model = req.model
    if req.initial_state is not None:
        bits = _to_bits(model, req.initial_state)
        k = sum(b << i for i, b in enumerate(bits))
        psi = np.zeros(1 << model.n, dtype=np.complex128)
        psi[k] = 1.0
        return psi
    return _transverse_ground(model, convention)


def schrodinger_anneal(
    req: SamplerRequest,
    steps: int | None = None,
    convention: str = "standard",
) -> SampleSet:
    """Integrate the annealing Hamiltonian and sample the final state.

    H(t) = sum_i (1 - s_i(t)) (-sigma^x_i) + [problem diagonal with bias
    terms scaled by s_i and coupling terms by s_i s_j]. The "literal"
    convention instead puts h_i on the transverse term and leaves only
    couplings on the diagonal (Ising models only). Integration is
    second-order operator splitting with the schedule evaluated at step
    midpoints; the norm is renormalized each step and a drift beyond
    1e-6 in any single step raises IntegrationError.
    """
    model = req.model
    n = model.n
    _check_statevector(model, convention)
    sched = req.schedule
    rng = np.random.default_rng(req.seed)

    timing = _schedule_timing(req.reads, sched.total_time)
    if sched.total_time == 0.0:
        outcomes = measure(_start_vector(req, convention), req.reads, rng)
        states = [_from_bits(model, [(int(k) >> i) & 1 for i in range(n)]) for k in outcomes]
        return _assemble(model, states, timing)

    if sched.reinitialize:
        psi, drift = _integrate(model, sched, _start_vector(req, convention), steps, convention)
        outcomes = measure(psi, req.reads, rng)
        states = [_from_bits(model, [(int(k) >> i) & 1 for i in range(n)]) for k in outcomes]
        return _assemble(model, states, timing, drift)

    # chained reads: each read collapses to its outcome and seeds the next
    states = []
    drift = 0.0
    psi = _start_vector(req, convention)
    for _ in range(req.reads):
        psi, d = _integrate(model, sched, psi, steps, convention)
        drift = max(drift, d)
        k = int(measure(psi, 1, rng)[0])
        states.append(_from_bits(model, [(k >> i) & 1 for i in range(n)]))
        psi = np.zeros(1 << n, dtype=np.complex128)
        psi[k] = 1.0
    return _assemble(model, states, timing, drift)


def final_probabilities(
    req: SamplerRequest,
    steps: int | None = None,
    convention: str = "standard",
) -> np.ndarray:
    """|amplitude|^2 over the 2^n basis states after one pass of the
    schedule, with no measurement noise. Diagnostic view of the same
    integrator schrodinger_anneal samples from; basis state k has bit i
    of k as variable i."""
    _check_statevector(req.model, convention)
    psi = _start_vector(req, convention)
    if req.schedule.total_time > 0.0:
        psi, _ = _integrate(req.model, req.schedule, psi, steps, convention)
    return np.abs(psi) ** 2


def _dense_form(model) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric off-diagonal matrix W and linear vector d, native domain."""
    n = model.n
    lin, quad = _model_terms(model)
    d = np.zeros(n)
    w = np.zeros((n, n))
    for i, c in lin.items():
        d[i] = c
    for (i, j), c in quad.items():
        w[i, j] += c
        w[j, i] += c
    return w, d


def default_hot_temperature(model) -> float:
    lin, quad = _model_terms(model)
    scale = max(
        max((abs(c) for c in lin.values()), default=0.0),
        max((abs(c) for c in quad.values()), default=0.0),
    )
    return scale if scale > 0 else 1.0


def heuristic_anneal(
    req: SamplerRequest,
    sweeps: int = 256,
    t_hot: float | None = None,
    random_init: bool = False,
) -> SampleSet:
    """Seeded heat-bath annealer driven by the schedule.

    A variable may flip only while its anneal fraction is below 1. The
    temperature is t_hot * (1 - min_i s_i(t)), so a deep reversal is hot
    and exploratory while the return to s=1 freezes the walk greedily.
    Glauber acceptance 1/(1 + e^(dE/tau)) rather than Metropolis: the
    zero-temperature limit then takes strict improvements always and
    zero-cost flips with probability 1/2, a diffusive greedy walk
    instead of a deterministic toggle on degenerate plateaus. With
    reinitialize, all reads run in lockstep from the same start (one rng
    column per read); otherwise each read continues from the previous
    read's terminal state.
    """
    model = req.model
    n = model.n
    sched = req.schedule
    reads = req.reads
    rng = np.random.default_rng(req.seed)
    if t_hot is None:
        t_hot = default_hot_temperature(model)
    is_qubo = isinstance(model, QuboModel)
    w, d = _dense_form(model)
    timing = _schedule_timing(reads, sched.total_time)

    def init_rows(count: int) -> np.ndarray:
        if random_init:
            bits = rng.integers(0, 2, size=(count, n)).astype(np.float64)
            return bits if is_qubo else 2.0 * bits - 1.0
        if req.initial_state is None:
            bits = rng.integers(0, 2, size=(count, n)).astype(np.float64)
            return bits if is_qubo else 2.0 * bits - 1.0
        row = np.array(req.initial_state, dtype=np.float64)
        return np.tile(row, (count, 1))

    def run(states: np.ndarray) -> np.ndarray:
        count = states.shape[0]
        if sched.total_time == 0.0 or n == 0:
            return states
        for k in range(sweeps):
            t = (k + 0.5) * sched.total_time / sweeps
            s_vec = [sched.s_at(t, v) for v in range(n)]
            tau = t_hot * (1.0 - min(s_vec))
            for v in range(n):
                if s_vec[v] >= 1.0:
                    continue
                f = states @ w[:, v] + d[v]
                if is_qubo:
                    delta = (1.0 - 2.0 * states[:, v]) * f
                else:
                    delta = -2.0 * states[:, v] * f
                u = rng.random(count)
                if tau > 0.0:
                    accept = u < 1.0 / (1.0 + np.exp(np.clip(delta / tau, -700.0, 700.0)))
                else:
                    accept = (delta < 0.0) | ((delta == 0.0) & (u < 0.5))
                if is_qubo:
                    states[accept, v] = 1.0 - states[accept, v]
                else:
                    states[accept, v] = -states[accept, v]
        return states

    if sched.reinitialize:
        terminal = run(init_rows(reads))
        out = [_native_row(model, terminal[r]) for r in range(reads)]
        return _assemble(model, out, timing)

    out = []
    cur = init_rows(1)
    for _ in range(reads):
        cur = run(cur)
        out.append(_native_row(model, cur[0]))
    return _assemble(model, out, timing)


def _native_row(model, row: np.ndarray) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in row)


def sequential_greedy(
    model: IsingModel | QuboModel | Poly,
    groups: Sequence[Iterable[int]],
    initial: Sequence[int],
    cycles: int = 1,
    activations: Sequence[int | None] | None = None,
) -> tuple[int, ...]:
    """Deterministic idealization of a grouped cyclic anneal.

    Per cycle, per group in order: set the group's variables to the
    joint assignment minimizing energy with everything else fixed, ties
    keeping the current assignment. When a group has an activation
    variable, the stage first clamps it on, minimizes the group given
    the clamp, then relaxes the activation to its own argmin (ties
    deactivate). Ungrouped variables never move.

    The model may also be a binary polynomial of any degree; the walk
    evaluates it directly, so cubic-and-up problems need no reduction.
    """
    is_poly = isinstance(model, Poly)
    if is_poly:
        n = len(initial)
        out = [v for v in model.variables() if not 0 <= v < n]
        if out:
            raise ValueError(f"initial does not cover polynomial variables {out}")
    else:
        n = model.n
    groups = [tuple(g) for g in groups]
    if activations is not None and len(activations) != len(groups):
        raise ValueError("activations must parallel groups")
    seen: set[int] = set()
    for g in groups:
        for v in g:
            if not 0 <= v < n:
                raise ValueError(f"variable {v} out of range")
            if v in seen:
                raise ValueError(f"variable {v} appears in more than one group")
            seen.add(v)
    for a in activations or ():
        if a is None:
            continue
        if not 0 <= a < n or a in seen:
            raise ValueError(f"activation variable {a} must be a distinct in-range variable")
    if len(initial) != n:
        raise ValueError(f"initial length {len(initial)} != n={n}")

    domain = (-1, 1) if isinstance(model, IsingModel) else (0, 1)
    state = [int(v) for v in initial]

    if is_poly:
        def energy() -> float:
            return model.evaluate(state)
    else:
        def energy() -> float:
            return energy_of_bits(model, _to_bits(model, state))

    for _ in range(cycles):
        for gi, group in enumerate(groups):
            act = activations[gi] if activations else None
            if act is not None:
                state[act] = domain[1]
            cur = tuple(state[v] for v in group)
            best, best_e = cur, energy()
            for m in range(1 << len(group)):
                cand = tuple(domain[(m >> b) & 1] for b in range(len(group)))
                if cand == cur:
                    continue
                for v, val in zip(group, cand):
                    state[v] = val
                e = energy()
                if e < best_e - 1e-12:
                    best, best_e = cand, e
            for v, val in zip(group, best):
                state[v] = val
            if act is not None:
                e_on = energy()
                state[act] = domain[0]
                e_off = energy()
                if e_on < e_off - 1e-12:
                    state[act] = domain[1]
    return tuple(state)
