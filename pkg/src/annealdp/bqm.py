"""Binary quadratic models: Ising and QUBO containers plus exact tooling.

Both model classes store sparse coefficient dicts keyed by canonical
index pairs. Energies are plain Python sums so that vectorised code
paths can reproduce them bit-for-bit by accumulating terms in the same
order (dict insertion order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

SpinState = Sequence[int]
BinaryState = Sequence[int]

BRUTE_FORCE_MAX_VARS = 26
_BLOCK_BITS = 20


class CapacityError(Exception):
    """Raised when a problem exceeds an exhaustive-enumeration guard."""


class ParseError(ValueError):
    """Malformed model or polynomial text. Carries a 1-based line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _canonical_pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


@dataclass
class IsingModel:
    """Ising Hamiltonian H(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j.

    Parameters
    ----------
    n : int
        Number of spin variables, indexed 0..n-1.
    biases : mapping int -> float
        Linear fields h_i. Missing entries are zero.
    couplings : mapping (int, int) -> float
        Pairwise couplings J_ij. Keys are canonicalised to i < j on
        construction; duplicate keys accumulate.
    """

    n: int
    biases: dict[int, float] = field(default_factory=dict)
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        biases: dict[int, float] = {}
        for i, h in self.biases.items():
            self._check_index(i)
            biases[i] = biases.get(i, 0.0) + float(h)
        couplings: dict[tuple[int, int], float] = {}
        for (i, j), w in self.couplings.items():
            self._check_index(i)
            self._check_index(j)
            if i == j:
                raise ValueError(f"self-coupling ({i},{i}) is not a valid Ising term")
            key = _canonical_pair(i, j)
            couplings[key] = couplings.get(key, 0.0) + float(w)
        self.biases = biases
        self.couplings = couplings

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise ValueError(f"variable index {i} out of range for n={self.n}")


@dataclass
class QuboModel:
    """QUBO objective H(x) = sum_i Q_ii x_i + sum_{j<i} Q_ij x_i x_j over bits.

    Stored as an upper-triangular sparse dict: keys are (i, j) with
    i <= j, diagonal entries are the linear coefficients. Duplicate and
    transposed keys accumulate into the canonical entry.
    """

    n: int
    q: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        q: dict[tuple[int, int], float] = {}
        for (i, j), w in self.q.items():
            if not 0 <= i < self.n or not 0 <= j < self.n:
                raise ValueError(f"variable index ({i},{j}) out of range for n={self.n}")
            key = _canonical_pair(i, j)
            q[key] = q.get(key, 0.0) + float(w)
        self.q = q


@dataclass(frozen=True)
class ProblemGraph:
    """Interaction graph: one vertex per variable, one edge per nonzero coupling."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)


@dataclass(frozen=True)
class SpectrumResult:
    """Outcome of exhaustive enumeration.

    argmin_states are in the model's native domain (spins for Ising,
    bits for QUBO), ordered by state index. spectrum, when kept, lists
    (state, energy) for every state in index order.
    """

    min_energy: float
    argmin_states: tuple[tuple[int, ...], ...]
    spectrum: tuple[tuple[tuple[int, ...], float], ...] | None = None


def ising_energy(model: IsingModel, s: SpinState) -> float:
    """Energy of a spin assignment; entries must be exactly -1 or +1."""
    if len(s) != model.n:
        raise ValueError(f"state length {len(s)} != n={model.n}")
    for v in s:
        if v not in (-1, 1):
            raise ValueError(f"spin values must be -1 or +1, got {v!r}")
    e = 0.0
    for i, h in model.biases.items():
        e += h * s[i]
    for (i, j), w in model.couplings.items():
        e += w * s[i] * s[j]
    return e


def qubo_energy(model: QuboModel, x: BinaryState) -> float:
    """Energy of a bit assignment; entries must be exactly 0 or 1."""
    if len(x) != model.n:
        raise ValueError(f"state length {len(x)} != n={model.n}")
    for v in x:
        if v not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {v!r}")
    e = 0.0
    for (i, j), w in model.q.items():
        if i == j:
            e += w * x[i]
        else:
            e += w * x[i] * x[j]
    return e


def ising_to_qubo(model: IsingModel) -> tuple[QuboModel, float]:
    """Map spins to bits via s = 2x - 1.

    h_i s_i       -> 2 h_i x_i - h_i
    J_ij s_i s_j  -> 4 J_ij x_i x_j - 2 J_ij x_i - 2 J_ij x_j + J_ij
    Returns the QUBO and the constant offset so that
    ising_energy(s) == qubo_energy(x) + offset for s = 2x - 1.
    """
    q: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add(i: int, j: int, w: float) -> None:
        key = _canonical_pair(i, j)
        q[key] = q.get(key, 0.0) + w

    for i, h in model.biases.items():
        add(i, i, 2.0 * h)
        offset -= h
    for (i, j), w in model.couplings.items():
        add(i, j, 4.0 * w)
        add(i, i, -2.0 * w)
        add(j, j, -2.0 * w)
        offset += w
    return QuboModel(model.n, q), offset


def qubo_to_ising(model: QuboModel) -> tuple[IsingModel, float]:
    """Map bits to spins via x = (s + 1) / 2; inverse of ising_to_qubo."""
    biases: dict[int, float] = {}
    couplings: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add_bias(i: int, h: float) -> None:
        biases[i] = biases.get(i, 0.0) + h

    for (i, j), w in model.q.items():
        if i == j:
            add_bias(i, w / 2.0)
            offset += w / 2.0
        else:
            key = _canonical_pair(i, j)
            couplings[key] = couplings.get(key, 0.0) + w / 4.0
            add_bias(i, w / 4.0)
            add_bias(j, w / 4.0)
            offset += w / 4.0
    return IsingModel(model.n, biases, couplings), offset


def energy_of_bits(model: IsingModel | QuboModel, bits: BinaryState) -> float:
    """Model energy of a bit assignment (spins s = 2b - 1 for Ising models)."""
    if isinstance(model, QuboModel):
        return qubo_energy(model, bits)
    return ising_energy(model, [2 * b - 1 for b in bits])


def block_energies(model: IsingModel | QuboModel, start: int, stop: int) -> np.ndarray:
    """Energies of the bit states with indices [start, stop).

    State index k encodes bit i as (k >> i) & 1. Terms are evaluated in
    the model's native domain and accumulate in dict order; each term
    is a product with a value in {-1, 0, 1}, so every partial sum is
    identical to the scalar path and entries agree bit-for-bit with
    energy_of_bits.
    """
    idx = np.arange(start, stop, dtype=np.uint64)
    energies = np.zeros(idx.shape, dtype=np.float64)
    vals: dict[int, np.ndarray] = {}
    spin = isinstance(model, IsingModel)

    def var(i: int) -> np.ndarray:
        if i not in vals:
            b = ((idx >> np.uint64(i)) & np.uint64(1)).astype(np.float64)
            vals[i] = 2.0 * b - 1.0 if spin else b
        return vals[i]

    if spin:
        for i, h in model.biases.items():
            energies += h * var(i)
        for (i, j), w in model.couplings.items():
            energies += w * (var(i) * var(j))
    else:
        for (i, j), w in model.q.items():
            if i == j:
                energies += w * var(i)
            else:
                energies += w * (var(i) * var(j))
    return energies


def brute_force(
    model: IsingModel | QuboModel,
    keep_spectrum: bool = False,
    max_vars: int = BRUTE_FORCE_MAX_VARS,
) -> SpectrumResult:
    """Exhaustively enumerate all 2^n states.

    Enumeration runs in fixed-size index blocks with vectorised energy
    evaluation; results are independent of the partitioning. States are
    reported in the model's native domain. All states attaining the
    exact minimum are returned, ordered by state index.
    """
    n = model.n
    if n > max_vars:
        raise CapacityError(f"brute force over {n} variables exceeds the guard of {max_vars}")
    total = 1 << n
    block = 1 << min(n, _BLOCK_BITS)
    min_energy = np.inf
    argmin_idx: list[int] = []
    spectrum_energies: list[np.ndarray] = []
    for start in range(0, total, block):
        stop = min(start + block, total)
        energies = block_energies(model, start, stop)
        if keep_spectrum:
            spectrum_energies.append(energies)
        bmin = float(energies.min())
        if bmin < min_energy:
            min_energy = bmin
            argmin_idx = []
        if bmin == min_energy:
            argmin_idx.extend(int(start + k) for k in np.flatnonzero(energies == min_energy))

    def to_state(k: int) -> tuple[int, ...]:
        bits = tuple((k >> i) & 1 for i in range(n))
        if isinstance(model, IsingModel):
            return tuple(2 * b - 1 for b in bits)
        return bits

    spectrum = None
    if keep_spectrum:
        flat = np.concatenate(spectrum_energies) if spectrum_energies else np.zeros(0)
        spectrum = tuple((to_state(k), float(flat[k])) for k in range(total))
    return SpectrumResult(
        min_energy=float(min_energy),
        argmin_states=tuple(to_state(k) for k in argmin_idx),
        spectrum=spectrum,
    )


def graph_of(model: IsingModel | QuboModel) -> ProblemGraph:
    """Interaction graph: vertices 0..n-1, edges where a pairwise term is nonzero."""
    if isinstance(model, QuboModel):
        pairs = ((i, j) for (i, j), w in model.q.items() if i != j and w != 0.0)
    else:
        pairs = ((i, j) for (i, j), w in model.couplings.items() if w != 0.0)
    return ProblemGraph(tuple(range(model.n)), tuple(sorted(set(pairs))))


def write_model(model: IsingModel | QuboModel, path: str) -> None:
    """Serialise to the shared text format.

    Header `qubo n=<N>` or `ising n=<N>`, then one `i j coefficient`
    line per stored term (i == j for linear terms), `#` for comments.
    """
    lines = []
    if isinstance(model, QuboModel):
        lines.append(f"qubo n={model.n}")
        for (i, j), w in sorted(model.q.items()):
            lines.append(f"{i} {j} {w!r}")
    else:
        lines.append(f"ising n={model.n}")
        for i, h in sorted(model.biases.items()):
            lines.append(f"{i} {i} {h!r}")
        for (i, j), w in sorted(model.couplings.items()):
            lines.append(f"{i} {j} {w!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_model(path: str) -> IsingModel | QuboModel:
    """Parse the text format written by write_model. Raises ParseError."""
    with open(path) as fh:
        raw = fh.readlines()
    header: tuple[str, int] | None = None
    entries: list[tuple[int, int, float]] = []
    for lineno, line in enumerate(raw, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if header is None:
            parts = text.split()
            if len(parts) != 2 or parts[0] not in ("qubo", "ising") or not parts[1].startswith("n="):
                raise ParseError(f"expected 'qubo n=<N>' or 'ising n=<N>', got {text!r}", lineno)
            try:
                header = (parts[0], int(parts[1][2:]))
            except ValueError:
                raise ParseError(f"bad variable count in {text!r}", lineno) from None
            continue
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'i j coefficient', got {text!r}", lineno)
        try:
            entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise ParseError(f"bad term {text!r}", lineno) from None
    if header is None:
        raise ParseError("empty model file", len(raw) or 1)
    kind, n = header
    try:
        if kind == "qubo":
            return QuboModel(n, {(i, j): w for i, j, w in entries})
        biases = {i: w for i, j, w in entries if i == j}
        couplings = {(i, j): w for i, j, w in entries if i != j}
        return IsingModel(n, biases, couplings)
    except ValueError as exc:
        raise ParseError(str(exc), 1) from None


def random_ising(n: int, rng: np.random.Generator, density: float = 0.5) -> IsingModel:
    """Random dense-ish test instance with coefficients in [-1, 1]."""
    biases = {i: float(rng.uniform(-1, 1)) for i in range(n)}
    couplings = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                couplings[(i, j)] = float(rng.uniform(-1, 1))
    return IsingModel(n, biases, couplings)
