"""Degree reduction of pseudo-Boolean polynomials to quadratic form.

Five routes: pair substitution with a penalty gadget, negative-term
reduction (one auxiliary), positive-term reduction (d-2 auxiliaries),
deduction-based term rewrites, and excludable-local-configuration
cancellation. NTR and PTR are exact: minimizing the reduced polynomial
over its auxiliaries reproduces the original value at every original
assignment. The others preserve the ground state under their stated
preconditions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .pbf import Poly


@dataclass(frozen=True)
class AuxRecord:
    """Provenance of one auxiliary: the method that created it and the
    original-variable term it helps reduce."""

    var: int
    method: str
    term: tuple[int, ...]


@dataclass(frozen=True)
class AuxAllocation:
    original_n: int
    records: tuple[AuxRecord, ...]

    @property
    def aux_vars(self) -> tuple[int, ...]:
        return tuple(r.var for r in self.records)


@dataclass(frozen=True)
class ReductionResult:
    """qubo_poly has degree <= 2 once a reduction pass is complete; a
    single substitution step on degree >= 4 input may still be cubic."""

    qubo_poly: Poly
    alloc: AuxAllocation
    penalties_used: tuple[float, ...] = ()


def substitution_gadget(i: int, j: int, aux: int) -> Poly:
    """x_i x_j - 2(x_i + x_j)x_a + 3x_a: zero iff x_a = x_i x_j, else >= 1."""
    xi, xj, xa = Poly.variable(i), Poly.variable(j), Poly.variable(aux)
    return xi * xj - 2 * (xi + xj) * xa + 3 * xa


def default_gamma(p: Poly) -> float:
    # Dominates any energy change a broken constraint could buy.
    return 10.0 * sum(abs(c) for c in p.terms.values())


def reduce_by_substitution(
    p: Poly,
    pair: tuple[int, int],
    gamma: float | None = None,
    aux: int | None = None,
) -> ReductionResult:
    """Replace the pair inside every monomial of degree >= 3 by one
    auxiliary and add the penalty gadget times gamma.

    Quadratic and lower terms are untouched (the gadget itself supplies
    the x_i x_j coupling). A pair absent from all higher-order terms is
    a warned no-op.
    """
    if gamma is None:
        gamma = default_gamma(p)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    i, j = pair
    targets = [k for k in p.terms if len(k) >= 3 and i in k and j in k]
    if not targets:
        warnings.warn(f"pair ({i},{j}) not in any higher-order term; nothing reduced", stacklevel=2)
        vars_ = p.variables()
        alloc = AuxAllocation((max(vars_) + 1) if vars_ else 0, ())
        return ReductionResult(p, alloc, ())
    vars_ = p.variables()
    original_n = max(vars_) + 1
    if aux is None:
        aux = original_n
    terms = dict(p.terms)
    moved: dict[frozenset[int], float] = {}
    for k in targets:
        c = terms.pop(k)
        key = (k - {i, j}) | {aux}
        moved[key] = moved.get(key, 0.0) + c
    reduced = Poly(terms) + Poly(moved) + gamma * substitution_gadget(i, j, aux)
    alloc = AuxAllocation(original_n, (AuxRecord(aux, "substitution", (i, j)),))
    return ReductionResult(reduced, alloc, (gamma,))


def ntr_reduce(vars_: Iterable[int], coeff: float, aux: int) -> Poly:
    """Negative term c*prod(x) -> |c|*((d-1)x_a - sum_i x_i x_a).

    Exact: min over x_a is 0 unless every x_i = 1, where it is -|c|.
    """
    vs = sorted(set(vars_))
    d = len(vs)
    if coeff >= 0:
        raise ValueError("negative-term reduction requires a negative coefficient")
    if d < 3:
        raise ValueError(f"degree {d} term needs no reduction")
    mag = -coeff
    terms: dict[frozenset[int], float] = {frozenset((aux,)): mag * (d - 1)}
    for v in vs:
        terms[frozenset((v, aux))] = -mag
    return Poly(terms)


def ptr_reduce(vars_: Iterable[int], coeff: float, aux_ids: Sequence[int]) -> Poly:
    """Positive term c*prod(x) over d variables -> quadratic with d-2 auxiliaries.

    c * [ sum_{i=1}^{d-2} x_{a_i} (d-i-1 + x_i - sum_{j>i} x_j) + x_{d-1} x_d ]
    with variables in sorted order. Exact under min-over-aux.
    """
    vs = sorted(set(vars_))
    d = len(vs)
    if coeff <= 0:
        raise ValueError("positive-term reduction requires a positive coefficient")
    if d < 3:
        raise ValueError(f"degree {d} term needs no reduction")
    if len(aux_ids) != d - 2:
        raise ValueError(f"degree {d} needs exactly {d - 2} auxiliaries, got {len(aux_ids)}")
    out = Poly.zero()
    for idx in range(d - 2):
        a = Poly.variable(aux_ids[idx])
        inner = Poly.constant(float(d - idx - 2)) + Poly.variable(vs[idx])
        for j in range(idx + 1, d):
            inner = inner - Poly.variable(vs[j])
        out = out + a * inner
    out = out + Poly.variable(vs[-2]) * Poly.variable(vs[-1])
    return coeff * out


def deduction_reduce(p: Poly, pair: tuple[int, int], value: int) -> Poly:
    """Rewrite higher-order terms using a ground-state deduction x_i x_j = value.

    Term-by-term, degree >= 3 only, so no state can fall below the true
    ground energy:

    value 0: positive c*x_i*x_j*R -> c*x_i*x_j (the penalty form);
             negative terms drop entirely.
    value 1: positive c*x_i*x_j*R -> c*R;
             negative ones -> c*R + |c|(1 - x_i x_j).

    Ground states satisfy the deduction, so their energies are
    unchanged; every other state's energy can only rise.
    """
    if value not in (0, 1):
        raise ValueError("deduction value must be 0 or 1")
    i, j = pair
    out = Poly({k: c for k, c in p.terms.items() if not (len(k) >= 3 and i in k and j in k)})
    for k, c in p.terms.items():
        if len(k) < 3 or i not in k or j not in k:
            continue
        rest = k - {i, j}
        if value == 0:
            if c > 0:
                out = out + Poly({frozenset((i, j)): c})
            # negative terms contribute nothing on deduction-satisfying
            # states and only pull others down: drop
        else:
            out = out + Poly({rest: c})
            if c < 0:
                out = out + (-c) * (1 - Poly.variable(i) * Poly.variable(j))
    return out


def elc_reduce(p: Poly, elc: Mapping[int, int]) -> Poly:
    """Cancel the higher-order term on elc's variables by adding
    psi(x) = |zeta| * prod_i (a_i x_i + (1 - a_i)(1 - x_i)).

    elc maps each of the term's variables to the excluded assignment a.
    Cancellation of the top coefficient zeta requires the parity
    condition: for zeta < 0 the number of ones in a must match the
    assignment size mod 2; for zeta > 0 it must differ.
    """
    key = frozenset(elc)
    if len(key) < 3:
        raise ValueError("excluded configuration must cover a term of degree >= 3")
    zeta = p.terms.get(key, 0.0)
    if zeta == 0.0:
        raise ValueError("polynomial has no term on the excluded configuration's variables")
    ones = sum(1 for v in elc.values() if v == 1)
    same_parity = ones % 2 == len(elc) % 2
    if (zeta < 0) != same_parity:
        raise ValueError(
            f"parity condition violated: coefficient {zeta} with {ones} ones over {len(elc)} variables"
        )
    psi = Poly.constant(abs(zeta))
    for v in sorted(elc):
        xv = Poly.variable(v)
        psi = psi * (xv if elc[v] == 1 else (1 - xv))
    return p + psi


def quadratize_full(p: Poly, aux_start: int | None = None) -> ReductionResult:
    """Reduce every degree >= 3 term by sign: NTR when negative, PTR when
    positive. Auxiliaries are allocated in sorted term order starting at
    aux_start (default: one past the largest variable id)."""
    vars_ = p.variables()
    original_n = (max(vars_) + 1) if vars_ else 0
    next_aux = original_n if aux_start is None else aux_start
    out_terms = {k: c for k, c in p.terms.items() if len(k) <= 2}
    out = Poly(out_terms)
    records: list[AuxRecord] = []
    for k in sorted((k for k in p.terms if len(k) >= 3), key=lambda k: tuple(sorted(k))):
        c = p.terms[k]
        term = tuple(sorted(k))
        if c < 0:
            out = out + ntr_reduce(term, c, next_aux)
            records.append(AuxRecord(next_aux, "ntr", term))
            next_aux += 1
        else:
            aux_ids = tuple(range(next_aux, next_aux + len(term) - 2))
            out = out + ptr_reduce(term, c, aux_ids)
            records.extend(AuxRecord(a, "ptr", term) for a in aux_ids)
            next_aux += len(term) - 2
    return ReductionResult(out, AuxAllocation(original_n, tuple(records)))


def min_over_aux(reduced: Poly, aux_vars: Iterable[int], x: Mapping[int, int]) -> float:
    """Minimum of the reduced polynomial over its auxiliaries at a fixed
    original assignment.

    NTR/PTR auxiliaries never share a monomial, so the minimum splits
    per auxiliary: base value plus min(0, linear aux coefficient).
    Co-occurring auxiliaries are rejected.
    """
    aux_set = set(aux_vars)
    base = 0.0
    aux_coeff: dict[int, float] = {}
    for k, c in reduced.terms.items():
        hit = k & aux_set
        if not hit:
            term = c
            for v in k:
                term *= x[v]
            base += term
        elif len(hit) == 1:
            (a,) = hit
            term = c
            for v in k - hit:
                term *= x[v]
            aux_coeff[a] = aux_coeff.get(a, 0.0) + term
        else:
            raise ValueError(f"auxiliaries {sorted(hit)} share a monomial; minimum does not separate")
    return base + sum(min(0.0, w) for w in aux_coeff.values())
