"""Command-line front end for the solver pipeline.

Subcommands:
  solve       run one of the five policy-iteration algorithms
  quadratize  reduce a polynomial file to quadratic, with provenance
  appendix-b  the two didactic activation models under cyclic schedules
  simulate    consumption path of an estimated policy vs the closed form
  bench       timing accounting and engine micro-benchmarks

Configuration merges three layers with increasing precedence: built-in
defaults, a key=value config file (--config), and explicit flags. Every
artifact a run writes is a pure function of the resolved config, so
reruns produce byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .bqm import (
    CapacityError,
    ParseError,
    QuboModel,
    brute_force,
    qubo_energy,
    random_ising,
)
from .engines import (
    SamplerRequest,
    heuristic_anneal,
    schrodinger_anneal,
    sequential_greedy,
    timing_report,
)
from .merged import (
    CYCLE_BASE_US,
    build_merged_problem,
    default_merged_encodings,
    greedy_merged_sampler,
    heuristic_merged_sampler,
    merged_schedule,
    multi_anneal_ppi,
    one_shot_ppi,
)
from .pbf import BinaryEncoding, Poly, read_poly, to_qubo, write_poly
from .quadratize import min_over_aux, quadratize_full
from .rbc import (
    DEFAULT_INIT,
    DEFAULT_PARAMS,
    PpiState,
    classical_ppi,
    collocation_grid,
    combinatorial_ppi,
    hybrid_ppi,
    make_heuristic_sampler,
    oracle_sampler,
    simulate_consumption,
    true_parameters,
    write_consumption_csv,
    write_iteration_csv,
)
from .schedules import forward_schedule, grouped_cycle_schedule
from .svgplot import Series, line_chart

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3
EXIT_CAPACITY = 4

ALGORITHMS = ("classical", "combinatorial", "hybrid", "multi-anneal", "one-shot")
ENGINES = ("greedy", "heuristic", "statevector")

# brute-force verification of a reduction enumerates original
# assignments; past this width the check stops being interactive
VERIFY_MAX_VARS = 12


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Resolved run settings; unknown keys are rejected at parse time."""

    algorithm: str = "combinatorial"
    engine: str = "heuristic"
    j1: int = 6
    j2: int | None = None
    j3: int | None = None
    s2: float | None = None
    s3: float | None = None
    reads: int | None = None
    cycles: int | None = None
    iterations: int | None = None
    executions: int = 1
    reversal: float = 0.0
    seed: int = 0
    keep_fraction: float = 0.1
    k_count: int = 133
    sweeps: int = 256
    anneal_time: float | None = None
    bias: float = 0.0
    init_true: bool = False
    out_dir: str = "runs"

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"algorithm must be one of {', '.join(ALGORITHMS)}")
        if self.engine not in ENGINES:
            raise UsageError(f"engine must be one of {', '.join(ENGINES)}")
        for name in ("j1", "j2", "j3"):
            v = getattr(self, name)
            if v is not None and not 1 <= v <= 20:
                raise UsageError(f"{name} must lie in [1, 20]")
        for name in ("reads", "cycles", "iterations", "executions", "sweeps"):
            v = getattr(self, name)
            if v is not None and v < (0 if name == "iterations" else 1):
                raise UsageError(f"{name} must be positive")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise UsageError("keep_fraction must lie in (0, 1]")
        if not 0.0 <= self.reversal < 1.0:
            raise UsageError("reversal must lie in [0, 1)")
        if self.k_count < 2:
            raise UsageError("k_count must be >= 2")
        if self.anneal_time is not None and self.anneal_time < 5.0:
            raise UsageError("anneal_time must be >= 5 microseconds")
        if self.bias < 0.0:
            raise UsageError("bias must be nonnegative")


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_INT_KEYS = {"j1", "j2", "j3", "reads", "cycles", "iterations", "executions", "seed",
             "k_count", "sweeps"}
_FLOAT_KEYS = {"s2", "s3", "reversal", "keep_fraction", "anneal_time", "bias"}
_BOOL_KEYS = {"init_true"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise UsageError(f"config value for '{key}' not parseable: {raw!r}") from None
    return raw


def read_config_file(path: str) -> dict:
    """key=value lines; # comments; unknown keys rejected."""
    values: dict = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise UsageError(f"{path}:{lineno}: unknown config key '{key}'")
        values[key] = _coerce(key, raw)
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in _CONFIG_FIELDS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    cfg = RunConfig(**merged)
    cfg.validate()
    return cfg


def write_config_artifact(path: str, cfg: RunConfig) -> None:
    with open(path, "w") as fh:
        for f in sorted(_CONFIG_FIELDS):
            v = getattr(cfg, f)
            if v is not None:
                fh.write(f"{f} = {v}\n")


# ---------------------------------------------------------------------------
# solve

def _resolved_iterations(cfg: RunConfig) -> int:
    if cfg.iterations is not None:
        return cfg.iterations
    return 0 if cfg.init_true else 2


def _resolved_reads(cfg: RunConfig) -> int:
    if cfg.reads is not None:
        return cfg.reads
    return {"hybrid": 100, "multi-anneal": 50, "one-shot": 200}.get(cfg.algorithm, 100)


def _resolved_cycles(cfg: RunConfig) -> int:
    if cfg.cycles is not None:
        return cfg.cycles
    return 3 if cfg.algorithm == "one-shot" else 1

def _valuation_encodings(cfg: RunConfig) -> tuple[BinaryEncoding, BinaryEncoding]:
    """Wide-register pair for the classical and hybrid paths.

    At the reference width of 9 bits the scales default to the fixed
    pair (-0.035, 0.003); at any other width they default to spanning
    [0, 2x*] like the merged problem does.
    """
    j2 = cfg.j2 if cfg.j2 is not None else 9
    j3 = cfg.j3 if cfg.j3 is not None else 9
    _, x2s, x3s = true_parameters(DEFAULT_PARAMS)
    s2 = cfg.s2 if cfg.s2 is not None else (-0.035 if j2 == 9 else 2 * x2s / ((1 << (j2 + 1)) - 1))
    s3 = cfg.s3 if cfg.s3 is not None else (0.003 if j3 == 9 else 2 * x3s / ((1 << (j3 + 1)) - 1))
    return BinaryEncoding(0, j2 + 1, s2), BinaryEncoding(j2 + 1, j3 + 1, s3)


def _merged_encodings(cfg: RunConfig):
    j2 = cfg.j2 if cfg.j2 is not None else 6
    j3 = cfg.j3 if cfg.j3 is not None else 6
    enc1, enc2, enc3 = default_merged_encodings(DEFAULT_PARAMS, cfg.j1, j2, j3)
    if cfg.s2 is not None:
        enc2 = BinaryEncoding(enc2.var_base, enc2.bit_count, cfg.s2)
    if cfg.s3 is not None:
        enc3 = BinaryEncoding(enc3.var_base, enc3.bit_count, cfg.s3)
    return enc1, enc2, enc3


def _noop_state() -> PpiState:
    return PpiState(*true_parameters(DEFAULT_PARAMS), iteration=0)


def _run_one(cfg: RunConfig, seed: int) -> tuple[PpiState, list[PpiState]]:
    """One execution of the configured algorithm."""
    grid = collocation_grid(DEFAULT_PARAMS, cfg.k_count)
    init = true_parameters(DEFAULT_PARAMS) if cfg.init_true else DEFAULT_INIT
    history: list[PpiState] = []
    alg = cfg.algorithm

    if alg in ("classical", "combinatorial", "hybrid"):
        iters = _resolved_iterations(cfg)
        if iters == 0:
            if not cfg.init_true:
                raise UsageError("iterations = 0 is only meaningful with init_true")
            return _noop_state(), []
        if alg == "classical":
            state = classical_ppi(DEFAULT_PARAMS, grid=grid, init=init,
                                  fixed_iterations=iters, history=history)
        elif alg == "combinatorial":
            state = combinatorial_ppi(DEFAULT_PARAMS, grid=grid, init=init,
                                      encodings=_valuation_encodings(cfg),
                                      fixed_iterations=iters, history=history)
        else:
            sampler = _hybrid_sampler(cfg)
            state = hybrid_ppi(DEFAULT_PARAMS, sampler=sampler, grid=grid,
                               encodings=_valuation_encodings(cfg), init=init,
                               iterations=iters, reads=_resolved_reads(cfg),
                               keep_fraction=cfg.keep_fraction, seed=seed,
                               history=history)
        return state, history

    if cfg.engine == "statevector":
        raise UsageError("statevector engine cannot hold the merged problem; "
                         "use greedy or heuristic")
    problem = build_merged_problem(DEFAULT_PARAMS, encodings=_merged_encodings(cfg),
                                   grid=grid, bias=cfg.bias)
    sampler = greedy_merged_sampler if cfg.engine == "greedy" else \
        heuristic_merged_sampler(sweeps=cfg.sweeps, random_init=(alg == "one-shot"))
    cycles = _resolved_cycles(cfg)
    if alg == "multi-anneal":
        schedule = merged_schedule(problem, cycles=cycles, total_time=cfg.anneal_time,
                                   reinitialize=False, reversal_target=cfg.reversal)
        state = multi_anneal_ppi(problem, sampler=sampler, schedule=schedule,
                                 reads=_resolved_reads(cfg), init=init, seed=seed)
    else:
        schedule = merged_schedule(problem, cycles=cycles, total_time=cfg.anneal_time,
                                   reinitialize=True, reversal_target=cfg.reversal)
        state = one_shot_ppi(problem, sampler=sampler, schedule=schedule,
                             reads=_resolved_reads(cfg), cycles=cycles,
                             keep_fraction=cfg.keep_fraction, seed=seed)
    return state, [state]


def _hybrid_sampler(cfg: RunConfig):
    if cfg.engine == "greedy":
        return oracle_sampler
    if cfg.engine == "heuristic":
        sched = forward_schedule(cfg.anneal_time if cfg.anneal_time is not None else 20.0)
        return make_heuristic_sampler(schedule=sched, sweeps=cfg.sweeps)
    sched = forward_schedule(cfg.anneal_time if cfg.anneal_time is not None else 40.0)

    def sample(model, reads, seed):
        return schrodinger_anneal(SamplerRequest(model, sched, reads=reads, seed=seed))

    return sample


def _per_anneal_time(cfg: RunConfig) -> float | None:
    if cfg.algorithm == "hybrid":
        return cfg.anneal_time if cfg.anneal_time is not None else 20.0
    if cfg.algorithm in ("multi-anneal", "one-shot"):
        if cfg.anneal_time is not None:
            return cfg.anneal_time
        return CYCLE_BASE_US * (2 * _resolved_cycles(cfg) - 1)
    return None


def _pct_errors(state: PpiState) -> tuple[float, float, float]:
    truth = true_parameters(DEFAULT_PARAMS)
    return tuple(100.0 * abs(v / t - 1.0) for v, t in zip(state.as_tuple(), truth))


def cmd_solve(cfg: RunConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    tag = cfg.algorithm.replace("-", "_")
    terminals: list[PpiState] = []
    histories: list[list[PpiState]] = []
    for e in range(cfg.executions):
        state, history = _run_one(cfg, cfg.seed + e)
        terminals.append(state)
        histories.append(history)

    trace = histories[0] if cfg.executions == 1 and histories[0] else terminals
    write_iteration_csv(os.path.join(cfg.out_dir, f"{tag}_iterations.csv"), trace)
    write_config_artifact(os.path.join(cfg.out_dir, f"{tag}_config.txt"), cfg)

    truth = true_parameters(DEFAULT_PARAMS)
    est = np.array([s.as_tuple() for s in terminals])
    errs = np.array([_pct_errors(s) for s in terminals])
    import csv as _csv

    with open(os.path.join(cfg.out_dir, f"{tag}_summary.csv"), "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["parameter", "true_value", "mean_estimate", "sd_estimate", "mean_pct_error"])
        for p, name in enumerate(("x1", "x2", "x3")):
            w.writerow([name, repr(truth[p]), repr(float(est[:, p].mean())),
                        repr(float(est[:, p].std())), repr(float(errs[:, p].mean()))])

    xs = tuple(range(1, len(trace) + 1)) if trace else (0,)
    series = []
    for p, name in enumerate(("x1", "x2", "x3")):
        ys = tuple(_pct_errors(s)[p] for s in trace) or (0.0,)
        series.append(Series(name, xs[: len(ys)], ys))
    x_title = "iteration" if (cfg.executions == 1 and histories[0]) else "execution"
    line_chart(os.path.join(cfg.out_dir, f"{tag}_errors.svg"), series,
               title=f"{cfg.algorithm}: error by {x_title}",
               x_label=x_title, y_label="absolute error (%)")

    print(f"algorithm: {cfg.algorithm}   engine: {cfg.engine}   seed: {cfg.seed}   "
          f"executions: {cfg.executions}")
    print(f"{'parameter':<10}{'true':>14}{'mean':>14}{'sd':>12}{'|error| %':>12}")
    for p, name in enumerate(("x1", "x2", "x3")):
        print(f"{name:<10}{truth[p]:>14.6f}{est[:, p].mean():>14.6f}"
              f"{est[:, p].std():>12.2e}{errs[:, p].mean():>12.4f}")
    t_anneal = _per_anneal_time(cfg)
    if t_anneal is not None:
        rep = timing_report(_resolved_reads(cfg), t_anneal)
        print(f"per-anneal time: {t_anneal:.1f} us   reads: {rep.reads}   "
              f"accounting total: {rep.total:.0f} us")
    print(f"artifacts in {cfg.out_dir}/{tag}_*")
    return EXIT_OK


# ---------------------------------------------------------------------------
# quadratize

def cmd_quadratize(args: argparse.Namespace) -> int:
    poly = read_poly(args.input)
    out_path = args.out if args.out else args.input + ".quad"
    result = quadratize_full(poly)
    write_poly(result.qubo_poly, out_path)
    n_aux = len(result.alloc.records)
    print(f"reduced degree {poly.degree} -> {result.qubo_poly.degree}; "
          f"{n_aux} auxiliary variable{'s' if n_aux != 1 else ''}")
    for rec in result.alloc.records:
        term = " ".join(f"x{v}" for v in sorted(rec.term))
        print(f"  aux x{rec.var}  method={rec.method}  term=({term})")
    print(f"wrote {out_path}")

    if args.verify:
        variables = poly.variables()
        n = (max(variables) + 1) if variables else 0
        if n > VERIFY_MAX_VARS:
            raise CapacityError(
                f"verification enumerates 2^{n} assignments; limit is {VERIFY_MAX_VARS} variables"
            )
        aux = result.alloc.aux_vars
        for k in range(1 << n):
            assign = {v: (k >> v) & 1 for v in range(n)}
            want = poly.evaluate(assign)
            got = min_over_aux(result.qubo_poly, aux, assign)
            if not math.isclose(want, got, rel_tol=1e-9, abs_tol=1e-9):
                bits = "".join(str((k >> v) & 1) for v in range(n))
                print(f"verification FAILED at assignment {bits}: "
                      f"original {want!r}, reduced-min {got!r}", file=sys.stderr)
                return EXIT_VERIFY
        print(f"verified: equivalent on all 2^{n} assignments")
    return EXIT_OK


# ---------------------------------------------------------------------------
# appendix-b

def single_activation_toy() -> QuboModel:
    """Two variables, one conditional trap.

    With variable 0 down, flipping variable 1 pays -1; only after that
    does flipping variable 0 pay too. A single pass over the groups
    therefore parks in (0, 1) at energy -1 while the global minimum is
    (1, 1) at -2.
    """
    return QuboModel(2, {(0, 0): 1.0, (1, 1): -1.0, (0, 1): -2.0})


def two_component_toy() -> tuple[Poly, QuboModel, tuple[int, ...]]:
    """Two activation bits over two component bits, cubic, reduced.

    The first window over {0, 2} finds nothing to gain; only once
    variable 1 and activation 3 settle does revisiting the first group
    pay, so one cycle ends at energy 0 and two cycles reach -1.
    """
    z = Poly.variable
    cubic = (
        2 * z(2) + z(0) * z(2) - 2 * (z(0) * z(1) * z(2))
        + 2 * z(3) - z(1) * z(3) - 2 * (z(0) * z(1) * z(3))
    )
    reduced = quadratize_full(cubic)
    qubo, offset = to_qubo(reduced.qubo_poly)
    assert offset == 0.0
    return cubic, qubo, reduced.alloc.aux_vars


def _toy_run(model_name: str, engine: str, cycles: int, reads: int, seed: int):
    """One report row: (modal state, its energy, ground share, verdict)."""
    if model_name == "single":
        model = single_activation_toy()
        groups = [(0,), (1,)]
        schedule = grouped_cycle_schedule(24.0 * cycles, groups, cycles=cycles,
                                          down_fraction=0.02)
        initial = (0, 0)
        n_show = 2
        cubic = None
        aux = ()
    else:
        cubic, model, aux = two_component_toy()
        groups = [(0, 2), (1, 3)]
        schedule = grouped_cycle_schedule(16.0 * cycles, groups, cycles=cycles,
                                          always_active=aux, down_fraction=0.5)
        initial = (0,) * model.n
        n_show = 4

    ground = brute_force(model).min_energy
    if engine == "greedy":
        if model_name == "single":
            state = sequential_greedy(model, groups, initial, cycles=cycles)
            energy = qubo_energy(model, state)
        else:
            state = sequential_greedy(cubic, [(0,), (1,)], (0, 0, 0, 0), cycles=cycles,
                                      activations=(2, 3))
            energy = cubic.evaluate(dict(enumerate(state)))
        share = 1.0 if math.isclose(energy, ground, abs_tol=1e-9) else 0.0
        modal = tuple(state[:n_show])
    else:
        req = SamplerRequest(model, schedule, reads=reads, initial_state=initial, seed=seed)
        if engine == "statevector":
            ss = schrodinger_anneal(req)
        else:
            ss = heuristic_anneal(req, t_hot=1e-9)
        counts: dict[tuple[int, ...], int] = {}
        best: dict[tuple[int, ...], float] = {}
        hits = 0
        for rec in ss.records:
            key = tuple(rec.state[:n_show])
            counts[key] = counts.get(key, 0) + rec.occurrences
            best[key] = min(best.get(key, math.inf), rec.energy)
            if math.isclose(rec.energy, ground, abs_tol=1e-9):
                hits += rec.occurrences
        modal = max(sorted(counts), key=lambda k: counts[k])
        share = hits / ss.total_reads
        energy = best[modal]
    verdict = "correct" if math.isclose(energy, ground, abs_tol=1e-9) else "incorrect"
    return modal, energy, share, verdict


def cmd_appendix_b(args: argparse.Namespace) -> int:
    engines = [args.engine] if args.engine else list(ENGINES)
    reads = args.reads if args.reads is not None else 1000
    seed = args.seed if args.seed is not None else 0
    rows = []
    for model_name, label in (("single", "single-activation"), ("two", "two-component")):
        for engine in engines:
            for cycles in (1, 2):
                modal, energy, share, verdict = _toy_run(model_name, engine, cycles, reads, seed)
                rows.append((label, engine, cycles,
                             "".join(str(b) for b in modal), energy, share, verdict))
    print(f"{'model':<18}{'engine':<13}{'cycles':<8}{'modal state':<13}"
          f"{'energy':>8}{'ground share':>14}  verdict")
    for label, engine, cycles, modal, energy, share, verdict in rows:
        print(f"{label:<18}{engine:<13}{cycles:<8}{modal:<13}{energy:>8.2f}{share:>14.3f}  {verdict}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        import csv as _csv

        with open(os.path.join(args.out_dir, "appendix_b.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["model", "engine", "cycles", "modal_state", "energy",
                        "ground_share", "verdict"])
            for row in rows:
                w.writerow(row)
        print(f"wrote {args.out_dir}/appendix_b.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args: argparse.Namespace) -> int:
    if args.x1 is not None:
        x1 = args.x1
    elif args.true:
        x1 = true_parameters(DEFAULT_PARAMS)[0]
    elif args.from_summary:
        x1 = _x1_from_summary(args.from_summary)
    else:
        raise UsageError("need a policy: pass --x1, --true, or --from-summary")
    out_dir = args.out_dir if args.out_dir else "runs"
    os.makedirs(out_dir, exist_ok=True)
    sim = simulate_consumption(
        x1,
        periods=args.periods,
        shock_index=args.shock_index,
        shock_period=args.shock_period,
        k0=args.k0,
    )
    csv_path = os.path.join(out_dir, "consumption.csv")
    write_consumption_csv(csv_path, sim)
    periods = tuple(range(len(sim.z_path)))
    line_chart(
        os.path.join(out_dir, "consumption.svg"),
        [Series("closed form", periods, sim.c_exact),
         Series("estimated policy", periods, sim.c_model)],
        title="consumption under a first-period productivity shock",
        x_label="period", y_label="consumption",
    )
    gaps = sim.rel_gap
    worst = max(range(len(gaps)), key=lambda t: gaps[t])
    print(f"x1 = {x1!r}; max relative gap {100 * gaps[worst]:.4f}% at period {worst}")
    print(f"wrote {csv_path} and {out_dir}/consumption.svg")
    return EXIT_OK


def _x1_from_summary(path: str) -> float:
    import csv as _csv

    try:
        with open(path, newline="") as fh:
            for row in _csv.DictReader(fh):
                if row.get("parameter") == "x1":
                    return float(row["mean_estimate"])
    except OSError as exc:
        raise UsageError(f"cannot read summary: {exc}") from None
    raise UsageError(f"no x1 row found in {path}")


# ---------------------------------------------------------------------------
# bench

def cmd_bench(args: argparse.Namespace) -> int:
    out_dir = args.out_dir if args.out_dir else "runs"
    os.makedirs(out_dir, exist_ok=True)
    grid_reads = (1, 10, 100, 1000)
    grid_times = (5.0, 20.0, 23.0, 115.0)
    import csv as _csv

    with open(os.path.join(out_dir, "bench.csv"), "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["reads", "t_anneal_us", "total_us"])
        for r in grid_reads:
            for t in grid_times:
                w.writerow([r, repr(t), repr(timing_report(r, t).total)])
    print("accounting totals (microseconds):")
    header = "reads".ljust(8) + "".join(f"t={t:g}".rjust(12) for t in grid_times)
    print(header)
    for r in grid_reads:
        row = f"{r:<8}" + "".join(f"{timing_report(r, t).total:>12.0f}" for t in grid_times)
        print(row)

    n = args.vars
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    model = random_ising(n, rng)
    t0 = time.perf_counter()
    brute_force(model)
    t_brute = time.perf_counter() - t0
    t0 = time.perf_counter()
    heuristic_anneal(SamplerRequest(model, forward_schedule(20.0), reads=32, seed=1))
    t_heur = time.perf_counter() - t0
    t0 = time.perf_counter()
    sequential_greedy(model, [tuple(range(n))], (1,) * n)
    t_greedy = time.perf_counter() - t0
    print(f"wall clock on a random {n}-spin instance (informational, not an artifact):")
    print(f"  brute force      {t_brute * 1e3:8.1f} ms")
    print(f"  heuristic x32    {t_heur * 1e3:8.1f} ms")
    print(f"  greedy sweep     {t_greedy * 1e3:8.1f} ms")
    print(f"wrote {out_dir}/bench.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--engine", choices=ENGINES, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annealdp",
        description="Dynamic programming by simulated annealing of merged QUBOs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run a policy-iteration algorithm")
    _add_config_flags(ps)
    ps.add_argument("--algorithm", choices=ALGORITHMS, default=None)
    ps.add_argument("--j1", type=int, default=None)
    ps.add_argument("--j2", type=int, default=None)
    ps.add_argument("--j3", type=int, default=None)
    ps.add_argument("--s2", type=float, default=None)
    ps.add_argument("--s3", type=float, default=None)
    ps.add_argument("--reads", type=int, default=None)
    ps.add_argument("--cycles", type=int, default=None)
    ps.add_argument("--iterations", type=int, default=None)
    ps.add_argument("--executions", type=int, default=None)
    ps.add_argument("--reversal", type=float, default=None)
    ps.add_argument("--keep-fraction", dest="keep_fraction", type=float, default=None)
    ps.add_argument("--k-count", dest="k_count", type=int, default=None)
    ps.add_argument("--sweeps", type=int, default=None)
    ps.add_argument("--anneal-time", dest="anneal_time", type=float, default=None)
    ps.add_argument("--bias", type=float, default=None)
    ps.add_argument("--init-true", dest="init_true", action="store_const", const=True,
                    default=None, help="start from the closed-form parameters")
    ps.set_defaults(func=lambda a: cmd_solve(resolve_config(a)))

    pq = sub.add_parser("quadratize", help="reduce a polynomial file to quadratic")
    pq.add_argument("input")
    pq.add_argument("--out", default=None)
    pq.add_argument("--verify", action="store_true",
                    help=f"brute-force equivalence check (n <= {VERIFY_MAX_VARS})")
    pq.set_defaults(func=cmd_quadratize)

    pb = sub.add_parser("appendix-b", help="didactic activation models under cyclic schedules")
    pb.add_argument("--engine", choices=ENGINES, default=None,
                    help="default: run all three")
    pb.add_argument("--reads", type=int, default=None)
    pb.add_argument("--seed", type=int, default=None)
    pb.add_argument("--out-dir", dest="out_dir", default=None)
    pb.set_defaults(func=cmd_appendix_b)

    pm = sub.add_parser("simulate", help="consumption path against the closed form")
    pm.add_argument("--x1", type=float, default=None)
    pm.add_argument("--true", action="store_true", help="use the closed-form policy")
    pm.add_argument("--from-summary", dest="from_summary", default=None,
                    help="read x1 from a solve summary CSV")
    pm.add_argument("--periods", type=int, default=10)
    pm.add_argument("--shock-index", dest="shock_index", type=int, default=0)
    pm.add_argument("--shock-period", dest="shock_period", type=int, default=1)
    pm.add_argument("--k0", type=float, default=None)
    pm.add_argument("--out-dir", dest="out_dir", default=None)
    pm.set_defaults(func=cmd_simulate)

    pn = sub.add_parser("bench", help="timing accounting and micro-benchmarks")
    pn.add_argument("--vars", type=int, default=12)
    pn.add_argument("--seed", type=int, default=None)
    pn.add_argument("--out-dir", dest="out_dir", default=None)
    pn.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
