"""Annealing schedules: global and per-variable piecewise-linear anneal
fraction paths, factory functions for the shapes the experiments use,
and CSV serialization of grouped schedules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .bqm import ParseError

Path = tuple[tuple[float, float], ...]


def _validate_path(path: Path, total_time: float, what: str) -> None:
    if not path:
        raise ValueError(f"{what} must have at least one breakpoint")
    last_t = None
    for t, f in path:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"{what}: fraction {f} outside [0, 1]")
        if t < 0.0 or t > total_time + 1e-9:
            raise ValueError(f"{what}: time {t} outside [0, {total_time}]")
        if last_t is not None and t < last_t:
            raise ValueError(f"{what}: breakpoint times must be nondecreasing")
        last_t = t


def _interp(path: Path, t: float) -> float:
    if t <= path[0][0]:
        return path[0][1]
    for (t0, f0), (t1, f1) in zip(path, path[1:]):
        if t <= t1:
            if t1 == t0:
                return f1
            return f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    return path[-1][1]


@dataclass(frozen=True)
class AnnealSchedule:
    """Piecewise-linear anneal fraction s(t) with optional per-variable
    overrides.

    total_time is in microseconds. breakpoints is the global path; a
    variable listed in variable_paths follows its own path instead.
    reversal_target records the lowest fraction a reversal reaches
    (0.0 = full reversal); cycles counts repetitions of the per-group
    subschedule; reinitialize says whether each read restarts from the
    initial state or continues from the previous read's terminal state.
    """

    total_time: float
    breakpoints: Path
    variable_paths: Mapping[int, Path] | None = None
    reversal_target: float = 0.0
    cycles: int = 1
    reinitialize: bool = True

    def __post_init__(self) -> None:
        if self.total_time < 0:
            raise ValueError("total_time must be nonnegative")
        if not 0.0 <= self.reversal_target <= 1.0:
            raise ValueError("reversal_target must lie in [0, 1]")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        _validate_path(tuple(self.breakpoints), self.total_time, "global path")
        object.__setattr__(self, "breakpoints", tuple(tuple(p) for p in self.breakpoints))
        if self.variable_paths is not None:
            frozen = {}
            for v, path in self.variable_paths.items():
                path = tuple(tuple(p) for p in path)
                _validate_path(path, self.total_time, f"path of variable {v}")
                frozen[int(v)] = path
            object.__setattr__(self, "variable_paths", frozen)

    def s_at(self, t: float, var: int | None = None) -> float:
        if var is not None and self.variable_paths and var in self.variable_paths:
            return _interp(self.variable_paths[var], t)
        return _interp(self.breakpoints, t)

    def min_fraction_at(self, t: float) -> float:
        lo = _interp(self.breakpoints, t)
        if self.variable_paths:
            for path in self.variable_paths.values():
                lo = min(lo, _interp(path, t))
        return lo

    def needs_initial_state(self, n: int) -> bool:
        # A variable starting above s=0 has no transverse-dominated start:
        # its classical value at t=0 must come from somewhere.
        return any(self.s_at(0.0, v) > 0.0 for v in range(n))


def forward_schedule(total_time: float) -> AnnealSchedule:
    """Plain forward anneal: s runs 0 -> 1 over the full time."""
    return AnnealSchedule(total_time, ((0.0, 0.0), (total_time, 1.0)))


def reverse_schedule(total_time: float, reversal_target: float = 0.0, hold: float = 0.0) -> AnnealSchedule:
    """Reverse anneal: s runs 1 -> target -> 1, with an optional hold
    plateau at the bottom taking `hold` fraction of the total time."""
    if not 0.0 <= hold < 1.0:
        raise ValueError("hold must lie in [0, 1)")
    t_lo = total_time * (1.0 - hold) / 2.0
    t_hi = total_time * (1.0 + hold) / 2.0
    pts = [(0.0, 1.0), (t_lo, reversal_target)]
    if hold > 0.0:
        pts.append((t_hi, reversal_target))
    pts.append((total_time, 1.0))
    return AnnealSchedule(total_time, tuple(pts), reversal_target=reversal_target)


@dataclass(frozen=True)
class GroupedSchedule:
    """An AnnealSchedule plus the group structure that produced it, kept
    for serialization and reporting."""

    schedule: AnnealSchedule
    groups: tuple[tuple[int, ...], ...]
    always_active: tuple[int, ...] = ()

    @property
    def total_time(self) -> float:
        return self.schedule.total_time


def grouped_cycle_schedule(
    total_time: float,
    groups: Sequence[Iterable[int]],
    cycles: int = 1,
    reversal_target: float = 0.0,
    always_active: Iterable[int] = (),
    reinitialize: bool = True,
    down_fraction: float = 0.2,
    hold_fraction: float = 0.0,
) -> GroupedSchedule:
    """Inhomogeneous reverse anneal in group windows.

    Time splits into cycles x len(groups) equal windows. Within window w
    only group w mod len(groups) dips from 1 to reversal_target and back;
    everything else holds at 1. Variables in always_active dip in every
    window, so they relax jointly with whichever group is active.

    The dip is asymmetric: the drop takes down_fraction of the window,
    an optional plateau at the target takes hold_fraction, and the
    recovery the rest. A fast drop unsticks the group from its incoming
    classical state while the slow rise settles it into the conditional
    minimum; a symmetric slow dip would adiabatically return the state
    it started with. The plateau rotates population between the frozen
    basis states while the transverse field dominates, which is the only
    way a unitary window can favor leaving a conditionally stable state.
    """
    if not 0.0 < down_fraction < 1.0:
        raise ValueError("down_fraction must lie strictly between 0 and 1")
    if not 0.0 <= hold_fraction < 1.0 - down_fraction:
        raise ValueError("hold_fraction must lie in [0, 1 - down_fraction)")
    groups = tuple(tuple(g) for g in groups)
    always = tuple(always_active)
    if not groups:
        raise ValueError("need at least one group")
    seen: set[int] = set()
    for g in groups:
        overlap = seen & set(g)
        if overlap:
            raise ValueError(f"variables {sorted(overlap)} appear in more than one group")
        seen |= set(g)
    if seen & set(always):
        raise ValueError("always_active variables cannot also be grouped")

    n_windows = cycles * len(groups)
    width = total_time / n_windows
    paths: dict[int, list[tuple[float, float]]] = {v: [(0.0, 1.0)] for v in seen | set(always)}
    for w in range(n_windows):
        start = w * width
        low = start + width * down_fraction
        # boundary shared with the next window's start, computed the
        # same way so accumulated rounding cannot reorder breakpoints
        end = (w + 1) * width
        active = set(groups[w % len(groups)]) | set(always)
        for v in active:
            pts = [(start, 1.0), (low, reversal_target)]
            if hold_fraction > 0.0:
                pts.append((low + width * hold_fraction, reversal_target))
            pts.append((end, 1.0))
            paths[v].extend(pts)
    variable_paths = {v: tuple(pts) for v, pts in paths.items()}
    schedule = AnnealSchedule(
        total_time,
        ((0.0, 1.0), (total_time, 1.0)),
        variable_paths=variable_paths,
        reversal_target=reversal_target,
        cycles=cycles,
        reinitialize=reinitialize,
    )
    return GroupedSchedule(schedule, groups, always)


def write_schedule_csv(gs: GroupedSchedule, path: str) -> None:
    """CSV of (time_us, group, fraction) breakpoints.

    Group membership and schedule scalars ride along in `#` comments so
    the file is self-describing.
    """
    sched = gs.schedule
    lines = [
        f"# total_time_us={sched.total_time!r} cycles={sched.cycles}"
        f" reversal_target={sched.reversal_target!r} reinitialize={int(sched.reinitialize)}",
    ]
    for gi, g in enumerate(gs.groups):
        lines.append(f"# group g{gi}: {' '.join(str(v) for v in g)}")
    if gs.always_active:
        lines.append(f"# group always: {' '.join(str(v) for v in gs.always_active)}")
    lines.append("time_us,group,fraction")
    for t, f in sched.breakpoints:
        lines.append(f"{t!r},global,{f!r}")
    emitted: set[int] = set()
    for gi, g in enumerate(gs.groups):
        rep = g[0]
        for t, f in (sched.variable_paths or {}).get(rep, ()):
            lines.append(f"{t!r},g{gi},{f!r}")
        emitted |= set(g)
    if gs.always_active:
        rep = gs.always_active[0]
        for t, f in (sched.variable_paths or {}).get(rep, ()):
            lines.append(f"{t!r},always,{f!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_schedule_csv(path: str) -> GroupedSchedule:
    with open(path) as fh:
        raw = fh.readlines()
    meta: dict[str, float] = {}
    group_vars: dict[str, tuple[int, ...]] = {}
    rows: list[tuple[float, str, float]] = []
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text[1:].strip()
            if body.startswith("group "):
                try:
                    name, members = body[len("group "):].split(":", 1)
                    group_vars[name.strip()] = tuple(int(v) for v in members.split())
                except ValueError:
                    raise ParseError(f"bad group line {text!r}", lineno) from None
            else:
                for tok in body.split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = float(v)
            continue
        if text.startswith("time_us"):
            continue
        parts = text.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 'time_us,group,fraction', got {text!r}", lineno)
        try:
            rows.append((float(parts[0]), parts[1].strip(), float(parts[2])))
        except ValueError:
            raise ParseError(f"bad row {text!r}", lineno) from None
    if "total_time_us" not in meta:
        raise ParseError("missing total_time_us header comment", 1)
    global_path = tuple((t, f) for t, g, f in rows if g == "global")
    variable_paths: dict[int, Path] = {}
    for name, members in group_vars.items():
        gpath = tuple((t, f) for t, g, f in rows if g == name)
        for v in members:
            variable_paths[v] = gpath
    schedule = AnnealSchedule(
        meta["total_time_us"],
        global_path,
        variable_paths=variable_paths or None,
        reversal_target=meta.get("reversal_target", 0.0),
        cycles=int(meta.get("cycles", 1)),
        reinitialize=bool(int(meta.get("reinitialize", 1))),
    )
    groups = tuple(v for k, v in sorted(group_vars.items()) if k != "always")
    always = group_vars.get("always", ())
    return GroupedSchedule(schedule, groups, tuple(always))
