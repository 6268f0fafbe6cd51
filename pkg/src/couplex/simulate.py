"""Event-driven (Gillespie) simulation of single and coupled chains.

Waiting times and event choices come from a counter-based RNG
(``numpy.random.Philox``) keyed by ``(seed, replica)``, so every replica is
an independent, exactly reproducible stream: rerunning with the same key
gives a bit-identical event sequence.

The single-chain engine caches per-jump rates and refreshes only the
neighbourhood of the sites touched by an event.  The coupled engine keeps
three regimes: identical copies move in lockstep; ordered pairs use the
plain ordered coupling table (for these the composed coupling generates
exactly the same moves); unordered pairs compose coupling factors through
the join configuration, memoising the composition per local occupancy
pattern, which keeps long runs on large rings affordable.

Sampling records the state at fixed grid times (the state just before each
grid time, i.e. the left limit).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from itertools import accumulate
from typing import Optional

import numpy as np

from .lattice import CoupledState, is_ordered, leq
from .models import RateSpec, rate
from .coupling import _left_factors, increasing_rates, strict_rates


@dataclass
class Trajectory:
    """Sampled states of one run plus bookkeeping for reproducibility."""

    times: list
    snapshots: list
    seed: tuple
    total_events: int
    absorbed: bool
    final: object
    #: coupled runs only: discrepancy count after every event
    discrepancy_curve: Optional[list] = None


def _rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, replica]))


def random_configuration(size: int, count: int, rng: np.random.Generator):
    """Uniform configuration with exactly `count` particles."""
    if not 0 <= count <= size:
        raise ValueError("count must lie in [0, %d]" % size)
    sites = rng.choice(size, size=count, replace=False)
    eta = [0] * size
    for s in sites:
        eta[int(s)] = 1
    return tuple(eta)


def discrepancy_pair(size: int, count: int, rng: np.random.Generator) -> CoupledState:
    """A pair with `count` particles each, agreeing everywhere except one
    particle placed at different sites — two opposite discrepancies."""
    if count < 1 or count > size - 1:
        raise ValueError("count must lie in [1, %d]" % (size - 1))
    sites = rng.choice(size, size=count + 1, replace=False)
    background = [0] * size
    for s in sites[: count - 1]:
        background[int(s)] = 1
    xi = list(background)
    zeta = list(background)
    xi[int(sites[count - 1])] = 1
    zeta[int(sites[count])] = 1
    return CoupledState(tuple(xi), tuple(zeta))


# ---------------------------------------------------------------------------
# Single chain


class _SingleEngine:
    """Mutable configuration with cached active-jump rates."""

    def __init__(self, spec: RateSpec, eta):
        self.spec = spec
        self.eta = list(eta)
        self.size = len(eta)
        self.offsets = spec.jump_offsets
        self.reach = spec.dep_radius + spec.max_offset
        self.rates = [
            [self._jump_rate(x, d) for d in self.offsets] for x in range(self.size)
        ]

    def _jump_rate(self, x: int, d: int) -> float:
        eta = self.eta
        y = (x + d) % self.size
        if eta[x] == 0 or eta[y] == 1:
            return 0.0
        return float(rate(self.spec, eta, x, y))

    def apply(self, x: int, d: int):
        y = (x + d) % self.size
        eta = self.eta
        eta[x], eta[y] = eta[y], eta[x]
        for s in (x, y):
            for k in range(-self.reach, self.reach + 1):
                z = (s + k) % self.size
                self.rates[z] = [self._jump_rate(z, dd) for dd in self.offsets]

    def events(self):
        out = []
        for x in range(self.size):
            for k, d in enumerate(self.offsets):
                r = self.rates[x][k]
                if r > 0.0:
                    out.append((r, x, d))
        return out

    def state(self):
        return tuple(self.eta)


def _advance(events, rng: np.random.Generator):
    """One Gillespie step: (waiting time, chosen event) or None if stuck."""
    if not events:
        return None
    cum = list(accumulate(r for r, *_ in events))
    total = cum[-1]
    if total <= 0.0:
        return None
    dt = rng.exponential(1.0 / total)
    pick = bisect.bisect_right(cum, rng.random() * total)
    return dt, events[min(pick, len(events) - 1)]


def simulate_single(
    spec: RateSpec,
    init,
    t_end: float,
    sample_dt: Optional[float] = None,
    seed: int = 0,
    replica: int = 0,
) -> Trajectory:
    """Simulate one copy up to t_end, sampling every sample_dt."""
    rng = _rng(seed, replica)
    engine = _SingleEngine(spec, init)
    grid = _sample_grid(t_end, sample_dt)
    times, snapshots = [], []
    t = 0.0
    events = 0
    absorbed = False
    next_idx = 0
    while True:
        step = _advance(engine.events(), rng)
        t_next = t + step[0] if step else float("inf")
        while next_idx < len(grid) and grid[next_idx] <= min(t_next, t_end):
            times.append(grid[next_idx])
            snapshots.append(engine.state())
            next_idx += 1
        if step is None:
            absorbed = True
            break
        if t_next > t_end:
            break
        t = t_next
        _, x, d = step[1]
        engine.apply(x, d)
        events += 1
    return Trajectory(times, snapshots, (seed, replica), events, absorbed, engine.state())


def _sample_grid(t_end: float, sample_dt: Optional[float]):
    if sample_dt is None or sample_dt <= 0:
        return [t_end]
    n = int(np.floor(t_end / sample_dt + 1e-9))
    return [k * sample_dt for k in range(1, n + 1)]


# ---------------------------------------------------------------------------
# Coupled chain


class _MiddleCache:
    """Composed coupling contributions per local pair pattern.

    For a join-active jump of displacement d, every coupling factor reads
    only sites within dep_radius + 3*max_offset of the departure site, so the
    composition through that jump is a pure function of the local pair
    pattern.  Entries are stored with site offsets relative to the departure.
    """

    def __init__(self, spec: RateSpec, flavor: str):
        self.spec = spec
        self.flavor = flavor
        self.reach = spec.dep_radius + 3 * spec.max_offset
        self.cache = {}

    def contributions(self, key):
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = self._compose(key)
        return hit

    def _compose(self, key):
        d0, pattern = key
        c = self.reach
        vxi = tuple(p >> 1 for p in pattern)
        vzeta = tuple(p & 1 for p in pattern)
        vmid = tuple(a | b for a, b in zip(vxi, vzeta))
        x, y = c, c + d0
        norm = float(rate(self.spec, vmid, x, y))
        if norm <= 0.0:
            return ()
        left = _left_factors(self.spec, vxi, vmid, x, y, self.flavor)
        right = _left_factors(self.spec, vzeta, vmid, x, y, self.flavor)
        out = []
        for (x1, y1), g1 in left:
            for (x2, y2), g2 in right:
                out.append(
                    (x1 - c, y1 - c, x2 - c, y2 - c, float(g1) * float(g2) / norm)
                )
        return tuple(out)


_FLAVOR = {"increasing": "overlap", "attractive": "overlap", "strict": "proportional"}


class _CoupledEngine:
    """Event generation for the coupled chain, with regime switching."""

    def __init__(self, spec: RateSpec, pair: CoupledState, kind: str):
        if kind not in _FLAVOR:
            raise ValueError("unknown coupling kind %r" % (kind,))
        self.spec = spec
        self.kind = kind
        self.xi = list(pair.first)
        self.zeta = list(pair.second)
        self.size = len(pair.first)
        self.cache = _MiddleCache(spec, _FLAVOR[kind])

    def state(self) -> CoupledState:
        return CoupledState(tuple(self.xi), tuple(self.zeta))

    def discrepancies(self) -> int:
        return sum(a != b for a, b in zip(self.xi, self.zeta))

    # each event is (rate, first_jump | None, second_jump | None)

    def events(self):
        xi, zeta = self.xi, self.zeta
        if xi == zeta:
            return [
                (r, (x, d), (x, d))
                for r, x, d in _active_jumps(self.spec, xi)
            ]
        txi, tzeta = tuple(xi), tuple(zeta)
        if self.kind == "increasing":
            if leq(txi, tzeta) or leq(tzeta, txi):
                table = increasing_rates(self.spec, txi, tzeta)
                return self._table_events(table)
            return self._independent_events()
        if leq(txi, tzeta) or leq(tzeta, txi):
            builder = increasing_rates if self.kind == "attractive" else strict_rates
            return self._table_events(builder(self.spec, txi, tzeta))
        return self._composed_events()

    def _independent_events(self):
        out = [(r, (x, d), None) for r, x, d in _active_jumps(self.spec, self.xi)]
        out += [(r, None, (x, d)) for r, x, d in _active_jumps(self.spec, self.zeta)]
        return out

    def _table_events(self, table):
        xi, zeta, size = self.xi, self.zeta, self.size
        out = []
        for (x1, y1, x2, y2), g in table.coupled.items():
            if xi[x1] and not xi[y1] and zeta[x2] and not zeta[y2] and g > 0:
                d1 = _offset(x1, y1, size)
                d2 = _offset(x2, y2, size)
                out.append((float(g), (x1, d1), (x2, d2)))
        for (x, y), r in table.residual_first.items():
            if r > 0 and xi[x] and not xi[y]:
                out.append((float(r), (x, _offset(x, y, size)), None))
        for (x, y), r in table.residual_second.items():
            if r > 0 and zeta[x] and not zeta[y]:
                out.append((float(r), None, (x, _offset(x, y, size))))
        return out

    def _composed_events(self):
        spec, size = self.spec, self.size
        xi, zeta = self.xi, self.zeta
        reach = self.cache.reach
        coupled = {}
        for x in range(size):
            if not (xi[x] or zeta[x]):
                continue
            window = tuple(
                (xi[(x + k) % size] << 1) | zeta[(x + k) % size]
                for k in range(-reach, reach + 1)
            )
            for d in spec.jump_offsets:
                yk = reach + d
                if window[yk] != 0:
                    continue  # join-occupied target
                for dx1, dy1, dx2, dy2, g in self.cache.contributions((d, window)):
                    key = (
                        (x + dx1) % size,
                        (x + dy1) % size,
                        (x + dx2) % size,
                        (x + dy2) % size,
                    )
                    coupled[key] = coupled.get(key, 0.0) + g
        out = []
        phi1 = {}
        phi2 = {}
        for (x1, y1, x2, y2), g in coupled.items():
            if zeta[x2] and not zeta[y2]:
                k = (x1, y1)
                phi1[k] = phi1.get(k, 0.0) + g
            if xi[x1] and not xi[y1]:
                k = (x2, y2)
                phi2[k] = phi2.get(k, 0.0) + g
            if xi[x1] and not xi[y1] and zeta[x2] and not zeta[y2] and g > 0:
                out.append(
                    (g, (x1, _offset(x1, y1, size)), (x2, _offset(x2, y2, size)))
                )
        for r, x, d in _active_jumps(spec, xi):
            rr = r - phi1.get((x, (x + d) % size), 0.0)
            if rr > 1e-14:
                out.append((rr, (x, d), None))
        for r, x, d in _active_jumps(spec, zeta):
            rr = r - phi2.get((x, (x + d) % size), 0.0)
            if rr > 1e-14:
                out.append((rr, None, (x, d)))
        return out

    def apply(self, first, second):
        if first is not None:
            x, d = first
            y = (x + d) % self.size
            self.xi[x], self.xi[y] = self.xi[y], self.xi[x]
        if second is not None:
            x, d = second
            y = (x + d) % self.size
            self.zeta[x], self.zeta[y] = self.zeta[y], self.zeta[x]


def _offset(x: int, y: int, size: int) -> int:
    d = (y - x) % size
    return d - size if d > size // 2 else d


def _active_jumps(spec: RateSpec, eta):
    size = len(eta)
    out = []
    for x in range(size):
        if not eta[x]:
            continue
        for d in spec.jump_offsets:
            y = (x + d) % size
            if eta[y]:
                continue
            r = float(rate(spec, eta, x, y))
            if r > 0.0:
                out.append((r, x, d))
    return out


def simulate_coupled(
    spec: RateSpec,
    first,
    second,
    kind: str,
    t_end: float,
    sample_dt: Optional[float] = None,
    seed: int = 0,
    replica: int = 0,
    assert_pathwise: bool = True,
) -> Trajectory:
    """Simulate the coupled pair chain up to t_end.

    With assert_pathwise, every event is checked on the fly: under the
    attractive and strict couplings the discrepancy count must never grow,
    and under the increasing coupling an ordered start must stay ordered.
    """
    pair = CoupledState(tuple(first), tuple(second))
    rng = _rng(seed, replica)
    engine = _CoupledEngine(spec, pair, kind)
    started_ordered = is_ordered(pair.first, pair.second)
    grid = _sample_grid(t_end, sample_dt)
    times, snapshots = [], []
    curve = [engine.discrepancies()]
    t = 0.0
    events = 0
    absorbed = False
    next_idx = 0
    while True:
        step = _advance(engine.events(), rng)
        t_next = t + step[0] if step else float("inf")
        while next_idx < len(grid) and grid[next_idx] <= min(t_next, t_end):
            times.append(grid[next_idx])
            snapshots.append(engine.state())
            next_idx += 1
        if step is None:
            absorbed = True
            break
        if t_next > t_end:
            break
        t = t_next
        _, first, second = step[1]
        before = curve[-1]
        engine.apply(first, second)
        events += 1
        now = engine.discrepancies()
        curve.append(now)
        if assert_pathwise:
            if kind in ("attractive", "strict") and now > before:
                raise AssertionError(
                    "discrepancy count grew from %d to %d at event %d"
                    % (before, now, events)
                )
            if kind == "increasing" and started_ordered:
                if not is_ordered(tuple(engine.xi), tuple(engine.zeta)):
                    raise AssertionError("order broken at event %d" % events)
    return Trajectory(
        times,
        snapshots,
        (seed, replica),
        events,
        absorbed,
        engine.state(),
        discrepancy_curve=curve,
    )


def state_counts(traj: Trajectory) -> dict:
    """Multiplicity of each sampled state (occupation frequencies)."""
    counts = {}
    for s in traj.snapshots:
        counts[s] = counts.get(s, 0) + 1
    return counts


OBSERVABLES = ("density_profile", "discrepancy_curve", "order_time")


def observable_report(traj: Trajectory, which: str):
    """Tabulate one observable of a trajectory as CSV-ready rows.

    The first row is the header.  density_profile averages each site's
    occupation over the recorded samples (first copy for a coupled run);
    discrepancy_curve lists the per-event discrepancy counts of a coupled
    run; order_time is the first sample time at which the two copies were
    comparable, or inf if they never were.
    """
    if which not in OBSERVABLES:
        raise ValueError("unknown observable %r; expected one of %s" % (which, ", ".join(OBSERVABLES)))
    if which == "discrepancy_curve":
        if traj.discrepancy_curve is None:
            raise ValueError("discrepancy_curve was not recorded on this trajectory")
        rows = [("event", "discrepancies")]
        rows.extend((k, n) for k, n in enumerate(traj.discrepancy_curve))
        return rows
    if not traj.snapshots:
        raise ValueError("trajectory has no recorded samples")
    coupled = isinstance(traj.snapshots[0], CoupledState)
    if which == "order_time":
        if not coupled:
            raise ValueError("order_time needs a coupled trajectory")
        when = float("inf")
        for t, snap in zip(traj.times, traj.snapshots):
            if snap.ordered:
                when = t
                break
        return [("order_time",), (when,)]
    profiles = [s.first for s in traj.snapshots] if coupled else traj.snapshots
    size = len(profiles[0])
    rows = [("site", "density")]
    for x in range(size):
        rows.append((x, sum(p[x] for p in profiles) / len(profiles)))
    return rows
