"""Finite-range jump-rate specifications and the built-in model family.

A :class:`RateSpec` describes a translation-invariant exclusion dynamics: a
finite set of jump displacements together with a local rule that maps the
occupancy pattern around the departure site to a nonnegative jump rate.  The
rule for a jump of displacement ``d`` may read sites within distance
``dep_radius + |d|`` of the departure site, so both endpoints of the jump are
always inside the window.

Rates are evaluated lazily on occupancy windows and cached per displacement,
which keeps exhaustive enumeration (2^window patterns) and large-ring
simulation fast.  Parameters given as ``int`` or :class:`fractions.Fraction`
propagate exactly; floats give ordinary float arithmetic.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .lattice import Config

Number = object  # int | float | Fraction


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def _check_nonnegative(name: str, value) -> None:
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError("parameter %s must be finite, got %r" % (name, value))
    if value < 0:
        raise ValueError("parameter %s must be nonnegative, got %r" % (name, value))


class RateSpec:
    """A translation-invariant, finite-range jump-rate rule.

    Parameters
    ----------
    name : str
        Identifier used in reports and serialized configs.
    jump_offsets : sequence of int
        Allowed displacements d (nonzero); a particle at x may jump to x+d.
    dep_radius : int
        The rate of a jump of displacement d may depend on occupancies within
        distance ``dep_radius + |d|`` of the departure site.
    evaluate : callable(window, d) -> rate
        ``window`` is the occupancy tuple of the sites
        ``x - w .. x + w`` with ``w = dep_radius + |d|`` (departure site at
        index ``w``).  Must return a nonnegative number and may ignore the
        occupancy of the two endpoints or not; by convention the exclusion
        constraint (departure occupied, target empty) is applied outside.
    params : mapping
        The defining parameters, kept for reporting and serialization.
    """

    def __init__(
        self,
        name: str,
        jump_offsets: Sequence[int],
        dep_radius: int,
        evaluate: Callable,
        params: Mapping | None = None,
    ):
        offsets = tuple(sorted(set(int(d) for d in jump_offsets)))
        if not offsets or any(d == 0 for d in offsets):
            raise ValueError("jump offsets must be nonzero and nonempty: %r" % (jump_offsets,))
        if dep_radius < 0:
            raise ValueError("dep_radius must be >= 0")
        self.name = name
        self.jump_offsets = offsets
        self.dep_radius = int(dep_radius)
        self._evaluate = evaluate
        self.params = dict(params or {})
        self.max_offset = max(abs(d) for d in offsets)
        #: smallest ring on which distinct sites cover every rate window
        self.min_ring_size = 2 * (self.dep_radius + self.max_offset) + 1
        self._tables: dict = {}

    def __repr__(self) -> str:
        inner = ", ".join("%s=%r" % kv for kv in self.params.items())
        return "%s(%s)" % (self.name, inner)

    @property
    def exact(self) -> bool:
        """True when every numeric parameter is an int or Fraction."""
        return _params_exact(self.params)

    def window_halfwidth(self, d: int) -> int:
        return self.dep_radius + abs(d)

    def evaluate(self, window, d: int):
        """Rate of a jump with displacement d given the local window."""
        w = self.window_halfwidth(d)
        if len(window) != 2 * w + 1:
            raise ValueError(
                "window for offset %d must have %d sites, got %d"
                % (d, 2 * w + 1, len(window))
            )
        table = self._tables.get(d)
        if table is None:
            table = self._tables[d] = {}
        window = tuple(window)
        try:
            return table[window]
        except KeyError:
            value = self._evaluate(window, d)
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError("rate is not finite for offset %d, window %r" % (d, window))
            if value < 0:
                raise ValueError("negative rate %r for offset %d, window %r" % (value, d, window))
            table[window] = value
            return value


def _params_exact(params: Mapping) -> bool:
    for v in params.values():
        if isinstance(v, Mapping):
            if not _params_exact(v):
                return False
        elif isinstance(v, (int, Fraction)):
            continue
        elif isinstance(v, float):
            return False
        # non-numeric params (strings, tuples of ints) don't affect exactness
    return True


def rate(spec: RateSpec, eta: Config, x: int, y: int):
    """Jump rate from x to y in configuration eta on a ring.

    The displacement is taken as the representative of y - x in
    (-L/2, L/2]; it must be one of the spec's jump offsets, otherwise the
    rate is 0.  The ring must be large enough that the rate window does not
    wrap onto itself.
    """
    size = len(eta)
    d = (y - x) % size
    if d > size // 2:
        d -= size
    if d not in spec.jump_offsets:
        return 0
    if size < spec.min_ring_size:
        raise ValueError(
            "ring of %d sites is too small for %s (needs >= %d)"
            % (size, spec.name, spec.min_ring_size)
        )
    w = spec.window_halfwidth(d)
    window = tuple(eta[(x + k) % size] for k in range(-w, w + 1))
    return spec.evaluate(window, d)


def span_rate(spec: RateSpec, bits: Sequence, lo: int, x: int, d: int):
    """Rate of the jump x -> x+d read from a pattern over sites lo..lo+len(bits)-1.

    The caller must guarantee that the window of the jump lies inside the
    span; used by the local-window enumeration in the order-condition checks.
    """
    w = spec.window_halfwidth(d)
    i = x - w - lo
    if i < 0 or i + 2 * w + 1 > len(bits):
        raise ValueError("span does not cover window of jump %d -> %d" % (x, x + d))
    return spec.evaluate(tuple(bits[i : i + 2 * w + 1]), d)


# ---------------------------------------------------------------------------
# Built-in models


def sep(p: Mapping[int, Number] | None = None) -> RateSpec:
    """Simple exclusion: constant rate p(d) for each displacement d.

    Default is the totally asymmetric nearest-neighbour walk p = {1: 1}.
    """
    if p is None:
        p = {1: 1}
    p = {int(d): v for d, v in p.items()}
    for d, v in p.items():
        if d == 0:
            raise ValueError("sep: displacement 0 is not allowed")
        _check_nonnegative("p[%d]" % d, v)
    if not any(v > 0 for v in p.values()):
        raise ValueError("sep: at least one displacement needs a positive rate")
    offsets = tuple(d for d, v in p.items() if v > 0)

    def evaluate(window, d):
        return p[d]

    return RateSpec("sep", offsets, 0, evaluate, {"p": dict(p)})


def speed_change_decreasing(span: int = 2) -> RateSpec:
    """Uniform jumps over 0 < d <= span, slowed down by a local crowding term.

    The jump rate is c(eta, x) = 2*span - eta(x)*eta(x+1) for every target,
    so occupation of the adjacent pair lowers the speed: rates are
    nonincreasing in the occupancy of other sites.
    """
    if span < 1:
        raise ValueError("span must be >= 1")
    offsets = tuple(range(1, span + 1))

    def evaluate(window, d):
        w = abs(d)  # dep_radius = 0
        return 2 * span - window[w] * window[w + 1]

    return RateSpec("speed_change_decreasing", offsets, 0, evaluate, {"span": span})


def speed_change_increasing(
    q: Mapping[int, Number] | None = None, strength: Number = 1
) -> RateSpec:
    """Jumps sped up by vacancies: rate q(d) * strength / u where u is the
    q-weighted number of empty neighbours of the departure site.

    With u = sum_d' q(d') (1 - eta(x+d')) the total outgoing rate is exactly
    ``strength`` whenever some weighted neighbour is empty; if all weighted
    neighbours are occupied (u = 0) every rate is 0.  Rates are nondecreasing
    in the occupancy of other sites.
    """
    if q is None:
        q = {1: 1, -1: 1}
    q = {int(d): v for d, v in q.items()}
    for d, v in q.items():
        if d == 0:
            raise ValueError("speed_change_increasing: displacement 0 not allowed")
        _check_nonnegative("q[%d]" % d, v)
    support = tuple(d for d, v in q.items() if v > 0)
    if not support:
        raise ValueError("speed_change_increasing: q must have positive support")
    _check_nonnegative("strength", strength)
    if isinstance(strength, bool) or (isinstance(strength, int)):
        strength = Fraction(strength)
    radius = max(0, max(abs(d) for d in support) - min(abs(d) for d in support))

    def evaluate(window, d):
        w = radius + abs(d)
        u = 0
        for dp in support:
            u += q[dp] * (1 - window[w + dp])
        if u == 0:
            return 0
        return q[d] * strength / u

    return RateSpec(
        "speed_change_increasing",
        support,
        radius,
        evaluate,
        {"q": dict(q), "strength": strength},
    )


def traffic2(alpha: Number, beta: Number) -> RateSpec:
    """Two-range traffic model: hops of 1 at rate 1, hops of 2 at a rate set
    by the intermediate site, alpha when it is occupied and beta when empty.
    """
    _check_nonnegative("alpha", alpha)
    _check_nonnegative("beta", beta)

    def evaluate(window, d):
        if d == 1:
            return 1
        mid = window[3]  # site x+1 in the 5-site window around x
        return alpha * mid + beta * (1 - mid)

    return RateSpec("traffic2", (1, 2), 0, evaluate, {"alpha": alpha, "beta": beta})


def two_step() -> RateSpec:
    """Deterministic-speed traffic: hop 1 always, hop 2 only over an occupied
    intermediate site (traffic2 with alpha=1, beta=0)."""
    spec = traffic2(1, 0)
    spec.name = "two_step"
    spec.params = {}
    return spec


def two_star_step(p: Mapping[int, Number] | None = None) -> RateSpec:
    """Two-range walk built from a one-step law p: a direct step plus a
    composite step through any empty intermediate site,

        rate(x -> y) = p(y-x) + sum_z p(z-x) p(y-z) (1 - eta(z)).

    p must be a probability (weights summing to 1).  Default p = {1: 1}.
    """
    if p is None:
        p = {1: 1}
    p = {int(d): v for d, v in p.items()}
    for d, v in p.items():
        if d == 0:
            raise ValueError("two_star_step: displacement 0 not allowed")
        _check_nonnegative("p[%d]" % d, v)
    total = sum(p.values())
    if total != 1 and not (isinstance(total, float) and abs(total - 1) <= 1e-12):
        raise ValueError("two_star_step: p must sum to 1, got %r" % (total,))
    support = tuple(d for d, v in p.items() if v > 0)
    offsets = set(support)
    for d1 in support:
        for d2 in support:
            if d1 + d2 != 0:
                offsets.add(d1 + d2)
    radius = 0
    for d1 in support:
        for d2 in support:
            if d1 + d2 != 0:
                radius = max(radius, abs(d1) - abs(d1 + d2))

    def evaluate(window, d):
        w = radius + abs(d)
        value = p.get(d, 0)
        for d1 in support:
            d2 = d - d1
            if d2 in p and p[d2] > 0:
                # two-step path x -> x+d1 -> x+d, open when x+d1 is empty
                value = value + p[d1] * p[d2] * (1 - window[w + d1])
        return value

    return RateSpec("two_star_step", sorted(offsets), radius, evaluate, {"p": dict(p)})


def gg_symmetrized(alpha: Number, beta: Number, gamma: Number, delta: Number) -> RateSpec:
    """Nearest-neighbour model whose rate reads one site behind and one site
    beyond the jump, symmetrically for both directions.

    For a right jump x -> x+1 the rate is chosen by (eta(x-1), eta(x+2)):
    (1,0) -> alpha, (0,1) -> beta, (1,1) -> gamma, (0,0) -> delta.  For a
    left jump x -> x-1 the roles mirror: (eta(x+1), eta(x-2)) picks the same
    table.
    """
    for nm, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)):
        _check_nonnegative(nm, v)

    def evaluate(window, d):
        # dep_radius = 1, |d| = 1 -> 5-site window x-2 .. x+2, x at index 2
        if d == 1:
            behind, ahead = window[1], window[4]
        else:
            behind, ahead = window[3], window[0]
        if behind:
            return gamma if ahead else alpha
        return beta if ahead else delta

    return RateSpec(
        "gg_symmetrized",
        (1, -1),
        1,
        evaluate,
        {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta},
    )


def custom_table(
    offsets: Sequence[int],
    dep_radius: int,
    table: Mapping,
) -> RateSpec:
    """Arbitrary finite-range rule given as an explicit pattern table.

    ``table`` maps (d, pattern) to a rate, where ``pattern`` is the window
    occupancy written left to right as a '0'/'1' string of length
    2*(dep_radius+|d|)+1.  Patterns not listed get rate 0.
    """
    offsets = tuple(sorted(set(int(d) for d in offsets)))
    entries = {}
    for (d, pattern), value in table.items():
        d = int(d)
        if d not in offsets:
            raise ValueError("table entry for unknown offset %d" % d)
        want = 2 * (dep_radius + abs(d)) + 1
        if len(pattern) != want or any(c not in "01" for c in pattern):
            raise ValueError(
                "pattern %r for offset %d must be a 0/1 string of length %d"
                % (pattern, d, want)
            )
        _check_nonnegative("table[%d,%s]" % (d, pattern), value)
        entries[(d, tuple(1 if c == "1" else 0 for c in pattern))] = value

    def evaluate(window, d):
        return entries.get((d, tuple(window)), 0)

    return RateSpec(
        "custom_table",
        offsets,
        dep_radius,
        evaluate,
        {"offsets": offsets, "dep_radius": dep_radius, "table": dict(table)},
    )


_FACTORIES = {
    "sep": sep,
    "speed_change_decreasing": speed_change_decreasing,
    "speed_change_increasing": speed_change_increasing,
    "traffic2": traffic2,
    "two_step": two_step,
    "two_star_step": two_star_step,
    "gg_symmetrized": gg_symmetrized,
    "custom_table": custom_table,
}


def model_ids() -> tuple:
    return tuple(sorted(_FACTORIES))


def make_model(model_id: str, params: Mapping | None = None) -> RateSpec:
    """Instantiate a built-in model by id with keyword parameters."""
    try:
        factory = _FACTORIES[model_id]
    except KeyError:
        raise ValueError(
            "unknown model %r (known: %s)" % (model_id, ", ".join(model_ids()))
        ) from None
    try:
        return factory(**dict(params or {}))
    except TypeError as exc:
        raise ValueError("bad parameters for model %r: %s" % (model_id, exc)) from None


def model_parameter_names(model_id: str) -> tuple:
    """Parameter names of a built-in model's factory, in declaration order."""
    if model_id not in _FACTORIES:
        raise ValueError(
            "unknown model %r (known: %s)" % (model_id, ", ".join(model_ids()))
        )
    return tuple(inspect.signature(_FACTORIES[model_id]).parameters)


def model_signature(model_id: str) -> str:
    """Human-readable ``id(param, ...)`` line for a built-in model."""
    return "%s%s" % (model_id, inspect.signature(_FACTORIES[model_id]))


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    """Exhaustive scan of a spec's local rate tables."""

    ok: bool
    issues: list = field(default_factory=list)
    #: largest total rate out of an occupied site, over all local patterns
    sup_outgoing: Number = 0
    #: largest total rate into an empty site, over all local patterns
    sup_incoming: Number = 0


def validate_spec(spec: RateSpec) -> ValidationReport:
    """Check every local pattern of every displacement for finite nonnegative
    rates and compute the extreme outgoing/incoming rate sums."""
    issues = []
    # wide enough to cover the window of a jump out of site 0 and of a jump
    # from -d into site 0, for every displacement d
    big = spec.dep_radius + 2 * spec.max_offset
    sup_out = 0
    sup_in = 0
    for bits in _all_patterns(2 * big + 1):
        out_total = 0
        in_total = 0
        for d in spec.jump_offsets:
            try:
                r_out = span_rate(spec, bits, -big, 0, d)
                r_in = span_rate(spec, bits, -big, -d, d)
            except ValueError as exc:  # negative or non-finite rate
                issues.append((d, "".join(map(str, bits)), str(exc)))
                continue
            out_total = out_total + r_out
            in_total = in_total + r_in
        sup_out = max(sup_out, out_total)
        sup_in = max(sup_in, in_total)
    return ValidationReport(not issues, issues, sup_out, sup_in)


def _all_patterns(n: int):
    for m in range(1 << n):
        yield tuple((m >> k) & 1 for k in range(n))
