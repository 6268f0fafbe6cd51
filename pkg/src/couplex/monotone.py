"""Order-preservation conditions for finite-range exclusion rates.

A translation-invariant rate rule keeps the sitewise partial order between
two copies of the dynamics exactly when two families of local inequalities
hold, one governing arrivals at a site that is empty in the upper
configuration, one governing departures from a site that is occupied in the
lower configuration.  Both quantify over ordered pairs of local occupancy
patterns; because the rates are finite range, enumerating patterns on a
bounded window around the distinguished site is exhaustive.

The checks run exactly (no tolerance) when the spec's parameters are ints or
Fractions, and with an absolute tolerance of 1e-12 otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .models import RateSpec, span_rate

FLOAT_TOL = 1e-12

#: per-site occupancy pairs (lower, upper) compatible with the order
_ORDERED_SITE_VALUES = ((0, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class Violation:
    """One ordered pattern pair breaking an order condition."""

    kind: str  # "arrival" or "departure"
    center: int  # index of the distinguished site within the window
    lo: int  # offset of the leftmost window site relative to that site
    lower: str  # lower-configuration window pattern
    upper: str  # upper-configuration window pattern
    lhs: object
    rhs: object

    @property
    def excess(self):
        return self.lhs - self.rhs


@dataclass
class Verdict:
    monotone: bool
    witnesses: list
    window_radius: int


@dataclass
class StrictnessReport:
    """Slack accounting for the order conditions of a monotone spec.

    An instance is *binding* when its right side is positive; equalities of
    the form 0 <= 0 carry no active rate and are ignored.  ``strict`` holds
    when every binding instance has positive slack rhs - lhs.
    """

    strict: bool
    min_slack: object
    binding_count: int
    #: the smallest-slack binding instances, ascending
    worst: list = field(default_factory=list)


def _tolerance(spec: RateSpec, tol: Optional[float]) -> object:
    if tol is not None:
        return tol
    return 0 if spec.exact else FLOAT_TOL


def _arrival_sites(spec: RateSpec, extra: int) -> range:
    """Window offsets whose occupancies can enter the arrival condition at 0."""
    lo = min(-d - spec.window_halfwidth(d) for d in spec.jump_offsets)
    hi = max(-d + spec.window_halfwidth(d) for d in spec.jump_offsets)
    return range(min(lo, 0) - extra, max(hi, 0) + extra + 1)


def _departure_sites(spec: RateSpec, extra: int) -> range:
    """Window offsets entering the departure condition at 0."""
    w = max(spec.window_halfwidth(d) for d in spec.jump_offsets)
    return range(-w - extra, w + extra + 1)


def _ordered_pairs(sites: range, center_value: int):
    """All ordered pattern pairs on `sites`, with site 0 pinned to
    (center_value, center_value) in both configurations."""
    choices = [
        (((center_value, center_value),) if s == 0 else _ORDERED_SITE_VALUES)
        for s in sites
    ]
    for combo in itertools.product(*choices):
        lower = tuple(a for a, _ in combo)
        upper = tuple(b for _, b in combo)
        yield lower, upper


def _pattern(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def _arrival_sums(spec: RateSpec, lower, upper, lo: int):
    """Both sides of the arrival condition at site 0 (empty in `upper`)."""
    lhs = 0
    rhs = 0
    for d in spec.jump_offsets:
        x = -d
        i = x - lo
        if upper[i] == 0:
            continue
        g_up = span_rate(spec, upper, lo, x, d)
        if lower[i]:
            g_lo = span_rate(spec, lower, lo, x, d)
            if g_lo > g_up:
                lhs = lhs + (g_lo - g_up)
        else:
            rhs = rhs + g_up
    return lhs, rhs


def _departure_sums(spec: RateSpec, lower, upper, lo: int):
    """Both sides of the departure condition at site 0 (occupied in `lower`)."""
    lhs = 0
    rhs = 0
    for d in spec.jump_offsets:
        i = d - lo
        if upper[i] == 0:
            g_up = span_rate(spec, upper, lo, 0, d)
            g_lo = span_rate(spec, lower, lo, 0, d)
            if g_up > g_lo:
                lhs = lhs + (g_up - g_lo)
        elif lower[i] == 0:
            rhs = rhs + span_rate(spec, lower, lo, 0, d)
    return lhs, rhs


def _scan(spec: RateSpec, kind: str, extra: int, tol, collect_slack: bool):
    if kind == "arrival":
        sites = _arrival_sites(spec, extra)
        center_value = 0
        sums = _arrival_sums
    else:
        sites = _departure_sites(spec, extra)
        center_value = 1
        sums = _departure_sums
    lo = sites.start
    violations = []
    binding = []  # (slack, kind, lo, lower, upper, lhs, rhs)
    for lower, upper in _ordered_pairs(sites, center_value):
        lhs, rhs = sums(spec, lower, upper, lo)
        if lhs > rhs + tol:
            violations.append(
                Violation(kind, -lo, lo, _pattern(lower), _pattern(upper), lhs, rhs)
            )
        elif collect_slack and rhs > 0:
            binding.append((rhs - lhs, kind, lo, _pattern(lower), _pattern(upper), lhs, rhs))
    return violations, binding


def _sorted_violations(violations):
    return sorted(violations, key=lambda v: (-(v.lhs - v.rhs), v.kind, v.lower, v.upper))


def check_arrival_condition(spec: RateSpec, extra: int = 0, tol=None):
    """Violations of the arrival-side order condition (empty list = pass)."""
    violations, _ = _scan(spec, "arrival", extra, _tolerance(spec, tol), False)
    return _sorted_violations(violations)


def check_departure_condition(spec: RateSpec, extra: int = 0, tol=None):
    """Violations of the departure-side order condition."""
    violations, _ = _scan(spec, "departure", extra, _tolerance(spec, tol), False)
    return _sorted_violations(violations)


def is_monotone(spec: RateSpec, extra: int = 0, tol=None) -> Verdict:
    """Decide order preservation by exhaustive local-pattern enumeration."""
    t = _tolerance(spec, tol)
    v1, _ = _scan(spec, "arrival", extra, t, False)
    v2, _ = _scan(spec, "departure", extra, t, False)
    witnesses = _sorted_violations(v1 + v2)
    radius = 2 * (spec.max_offset + spec.dep_radius) + extra
    return Verdict(not witnesses, witnesses, radius)


def strictness_report(spec: RateSpec, extra: int = 0, tol=None, keep: int = 10) -> StrictnessReport:
    """Slack table of the order conditions.  Requires a monotone spec."""
    t = _tolerance(spec, tol)
    v1, b1 = _scan(spec, "arrival", extra, t, True)
    v2, b2 = _scan(spec, "departure", extra, t, True)
    if v1 or v2:
        raise ValueError("strictness_report requires a monotone spec; %s is not" % spec.name)
    binding = sorted(b1 + b2, key=lambda row: (row[0], row[1], row[3], row[4]))
    min_slack = binding[0][0] if binding else None
    strict = bool(binding) and min_slack > t
    return StrictnessReport(strict, min_slack, len(binding), binding[:keep])
