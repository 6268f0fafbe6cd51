"""Ring configurations, the sitewise partial order, and discrepancy bookkeeping.

Configurations live on a periodic one-dimensional lattice of ``L`` sites and
are represented as plain tuples of 0/1 integers (site 0 first).  Tuples are
immutable and hashable, which makes state enumeration and memoisation cheap;
all operations here are pure functions.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

Config = tuple  # occupancy vector, entries in {0, 1}


class CoupledState(NamedTuple):
    """A pair of same-size configurations evolving under a coupling."""

    first: Config
    second: Config

    @property
    def discrepancies(self) -> int:
        return discrepancy_count(self.first, self.second)

    @property
    def ordered(self) -> bool:
        return is_ordered(self.first, self.second)


def as_config(bits: Iterable[int]) -> Config:
    """Validate and freeze an occupancy sequence."""
    eta = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in eta):
        raise ValueError("occupancies must be 0 or 1, got %r" % (eta,))
    return eta


def parse_configuration(text: str) -> Config:
    """Parse a '0'/'1' string, site 0 leftmost (e.g. "1010")."""
    if not text or any(c not in "01" for c in text):
        raise ValueError("configuration string must be nonempty over '0'/'1': %r" % text)
    return tuple(1 if c == "1" else 0 for c in text)


def format_configuration(eta: Config) -> str:
    return "".join("1" if b else "0" for b in eta)


def apply_jump(eta: Config, x: int, y: int) -> Config:
    """Exchange the occupancies at sites x and y (a particle jump when
    eta[x]=1 and eta[y]=0; an involution in general)."""
    size = len(eta)
    if not (0 <= x < size and 0 <= y < size):
        raise IndexError("jump sites (%d, %d) out of range for L=%d" % (x, y, size))
    if x == y:
        raise ValueError("jump endpoints must differ")
    out = list(eta)
    out[x], out[y] = out[y], out[x]
    return tuple(out)


def _check_sizes(xi: Config, zeta: Config) -> None:
    if len(xi) != len(zeta):
        raise ValueError("size mismatch: %d vs %d" % (len(xi), len(zeta)))


def leq(xi: Config, zeta: Config) -> bool:
    """Sitewise partial order: True iff xi(x) <= zeta(x) everywhere."""
    _check_sizes(xi, zeta)
    return all(a <= b for a, b in zip(xi, zeta))


def is_ordered(xi: Config, zeta: Config) -> bool:
    """True iff the pair is comparable (either leq(xi,zeta) or leq(zeta,xi))."""
    _check_sizes(xi, zeta)
    below = above = True
    for a, b in zip(xi, zeta):
        if a > b:
            below = False
        elif a < b:
            above = False
    return below or above


def discrepancy_count(xi: Config, zeta: Config) -> int:
    """Number of sites where the two configurations disagree."""
    _check_sizes(xi, zeta)
    return sum(a != b for a, b in zip(xi, zeta))


def join(xi: Config, zeta: Config) -> Config:
    """Sitewise maximum; the smallest configuration above both."""
    _check_sizes(xi, zeta)
    return tuple(a | b for a, b in zip(xi, zeta))


def signed_offset(x: int, y: int, size: int) -> int:
    """Displacement y - x reduced to the representative range (-L/2, L/2]."""
    d = (y - x) % size
    if d > size // 2:
        d -= size
    return d


def config_to_int(eta: Config) -> int:
    """Pack occupancies into an integer (site k -> bit k)."""
    out = 0
    for k, b in enumerate(eta):
        if b:
            out |= 1 << k
    return out


def int_to_config(bits: int, size: int) -> Config:
    return tuple((bits >> k) & 1 for k in range(size))
