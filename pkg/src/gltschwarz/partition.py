"""Contiguous overlapping partitions of ``{0, ..., d_n - 1}``.

Ranges are 0-based half-open ``(lo, hi)``.  :meth:`Partition.to_dict`
reports them 1-based and inclusive.
"""
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Partition",
    "NotAdmissible",
    "SubdomainOperators",
    "make_partition",
    "is_admissible",
    "operators",
    "SCHEMES",
]

SCHEMES = ("full", "restricted", "average")


class NotAdmissible(NamedTuple):
    """Returned instead of a partition when ``o > floor(d_n / nu)``."""

    d_n: int
    nu: int
    o: int

    @property
    def reason(self):
        return f"overlap {self.o} exceeds base subdomain size {self.d_n // self.nu}"

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Partition:
    d_n: int
    nu: int
    o: int
    splits: tuple
    extended: tuple
    restricted: tuple

    @property
    def strict(self):
        """Whether every index lies in at most two consecutive subdomains
        and no subdomain contains another (the strict ordering condition)."""
        ext = self.extended
        for i in range(self.nu - 1):
            if not (ext[i][0] < ext[i + 1][0] and ext[i][1] < ext[i + 1][1]):
                return False
        for i in range(self.nu - 2):
            if ext[i][1] > ext[i + 2][0]:
                return False
        return True

    def coverage(self):
        """Number of extended ranges containing each index."""
        c = np.zeros(self.d_n, dtype=int)
        for lo, hi in self.extended:
            c[lo:hi] += 1
        return c

    def to_dict(self):
        return {
            "d_n": self.d_n,
            "nu": self.nu,
            "o": self.o,
            "splits": list(self.splits),
            "extended": [[lo + 1, hi] for lo, hi in self.extended],
            "restricted": [[lo + 1, hi] for lo, hi in self.restricted],
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def is_admissible(d_n, nu, o):
    return 0 <= o <= d_n // nu


def make_partition(d_n, nu, o):
    """Split ``d_n`` indices into ``nu`` blocks and extend each by ``o``.

    The first ``d_n % nu`` blocks get one extra index.  Returns
    :class:`NotAdmissible` when ``o > floor(d_n / nu)``.
    """
    if d_n < 1 or nu < 1 or o < 0:
        raise ValueError("d_n and nu must be positive and o nonnegative")
    if nu > d_n:
        raise ValueError(f"nu={nu} exceeds d_n={d_n}")
    if not is_admissible(d_n, nu, o):
        return NotAdmissible(d_n, nu, o)
    base, rem = divmod(d_n, nu)
    sizes = [base + (i < rem) for i in range(nu)]
    splits = tuple(int(v) for v in np.concatenate([[0], np.cumsum(sizes)]))
    extended = tuple((max(0, splits[i] - o), min(d_n, splits[i + 1] + o)) for i in range(nu))
    restricted = tuple((splits[i], splits[i + 1]) for i in range(nu))
    return Partition(d_n, nu, o, splits, extended, restricted)


class SubdomainOperators(NamedTuple):
    """Index maps for gathers and weighted scatters.

    ``gather[i]`` is the extended range of subdomain ``i``.  The scatter
    of subdomain ``i`` writes ``weights[i] * local`` into ``gather[i]``;
    ``scatter[i]`` is the sub-range where the weight is nonzero.
    """

    scheme: str
    gather: tuple
    scatter: tuple
    weights: tuple

    def restrict(self, i, v):
        lo, hi = self.gather[i]
        return v[lo:hi]

    def weighted(self, i, local):
        """Return ``(lo, hi, values)``: the nonzero part of the scatter."""
        lo = self.gather[i][0]
        slo, shi = self.scatter[i]
        w = self.weights[i][slo - lo:shi - lo]
        part = local[slo - lo:shi - lo]
        if part.ndim > 1:
            w = w[:, None]
        return slo, shi, w * part

    def prolong(self, i, local, out):
        """Add the weighted scatter of ``local`` into ``out`` in place."""
        slo, shi, vals = self.weighted(i, local)
        out[slo:shi] += vals
        return out


def operators(p, scheme="full"):
    """Gather/scatter maps for a partition under a prolongation scheme."""
    if isinstance(p, NotAdmissible):
        raise ValueError(f"partition not admissible: {p.reason}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    cover = p.coverage()
    scatter, weights = [], []
    for (lo, hi), (rlo, rhi) in zip(p.extended, p.restricted):
        if scheme == "full":
            w = np.ones(hi - lo)
            scatter.append((lo, hi))
        elif scheme == "restricted":
            w = np.zeros(hi - lo)
            w[rlo - lo:rhi - lo] = 1.0
            scatter.append((rlo, rhi))
        else:
            w = 1.0 / cover[lo:hi]
            scatter.append((lo, hi))
        w.setflags(write=False)
        weights.append(w)
    return SubdomainOperators(scheme, p.extended, tuple(scatter), tuple(weights))
