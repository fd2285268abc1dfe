"""Finite hypercubic qudit lattices and the A / a / b / B region calculus."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

Site = tuple[int, ...]

OPEN = "open"
PERIODIC = "periodic"


class RegionPartition(NamedTuple):
    """Disjoint split of the lattice around a region ``A``.

    ``a`` holds sites within distance ``r`` of ``A``, ``b`` the sites at
    distance ``r < delta <= 2r`` and ``B`` everything else.
    """

    A: tuple[Site, ...]
    a: tuple[Site, ...]
    b: tuple[Site, ...]
    B: tuple[Site, ...]

    @property
    def A_bar(self) -> tuple[Site, ...]:
        return tuple(sorted(self.A + self.a))

    @property
    def B_bar(self) -> tuple[Site, ...]:
        return tuple(sorted(self.B + self.b))

    @property
    def in_S(self) -> bool:
        return len(self.B) > 0


@dataclass(frozen=True)
class Lattice:
    """A ``d_L``-dimensional grid of ``M**d_L`` qudits of local dimension ``d``.

    Sites are coordinate tuples ordered row-major; this order fixes the
    tensor-product order everywhere else in the package.
    """

    d_L: int
    M: int
    d: int = 2
    boundary: str = OPEN
    r: int = 1

    def __post_init__(self):
        if self.d_L < 1 or self.M < 1 or self.r < 1:
            raise ValueError("d_L, M and r must be positive integers")
        if self.d < 2:
            raise ValueError("local dimension d must be at least 2")
        if self.boundary not in (OPEN, PERIODIC):
            raise ValueError(f"unknown boundary condition {self.boundary!r}")
        if self.boundary == PERIODIC and 4 * self.r > self.M:
            raise ValueError(
                f"periodic lattices need r <= M/4 (got r={self.r}, M={self.M})"
            )

    @property
    def N(self) -> int:
        return self.M**self.d_L

    @property
    def z(self) -> int:
        return 2 * self.d_L

    @cached_property
    def sites(self) -> tuple[Site, ...]:
        return tuple(itertools.product(range(self.M), repeat=self.d_L))

    @cached_property
    def index(self) -> dict[Site, int]:
        return {s: i for i, s in enumerate(self.sites)}

    @cached_property
    def edges(self) -> tuple[tuple[Site, Site], ...]:
        out = set()
        for s in self.sites:
            for axis in range(self.d_L):
                t = list(s)
                t[axis] += 1
                if t[axis] == self.M:
                    if self.boundary == OPEN:
                        continue
                    t[axis] = 0
                t = tuple(t)
                if t != s:
                    out.add(tuple(sorted((s, t))))
        return tuple(sorted(out))

    def site(self, n) -> Site:
        """Normalize ``n`` (int for 1D lattices, or a coordinate) to a site tuple."""
        if isinstance(n, (int,)) or (hasattr(n, "__index__") and not isinstance(n, tuple)):
            n = (int(n),)
        n = tuple(int(x) for x in n)
        if len(n) != self.d_L or any(x < 0 or x >= self.M for x in n):
            raise ValueError(f"coordinate {n} out of range for {self}")
        return n

    def region(self, sites: Iterable) -> tuple[Site, ...]:
        return tuple(sorted({self.site(n) for n in sites}))

    def distance(self, n, m) -> int:
        n, m = self.site(n), self.site(m)
        total = 0
        for x, y in zip(n, m):
            delta = abs(x - y)
            if self.boundary == PERIODIC:
                delta = min(delta, self.M - delta)
            total += delta
        return total

    def region_distance(self, n, A: Iterable) -> int:
        return min(self.distance(n, m) for m in A)

    def neighborhood(self, A: Iterable, radius: int) -> tuple[Site, ...]:
        """Sites outside ``A`` within ``radius`` of it."""
        A = set(self.region(A))
        return tuple(
            s for s in self.sites if s not in A and self.region_distance(s, A) <= radius
        )

    def ball(self, n, radius: int | None = None) -> tuple[Site, ...]:
        radius = self.r if radius is None else radius
        n = self.site(n)
        return tuple(s for s in self.sites if self.distance(n, s) <= radius)

    def partition(self, A: Iterable) -> RegionPartition:
        A = self.region(A)
        if not A:
            raise ValueError("region A must be non-empty")
        a = self.neighborhood(A, self.r)
        a2 = self.neighborhood(A, 2 * self.r)
        b = tuple(s for s in a2 if s not in set(a))
        taken = set(A) | set(a) | set(b)
        B = tuple(s for s in self.sites if s not in taken)
        return RegionPartition(A, a, b, B)

    def in_S(self, A: Iterable) -> bool:
        return self.partition(A).in_S

    def boundary_size(self, A: Iterable) -> int:
        """Number of edges with exactly one endpoint in ``A``."""
        A = set(self.region(A))
        return sum((s in A) != (t in A) for s, t in self.edges)

    def enumerate_S(self, max_size: int) -> list[tuple[Site, ...]]:
        if max_size < 1:
            raise ValueError("max_size must be >= 1")
        found = []
        for k in range(1, min(max_size, self.N) + 1):
            for A in itertools.combinations(self.sites, k):
                if self.in_S(A):
                    found.append(A)
        return sorted(found)

    def blocks(self) -> list[tuple[Site, ...]]:
        """All proper contiguous boxes (wrapping around under periodic boundaries)."""
        starts = range(self.M)
        lengths = range(1, self.M + 1)
        seen = set()
        for corner in itertools.product(starts, repeat=self.d_L):
            for shape in itertools.product(lengths, repeat=self.d_L):
                if self.boundary == OPEN and any(
                    c + L > self.M for c, L in zip(corner, shape)
                ):
                    continue
                box = tuple(
                    sorted(
                        tuple((c + o) % self.M for c, o in zip(corner, offs))
                        for offs in itertools.product(*(range(L) for L in shape))
                    )
                )
                if len(box) < self.N:
                    seen.add(box)
        return sorted(seen, key=lambda box: (len(box), box))

    def translate(self, A: Iterable, shift) -> tuple[Site, ...]:
        shift = tuple(shift) if not isinstance(shift, int) else (shift,)
        return tuple(
            sorted(
                tuple((x + t) % self.M for x, t in zip(s, shift)) for s in self.region(A)
            )
        )

    def to_dict(self) -> dict:
        return {"d_L": self.d_L, "M": self.M, "d": self.d, "boundary": self.boundary, "r": self.r}

    def with_size(self, M: int) -> "Lattice":
        return Lattice(self.d_L, M, self.d, self.boundary, self.r)


_DIM_RE = re.compile(r"^(\d+)d$", re.IGNORECASE)


def parse_lattice(spec) -> Lattice:
    """Build a lattice from a dict or a compact string such as ``"1d,M=4,open"``.

    >>> parse_lattice("2d,M=4,periodic,d=3").to_dict()["boundary"]
    'periodic'
    """
    if isinstance(spec, Lattice):
        return spec
    if isinstance(spec, dict):
        return Lattice(
            d_L=int(spec.get("d_L", 1)),
            M=int(spec["M"]),
            d=int(spec.get("d", 2)),
            boundary=str(spec.get("boundary", OPEN)),
            r=int(spec.get("r", 1)),
        )
    fields = {"d_L": 1, "d": 2, "boundary": OPEN, "r": 1}
    for token in str(spec).replace(" ", "").split(","):
        if not token:
            continue
        m = _DIM_RE.match(token)
        if m:
            fields["d_L"] = int(m.group(1))
        elif token.lower() in (OPEN, PERIODIC):
            fields["boundary"] = token.lower()
        elif "=" in token:
            key, value = token.split("=", 1)
            if key not in ("M", "d", "r", "d_L", "boundary"):
                raise ValueError(f"unknown lattice field {key!r}")
            fields[key] = value if key == "boundary" else int(value)
        else:
            raise ValueError(f"cannot parse lattice token {token!r}")
    if "M" not in fields:
        raise ValueError(f"lattice spec {spec!r} does not set M")
    return parse_lattice(fields)
