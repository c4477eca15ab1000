"""Finite groups and the gradings they induce on M_n, with homogeneity tests for superoperators.

Groups are explicit multiplication tables over the indices ``0..m-1``. A
grading assigns each standard basis vector ``e_i`` of C^n a group element
``s_i``; matrix units then get degrees

    LEFT:  deg E_pq = s_p s_q^-1
    RIGHT: deg E_pq = s_p^-1 s_q

For the regular representation (n = |G|, s_i = i) left translation by g is
LEFT-homogeneous of degree g, while its entrywise conjugate is generally not
RIGHT-homogeneous, yet conjugation by it is a RIGHT-graded map.
"""

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import IndexOutOfRange
from .linalg import Backend, DEFAULT_TOL


@dataclass(frozen=True)
class FiniteGroup:
    table: tuple
    names: tuple = None

    def __post_init__(self):
        table = tuple(tuple(int(v) for v in row) for row in self.table)
        m = len(table)
        if m == 0 or any(len(row) != m for row in table):
            raise ValueError("multiplication table must be square and nonempty")
        if any(not 0 <= v < m for row in table for v in row):
            raise ValueError("table entries must be element indices")
        object.__setattr__(self, "table", table)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != m:
                raise ValueError("need one name per element")
            object.__setattr__(self, "names", names)
        ident = [e for e in range(m) if all(table[e][g] == g == table[g][e] for g in range(m))]
        if len(ident) != 1:
            raise ValueError("table has no two-sided identity")
        object.__setattr__(self, "identity", ident[0])
        inv = []
        for g in range(m):
            hs = [h for h in range(m) if table[g][h] == ident[0] == table[h][g]]
            if len(hs) != 1:
                raise ValueError(f"element {g} has no two-sided inverse")
            inv.append(hs[0])
        object.__setattr__(self, "inverse", tuple(inv))
        for a, b, c in itertools.product(range(m), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise ValueError(f"not associative at ({a}, {b}, {c})")

    @property
    def order(self):
        return len(self.table)

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self.inverse[a]

    def is_central(self, g):
        return all(self.table[g][h] == self.table[h][g] for h in range(self.order))

    def is_abelian(self):
        return all(self.is_central(g) for g in range(self.order))

    def name(self, g):
        return self.names[g] if self.names else str(g)

    def to_json(self):
        out = {"order": self.order, "table": [list(r) for r in self.table]}
        if self.names:
            out["names"] = list(self.names)
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(obj["table"], obj.get("names"))


def from_permutations(perms, names=None):
    """Group whose elements are the given permutations (tuples), closed under composition."""
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(a[b[k]] for k in range(len(b)))] for b in perms] for a in perms]
    return FiniteGroup(table, names)


def cyclic(m):
    return FiniteGroup([[(a + b) % m for b in range(m)] for a in range(m)], [f"r{k}" for k in range(m)])


def symmetric(k):
    perms = sorted(itertools.permutations(range(k)))
    return from_permutations(perms, ["".join(str(v + 1) for v in p) for p in perms])


def s3():
    return symmetric(3)


def s4():
    return symmetric(4)


def dihedral(m):
    """Symmetries of a regular m-gon, order 2m."""
    rots = [tuple((i + r) % m for i in range(m)) for r in range(m)]
    refl = [tuple((r - i) % m for i in range(m)) for r in range(m)]
    names = [f"r{r}" for r in range(m)] + [f"s{r}" for r in range(m)]
    return from_permutations(rots + refl, names)


def d4():
    return dihedral(4)


_QUAT = {
    ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
    ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
    ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
    ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
}


def q8():
    elems = [(s, u) for s in (1, -1) for u in "1ijk"]
    index = {e: i for i, e in enumerate(elems)}
    table = []
    for s1, u1 in elems:
        row = []
        for s2, u2 in elems:
            s, u = _QUAT[(u1, u2)]
            row.append(index[(s1 * s2 * s, u)])
        table.append(row)
    return FiniteGroup(table, [("" if s > 0 else "-") + u for s, u in elems])


BUILTIN_GROUPS = {"Z2": lambda: cyclic(2), "Z3": lambda: cyclic(3), "Z4": lambda: cyclic(4),
                  "S3": s3, "S4": s4, "D4": d4, "Q8": q8}


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Grading:
    group: FiniteGroup
    degrees: tuple
    side: Side = Side.LEFT

    def __post_init__(self):
        degrees = tuple(int(s) for s in self.degrees)
        if any(not 0 <= s < self.group.order for s in degrees):
            raise IndexOutOfRange("basis degree outside the group")
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def regular(cls, group, side=Side.LEFT):
        """C^n = CG with ``e_g`` of degree ``g``."""
        return cls(group, tuple(range(group.order)), side)

    @property
    def n(self):
        return len(self.degrees)

    def unit_degree(self, p, q):
        g = self.group
        sp, sq = self.degrees[p], self.degrees[q]
        if self.side == Side.LEFT:
            return g.mul(sp, g.inv(sq))
        return g.mul(g.inv(sp), sq)


class _EveryDegree:
    """Sentinel: the zero matrix is homogeneous of every degree."""

    def __repr__(self):
        return "EVERY_DEGREE"


EVERY_DEGREE = _EveryDegree()


def left_translation(group, g, backend=Backend.FLOAT):
    """Permutation matrix ``e_h ↦ e_{gh}`` on CG."""
    if not 0 <= g < group.order:
        raise IndexOutOfRange(f"element {g} not in a group of order {group.order}")
    m = group.order
    out = la.zeros((m, m), backend)
    one = la.eye(1, backend)[0, 0]
    for h in range(m):
        out[group.mul(g, h), h] = one
    return out


def _support(x, tol):
    x = np.asarray(x)
    if x.dtype == object:
        return [(p, q) for (p, q), z in np.ndenumerate(x) if z]
    cutoff = tol.rank_rel_tol * max(1.0, float(np.abs(x).max(initial=0.0)))
    return [tuple(int(i) for i in pq) for pq in np.argwhere(np.abs(x) > cutoff)]


def homogeneous_degree(x, grading, tol=DEFAULT_TOL):
    """The degree of ``x`` if homogeneous, ``EVERY_DEGREE`` for zero, else ``None``."""
    degrees = {grading.unit_degree(p, q) for p, q in _support(x, tol)}
    if not degrees:
        return EVERY_DEGREE
    return degrees.pop() if len(degrees) == 1 else None


@dataclass(frozen=True)
class GradedCheck:
    graded: bool
    witness: tuple = None  # matrix unit (p, q) whose image leaves degree deg(E_pq)
    image_degree: object = None

    def __bool__(self):
        return self.graded


def is_graded_superop(phi, grading, tol=DEFAULT_TOL):
    """Whether ``phi`` maps every degree-δ matrix unit to a degree-δ element (or zero)."""
    if phi.n != grading.n:
        raise la.DimensionMismatch(f"superoperator on M_{phi.n}, grading on C^{grading.n}")
    images = phi.unit_images()
    for p in range(phi.n):
        for q in range(phi.n):
            deg = homogeneous_degree(images[p, q], grading, tol)
            if deg is EVERY_DEGREE:
                continue
            if deg != grading.unit_degree(p, q):
                return GradedCheck(False, (p, q), deg)
    return GradedCheck(True)
