"""Homology of graph groupoids and the index map.

The zeroth homology of the groupoid is presented on one generator per
vertex with one relation per regular vertex v, namely g_v = sum of
g_{r(e)} over the edges e leaving v; its invariant factors come from the
Smith normal form of the relation matrix and the first homology is the
integer kernel of that matrix.

The AF kernel of the canonical cocycle and the skew product are handled
through a single atom calculus: an atom (v, n) is the class of any
cylinder over a length-n path ending at v (levels n >= 0 for the kernel
grading, n in Z for the skew grading). The only relations are the
forward rewrites (v, n) = sum over e of (r(e), n+1) at regular v, so the
group is the increasing union of its level-n stage groups. Atoms at
singular vertices admit no rewrite and generate free summands. Hence a
vector vanishes iff, after rewriting everything up to its top level, no
singular atom survives below the top and the top-level vertex vector is
annihilated by iterated pushing with singular coordinates zero at every
step; that is exactly membership in the eventual kernel of the pushdown
matrix. The endomorphism phi shifts atom levels by one; the first
homology embeds as the kernel of (id - phi), and the index of a table is
the alternating phi-sum over its graded partition.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .errors import (CriteriaFailed, MalformedGraph, NegativeLevel,
                     NotEssential, SourcePresent)
from .fullgroup import Element, graded_partition
from .graphs import Graph, validate
from .intlin import IntMatrix, Lattice, cokernel_invariants, eventual_kernel, kernel
from .pathspace import Clopen, path_range

KERNEL = "kernel"
SKEW = "skew"


@dataclass(frozen=True)
class ClassVector:
    """Finite integer combination of atoms (vertex, level)."""

    graph: Graph = field(repr=False)
    grading: str = KERNEL
    terms: tuple = ()  # sorted ((level, vertex), coeff) pairs, coeff != 0

    def __post_init__(self):
        if self.grading not in (KERNEL, SKEW):
            raise ValueError(f"unknown grading {self.grading!r}")
        if self.grading == KERNEL and any(l < 0 for (l, _), _ in self.terms):
            raise NegativeLevel("kernel grading has no negative levels")

    @classmethod
    def of(cls, g: Graph, items, grading=KERNEL) -> "ClassVector":
        acc = {}
        for (v, n), c in items:
            if v not in g.vertices:
                raise MalformedGraph(f"unknown vertex {v!r}")
            acc[(n, v)] = acc.get((n, v), 0) + c
        terms = tuple(sorted((k, c) for k, c in acc.items() if c != 0))
        return cls(g, grading, terms)

    @classmethod
    def zero(cls, g: Graph, grading=KERNEL) -> "ClassVector":
        return cls(g, grading, ())

    @classmethod
    def atom(cls, g: Graph, v: str, n: int, grading=KERNEL) -> "ClassVector":
        return cls.of(g, [((v, n), 1)], grading)

    def items(self):
        return [((v, n), c) for (n, v), c in self.terms]

    def add(self, other: "ClassVector") -> "ClassVector":
        if self.graph != other.graph or self.grading != other.grading:
            raise MalformedGraph("class vectors are not compatible")
        return ClassVector.of(self.graph, self.items() + other.items(), self.grading)

    def negate(self) -> "ClassVector":
        return ClassVector.of(self.graph, [(key, -x) for key, x in self.items()],
                              self.grading)

    def sub(self, other: "ClassVector") -> "ClassVector":
        return self.add(other.negate())

    def min_level(self):
        return min((n for (n, _), _ in self.terms), default=None)

    def max_level(self):
        return max((n for (n, _), _ in self.terms), default=None)

    def __str__(self):
        if not self.terms:
            return "0"
        return " ".join(f"({v},{n}):{c:+d}" for (n, v), c in self.terms)


def shift(c: ClassVector, m: int) -> ClassVector:
    """Apply phi^m: move every atom (v, n) to (v, n + m)."""
    if m != 0 and c.terms:
        lo = c.min_level()
        if c.grading == KERNEL and lo + m < 0:
            raise NegativeLevel(
                f"shift by {m} drops level {lo} below zero")
    return ClassVector.of(c.graph, [((v, n + m), x) for (v, n), x in c.items()],
                          c.grading)


def class_of(a: Clopen, grading=KERNEL) -> ClassVector:
    """Atom expansion of a compact open set.

    Each piece Z(mu \\ F) contributes the atom of its range vertex at
    level |mu| minus one atom per puncture one level deeper. Atoms (v, n)
    are meaningful for every n only when every vertex has an incoming
    edge, hence the no-sources requirement.
    """
    g = a.graph
    for v in sorted(g.vertices):
        if g._incoming[v] == 0:
            raise SourcePresent(f"vertex {v} is a source")
    items = []
    for p in a.pieces:
        items.append(((path_range(g, p.mu), len(p.mu)), 1))
        for e in p.punctures:
            items.append(((g.range(e), len(p.mu) + 1), -1))
    return ClassVector.of(g, items, grading)


@functools.lru_cache(maxsize=None)
def _pushdown(g: Graph) -> IntMatrix:
    """Matrix of one rewriting step on level vectors.

    Column v (regular) sends the unit vector to the edge-count vector of
    its successors; singular columns are zero since their atoms persist.
    """
    verts = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    rows = [[0] * len(verts) for _ in verts]
    for v in verts:
        if g.is_regular(v):
            for e in g.out_concrete(v):
                rows[idx[g.range(e)]][idx[v]] += 1
    return IntMatrix.from_rows(rows)


@functools.lru_cache(maxsize=None)
def _eventual_kernel_lattice(g: Graph, max_chain) -> Lattice:
    verts = sorted(g.vertices)
    forbidden = [i for i, v in enumerate(verts) if g.is_singular(v)]
    return eventual_kernel(_pushdown(g), forbidden, max_steps=max_chain)


def is_zero(c: ClassVector, max_chain=None) -> bool:
    """Decide whether the class vector vanishes in homology.

    Rewrites every regular atom upward to the top level; a surviving
    singular coefficient below the top witnesses nonvanishing, and the
    top-level vector is tested against the eventual kernel.
    """
    if not c.terms:
        return True
    g = c.graph
    verts = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    top = c.max_level()
    by_level = {}
    for (v, n), x in c.items():
        by_level.setdefault(n, {})[v] = by_level.setdefault(n, {}).get(v, 0) + x
    for n in range(c.min_level(), top):
        coeffs = by_level.get(n, {})
        for v in sorted(coeffs):
            x = coeffs[v]
            if x == 0:
                continue
            if g.is_singular(v):
                return False
            nxt = by_level.setdefault(n + 1, {})
            for e in g.out_concrete(v):
                w = g.range(e)
                nxt[w] = nxt.get(w, 0) + x
    z = [0] * len(verts)
    for v, x in by_level.get(top, {}).items():
        z[idx[v]] = x
    return _eventual_kernel_lattice(g, max_chain).contains(z)


def classes_equal(a: ClassVector, b: ClassVector, max_chain=None) -> bool:
    return is_zero(a.sub(b), max_chain=max_chain)


@dataclass(frozen=True)
class HomologyReport:
    h0_torsion: tuple
    h0_free_rank: int
    h1_rank: int
    h1_kernel_basis: tuple
    h0_tensor_z2_rank: int
    abelianization_note: str = ""

    def h0_text(self) -> str:
        parts = []
        if self.h0_free_rank:
            parts.append(f"Z^{self.h0_free_rank}")
        parts.extend(f"Z/{t}" for t in self.h0_torsion)
        return " + ".join(parts) if parts else "0"

    def h1_text(self) -> str:
        return f"Z^{self.h1_rank}" if self.h1_rank else "0"


def relation_matrix(g: Graph) -> IntMatrix:
    """One column per regular vertex v: delta_v minus its successor counts."""
    verts = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    cols = []
    for v in verts:
        if g.is_regular(v):
            col = [0] * len(verts)
            col[idx[v]] += 1
            for e in g.out_concrete(v):
                col[idx[g.range(e)]] -= 1
            cols.append(col)
    if not cols:
        return IntMatrix.zeros(len(verts), 0)
    return IntMatrix.from_rows(cols).transpose()


def homology(g: Graph) -> HomologyReport:
    """H0 as cokernel invariants, H1 as the kernel lattice.

    Sinks are allowed; they are singular and contribute no relation.
    Higher homology vanishes for every graph groupoid and is reported as
    a constant, never computed.
    """
    m = relation_matrix(g)
    torsion, free_rank = cokernel_invariants(m)
    ker = kernel(m)
    even = sum(1 for t in torsion if t % 2 == 0)
    return HomologyReport(tuple(torsion), free_rank, ker.rank, ker.basis,
                          free_rank + even)


def abelianization_report(g: Graph) -> HomologyReport:
    """Homology report extended with the abelianization bound.

    For graphs meeting the AH criteria the abelianization of the full
    group is Z^M plus an elementary 2-group of rank at most the 2-rank
    of H0, with M the rank of H1.
    """
    report = validate(g)
    if not report.ah_criteria:
        detail = "; ".join(f"{k}: {w}" for k, w in report.witnesses
                           if k in ("no_sinks", "condition_L", "cofinal",
                                    "reaches_all_infinite_emitters"))
        raise CriteriaFailed(detail or "graph fails the AH criteria")
    h = homology(g)
    m, nmax = h.h1_rank, h.h0_tensor_z2_rank
    if m == 0 and nmax == 0:
        note = "trivial"
    else:
        note = f"Z^{m} (+) (Z/2)^N, 0 <= N <= {nmax}"
    return HomologyReport(h.h0_torsion, h.h0_free_rank, h.h1_rank,
                          h.h1_kernel_basis, h.h0_tensor_z2_rank, note)


@dataclass(frozen=True)
class IndexValue:
    vector: ClassVector
    zero: bool


def _phi_term(part: Clopen, k: int) -> ClassVector:
    """phi^(k) applied to the class of a graded-partition part.

    For k < 0 the part is refined to depth |k| first; every refined piece
    then has depth at least |k| (a shallower stop at a singular vertex
    would put a finite boundary path inside the part, which the block
    structure rules out), so the negative shifts stay in the kernel
    grading.
    """
    if k == 0:
        return ClassVector.zero(part.graph)
    if k > 0:
        cls = class_of(part)
        total = ClassVector.zero(part.graph)
        for i in range(k):
            total = total.add(shift(cls, i))
        return total.negate()
    refined = part.refine_to(-k)
    assert all(len(p.mu) >= -k for p in refined.pieces)
    cls = class_of(refined)
    total = ClassVector.zero(part.graph)
    for i in range(k, 0):
        total = total.add(shift(cls, i))
    return total


def index(e: Element, max_chain=None) -> IndexValue:
    """Index class of a full-group element in the kernel grading.

    Requires an essential graph (no sinks, no sources). The result lies
    in the kernel of (id - phi), which is asserted, and the zero flag is
    the homology zero-test of the class.
    """
    g = e.graph
    report = validate(g)
    if not report.no_sinks or not report.no_sources:
        raise NotEssential("index needs a graph with no sinks and no sources")
    part = graded_partition(e)
    total = ClassVector.zero(g)
    for k, chunk in part.levels:
        total = total.add(_phi_term(chunk, k))
    assert is_zero(total.sub(shift(total, 1)), max_chain=max_chain)
    return IndexValue(total, is_zero(total, max_chain=max_chain))
