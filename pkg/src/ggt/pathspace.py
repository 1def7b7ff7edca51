"""Exact Boolean algebra of compact open subsets of the boundary path space.

A compact open set is a finite disjoint union of punctured cylinders
Z(mu \\ F): boundary paths extending mu but not continuing through any
edge of the finite set F. The canonical form keeps punctures only at
singular range vertices; at regular vertices a punctured cylinder is
split into the finitely many plain sub-cylinders, and complete sibling
families are merged back into their parent. The resulting piece list is
unique for a given set, so structural comparison decides set equality.

Boundary points are represented exactly: a finite prefix followed either
by a repeating cycle or by a stop at a singular vertex.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedGraph, ParseError
from .graphs import Graph, edge_key


@dataclass(frozen=True)
class Path:
    """Finite path: a base vertex and a composable tuple of edge names."""

    base: str
    edges: tuple = ()

    def __len__(self):
        return len(self.edges)

    def key(self):
        return (len(self.edges), tuple(edge_key(e) for e in self.edges), self.base)

    def extend(self, *edges):
        return Path(self.base, self.edges + tuple(edges))

    def cat(self, other: "Path"):
        return Path(self.base, self.edges + other.edges)

    def is_prefix_of(self, other: "Path") -> bool:
        return (self.base == other.base
                and other.edges[:len(self.edges)] == self.edges)

    def __str__(self):
        if not self.edges:
            return f"@{self.base}"
        return ".".join(self.edges)


def path_source(g: Graph, p: Path) -> str:
    return p.base


def path_range(g: Graph, p: Path) -> str:
    return g.range(p.edges[-1]) if p.edges else p.base


def check_path(g: Graph, p: Path):
    if p.base not in g.vertices:
        raise MalformedGraph(f"unknown vertex {p.base!r}")
    at = p.base
    for e in p.edges:
        if not g.is_edge(e) or g.source(e) != at:
            raise MalformedGraph(f"path {p} is not composable at {e!r}")
        at = g.range(e)
    return p


def paths_disjoint(a: Path, b: Path) -> bool:
    """Neither path is a subpath of the other (disjoint cylinders)."""
    return not a.is_prefix_of(b) and not b.is_prefix_of(a)


def make_path(g: Graph, base_or_edges, edges=None) -> Path:
    """Build and validate a path from a vertex plus edges, or edges alone."""
    if edges is None:
        edges = tuple(base_or_edges)
        if not edges:
            raise MalformedGraph("empty path needs an explicit base vertex")
        base = g.source(edges[0])
    else:
        base = base_or_edges
        edges = tuple(edges)
    return check_path(g, Path(base, edges))


@dataclass(frozen=True)
class Piece:
    """Punctured cylinder Z(mu \\ F); punctures stored sorted."""

    mu: Path
    punctures: tuple = ()

    def key(self):
        return (len(self.mu), tuple(edge_key(e) for e in self.mu.edges),
                tuple(edge_key(e) for e in self.punctures), self.mu.base)

    def depth(self):
        return len(self.mu) + (1 if self.punctures else 0)

    def __str__(self):
        if not self.punctures:
            return f"Z({self.mu})"
        return f"Z({self.mu} \\ {','.join(self.punctures)})"


def make_piece(g: Graph, mu: Path, punctures=()) -> Piece:
    check_path(g, mu)
    v = path_range(g, mu)
    punctures = tuple(sorted(set(punctures), key=edge_key))
    for e in punctures:
        if not g.is_edge(e) or g.source(e) != v:
            raise MalformedGraph(f"puncture {e!r} is not emitted by {v}")
    if g.is_regular(v) and set(punctures) >= set(g.out_concrete(v)):
        raise MalformedGraph("fully punctured regular cylinder is empty")
    return Piece(mu, punctures)


def piece_is_empty(g: Graph, p: Piece) -> bool:
    v = path_range(g, p.mu)
    if g.is_regular(v):
        return set(p.punctures) >= set(g.out_concrete(v))
    return False


def intersect_pieces(g: Graph, a: Piece, b: Piece):
    """Intersection of two pieces is empty or a single piece."""
    if a.mu.is_prefix_of(b.mu):
        shorter, longer = a, b
    elif b.mu.is_prefix_of(a.mu):
        shorter, longer = b, a
    else:
        return None
    if len(shorter.mu) == len(longer.mu):
        merged = tuple(sorted(set(a.punctures) | set(b.punctures), key=edge_key))
        p = Piece(a.mu, merged)
        return None if piece_is_empty(g, p) else p
    nxt = longer.mu.edges[len(shorter.mu)]
    if nxt in shorter.punctures:
        return None
    return None if piece_is_empty(g, longer) else longer


def subtract_piece(g: Graph, a: Piece, b: Piece):
    """Pieces of a minus b, pairwise disjoint, not canonicalized."""
    if intersect_pieces(g, a, b) is None:
        return [] if piece_is_empty(g, a) else [a]
    if b.mu.is_prefix_of(a.mu) and len(b.mu) < len(a.mu):
        # a sits strictly below b and meets it, hence a is inside b
        return []
    if a.mu == b.mu:
        out = []
        for e in b.punctures:
            if e not in a.punctures:
                out.append(Piece(a.mu.extend(e)))
        return out
    # b sits strictly below a: carve the route to b out of a, descending
    out = []
    cur = a
    rel = b.mu.edges[len(a.mu):]
    at = a.mu
    punct = set(a.punctures)
    for e in rel:
        keep = Piece(at, tuple(sorted(punct | {e}, key=edge_key)))
        if not piece_is_empty(g, keep):
            out.append(keep)
        at = at.extend(e)
        punct = set()
    # at == b.mu now; remove Z(b.mu \ F) from Z(b.mu)
    for e in b.punctures:
        out.append(Piece(at.extend(e)))
    return out


def _vertex_is_boundary(g: Graph, v: str) -> bool:
    return g.is_singular(v)


class _Node:
    __slots__ = ("punctures", "children")

    def __init__(self):
        self.punctures = None  # list of puncture sets of at-node pieces
        self.children = {}

    def child(self, e):
        if e not in self.children:
            self.children[e] = _Node()
        return self.children[e]


_FULL = object()


def canonicalize(g: Graph, pieces):
    """Canonical disjoint piece list of the union of the given pieces.

    Union semantics: input pieces may overlap. Punctures survive only at
    singular range vertices; complete sibling covers merge into their
    parent; puncture sets are minimal; output is sorted.
    """
    roots = {}
    for p in pieces:
        if piece_is_empty(g, p):
            continue
        node = roots.setdefault(p.mu.base, _Node())
        for e in p.mu.edges:
            node = node.child(e)
        if node.punctures is None:
            node.punctures = []
        node.punctures.append(frozenset(p.punctures))

    out = []

    def emit(mu: Path, node: _Node):
        """Return _FULL if the subtree covers Z(mu), else append pieces."""
        v = path_range(g, mu)
        at_node = None
        if node.punctures is not None:
            at_node = frozenset.intersection(*node.punctures)
        if at_node is not None:
            # coverage is Z(mu \ at_node) plus whatever fills the punctures
            residue = []
            eff = set(at_node)
            for e in sorted(at_node, key=edge_key):
                sub = node.children.get(e)
                if sub is None:
                    continue
                r = emit(mu.extend(e), sub)
                if r is _FULL:
                    eff.discard(e)
                else:
                    residue.extend(r)
            if not eff and (g.is_singular(v) or not g.out_concrete(v)):
                return _FULL
            if g.is_regular(v) and set(g.out_concrete(v)) <= eff:
                # fully punctured regular cylinder contributes nothing
                return residue
            if g.is_regular(v) and eff:
                # split the punctured regular piece into plain children
                for e in g.out_concrete(v):
                    if e not in eff:
                        residue.append(Piece(mu.extend(e)))
                return residue
            if not eff:
                return _FULL
            residue.insert(0, Piece(mu, tuple(sorted(eff, key=edge_key))))
            return residue
        # no at-node piece: coverage is the union of the child subtrees
        results = {}
        for e in sorted(node.children, key=edge_key):
            results[e] = emit(mu.extend(e), node.children[e])
        if (g.is_regular(v) and g.out_concrete(v)
                and set(results) == set(g.out_concrete(v))
                and all(r is _FULL for r in results.values())):
            return _FULL
        collected = []
        for e in sorted(results, key=edge_key):
            r = results[e]
            if r is _FULL:
                collected.append(Piece(mu.extend(e)))
            else:
                collected.extend(r)
        return collected

    for v in sorted(roots):
        r = emit(Path(v), roots[v])
        if r is _FULL:
            out.append(Piece(Path(v)))
        else:
            out.extend(r)
    return tuple(sorted(out, key=Piece.key))


@dataclass(frozen=True)
class Clopen:
    """Finite disjoint union of pieces over a fixed graph."""

    graph: Graph = field(repr=False)
    pieces: tuple = ()

    @classmethod
    def of(cls, g: Graph, pieces) -> "Clopen":
        pieces = [make_piece(g, p.mu, p.punctures) if isinstance(p, Piece) else p
                  for p in pieces]
        return cls(g, canonicalize(g, pieces))

    @classmethod
    def cylinder(cls, g: Graph, mu: Path, punctures=()) -> "Clopen":
        return cls(g, canonicalize(g, [make_piece(g, mu, punctures)]))

    @classmethod
    def empty(cls, g: Graph) -> "Clopen":
        return cls(g, ())

    @classmethod
    def full(cls, g: Graph) -> "Clopen":
        return cls(g, tuple(Piece(Path(v)) for v in sorted(g.vertices)))

    def _check_same_graph(self, other):
        if self.graph != other.graph:
            raise MalformedGraph("operands live over different graphs")

    def is_empty(self) -> bool:
        return not canonicalize(self.graph, self.pieces)

    def canonical(self) -> "Clopen":
        return Clopen(self.graph, canonicalize(self.graph, self.pieces))

    def intersect(self, other: "Clopen") -> "Clopen":
        self._check_same_graph(other)
        out = []
        for p in self.pieces:
            for q in other.pieces:
                r = intersect_pieces(self.graph, p, q)
                if r is not None:
                    out.append(r)
        return Clopen(self.graph, canonicalize(self.graph, out))

    def subtract(self, other: "Clopen") -> "Clopen":
        self._check_same_graph(other)
        out = []
        for p in self.pieces:
            parts = [p]
            for q in other.pieces:
                parts = [x for part in parts
                         for x in subtract_piece(self.graph, part, q)]
                if not parts:
                    break
            out.extend(parts)
        return Clopen(self.graph, canonicalize(self.graph, out))

    def union(self, other: "Clopen") -> "Clopen":
        self._check_same_graph(other)
        return Clopen(self.graph,
                      canonicalize(self.graph, self.pieces + other.pieces))

    def complement(self) -> "Clopen":
        return Clopen.full(self.graph).subtract(self)

    def equal(self, other: "Clopen") -> bool:
        self._check_same_graph(other)
        return (canonicalize(self.graph, self.pieces)
                == canonicalize(self.graph, other.pieces))

    def symmetric_difference_empty(self, other: "Clopen") -> bool:
        return self.subtract(other).is_empty() and other.subtract(self).is_empty()

    def refine_to(self, depth: int) -> "Clopen":
        """The same set with every regular-range piece split to the depth.

        Pieces whose range vertex is singular stop early and keep their
        punctures; the output is deliberately not re-merged.
        """
        out = []
        stack = list(self.pieces)
        while stack:
            p = stack.pop()
            v = path_range(self.graph, p.mu)
            if len(p.mu) >= depth or self.graph.is_singular(v):
                out.append(p)
                continue
            for e in self.graph.out_concrete(v):
                if e not in p.punctures:
                    stack.append(Piece(p.mu.extend(e)))
        return Clopen(self.graph, tuple(sorted(out, key=Piece.key)))

    def contains(self, x: "BoundaryPoint") -> bool:
        return any(piece_contains(self.graph, p, x) for p in self.pieces)

    def depth(self) -> int:
        return max((p.depth() for p in self.pieces), default=0)

    def __str__(self):
        if not self.pieces:
            return "0"
        return " + ".join(str(p) for p in self.pieces)


@dataclass(frozen=True)
class BoundaryPoint:
    """Eventually periodic boundary path: prefix plus cycle, or a stop.

    ``cycle=None`` encodes a finite boundary path ending at a singular
    vertex; otherwise the point is prefix followed by the cycle repeated
    forever. Construction normalizes to the unique minimal representative
    (primitive cycle, shortest prefix), so equality is structural.
    """

    prefix: Path
    cycle: tuple = None

    @staticmethod
    def at_singular(g: Graph, prefix: Path) -> "BoundaryPoint":
        check_path(g, prefix)
        if not g.is_singular(path_range(g, prefix)):
            raise MalformedGraph(f"path {prefix} does not end at a singular vertex")
        return BoundaryPoint(prefix, None)

    @staticmethod
    def periodic(g: Graph, prefix: Path, cycle) -> "BoundaryPoint":
        cycle = tuple(cycle)
        if not cycle:
            raise MalformedGraph("periodic tail needs a nonempty cycle")
        check_path(g, prefix)
        at = path_range(g, prefix)
        for e in cycle:
            if not g.is_edge(e) or g.source(e) != at:
                raise MalformedGraph("cycle is not composable with the prefix")
            at = g.range(e)
        if at != path_range(g, prefix):
            raise MalformedGraph("tail is not a cycle")
        prefix_edges = list(prefix.edges)
        cycle = list(cycle)
        # primitive cycle
        n = len(cycle)
        for d in range(1, n + 1):
            if n % d == 0 and cycle == cycle[:d] * (n // d):
                cycle = cycle[:d]
                break
        # absorb trailing prefix edges that already follow the cycle
        while prefix_edges and prefix_edges[-1] == cycle[-1]:
            prefix_edges.pop()
            cycle = [cycle[-1]] + cycle[:-1]
        return BoundaryPoint(Path(prefix.base, tuple(prefix_edges)), tuple(cycle))

    def edge_at(self, i: int):
        if i < len(self.prefix.edges):
            return self.prefix.edges[i]
        if self.cycle is None:
            return None
        return self.cycle[(i - len(self.prefix.edges)) % len(self.cycle)]

    def source(self) -> str:
        return self.prefix.base

    def is_finite(self) -> bool:
        return self.cycle is None

    def __str__(self):
        if self.cycle is None:
            return f"{self.prefix}"
        return f"{self.prefix}({'.'.join(self.cycle)})^inf"


def piece_contains(g: Graph, p: Piece, x: BoundaryPoint) -> bool:
    if x.source() != p.mu.base:
        return False
    for i, e in enumerate(p.mu.edges):
        if x.edge_at(i) != e:
            return False
    nxt = x.edge_at(len(p.mu))
    return nxt not in p.punctures if nxt is not None else True


def singleton_point(g: Graph, p: Piece):
    """The unique point of a one-point piece, else None.

    A piece is a single point iff the walk from its range vertex through
    forced out-edges reaches a sink or revisits a vertex without ever
    meeting a branching vertex or an infinite emitter. Punctures act only
    on the first step.
    """
    v = path_range(g, p.mu)
    walked = []
    banned = set(p.punctures)
    seen_at = {}
    while True:
        if g.is_infinite_emitter(v):
            return None
        if g.is_sink(v):
            return BoundaryPoint(p.mu.extend(*walked), None)
        options = [e for e in g.out_concrete(v) if e not in banned]
        banned = set()
        if len(options) != 1:
            return None
        if v in seen_at:
            i = seen_at[v]
            return BoundaryPoint.periodic(g, p.mu.extend(*walked[:i]),
                                          tuple(walked[i:]))
        seen_at[v] = len(walked)
        walked.append(options[0])
        v = g.range(options[0])


def strip_prefix(g: Graph, x: BoundaryPoint, mu: Path) -> BoundaryPoint:
    """The tail of x after removing the prefix mu (mu must be a prefix)."""
    for i, e in enumerate(mu.edges):
        if x.edge_at(i) != e:
            raise MalformedGraph(f"{mu} is not a prefix of {x}")
    n = len(mu)
    base = path_range(g, mu)
    if n <= len(x.prefix.edges):
        rest = Path(base, x.prefix.edges[n:])
        if x.cycle is None:
            return BoundaryPoint(rest, None)
        return BoundaryPoint.periodic(g, rest, x.cycle)
    k = (n - len(x.prefix.edges)) % len(x.cycle)
    rotated = x.cycle[k:] + x.cycle[:k]
    return BoundaryPoint.periodic(g, Path(base), rotated)


def prepend_prefix(g: Graph, mu: Path, x: BoundaryPoint) -> BoundaryPoint:
    if path_range(g, mu) != x.source():
        raise MalformedGraph("prefix does not compose with the point")
    joined = Path(mu.base, mu.edges + x.prefix.edges)
    if x.cycle is None:
        return BoundaryPoint(joined, None)
    return BoundaryPoint.periodic(g, joined, x.cycle)


# -- text syntax -------------------------------------------------------------

def parse_path(g: Graph, text: str) -> Path:
    text = text.strip()
    if text.startswith("@"):
        return check_path(g, Path(text[1:]))
    edges = tuple(part.strip() for part in text.split("."))
    if not edges or any(not e for e in edges):
        raise ParseError(f"cannot parse path {text!r}")
    for e in edges:
        if not g.is_edge(e):
            raise ParseError(f"unknown edge {e!r} in path {text!r}")
    return check_path(g, Path(g.source(edges[0]), edges))


def parse_piece(g: Graph, text: str) -> Piece:
    text = text.strip()
    if not (text.startswith("Z(") and text.endswith(")")):
        raise ParseError(f"cannot parse piece {text!r}")
    body = text[2:-1]
    if "\\" in body:
        mu_text, punct_text = body.split("\\", 1)
        punctures = [p.strip() for p in punct_text.split(",") if p.strip()]
    else:
        mu_text, punctures = body, []
    try:
        return make_piece(g, parse_path(g, mu_text), punctures)
    except MalformedGraph as exc:
        raise ParseError(str(exc)) from exc


def parse_clopen(g: Graph, text: str) -> Clopen:
    text = text.strip()
    if text == "0":
        return Clopen.empty(g)
    pieces = [parse_piece(g, part) for part in text.split("+")]
    return Clopen.of(g, pieces)
