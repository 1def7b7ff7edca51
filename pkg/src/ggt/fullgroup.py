"""Topological full group elements as finite bisection tables.

An element is a finite list of blocks (mu, F, nu) with a common range
vertex per block: the block maps the source cylinder Z(nu \\ F) onto the
range cylinder Z(mu \\ F) by exchanging the prefix nu for mu. Source
pieces are pairwise disjoint, range pieces are pairwise disjoint, and
both unions agree (the carrier); the element acts as the identity off
the carrier. Normalization drops blocks that act as the identity, which
makes the carrier coincide with the support, i.e. the closure of the
moved points. That identification is exact for effective graph
groupoids, where supports of full-group elements are clopen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (CarrierMismatch, MalformedGraph, OverlappingSourceRange,
                     ParseError, RangesOverlap, SourcesOverlap)
from .graphs import Graph, edge_key
from .pathspace import (BoundaryPoint, Clopen, Path, Piece, canonicalize,
                        check_path, intersect_pieces, make_piece, parse_path,
                        path_range, piece_contains, piece_is_empty,
                        prepend_prefix, singleton_point, strip_prefix,
                        subtract_piece)


@dataclass(frozen=True)
class Block:
    """One table entry: maps Z(nu \\ F) onto Z(mu \\ F) by prefix exchange."""

    mu: Path
    punctures: tuple
    nu: Path

    def source_piece(self) -> Piece:
        return Piece(self.nu, self.punctures)

    def range_piece(self) -> Piece:
        return Piece(self.mu, self.punctures)

    def lag(self) -> int:
        return len(self.mu) - len(self.nu)

    def inverse(self) -> "Block":
        return Block(self.nu, self.punctures, self.mu)

    def key(self):
        return self.source_piece().key() + self.range_piece().key()

    def __str__(self):
        punct = ",".join(self.punctures) if self.punctures else "-"
        return f"block {self.mu} | {punct} | {self.nu}"


def make_block(g: Graph, mu: Path, punctures, nu: Path) -> Block:
    check_path(g, mu)
    check_path(g, nu)
    if path_range(g, mu) != path_range(g, nu):
        raise MalformedGraph(
            f"block paths {mu} and {nu} end at different vertices")
    punctures = tuple(sorted(set(punctures), key=edge_key))
    make_piece(g, nu, punctures)
    return Block(mu, punctures, nu)


@dataclass(frozen=True)
class Element:
    """Normalized full-group element over a fixed graph."""

    graph: Graph = field(repr=False)
    blocks: tuple = ()

    @classmethod
    def identity(cls, g: Graph) -> "Element":
        return cls(g, ())

    def is_identity(self) -> bool:
        return not self.blocks

    def max_depth(self) -> int:
        return max((max(len(b.mu), len(b.nu)) + (1 if b.punctures else 0)
                    for b in self.blocks), default=0)

    def carrier(self) -> Clopen:
        return Clopen(self.graph,
                      canonicalize(self.graph,
                                   [b.source_piece() for b in self.blocks]))

    def __str__(self):
        return "\n".join(str(b) for b in self.blocks)


def _block_is_identity(g: Graph, b: Block) -> bool:
    """True when the block fixes every point of its source piece.

    This happens when both paths agree, or when the source piece is a
    single point left fixed by the prefix exchange. Without the singleton
    rule the support of an element would overstate its moved set.
    """
    if b.mu == b.nu:
        return True
    if len(b.mu) == len(b.nu):
        return False
    pt = singleton_point(g, b.source_piece())
    if pt is None:
        return False
    image = prepend_prefix(g, b.mu, strip_prefix(g, pt, b.nu))
    return image == pt


def _merge_blocks(g: Graph, blocks):
    """Merge split siblings back together; the table map is unchanged.

    Rules, applied to a fixed point: a punctured block (mu, F + {e}, nu)
    absorbs the plain block (mu.e, {}, nu.e); a complete family of plain
    sibling blocks (mu.e, {}, nu.e) over a regular range collapses to
    (mu, {}, nu).
    """
    blocks = list(blocks)
    changed = True
    while changed:
        changed = False
        by_paths = {(b.mu, b.nu): b for b in blocks}
        # absorb a plain child into a punctured parent
        for b in blocks:
            if not b.punctures:
                continue
            for e in b.punctures:
                child = by_paths.get((b.mu.extend(e), b.nu.extend(e)))
                if child is not None and not child.punctures:
                    rest = tuple(x for x in b.punctures if x != e)
                    blocks.remove(b)
                    blocks.remove(child)
                    blocks.append(Block(b.mu, rest, b.nu))
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        # collapse a complete regular family of plain children
        parents = {}
        for b in blocks:
            if b.punctures or not b.mu.edges or not b.nu.edges:
                continue
            if b.mu.edges[-1] != b.nu.edges[-1]:
                continue
            stem = (Path(b.mu.base, b.mu.edges[:-1]),
                    Path(b.nu.base, b.nu.edges[:-1]))
            parents.setdefault(stem, {})[b.mu.edges[-1]] = b
        for (mu, nu), kids in parents.items():
            v = path_range(g, mu)
            if path_range(g, nu) != v or not g.is_regular(v):
                continue
            out = g.out_concrete(v)
            if set(kids) == set(out) and out:
                for b in kids.values():
                    blocks.remove(b)
                blocks.append(Block(mu, (), nu))
                changed = True
                break
    return blocks


def _find_overlap(g: Graph, pieces):
    """Indices of two overlapping pieces, or None.

    Two pieces meet only when one path is a prefix of the other, so a
    dictionary over paths plus a walk along each piece's proper prefixes
    decides disjointness in time linear in total path length.
    """
    by_path = {}
    for i, p in enumerate(pieces):
        key = (p.mu.base, p.mu.edges)
        for j in by_path.get(key, ()):
            if intersect_pieces(g, pieces[j], p) is not None:
                return j, i
        by_path.setdefault(key, []).append(i)
    for i, p in enumerate(pieces):
        for cut in range(len(p.mu.edges)):
            key = (p.mu.base, p.mu.edges[:cut])
            for j in by_path.get(key, ()):
                if p.mu.edges[cut] not in pieces[j].punctures:
                    return j, i
    return None


def _check_table(g: Graph, blocks):
    """Disjointness and carrier axioms for a list of valid blocks."""
    live = [b for b in blocks if not piece_is_empty(g, b.source_piece())]
    hit = _find_overlap(g, [b.source_piece() for b in live])
    if hit is not None:
        raise SourcesOverlap(
            f"blocks [{live[hit[0]]}] and [{live[hit[1]]}] have overlapping sources")
    hit = _find_overlap(g, [b.range_piece() for b in live])
    if hit is not None:
        raise RangesOverlap(
            f"blocks [{live[hit[0]]}] and [{live[hit[1]]}] have overlapping ranges")
    src = Clopen(g, canonicalize(g, [b.source_piece() for b in live]))
    rng = Clopen(g, canonicalize(g, [b.range_piece() for b in live]))
    if not src.equal(rng):
        raise CarrierMismatch(
            f"source union {src} differs from range union {rng}")
    return live


def _normalize_table(g: Graph, live) -> Element:
    kept = [b for b in live if not _block_is_identity(g, b)]
    kept = _merge_blocks(g, kept)
    kept = [b for b in kept if not _block_is_identity(g, b)]
    return Element(g, tuple(sorted(kept, key=Block.key)))


def validate_element(g: Graph, blocks) -> Element:
    """Check the table axioms and return the normalized element.

    Raises SourcesOverlap / RangesOverlap / CarrierMismatch naming the
    offending blocks. Normalization drops empty-source and identity
    blocks, merges split siblings and sorts canonically.
    """
    checked = [make_block(g, b.mu, b.punctures, b.nu) for b in blocks]
    return _normalize_table(g, _check_table(g, checked))


def apply(e: Element, x: BoundaryPoint) -> BoundaryPoint:
    """Image of the boundary point under the element."""
    for b in e.blocks:
        if piece_contains(e.graph, b.source_piece(), x):
            return prepend_prefix(e.graph, b.mu, strip_prefix(e.graph, x, b.nu))
    return x


def inverse(e: Element) -> Element:
    return Element(e.graph, tuple(sorted((b.inverse() for b in e.blocks),
                                         key=Block.key)))


def _restrict_block_to_range(g: Graph, b: Block, piece: Piece) -> Block:
    """Restriction of b whose range piece is the given sub-piece."""
    lam = piece.mu.edges[len(b.mu):]
    return Block(piece.mu, piece.punctures, Path(b.nu.base, b.nu.edges + lam))


def _totalize(e: Element):
    """Table blocks plus identity blocks covering the carrier complement."""
    blocks = list(e.blocks)
    for p in e.carrier().complement().pieces:
        blocks.append(Block(p.mu, p.punctures, p.mu))
    return blocks


def compose(f: Element, g_elt: Element) -> Element:
    """The element acting as x -> f(g(x)).

    Every pair of a g-block range piece and an f-block source piece meets
    in at most one piece; restricting g's block to it and fusing with f's
    prefix exchange yields one block of the product. Identity blocks over
    the carrier complements make both tables total, so the pieces cover
    everything exactly once.
    """
    if f.graph != g_elt.graph:
        raise MalformedGraph("operands live over different graphs")
    graph = f.graph
    out = []
    f_total = _totalize(f)
    g_total = _totalize(g_elt)
    bound = f.max_depth() + g_elt.max_depth() + 1
    for bg in g_total:
        for bf in f_total:
            piece = intersect_pieces(graph, bg.range_piece(), bf.source_piece())
            if piece is None:
                continue
            mid = _restrict_block_to_range(graph, bg, piece)
            rho = piece.mu.edges[len(bf.nu):]
            fused = Block(Path(bf.mu.base, bf.mu.edges + rho),
                          mid.punctures, mid.nu)
            assert max(len(fused.mu), len(fused.nu)) <= bound
            out.append(fused)
    # fused paths are concatenations of already validated paths, so the
    # per-block path walk of validate_element is skipped here
    return _normalize_table(graph, _check_table(graph, out))


def compose_all(factors) -> Element:
    """Ordered product: the first factor is applied last."""
    factors = list(factors)
    if not factors:
        raise ValueError("compose_all needs at least one element")
    acc = factors[-1]
    for f in reversed(factors[:-1]):
        acc = compose(f, acc)
    return acc


def same_action(f: Element, g_elt: Element) -> bool:
    """Equality as homeomorphisms: f g^{-1} normalizes to the identity."""
    return compose(f, inverse(g_elt)).is_identity()


def support(e: Element) -> Clopen:
    """Union of the source pieces of the (normalized) non-identity blocks."""
    return Clopen(e.graph,
                  canonicalize(e.graph, [b.source_piece() for b in e.blocks]))


def image_of(e: Element, a: Clopen) -> Clopen:
    """Exact image e(a) computed blockwise."""
    if a.graph != e.graph:
        raise MalformedGraph("operands live over different graphs")
    g = e.graph
    pieces = []
    for p in a.pieces:
        remaining = [p]
        for b in e.blocks:
            hit = intersect_pieces(g, p, b.source_piece())
            if hit is None:
                continue
            lam = hit.mu.edges[len(b.nu):]
            pieces.append(Piece(Path(b.mu.base, b.mu.edges + lam), hit.punctures))
            nxt = []
            for r in remaining:
                nxt.extend(subtract_piece(g, r, b.source_piece()))
            remaining = nxt
        pieces.extend(remaining)  # identity region
    return Clopen(g, canonicalize(g, pieces))


@dataclass(frozen=True)
class GradedPartition:
    """Clopen partition of the unit space by lag; finitely many parts."""

    ambient: Clopen
    levels: tuple  # ordered (k, Clopen) pairs, nonempty parts only

    def part(self, k: int) -> Clopen:
        for kk, c in self.levels:
            if kk == k:
                return c
        return Clopen.empty(self.ambient.graph)

    def keys(self):
        return [k for k, _ in self.levels]


def graded_partition(e: Element) -> GradedPartition:
    """S(k) collects the source pieces moved with lag k; S(0) adds the
    fixed region off the carrier."""
    g = e.graph
    buckets = {}
    for b in e.blocks:
        buckets.setdefault(b.lag(), []).append(b.source_piece())
    fixed = e.carrier().complement()
    parts = {}
    for k, pieces in buckets.items():
        parts[k] = Clopen(g, canonicalize(g, pieces))
    parts[0] = parts.get(0, Clopen.empty(g)).union(fixed)
    levels = tuple((k, parts[k]) for k in sorted(parts) if not parts[k].is_empty())
    return GradedPartition(Clopen.full(g), levels)


def check_bisection(g: Graph, blocks):
    """Sources pairwise disjoint and ranges pairwise disjoint."""
    blocks = [make_block(g, b.mu, b.punctures, b.nu) for b in blocks]
    blocks = [b for b in blocks if not piece_is_empty(g, b.source_piece())]
    hit = _find_overlap(g, [b.source_piece() for b in blocks])
    if hit is not None:
        raise SourcesOverlap(f"bisection sources overlap at block {hit[1]}")
    hit = _find_overlap(g, [b.range_piece() for b in blocks])
    if hit is not None:
        raise RangesOverlap(f"bisection ranges overlap at block {hit[1]}")
    return blocks


def bisection_source(g: Graph, blocks) -> Clopen:
    return Clopen(g, canonicalize(g, [b.source_piece() for b in blocks]))


def bisection_range(g: Graph, blocks) -> Clopen:
    return Clopen(g, canonicalize(g, [b.range_piece() for b in blocks]))


def transposition(g: Graph, blocks) -> Element:
    """Involution swapping the source and range of a compact bisection.

    The bisection's total source and range must be disjoint; the result
    is the table blocks + inverse blocks, identity elsewhere, and squares
    to the identity.
    """
    blocks = check_bisection(g, blocks)
    src = bisection_source(g, blocks)
    rng = bisection_range(g, blocks)
    if not src.intersect(rng).is_empty():
        raise OverlappingSourceRange(
            f"bisection source {src} meets range {rng}")
    table = list(blocks) + [b.inverse() for b in blocks]
    return validate_element(g, table)


def doubling_bisections(g: Graph, a: Clopen):
    """Two bisections with source a and disjoint ranges inside a.

    Requires the AH criteria. Each piece of a is routed into the unique
    nontrivial strongly connected component and extended by two disjoint
    cycles; the cycles avoid the piece's punctures at their first edge so
    both ranges stay inside the piece.
    """
    from .graphs import two_disjoint_cycles, validate
    if a.graph != g:
        raise MalformedGraph("clopen lives over a different graph")
    report = validate(g)
    if not report.ah_criteria:
        raise MalformedGraph("graph does not satisfy the AH criteria")
    if a.is_empty():
        raise MalformedGraph("doubling needs a nonempty clopen")
    scc = g.nontrivial_scc()
    pieces = []
    stack = list(a.pieces)
    while stack:
        p = stack.pop()
        v = path_range(g, p.mu)
        if v in scc:
            pieces.append(p)
            continue
        # vertices outside the component are regular under the AH criteria
        for e in g.out_concrete(v):
            if e not in p.punctures:
                stack.append(Piece(p.mu.extend(e)))
    pieces.sort(key=Piece.key)
    w1, w2 = [], []
    for p in pieces:
        v = path_range(g, p.mu)
        c1, c2 = two_disjoint_cycles(g, v, avoid_first=p.punctures)
        w1.append(Block(p.mu.extend(*c1), p.punctures, p.mu))
        w2.append(Block(p.mu.extend(*c2), p.punctures, p.mu))
    return w1, w2


def shrink_support(e: Element):
    """A transposition tau agreeing with e on some clopen Z with
    e(Z) disjoint from Z, and the remainder tau . e fixing Z.

    Returns (tau, e2) with e == tau . e2 and support(e2) a proper subset
    of the whole space. The caller guarantees e is not the identity.
    """
    g = e.graph
    if e.is_identity():
        raise MalformedGraph("shrink_support needs a non-identity element")
    b = e.blocks[0]
    src, rng = b.source_piece(), b.range_piece()
    if intersect_pieces(g, src, rng) is None:
        tau = transposition(g, [b])
        return tau, compose(tau, e)
    # comparable paths: walk the forced ray below the longer path and
    # branch off it; the branch cylinder and its image are then disjoint
    if len(b.mu) > len(b.nu):
        lam = b.mu.edges[len(b.nu):]
    else:
        lam = b.nu.edges[len(b.mu):]
    banned = set(b.punctures)
    walked = []
    v = path_range(g, b.nu)
    for i in range(len(g.vertices) + len(lam) + 2):
        ray_edge = lam[i % len(lam)]
        options = [x for x in g.out_concrete(v) if x not in banned and x != ray_edge]
        for fam in g.out_families(v):
            k = 1
            while True:
                cand = f"{fam}#{k}"
                if cand not in banned and cand != ray_edge:
                    options.append(cand)
                    break
                k += 1
        banned = set()
        if options:
            d = sorted(options, key=edge_key)[0]
            sub = Path(b.nu.base, b.nu.edges + tuple(walked) + (d,))
            img = Path(b.mu.base, b.mu.edges + tuple(walked) + (d,))
            tau = transposition(g, [Block(img, (), sub)])
            return tau, compose(tau, e)
        walked.append(ray_edge)
        v = g.range(ray_edge)
    raise MalformedGraph("block acts on a single point; table not normalized")


# -- element file format -----------------------------------------------------

def parse_element_text(g: Graph, text: str):
    """Parse an element file; returns (name, element)."""
    name = None
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        # no inline comments here: '#' appears inside family member names
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "element":
            if len(parts) != 4 or parts[2] != "over":
                raise ParseError(f"line {lineno}: bad element header")
            name = parts[1]
            if parts[3] != g.name:
                raise ParseError(
                    f"line {lineno}: element is over {parts[3]!r}, "
                    f"graph loaded is {g.name!r}")
        elif parts[0] == "block":
            body = line[len("block"):]
            cols = [c.strip() for c in body.split("|")]
            if len(cols) != 3:
                raise ParseError(f"line {lineno}: block needs 'mu | F | nu'")
            mu = parse_path(g, cols[0])
            punct = [] if cols[1] == "-" else [p.strip()
                                               for p in cols[1].split(",") if p.strip()]
            nu = parse_path(g, cols[2])
            blocks.append(make_block(g, mu, punct, nu))
        else:
            raise ParseError(f"line {lineno}: cannot parse {raw!r}")
    if name is None:
        raise ParseError("missing 'element <name> over <graph>' header")
    return name, validate_element(g, blocks)


def print_element(name: str, e: Element) -> str:
    lines = [f"element {name} over {e.graph.name}"]
    lines.extend(str(b) for b in e.blocks)
    return "\n".join(lines) + "\n"
