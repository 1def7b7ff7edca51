"""Shared test utilities: independent oracles and random generators.

The oracles here are deliberately separate implementations: a naive
Smith reducer without transform tracking, and a boundary-point
enumerator that checks set algebra pointwise. They stay independent of
the code paths they check.
"""

import random

from ggt.fullgroup import Block, Element, compose, transposition, validate_element
from ggt.graphs import family_member
from ggt.pathspace import (BoundaryPoint, Clopen, Path, Piece, make_piece,
                           path_range, piece_is_empty)


# -- naive Smith normal form (oracle) -----------------------------------------

def naive_invariant_factors(rows):
    """Diagonal invariant factors by textbook reduction, no transforms."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if a else 0
    diag = []
    t = 0
    while t < min(m, n):
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0 and (pivot is None or abs(a[i][j]) < abs(pivot[2])):
                    pivot = (i, j, a[i][j])
        if pivot is None:
            break
        i, j, _ = pivot
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        restart = False
        for i in range(t + 1, m):
            while a[i][t] != 0:
                q = a[i][t] // a[t][t]
                a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t] != 0:
                    a[t], a[i] = a[i], a[t]
        for j in range(t + 1, n):
            while a[t][j] != 0:
                q = a[t][j] // a[t][t]
                for row in a:
                    row[j] -= q * row[t]
                if a[t][j] != 0:
                    for row in a:
                        row[t], row[j] = row[j], row[t]
        p = abs(a[t][t])
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % p != 0:
                    a[t] = [x + y for x, y in zip(a[t], a[i])]
                    restart = True
                    break
            if restart:
                break
        if restart:
            continue
        diag.append(p)
        t += 1
    return diag


# -- boundary point enumeration (oracle) ---------------------------------------

def enumerate_prefixes(g, max_len, members=3):
    """All paths of length <= max_len, families truncated to low members."""
    out = []
    stack = [Path(v) for v in sorted(g.vertices)]
    while stack:
        p = stack.pop()
        out.append(p)
        if len(p) >= max_len:
            continue
        v = path_range(g, p)
        refs = list(g.out_concrete(v))
        for f in g.out_families(v):
            refs.extend(family_member(f, k) for k in range(1, members + 1))
        for e in refs:
            stack.append(p.extend(e))
    return out


def cycle_sets(g, members=2):
    """A fixed finite set of tail cycles per vertex."""
    cycles = {v: [] for v in g.vertices}
    for v in sorted(g.vertices):
        refs = list(g.out_concrete(v))
        for f in g.out_families(v):
            refs.extend(family_member(f, k) for k in range(1, members + 1))
        for e in refs:
            if g.range(e) == v:
                cycles[v].append((e,))
        for e in refs:
            w = g.range(e)
            if w == v:
                continue
            for e2 in g.out_concrete(w):
                if g.range(e2) == v:
                    cycles[v].append((e, e2))
                    break
    return cycles


def point_family(g, max_prefix=4, members=3):
    """Finite point family: bounded prefixes with fixed tails."""
    cycles = cycle_sets(g)
    points = []
    for p in enumerate_prefixes(g, max_prefix, members=members):
        v = path_range(g, p)
        if g.is_singular(v):
            points.append(BoundaryPoint.at_singular(g, p))
        for c in cycles[v][:2]:
            points.append(BoundaryPoint.periodic(g, p, c))
    seen = set()
    out = []
    for x in points:
        key = (x.prefix, x.cycle)
        if key not in seen:
            seen.add(key)
            out.append(x)
    return out


def member_set(clopen, points):
    return frozenset(i for i, x in enumerate(points) if clopen.contains(x))


# -- random generators ---------------------------------------------------------

def random_walk(g, rng, start, length, members=4):
    edges = []
    v = start
    for _ in range(length):
        refs = list(g.out_concrete(v))
        for f in g.out_families(v):
            refs.extend(family_member(f, k) for k in range(1, members + 1))
        if not refs:
            return None
        e = rng.choice(refs)
        edges.append(e)
        v = g.range(e)
    return Path(start, tuple(edges))


def random_cylinder(g, rng, max_len=3):
    v = rng.choice(sorted(g.vertices))
    p = random_walk(g, rng, v, rng.randrange(0, max_len + 1))
    return Clopen.cylinder(g, p) if p is not None else Clopen.empty(g)


def random_clopen(g, rng, pieces=3, max_len=3):
    acc = Clopen.empty(g)
    for _ in range(pieces):
        acc = acc.union(random_cylinder(g, rng, max_len))
    if rng.random() < 0.4 and not acc.is_empty():
        acc = acc.subtract(random_cylinder(g, rng, max_len))
    return acc


def random_transposition(g, rng, max_len=3, balanced=False, allow_punctures=True):
    """A one-block transposition with random disjoint source and range."""
    for _ in range(400):
        v = rng.choice(sorted(g.vertices))
        ln = rng.randrange(0, max_len + 1)
        lm = ln if balanced else rng.randrange(0, max_len + 1)
        nu = random_walk(g, rng, v, ln)
        if nu is None:
            continue
        target = path_range(g, nu)
        mu = None
        for u in sorted(g.vertices):
            cand = random_walk(g, rng, u, lm)
            if cand is not None and path_range(g, cand) == target:
                mu = cand
                break
        if mu is None:
            continue
        punct = ()
        if allow_punctures and g.is_infinite_emitter(target) and rng.random() < 0.3:
            fam = rng.choice(g.out_families(target))
            punct = tuple({family_member(fam, rng.randrange(1, 5))
                           for _ in range(rng.randrange(1, 3))})
        block = Block(mu, tuple(sorted(punct)), nu)
        if piece_is_empty(g, block.source_piece()):
            continue
        src, rng_p = block.source_piece(), block.range_piece()
        from ggt.pathspace import intersect_pieces
        if intersect_pieces(g, src, rng_p) is not None:
            continue
        return transposition(g, [block])
    raise RuntimeError("could not sample a transposition")


def random_element(g, rng, transpositions=4, max_len=3, balanced=False):
    acc = Element.identity(g)
    for _ in range(transpositions):
        acc = compose(acc, random_transposition(g, rng, max_len, balanced))
    return acc


def random_balanced_table(g, rng, depth=2):
    """A random permutation of the depth-d refinement (regular graphs)."""
    pieces = list(Clopen.full(g).refine_to(depth).pieces)
    groups = {}
    for p in pieces:
        groups.setdefault((len(p.mu), path_range(g, p.mu), p.punctures),
                          []).append(p)
    blocks = []
    for key in sorted(groups, key=str):
        group = sorted(groups[key], key=Piece.key)
        images = group[:]
        rng.shuffle(images)
        for src, dst in zip(group, images):
            blocks.append(Block(dst.mu, dst.punctures, src.mu))
    return validate_element(g, blocks)


# -- class-preserving clopen mutations -----------------------------------------

def mutate_clopen(g, rng, clopen, moves=3):
    """Apply class-preserving split and translate moves to a clopen."""
    pieces = list(clopen.pieces)
    for _ in range(moves):
        if not pieces:
            break
        idx = rng.randrange(len(pieces))
        p = pieces[idx]
        v = path_range(g, p.mu)
        action = rng.random()
        if action < 0.5:
            # split: regular ranges split completely, singular ranges
            # carve one fresh family edge
            if g.is_regular(v):
                del pieces[idx]
                pieces.extend(Piece(p.mu.extend(e)) for e in g.out_concrete(v)
                              if e not in p.punctures)
            else:
                fam = rng.choice(g.out_families(v))
                k = 1
                while family_member(fam, k) in p.punctures:
                    k += 1
                k += rng.randrange(0, 3)
                while family_member(fam, k) in p.punctures:
                    k += 1
                e = family_member(fam, k)
                del pieces[idx]
                pieces.append(make_piece(g, p.mu, p.punctures + (e,)))
                pieces.append(Piece(p.mu.extend(e)))
        else:
            # translate: same length, same range vertex, same puncture count
            for _ in range(60):
                u = rng.choice(sorted(g.vertices))
                q = random_walk(g, rng, u, len(p.mu))
                if q is None or path_range(g, q) != v:
                    continue
                punct = p.punctures
                if punct:
                    fams = g.out_families(v)
                    fresh = set()
                    while len(fresh) < len(punct):
                        fresh.add(family_member(rng.choice(fams),
                                                rng.randrange(1, 8)))
                    punct = tuple(sorted(fresh))
                cand = Piece(q, punct)
                from ggt.pathspace import intersect_pieces
                others = pieces[:idx] + pieces[idx + 1:]
                if any(intersect_pieces(g, cand, o) is not None for o in others):
                    continue
                if piece_is_empty(g, cand):
                    continue
                pieces[idx] = cand
                break
    return Clopen(g, tuple(sorted(pieces, key=Piece.key)))
