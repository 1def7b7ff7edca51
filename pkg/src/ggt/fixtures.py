"""Small standard graphs used across tests and the documentation."""

from .graphs import Graph

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def infinite_rose() -> Graph:
    """One vertex with a single infinite loop family."""
    return Graph("einf", ["v"], [], [("L", "v", "v")])


def rose(n: int) -> Graph:
    """One vertex with n concrete loops named a, b, c, ..."""
    if not 1 <= n <= 26:
        raise ValueError("rose size out of range")
    return Graph(f"e{n}", ["v"], [(_LETTERS[i], "v", "v") for i in range(n)], [])


def cycle_graph(n: int) -> Graph:
    """A single cycle through n vertices u1 -> u2 -> ... -> u1."""
    if n < 1:
        raise ValueError("cycle needs at least one vertex")
    vertices = [f"u{i}" for i in range(1, n + 1)]
    edges = [(f"x{i}", f"u{i}", f"u{i % n + 1}") for i in range(1, n + 1)]
    return Graph(f"c{n}", vertices, edges, [])


def mixed_graph() -> Graph:
    """Four vertices mixing a source, an infinite emitter, torsion and rank.

    u feeds b; b carries a loop, three edges to c and three to d; c emits
    infinitely many edges back to b; d carries four loops and three edges
    to c.
    """
    vertices = ["u", "b", "c", "d"]
    edges = [("e", "u", "b"), ("l", "b", "b")]
    edges += [(f"c{i}", "b", "c") for i in (1, 2, 3)]
    edges += [(f"d{i}", "b", "d") for i in (1, 2, 3)]
    edges += [(f"m{i}", "d", "d") for i in (1, 2, 3, 4)]
    edges += [(f"k{i}", "d", "c") for i in (1, 2, 3)]
    return Graph("mixed", vertices, edges, [("F", "c", "b")])


def emitter_two_loops() -> Graph:
    """Emitter w with a loop family, plus two looped satellites x and y.

    The smallest strongly connected fixture whose first homology is
    nontrivial while still satisfying the factorization hypotheses, so
    elements with nonzero index exist over it.
    """
    vertices = ["w", "x", "y"]
    edges = [("a", "w", "x"), ("b", "w", "y"),
             ("p", "x", "x"), ("q", "x", "w"),
             ("r", "y", "y"), ("t", "y", "w")]
    return Graph("petal", vertices, edges, [("W", "w", "w")])
