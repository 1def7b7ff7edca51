import random
import time

import pytest

from ggt.errors import HypothesesFailed, IndexNonzero, NotEquivalent
from ggt.factor import (Factorization, af_factor, compose_bisections,
                        construct_disjoint_paths, factor, find_bisection,
                        graded_cancellation, parse_factorization,
                        print_factorization, verify_product)
from ggt.fixtures import (cycle_graph, emitter_two_loops, infinite_rose,
                          mixed_graph, rose)
from ggt.fullgroup import (Block, Element, bisection_range, bisection_source,
                           compose, compose_all, make_block, support,
                           transposition, validate_element)
from ggt.homology import class_of, classes_equal, shift
from ggt.pathspace import Clopen, Path, parse_clopen, parse_path

from helpers import (mutate_clopen, random_balanced_table, random_clopen,
                     random_element, random_transposition)

E2 = rose(2)
EINF = infinite_rose()


def blk(g, mu, punct, nu):
    return make_block(g, parse_path(g, mu), punct, parse_path(g, nu))


def elem(g, *specs):
    return validate_element(g, [blk(g, m, f, n) for (m, f, n) in specs])


def check_bisection_result(g, blocks, a, b, lag):
    assert bisection_source(g, blocks).equal(a)
    assert bisection_range(g, blocks).equal(b)
    assert all(x.lag() == lag for x in blocks)


def test_find_bisection_examples():
    got = find_bisection(parse_clopen(E2, "Z(a)"), parse_clopen(E2, "Z(b)"))
    assert [str(x) for x in got] == ["block b | - | a"]
    got = find_bisection(parse_clopen(EINF, "Z(L#1.L#2)"),
                         parse_clopen(EINF, "Z(L#3.L#4)"))
    assert [str(x) for x in got] == ["block L#3.L#4 | - | L#1.L#2"]
    a = parse_clopen(EINF, r"Z(@v \ L#1)")
    b = parse_clopen(EINF, r"Z(@v \ L#2)")
    got = find_bisection(a, b)
    check_bisection_result(EINF, got, a, b, 0)
    assert [str(x) for x in got] == [r"block @v | L#1,L#2 | @v",
                                     "block L#1 | - | L#2"]


def test_find_bisection_not_equivalent():
    with pytest.raises(NotEquivalent):
        find_bisection(parse_clopen(E2, "Z(a)"), parse_clopen(E2, "Z(@v)"))
    with pytest.raises(NotEquivalent):
        find_bisection(parse_clopen(EINF, "Z(L#1)"),
                       parse_clopen(EINF, r"Z(@v \ L#1)"))


def test_find_bisection_mixed_shapes():
    a = parse_clopen(EINF, "Z(L#1)")
    b = parse_clopen(EINF, r"Z(L#2 \ L#5) + Z(L#3.L#5)")
    got = find_bisection(a, b)
    check_bisection_result(EINF, got, a, b, 0)


def test_graded_cancellation_examples():
    a, b = parse_clopen(E2, "Z(a)"), parse_clopen(E2, "Z(a.a)")
    got = graded_cancellation(a, b, 1)
    assert [str(x) for x in got] == ["block a.a | - | a"]
    a, b = parse_clopen(EINF, "Z(@v)"), parse_clopen(EINF, "Z(L#1)")
    got = graded_cancellation(a, b, 1)
    assert [str(x) for x in got] == ["block L#1 | - | @v"]
    with pytest.raises(NotEquivalent):
        graded_cancellation(parse_clopen(E2, "Z(a.a)"),
                            parse_clopen(E2, "Z(a.a)"), 1)


def test_graded_cancellation_random():
    rng = random.Random(51)
    for g in (E2, EINF):
        for _ in range(10):
            a = random_clopen(g, rng, pieces=2)
            if a.is_empty():
                continue
            n = rng.randrange(1, 3)
            # build b with the shifted class by prepending paths manually
            blocks = graded_cancellation(a, _shifted_copy(g, rng, a, n), n)
            assert all(x.lag() == n for x in blocks)


def _shifted_copy(g, rng, a, n):
    from ggt.factor import _least_path_into
    from ggt.pathspace import Piece
    pieces = []
    for p in a.pieces:
        gamma = _least_path_into(g, p.mu.base, n)
        pieces.append(Piece(Path(g.source(gamma[0]), gamma + p.mu.edges),
                            p.punctures))
    return Clopen(g, tuple(sorted(pieces, key=Piece.key)))


def test_construct_disjoint_paths_basic():
    g = EINF
    ambient = Clopen.full(g)
    region = parse_clopen(g, "Z(L#1)")
    fam = construct_disjoint_paths(g, ambient, region, [1], [],
                                   {(1, 1): "v", (0, 1): "v"})
    assert fam.n_length == len(fam.g0(1, 1))
    assert len(fam.gp(1, 1, 1)) == fam.n_length + 1
    assert Clopen.cylinder(g, fam.g0(0, 1)).subtract(
        ambient.subtract(region)).is_empty()
    assert Clopen.cylinder(g, fam.gp(1, 1, 1)).subtract(region).is_empty()


def test_construct_disjoint_paths_negative_buffer():
    g = EINF
    ambient = Clopen.full(g)
    region = parse_clopen(g, "Z(L#1)")
    fam = construct_disjoint_paths(g, ambient, region, [], [-2],
                                   {(-2, 1): "v", (0, 1): "v"})
    # the buffer makes room for the shorter paths
    assert len(fam.gq(-2, 1, 1)) == fam.n_length - 1
    assert len(fam.gq(-2, 1, 2)) == fam.n_length - 2


def test_construct_disjoint_paths_rejects_improper_region():
    g = EINF
    full = Clopen.full(g)
    with pytest.raises(HypothesesFailed):
        construct_disjoint_paths(g, full, full, [1], [-1], {(0, 1): "v"})
    with pytest.raises(HypothesesFailed):
        construct_disjoint_paths(E2, Clopen.full(E2),
                                 parse_clopen(E2, "Z(a)"), [], [],
                                 {(0, 1): "v"})


def test_af_factor_examples():
    swap = elem(E2, ("a", [], "b"), ("b", [], "a"))
    fact = af_factor(swap)
    assert len(fact.transpositions) == 1 and fact.certified
    three = elem(E2, ("a.b", [], "a.a"), ("b.a", [], "a.b"),
                 ("a.a", [], "b.a"))
    fact = af_factor(three)
    assert len(fact.transpositions) == 2 and fact.certified
    fact = af_factor(Element.identity(E2))
    assert fact.transpositions == () and fact.certified


def test_af_factor_random_tables():
    rng = random.Random(57)
    for _ in range(10):
        e = random_balanced_table(E2, rng, depth=2)
        fact = af_factor(e)
        assert fact.certified
        assert verify_product(e, fact.transpositions)
        for t in fact.transpositions:
            assert compose(t, t).is_identity()
    for _ in range(10):
        e = random_element(EINF, rng, 3, balanced=True)
        fact = af_factor(e)
        assert fact.certified


def test_verify_product_examples():
    swap = elem(E2, ("a", [], "b"), ("b", [], "a"))
    assert verify_product(swap, [swap])
    assert verify_product(Element.identity(E2), [])
    assert not verify_product(swap, [Element.identity(E2)])


def test_factor_requires_hypotheses():
    swap = elem(E2, ("a", [], "b"), ("b", [], "a"))
    with pytest.raises(HypothesesFailed):
        factor(swap)


def test_factor_rejects_nonzero_index():
    pet = emitter_two_loops()
    e = elem(pet, ("@x", [], "p"), ("r", [], "@y"), ("t", [], "q"))
    with pytest.raises(IndexNonzero):
        factor(e)


def test_factor_disjoint_transpositions():
    t12 = transposition(EINF, [blk(EINF, "L#1", [], "L#2")])
    t34 = transposition(EINF, [blk(EINF, "L#3", [], "L#4")])
    e = compose(t12, t34)
    fact = factor(e)
    assert fact.certified and verify_product(e, fact.transpositions)


def test_factor_alpha0_analogue():
    # the binary table calculus on two loops, with the residual collar
    # at the emitter shuffled by a fourth block
    e = elem(EINF,
             ("L#1", [], "L#1.L#1"),
             ("L#2.L#1", [], "L#1.L#2"),
             ("L#2.L#2", [], "L#2"),
             ("L#2", ["L#1", "L#2"], "L#1"))
    fact = factor(e)
    assert fact.certified
    assert verify_product(e, fact.transpositions)


def test_factor_graded_kernel_element():
    # product of graded transpositions with nonempty positive and
    # negative parts whose index vanishes
    tau_g = transposition(EINF, [blk(EINF, "L#2.L#1", [], "L#1")])
    sw = transposition(EINF, [blk(EINF, "L#1", [], "L#2")])
    e = compose(tau_g, sw)
    fact = factor(e)
    assert fact.certified
    for t in fact.transpositions:
        assert compose(t, t).is_identity()


def test_factor_without_lag_zero_support():
    # a lone graded transposition moves every supported point with a
    # nonzero lag, so the zero part of the support is empty
    tau_g = transposition(EINF, [blk(EINF, "L#2.L#1", [], "L#1")])
    from ggt.fullgroup import graded_partition
    part = graded_partition(tau_g)
    assert part.part(0).intersect(support(tau_g)).is_empty()
    fact = factor(tau_g)
    assert fact.certified and verify_product(tau_g, fact.transpositions)


def test_factor_full_support_element():
    ta = transposition(EINF, [blk(EINF, "L#1", ["L#1", "L#2"], "@v")])
    tb = transposition(EINF, [blk(EINF, "L#2", [], "L#1.L#1")])
    tc = transposition(EINF, [blk(EINF, "L#2", [], "L#1.L#2")])
    e = compose_all([ta, tb, tc])
    assert support(e).equal(Clopen.full(EINF))
    fact = factor(e)
    assert fact.certified and verify_product(e, fact.transpositions)


def test_factor_on_petal_graph():
    pet = emitter_two_loops()
    rng = random.Random(61)
    for _ in range(5):
        e = random_element(pet, rng, 3, max_len=2)
        fact = factor(e)
        assert fact.certified


def test_factor_randomized_soundness():
    rng = random.Random(63)
    start = time.monotonic()
    for _ in range(10):
        parts = [random_transposition(EINF, rng, max_len=2)
                 for _ in range(rng.randrange(1, 5))]
        parts += [random_element(EINF, rng, 2, balanced=True)]
        e = compose_all(parts)
        from ggt.homology import index
        assert index(e).zero
        fact = factor(e)
        assert fact.certified
        assert verify_product(e, fact.transpositions)
    assert time.monotonic() - start < 120


def test_factorization_file_round_trip():
    t12 = transposition(EINF, [blk(EINF, "L#1", [], "L#2")])
    t34 = transposition(EINF, [blk(EINF, "L#3", [], "L#4")])
    e = compose(t12, t34)
    fact = factor(e)
    text = print_factorization("probe", fact, EINF)
    assert text.startswith(
        f"product-of {len(fact.transpositions)} transpositions, certified=true")
    certified, elements = parse_factorization(EINF, text)
    assert certified
    assert verify_product(e, elements)


def test_find_bisection_on_multi_vertex_graph():
    # cancellation over a graph with several vertices and a genuine
    # pushdown relation structure
    pet = emitter_two_loops()
    rng = random.Random(67)
    done = 0
    while done < 20:
        seed = random_clopen(pet, rng, pieces=2, max_len=2)
        if seed.is_empty():
            continue
        a = mutate_clopen(pet, rng, seed, moves=2)
        b = mutate_clopen(pet, rng, seed, moves=2)
        blocks = find_bisection(a, b)
        assert bisection_source(pet, blocks).equal(a)
        assert bisection_range(pet, blocks).equal(b)
        done += 1


def test_graded_cancellation_on_multi_vertex_graph():
    pet = emitter_two_loops()
    a = Clopen.cylinder(pet, parse_path(pet, "p"))
    b = Clopen.cylinder(pet, parse_path(pet, "p.p.p"))
    blocks = graded_cancellation(a, b, 2)
    assert bisection_source(pet, blocks).equal(a)
    assert bisection_range(pet, blocks).equal(b)
    assert all(x.lag() == 2 for x in blocks)


def test_support_symmetry_and_factor_supports():
    rng = random.Random(71)
    for _ in range(10):
        e = random_element(EINF, rng, 3, max_len=2)
        assert support(e).equal(support(validate_element(
            EINF, [b.inverse() for b in e.blocks])))
    tau = transposition(EINF, [blk(EINF, "L#1", [], "L#2")])
    e = compose(tau, transposition(EINF, [blk(EINF, "L#3", [], "L#4")]))
    fact = factor(e)
    for t in fact.transpositions:
        sup = support(t)
        assert not sup.is_empty()
        assert sup.intersect(Clopen.full(EINF)).equal(sup)
