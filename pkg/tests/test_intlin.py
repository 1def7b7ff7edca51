import random

import pytest

from ggt.errors import ChainLimitExceeded
from ggt.intlin import (IntMatrix, Lattice, cokernel_invariants, determinant,
                        eventual_kernel, kernel, preimage,
                        restrict_to_zero_coords, smith_normal_form)

from helpers import naive_invariant_factors


def snf_check(rows):
    m = IntMatrix.from_rows(rows)
    u, d, v = smith_normal_form(m)
    assert u.mul(m).mul(v).to_rows() == d.to_rows()
    assert determinant(u) in (1, -1)
    assert determinant(v) in (1, -1)
    diag = d.diagonal()
    for i in range(m.rows):
        for j in range(m.cols):
            if i != j:
                assert d.get(i, j) == 0
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        if a != 0:
            assert b % a == 0
        else:
            assert b == 0
    return diag


def test_snf_examples():
    assert snf_check([[2]]) == [2]
    assert snf_check([[1, 0], [0, 0]]) == [1, 0]
    assert snf_check([[3, 3]]) == [3]


def test_snf_random():
    rng = random.Random(7)
    for _ in range(60):
        rows = rng.randrange(1, 5)
        cols = rng.randrange(1, 5)
        m = [[rng.randrange(-6, 7) for _ in range(cols)] for _ in range(rows)]
        diag = snf_check(m)
        naive = naive_invariant_factors(m)
        assert [x for x in diag if x != 0] == [x for x in naive if x != 0]


def test_kernel_examples():
    assert kernel(IntMatrix.from_rows([[1, -1]])).basis == ((1, 1),)
    assert kernel(IntMatrix.identity(2)).basis == ()
    assert kernel(IntMatrix.from_rows([[0, 0]])).basis == ((1, 0), (0, 1))


def test_kernel_brute_force():
    rng = random.Random(11)
    for _ in range(40):
        rows = rng.randrange(1, 4)
        cols = rng.randrange(1, 4)
        m = IntMatrix.from_rows([[rng.randrange(-3, 4) for _ in range(cols)]
                                 for _ in range(rows)])
        lat = kernel(m)
        for vec in lat.basis:
            assert all(x == 0 for x in m.mul_vector(list(vec)))
        # every small kernel vector lies in the lattice
        def vectors(n):
            if n == 0:
                yield []
                return
            for rest in vectors(n - 1):
                for x in range(-5, 6):
                    yield [x] + rest
        if cols <= 3:
            for v in vectors(cols):
                if all(x == 0 for x in m.mul_vector(v)):
                    assert lat.contains(v)


def test_cokernel_examples():
    assert cokernel_invariants(IntMatrix.from_rows([[3]])) == ([3], 0)
    assert cokernel_invariants(IntMatrix.zeros(2, 0)) == ([], 2)
    assert cokernel_invariants(IntMatrix.zeros(2, 1)) == ([], 2)


def test_cokernel_unimodular_invariance():
    rng = random.Random(13)
    for _ in range(25):
        rows, cols = rng.randrange(1, 4), rng.randrange(1, 4)
        m = IntMatrix.from_rows([[rng.randrange(-4, 5) for _ in range(cols)]
                                 for _ in range(rows)])
        base = cokernel_invariants(m)
        # random elementary row and column operations
        a = m.to_rows()
        for _ in range(6):
            if rng.random() < 0.5 and rows > 1:
                i, j = rng.sample(range(rows), 2)
                q = rng.randrange(-2, 3)
                a[i] = [x + q * y for x, y in zip(a[i], a[j])]
            elif cols > 1:
                i, j = rng.sample(range(cols), 2)
                q = rng.randrange(-2, 3)
                for row in a:
                    row[i] += q * row[j]
        assert cokernel_invariants(IntMatrix.from_rows(a)) == base


def test_lattice_canonical_and_membership():
    lat = Lattice.from_vectors(3, [[2, 0, 0], [0, 3, 1], [2, 3, 1]])
    same = Lattice.from_vectors(3, [[2, 3, 1], [0, 3, 1], [4, 0, 0]])
    assert lat == same
    assert lat.contains([2, 0, 0])
    assert lat.contains([2, 3, 1])
    assert not lat.contains([1, 0, 0])
    assert Lattice.zero(3).contains([0, 0, 0])
    assert not Lattice.zero(3).contains([0, 1, 0])


def test_preimage_and_coordinate_restriction():
    m = IntMatrix.from_rows([[2, 0], [0, 3]])
    lat = Lattice.from_vectors(2, [[4, 0]])
    pre = preimage(m, lat)
    assert pre.contains([2, 0])
    assert not pre.contains([1, 0])
    assert not pre.contains([0, 1])
    sub = restrict_to_zero_coords(Lattice.full(2), [0])
    assert sub.contains([0, 5]) and not sub.contains([1, 0])


def test_eventual_kernel_examples():
    z2 = IntMatrix.zeros(2, 2)
    assert eventual_kernel(z2, set()) == Lattice.full(2)
    assert eventual_kernel(IntMatrix.identity(2), set()) == Lattice.zero(2)
    assert eventual_kernel(IntMatrix.from_rows([[2]]), set()) == Lattice.zero(1)


def test_eventual_kernel_chain_property():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randrange(1, 4)
        push = IntMatrix.from_rows([[rng.randrange(-2, 3) for _ in range(n)]
                                    for _ in range(n)])
        forbidden = [i for i in range(n) if rng.random() < 0.3]
        lat = eventual_kernel(push, forbidden)
        for vec in lat.basis:
            v = list(vec)
            for _ in range(4 * n + 2):
                assert all(v[c] == 0 for c in forbidden)
                v = push.mul_vector(v)
                if all(x == 0 for x in v):
                    break
            assert all(x == 0 for x in v)


def test_eventual_kernel_limit():
    with pytest.raises(ChainLimitExceeded):
        eventual_kernel(IntMatrix.from_rows([[0, 0], [1, 0]]), set(), max_steps=0)
