#!/usr/bin/env python3

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational

from unipotent_hecke.errors import OrderBoundExceeded
from unipotent_hecke.integer_modules import (
    FinGenAbelianGroup,
    IntegerMatrix,
    cokernel,
    coinvariants,
    fixed_quotient,
    invariants,
    kernel_basis,
    lattice_basis,
    rational_solve,
    smith_normal_form,
    solve_integer,
)

small = st.integers(min_value=-4, max_value=4)


def matrices(rows: int, cols: int):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows).map(
        lambda r: IntegerMatrix.from_rows(r, cols)
    )


@st.composite
def unimodular(draw, n: int = 3):
    """Products of elementary matrices."""
    M = IntegerMatrix.identity(n)
    for _ in range(draw(st.integers(min_value=0, max_value=6))):
        i = draw(st.integers(min_value=0, max_value=n - 1))
        j = draw(st.integers(min_value=0, max_value=n - 1))
        if i == j:
            continue
        k = draw(st.integers(min_value=-2, max_value=2))
        rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
        rows[i][j] = k
        M = IntegerMatrix.from_rows(rows, n) @ M
    return M


class SmithNormalFormTest(unittest.TestCase):
    def test_diag_2_3(self):
        snf = smith_normal_form(IntegerMatrix.from_rows([[2, 0], [0, 3]], 2))
        self.assertEqual(snf.diagonal, (1, 6))

    def test_transforms_reproduce_s(self):
        M = IntegerMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], 3)
        snf = smith_normal_form(M)
        self.assertEqual(snf.U @ M @ snf.V, snf.S)
        self.assertTrue(snf.U.is_unimodular())
        self.assertTrue(snf.V.is_unimodular())
        self.assertEqual(snf.diagonal, (2, 6, 12))

    def test_zero_matrix_has_empty_diagonal(self):
        self.assertEqual(smith_normal_form(IntegerMatrix.zeros(2, 3)).diagonal, ())

    @settings(max_examples=60, deadline=None)
    @given(matrices(3, 3), unimodular(), unimodular())
    def test_invariant_under_unimodular_change(self, M, P, Q):
        self.assertEqual(smith_normal_form(M).diagonal, smith_normal_form(P @ M @ Q).diagonal)

    @settings(max_examples=60, deadline=None)
    @given(matrices(3, 2))
    def test_divisibility_chain(self, M):
        diag = smith_normal_form(M).diagonal
        for a, b in zip(diag, diag[1:]):
            self.assertEqual(b % a, 0)
        self.assertTrue(all(d > 0 for d in diag))


class CokernelTest(unittest.TestCase):
    def test_cokernel_of_cartan_a2(self):
        C = cokernel(IntegerMatrix.from_rows([[2, -1], [-1, 2]], 2))
        self.assertEqual(C.group, FinGenAbelianGroup(0, (3,)))
        self.assertEqual(C.group.order, 3)

    def test_reduce_lift_roundtrip(self):
        C = cokernel(IntegerMatrix.from_rows([[2], [0]], 1))
        self.assertEqual(C.group.label, "Z^1 x Z/2")
        for coords in C.torsion_elements():
            self.assertEqual(C.reduce(C.lift(coords)), C.normalize(coords))
        self.assertTrue(C.is_zero((2, 0)))
        self.assertFalse(C.is_zero((1, 0)))

    def test_coinvariants_of_swap(self):
        swap = IntegerMatrix.from_rows([[0, 1], [1, 0]], 2)
        self.assertEqual(coinvariants(swap).group, FinGenAbelianGroup(1, ()))

    def test_group_from_finite_elements(self):
        G = FinGenAbelianGroup.from_finite_elements([(2,)], [4])
        self.assertEqual(G, FinGenAbelianGroup(0, (2,)))
        self.assertTrue(FinGenAbelianGroup().is_trivial)

    def test_bad_invariants_rejected(self):
        with self.assertRaises(ValueError):
            FinGenAbelianGroup(0, (4, 2))


class LatticeTest(unittest.TestCase):
    def test_kernel_basis_is_saturated(self):
        basis = kernel_basis(IntegerMatrix.from_rows([[2, 2]], 2))
        self.assertEqual(len(basis), 1)
        self.assertIn(tuple(abs(x) for x in basis[0]), {(1, 1)})

    def test_solve_integer(self):
        M = IntegerMatrix.from_rows([[2, 0], [0, 3]], 2)
        self.assertEqual(M.apply(solve_integer(M, (4, 9))), (4, 9))
        self.assertIsNone(solve_integer(M, (1, 0)))

    def test_lattice_basis_rank(self):
        basis = lattice_basis([(2, 0), (0, 2), (2, 2)], 2)
        self.assertEqual(len(basis), 2)
        self.assertEqual(abs(IntegerMatrix.from_columns(basis, 2).det()), 4)

    def test_rational_solve(self):
        self.assertEqual(rational_solve([(2, 0), (0, 4)], (1, 1)), (Rational(1, 2), Rational(1, 4)))
        self.assertIsNone(rational_solve([(1, 0)], (0, 1)))

    def test_invariants_of_swap(self):
        swap = IntegerMatrix.from_rows([[0, 1], [1, 0]], 2)
        fixed = invariants(swap)
        self.assertEqual(len(fixed), 1)
        self.assertEqual(abs(fixed[0][0]), 1)
        self.assertEqual(fixed[0][0], fixed[0][1])

    def test_infinite_order_rejected(self):
        shear = IntegerMatrix.from_rows([[1, 1], [0, 1]], 2)
        with self.assertRaises(OrderBoundExceeded):
            invariants(shear, order_bound=6)

    def test_fixed_quotient_split_a1(self):
        fq = fixed_quotient(IntegerMatrix.identity(1), [(2,)])
        self.assertEqual(fq.quotient.group, FinGenAbelianGroup(0, (2,)))

    def test_fixed_quotient_swap_over_coroots(self):
        swap = IntegerMatrix.from_rows([[0, 1], [1, 0]], 2)
        fq = fixed_quotient(swap, [])
        self.assertEqual(len(fq.basis), 1)
        self.assertEqual(fq.quotient.group, FinGenAbelianGroup(1, ()))


class IntegerMatrixTest(unittest.TestCase):
    def test_inverse_of_unimodular(self):
        M = IntegerMatrix.from_rows([[2, 1], [1, 1]], 2)
        self.assertTrue((M @ M.inverse()).is_identity())

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            IntegerMatrix.identity(2) @ IntegerMatrix.identity(3)


if __name__ == "__main__":
    unittest.main()
