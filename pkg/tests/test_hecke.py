#!/usr/bin/env python3

import unittest
from itertools import product

from hypothesis import given, settings
from hypothesis import strategies as st

from unipotent_hecke.errors import ConsistencyError, ParameterError, SpecFormatError
from unipotent_hecke.hecke import (
    HeckeElement,
    Presentation,
    UnitCharacter,
    braid_check,
    central_test,
    format_element,
    hecke_datum,
    im_bar,
    im_basis,
    multiply,
    n_basis,
    n_inverse,
    one,
    orbit_symmetrize,
    parse_element,
    scalar,
    specialize_structure_constants,
    theta,
    to_bernstein,
    to_iwahori_matsumoto,
    twist_by_character,
)
from unipotent_hecke.laurent import LaurentScalar
from unipotent_hecke.root_datum import split_datum

A1 = hecke_datum(split_datum("A1", "sc"), [1])
A2 = hecke_datum(split_datum("A2", "sc"), [1, 1])
S = A1.simple_reflections[0]
DIFF = LaurentScalar.quantum_difference(0, 1)

A2_ADJOINT = hecke_datum(split_datum("A2", "adjoint"), [1, 1])
C2 = hecke_datum(split_datum("C2", "sc"), [1, 2])
G2 = hecke_datum(split_datum("G2", "sc"), [1, 1])
HIGHER_RANK = (A2, A2_ADJOINT, C2, G2)


def _term(D, x, w, c):
    return HeckeElement.from_mapping(1, {(tuple(x), w, 0): LaurentScalar.monomial((c,))})


def _elements_of(D):
    term = st.builds(
        lambda x, w, c: _term(D, x, w, c),
        st.lists(st.integers(min_value=-1, max_value=1), min_size=D.rank, max_size=D.rank),
        st.integers(min_value=0, max_value=len(D.weyl) - 1),
        st.integers(min_value=-1, max_value=1),
    )
    return st.lists(term, min_size=1, max_size=2).map(lambda parts: sum(parts[1:], parts[0]))


def _lattice_points(D, count=20):
    return list(product(range(-2, 3), repeat=D.rank))[:count]


def _basis_element(x, w, c):
    return HeckeElement.from_mapping(1, {((x,), w, 0): LaurentScalar.monomial((c,))})


elements = st.lists(
    st.builds(_basis_element, st.integers(min_value=-2, max_value=2), st.sampled_from([0, S]), st.integers(min_value=-1, max_value=1)),
    min_size=1,
    max_size=2,
).map(lambda parts: sum(parts[1:], parts[0]))


class RelationsTest(unittest.TestCase):
    def test_quadratic_relation(self):
        N = n_basis(A1, S)
        self.assertEqual(multiply(A1, N, N), one(A1) + N.scale(DIFF))

    def test_cross_relation_on_fundamental_weight(self):
        got = multiply(A1, n_basis(A1, S), theta(A1, (1,)))
        expected = HeckeElement.from_mapping(
            1,
            {((-1,), S, 0): LaurentScalar.one(), ((1,), 0, 0): DIFF},
        )
        self.assertEqual(got, expected)

    def test_theta_is_multiplicative(self):
        self.assertEqual(multiply(A2, theta(A2, (1, 0)), theta(A2, (0, 1))), theta(A2, (1, 1)))

    def test_inverse(self):
        w0 = max(range(len(A2.weyl)), key=A2.weyl_length)
        self.assertEqual(multiply(A2, n_basis(A2, w0), n_inverse(A2, w0)), one(A2))

    def test_braid_relation(self):
        self.assertEqual(braid_check(A2), {"1,2": True})

    def test_specialization_is_group_algebra(self):
        ok, witness = specialize_structure_constants(A1, [(0,), (1,), (-1,)])
        self.assertTrue(ok)
        self.assertIsNone(witness)

    @settings(max_examples=25, deadline=None)
    @given(elements, elements, elements)
    def test_associativity(self, a, b, c):
        self.assertEqual(multiply(A1, multiply(A1, a, b), c), multiply(A1, a, multiply(A1, b, c)))

    def test_braid_relations_with_higher_orders(self):
        self.assertEqual(braid_check(C2), {"1,2": True})
        self.assertEqual(braid_check(G2), {"1,2": True})

    @settings(max_examples=15, deadline=None)
    @given(st.data())
    def test_associativity_in_higher_rank(self, data):
        for D in HIGHER_RANK:
            a, b, c = (data.draw(_elements_of(D)) for _ in range(3))
            self.assertEqual(multiply(D, multiply(D, a, b), c), multiply(D, a, multiply(D, b, c)), D.name)


class CenterTest(unittest.TestCase):
    def test_orbit_sum_is_central(self):
        z = orbit_symmetrize(A1, (1,))
        self.assertEqual(z, theta(A1, (1,)) + theta(A1, (-1,)))
        self.assertEqual(central_test(A1, z), (True, None))

    def test_orbit_sums_are_central_in_higher_rank(self):
        for D in (A1,) + HIGHER_RANK:
            for x in _lattice_points(D):
                z = orbit_symmetrize(D, x)
                self.assertEqual(central_test(D, z), (True, None), (D.name, x))

    def test_single_theta_is_not_central(self):
        self.assertEqual(central_test(A1, theta(A1, (1,))), (False, "N(1)"))

    def test_scalars_are_central(self):
        self.assertTrue(central_test(A2, scalar(A2, DIFF * 3))[0])


class DatumValidationTest(unittest.TestCase):
    def test_label_count(self):
        with self.assertRaises(ParameterError):
            hecke_datum(split_datum("A2", "sc"), [1])

    def test_conjugate_simple_roots_share_labels(self):
        with self.assertRaises(ParameterError):
            hecke_datum(split_datum("A2", "sc"), [1, 2])

    def test_unequal_star_needs_even_coroot(self):
        with self.assertRaises(ParameterError):
            hecke_datum(split_datum("A1", "sc"), [1], [2])
        D = hecke_datum(split_datum("A1", "adjoint"), [3], [1])
        self.assertEqual((D.labels, D.star_labels), ((3,), (1,)))


class IwahoriMatsumotoTest(unittest.TestCase):
    def test_dominant_theta_is_translation(self):
        self.assertEqual(to_iwahori_matsumoto(A1, theta(A1, (2,))), im_basis(A1, (2,)))
        self.assertEqual(to_iwahori_matsumoto(A1, n_basis(A1, S)), im_basis(A1, (0,), S))

    def test_bar_is_an_involution(self):
        T = im_basis(A1, (0,), S)
        barred = im_bar(A1, T)
        self.assertEqual(barred, T - one(A1, Presentation.IWAHORI_MATSUMOTO).scale(DIFF))
        self.assertEqual(im_bar(A1, barred), T)

    def test_roundtrip(self):
        for e in (theta(A1, (1,)), theta(A1, (-1,)), n_basis(A1, S), multiply(A1, theta(A1, (-2,)), n_basis(A1, S))):
            im = to_iwahori_matsumoto(A1, e)
            self.assertIs(im.presentation, Presentation.IWAHORI_MATSUMOTO)
            self.assertEqual(to_bernstein(A1, im), e)

    def test_roundtrip_on_words_up_to_length_four(self):
        for D in (A2, C2):
            for w in range(len(D.weyl)):
                self.assertLessEqual(D.weyl_length(w), 4)
                for x in ((0, 0), (1, -1), (-1, 2)):
                    e = multiply(D, theta(D, x), n_basis(D, w))
                    self.assertEqual(to_bernstein(D, to_iwahori_matsumoto(D, e)), e, (D.name, w, x))


class TwistTest(unittest.TestCase):
    def test_character_trivial_on_roots(self):
        tw = twist_by_character(A1, UnitCharacter(2, (1,)))
        self.assertGreater(tw.checked_products, 0)
        values = tw.apply(theta(A1, (1,)))
        self.assertEqual(values[((1,), 0, 0)][0], 1)

    def test_character_nontrivial_on_roots(self):
        adjoint = hecke_datum(split_datum("A1", "adjoint"), [1])
        with self.assertRaises(ConsistencyError):
            twist_by_character(adjoint, UnitCharacter(2, (1,)))

    def test_compose(self):
        z = UnitCharacter(2, (1,)).compose(UnitCharacter(3, (1,)))
        self.assertEqual(z, UnitCharacter(6, (5,)))
        self.assertTrue(UnitCharacter(2, (2,)).is_trivial())


class TextFormatTest(unittest.TestCase):
    def test_parse_and_format(self):
        e = parse_element(A1, "(v - v**-1)*th(1) + th(-1)*N(1)")
        self.assertEqual(e, multiply(A1, n_basis(A1, S), theta(A1, (1,))))
        self.assertEqual(parse_element(A1, format_element(A1, e)), e)

    def test_parse_errors(self):
        with self.assertRaises(SpecFormatError):
            parse_element(A1, "th(1,2)")
        with self.assertRaises(SpecFormatError):
            parse_element(A1, "N(2)")
        with self.assertRaises(SpecFormatError):
            parse_element(A1, "th(1) +")

    def test_iwahori_matsumoto_text(self):
        e = parse_element(A1, "th(2)", Presentation.IWAHORI_MATSUMOTO)
        self.assertEqual(e, im_basis(A1, (2,)))
        self.assertEqual(format_element(A1, e), "(1)*T(2;)")


if __name__ == "__main__":
    unittest.main()
