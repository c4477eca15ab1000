import itertools

import numpy as np
import pytest

from qrigid import graded as gr
from qrigid import linalg as la
from qrigid.errors import IndexOutOfRange
from qrigid.graded import EVERY_DEGREE, FiniteGroup, Grading, Side
from qrigid.linalg import Backend
from qrigid.superop import KrausTuple, superop_from_kraus

SMALL_GROUPS = {"Z1": lambda: gr.cyclic(1), "Z2": lambda: gr.cyclic(2), "Z4": lambda: gr.cyclic(4),
                "Z6": lambda: gr.cyclic(6), "S3": gr.s3, "D4": gr.d4, "Q8": gr.q8,
                "Z2xZ2": lambda: gr.from_permutations([(0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)])}


def conj_map(y):
    return superop_from_kraus(KrausTuple((y,)))


@pytest.mark.parametrize("name", sorted(SMALL_GROUPS) + ["S4"])
def test_group_laws(name):
    g = gr.s4() if name == "S4" else SMALL_GROUPS[name]()
    e = g.identity
    for a in range(g.order):
        assert g.mul(a, g.inv(a)) == e == g.mul(g.inv(a), a)


def test_builtin_orders_and_abelianness():
    assert gr.s3().order == 6 and not gr.s3().is_abelian()
    assert gr.d4().order == 8 and not gr.d4().is_abelian()
    assert gr.q8().order == 8 and not gr.q8().is_abelian()
    assert gr.s4().order == 24
    assert gr.cyclic(5).is_abelian()
    q8 = gr.q8()
    assert [q8.name(g) for g in range(8) if q8.is_central(g)] == ["1", "-1"]


def test_invalid_tables_rejected():
    with pytest.raises(ValueError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(ValueError):
        FiniteGroup([[0, 1, 2], [1, 0, 2], [2, 2, 0]])


def test_group_json_round_trip():
    g = gr.s3()
    assert FiniteGroup.from_json(g.to_json()) == g


# ---------------------------------------------------------------------------
# translations and degrees
# ---------------------------------------------------------------------------


def test_translation_examples():
    g = gr.s3()
    assert np.array_equal(gr.left_translation(g, g.identity), np.eye(6))
    z3 = gr.cyclic(3)
    shift = gr.left_translation(z3, 1)
    assert np.array_equal(shift, np.roll(np.eye(3), 1, axis=0))
    with pytest.raises(IndexOutOfRange):
        gr.left_translation(z3, 3)


@pytest.mark.parametrize("name", sorted(SMALL_GROUPS))
def test_translations_form_a_representation(name):
    g = SMALL_GROUPS[name]()
    for a, b in itertools.product(range(g.order), repeat=2):
        ta, tb = gr.left_translation(g, a), gr.left_translation(g, b)
        assert np.array_equal(ta @ tb, gr.left_translation(g, g.mul(a, b)))
    for a in range(g.order):
        ta = gr.left_translation(g, a)
        assert np.array_equal(ta.T, gr.left_translation(g, g.inv(a)))


def test_exact_translation():
    g = gr.s3()
    t = gr.left_translation(g, 1, Backend.EXACT)
    assert la.backend_of(t) == Backend.EXACT
    assert la.equal(t @ la.adjoint(t), la.eye(6, Backend.EXACT))


@pytest.mark.parametrize("side", list(Side))
def test_degree_multiplicativity(side):
    g = gr.d4()
    grading = Grading.regular(g, side)
    for p, q, r in itertools.product(range(g.order), repeat=3):
        assert g.mul(grading.unit_degree(p, q), grading.unit_degree(q, r)) == grading.unit_degree(p, r)


def test_homogeneous_degree_examples():
    g = gr.s3()
    left, right = Grading.regular(g, Side.LEFT), Grading.regular(g, Side.RIGHT)
    for a in range(g.order):
        t = gr.left_translation(g, a)
        assert gr.homogeneous_degree(t, left) == a
        expected = a if g.is_central(a) else None
        assert gr.homogeneous_degree(t, right) == expected
    assert gr.homogeneous_degree(np.eye(6), left) == g.identity
    assert gr.homogeneous_degree(np.zeros((6, 6)), left) is EVERY_DEGREE


# ---------------------------------------------------------------------------
# graded superoperators
# ---------------------------------------------------------------------------


def test_s3_conjugation_moves_translations():
    g = gr.s3()
    for a, b in itertools.product(range(g.order), repeat=2):
        y, x = gr.left_translation(g, a), gr.left_translation(g, b)
        image = y @ x @ y.T
        target = g.mul(g.mul(a, b), g.inv(a))
        assert np.array_equal(image, gr.left_translation(g, target))
        assert (target != b) == (g.mul(a, b) != g.mul(b, a))


@pytest.mark.parametrize("name", sorted(SMALL_GROUPS))
def test_left_graded_iff_central_right_always(name):
    g = SMALL_GROUPS[name]()
    left, right = Grading.regular(g, Side.LEFT), Grading.regular(g, Side.RIGHT)
    for a in range(g.order):
        y = gr.left_translation(g, a)
        lcheck = gr.is_graded_superop(conj_map(y), left)
        assert bool(lcheck) == g.is_central(a)
        if not lcheck:
            p, q = lcheck.witness
            assert lcheck.image_degree != left.unit_degree(p, q)
        assert gr.is_graded_superop(conj_map(np.conj(y)), right)


def test_asymmetry_exists_for_every_nonabelian_group():
    for name, make in SMALL_GROUPS.items():
        g = make()
        left, right = Grading.regular(g, Side.LEFT), Grading.regular(g, Side.RIGHT)
        found = any(not gr.is_graded_superop(conj_map(gr.left_translation(g, a)), left)
                    and gr.is_graded_superop(conj_map(np.conj(gr.left_translation(g, a))), right)
                    for a in range(g.order))
        assert found == (not g.is_abelian()), name


def test_exact_backend_graded_check():
    g = gr.s3()
    y = gr.left_translation(g, 1, Backend.EXACT)
    assert not gr.is_graded_superop(conj_map(y), Grading.regular(g, Side.LEFT))
    assert gr.is_graded_superop(conj_map(np.conj(y)), Grading.regular(g, Side.RIGHT))


def test_grading_validation():
    with pytest.raises(IndexOutOfRange):
        Grading(gr.cyclic(2), (0, 2))
    with pytest.raises(la.DimensionMismatch):
        gr.is_graded_superop(conj_map(np.eye(3)), Grading.regular(gr.cyclic(2)))
