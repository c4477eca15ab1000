import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrigid import linalg as la
from qrigid import opsys
from qrigid.errors import DependentTuple, NormalizationViolated, NotHermitian, NotTraceless
from qrigid.linalg import Backend, TraceMode
from qrigid.opsys import OperatorSystem, OperatorTuple, RngSpec, Shape

T = np.diag([1.0, -1.0, 0.0]).astype(complex)


def random_system(n, d, seed, backend=Backend.FLOAT):
    tup = opsys.sample_tuple(n, d, RngSpec(seed, 0), backend=backend)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DependentTuple)
        return opsys.adjoin_unit(tup)


# ---------------------------------------------------------------------------
# adjoin_unit
# ---------------------------------------------------------------------------


def test_adjoin_unit_single_traceless():
    s = opsys.adjoin_unit(OperatorTuple((T,)))
    assert s.dim() == 2
    assert s.has_unit()
    assert la.hs_inner(np.eye(3), T, TraceMode.NORMALIZED) == 0


def test_adjoin_unit_dependent_tuple_warns():
    with pytest.warns(DependentTuple):
        s = opsys.adjoin_unit(OperatorTuple((T, 2 * T)))
    assert s.dim() == 2


def test_adjoin_unit_fixture_dim5():
    s = opsys.adjoin_unit(opsys.load_fixture("paper-n7-d4"))
    assert s.dim() == 5
    assert s.is_self_adjoint()


def test_adjoin_unit_rejects_bad_tuples():
    with pytest.raises(NotTraceless):
        opsys.adjoin_unit(OperatorTuple((np.diag([1.0, 0.0]).astype(complex),)))
    with pytest.raises(NotHermitian):
        opsys.adjoin_unit(OperatorTuple((np.array([[0, 1], [0, 0]], dtype=complex),)))


def test_adjoin_unit_exact_dims():
    s = random_system(3, 4, 5, Backend.EXACT)
    assert s.dim() == 5


# ---------------------------------------------------------------------------
# reflexive complement
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("backend", list(Backend))
@pytest.mark.parametrize("n", [2, 3, 4])
def test_complement_of_trivial_and_full(backend, n):
    comp = opsys.reflexive_complement(opsys.trivial_system(n, backend))
    assert comp.dim() == n * n
    back = opsys.reflexive_complement(opsys.full_system(n, backend))
    assert back.dim() == 1
    assert back.same_span(opsys.trivial_system(n, backend))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.data())
def test_complement_dimension_identity_and_involution(n, seed, data):
    d = data.draw(st.integers(1, n * n - 1))
    s = random_system(n, d, seed)
    comp = opsys.reflexive_complement(s)
    assert s.dim() + comp.dim() == n * n + 1
    assert comp.is_self_adjoint()
    assert opsys.reflexive_complement(comp).same_span(s)


def test_complement_exact_involution():
    s = random_system(3, 3, 11, Backend.EXACT)
    comp = opsys.reflexive_complement(s)
    assert comp.backend == Backend.EXACT
    assert comp.dim() == 9 - 3
    assert opsys.reflexive_complement(comp).same_span(s)


# ---------------------------------------------------------------------------
# conjugate / transpose
# ---------------------------------------------------------------------------


def test_conjugate_system_examples():
    real = opsys.adjoin_unit(OperatorTuple((T,)))
    assert opsys.conjugate_system(real).same_span(real)
    y = 1j * la.matrix_unit(2, 0, 1) - 1j * la.matrix_unit(2, 1, 0)
    s = OperatorSystem(2, (y,))
    c = opsys.conjugate_system(s)
    assert np.array_equal(c.basis[0], -y)
    assert c.same_span(s)


def test_transpose_involution_and_adjoint_of_conjugate():
    s = random_system(3, 4, 2)
    t = opsys.transpose_system(s)
    assert opsys.transpose_system(t).same_span(s)
    for a, b, c in zip(t.basis, opsys.conjugate_system(s).basis, s.basis):
        assert np.array_equal(a, la.adjoint(b))
        assert np.array_equal(a, c.T)
    assert t.is_self_adjoint()


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("backend", list(Backend))
@pytest.mark.parametrize("shape", list(Shape))
def test_sample_shapes(backend, shape):
    x = opsys.sample_traceless_hermitian(4, RngSpec(3, 1), shape, backend)
    assert la.is_hermitian(x)
    if backend == Backend.EXACT:
        assert la.trace(x) == 0
    else:
        assert abs(np.trace(x)) <= 1e-14 * np.linalg.norm(x)
    if shape == Shape.ZERO_DIAGONAL:
        assert all(x[i, i] == 0 for i in range(4))
    if shape == Shape.DIAGONAL:
        assert la.is_zero(x - np.diag(np.diag(x)))


def test_sample_diagonal_n2_is_multiple_of_sigma_z():
    x = opsys.sample_traceless_hermitian(2, RngSpec(9), Shape.DIAGONAL)
    assert x[0, 1] == 0 and x[1, 0] == 0
    assert x[0, 0] == pytest.approx(-x[1, 1])


def test_exact_samples_are_dyadic_in_unit_box():
    x = opsys.sample_traceless_hermitian(5, RngSpec(1), Shape.ZERO_DIAGONAL, Backend.EXACT)
    for z in x.flat:
        for part in (z.re, z.im):
            assert -1 <= part <= 1
            assert (part.denominator & (part.denominator - 1)) == 0


@pytest.mark.parametrize("backend", list(Backend))
def test_sampling_is_deterministic(backend):
    a = opsys.sample_tuple(4, 3, RngSpec(42, 0), backend=backend)
    b = opsys.sample_tuple(4, 3, RngSpec(42, 0), backend=backend)
    assert opsys.dumps(opsys.tuple_to_json(a)) == opsys.dumps(opsys.tuple_to_json(b))
    c = opsys.sample_tuple(4, 3, RngSpec(42, 1), backend=backend)
    assert opsys.dumps(opsys.tuple_to_json(a)) != opsys.dumps(opsys.tuple_to_json(c))


def test_rng_pinned_values():
    # guards the documented generator: Philox keyed by SeedSequence(seed, spawn_key=(stream,))
    gen = RngSpec(42, 0).generator()
    ref = np.random.Generator(np.random.Philox(np.random.SeedSequence(42, spawn_key=(0,))))
    assert np.array_equal(gen.standard_normal(4), ref.standard_normal(4))


# ---------------------------------------------------------------------------
# block tuple in M_3
# ---------------------------------------------------------------------------


def test_block_tuple_structure():
    a1, a2 = opsys.block_alphas(0.3)
    assert np.vdot(a1, a2) == pytest.approx(1.5 * 0.3j)
    tup = opsys.construct_block_tuple(a1, a2, check_normalization=True)
    assert tup.d == 4 and tup.n == 3
    assert tup.is_hermitian() and tup.is_traceless()
    assert np.allclose(la.gram(tup.matrices, hermitian=True), np.eye(4))
    y1 = tup[2]
    assert np.allclose(y1[:2, 2], a1) and np.allclose(y1[:2, :2], 0)


def test_block_tuple_eigenvalues():
    for c in (0.0, 0.3, 0.7):
        a1, a2 = opsys.block_alphas(c)
        _, _, y1, y2 = opsys.construct_block_tuple(a1, a2, check_normalization=True)
        lam = la.eig_hermitian(y1 @ y1 + y2 @ y2)
        assert np.allclose(lam, sorted([1.5 * (1 - c), 1.5 * (1 + c), 3.0]), atol=1e-12)


def test_block_tuple_normalization_violation():
    with pytest.raises(NormalizationViolated):
        opsys.construct_block_tuple([1, 0], [0, 1], check_normalization=True)
    opsys.construct_block_tuple([1, 0], [0, 1])


# ---------------------------------------------------------------------------
# JSON / fixture
# ---------------------------------------------------------------------------


def test_fixture_shape_and_digits():
    obj = json.loads(opsys.fixture_text("paper-n7-d4"))
    assert obj["n"] == 7 and obj["d"] == 4
    assert obj["hermitian"] and obj["traceless"]
    tup = opsys.load_fixture("paper-n7-d4")
    # first printed entry of X_1
    assert tup[0][0, 0] == -0.142491 and tup[0][6, 6] == -0.267433
    assert np.allclose(la.gram(tup.matrices, TraceMode.PLAIN, hermitian=True), np.eye(4), atol=1e-5)


def test_fixture_unknown_name():
    with pytest.raises(KeyError):
        opsys.fixture_text("nope")


@pytest.mark.parametrize("backend", list(Backend))
def test_tuple_json_round_trip(backend):
    tup = opsys.sample_tuple(3, 2, RngSpec(4), backend=backend)
    back = opsys.tuple_from_json(json.loads(opsys.dumps(opsys.tuple_to_json(tup))))
    for a, b in zip(tup, back):
        assert la.equal(a, b)
