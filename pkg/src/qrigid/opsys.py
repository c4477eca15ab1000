"""Operator tuples and operator systems in M_n.

An operator system here is a unital self-adjoint subspace of M_n, stored as a
spanning list plus a flag saying whether the unit is adjoined.
"""

import enum
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from . import linalg as la
from .errors import (
    DependentTuple,
    DimensionMismatch,
    EmptyInput,
    NormalizationViolated,
    NotHermitian,
    NotTraceless,
)
from .linalg import Backend, DEFAULT_TOL, TraceMode
from .scalar import GaussianRational

RNG_NAME = "numpy-philox4x64-seedsequence-v1"
EXACT_DYADIC_BITS = 10


def _frozen(x):
    x = la.as_matrix(x).copy()
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class OperatorTuple:
    """An ordered d-tuple of n x n matrices sharing one backend."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(_frozen(m) for m in self.matrices)
        if not mats:
            raise EmptyInput("an operator tuple needs at least one matrix")
        la.common_backend(*mats)
        if len({m.shape for m in mats}) != 1:
            raise DimensionMismatch("tuple entries have different sizes")
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self):
        return self.matrices[0].shape[0]

    @property
    def d(self):
        return len(self.matrices)

    @property
    def backend(self):
        return la.backend_of(self.matrices[0])

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]

    def stack(self):
        return np.stack(self.matrices)

    def is_hermitian(self, tol=DEFAULT_TOL):
        return all(la.is_hermitian(m, tol) for m in self.matrices)

    def is_traceless(self, tol=DEFAULT_TOL):
        for m in self.matrices:
            t = la.trace(m)
            if self.backend == Backend.EXACT:
                if t:
                    return False
            elif abs(t) > tol.trace_tol * max(np.linalg.norm(m), np.finfo(float).tiny):
                return False
        return True

    def recombine(self, coeffs):
        """Tuple ``(sum_i M_ij X_i)_j`` for a d x k coefficient matrix ``M``."""
        coeffs = np.asarray(coeffs)
        if coeffs.shape[0] != self.d:
            raise DimensionMismatch(f"coefficient matrix needs {self.d} rows")
        stack = self.stack()
        if self.backend == Backend.EXACT:
            coeffs = la.exact_array(coeffs)
        return OperatorTuple(tuple(np.tensordot(coeffs, stack, axes=(0, 0))))

    def map(self, fn):
        return OperatorTuple(tuple(fn(m) for m in self.matrices))


@dataclass(frozen=True)
class OperatorSystem:
    """``span(basis ∪ {1})`` if ``contains_unit`` else ``span(basis)``."""

    n: int
    basis: tuple
    contains_unit: bool = True
    backend: Backend = field(default=None)

    def __post_init__(self):
        mats = tuple(_frozen(m) for m in self.basis)
        for m in mats:
            if m.shape != (self.n, self.n):
                raise DimensionMismatch(f"basis element of shape {m.shape} in M_{self.n}")
        backend = la.common_backend(*mats) if mats else Backend(self.backend or Backend.FLOAT)
        if self.backend is not None and Backend(self.backend) != backend:
            raise la.BackendMismatch("declared backend disagrees with the basis")
        if not mats and not self.contains_unit:
            raise EmptyInput("an operator system is never zero")
        object.__setattr__(self, "basis", mats)
        object.__setattr__(self, "backend", backend)

    def spanning_set(self):
        out = list(self.basis)
        if self.contains_unit:
            out.append(la.eye(self.n, self.backend))
        return out

    def vectors(self):
        return np.stack([la.vec(m) for m in self.spanning_set()])

    def dim(self, tol=DEFAULT_TOL):
        return la.rank(self.vectors(), tol).rank

    def independent_basis(self, tol=DEFAULT_TOL):
        """Matrices forming a basis of the span."""
        return [la.unvec(v) for v in la.span_basis(self.vectors(), tol)]

    def is_self_adjoint(self, tol=DEFAULT_TOL):
        base = self.vectors()
        adj = np.stack([la.vec(la.adjoint(m)) for m in self.spanning_set()])
        return la.rank(base, tol).rank == la.rank(np.concatenate([base, adj]), tol).rank

    def has_unit(self, tol=DEFAULT_TOL):
        if self.contains_unit:
            return True
        base = self.vectors()
        unit = la.vec(la.eye(self.n, self.backend))[None, :]
        return la.rank(base, tol).rank == la.rank(np.concatenate([base, unit]), tol).rank

    def same_span(self, other, tol=DEFAULT_TOL):
        return la.same_span(self.vectors(), other.vectors(), tol)


def trivial_system(n, backend=Backend.FLOAT):
    """``C·1``, the operator system of the trivial (edgeless, reflexive) graph."""
    return OperatorSystem(n, (), True, Backend(backend))


def full_system(n, backend=Backend.FLOAT):
    """All of M_n: the complete quantum graph."""
    units = tuple(la.matrix_unit(n, i, j, backend) for i in range(n) for j in range(n))
    return OperatorSystem(n, units, False, Backend(backend))


def adjoin_unit(tup, check=True, tol=DEFAULT_TOL):
    """Operator system ``span{1, X_1, ..., X_d}`` of a traceless Hermitian tuple."""
    if check:
        if not tup.is_hermitian(tol):
            raise NotHermitian("tuple entries must be Hermitian")
        if not tup.is_traceless(tol):
            raise NotTraceless("tuple entries must be traceless")
    system = OperatorSystem(tup.n, tup.matrices, True, tup.backend)
    dim = system.dim(tol)
    if dim < tup.d + 1:
        warnings.warn(f"tuple of {tup.d} matrices spans only {dim - 1} traceless dimensions", DependentTuple)
    return system


def reflexive_complement(system, tol=DEFAULT_TOL):
    """Complement of the traceless part inside traceless matrices, plus the unit."""
    n, backend = system.n, system.backend
    unit = la.eye(n, backend)
    rows = []
    for m in system.spanning_set():
        t = la.trace(m, TraceMode.NORMALIZED)
        traceless = m - la.scalar_mul(t, unit)
        rows.append(np.conj(la.vec(traceless)))
    rows.append(la.vec(unit))
    kernel = la.nullspace(np.stack(rows), tol)
    return OperatorSystem(n, tuple(la.unvec(v) for v in kernel), True, backend)


def conjugate_system(system):
    return OperatorSystem(system.n, tuple(np.conj(m) for m in system.basis), system.contains_unit, system.backend)


def transpose_system(system):
    return OperatorSystem(system.n, tuple(m.T for m in system.basis), system.contains_unit, system.backend)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


class Shape(str, enum.Enum):
    GENERIC = "generic"
    ZERO_DIAGONAL = "zero_diagonal"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class RngSpec:
    """``(seed, stream)`` naming one reproducible random stream.

    Streams are Philox (counter-based) generators keyed through numpy's
    ``SeedSequence`` with the stream index as spawn key.
    """

    seed: int = 0
    stream: int = 0

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed % 2**64, spawn_key=(self.stream % 2**64,))
        return np.random.Generator(np.random.Philox(ss))


def _generator(rng):
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngSpec or numpy Generator, got {type(rng).__name__}")


def _dyadic(gen, size):
    scale = 2**EXACT_DYADIC_BITS
    return [Fraction(int(k), scale) for k in gen.integers(-scale, scale, size=size, endpoint=True)]


def sample_traceless_hermitian(n, rng, shape=Shape.GENERIC, backend=Backend.FLOAT):
    """One random traceless Hermitian n x n matrix.

    FLOAT draws GUE-style entries (complex Gaussians of unit variance above the
    diagonal, real standard Gaussians on it); EXACT draws dyadic rationals
    ``k / 2**10`` uniform in [-1, 1]. The trace is then projected out.
    """
    gen = _generator(rng)
    shape = Shape(shape)
    backend = Backend(backend)
    iu = np.triu_indices(n, k=1)
    m = len(iu[0])
    if backend == Backend.FLOAT:
        x = np.zeros((n, n), dtype=complex)
        if shape != Shape.DIAGONAL:
            z = (gen.standard_normal(m) + 1j * gen.standard_normal(m)) / np.sqrt(2)
            x[iu] = z
            x[(iu[1], iu[0])] = np.conj(z)
        if shape != Shape.ZERO_DIAGONAL:
            diag = gen.standard_normal(n)
            x[np.diag_indices(n)] = diag - diag.mean()
        return x
    x = la.zeros((n, n), Backend.EXACT)
    if shape != Shape.DIAGONAL:
        re, im = _dyadic(gen, m), _dyadic(gen, m)
        for k, (i, j) in enumerate(zip(*iu)):
            x[i, j] = GaussianRational(re[k], im[k])
            x[j, i] = GaussianRational(re[k], -im[k])
    if shape != Shape.ZERO_DIAGONAL:
        diag = _dyadic(gen, n)
        mean = sum(diag, Fraction(0)) / n
        for i in range(n):
            x[i, i] = GaussianRational(diag[i] - mean)
    return x


def sample_tuple(n, d, rng, shape=Shape.GENERIC, backend=Backend.FLOAT):
    """A d-tuple of independent samples drawn from one stream."""
    gen = _generator(rng)
    return OperatorTuple(tuple(sample_traceless_hermitian(n, gen, shape, backend) for _ in range(d)))


# ---------------------------------------------------------------------------
# structured tuples in M_3
# ---------------------------------------------------------------------------


def block_alphas(c):
    """``α_1, α_2 ∈ C^2`` with ``‖α_i‖² = 3/2`` and ``⟨α_1|α_2⟩ = (3/2) c i``."""
    s = np.sqrt(1.5)
    a1 = s * np.array([1.0, 0.0], dtype=complex)
    a2 = s * np.array([1j * c, np.sqrt(1.0 - c * c)], dtype=complex)
    return a1, a2


def _off_diagonal_block(alpha):
    y = np.zeros((3, 3), dtype=complex)
    y[:2, 2] = alpha
    y[2, :2] = np.conj(alpha)
    return y


def construct_block_tuple(alpha1, alpha2, check_normalization=False, tol=DEFAULT_TOL):
    """The tuple ``(T_1, T_2, Y_1, Y_2)`` in M_3.

    ``Y_i = [[0, |α_i⟩], [⟨α_i|, 0]]`` with the 2+1 block split; ``T_1, T_2``
    span the traceless diagonal and are orthonormal for the normalized trace.
    With ``check_normalization`` the condition ``(2/3) Re⟨α_i|α_j⟩ = δ_ij``
    (orthonormality of the ``Y_i``) is enforced.
    """
    alphas = [np.asarray(a, dtype=complex).reshape(2) for a in (alpha1, alpha2)]
    if check_normalization:
        for i in range(2):
            for j in range(2):
                value = (2.0 / 3.0) * np.vdot(alphas[i], alphas[j]).real
                if abs(value - (i == j)) > tol.rank_rel_tol:
                    raise NormalizationViolated(f"(2/3)Re<a{i + 1}|a{j + 1}> = {value!r}")
    t1 = np.sqrt(1.5) * np.diag([1.0, -1.0, 0.0]).astype(complex)
    t2 = np.diag([1.0, 1.0, -2.0]).astype(complex) / np.sqrt(2.0)
    return OperatorTuple((t1, t2, _off_diagonal_block(alphas[0]), _off_diagonal_block(alphas[1])))


# ---------------------------------------------------------------------------
# JSON and bundled fixtures
# ---------------------------------------------------------------------------


def tuple_to_json(tup, tol=DEFAULT_TOL):
    return {
        "n": tup.n,
        "d": tup.d,
        "matrices": [la.matrix_to_json(m) for m in tup.matrices],
        "hermitian": tup.is_hermitian(tol),
        "traceless": tup.is_traceless(tol),
    }


def tuple_from_json(obj):
    try:
        mats = [la.matrix_from_json(m) for m in obj["matrices"]]
        n, d = obj["n"], obj["d"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed tuple JSON: {exc}") from None
    tup = OperatorTuple(tuple(mats))
    if tup.n != n or tup.d != d:
        raise DimensionMismatch(f"header says n={n}, d={d} but matrices give n={tup.n}, d={tup.d}")
    return tup


def dumps(obj):
    """Canonical, byte-stable JSON text."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


FIXTURES = {"paper-n7-d4": "paper_n7_d4.json"}


def fixture_text(name):
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}")
    return resources.files("qrigid").joinpath("fixtures", FIXTURES[name]).read_text()


def load_fixture(name):
    return tuple_from_json(json.loads(fixture_text(name)))
