"""Superoperators on M_n and the quantum-graph axioms.

``Superoperator.rep`` is the n² x n² matrix acting on row-major ``vec``:
column ``i*n + j`` holds ``vec(Φ(E_ij))``.

The Choi matrix is indexed so that its range is literally the span of the
entrywise conjugated Kraus operators: ``C[q*n + j, r*n + i] = Φ(E_ij)[r, q]``.
For ``Φ = Σ Y·Y*`` this gives ``C = Σ vec(conj Y) vec(conj Y)*``.

The multiplication adjoint is taken for the δ-form ``τ = n Tr``. Adjointness
``⟨m*(x), a⊗b⟩ = ⟨x, ab⟩`` then forces ``m*(E_ij) = (1/n) Σ_k E_ik ⊗ E_kj``,
so ``m(A⊗B)m*(E_ij) = (1/n) Σ_k A(E_ik) B(E_kj)``.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg as la
from .errors import (
    DegenerateSystem,
    DimensionMismatch,
    EmptyInput,
    ExactBackendUnsupported,
)
from .linalg import Backend, DEFAULT_TOL


@dataclass(frozen=True)
class Superoperator:
    n: int
    rep: np.ndarray

    def __post_init__(self):
        rep = la.as_matrix(self.rep).copy()
        if rep.shape != (self.n * self.n, self.n * self.n):
            raise DimensionMismatch(f"rep of shape {rep.shape} does not act on M_{self.n}")
        rep.setflags(write=False)
        object.__setattr__(self, "rep", rep)

    @property
    def backend(self):
        return la.backend_of(self.rep)

    def __call__(self, x):
        x = la.as_matrix(x)
        la.common_backend(x, self.rep)
        if x.shape != (self.n, self.n):
            raise DimensionMismatch(f"input of shape {x.shape}, expected {(self.n, self.n)}")
        return la.unvec(self.rep @ la.vec(x))

    def unit_images(self):
        """Array ``U[i, j] = Φ(E_ij)`` of shape (n, n, n, n)."""
        n = self.n
        return self.rep.T.reshape(n, n, n, n)

    @classmethod
    def from_unit_images(cls, images):
        images = np.asarray(images)
        n = images.shape[0]
        return cls(n, images.reshape(n * n, n * n).T)

    def compose(self, other):
        """``self ∘ other``."""
        return Superoperator(self.n, self.rep @ other.rep)

    def __add__(self, other):
        return Superoperator(self.n, self.rep + other.rep)

    def __sub__(self, other):
        return Superoperator(self.n, self.rep - other.rep)


@dataclass(frozen=True)
class KrausTuple:
    operators: tuple

    def __post_init__(self):
        ops = tuple(la.as_matrix(y) for y in self.operators)
        if not ops:
            raise EmptyInput("a Kraus tuple needs at least one operator")
        la.common_backend(*ops)
        if len({y.shape for y in ops}) != 1:
            raise DimensionMismatch("Kraus operators of different sizes")
        object.__setattr__(self, "operators", ops)

    @property
    def n(self):
        return self.operators[0].shape[0]

    @property
    def backend(self):
        return la.backend_of(self.operators[0])


@dataclass(frozen=True)
class ChoiMatrix:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = la.as_matrix(self.matrix).copy()
        if m.shape != (self.n * self.n, self.n * self.n):
            raise DimensionMismatch(f"Choi matrix of shape {m.shape} for n={self.n}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def identity_superop(n, backend=Backend.FLOAT):
    return Superoperator(n, la.eye(n * n, backend))


def complete_graph_superop(n, backend=Backend.FLOAT):
    """``x ↦ n Tr(x) 1``: the adjacency of the complete quantum graph on M_n."""
    u = la.vec(la.eye(n, backend))
    return Superoperator(n, la.scalar_mul(n, np.outer(u, u)))


def transpose_superop(n, backend=Backend.FLOAT):
    images = la.zeros((n, n, n, n), backend)
    for i in range(n):
        for j in range(n):
            images[i, j] = la.matrix_unit(n, j, i, backend)
    return Superoperator.from_unit_images(images)


def superop_from_kraus(k):
    """``x ↦ Σ Y x Y*``; in row-major form the matrix is ``Σ Y ⊗ conj(Y)``."""
    rep = sum(np.kron(y, np.conj(y)) for y in k.operators)
    return Superoperator(k.n, rep)


def orthonormal_basis(system, tol=DEFAULT_TOL):
    """Basis of ``system`` orthonormal for the normalized trace (FLOAT only)."""
    if system.backend == Backend.EXACT:
        raise ExactBackendUnsupported("orthonormalization needs square roots; use the FLOAT backend")
    rows = la.span_basis(system.vectors(), tol)
    if len(rows) == 0:
        raise DegenerateSystem("operator system spans nothing")
    # rows are Tr-orthonormal; tr = Tr/n needs a factor sqrt(n)
    return [np.sqrt(system.n) * la.unvec(v) for v in rows]


def adjacency_from_system(system, tol=DEFAULT_TOL):
    """Quantum adjacency ``x ↦ Σ X_i x X_i*`` over a tr-orthonormal basis of the system."""
    return superop_from_kraus(KrausTuple(tuple(orthonormal_basis(system, tol))))


def mult_adjoint_product(a, b):
    """``m(A ⊗ B) m*`` for the δ-form trace ``τ = n Tr``."""
    if a.n != b.n:
        raise DimensionMismatch(f"superoperators on M_{a.n} and M_{b.n}")
    la.common_backend(a.rep, b.rep)
    n = a.n
    prod = np.einsum("ikab,kjbc->ijac", a.unit_images(), b.unit_images())
    if a.backend == Backend.EXACT:
        prod = la.scalar_mul(Fraction(1, n), prod)
    else:
        prod = prod / n
    return Superoperator.from_unit_images(prod)


def choi(phi):
    n = phi.n
    c4 = phi.unit_images().transpose(3, 1, 2, 0)
    return ChoiMatrix(n, c4.reshape(n * n, n * n))


def superop_from_choi(c):
    n = c.n
    images = np.asarray(c.matrix).reshape(n, n, n, n).transpose(3, 1, 2, 0)
    return Superoperator.from_unit_images(images)


def choi_range_basis(k, tol=DEFAULT_TOL):
    """Basis of ``range(C_Φ)`` for ``Φ = Σ Y·Y*``, pulled back to M_n.

    Its span coincides with ``span{conj(Y_l)}``.
    """
    c = choi(superop_from_kraus(k)).matrix
    cols = la.span_basis(c.T, tol)
    return [la.unvec(v) for v in cols]


# ---------------------------------------------------------------------------
# positivity
# ---------------------------------------------------------------------------


def exact_psd_defect(h):
    """Exact PSD test for a Hermitian EXACT matrix by LDL* with symmetric pivoting.

    Returns ``Fraction(0)`` if ``h`` is positive semidefinite, otherwise a
    positive rational witnessing the failure (a negative pivot's magnitude, or
    the squared modulus of an off-diagonal entry in a zero-pivot row).
    """
    a = [[la._gr(z) for z in row] for row in np.asarray(h)]
    idx = list(range(len(a)))
    while idx:
        diag = [(a[i][i].re, i) for i in idx]
        for value, i in diag:
            if a[i][i].im != 0:
                raise la.NotHermitian("diagonal entry with nonzero imaginary part")
            if value < 0:
                return -value
        value, p = max(diag)
        if value == 0:
            worst = Fraction(0)
            for i in idx:
                for j in idx:
                    worst = max(worst, a[i][j].abs2())
            return worst
        idx.remove(p)
        piv = a[p][p]
        for i in idx:
            f = a[i][p] / piv
            if not f:
                continue
            row_p = a[p]
            row_i = a[i]
            for j in idx:
                row_i[j] = row_i[j] - f * row_p[j]
    return Fraction(0)


def min_eigenvalue(h):
    h = la.to_float(h)
    return float(np.linalg.eigvalsh((h + la.adjoint(h)) / 2)[0])


def is_completely_positive(phi, tol=DEFAULT_TOL):
    c = choi(phi).matrix
    if not la.is_hermitian(c, tol):
        return False
    if phi.backend == Backend.EXACT:
        return exact_psd_defect(c) == 0
    return bool(min_eigenvalue(c) >= -tol.psd_tol * max(1.0, np.linalg.norm(c)))


# ---------------------------------------------------------------------------
# quantum-graph axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the four quantum-graph checks.

    Residuals are Frobenius norms of the defect (FLOAT) or squared Frobenius
    norms as exact fractions (EXACT). The ``completely_positive`` residual is
    the size of the most negative Choi eigenvalue (FLOAT) or the exact LDL*
    defect (EXACT).
    """

    schur_idempotent: bool
    reflexive: bool
    self_adjoint: bool
    completely_positive: bool
    residuals: dict
    backend: Backend
    tolerance: float

    @property
    def all_pass(self):
        return self.schur_idempotent and self.reflexive and self.self_adjoint and self.completely_positive

    def to_json(self):
        def fmt(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        return {
            "schema": 1,
            "backend": self.backend.value,
            "tolerance": self.tolerance,
            "schur_idempotent": self.schur_idempotent,
            "reflexive": self.reflexive,
            "self_adjoint": self.self_adjoint,
            "completely_positive": self.completely_positive,
            "all_pass": self.all_pass,
            "residuals": {k: fmt(v) for k, v in self.residuals.items()},
        }


def _defect(x, y):
    if la.backend_of(x) == Backend.EXACT:
        return la.frobenius2(x - y)
    return float(np.linalg.norm(x - y))


def check_quantum_graph(a, tol=DEFAULT_TOL):
    """Evaluate Schur idempotency, reflexivity, self-adjointness and complete positivity."""
    n = a.n
    exact = a.backend == Backend.EXACT
    ident = identity_superop(n, a.backend)
    scale = 1.0 if exact else max(1.0, float(np.linalg.norm(a.rep)))
    threshold = tol.rank_rel_tol * scale

    def ok(r):
        return bool(r == 0 if exact else r <= threshold)

    res = {}
    res["schur_idempotent"] = _defect(mult_adjoint_product(a, a).rep, a.rep)
    res["reflexive"] = _defect(mult_adjoint_product(a, ident).rep, ident.rep)
    # <A(E_ij), E_kl> = <E_ij, A(E_kl)> for all units is rep == rep*.
    res["self_adjoint"] = _defect(a.rep, la.adjoint(a.rep))
    c = choi(a).matrix
    if exact:
        herm = la.frobenius2(c - la.adjoint(c))
        res["completely_positive"] = herm if herm else exact_psd_defect(c)
    else:
        lam = min_eigenvalue(c)
        herm = float(np.linalg.norm(c - la.adjoint(c)))
        res["completely_positive"] = max(herm, max(0.0, -lam))
    flags = {k: ok(v) for k, v in res.items()}
    if not exact:
        flags["completely_positive"] = is_completely_positive(a, tol)
    return AxiomReport(
        flags["schur_idempotent"],
        flags["reflexive"],
        flags["self_adjoint"],
        flags["completely_positive"],
        res,
        a.backend,
        0.0 if exact else threshold,
    )


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def superop_to_json(phi):
    return {"schema": 1, "n": phi.n, "rep": la.matrix_to_json(phi.rep)}


def superop_from_json(obj):
    try:
        n = obj["n"]
        rep = la.matrix_from_json(obj["rep"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed superoperator JSON: {exc}") from None
    return Superoperator(n, rep)


def choi_to_json(c):
    out = la.matrix_to_json(c.matrix)
    out["bipartite"] = True
    out["schema"] = 1
    return out


def choi_from_json(obj):
    if not isinstance(obj, dict) or not obj.get("bipartite"):
        raise ValueError("Choi JSON must carry \"bipartite\": true")
    m = la.matrix_from_json(obj)
    n = int(round(m.shape[0] ** 0.5))
    if n * n != m.shape[0]:
        raise DimensionMismatch(f"Choi matrix of size {m.shape[0]} is not n² x n²")
    return ChoiMatrix(n, m)


def kraus_from_json(obj):
    from .opsys import tuple_from_json

    return KrausTuple(tuple_from_json(obj).matrices)


def kraus_to_json(k):
    return {
        "n": k.n,
        "d": len(k.operators),
        "matrices": [la.matrix_to_json(y) for y in k.operators],
        "hermitian": all(la.is_hermitian(y) for y in k.operators),
        "traceless": all(la.is_zero(np.atleast_2d(la.trace(y)), 1e-12) for y in k.operators),
    }

