"""Dense complex linear algebra over two scalar backends.

Matrices are plain numpy arrays. A ``complex128`` (or any numeric) array is a
FLOAT matrix; an ``object`` array of :class:`GaussianRational` entries is an
EXACT matrix. Every routine here dispatches on that distinction, and EXACT
paths never take square roots or call LAPACK.

Vectorization is row-major: ``vec(E_ij)`` is the standard basis vector at
index ``i*n + j``.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import (
    BackendMismatch,
    DimensionMismatch,
    EmptyInput,
    ExactBackendUnsupported,
    NotHermitian,
)
from .scalar import GaussianRational

try:  # Bareiss elimination is dominated by big-integer division
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover
    _bigint = int


class Backend(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class TraceMode(str, enum.Enum):
    """Which trace ``τ`` defines the inner product ``⟨x|y⟩ = τ(x* y)``."""

    NORMALIZED = "normalized"  # Tr / n, τ(1) = 1
    PLAIN = "plain"  # Tr, τ(1) = n
    DELTA_FORM = "delta"  # n Tr, τ(1) = n**2; the δ-form making m m* = id


@dataclass(frozen=True)
class TolerancePolicy:
    """Numerical thresholds for the FLOAT backend; EXACT ignores all of them.

    ``trace_tol`` bounds ``|Tr X| / ‖X‖_F`` when a tuple is checked for
    tracelessness. It is loose by default so that matrices printed to six
    significant digits still pass.
    """

    rank_rel_tol: float = 1e-9
    cert_margin: float = 1e-8
    psd_tol: float = 1e-10
    trace_tol: float = 1e-5

    def __post_init__(self):
        for name in ("rank_rel_tol", "cert_margin", "psd_tol", "trace_tol"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be nonnegative, got {value!r}")


DEFAULT_TOL = TolerancePolicy()


# ---------------------------------------------------------------------------
# construction and backend bookkeeping
# ---------------------------------------------------------------------------


def _gr(z):
    if isinstance(z, GaussianRational):
        return z
    if isinstance(z, (Rational, str)):
        return GaussianRational(z)
    raise BackendMismatch(f"non-exact value {z!r} in an EXACT matrix")


def exact_array(values):
    """Object array of GaussianRational from nested ints / Fractions / strings."""
    arr = np.array(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, z in np.ndenumerate(arr):
        out[idx] = _gr(z)
    return out


def backend_of(x):
    x = np.asarray(x)
    return Backend.EXACT if x.dtype == object else Backend.FLOAT


def common_backend(*arrays):
    backends = {backend_of(a) for a in arrays}
    if len(backends) != 1:
        raise BackendMismatch("operands mix EXACT and FLOAT matrices")
    return backends.pop()


def as_matrix(x):
    """Coerce to a square 2-D array of the appropriate dtype."""
    x = np.asarray(x)
    if x.dtype != object:
        x = x.astype(complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {x.shape}")
    return x


def eye(n, backend=Backend.FLOAT):
    if backend == Backend.EXACT:
        out = zeros((n, n), backend)
        for i in range(n):
            out[i, i] = GaussianRational(1)
        return out
    return np.eye(n, dtype=complex)


def zeros(shape, backend=Backend.FLOAT):
    if backend == Backend.EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(GaussianRational(0))
        return out
    return np.zeros(shape, dtype=complex)


def matrix_unit(n, i, j, backend=Backend.FLOAT):
    out = zeros((n, n), backend)
    out[i, j] = GaussianRational(1) if backend == Backend.EXACT else 1.0
    return out


def to_float(x):
    x = np.asarray(x)
    if x.dtype == object:
        return np.vectorize(complex, otypes=[complex])(x)
    return x.astype(complex)


def to_exact(x):
    """Exact image of a FLOAT array (binary floats are converted losslessly)."""
    x = np.asarray(x)
    if x.dtype == object:
        return exact_array(x)
    out = np.empty(x.shape, dtype=object)
    for idx, z in np.ndenumerate(x.astype(complex)):
        out[idx] = GaussianRational(Fraction(z.real), Fraction(z.imag))
    return out


def adjoint(x):
    return np.conj(np.asarray(x)).T


def scalar_mul(c, x):
    """``c * x`` with ``c`` an int / Fraction / GaussianRational (EXACT) or number (FLOAT)."""
    if backend_of(x) == Backend.EXACT:
        c = _gr(c)
        return np.vectorize(lambda z: c * z, otypes=[object])(x)
    return complex(c) * x


def is_zero(x, tol=0.0):
    x = np.asarray(x)
    if x.dtype == object:
        return not any(bool(z) for z in x.flat)
    return bool(np.linalg.norm(x) <= tol)


def equal(x, y, tol=0.0):
    """Exact equality (EXACT) or ``‖x - y‖_F <= tol * (1 + ‖x‖_F)`` (FLOAT)."""
    common_backend(x, y)
    if np.shape(x) != np.shape(y):
        return False
    if backend_of(x) == Backend.EXACT:
        return all(a == b for a, b in zip(np.asarray(x).flat, np.asarray(y).flat))
    return bool(np.linalg.norm(x - y) <= tol * (1.0 + np.linalg.norm(x)))


def frobenius2(x):
    """Squared Frobenius norm: a ``Fraction`` for EXACT, a float for FLOAT."""
    x = np.asarray(x)
    if x.dtype == object:
        return sum((_gr(z).abs2() for z in x.flat), Fraction(0))
    return float(np.vdot(x, x).real)


def is_hermitian(x, tol=DEFAULT_TOL):
    x = np.asarray(x)
    if x.dtype == object:
        return equal(x, adjoint(x))
    return bool(np.linalg.norm(x - adjoint(x)) <= tol.psd_tol * (1.0 + np.linalg.norm(x)))


def trace(x, mode=TraceMode.PLAIN):
    x = np.asarray(x)
    n = x.shape[0]
    t = np.trace(x)
    return _scale_by_mode(t, n, mode, exact=x.dtype == object)


def _scale_by_mode(value, n, mode, exact):
    mode = TraceMode(mode)
    if exact:
        value = _gr(value)
        factor = {TraceMode.NORMALIZED: Fraction(1, n), TraceMode.PLAIN: 1, TraceMode.DELTA_FORM: n}[mode]
        return value * factor
    factor = {TraceMode.NORMALIZED: 1.0 / n, TraceMode.PLAIN: 1.0, TraceMode.DELTA_FORM: float(n)}[mode]
    return complex(value) * factor


def hs_inner(x, y, mode=TraceMode.NORMALIZED):
    """``τ(x* y)`` for the trace selected by ``mode``."""
    x = np.asarray(x)
    y = np.asarray(y)
    backend = common_backend(x, y)
    if x.shape != y.shape or x.ndim != 2:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    exact = backend == Backend.EXACT
    raw = np.sum(np.conj(x) * y) if exact else np.vdot(x, y)
    return _scale_by_mode(raw, x.shape[0], mode, exact)


def _stack(matrices):
    mats = [np.asarray(m) for m in matrices]
    if not mats:
        raise EmptyInput("need at least one matrix")
    backend = common_backend(*mats)
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise DimensionMismatch(f"matrices of different shapes: {sorted(shapes)}")
    dtype = object if backend == Backend.EXACT else complex
    return np.stack(mats).astype(dtype), backend


def gram(matrices, mode=TraceMode.NORMALIZED, hermitian=False):
    """Gram matrix ``Γ_ij = τ(X_i* X_j)``.

    With ``hermitian=True`` the adjoint is dropped, giving ``τ(X_i X_j)``;
    the two agree on Hermitian tuples.
    """
    stack, backend = _stack(matrices)
    d, n, _ = stack.shape
    flat = stack.reshape(d, n * n)
    if hermitian:
        left = flat
        right = stack.transpose(0, 2, 1).reshape(d, n * n)
    else:
        left = np.conj(flat)
        right = flat
    g = left @ right.T
    exact = backend == Backend.EXACT
    out = np.empty((d, d), dtype=object if exact else complex)
    for idx, z in np.ndenumerate(g):
        out[idx] = _scale_by_mode(z, n, mode, exact)
    return out


def vec(x):
    """Row-major vectorization: ``vec(E_ij)[i*n + j] = 1``."""
    return np.asarray(x).reshape(-1)


def unvec(v):
    v = np.asarray(v)
    n = math.isqrt(v.size)
    if n * n != v.size or v.ndim != 1:
        raise DimensionMismatch(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(n, n)


# ---------------------------------------------------------------------------
# exact elimination
# ---------------------------------------------------------------------------


def _gi_div(a, b):
    """Exact quotient of Gaussian integers (a, b given as (re, im) pairs)."""
    ar, ai = a
    br, bi = b
    if not bi:
        qr, rr = divmod(ar, br)
        qi, ri = divmod(ai, br)
        if rr or ri:
            raise ArithmeticError("inexact Gaussian-integer division in Bareiss elimination")
        return (qr, qi)
    den = br * br + bi * bi
    qr, rr = divmod(ar * br + ai * bi, den)
    qi, ri = divmod(ai * br - ar * bi, den)
    if rr or ri:
        raise ArithmeticError("inexact Gaussian-integer division in Bareiss elimination")
    return (qr, qi)


def _integer_rows(rows):
    """Scale each row of Gaussian rationals to Gaussian integers.

    Returns the integer rows and the per-row scale factors.
    """
    out = []
    scales = []
    for row in rows:
        entries = [_gr(z) for z in row]
        lcm = 1
        for z in entries:
            lcm = math.lcm(lcm, z.re.denominator, z.im.denominator)
        out.append(
            [
                (
                    _bigint(z.re.numerator * (lcm // z.re.denominator)),
                    _bigint(z.im.numerator * (lcm // z.im.denominator)),
                )
                for z in entries
            ]
        )
        scales.append(lcm)
    return out, scales


def _bareiss(a, ncols):
    """Fraction-free row echelon form over Z[i], in place.

    Returns ``(rank, sign, last_pivot)``; for a square full-rank input the
    determinant is ``sign * last_pivot``.
    """
    m = len(a)
    r = 0
    sign = 1
    prev = (1, 0)
    for c in range(ncols):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c] != (0, 0)), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
            sign = -sign
        pr, pi = a[r][c]
        rowr = a[r]
        for i in range(r + 1, m):
            rowi = a[i]
            xr, xi = rowi[c]
            for j in range(c + 1, ncols):
                ar, ai = rowi[j]
                br, bi = rowr[j]
                num = (pr * ar - pi * ai - xr * br + xi * bi, pr * ai + pi * ar - xr * bi - xi * br)
                rowi[j] = num if prev == (1, 0) else _gi_div(num, prev)
            rowi[c] = (0, 0)
        prev = (pr, pi)
        r += 1
    return r, sign, prev


def _rref(rows):
    """Reduced row echelon form over Q(i). Returns (nonzero rows, pivot columns)."""
    a = [[_gr(z) for z in row] for row in rows]
    m = len(a)
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [z * inv for z in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [zi - f * zr for zi, zr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a[:r], pivots


# ---------------------------------------------------------------------------
# rank, spans, kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankResult:
    """Rank plus the evidence it rests on.

    FLOAT: extreme singular values (``sigma_min`` is the smallest of the
    ``min(rows, cols)`` singular values). EXACT: the exact determinant when
    the input is square, else ``None``.
    """

    rank: int
    backend: Backend
    sigma_min: float = None
    sigma_max: float = None
    determinant: GaussianRational = None

    @property
    def ratio(self):
        if self.sigma_max is None:
            return None
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


def _as_rows(vectors):
    if isinstance(vectors, np.ndarray):
        arr = vectors
    else:
        vectors = [np.asarray(v).reshape(-1) for v in vectors]
        if not vectors:
            raise EmptyInput("rank of an empty family")
        common_backend(*vectors)
        if len({v.size for v in vectors}) != 1:
            raise DimensionMismatch("vectors of different lengths")
        arr = np.stack(vectors)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyInput("rank of an empty family")
    return arr


def rank(vectors, tol=DEFAULT_TOL):
    """Rank of a family of vectors (rows of a 2-D array, or a list).

    EXACT uses Bareiss elimination over the Gaussian integers; FLOAT counts
    singular values above ``tol.rank_rel_tol * sigma_max``.
    """
    arr = _as_rows(vectors)
    if arr.dtype == object:
        rows, scales = _integer_rows(arr.tolist())
        r, sign, last = _bareiss(rows, arr.shape[1])
        det = None
        if arr.shape[0] == arr.shape[1]:
            if r < arr.shape[0]:
                det = GaussianRational(0)
            else:
                det = GaussianRational(sign * int(last[0]), sign * int(last[1])) / math.prod(scales)
        return RankResult(r, Backend.EXACT, determinant=det)
    s = np.linalg.svd(arr.astype(complex), compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    r = int(np.sum(s > tol.rank_rel_tol * smax)) if smax > 0 else 0
    return RankResult(r, Backend.FLOAT, sigma_min=float(s[-1]), sigma_max=smax)


def det(m):
    """Exact determinant of a square EXACT matrix."""
    m = as_matrix(m)
    if m.dtype != object:
        return complex(np.linalg.det(m))
    return rank(m).determinant


def span_basis(vectors, tol=DEFAULT_TOL):
    """Rows forming a basis of the span (RREF rows / orthonormal rows)."""
    arr = _as_rows(vectors)
    if arr.dtype == object:
        rows, _ = _rref(arr.tolist())
        return exact_array(rows) if rows else np.empty((0, arr.shape[1]), dtype=object)
    _, s, vh = np.linalg.svd(arr.astype(complex), full_matrices=False)
    r = int(np.sum(s > tol.rank_rel_tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[:r]


def nullspace(rows, tol=DEFAULT_TOL):
    """Basis (as rows) of ``{v : rows @ v = 0}``."""
    arr = _as_rows(rows)
    ncols = arr.shape[1]
    if arr.dtype == object:
        red, pivots = _rref(arr.tolist())
        free = [c for c in range(ncols) if c not in set(pivots)]
        basis = []
        for f in free:
            v = [GaussianRational(0)] * ncols
            v[f] = GaussianRational(1)
            for row, p in zip(red, pivots):
                v[p] = -row[f]
            basis.append(v)
        return exact_array(basis) if basis else np.empty((0, ncols), dtype=object)
    _, s, vh = np.linalg.svd(arr.astype(complex), full_matrices=True)
    r = int(np.sum(s > tol.rank_rel_tol * s[0])) if s.size and s[0] > 0 else 0
    return np.conj(vh[r:])


def same_span(a, b, tol=DEFAULT_TOL):
    """True iff the two families span the same subspace (rank of union test)."""
    ra = rank(a, tol).rank
    rb = rank(b, tol).rank
    both = np.concatenate([_as_rows(a), _as_rows(b)])
    return ra == rb == rank(both, tol).rank


def inverse(m):
    """Matrix inverse; exact Gauss-Jordan for EXACT input."""
    m = as_matrix(m)
    if m.dtype != object:
        return np.linalg.inv(m)
    n = m.shape[0]
    aug = [list(m[i]) + [GaussianRational(int(i == j)) for j in range(n)] for i in range(n)]
    red, pivots = _rref(aug)
    if pivots[:n] != list(range(n)) or len(red) < n:
        raise np.linalg.LinAlgError("singular matrix")
    return exact_array([row[n:] for row in red])


def eig_hermitian(x, tol=DEFAULT_TOL):
    """Ascending real spectrum of a Hermitian FLOAT matrix."""
    x = as_matrix(x)
    if x.dtype == object:
        raise ExactBackendUnsupported("eigenvalues need the FLOAT backend")
    if not is_hermitian(x, tol):
        raise NotHermitian("matrix is not Hermitian within psd_tol")
    h = (x + adjoint(x)) / 2
    w, u = np.linalg.eigh(h)
    resid = np.linalg.norm(h - (u * w) @ adjoint(u))
    scale = np.linalg.norm(h)
    if resid > 1e-10 * max(scale, np.finfo(float).tiny):
        raise ArithmeticError(f"eigendecomposition residual {resid:.3e} too large")
    return w


class IncrementalSpan:
    """A growing subspace with a membership-and-insert operation.

    FLOAT keeps an orthonormal basis (twice-iterated Gram-Schmidt); EXACT keeps
    echelon rows with distinct pivots.
    """

    def __init__(self, length, backend, tol=DEFAULT_TOL):
        self.length = length
        self.backend = Backend(backend)
        self.tol = tol
        self._rows = []
        self._pivots = []

    def __len__(self):
        return len(self._rows)

    @property
    def basis(self):
        return list(self._rows)

    def _reduce_exact(self, v):
        v = [_gr(z) for z in v]
        for row, p in zip(self._rows, self._pivots):
            f = v[p]
            if f:
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def contains(self, v):
        v = np.asarray(v).reshape(-1)
        if self.backend == Backend.EXACT:
            return not any(self._reduce_exact(v))
        return self._residual(v)[1]

    def _residual(self, v):
        v = v.astype(complex)
        norm = np.linalg.norm(v)
        w = v
        for _ in range(2):
            for q in self._rows:
                w = w - np.vdot(q, w) * q
        rn = np.linalg.norm(w)
        return w, bool(norm == 0 or rn <= self.tol.rank_rel_tol * norm), rn

    def add(self, v):
        """Insert ``v``; return True iff it enlarged the span."""
        v = np.asarray(v).reshape(-1)
        if v.size != self.length:
            raise DimensionMismatch(f"expected length {self.length}, got {v.size}")
        if self.backend == Backend.EXACT:
            w = self._reduce_exact(v)
            p = next((i for i, z in enumerate(w) if z), None)
            if p is None:
                return False
            inv = 1 / w[p]
            self._rows.append([z * inv for z in w])
            self._pivots.append(p)
            return True
        w, inside, rn = self._residual(v)
        if inside:
            return False
        self._rows.append(w / rn)
        return True


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def matrix_to_json(x):
    """``{"n": n, "entries": [[[re, im], ...], ...]}``; EXACT parts are "p/q" strings."""
    x = as_matrix(x)
    if x.dtype == object:
        entries = [[[str(_gr(z).re), str(_gr(z).im)] for z in row] for row in x]
    else:
        entries = [[[float(z.real), float(z.imag)] for z in row] for row in x]
    return {"n": int(x.shape[0]), "entries": entries}


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def matrix_from_json(obj):
    try:
        n = obj["n"]
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"matrix size must be a positive integer, got {n!r}")
    if len(entries) != n or any(len(row) != n for row in entries):
        raise DimensionMismatch(f"entries do not form an {n}x{n} array")
    kinds = set()
    for row in entries:
        for pair in row:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError(f"entry {pair!r} is not a [re, im] pair")
            for part in pair:
                if isinstance(part, str):
                    kinds.add(Backend.EXACT)
                elif _is_number(part):
                    kinds.add(Backend.FLOAT)
                else:
                    raise ValueError(f"entry part {part!r} is neither a number nor a 'p/q' string")
    if len(kinds) > 1:
        raise BackendMismatch("matrix JSON mixes exact strings and floating-point numbers")
    if kinds == {Backend.EXACT}:
        try:
            return exact_array([[GaussianRational.parse(re, im) for re, im in row] for row in entries])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad rational entry: {exc}") from None
    return np.array([[complex(re, im) for re, im in row] for row in entries], dtype=complex)
