"""Degree-matrix rigidity certificates for operator systems in M_n.

For a traceless Hermitian tuple ``X_1..X_d`` with Gram matrix
``Γ_ij = τ(X_i X_j)``, the degree matrices of the quantum graph
``span{1, X_i}`` (without the unit's contribution) are

    D   = Σ_ij (Γ⁻¹)_ij X_i X_j
    D_2 = Σ_ijkl (Γ⁻¹)_ij (Γ⁻¹)_kl X_k X_i X_j X_l

Both are fixed by every quantum symmetry, so if ``D`` and ``D_2`` generate
M_n the quantum automorphism group is trivial. The certificate checks that
the n² products ``D^i D_2^j`` (0 <= i, j < n) are linearly independent.

EXACT tuples get a rigorous answer (nonzero determinant). FLOAT tuples use
orthonormalized polynomial bases in ``D`` and ``D_2`` in place of raw powers;
they span the same space, but raw powers are too ill-conditioned to separate
rank n² from rank deficiency in double precision.
"""

import csv
import enum
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import GramSingular, NotHermitianTuple, NotTraceless
from .linalg import Backend, DEFAULT_TOL, TraceMode
from .opsys import RNG_NAME, RngSpec, Shape, sample_tuple


class Verdict(str, enum.Enum):
    CERTIFIED_RIGID = "CERTIFIED_RIGID"
    INCONCLUSIVE = "INCONCLUSIVE"


def _validated(tup, tol):
    if not tup.is_hermitian(tol):
        raise NotHermitianTuple("rigidity certificates need Hermitian tuples")
    if not tup.is_traceless(tol):
        raise NotTraceless("rigidity certificates need traceless tuples")
    if tup.backend == Backend.FLOAT:
        # span{1, X_i} is unchanged by removing residual trace
        n = tup.n
        return tup.map(lambda x: x - (np.trace(x) / n) * np.eye(n))
    return tup


def _gram_inverse(tup, mode, tol):
    g = la.gram(tup.matrices, mode, hermitian=True)
    if tup.backend == Backend.EXACT:
        try:
            return g, la.inverse(g)
        except np.linalg.LinAlgError:
            raise GramSingular(f"Gram matrix of the {tup.d}-tuple is singular") from None
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0 or s[-1] <= tol.rank_rel_tol * s[0]:
        raise GramSingular(f"Gram matrix of the {tup.d}-tuple is singular (cond {s[0] / max(s[-1], 1e-300):.3e})")
    return g, np.linalg.inv(g)


def _hermitize(x):
    return x if x.dtype == object else (x + la.adjoint(x)) / 2


def degree_matrices(tup, mode=TraceMode.NORMALIZED, tol=DEFAULT_TOL):
    """``(Γ, D, D_2)`` for a traceless Hermitian tuple."""
    tup = _validated(tup, tol)
    g, ginv = _gram_inverse(tup, mode, tol)
    xs = tup.stack()
    duals = np.tensordot(ginv, xs, axes=(0, 0))  # W_j = Σ_i (Γ⁻¹)_ij X_i
    d1 = _hermitize(np.einsum("jab,jbc->ac", duals, xs))
    d2 = _hermitize(np.einsum("jab,jbc->ac", duals @ d1, xs))
    return g, d1, d2


def degree_matrix(tup, mode=TraceMode.NORMALIZED, tol=DEFAULT_TOL):
    return degree_matrices(tup, mode, tol)[1]


def second_degree_matrix(tup, mode=TraceMode.NORMALIZED, tol=DEFAULT_TOL):
    return degree_matrices(tup, mode, tol)[2]


def _monomials(m, count):
    out = [la.eye(m.shape[0], la.backend_of(m))]
    for _ in range(1, count):
        out.append(out[-1] @ m)
    return out


def polynomial_basis(m, tol=DEFAULT_TOL):
    """Frobenius-orthonormal basis of ``span{1, M, ..., M^(n-1)}`` by Arnoldi.

    After a breakdown (the span stopped growing) the remaining slots are zero
    matrices, so rank deficiency stays visible downstream.
    """
    m = la.to_float(m)
    n = m.shape[0]
    scale = np.linalg.norm(m, 2)
    basis = [np.eye(n, dtype=complex) / np.sqrt(n)]
    while len(basis) < n:
        w = m @ basis[-1]
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        norm = np.linalg.norm(w)
        if scale == 0 or norm <= tol.rank_rel_tol * scale:
            basis.extend(np.zeros((n, n), dtype=complex) for _ in range(n - len(basis)))
            break
        basis.append(w / norm)
    return basis


@dataclass(frozen=True)
class PowersResult:
    rank: int
    verdict: Verdict
    basis: str
    determinant: object = None
    sigma_min: float = None
    sigma_max: float = None

    @property
    def ratio(self):
        if self.sigma_max is None:
            return None
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


def powers_basis_certificate(d1, d2, tol=DEFAULT_TOL, basis="auto"):
    """Rank of ``{D^i D_2^j : 0 <= i, j < n}`` and the resulting verdict.

    ``basis`` is ``"monomial"`` (raw powers, the only choice for EXACT) or
    ``"krylov"`` (orthonormal polynomial bases, the FLOAT default).
    """
    d1 = la.as_matrix(d1)
    d2 = la.as_matrix(d2)
    backend = la.common_backend(d1, d2)
    n = d1.shape[0]
    if basis == "auto":
        basis = "monomial" if backend == Backend.EXACT else "krylov"
    if basis == "krylov":
        if backend == Backend.EXACT:
            raise la.ExactBackendUnsupported("the krylov basis needs square roots")
        left, right = polynomial_basis(d1, tol), polynomial_basis(d2, tol)
    elif basis == "monomial":
        left, right = _monomials(d1, n), _monomials(d2, n)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    rows = np.stack([la.vec(p @ q) for p in left for q in right])
    r = la.rank(rows, tol)
    if backend == Backend.EXACT:
        certified = r.rank == n * n
        return PowersResult(r.rank, Verdict.CERTIFIED_RIGID if certified else Verdict.INCONCLUSIVE, basis,
                            determinant=r.determinant)
    certified = r.rank == n * n and r.sigma_min > tol.cert_margin * r.sigma_max
    return PowersResult(r.rank, Verdict.CERTIFIED_RIGID if certified else Verdict.INCONCLUSIVE, basis,
                        sigma_min=r.sigma_min, sigma_max=r.sigma_max)


def generated_algebra_dimension(generators, tol=DEFAULT_TOL):
    """Dimension of the unital algebra generated, by span closure under left multiplication."""
    gens = [la.as_matrix(g) for g in generators]
    if not gens:
        raise la.EmptyInput("need at least one generator")
    backend = la.common_backend(*gens)
    n = gens[0].shape[0]
    span = la.IncrementalSpan(n * n, backend, tol)
    unit = la.eye(n, backend)
    span.add(la.vec(unit))
    queue = [unit]
    # every accepted candidate grows the span, so at most n² rounds
    while queue and len(span) < n * n:
        b = queue.pop(0)
        for g in gens:
            if span.add(la.vec(g @ b)):
                newest = span.basis[-1]
                queue.append(la.unvec(la.exact_array(newest) if backend == Backend.EXACT else newest))
    return len(span)


@dataclass(frozen=True)
class RigidityCertificate:
    n: int
    d: int
    backend: Backend
    trace_mode: TraceMode
    gram: np.ndarray
    degree: np.ndarray
    second_degree: np.ndarray
    rank: int
    verdict: Verdict
    basis: str
    determinant: object = None
    sigma_min: float = None
    sigma_max: float = None
    closure_dimension: int = None

    @property
    def margin(self):
        if self.sigma_max is None:
            return None
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0

    @property
    def certified(self):
        return self.verdict == Verdict.CERTIFIED_RIGID

    def to_json(self, include_matrices=True):
        out = {
            "schema": 1,
            "n": self.n,
            "d": self.d,
            "backend": self.backend.value,
            "trace_mode": self.trace_mode.value,
            "rank": self.rank,
            "verdict": self.verdict.value,
            "basis": self.basis,
            "determinant": None if self.determinant is None else [str(self.determinant.re), str(self.determinant.im)],
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "margin": self.margin,
            "closure_dimension": self.closure_dimension,
        }
        if include_matrices:
            out["gram"] = la.matrix_to_json(self.gram)
            out["degree"] = la.matrix_to_json(self.degree)
            out["second_degree"] = la.matrix_to_json(self.second_degree)
        return out


def certify_tuple(tup, mode=TraceMode.NORMALIZED, tol=DEFAULT_TOL, basis="auto", closure_fallback=True):
    """Full pipeline: Γ, then D and D_2, then the powers test.

    An INCONCLUSIVE powers test runs the closure oracle as a second attempt;
    its result is stored in ``closure_dimension`` and never changes the verdict.
    """
    mode = TraceMode(mode)
    g, d1, d2 = degree_matrices(tup, mode, tol)
    res = powers_basis_certificate(d1, d2, tol, basis)
    closure = None
    if closure_fallback and res.verdict == Verdict.INCONCLUSIVE:
        closure = generated_algebra_dimension([d1, d2], tol)
    return RigidityCertificate(
        n=tup.n,
        d=tup.d,
        backend=tup.backend,
        trace_mode=mode,
        gram=g,
        degree=d1,
        second_degree=d2,
        rank=res.rank,
        verdict=res.verdict,
        basis=res.basis,
        determinant=res.determinant,
        sigma_min=res.sigma_min,
        sigma_max=res.sigma_max,
        closure_dimension=closure,
    )


# ---------------------------------------------------------------------------
# Monte Carlo sweeps
# ---------------------------------------------------------------------------


def default_d_range(n):
    return list(range(2, n * n - 2))


def trial_stream(n, d, trial):
    return (n << 40) | (d << 20) | trial


@dataclass
class SweepCell:
    n: int
    d: int
    trials: int
    certified: int = 0
    singular: int = 0
    closure_full: int = 0
    min_margin: float = None
    streams: list = field(default_factory=list)
    seconds: float = 0.0

    def to_json(self, timings=False):
        out = {
            "n": self.n,
            "d": self.d,
            "trials": self.trials,
            "certified": self.certified,
            "singular": self.singular,
            "closure_full": self.closure_full,
            "min_margin": self.min_margin,
            "streams": self.streams,
        }
        if timings:
            out["seconds"] = self.seconds
        return out


@dataclass
class SweepReport:
    seed: int
    trials: int
    backend: Backend
    trace_mode: TraceMode
    tol: la.TolerancePolicy
    cells: list

    @property
    def all_cells_certified(self):
        return all(c.certified >= 1 for c in self.cells)

    @property
    def total_trials(self):
        return sum(c.trials for c in self.cells)

    @property
    def total_certified(self):
        return sum(c.certified for c in self.cells)

    @property
    def certified_fraction(self):
        return self.total_certified / self.total_trials if self.total_trials else 1.0

    def to_json(self, timings=False):
        return {
            "schema": 1,
            "rng": RNG_NAME,
            "seed": self.seed,
            "trials": self.trials,
            "backend": self.backend.value,
            "trace_mode": self.trace_mode.value,
            "tolerance": {
                "rank_rel_tol": self.tol.rank_rel_tol,
                "cert_margin": self.tol.cert_margin,
                "psd_tol": self.tol.psd_tol,
                "trace_tol": self.tol.trace_tol,
            },
            "cells": [c.to_json(timings) for c in self.cells],
            "summary": {
                "cells": len(self.cells),
                "cells_certified": sum(c.certified >= 1 for c in self.cells),
                "trials": self.total_trials,
                "certified": self.total_certified,
                "certified_fraction": self.certified_fraction,
                "all_cells_certified": self.all_cells_certified,
            },
        }

    CSV_COLUMNS = ("n", "d", "trials", "certified", "min_margin", "seconds")

    def to_csv(self, timings=False):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_COLUMNS)
        for c in self.cells:
            margin = "" if c.min_margin is None else repr(c.min_margin)
            seconds = f"{c.seconds:.6f}" if timings else ""
            writer.writerow([c.n, c.d, c.trials, c.certified, margin, seconds])
        return buf.getvalue()


def _run_cell(n, d, trials, seed, mode, tol, backend):
    cell = SweepCell(n, d, trials)
    start = time.perf_counter()
    for t in range(trials):
        stream = trial_stream(n, d, t)
        cell.streams.append(stream)
        tup = sample_tuple(n, d, RngSpec(seed, stream), Shape.GENERIC, backend)
        try:
            cert = certify_tuple(tup, mode, tol)
        except GramSingular:
            cell.singular += 1
            continue
        if cert.certified:
            cell.certified += 1
        elif cert.closure_dimension == n * n:
            cell.closure_full += 1
        if cert.margin is not None:
            cell.min_margin = cert.margin if cell.min_margin is None else min(cell.min_margin, cert.margin)
    cell.seconds = time.perf_counter() - start
    return cell


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("QRIGID_THREADS")
    return max(1, int(env)) if env else 1


def sweep(n_values, d_values=None, trials=5, seed=0, mode=TraceMode.NORMALIZED, tol=DEFAULT_TOL,
          backend=Backend.FLOAT, workers=None):
    """Certify ``trials`` random tuples in every (n, d) cell.

    ``d_values`` is ``None`` for the default range ``2 <= d <= n² - 3``, an
    iterable applied to every n, or a callable ``n -> iterable``. Trial ``t``
    of cell ``(n, d)`` draws from stream ``trial_stream(n, d, t)``, so the
    report does not depend on execution order or worker count.
    """
    mode = TraceMode(mode)
    backend = Backend(backend)
    if isinstance(seed, RngSpec):
        seed = seed.seed
    grid = []
    for n in n_values:
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        if d_values is None:
            ds = default_d_range(n)
        elif callable(d_values):
            ds = list(d_values(n))
        else:
            ds = list(d_values)
        for d in ds:
            if not 1 <= d <= n * n - 1:
                raise ValueError(f"d={d} outside 1..{n * n - 1} for n={n}")
            grid.append((n, d))
    args = [(n, d, trials, seed, mode, tol, backend) for n, d in grid]
    nworkers = _workers(workers)
    if nworkers == 1:
        cells = [_run_cell(*a) for a in args]
    else:
        with ThreadPoolExecutor(nworkers) as pool:
            cells = list(pool.map(lambda a: _run_cell(*a), args))
    return SweepReport(seed, trials, backend, mode, tol, cells)

