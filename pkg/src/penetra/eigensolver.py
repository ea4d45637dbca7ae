"""Largest-magnitude eigenpairs of an implicit square operator.

The solver is a restarted Krylov iteration in real arithmetic.  Symmetric
mode (the default) runs a Lanczos three-term recurrence with full
reorthogonalization and thick restarts; nonsymmetric mode runs an Arnoldi
factorization with Krylov-Schur restarts and returns only real Ritz values,
since perturbations must stay real.  Operators are consumed through a
minimal protocol: ``op.n`` and ``op.matvec(v)``.

Restart scheme note: thick restarting is convergence-equivalent to implicit
QR shifting but far simpler to keep robust; restart cycles and matvec
counts are reported exactly, because oracle evaluations (2 per matvec when
the operator is a finite-difference JVP) are the scarce resource.

Degenerate (equal-magnitude) eigenvalues: the returned order among ties
follows the internal Rayleigh-Ritz ordering and is not stable under
perturbation; only the spanned subspace is well defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Breakdown, InvalidInput, NumericalFault, TooLarge
from .rng import Rng

DENSE_REFERENCE_GUARD = 256
_BREAKDOWN_RTOL = 1e-13


@dataclass
class EigConfig:
    k: int = 1
    tol: float = 1e-12
    itmax: int = 100
    ncv: int | None = None
    mode: str = "symmetric"
    seed: int = 0

    def resolved_ncv(self, n: int) -> int:
        ncv = self.ncv if self.ncv is not None else min(n, max(2 * self.k + 1, 20))
        if not (self.k < ncv <= n):
            raise InvalidInput(
                f"need k < ncv <= n, got k={self.k}, ncv={ncv}, n={n}"
            )
        return ncv

    def validate(self, n: int) -> None:
        if self.k < 1:
            raise InvalidInput(f"k must be >= 1, got {self.k}")
        if self.tol <= 0:
            raise InvalidInput(f"tol must be positive, got {self.tol}")
        if self.itmax < 1:
            raise InvalidInput(f"itmax must be >= 1, got {self.itmax}")
        if self.mode not in ("symmetric", "nonsymmetric"):
            raise InvalidInput(f"unknown mode {self.mode!r}")
        if n < 2:
            raise InvalidInput(f"operator dimension must be >= 2, got {n}")


@dataclass
class EigPair:
    value: float
    vector: np.ndarray
    residual: float


@dataclass
class EigResult:
    pairs: list[EigPair]
    restarts_used: int
    matvecs: int
    oracle_evals: int
    converged: bool
    complex_ritz_seen: int = 0

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs])


class DenseOperator:
    """Matvec against an explicit square matrix (tests and CLI diagnostics)."""

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInput(f"DenseOperator wants a square matrix, got {A.shape}")
        self.A = A
        self.n = A.shape[0]

    def matvec(self, v):
        return self.A @ v


class DiagonalOperator:
    def __init__(self, d: np.ndarray):
        self.d = np.asarray(d, dtype=np.float64)
        self.n = self.d.size

    def matvec(self, v):
        return self.d * v


def solve_largest_magnitude(op, cfg: EigConfig) -> EigResult:
    """k Ritz pairs of largest magnitude; see EigConfig for knobs.

    converged=False (tolerance not met within itmax restart cycles) is a
    result state, not an error: the best available pairs are returned.
    """
    n = op.n
    cfg.validate(n)
    ncv = cfg.resolved_ncv(n)
    evals_before = getattr(op, "oracle_evals", 0)
    if cfg.mode == "symmetric":
        result = _solve_symmetric(op, cfg.k, cfg.tol, cfg.itmax, ncv, cfg.seed)
    else:
        result = _solve_nonsymmetric(op, cfg.k, cfg.tol, cfg.itmax, ncv, cfg.seed)
    result.oracle_evals = getattr(op, "oracle_evals", 0) - evals_before
    return result


def _seeded_unit(rng: Rng, n: int) -> np.ndarray:
    v = rng.uniform(n, -1.0, 1.0)
    nv = float(np.sqrt(np.dot(v, v)))
    if nv == 0.0:
        raise Breakdown("seeded start vector is identically zero")
    return v / nv


def _fresh_direction(rng: Rng, basis: np.ndarray):
    """Seeded random vector orthogonal to basis columns, or Breakdown.

    Tries one fresh seeded draw, then retries once more before surfacing.
    """
    n = basis.shape[0]
    for _ in range(2):
        v = rng.uniform(n, -1.0, 1.0)
        v -= basis @ (basis.T @ v)
        v -= basis @ (basis.T @ v)
        nv = float(np.sqrt(np.dot(v, v)))
        if nv > 1e-8 * np.sqrt(n):
            return v / nv
    raise Breakdown("restart vector vanished after reorthogonalization (twice)")


def _keep_count(k: int, ncv: int) -> int:
    return max(k, min(k + (ncv - k) // 2, ncv - 2))


def _solve_symmetric(op, k, tol, itmax, ncv, seed):
    n = op.n
    rng = Rng(seed)
    Q = np.zeros((n, ncv))
    T = np.zeros((ncv, ncv))
    q = _seeded_unit(rng, n)
    locked = 0
    matvecs = 0
    cycles = 0

    while True:
        beta_last = 0.0
        j = locked
        early = None
        while j < ncv:
            Q[:, j] = q
            w = op.matvec(q)
            matvecs += 1
            basis = Q[:, : j + 1]
            c1 = basis.T @ w
            w = w - basis @ c1
            c2 = basis.T @ w
            w = w - basis @ c2
            T[j, j] = c1[j] + c2[j]
            beta = float(np.sqrt(np.dot(w, w)))
            scale = max(1.0, float(np.max(np.abs(np.diagonal(T)[: j + 1]))))
            if j + 1 == ncv:
                if beta > _BREAKDOWN_RTOL * scale:
                    beta_last = beta
                    q = w / beta
                else:
                    beta_last = 0.0
                    q = None
                j += 1
                break
            if beta > _BREAKDOWN_RTOL * scale:
                q = w / beta
                T[j, j + 1] = T[j + 1, j] = beta
            else:
                # Invariant subspace: Ritz pairs so far are exact.
                if j + 1 >= k:
                    theta, S = np.linalg.eigh(T[: j + 1, : j + 1])
                    early = _extract_symmetric(
                        Q[:, : j + 1], theta, S, k, 0.0, matvecs, cycles, True
                    )
                    break
                q = _fresh_direction(rng, Q[:, : j + 1])
                T[j, j + 1] = T[j + 1, j] = 0.0
            j += 1
        if early is not None:
            return early

        cycles += 1
        theta, S = np.linalg.eigh(T)
        order = np.argsort(-np.abs(theta), kind="stable")
        theta = theta[order]
        S = S[:, order]
        resid = np.abs(beta_last * S[ncv - 1, :])
        if np.all(resid[:k] <= tol * max(abs(theta[0]), 1.0)):
            return _extract_symmetric(Q, theta, S, k, beta_last, matvecs, cycles - 1, True)
        if cycles >= itmax:
            return _extract_symmetric(Q, theta, S, k, beta_last, matvecs, cycles - 1, False)

        ell = _keep_count(k, ncv)
        Y = Q @ S[:, :ell]
        spike = beta_last * S[ncv - 1, :ell]
        Q[:, :ell] = Y
        T[:] = 0.0
        T[:ell, :ell] = np.diag(theta[:ell])
        T[:ell, ell] = spike
        T[ell, :ell] = spike
        locked = ell
        if q is None:
            q = _fresh_direction(rng, Q[:, :ell])


def _extract_symmetric(Qb, theta, S, k, beta_last, matvecs, restarts, converged):
    order = np.argsort(-np.abs(theta), kind="stable")
    theta = theta[order]
    S = S[:, order]
    kk = min(k, theta.size)
    pairs = []
    for i in range(kk):
        vec = Qb @ S[:, i]
        vec = vec / np.sqrt(np.dot(vec, vec))
        pairs.append(
            EigPair(
                value=float(theta[i]),
                vector=vec,
                residual=float(abs(beta_last * S[-1, i])),
            )
        )
    return EigResult(pairs, restarts, matvecs, 0, converged)


def _solve_nonsymmetric(op, k, tol, itmax, ncv, seed):
    from scipy.linalg import schur

    n = op.n
    rng = Rng(seed)
    V = np.zeros((n, ncv))
    M = np.zeros((ncv, ncv))
    q = _seeded_unit(rng, n)
    locked = 0
    matvecs = 0
    cycles = 0
    complex_seen = 0

    while True:
        beta_last = 0.0
        j = locked
        early = None
        while j < ncv:
            V[:, j] = q
            w = op.matvec(q)
            matvecs += 1
            basis = V[:, : j + 1]
            c1 = basis.T @ w
            w = w - basis @ c1
            c2 = basis.T @ w
            w = w - basis @ c2
            M[: j + 1, j] = c1 + c2
            beta = float(np.sqrt(np.dot(w, w)))
            scale = max(1.0, float(np.max(np.abs(M[: j + 1, : j + 1]))))
            if j + 1 == ncv:
                if beta > _BREAKDOWN_RTOL * scale:
                    beta_last = beta
                    q = w / beta
                else:
                    beta_last = 0.0
                    q = None
                j += 1
                break
            if beta > _BREAKDOWN_RTOL * scale:
                q = w / beta
                M[j + 1, j] = beta
            else:
                sub = M[: j + 1, : j + 1]
                real_count = _count_real_ritz(sub)
                if real_count >= k:
                    early = _extract_nonsymmetric(
                        V[:, : j + 1], sub, k, 0.0, matvecs, cycles, True, tol
                    )
                    break
                q = _fresh_direction(rng, V[:, : j + 1])
                M[j + 1, j] = 0.0
            j += 1
        if early is not None:
            return early

        cycles += 1
        result = _extract_nonsymmetric(V, M, k, beta_last, matvecs, cycles - 1, None, tol)
        complex_seen = max(complex_seen, result.complex_ritz_seen)
        result.complex_ritz_seen = complex_seen
        if result.converged:
            return result
        if cycles >= itmax:
            return result

        # Krylov-Schur thick restart: reorder the real Schur form so the
        # largest-magnitude Ritz values lead, keep that block plus the
        # residual coupling row.
        ell = _keep_count(k, ncv)
        mags = np.sort(np.abs(np.linalg.eigvals(M)))[::-1]
        thr = mags[ell - 1] * (1.0 - 1e-12)
        Ts, Z, sdim = schur(M, output="real", sort=lambda wr, wi: np.hypot(wr, wi) >= thr)
        if sdim < 1 or sdim > ncv - 2:
            # Magnitude ties span the whole space; hard restart.
            locked = 0
            M[:] = 0.0
            if q is None:
                q = _seeded_unit(rng, n)
            continue
        Vk = V @ Z[:, :sdim]
        b = beta_last * Z[ncv - 1, :sdim]
        V[:, :sdim] = Vk
        M[:] = 0.0
        M[:sdim, :sdim] = Ts[:sdim, :sdim]
        M[sdim, :sdim] = b
        locked = sdim
        if q is None:
            q = _fresh_direction(rng, V[:, :sdim])


def _real_ritz_mask(vals: np.ndarray) -> np.ndarray:
    return np.abs(vals.imag) <= 1e-12 * np.maximum(np.abs(vals), 1.0)


def _count_real_ritz(M: np.ndarray) -> int:
    return int(np.sum(_real_ritz_mask(np.linalg.eigvals(M))))


def _extract_nonsymmetric(Vb, M, k, beta_last, matvecs, restarts, converged, tol):
    vals, vecs = np.linalg.eig(M)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    real_mask = _real_ritz_mask(vals)
    complex_seen = int(np.sum(~real_mask))
    resid = np.abs(beta_last) * np.abs(vecs[-1, :])
    pairs = []
    for i in np.flatnonzero(real_mask)[:k]:
        vec = Vb @ vecs[:, i].real
        norm = np.sqrt(np.dot(vec, vec))
        if norm == 0.0:
            continue
        pairs.append(
            EigPair(value=float(vals[i].real), vector=vec / norm, residual=float(resid[i]))
        )
    if converged is None:
        if len(pairs) == k:
            thresh = tol * max(abs(pairs[0].value), 1.0)
            converged = all(p.residual <= thresh for p in pairs)
        else:
            converged = False
    return EigResult(pairs, restarts, matvecs, 0, bool(converged), complex_seen)


def dense_eig_reference(A: np.ndarray, symmetric: bool | None = None):
    """Full dense eigendecomposition, the brute-force oracle for tests.

    Symmetric matrices go through a cyclic Jacobi rotation sweep written
    here (independent of the Krylov path); nonsymmetric ones through
    Hessenberg-QR (LAPACK dgeev), whose eigenvalues may be complex.
    Returns [(lambda_i, v_i)] sorted by |lambda| descending.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"square matrix required, got shape {A.shape}")
    n = A.shape[0]
    if n > DENSE_REFERENCE_GUARD:
        raise TooLarge(f"dense reference limited to n <= {DENSE_REFERENCE_GUARD}")
    if symmetric is None:
        amax = float(np.max(np.abs(A))) or 1.0
        symmetric = bool(np.all(np.abs(A - A.T) <= 1e-12 * amax))
    if symmetric:
        lam, V = _jacobi_eigh(A)
    else:
        lam, V = np.linalg.eig(A)
    order = np.argsort(-np.abs(lam), kind="stable")
    return [(lam[i], V[:, i]) for i in order]


def _jacobi_eigh(A: np.ndarray, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix."""
    A = A.copy()
    n = A.shape[0]
    V = np.eye(n)
    fro = float(np.sqrt(np.sum(A * A))) or 1.0
    for _ in range(max_sweeps):
        off_diag = A - np.diag(np.diagonal(A))
        off = float(np.sqrt(np.sum(off_diag * off_diag)))
        if off <= 1e-14 * fro:
            return np.diagonal(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * fro:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(tau, 1.0)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise NumericalFault(f"Jacobi sweeps did not converge in {max_sweeps} passes")


def penetration_residual(op, lam: float, v: np.ndarray) -> float:
    """|| op(v) - lam v ||_2 for a unit vector v; one matvec."""
    v = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.sqrt(np.dot(v, v)))
    if abs(norm - 1.0) > 1e-8:
        raise InvalidInput(f"v must be unit length, got ||v|| = {norm}")
    r = op.matvec(v) - lam * v
    return float(np.sqrt(np.dot(r, r)))
