"""Complex linear algebra on C^N seen as a real inner-product space.

Vectors are stored as complex numpy arrays. The real inner product is
``<u, v> = Re(u^H v)`` and the complex structure ``J`` is multiplication
by ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroVector

ATOL = 1e-10
RTOL = 1e-8
DEGENERACY = 1e-12


def as_cvector(z) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a nonempty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def real_inner(u, v) -> float:
    """Riemannian inner product ``Re <u, v>_Herm``."""
    return float(np.real(np.vdot(u, v)))


def J(v) -> np.ndarray:
    return 1j * np.asarray(v)


def _check_nonzero(z, scale):
    norm = np.linalg.norm(z)
    if norm <= DEGENERACY * (1.0 + scale):
        raise ZeroVector(f"vector norm {norm:.3e} below degeneracy threshold")
    return norm


def invert(z, scale: float = 0.0) -> np.ndarray:
    """Inversion ``z / |z|^2`` in the unit sphere."""
    z = as_cvector(z)
    norm = _check_nonzero(z, scale)
    return z / norm**2


def reflect(z, v, scale: float = 0.0) -> np.ndarray:
    """Reflection of ``v`` across the real hyperplane orthogonal to ``z``."""
    z = as_cvector(z)
    v = as_cvector(v)
    if z.shape != v.shape:
        raise DimensionMismatch(f"{z.shape} vs {v.shape}")
    norm = _check_nonzero(z, scale)
    return v - 2.0 * real_inner(v, z) * z / norm**2


@dataclass(frozen=True, eq=False)
class RankReport:
    singular_values: np.ndarray
    effective_rank: int
    gap_ratio: float
    threshold: float


@dataclass(frozen=True, eq=False)
class CSubspace:
    """Complex subspace with a Hermitian-orthonormal basis (columns)."""

    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def complex_dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "CSubspace":
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> "CSubspace":
        return cls(np.eye(ambient_dim, dtype=np.complex128))

    def project(self, v) -> np.ndarray:
        return project(self, v)

    def real_basis(self) -> np.ndarray:
        """Real-orthonormal basis ``[b_1, i b_1, b_2, i b_2, ...]`` as columns."""
        out = np.empty((self.ambient_dim, 2 * self.complex_dim), dtype=np.complex128)
        out[:, 0::2] = self.basis
        out[:, 1::2] = 1j * self.basis
        return out


def numerical_rank(matrix, atol: float = ATOL, rtol: float = RTOL) -> RankReport:
    """Rank of a real or complex matrix from its singular values."""
    a = np.asarray(matrix)
    if a.size == 0:
        return RankReport(np.zeros(0), 0, float("inf"), atol)
    s = np.linalg.svd(a, compute_uv=False)
    smax = s[0] if s.size else 0.0
    thr = max(atol, rtol * smax)
    r = int(np.sum(s > thr))
    if r == len(s):
        gap = float("inf")
    elif r == 0:
        gap = 0.0
    else:
        gap = float(s[r - 1] / s[r]) if s[r] > 0 else float("inf")
    return RankReport(s, r, gap, thr)


def numerical_complex_rank(vectors, atol: float = ATOL, rtol: float = RTOL) -> RankReport:
    cols = _stack(vectors)
    return numerical_rank(cols, atol, rtol)


def _stack(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors.astype(np.complex128)
    vecs = [as_cvector(v) for v in vectors]
    if not vecs:
        raise DimensionMismatch("no vectors given")
    dims = {v.size for v in vecs}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
    return np.column_stack(vecs)


def complex_span(vectors, atol: float = ATOL, rtol: float = RTOL,
                 ambient_dim: int | None = None) -> CSubspace:
    """Orthonormal basis of the complex span by pivoted modified Gram-Schmidt.

    The remaining vector of largest norm is taken first, so the result is
    deterministic. A vector counts as dependent when its residual norm is at
    most ``max(atol, rtol * largest input norm)``.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        work = vectors.astype(np.complex128).copy()
    else:
        vectors = list(vectors)
        if not vectors:
            if ambient_dim is None:
                raise DimensionMismatch("ambient_dim required for an empty span")
            return CSubspace.zero(ambient_dim)
        work = _stack(vectors).copy()
    n, k = work.shape
    if k == 0:
        return CSubspace.zero(n)
    norms = np.linalg.norm(work, axis=0)
    thr = max(atol, rtol * float(norms.max()))
    basis = []
    active = np.ones(k, dtype=bool)
    while active.any() and len(basis) < n:
        norms = np.where(active, np.linalg.norm(work, axis=0), -1.0)
        j = int(np.argmax(norms))
        if norms[j] <= thr:
            break
        q = work[:, j] / norms[j]
        for b in basis:  # second pass keeps q orthogonal to working precision
            q = q - b * np.vdot(b, q)
        q = q / np.linalg.norm(q)
        basis.append(q)
        active[j] = False
        work = work - np.outer(q, q.conj() @ work)
    if not basis:
        return CSubspace.zero(n)
    return CSubspace(np.column_stack(basis))


def project(S: CSubspace, v) -> np.ndarray:
    """Hermitian-orthogonal projection of ``v`` onto ``S``."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[0] != S.ambient_dim:
        raise DimensionMismatch(f"vector of size {v.shape[0]} vs ambient {S.ambient_dim}")
    return S.basis @ (S.basis.conj().T @ v)


def orthogonal_complement(S: CSubspace) -> CSubspace:
    n = S.ambient_dim
    if S.complex_dim == 0:
        return CSubspace.full(n)
    if S.complex_dim == n:
        return CSubspace.zero(n)
    eye = np.eye(n, dtype=np.complex128)
    residual = eye - S.basis @ S.basis.conj().T
    comp = complex_span(residual, atol=1e-8, rtol=1e-8)
    # rounding in the residual can leave a tiny component along S
    b = comp.basis - S.basis @ (S.basis.conj().T @ comp.basis)
    q, _ = np.linalg.qr(b)
    return CSubspace(q[:, : n - S.complex_dim])


def intersect_complement(S: CSubspace, T: CSubspace) -> CSubspace:
    """``S`` intersected with the orthogonal complement of ``T`` (``T`` inside ``S``)."""
    residual = S.basis - T.basis @ (T.basis.conj().T @ S.basis)
    return complex_span(residual, atol=1e-8, rtol=1e-8)


def subspace_distance(S: CSubspace, T: CSubspace) -> float:
    """Spectral norm of the difference of orthogonal projectors."""
    if S.ambient_dim != T.ambient_dim:
        raise DimensionMismatch("ambient dimensions differ")
    ps = S.basis @ S.basis.conj().T
    pt = T.basis @ T.basis.conj().T
    return float(np.linalg.norm(ps - pt, 2))


def phase_normalize(v, tol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible coordinate is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    scale = np.max(np.abs(v)) if v.size else 0.0
    for x in v:
        if abs(x) > tol * scale:
            return v * (abs(x) / x)
    return v


def real_view(m) -> np.ndarray:
    """Stack real and imaginary parts: complex ``N x k`` -> real ``2N x k``."""
    m = np.asarray(m)
    return np.concatenate([m.real, m.imag], axis=0)
