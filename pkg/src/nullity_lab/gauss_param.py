"""Gauss parametrization of complex hypersurfaces with constant relative nullity.

An anti-holomorphic base ``fh`` of complex dimension ``m`` in C^N determines,
at each base point ``w``, the vertex ``v = i(fh_perp(w))`` and the fiber ``L(w)``
of normal vectors orthogonal to ``fh(w)``. The hypersurface is
``(w, c) -> v(w) + frame(w) c``.

The fiber frame is holomorphic in ``w``: ``L(w)`` is the kernel of the
matrix ``K(w)`` whose rows are the conjugated tangent vectors and the
conjugated position of ``fh``, and the frame solves ``K x = 0`` on a fixed
pivot block. It is normalized to be orthonormal at the chart center, so the
fiber coordinates ``c`` form a holomorphic chart of the bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .complex_linalg import (
    ATOL,
    RTOL,
    CSubspace,
    complex_span,
    intersect_complement,
    invert,
    numerical_rank,
    orthogonal_complement,
    phase_normalize,
    project,
    real_inner,
    real_view,
    subspace_distance,
)
from .errors import (
    DimensionMismatch,
    NonzeroBaseNullity,
    NotImmersedAtPoint,
    NumericalInconsistency,
    PositionTangent,
    SingularFiberPoint,
    WrongBaseDimension,
    WrongHolomorphyClass,
)
from .immersion import (
    ANTI_HOLOMORPHIC,
    CLASS_TOL,
    Chart,
    ChartMap,
    FunctionMap,
    JetData,
    analyze_point,
    chart_J,
    chart_vector,
    first_normal,
    frame,
    from_real_coords,
    hessian_from_jacobian,
    holomorphy_residuals,
    normal_part_derivative,
    real_directions,
    relative_nullity,
    second_fundamental,
)

INDETERMINATE_FACTOR = 10.0


# ---------------------------------------------------------------- bundle data

@dataclass(frozen=True, eq=False)
class BaseFirstOrder:
    """Bundle data at one base point, with exact first derivatives."""

    w: np.ndarray
    fhat: np.ndarray
    f_perp: np.ndarray
    vertex: np.ndarray  # i(fh_perp), the minimal-norm point of the affine fiber
    offset: np.ndarray  # holomorphic point of the affine fiber
    doffset: np.ndarray  # N x 2m
    frame: np.ndarray  # N x nu, holomorphic
    dframe: np.ndarray  # 2m x N x nu


class GaussBundle:
    """Holomorphic description of the affine fibers ``vertex + L`` over a base.

    The fiber over ``w`` is ``{x : K(w) x = e}`` with ``K`` the conjugated
    tangent vectors and position of ``fh`` stacked as rows, and ``e`` the last
    unit vector. ``K`` is holomorphic in ``w``, so solving on a fixed pivot
    block gives a holomorphic point ``offset(w)`` and a holomorphic frame of
    ``L(w) = ker K(w)``. Both are normalized at the chart center: the frame is
    orthonormal there and the offset equals the vertex.

    With ``with_vertex=False`` the right side is zero, which gives the
    linear bundle used for hypersurfaces of projective space.
    """

    def __init__(self, base: ChartMap, with_vertex: bool = True):
        self.base = base
        self.with_vertex = with_vertex
        m, N = base.domain_dim, base.ambient_dim
        self.fiber_dim = N - m - 1
        if self.fiber_dim < 1:
            raise WrongBaseDimension(f"base of dim {m} in C^{N} leaves no fiber")
        if with_vertex:
            check_base(base, base.chart.center)
        j0 = base._jet(base.chart.center, 1)
        K0 = self._K(j0)
        _, _, piv = scipy.linalg.qr(K0, pivoting=True)
        self.pivots = np.sort(piv[: m + 1])
        self.free = np.sort(piv[m + 1:])
        H0 = self._raw_frame(K0)
        _, R = np.linalg.qr(H0)
        G = np.linalg.inv(R)
        phases = np.array([_phase_of(c) for c in (H0 @ G).T])
        self.normalization = G * phases[None, :]
        self.shift = np.zeros(self.fiber_dim, dtype=np.complex128)
        if with_vertex:
            gap = self._raw_offset(K0) - _vertex(j0)[1]
            self.shift = np.linalg.lstsq(H0, gap, rcond=None)[0]
        self._first = lru_cache(maxsize=4096)(self._first_order_bytes)
        self._second = lru_cache(maxsize=1024)(self._second_order_bytes)

    @staticmethod
    def _K(jet: JetData) -> np.ndarray:
        A = jet.jac[:, 0::2]
        return np.vstack([A.conj().T, jet.value.conj()[None, :]])

    def _raw_frame(self, K):
        H = np.zeros((K.shape[1], self.fiber_dim), dtype=np.complex128)
        H[self.free] = np.eye(self.fiber_dim)
        H[self.pivots] = -np.linalg.solve(K[:, self.pivots], K[:, self.free])
        return H

    def _raw_offset(self, K):
        x = np.zeros(K.shape[1], dtype=np.complex128)
        if self.with_vertex:
            e = np.zeros(K.shape[0], dtype=np.complex128)
            e[-1] = 1.0
            x[self.pivots] = np.linalg.solve(K[:, self.pivots], e)
        return x

    def first_order(self, w) -> BaseFirstOrder:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        return self._first(w.tobytes())

    def _first_order_bytes(self, key) -> BaseFirstOrder:
        w = np.frombuffer(key, dtype=np.complex128)
        j = self.base._jet(w, 2)
        fperp, vertex = _vertex(j)
        K = self._K(j)
        KP = K[:, self.pivots]
        H = self._raw_frame(K)
        x = self._raw_offset(K)
        n2 = j.jac.shape[1]
        dH = np.zeros((n2,) + H.shape, dtype=np.complex128)
        dx = np.zeros((H.shape[0], n2), dtype=np.complex128)
        for a in range(n2):
            dA = j.hess[0::2, a, :].T
            dK = np.vstack([dA.conj().T, j.jac[:, a].conj()[None, :]])
            # differentiate K H = 0 and K x = e with the free block held fixed
            dH[a][self.pivots] = -np.linalg.solve(KP, dK[:, self.pivots] @ H[self.pivots]
                                                   + dK[:, self.free])
            dx[self.pivots, a] = -np.linalg.solve(KP, dK @ x)
        offset = x - H @ self.shift
        doffset = dx - np.einsum("anj,j->na", dH, self.shift)
        G = self.normalization
        if not self.with_vertex:
            vertex = np.zeros_like(vertex)
        return BaseFirstOrder(w, j.value, fperp, vertex, offset, doffset, H @ G, dH @ G)

    def second_order(self, w):
        """``(d2 offset, d2 frame)`` by central differences of the exact first derivatives."""
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        return self._second(w.tobytes())

    def _second_order_bytes(self, key):
        w = np.frombuffer(key, dtype=np.complex128)
        step = 1e-4 * self.base.chart.scale
        n2 = 2 * w.size
        N = self.base.ambient_dim
        d2x = np.empty((n2, n2, N), dtype=np.complex128)
        d2F = np.empty((n2, n2, N, self.fiber_dim), dtype=np.complex128)
        for b, d in enumerate(real_directions(w.size)):
            p = self._first_order_bytes((w + step * d).tobytes())
            q = self._first_order_bytes((w - step * d).tobytes())
            d2x[b] = ((p.doffset - q.doffset) / (2 * step)).T
            d2F[b] = (p.dframe - q.dframe) / (2 * step)
        d2x = 0.5 * (d2x + d2x.transpose(1, 0, 2))
        d2F = 0.5 * (d2F + d2F.transpose(1, 0, 2, 3))
        return d2x, d2F


def _vertex(j: JetData):
    A = j.jac[:, 0::2]
    fperp = j.value - A @ np.linalg.lstsq(A, j.value, rcond=None)[0]
    return fperp, fperp / float(np.vdot(fperp, fperp).real)


def _phase_of(col) -> complex:
    k = int(np.argmax(np.abs(col) > 1e-12 * np.abs(col).max()))
    return abs(col[k]) / col[k]


@lru_cache(maxsize=64)
def _bundle(base: ChartMap, with_vertex: bool) -> GaussBundle:
    return GaussBundle(base, with_vertex)


def bundle_for(base: ChartMap, with_vertex: bool = True) -> GaussBundle:
    return _bundle(base, with_vertex)


# ---------------------------------------------------------------- fibers

@dataclass(frozen=True, eq=False)
class GaussFiber:
    """Vertex and orthonormal fiber basis at one base point."""

    base_point: np.ndarray
    vertex: np.ndarray
    L: CSubspace
    f_hat: np.ndarray
    f_hat_perp: np.ndarray
    tangent: CSubspace
    normal: CSubspace

    @property
    def L_basis(self) -> np.ndarray:
        return self.L.basis

    @property
    def P_data(self):
        return self.f_hat, 1j * self.f_hat, self.vertex

    def point(self, c) -> np.ndarray:
        return self.vertex + self.L.basis @ np.atleast_1d(np.asarray(c, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """A base point and coefficients ``c`` in the orthonormal fiber basis."""

    base_point: np.ndarray
    c: np.ndarray

    def __init__(self, base_point, c):
        object.__setattr__(self, "base_point", np.atleast_1d(np.asarray(base_point, dtype=np.complex128)))
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(c, dtype=np.complex128)))


def check_base(fhat: ChartMap, w):
    """Jet, frame and second fundamental form of a valid base at ``w``."""
    j, fr, sff, nd = analyze_point(fhat, w)
    _, anti = holomorphy_residuals(j.jac)
    if anti > CLASS_TOL:
        raise WrongHolomorphyClass(f"base is not anti-holomorphic at {w} (residual {anti:.2e})")
    if fr.position_tangent:
        raise PositionTangent(f"base position vector is tangent at {w}")
    if nd.nu:
        raise NonzeroBaseNullity(f"base has relative nullity {nd.nu} at {w}")
    return j, fr, sff


def orthonormal_fiber_basis(frame_cols) -> np.ndarray:
    """QR of the holomorphic frame with positive diagonal; smooth in ``w``."""
    q, r = np.linalg.qr(frame_cols)
    d = np.diag(r)
    return q * (np.abs(d) / d)[None, :]


def gauss_bundle(fhat: ChartMap, w) -> GaussFiber:
    w = fhat._check(w)
    return _gauss_bundle(fhat, w.tobytes())


@lru_cache(maxsize=8192)
def _gauss_bundle(fhat: ChartMap, key: bytes) -> GaussFiber:
    w = np.frombuffer(key, dtype=np.complex128)
    _, fr, _ = check_base(fhat, w)
    data = bundle_for(fhat).first_order(w)
    L = CSubspace(orthonormal_fiber_basis(data.frame))
    direct = intersect_complement(fr.normal, complex_span([fr.f_perp]))
    expected = fhat.ambient_dim - fhat.domain_dim - 1
    if direct.complex_dim != expected or subspace_distance(L, direct) > 1e-8:
        raise NumericalInconsistency(f"fiber at {w} disagrees with the normal-space complement")
    return GaussFiber(w, invert(fr.f_perp), L, data.fhat, fr.f_perp, fr.tangent, fr.normal)


def parametrize(fhat: ChartMap, xi: FiberPoint) -> np.ndarray:
    return gauss_bundle(fhat, xi.base_point).point(xi.c)


class AssembledHypersurface(ChartMap):
    """``(w, c) -> offset(w) + frame(w) c`` on base chart x fiber disc.

    ``offset`` and ``frame`` are holomorphic, so this is a holomorphic chart of
    the hypersurface; at the base chart center ``c`` agrees with the
    orthonormal fiber coordinates of ``FiberPoint``. First derivatives are
    exact; second derivatives differentiate them numerically.
    """

    def __init__(self, base: ChartMap, fiber_radius: float = 2.0, with_vertex: bool = True):
        self.base = base
        self.bundle = bundle_for(base, with_vertex)
        self.with_vertex = with_vertex
        nu = self.bundle.fiber_dim
        self.name = f"gauss({base.name})" if with_vertex else f"cone-param({base.name})"
        self.chart = Chart(np.concatenate([base.chart.center, np.zeros(nu)]),
                           np.concatenate([base.chart.radii, np.full(nu, fiber_radius)]))
        self.ambient_dim = base.ambient_dim

    @property
    def base_dim(self) -> int:
        return self.base.domain_dim

    @property
    def fiber_dim(self) -> int:
        return self.bundle.fiber_dim

    def split(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        return x[: self.base_dim], x[self.base_dim:]

    def _check(self, x) -> np.ndarray:
        # the map is affine in c, so only the base coordinates are constrained
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        if x.shape != (self.domain_dim,):
            raise DimensionMismatch(f"point of shape {x.shape} for a {self.domain_dim}-dim chart")
        self.base._check(x[: self.base_dim])
        return x

    def chart_point(self, xi: FiberPoint) -> np.ndarray:
        """Chart coordinates of ``vertex + sum c_k L_k``."""
        d = self.bundle.first_order(xi.base_point)
        target = d.vertex + orthonormal_fiber_basis(d.frame) @ xi.c
        c = np.linalg.lstsq(d.frame, target - d.offset, rcond=None)[0]
        return np.concatenate([xi.base_point, c])

    def fiber_point(self, x) -> FiberPoint:
        w, _ = self.split(x)
        d = self.bundle.first_order(w)
        c = orthonormal_fiber_basis(d.frame).conj().T @ (self._eval(x) - d.vertex)
        return FiberPoint(w, c)

    def _eval(self, x):
        w, c = self.split(x)
        d = self.bundle.first_order(w)
        return d.offset + d.frame @ c

    def _jet(self, x, order):
        w, c = self.split(x)
        d = self.bundle.first_order(w)
        m2, nu = 2 * self.base_dim, self.fiber_dim
        jac = np.empty((self.ambient_dim, m2 + 2 * nu), dtype=np.complex128)
        jac[:, :m2] = d.doffset + np.einsum("anj,j->na", d.dframe, c)
        jac[:, m2::2] = d.frame
        jac[:, m2 + 1::2] = 1j * d.frame
        hess = None
        if order >= 2:
            d2x, d2F = self.bundle.second_order(w)
            n = m2 + 2 * nu
            hess = np.zeros((n, n, self.ambient_dim), dtype=np.complex128)
            hess[:m2, :m2] = d2x + np.einsum("abnj,j->abn", d2F, c)
            for a in range(m2):
                hess[a, m2::2] = d.dframe[a].T
                hess[a, m2 + 1::2] = 1j * d.dframe[a].T
            hess[m2:, :m2] = hess[:m2, m2:].transpose(1, 0, 2)
        return JetData(x, d.offset + d.frame @ c, jac, hess)

    def fiber_grid(self, per_axis: int = 3, extent: float = 1.0) -> list[np.ndarray]:
        """Fiber coordinates on a ``per_axis`` grid over each real fiber axis."""
        ticks = np.linspace(-extent, extent, per_axis)
        axes = np.meshgrid(*([ticks] * (2 * self.fiber_dim)), indexing="ij")
        flat = np.stack([a.ravel() for a in axes], axis=1)
        return [from_real_coords(r) for r in flat]


def assemble(fhat: ChartMap, fiber_radius: float = 2.0) -> AssembledHypersurface:
    return AssembledHypersurface(fhat, fiber_radius)


# ---------------------------------------------------------------- singular set

@dataclass(frozen=True)
class SingularVerdict:
    status: str
    det_value: float
    min_singular_value: float
    threshold: float


def _verdict(s_min, thr, det) -> SingularVerdict:
    if s_min < thr / INDETERMINATE_FACTOR:
        status = "singular"
    elif s_min > thr * INDETERMINATE_FACTOR:
        status = "regular"
    else:
        status = "indeterminate"
    return SingularVerdict(status, float(det), float(s_min), float(thr))


def base_shape_operator(fhat: ChartMap, xi: FiberPoint):
    """``(sff of fh, fiber, direction vertex + xi)`` at the base point of ``xi``."""
    fib = gauss_bundle(fhat, xi.base_point)
    j = fhat._jet(fib.base_point, 2)
    sff = second_fundamental(j, frame(j))
    return sff, fib, fib.point(xi.c)


def singular_test(fhat: ChartMap, xi: FiberPoint, atol: float = ATOL, rtol: float = RTOL) -> SingularVerdict:
    """Invertibility of the base shape operator in direction ``vertex + xi``."""
    sff, _, delta = base_shape_operator(fhat, xi)
    B = sff.pairing_orthonormal(delta)
    s = np.linalg.svd(B, compute_uv=False)
    thr = max(atol, rtol * sff.scale() * np.linalg.norm(delta))
    return _verdict(s[-1], thr, np.linalg.det(B))


def differential_verdict(F: ChartMap, x, atol: float = ATOL, rtol: float = RTOL) -> SingularVerdict:
    """Rank test of the differential of a parametrization, same band semantics.

    The fiber directions are unbounded, so no chart-domain check is made.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
    jr = real_view(F._jet(x, 1).jac)
    s = np.linalg.svd(jr, compute_uv=False)
    thr = max(atol, rtol * s[0])
    return _verdict(s[-1], thr, 0.0)


def singular_fiber_points(fhat: ChartMap, w) -> tuple[np.ndarray, float]:
    """Fiber coordinates where the base shape operator vanishes (curve bases).

    For a curve the operator is a 2x2 matrix anticommuting with ``J`` and so is
    singular exactly when it is zero; this solves the real-affine system in
    ``(Re c, Im c)`` by least squares and returns ``(c, residual)``.
    """
    if fhat.domain_dim != 1:
        raise WrongBaseDimension("singular fiber points are solved for curve bases only")
    fib = gauss_bundle(fhat, w)
    j = fhat._jet(fib.base_point, 2)
    sff = second_fundamental(j, frame(j))
    b0 = sff.pairing_orthonormal(fib.vertex).ravel()
    cols = []
    for k in range(fib.L.complex_dim):
        cols.append(sff.pairing_orthonormal(fib.L_basis[:, k]).ravel())
        cols.append(sff.pairing_orthonormal(1j * fib.L_basis[:, k]).ravel())
    M = np.column_stack(cols)
    sol, *_ = np.linalg.lstsq(M, -b0, rcond=None)
    res = float(np.linalg.norm(M @ sol + b0))
    return from_real_coords(sol), res


# ---------------------------------------------------------------- shape operator

@dataclass(frozen=True, eq=False)
class ShapeFromBase:
    matrix: np.ndarray  # on the real basis below
    basis: np.ndarray  # N x 2m complex, real-orthonormal basis of Delta^perp
    variant: str


def _real_coords_in(basis, v):
    return np.real(basis.conj().T @ v)


def shape_from_base(fhat: ChartMap, xi: FiberPoint, variant: str = "tangential",
                    atol: float = ATOL, rtol: float = RTOL) -> ShapeFromBase:
    """Shape operator of the hypersurface in direction ``fh(w)`` on ``Delta^perp``.

    ``P(Z) = Z - <Z,fh> v - <Z,J fh> J v`` identifies base tangent vectors with
    ``Delta^perp``; the tangent part of ``dF`` there is ``-P(A Z)`` where ``A``
    is the base shape operator in direction ``v + xi``. The ``"tangential"``
    variant pushes the result forward with the orthogonal tangent projection
    ``T(Z) = Z - proj_{span fh} Z`` (``A_fh = T A^-1 P^-1``); ``"P"`` uses
    ``P`` on both sides (``A_fh = P A^-1 P^-1``).
    """
    if singular_test(fhat, xi, atol, rtol).status != "regular":
        raise SingularFiberPoint(f"fiber point {xi.c} over {xi.base_point} is not regular")
    sff, fib, delta = base_shape_operator(fhat, xi)
    fh, v = fib.f_hat, fib.vertex
    normal_line = complex_span([fh])
    dperp = orthogonal_complement(complex_span(np.column_stack([fib.L.basis, fh])))
    basis = dperp.real_basis()
    jac = sff.jac
    n2 = jac.shape[1]

    def P(z):
        return z - real_inner(z, fh) * v - real_inner(z, 1j * fh) * (1j * v)

    def T(z):
        return z - project(normal_line, z)

    Pm = np.column_stack([_real_coords_in(basis, P(jac[:, a])) for a in range(n2)])
    Tm = np.column_stack([_real_coords_in(basis, T(jac[:, a])) for a in range(n2)])
    A = sff.shape_operator(delta)
    left = Tm if variant == "tangential" else Pm
    mat = left @ np.linalg.solve(A, np.linalg.inv(Pm))
    return ShapeFromBase(mat, basis, variant)


def shape_operator_oracle(F: ChartMap, x, direction, basis) -> np.ndarray:
    """Shape operator of ``F`` at ``x`` in the normal direction closest to
    ``direction``, from finite-difference jets, in the given real basis of
    a tangent subspace. The direction is normalized to unit length."""
    j = F.fd_jet(x, order=2)
    fr = frame(j)
    sff = second_fundamental(j, fr)
    n = project(fr.normal, direction)
    n = n / np.linalg.norm(n)
    A = sff.shape_operator(n)
    cols = []
    for e in basis.T:
        xv = chart_vector(j, e)
        cols.append(_real_coords_in(basis, j.jac @ (A @ xv)))
    return np.column_stack(cols)


def shape_match(fhat: ChartMap, xi: FiberPoint, F: "AssembledHypersurface | None" = None, variant: str = "tangential") -> float:
    """Relative error between the base formula and the oracle, scaled by ``|fh(w)|``."""
    F = F if F is not None else bundle_assembled(fhat)
    res = shape_from_base(fhat, xi, variant)
    fib = gauss_bundle(fhat, xi.base_point)
    oracle = shape_operator_oracle(F, F.chart_point(xi), fib.f_hat, res.basis)
    oracle = oracle * np.linalg.norm(fib.f_hat)
    return float(np.linalg.norm(res.matrix - oracle) / np.linalg.norm(oracle))


@lru_cache(maxsize=64)
def bundle_assembled(fhat: ChartMap) -> AssembledHypersurface:
    return AssembledHypersurface(fhat)


# ---------------------------------------------------------------- base recovery

@dataclass(frozen=True, eq=False)
class RecoveredBase:
    g: np.ndarray
    gauss_map: np.ndarray  # unit homogeneous vector of the normal line, phase normalized
    anti_holomorphy_residual: float
    nullity_residual: float
    gauss_map_residual: float
    dg: np.ndarray


def _g_at(f: ChartMap, x):
    fr = frame(f._jet(x, 1))
    if fr.position_tangent:
        raise PositionTangent(f"position vector is tangent at {x}")
    return invert(fr.f_perp)


def _fd_columns(fn, x, step):
    return np.column_stack([(fn(x + step * d) - fn(x - step * d)) / (2 * step)
                            for d in real_directions(x.size)])


def recover_base(f: ChartMap, x, nullity=None) -> RecoveredBase:
    """``g = i(f_perp)`` with anti-holomorphy and leaf-constancy diagnostics."""
    x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
    j = f.jet(x, order=1)
    fr = frame(j)
    if fr.normal.complex_dim != 1:
        raise WrongBaseDimension("base recovery needs a hypersurface")
    if fr.position_tangent:
        raise PositionTangent(f"position vector is tangent at {x}")
    g = invert(fr.f_perp)
    step = 1e-5 * f.chart.scale
    dg = _fd_columns(lambda y: _g_at(f, y), x, step)
    _, anti = holomorphy_residuals(dg)
    if nullity is None:
        jj, fr2, sff, nullity = analyze_point(f, x)
    null_res = 0.0
    for X in nullity.kernel.T:
        X = X / np.linalg.norm(j.jac @ X)
        null_res = max(null_res, float(np.linalg.norm(dg @ X)))
    k = int(np.argmax(np.abs(g)))
    dh = _fd_columns(lambda y: (lambda gg: gg / gg[k])(_g_at(f, y)), x, step)
    _, gm_res = holomorphy_residuals(dh)
    gm = phase_normalize(g / np.linalg.norm(g))
    return RecoveredBase(g, gm, anti, null_res, gm_res, dg)


@dataclass(frozen=True, eq=False)
class RecoveredFiber:
    g: np.ndarray
    vertex: np.ndarray
    L: CSubspace
    base_tangent: CSubspace
    base_normal: CSubspace
    f_hat_perp: np.ndarray


def recover_fiber(f: ChartMap, x, base_dim: int | None = None) -> RecoveredFiber:
    """Base point, vertex and fiber reconstructed from the hypersurface alone."""
    x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
    g = _g_at(f, x)
    dg = _fd_columns(lambda y: _g_at(f, y), x, 1e-5 * f.chart.scale)
    tan = complex_span(dg, 1e-7, 1e-6)
    if base_dim is not None and tan.complex_dim != base_dim:
        raise NumericalInconsistency(f"recovered base has dim {tan.complex_dim}, expected {base_dim}")
    nor = orthogonal_complement(tan)
    fhp = project(nor, g)
    L = intersect_complement(nor, complex_span([fhp]))
    return RecoveredFiber(g, invert(fhp), L, tan, nor, fhp)


def transversal_base(f: ChartMap, x, nullity, radius_fraction: float = 0.2) -> FunctionMap:
    """The recovered base restricted to a complex slice through ``x`` transversal to the leaves."""
    j = f.jet(x, order=1)
    jr = real_view(j.jac)
    G = jr.T @ jr
    ker = nullity.kernel
    n2 = G.shape[0]
    if ker.shape[1]:
        # G-orthogonal complement of the nullity in chart coordinates
        comp = scipy.linalg.null_space((G @ ker).T)
    else:
        comp = np.eye(n2)
    dirs = complex_span(np.column_stack([from_real_coords(c) for c in comp.T]), 1e-8, 1e-8)
    U = dirs.basis
    k = U.shape[1]
    chart = Chart(np.zeros(k), radius_fraction * f.chart.scale)
    return FunctionMap(f"base({f.name})", chart, lambda s: _g_at(f, x + U @ s), f.ambient_dim)


def vertex_flags(sff_base, vertex, L: CSubspace, atol=ATOL, rtol=RTOL, incl_tol=1e-6):
    """``(A_vertex nonsingular, L inside the complement of the first normal space)``."""
    B = sff_base.pairing_orthonormal(vertex)
    s = np.linalg.svd(B, compute_uv=False)
    thr = max(atol, rtol * sff_base.scale() * np.linalg.norm(vertex))
    nonsingular = bool(s[-1] > INDETERMINATE_FACTOR * thr)
    n1 = first_normal(sff_base, atol, rtol)
    overlap = float(np.linalg.norm(n1.basis.conj().T @ L.basis)) if n1.complex_dim and L.complex_dim else 0.0
    return nonsingular, overlap <= incl_tol, overlap


def verify_roundtrip(f: ChartMap, samples, tol: float = 1e-8) -> dict:
    """Recover base and fiber from ``f`` and check each sample lies on ``vertex + L``.

    For an assembled hypersurface the base is recovered on the transversal
    ``c = 0`` and compared with the known base. Per-sample failures are recorded,
    never raised.
    """
    assembled = isinstance(f, AssembledHypersurface)
    records = []
    cache = {}
    for x in samples:
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        rec = {"x": x, "status": "ok"}
        try:
            fx = f._eval(x)
            if assembled:
                w, c = f.split(x)
                key = w.tobytes()
                if key not in cache:
                    x0 = np.concatenate([w, np.zeros_like(c)])
                    rf = recover_fiber(f, x0, f.base_dim)
                    jb = f.base._jet(w, 2)
                    sffb = second_fundamental(jb, frame(jb))
                    cache[key] = (rf, sffb, float(np.linalg.norm(rf.g - f.base._eval(w))))
                rf, sffb, base_err = cache[key]
                cfit = gauss_bundle(f.base, w).L_basis.conj().T @ (fx - rf.vertex)
                rebuilt = parametrize(f.base, FiberPoint(w, cfit))
                rec["base_error"] = base_err
            else:
                _, _, _, nd = analyze_point(f, x)
                rf = recover_fiber(f, x)
                tb = transversal_base(f, x, nd)
                jb = tb.fd_jet(np.zeros(tb.domain_dim))
                sffb = second_fundamental(jb, frame(jb))
                d = fx - rf.vertex
                rebuilt = rf.vertex + project(rf.L, d)
            d = fx - rf.vertex
            scale = max(1.0, float(np.linalg.norm(fx)))
            rec["membership"] = float(np.linalg.norm(d - project(rf.L, d)) / scale)
            rec["roundtrip"] = float(np.linalg.norm(rebuilt - fx) / scale)
            loose = 1e-6 if not assembled else ATOL
            ns, incl, overlap = vertex_flags(sffb, rf.vertex, rf.L,
                                                atol=loose, rtol=1e-6 if not assembled else RTOL)
            rec["vertex_nonsingular"] = ns
            rec["L_in_N1perp"] = incl
            rec["n1_overlap"] = overlap
            worst = max(rec["membership"], rec["roundtrip"], rec.get("base_error", 0.0))
            if worst > tol:
                rec["status"] = "fail"
        except PositionTangent as exc:
            rec["status"] = "position_tangent"
            rec["error"] = str(exc)
        except (NotImmersedAtPoint, NumericalInconsistency, np.linalg.LinAlgError) as exc:
            rec["status"] = "degenerate"
            rec["error"] = str(exc)
        records.append(rec)
    ok = [r for r in records if r["status"] in ("ok", "fail")]
    summary = {
        "samples": len(records),
        "evaluated": len(ok),
        "failures": sum(r["status"] == "fail" for r in records),
        "position_tangent": sum(r["status"] == "position_tangent" for r in records),
        "degenerate": sum(r["status"] == "degenerate" for r in records),
        "max_membership": max((r["membership"] for r in ok), default=0.0),
        "max_roundtrip": max((r["roundtrip"] for r in ok), default=0.0),
        "max_base_error": max((r.get("base_error", 0.0) for r in ok), default=0.0),
        "vertex_nonsingular_all": all(r["vertex_nonsingular"] for r in ok) if ok else False,
        "L_in_N1perp_all": all(r["L_in_N1perp"] for r in ok) if ok else False,
    }
    summary["passed"] = bool(ok) and summary["failures"] == 0 and summary["position_tangent"] == 0
    return {"records": records, "summary": summary}


# ---------------------------------------------------------------- cylinder mechanism

@dataclass(frozen=True, eq=False)
class CylinderReport:
    is_cylinder: bool
    plane: CSubspace
    degenerate: bool
    span_dim: int


def cylinder_detect(fhat: ChartMap, samples, tol: float = 1e-8) -> CylinderReport:
    """Whether first normal spaces and vertex lines of a curve base stay in one C^2."""
    if fhat.domain_dim != 1:
        raise WrongBaseDimension("cylinder detection applies to curve bases")
    vecs = []
    n1_total = 0
    for w in samples:
        j = fhat.jet(w, order=2)
        fr = frame(j)
        sff = second_fundamental(j, fr)
        n1 = first_normal(sff)
        n1_total += n1.complex_dim
        vecs.extend(n1.basis.T)
        if not fr.position_tangent:
            vecs.append(invert(fr.f_perp))
    span = complex_span(vecs, atol=tol, rtol=tol, ambient_dim=fhat.ambient_dim)
    return CylinderReport(span.complex_dim <= 2, span, n1_total == 0, span.complex_dim)


def base_tangent_at(fhat: ChartMap, w) -> CSubspace:
    return frame(fhat.jet(w, order=1)).tangent


def L_subspace_distance(F: AssembledHypersurface, x, nullity) -> float:
    """Distance between the relative nullity of ``F`` and the fiber ``L``."""
    w, _ = F.split(x)
    fib = gauss_bundle(F.base, w)
    return subspace_distance(nullity.delta, fib.L)


def normality_residual(F: AssembledHypersurface, x) -> float:
    """``max |<dF(X), fh(w)>|`` over real chart directions, relative to ``|dF|``."""
    w, _ = F.split(x)
    j = F.jet(x, order=1)
    fh = F.base._eval(w)
    vals = np.abs(fh.conj() @ j.jac)
    return float(vals.max() / max(1.0, np.linalg.norm(j.jac, axis=0).max() * np.linalg.norm(fh)))


def rank_of(mat, atol=ATOL, rtol=RTOL) -> int:
    return numerical_rank(mat, atol, rtol).effective_rank


__all__ = [
    "AssembledHypersurface", "FiberPoint", "GaussBundle", "GaussFiber", "RecoveredBase",
    "SingularVerdict", "ShapeFromBase", "CylinderReport", "assemble", "bundle_for",
    "cylinder_detect", "differential_verdict", "gauss_bundle", "parametrize", "recover_base",
    "recover_fiber", "shape_from_base", "shape_match", "shape_operator_oracle",
    "singular_fiber_points", "singular_test", "verify_roundtrip", "chart_J", "ANTI_HOLOMORPHIC",
]
