"""Parametric immersions of complex charts and their first/second order invariants.

Real chart coordinates are interleaved: index ``2k`` is ``Re w_k`` and
``2k+1`` is ``Im w_k``. A jet stores the real Jacobian (``N x 2m`` complex,
column ``a`` is the derivative along real coordinate ``a``) and the real
Hessian (``2m x 2m x N``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .complex_linalg import (
    ATOL,
    RTOL,
    CSubspace,
    as_cvector,
    complex_span,
    invert,
    numerical_rank,
    orthogonal_complement,
    project,
    real_view,
    reflect,
)
from .errors import (
    DimensionMismatch,
    NotImmersedAtPoint,
    NumericalInconsistency,
    OutOfDomain,
    PositionTangent,
    WrongHolomorphyClass,
)

HOLOMORPHIC = "holomorphic"
ANTI_HOLOMORPHIC = "anti-holomorphic"
NEITHER = "neither"

CLASS_TOL = 1e-6
TANGENT_TOL = 1e-9


def real_directions(m: int) -> np.ndarray:
    """Complex displacement for each real chart coordinate, shape ``2m x m``."""
    d = np.zeros((2 * m, m), dtype=np.complex128)
    for k in range(m):
        d[2 * k, k] = 1.0
        d[2 * k + 1, k] = 1j
    return d


def chart_J(m: int) -> np.ndarray:
    """Complex structure of the chart on real coordinates: ``J d/dx = d/dy``."""
    jm = np.zeros((2 * m, 2 * m))
    for k in range(m):
        jm[2 * k + 1, 2 * k] = 1.0
        jm[2 * k, 2 * k + 1] = -1.0
    return jm


def to_real_coords(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    out = np.empty(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def from_real_coords(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


@dataclass(frozen=True, eq=False)
class Chart:
    """Open polydisc ``|w_k - center_k| < radius_k``.

    ``radius`` may be a scalar or one value per coordinate.
    """

    center: np.ndarray
    radius: object

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=np.complex128))
        object.__setattr__(self, "center", c)
        r = np.broadcast_to(np.asarray(self.radius, dtype=float), c.shape).copy()
        if np.any(r <= 0):
            raise ValueError("chart radius must be positive")
        object.__setattr__(self, "radius", r if r.size > 1 and np.ptp(r) > 0 else float(r[0]))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def radii(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.radius, dtype=float), self.center.shape)

    @property
    def scale(self) -> float:
        """Smallest radius; finite-difference steps are proportional to it."""
        return float(np.min(self.radii))

    def contains(self, w, slack: float = 1e-6) -> bool:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        if w.shape != self.center.shape:
            return False
        return bool(np.all(np.abs(w - self.center) <= self.radii * (1 + slack) + slack))

    def grid(self, per_axis: int = 17, max_points: int | None = None) -> list[np.ndarray]:
        """Tensor grid on the square inscribed in each coordinate disc.

        With ``m > 1`` the count per real axis is reduced so the total stays
        near ``per_axis**2``.
        """
        m = self.dim
        if max_points is None:
            max_points = per_axis**2
        k = per_axis
        while k > 2 and k ** (2 * m) > max_points:
            k -= 1
        ticks = np.linspace(-0.7, 0.7, k)
        axes = np.meshgrid(*([ticks] * (2 * m)), indexing="ij")
        flat = np.stack([a.ravel() for a in axes], axis=1)
        return [self.center + self.radii * from_real_coords(row) for row in flat]

    def random(self, count: int, seed: int = 0, shrink: float = 0.95) -> list[np.ndarray]:
        rng = np.random.default_rng(seed)
        r = self.radii * shrink * np.sqrt(rng.uniform(size=(count, self.dim)))
        t = rng.uniform(0, 2 * np.pi, size=(count, self.dim))
        return [self.center + rr * np.exp(1j * tt) for rr, tt in zip(r, t)]


@dataclass(frozen=True, eq=False)
class JetData:
    point: np.ndarray
    value: np.ndarray
    jac: np.ndarray
    hess: np.ndarray | None = None

    @property
    def domain_dim(self) -> int:
        return self.point.size

    @property
    def ambient_dim(self) -> int:
        return self.value.size

    @property
    def dz(self) -> np.ndarray:
        return 0.5 * (self.jac[:, 0::2] - 1j * self.jac[:, 1::2])

    @property
    def dzbar(self) -> np.ndarray:
        return 0.5 * (self.jac[:, 0::2] + 1j * self.jac[:, 1::2])

    def wirtinger2(self):
        """Second Wirtinger blocks ``(dd, d dbar, dbar dbar)``, each ``N x m x m``."""
        h = self.hess
        xx, xy = h[0::2, 0::2], h[0::2, 1::2]
        yx, yy = h[1::2, 0::2], h[1::2, 1::2]
        dd = 0.25 * (xx - yy - 1j * (xy + yx))
        ddb = 0.25 * (xx + yy + 1j * (xy - yx))
        dbdb = 0.25 * (xx - yy + 1j * (xy + yx))
        return tuple(np.moveaxis(b, 2, 0) for b in (dd, ddb, dbdb))


class ChartMap:
    """A smooth map from a chart into C^N.

    Subclasses implement ``_eval``; the default ``_jet`` is the central
    finite-difference oracle.
    """

    name: str
    chart: Chart
    ambient_dim: int

    @property
    def domain_dim(self) -> int:
        return self.chart.dim

    def _eval(self, w: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jet(self, w: np.ndarray, order: int) -> JetData:
        return self.fd_jet(w, order)

    def _check(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        if w.shape != (self.domain_dim,):
            raise DimensionMismatch(f"point of shape {w.shape} for a {self.domain_dim}-dim chart")
        if not self.chart.contains(w):
            raise OutOfDomain(f"{w} lies outside the chart of {self.name}")
        return w

    def value(self, w) -> np.ndarray:
        return self._eval(self._check(w))

    def jet(self, w, order: int = 2, oracle: str = "exact") -> JetData:
        w = self._check(w)
        if oracle == "finite_difference":
            return self.fd_jet(w, order)
        return self._jet(w, order)

    def fd_jet(self, w, order: int = 2, step: float | None = None) -> JetData:
        """Central-difference jet; the Hessian uses Richardson extrapolation."""
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        m = w.size
        dirs = real_directions(m)
        h1 = step if step is not None else 1e-5 * self.chart.scale
        f0 = self._eval(w)
        jac = np.column_stack(
            [(self._eval(w + h1 * d) - self._eval(w - h1 * d)) / (2 * h1) for d in dirs]
        )
        if order < 2:
            return JetData(w, f0, jac)
        h2 = 2e-3 * self.chart.scale

        def hess_at(h):
            out = np.empty((2 * m, 2 * m, f0.size), dtype=np.complex128)
            for a in range(2 * m):
                da = dirs[a]
                out[a, a] = (self._eval(w + h * da) - 2 * f0 + self._eval(w - h * da)) / h**2
                for b in range(a + 1, 2 * m):
                    db = dirs[b]
                    v = (self._eval(w + h * (da + db)) - self._eval(w + h * (da - db))
                         - self._eval(w - h * (da - db)) + self._eval(w - h * (da + db))) / (4 * h**2)
                    out[a, b] = out[b, a] = v
            return out

        hess = (4 * hess_at(h2 / 2) - hess_at(h2)) / 3
        return JetData(w, f0, jac, hess)


def hessian_from_jacobian(jac_fn, w, step) -> np.ndarray:
    """Symmetrized central differences of an exact Jacobian."""
    m = w.size
    dirs = real_directions(m)
    cols = [(jac_fn(w + step * d) - jac_fn(w - step * d)) / (2 * step) for d in dirs]
    # cols[b][:, a] = d_b d_a f
    h = np.stack([c.T for c in cols], axis=0)  # b x a x N
    return 0.5 * (h + h.transpose(1, 0, 2))


@dataclass(frozen=True)
class Monomial:
    coeff: complex
    powers: tuple


@dataclass(frozen=True, eq=False)
class ParametricImmersion(ChartMap):
    """Polynomial map ``w -> conj?(p(w)) + translation``.

    With ``conjugate_output`` the polynomial core is conjugated before the
    translation is added, which gives an anti-holomorphic map.
    """

    name: str
    chart: Chart
    components: tuple
    conjugate_output: bool = False
    translation: np.ndarray | None = None
    _packed: tuple = field(init=False, repr=False)

    def __post_init__(self):
        comps = tuple(tuple(Monomial(complex(t.coeff), tuple(int(e) for e in t.powers)) for t in c)
                      for c in self.components)
        object.__setattr__(self, "components", comps)
        N = len(comps)
        m = self.chart.dim
        if N <= m:
            raise DimensionMismatch(f"ambient dimension {N} must exceed domain dimension {m}")
        tr = np.zeros(N, dtype=np.complex128) if self.translation is None else as_cvector(self.translation)
        if tr.size != N:
            raise DimensionMismatch("translation has wrong length")
        object.__setattr__(self, "translation", tr)
        coeffs, powers, comp = [], [], []
        for i, c in enumerate(comps):
            for t in c:
                if len(t.powers) != m:
                    raise DimensionMismatch(f"monomial {t} in component {i} needs {m} exponents")
                if min(t.powers) < 0:
                    raise ValueError("negative exponent")
                coeffs.append(t.coeff)
                powers.append(t.powers)
                comp.append(i)
        packed = (np.array(coeffs, dtype=np.complex128),
                  np.array(powers, dtype=np.int64).reshape(len(coeffs), m),
                  np.array(comp, dtype=np.int64))
        object.__setattr__(self, "_packed", packed)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)

    @property
    def holomorphy_class(self) -> str:
        return ANTI_HOLOMORPHIC if self.conjugate_output else HOLOMORPHIC

    @property
    def degree(self) -> int:
        p = self._packed[1]
        return int(p.sum(axis=1).max()) if len(p) else 0

    def core_jets(self, points, backend=None):
        """Holomorphic-core value, gradient, Hessian at a batch of points."""
        c, p, comp = self._packed
        pts = np.asarray(points, dtype=np.complex128).reshape(-1, self.domain_dim)
        return kernels.poly_jet(c, p, comp, self.ambient_dim, pts, backend=backend)

    def _eval(self, w):
        val, _, _ = self.core_jets(w[None, :])
        v = val[0]
        if self.conjugate_output:
            v = v.conj()
        return v + self.translation

    def _jet(self, w, order):
        val, d1, d2 = self.core_jets(w[None, :])
        m = self.domain_dim
        u = np.tile([1.0, 1j], m)  # derivative of w_k along each real coordinate
        idx = np.repeat(np.arange(m), 2)
        jac = d1[0][:, idx] * u[None, :]
        hess = None
        if order >= 2:
            h = d2[0][:, idx][:, :, idx] * (u[:, None] * u[None, :])[None]
            hess = np.moveaxis(h, 0, 2)
        v = val[0]
        if self.conjugate_output:
            v, jac = v.conj(), jac.conj()
            hess = None if hess is None else hess.conj()
        return JetData(w, v + self.translation, jac, hess)


@dataclass(eq=False)
class FunctionMap(ChartMap):
    """Arbitrary callable on a chart; jets come from finite differences."""

    name: str
    chart: Chart
    func: object
    ambient_dim: int

    def _eval(self, w):
        return np.asarray(self.func(w), dtype=np.complex128)


# ---------------------------------------------------------------- holomorphy

@dataclass(frozen=True)
class Classification:
    kind: str
    holomorphic_residual: float
    anti_holomorphic_residual: float

    @property
    def residual(self) -> float:
        return min(self.holomorphic_residual, self.anti_holomorphic_residual)


def holomorphy_residuals(jac) -> tuple[float, float]:
    """Relative residuals of ``df J = J df`` and ``df J = -J df``."""
    m = jac.shape[1] // 2
    dj = jac @ chart_J(m)
    scale = np.linalg.norm(jac)
    if scale == 0:
        return 0.0, 0.0
    return (float(np.linalg.norm(dj - 1j * jac) / scale),
            float(np.linalg.norm(dj + 1j * jac) / scale))


def classify_holomorphy(imm: ChartMap, samples, threshold: float = CLASS_TOL) -> Classification:
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    rh = ra = 0.0
    for w in samples:
        h, a = holomorphy_residuals(imm.jet(w, order=1).jac)
        rh, ra = max(rh, h), max(ra, a)
    if min(rh, ra) > threshold:
        kind = NEITHER
    else:
        kind = HOLOMORPHIC if rh <= ra else ANTI_HOLOMORPHIC
    return Classification(kind, rh, ra)


# ---------------------------------------------------------------- frames

@dataclass(frozen=True, eq=False)
class FrameData:
    tangent: CSubspace
    normal: CSubspace
    f_perp: np.ndarray
    f_top: np.ndarray
    position_tangent: bool


def immersion_rank(jet: JetData, atol=ATOL, rtol=RTOL):
    return numerical_rank(real_view(jet.jac), atol, rtol)


def frame(jet: JetData, tol: float = TANGENT_TOL, atol=ATOL, rtol=RTOL) -> FrameData:
    m = jet.domain_dim
    rank = immersion_rank(jet, atol, rtol).effective_rank
    if rank < 2 * m:
        raise NotImmersedAtPoint(f"real Jacobian rank {rank} < {2 * m} at {jet.point}")
    tangent = complex_span(jet.jac, atol, rtol)
    if tangent.complex_dim != m:
        raise NotImmersedAtPoint(
            f"tangent space is not a complex {m}-plane (complex rank {tangent.complex_dim})")
    normal = orthogonal_complement(tangent)
    f_perp = project(normal, jet.value)
    f_top = jet.value - f_perp
    tangent_flag = bool(np.linalg.norm(f_perp) <= tol * np.linalg.norm(jet.value))
    return FrameData(tangent, normal, f_perp, f_top, tangent_flag)


def chart_vector(jet: JetData, v) -> np.ndarray:
    """Real chart vector ``x`` with ``df(x) = v`` for a tangent ambient vector ``v``."""
    x, *_ = np.linalg.lstsq(real_view(jet.jac), real_view(np.asarray(v)[:, None])[:, 0], rcond=None)
    return x


def normal_part_derivative(jet: JetData) -> np.ndarray:
    """Exact ``d f^perp`` along each real coordinate (columns), via the
    derivative of the tangent projector ``P = A A^+``."""
    if jet.hess is None:
        raise ValueError("second-order jet required")
    A = jet.jac[:, 0::2]
    Ap = np.linalg.pinv(A)
    P = A @ Ap
    eye = np.eye(A.shape[0])
    f = jet.value
    fperp = f - P @ f
    coef = Ap @ f
    out = np.empty((f.size, jet.hess.shape[0]), dtype=np.complex128)
    for a in range(jet.hess.shape[0]):
        dA = jet.hess[0::2, a, :].T
        out[:, a] = -((eye - P) @ (dA @ coef)) - Ap.conj().T @ (dA.conj().T @ fperp)
    return out


# ---------------------------------------------------------------- second fundamental form

@dataclass(frozen=True, eq=False)
class SecondFundamentalForm:
    """Normal-valued form on real chart coordinates, ``alpha[a, b]`` in C^N."""

    alpha: np.ndarray
    metric: np.ndarray
    jac: np.ndarray
    normal: CSubspace
    J: np.ndarray

    @property
    def real_dim(self) -> int:
        return self.metric.shape[0]

    def pairing(self, delta) -> np.ndarray:
        """``B[a, b] = <alpha(a, b), delta>``."""
        return np.real(np.einsum("abn,n->ab", self.alpha.conj(), np.asarray(delta)))

    def shape_operator(self, delta) -> np.ndarray:
        """``A_delta`` on chart coordinates: ``<A X, Y>_g = <alpha(X, Y), delta>``."""
        return np.linalg.solve(self.metric, self.pairing(delta))

    def __call__(self, X, Y) -> np.ndarray:
        return np.einsum("a,b,abn->n", X, Y, self.alpha)

    def orthonormal_frame(self) -> np.ndarray:
        """Chart vectors ``E`` with ``E^T g E = I``."""
        L = np.linalg.cholesky(self.metric)
        return np.linalg.inv(L).T

    def pairing_orthonormal(self, delta) -> np.ndarray:
        E = self.orthonormal_frame()
        return E.T @ self.pairing(delta) @ E

    def scale(self) -> float:
        """Operator norm of ``delta -> A_delta`` over unit normals."""
        E = self.orthonormal_frame()
        mats = [E.T @ self.pairing(d) @ E for d in self.normal.real_basis().T]
        if not mats:
            return 0.0
        return float(np.linalg.norm(np.vstack(mats), 2))


def second_fundamental(jet: JetData, fr: FrameData) -> SecondFundamentalForm:
    if jet.hess is None:
        raise ValueError("second-order jet required")
    nb = fr.normal.basis
    alpha = np.einsum("nk,abk->abn", nb, np.einsum("nk,abn->abk", nb.conj(), jet.hess)) \
        if nb.shape[1] else np.zeros_like(jet.hess)
    alpha = 0.5 * (alpha + alpha.transpose(1, 0, 2))
    jr = real_view(jet.jac)
    metric = jr.T @ jr
    Jm, *_ = np.linalg.lstsq(jr, real_view(1j * jet.jac), rcond=None)
    return SecondFundamentalForm(alpha, metric, jet.jac, fr.normal, Jm)


@dataclass(frozen=True, eq=False)
class NullityData:
    delta: CSubspace
    nu: int
    residual: float
    kernel: np.ndarray  # real chart vectors spanning the nullity


def _stacked_pairings(sff: SecondFundamentalForm):
    E = sff.orthonormal_frame()
    mats = [E.T @ sff.pairing(d) @ E for d in sff.normal.real_basis().T]
    if not mats:
        return E, np.zeros((1, sff.real_dim))
    return E, np.vstack(mats)


def relative_nullity(sff: SecondFundamentalForm, atol=ATOL, rtol=RTOL) -> NullityData:
    """Kernel of ``X -> alpha(X, .)``; its complex dimension is the nullity index."""
    E, S = _stacked_pairings(sff)
    n = sff.real_dim
    rep = numerical_rank(S, atol, rtol)
    _, _, vt = np.linalg.svd(S)
    ker = E @ vt[rep.effective_rank:].T
    dim_real = n - rep.effective_rank
    if ker.shape[1]:
        res = float(np.linalg.norm(S @ vt[rep.effective_rank:].T, 2))
        pushed = sff.jac @ ker
        delta = complex_span(pushed, 1e-8, 1e-8)
    else:
        res = 0.0
        delta = CSubspace.zero(sff.jac.shape[0])
    if dim_real % 2 or delta.complex_dim * 2 != dim_real:
        raise NumericalInconsistency(
            f"relative nullity of real dimension {dim_real} is not J-invariant")
    return NullityData(delta, dim_real // 2, res, ker)


def first_normal(sff: SecondFundamentalForm, atol=ATOL, rtol=RTOL) -> CSubspace:
    """Span of the image of alpha, cross-checked against ``{delta : A_delta = 0}``."""
    N = sff.jac.shape[0]
    n = sff.real_dim
    values = sff.alpha.reshape(n * n, N).T
    if sff.normal.complex_dim == 0 or not np.any(values):
        span = CSubspace.zero(N)
    else:
        scale = float(np.max(np.linalg.norm(values, axis=0)))
        span = complex_span(values, atol, rtol) if scale > atol else CSubspace.zero(N)
    E = sff.orthonormal_frame()
    rb = sff.normal.real_basis()
    if rb.shape[1]:
        cols = np.column_stack([(E.T @ sff.pairing(d) @ E).ravel() for d in rb.T])
        rank = numerical_rank(cols, atol, rtol).effective_rank
    else:
        rank = 0
    if rank != 2 * span.complex_dim:
        raise NumericalInconsistency(
            f"first normal space: span has complex dim {span.complex_dim}, "
            f"annihilator complement has real dim {rank}")
    return span


def analyze_point(imm: ChartMap, w, oracle: str = "exact"):
    """Jet, frame, second fundamental form and nullity at one point."""
    j = imm.jet(w, order=2, oracle=oracle)
    fr = frame(j)
    sff = second_fundamental(j, fr)
    return j, fr, sff, relative_nullity(sff)


# ---------------------------------------------------------------- structural identities

def _fd(fn, w, step):
    """Central differences with one Richardson step (error O(step^4))."""
    dirs = real_directions(w.size)

    def central(h):
        return np.column_stack([(fn(w + h * d) - fn(w - h * d)) / (2 * h) for d in dirs])

    return (4 * central(step / 2) - central(step)) / 3


def _rel(a, b) -> float:
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b)) / scale)


def verify_structural_identities(imm: ChartMap, w, step: float | None = None) -> dict:
    """Residuals of the first-order identities satisfied by ``f^perp`` and ``g = i(f^perp)``.

    ``d f^perp`` and ``dg`` are taken by central differences; the right-hand
    sides are assembled from the second fundamental form.
    """
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    j, fr, sff, _ = analyze_point(imm, w)
    if fr.position_tangent:
        raise PositionTangent(f"position vector is tangent at {w}")
    h, _ = holomorphy_residuals(j.jac)
    if h > CLASS_TOL:
        raise WrongHolomorphyClass("structural identities need a holomorphic immersion")
    step = step if step is not None else 1e-4 * imm.chart.scale

    def fperp(x):
        return frame(imm._jet(x, 1)).f_perp

    def gmap(x):
        return invert(fperp(x))

    dfp = _fd(fperp, w, step)
    dg = _fd(gmap, w, step)
    g = invert(fr.f_perp)
    gn2 = float(np.vdot(g, g).real)
    x_top = chart_vector(j, fr.f_top)
    A = sff.shape_operator(fr.f_perp)
    n = sff.real_dim
    tan_pred = -(j.jac @ A)
    nor_pred = -np.column_stack([sff(np.eye(n)[a], x_top) for a in range(n)])
    tan_part = dfp - np.column_stack([project(fr.normal, c) for c in dfp.T])
    nor_part = dfp - tan_part
    formula_dfp = tan_pred + nor_pred
    dg_pred = gn2 * np.column_stack([reflect(g, c) for c in formula_dfp.T])

    # codim-1 collapses the right side to zero
    g_line = complex_span([g])
    pi_g = CSubspace(orthogonal_complement(g_line).basis)
    rhs = np.column_stack(
        [-2 * gn2 * 1j * project(pi_g, project(fr.normal, c)) for c in (-nor_pred).T])
    lhs = dg @ chart_J(w.size) + 1j * dg
    return {
        "tangent_part": _rel(tan_part, tan_pred),
        "normal_part": _rel(nor_part, nor_pred),
        "dg_chain": _rel(dg, dg_pred),
        "dg_J": _rel(lhs, rhs),
        "codimension": fr.normal.complex_dim,
    }
