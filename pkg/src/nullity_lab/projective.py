"""Projective space through cones.

CP^{N-1} is modeled by unit vectors of C^N modulo phase. Every second-order
computation goes through the cone ``(z, x) -> z f(x)`` in C^N, so the flat
machinery of :mod:`nullity_lab.immersion` is reused unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_linalg import (
    ATOL,
    RTOL,
    CSubspace,
    as_cvector,
    complex_span,
    intersect_complement,
    numerical_complex_rank,
    numerical_rank,
    phase_normalize,
    real_view,
    subspace_distance,
)
from .errors import (
    ChartUndefined,
    DimensionMismatch,
    NonzeroBaseNullity,
    NotImmersedAtPoint,
    NumericalInconsistency,
    OriginOnImage,
    ZeroVector,
)
from .immersion import (
    Chart,
    ChartMap,
    FunctionMap,
    Monomial,
    ParametricImmersion,
    analyze_point,
    first_normal,
    frame,
    relative_nullity,
    second_fundamental,
)
from .gauss_param import (
    FiberPoint,
    bundle_for,
    gauss_bundle,
    orthonormal_fiber_basis,
)

PROJECTIVE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Unit homogeneous vector, first nonzero coordinate real positive."""

    homogeneous: np.ndarray

    @property
    def dimension(self) -> int:
        return self.homogeneous.size - 1

    def distance(self, other: "ProjectivePoint") -> float:
        return chordal_distance(self, other)


def projectivize(v) -> ProjectivePoint:
    v = as_cvector(v)
    n = np.linalg.norm(v)
    if n <= PROJECTIVE_ATOL:
        raise ZeroVector("cannot projectivize the zero vector")
    return ProjectivePoint(phase_normalize(v / n))


def chordal_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """``sqrt(1 - |<u, v>|^2)`` for unit representatives.

    Evaluated as the norm of the part of ``u`` orthogonal to ``v``, which
    avoids the cancellation of the closed form near zero.
    """
    if p.homogeneous.size != q.homogeneous.size:
        raise DimensionMismatch("points live in different projective spaces")
    u, v = p.homogeneous, q.homogeneous
    return float(min(1.0, np.linalg.norm(u - v * np.vdot(v, u))))


def chart_lift(p: ProjectivePoint, k: int) -> np.ndarray:
    """Representative with coordinate ``k`` (1-based) equal to 1."""
    h = p.homogeneous
    if not 1 <= k <= h.size:
        raise DimensionMismatch(f"chart index {k} outside 1..{h.size}")
    if abs(h[k - 1]) <= PROJECTIVE_ATOL:
        raise ChartUndefined(f"coordinate {k} vanishes")
    return h / h[k - 1]


# ---------------------------------------------------------------- cones

@dataclass(eq=False)
class ConeImmersion(ChartMap):
    """``(z, x) -> z f(x)``; ``conj(z)`` for an anti-holomorphic base, so the
    cone keeps the class of its base. The cone of a polynomial is polynomial,
    so jets are exact."""

    base: object  # ParametricImmersion, or a point of C^N
    poly: ParametricImmersion

    @property
    def name(self):
        return self.poly.name

    @property
    def chart(self):
        return self.poly.chart

    @property
    def ambient_dim(self):
        return self.poly.ambient_dim

    def _eval(self, w):
        return self.poly._eval(w)

    def _jet(self, w, order):
        return self.poly._jet(w, order)


def cone(imm, z_center: complex = 1.0, z_radius: float = 0.5, check_samples: int = 5) -> ConeImmersion:
    """Cone over a polynomial immersion, or over a single nonzero point."""
    if not isinstance(imm, ParametricImmersion):
        p = as_cvector(imm)
        if np.linalg.norm(p) <= PROJECTIVE_ATOL:
            raise OriginOnImage("cone over the origin")
        comps = tuple((Monomial(complex(c), (1,)),) for c in p)
        chart = Chart(np.array([z_center], dtype=np.complex128), z_radius)
        return ConeImmersion(p, ParametricImmersion("cone(point)", chart, comps))
    for w in imm.chart.grid(check_samples):
        if np.linalg.norm(imm._eval(w)) <= PROJECTIVE_ATOL:
            raise OriginOnImage(f"{imm.name} passes through the origin at {w}")
    anti = imm.conjugate_output
    comps = []
    for i, terms in enumerate(imm.components):
        new = [Monomial(t.coeff, (1,) + t.powers) for t in terms]
        tr = imm.translation[i]
        if tr != 0:
            new.append(Monomial(np.conj(tr) if anti else tr, (1,) + (0,) * imm.domain_dim))
        comps.append(tuple(new))
    chart = Chart(np.concatenate([[z_center], imm.chart.center]),
                  np.concatenate([[z_radius], imm.chart.radii]))
    poly = ParametricImmersion(f"cone({imm.name})", chart, tuple(comps), conjugate_output=anti)
    return ConeImmersion(imm, poly)


def nullity_shift_check(imm, samples, z_values=(1.0, 0.8 + 0.3j), atol=ATOL, rtol=RTOL) -> dict:
    """``nu(cone) = nu(base) + 1`` and the cone position lies in its nullity.

    ``samples`` are base points (ignored for a point base).
    """
    c = cone(imm)
    point_base = not isinstance(imm, ParametricImmersion)
    records = []
    for x in ([np.zeros(0)] if point_base else samples):
        x = np.atleast_1d(np.asarray(x, dtype=np.complex128))
        rec = {"x": x, "status": "ok"}
        try:
            nu_b = 0 if point_base else analyze_point(imm, x)[3].nu
            rec["nu_base"] = nu_b
            cone_nus, res = [], 0.0
            for z in z_values:
                y = np.concatenate([[z], x])
                j, fr, sff, nd = analyze_point(c, y)
                cone_nus.append(nd.nu)
                pos = j.value - nd.delta.project(j.value)
                res = max(res, float(np.linalg.norm(pos) / np.linalg.norm(j.value)))
                rec["position_tangent"] = fr.position_tangent
            rec["nu_cone"] = cone_nus
            rec["position_in_delta"] = res
            if any(n != nu_b + 1 for n in cone_nus) or res > 1e-9:
                rec["status"] = "fail"
        except (NotImmersedAtPoint, NumericalInconsistency) as exc:
            rec["status"] = "degenerate"
            rec["error"] = str(exc)
        records.append(rec)
    ok = [r for r in records if r["status"] in ("ok", "fail")]
    summary = {
        "samples": len(records),
        "failures": sum(r["status"] == "fail" for r in records),
        "degenerate": sum(r["status"] == "degenerate" for r in records),
        "max_position_residual": max((r["position_in_delta"] for r in ok), default=0.0),
        "shifts": sorted({(r["nu_base"], n) for r in ok for n in r["nu_cone"]}),
    }
    summary["passed"] = bool(ok) and summary["failures"] == 0 and summary["degenerate"] == 0
    return {"records": records, "summary": summary}


# ---------------------------------------------------------------- projectivized immersions

def sharp_rank(imm: ChartMap, w) -> int:
    """Real rank of ``d(pi o f)``: the differential with the position line removed."""
    j = imm.jet(w, order=1)
    f = j.value
    dsharp = j.jac - np.outer(f, f.conj() @ j.jac) / np.vdot(f, f).real
    return numerical_rank(real_view(dsharp)).effective_rank


def sharp_nullity(lift: ChartMap, w) -> int:
    """Relative nullity of ``pi o lift``, defined as that of its cone minus one."""
    base = lift.poly if isinstance(lift, ConeImmersion) else lift
    if isinstance(base, ParametricImmersion):
        c = cone(base)
        y = np.concatenate([[1.0], np.atleast_1d(w)])
        return analyze_point(c, y)[3].nu - 1
    # generic lift: finite-difference cone
    chart = Chart(np.concatenate([[1.0], lift.chart.center]),
                  np.concatenate([[0.5], lift.chart.radii]))
    fc = FunctionMap(f"cone({lift.name})", chart,
                     lambda y: np.conj(y[0]) * lift._eval(y[1:]), lift.ambient_dim)
    y = np.concatenate([[1.0], np.atleast_1d(w)])
    return analyze_point(fc, y)[3].nu - 1


def cone_fiber(lift: ChartMap, w) -> CSubspace:
    """Normal space of the cone over ``lift`` at ``w``: orthogonal to tangent and position."""
    data = bundle_for(lift, with_vertex=False).first_order(w)
    L = CSubspace(orthonormal_fiber_basis(data.frame))
    fr = frame(lift._jet(np.atleast_1d(np.asarray(w, dtype=np.complex128)), 1))
    direct = intersect_complement(fr.normal, complex_span([fr.f_perp]))
    if subspace_distance(L, direct) > 1e-8:
        raise NumericalInconsistency(f"cone fiber at {w} disagrees with the normal-space complement")
    return L


def cp_parametrize(lift: ChartMap, xi: FiberPoint) -> ProjectivePoint:
    """``[xi]`` for ``xi = sum c_k L_k`` in the normal space of the cone over ``lift``."""
    if sharp_nullity(lift, xi.base_point) != 0:
        raise NonzeroBaseNullity("projectivized base has positive relative nullity")
    L = cone_fiber(lift, xi.base_point)
    return projectivize(L.basis @ xi.c)


def affine_section(lift: ChartMap) -> ChartMap:
    """``fh_1 = -fh[:-1] / fh[-1]``, so that ``(fh_1, -1)`` represents the same base."""
    if isinstance(lift, ParametricImmersion) and all(not any(t.powers) for t in lift.components[-1]):
        core = sum(t.coeff for t in lift.components[-1])
        last = lift.translation[-1] + (np.conj(core) if lift.conjugate_output else core)
        if abs(last) > PROJECTIVE_ATOL:
            scale = -1.0 / last
            k = np.conj(scale) if lift.conjugate_output else scale
            comps = tuple(tuple(Monomial(t.coeff * k, t.powers) for t in c)
                          for c in lift.components[:-1])
            return ParametricImmersion(f"{lift.name}_1", lift.chart, comps,
                                       lift.conjugate_output, lift.translation[:-1] * scale)

    def f1(w):
        v = lift._eval(w)
        if abs(v[-1]) <= PROJECTIVE_ATOL:
            raise ChartUndefined("last coordinate of the lift vanishes")
        return -v[:-1] / v[-1]

    return FunctionMap(f"{lift.name}_1", lift.chart, f1, lift.ambient_dim - 1)


def cp_chart_route_check(lift: ChartMap, w, c1) -> dict:
    """Compare the affine-chart construction with ``cp_parametrize``.

    The chart route intersects the cone with ``{z_last = 1}``: the point
    ``(eta + xi_1, 1)`` with ``eta`` the vertex and ``xi_1 = sum c1_k L1_k``
    of the parametrization of ``fh_1``. The projective route projects that
    vector onto the cone fiber and returns its class.
    """
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    f1 = affine_section(lift)
    fib = gauss_bundle(f1, w)
    affine = np.append(fib.point(c1), 1.0)
    chart_point = projectivize(affine)
    L = cone_fiber(lift, w)
    cp_point = cp_parametrize(lift, FiberPoint(w, L.basis.conj().T @ affine))
    back = chart_lift(cp_point, lift.ambient_dim)
    return {
        "chordal": chordal_distance(chart_point, cp_point),
        "chart_roundtrip": float(np.linalg.norm(back - affine) / np.linalg.norm(affine)),
        "fiber_dims": (fib.L.complex_dim, L.complex_dim),
    }


# ---------------------------------------------------------------- totally geodesic

@dataclass(frozen=True)
class GeodesicReport:
    totally_geodesic: bool
    span_rank: int
    cone_first_normal_dim: int | None


def totally_geodesic_test(lift: ChartMap, samples, tol: float = 1e-9) -> GeodesicReport:
    """Whether ``pi o lift`` lies in a linear CP^m.

    The verdict uses the rank of sampled unit homogeneous vectors; the
    first normal space of the cone is reported alongside when jets allow.
    """
    vecs = [projectivize(lift._eval(np.atleast_1d(np.asarray(w, dtype=np.complex128)))).homogeneous
            for w in samples]
    rank = numerical_complex_rank(vecs, atol=tol, rtol=tol).effective_rank
    n1 = None
    if isinstance(lift, ParametricImmersion):
        c = cone(lift)
        dims = []
        for w in samples[:3]:
            y = np.concatenate([[1.0], np.atleast_1d(w)])
            j = c.jet(y)
            dims.append(first_normal(second_fundamental(j, frame(j)), atol=tol, rtol=tol).complex_dim)
        n1 = max(dims)
    return GeodesicReport(rank <= lift.domain_dim + 1, rank, n1)


def cp_nullity(lift: ChartMap, x) -> int:
    """Nullity of the CP hypersurface ``[L c]`` at assembled coordinates ``x``.

    Computed as the nullity of the cone parametrization ``(w, c) -> H(w) c``
    minus one.
    """
    from .gauss_param import AssembledHypersurface

    F = AssembledHypersurface(lift, with_vertex=False)
    sff = second_fundamental(F._jet(np.asarray(x, dtype=np.complex128), 2),
                             frame(F._jet(np.asarray(x, dtype=np.complex128), 1)))
    return relative_nullity(sff).nu - 1
