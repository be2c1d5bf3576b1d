"""Verification suites run by ``nullity-lab verify`` and the acceptance tests.

Every check reports its measured value and the threshold it was held to.
Reports contain no timings, so they are byte-identical for a fixed seed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import gallery, gauss_param as gp, involution, projective as pj
from .complex_linalg import (
    J,
    invert,
    real_inner,
    reflect,
    subspace_distance,
    CSubspace,
)
from .errors import NullityLabError, PositionTangent
from .immersion import (
    HOLOMORPHIC,
    Chart,
    Monomial,
    ParametricImmersion,
    analyze_point,
    holomorphy_residuals,
    verify_structural_identities,
)

SUITES = ("identities", "roundtrip", "gauss", "star", "cone", "projective", "cylinder")
IDENTITY_TOL = 1e-7


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("NULLITY_LAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Ordered map, threaded when ``NULLITY_LAB_THREADS`` > 1."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def check(name: str, value, threshold, op: str = "<=", **extra) -> dict:
    if op == "<=":
        ok = value <= threshold
    elif op == "<":
        ok = value < threshold
    elif op == "==":
        ok = value == threshold
    elif op == ">=":
        ok = value >= threshold
    else:
        raise ValueError(op)
    return {"name": name, "passed": bool(ok), "value": value, "op": op, "threshold": threshold, **extra}


def _suite(name: str, checks: list) -> dict:
    failed = [c for c in checks if not c["passed"]]
    return {"suite": name, "passed": not failed, "checks": checks,
            "first_failure": failed[0] if failed else None}


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _random_fiber_points(base, count, rng, fiber_scale=1.0):
    ws = base.chart.random(count, seed=int(rng.integers(2**31)))
    nu = base.ambient_dim - base.domain_dim - 1
    out = []
    for w in ws:
        c = _cvec(rng, nu)
        # uniform radius in the unit ball keeps chart points inside the fiber disc
        c *= fiber_scale * rng.uniform() ** (1 / (2 * nu)) / np.linalg.norm(c)
        out.append(gp.FiberPoint(w, c))
    return out


# ---------------------------------------------------------------- criterion 1

def algebraic_identities(seed: int = 0, count: int = 1000) -> list:
    rng = _rng(seed, 1)
    worst = {"invert_involution": 0.0, "reflect_isometry": 0.0,
             "reflect_involution": 0.0, "J_commutation": 0.0}
    for _ in range(count):
        n = int(rng.integers(1, 6))
        z, u, v = _cvec(rng, n), _cvec(rng, n), _cvec(rng, n)
        scale = max(1.0, np.linalg.norm(u) * np.linalg.norm(v))
        worst["invert_involution"] = max(worst["invert_involution"],
                                         np.linalg.norm(invert(invert(z)) - z) / np.linalg.norm(z))
        iso = abs(real_inner(reflect(z, u), reflect(z, v)) - real_inner(u, v)) / scale
        worst["reflect_isometry"] = max(worst["reflect_isometry"], iso)
        worst["reflect_involution"] = max(worst["reflect_involution"],
                                          np.linalg.norm(reflect(z, reflect(z, v)) - v) / max(1.0, np.linalg.norm(v)))
        worst["J_commutation"] = max(worst["J_commutation"],
                                     np.linalg.norm(J(reflect(z, v)) - reflect(J(z), J(v))) / max(1.0, np.linalg.norm(v)))
    return [check(k, float(val), 1e-13, samples=count) for k, val in worst.items()]


def codim2_surface() -> ParametricImmersion:
    """``(w1, w2, w1^2, w1 w2) + e3``: identity (d) has a nonzero right side."""
    M = lambda *p: Monomial(1.0, p)  # noqa: E731
    comps = ((M(1, 0),), (M(0, 1),), (M(2, 0),), (M(1, 1),))
    return ParametricImmersion("codim2_surface", Chart(np.array([0.3, 0.2j]), 0.3), comps,
                               translation=[0, 0, 1, 0])


def structural_identities(seed: int = 0, per_fixture: int = 10) -> list:
    rng = _rng(seed, 2)
    out = []
    cases = [gallery.make_example(n) for n in ("translated_plane", "cylinder", "graph_quadric")]
    cases.append(codim2_surface())
    for imm in cases:
        worst = {}
        for w in imm.chart.random(per_fixture, seed=int(rng.integers(2**31))):
            res = verify_structural_identities(imm, w)
            for k in ("tangent_part", "normal_part", "dg_chain", "dg_J"):
                worst[k] = max(worst.get(k, 0.0), res[k])
        tol = 1e-12 if imm.name == "translated_plane" else IDENTITY_TOL
        out.append(check(f"structural[{imm.name}]", max(worst.values()), tol, residuals=worst))
    # codim-1 hypersurface from the Gauss parametrization: g anti-holomorphic
    F = gp.bundle_assembled(gallery.make_example("cubic_curve"))
    worst = 0.0
    for xi in _random_fiber_points(F.base, per_fixture, rng):
        worst = max(worst, verify_structural_identities(F, F.chart_point(xi))["dg_J"])
    out.append(check("structural[gauss(cubic_curve)].dg_J", worst, IDENTITY_TOL))
    try:
        verify_structural_identities(gallery.make_example("plane"), np.array([1.0, 1.0]))
        out.append(check("plane rejects tangent position", False, True, "=="))
    except PositionTangent:
        out.append(check("plane rejects tangent position", True, True, "=="))
    return out


# ---------------------------------------------------------------- criterion 2

def recovery_hypersurfaces():
    direct = [gallery.make_example(n) for n in ("cylinder", "graph_quadric", "translated_plane")]
    assembled = [gp.bundle_assembled(gallery.make_example(n)) for n in gallery.BASE_FIXTURES]
    return direct + assembled


def _hypersurface_samples(f, count, rng):
    if isinstance(f, gp.AssembledHypersurface):
        return [f.chart_point(xi) for xi in _random_fiber_points(f.base, count, rng)]
    return f.chart.random(count, seed=int(rng.integers(2**31)))


def base_recovery_check(seed: int = 0, per_fixture: int = 45) -> list:
    rng = _rng(seed, 3)
    out = []
    total = 0
    for f in recovery_hypersurfaces():
        pts = _hypersurface_samples(f, per_fixture, rng)
        recs = pmap(lambda x: gp.recover_base(f, x), pts)
        total += len(recs)
        out.append(check(f"anti_holomorphy[{f.name}]",
                         max(r.anti_holomorphy_residual for r in recs), IDENTITY_TOL))
        out.append(check(f"dg_on_nullity[{f.name}]", max(r.nullity_residual for r in recs), 1e-8))
        out.append(check(f"gauss_map_anti_holomorphy[{f.name}]",
                         max(r.gauss_map_residual for r in recs), IDENTITY_TOL))
    out.append(check("base_recovery_sample_count", total, 200, ">="))
    return out


# ---------------------------------------------------------------- criterion 3

def _forward_point(F: gp.AssembledHypersurface, x):
    xi = F.fiber_point(x)
    verdict = gp.singular_test(F.base, xi)
    if verdict.status != "regular":
        return {"status": verdict.status}
    j, fr, sff, nd = analyze_point(F, x)
    h, _ = holomorphy_residuals(j.jac)
    return {"status": "regular", "holo": h, "nu": nd.nu,
            "delta_vs_L": gp.L_subspace_distance(F, x, nd),
            "normal": gp.normality_residual(F, x)}


def forward_check(grid: int = 17, fiber: int = 3) -> list:
    out = []
    for name in gallery.BASE_FIXTURES:
        F = gp.bundle_assembled(gallery.make_example(name))
        pts = [np.concatenate([w, c]) for w in F.base.chart.grid(grid) for c in F.fiber_grid(fiber)]
        recs = pmap(lambda x: _forward_point(F, x), pts)
        reg = [r for r in recs if r["status"] == "regular"]
        nus = sorted({r["nu"] for r in reg})
        out.append(check(f"holomorphy[{name}]", max(r["holo"] for r in reg), IDENTITY_TOL,
                         samples=len(pts), regular=len(reg)))
        out.append(check(f"constant_nu[{name}]", nus, [F.fiber_dim], "=="))
        out.append(check(f"delta_equals_L[{name}]", max(r["delta_vs_L"] for r in reg), 1e-7))
        out.append(check(f"fh_normal[{name}]", max(r["normal"] for r in reg), 1e-9))
    return out


# ---------------------------------------------------------------- criteria 4 and 6

def roundtrip_cases(seed: int = 0):
    rng = _rng(seed, 4)
    cases = []
    for name in gallery.BASE_FIXTURES:
        F = gp.bundle_assembled(gallery.make_example(name))
        cases.append((F, _hypersurface_samples(F, 20, rng)))
    for name in ("cylinder", "graph_quadric"):
        f = gallery.make_example(name)
        cases.append((f, f.chart.random(20, seed=int(rng.integers(2**31)))))
    return cases


def roundtrip_check(seed: int = 0) -> tuple[list, dict]:
    out, reports = [], {}
    for f, pts in roundtrip_cases(seed):
        rep = gp.verify_roundtrip(f, pts)
        s = rep["summary"]
        reports[f.name] = s
        out.append(check(f"roundtrip[{f.name}]", s["max_roundtrip"], 1e-8, evaluated=s["evaluated"]))
        out.append(check(f"membership[{f.name}]", s["max_membership"], 1e-8))
        out.append(check(f"base_error[{f.name}]", s["max_base_error"], 1e-9))
        out.append(check(f"all_samples_evaluated[{f.name}]", s["evaluated"], len(pts), "=="))
    return out, reports


def vertex_flags_check(seed: int = 0) -> list:
    rng = _rng(seed, 6)
    out = []
    cyl = gallery.make_example("cylinder")
    F = gp.bundle_assembled(gallery.make_example("plane_curve_embedded"))
    for f in (cyl, F):
        s = gp.verify_roundtrip(f, _hypersurface_samples(f, 20, rng))["summary"]
        out.append(check(f"vertex_nonsingular[{f.name}]", s["vertex_nonsingular_all"], True, "=="))
        out.append(check(f"L_in_N1perp[{f.name}]", s["L_in_N1perp_all"], True, "=="))
    cub = gp.bundle_assembled(gallery.make_example("cubic_curve"))
    s = gp.verify_roundtrip(cub, _hypersurface_samples(cub, 10, rng))["summary"]
    out.append({"name": "vertex_flags[gauss(cubic_curve)] (reported, local example)", "passed": True,
                "value": {"nonsingular": s["vertex_nonsingular_all"], "L_in_N1perp": s["L_in_N1perp_all"]},
                "op": "report", "threshold": None})
    return out


# ---------------------------------------------------------------- criterion 5

def _verdict_pair(F, xi):
    a = gp.singular_test(F.base, xi).status
    b = gp.differential_verdict(F, F.chart_point(xi)).status
    return a, b


def singular_shape_check(seed: int = 0, grid: int = 17, fiber: int = 3, shape_points: int = 100) -> list:
    rng = _rng(seed, 5)
    out = []
    base = gallery.make_example("cubic_curve")
    F = gp.bundle_assembled(base)
    pts = [gp.FiberPoint(w, c) for w in base.chart.grid(grid) for c in F.fiber_grid(fiber)]
    for w in base.chart.grid(9):
        c, res = gp.singular_fiber_points(base, w)
        if res <= 1e-10:
            pts.append(gp.FiberPoint(w, c))
    pairs = pmap(lambda xi: _verdict_pair(F, xi), pts)
    indet = sum("indeterminate" in p for p in pairs)
    decided = [p for p in pairs if "indeterminate" not in p]
    agree = sum(a == b for a, b in decided)
    singular = sum(a == "singular" for a, _ in decided)
    out.append(check("verdict_agreement", agree / len(decided), 1.0, "==",
                     decided=len(decided), singular=singular))
    out.append(check("indeterminate_fraction", indet / len(pairs), 0.02, "<"))
    for name in gallery.BASE_FIXTURES:
        b = gallery.make_example(name)
        Fb = gp.bundle_assembled(b)
        errs = []
        for xi in _random_fiber_points(b, shape_points, rng):
            if gp.singular_test(b, xi).status == "regular":
                errs.append(gp.shape_match(b, xi, Fb))
        out.append(check(f"shape_operator[{name}]", max(errs), 1e-5, samples=len(errs)))
        out.append(check(f"shape_samples[{name}]", len(errs), shape_points, "=="))
    return out


# ---------------------------------------------------------------- criterion 7

def cylinder_check() -> list:
    pc = gallery.make_example("plane_curve_embedded")
    rep = gp.cylinder_detect(pc, pc.chart.grid(5))
    e12 = CSubspace(np.eye(pc.ambient_dim, 2, dtype=np.complex128))
    dist = subspace_distance(rep.plane, e12) if rep.plane.complex_dim == 2 else 1.0
    cub = gallery.make_example("cubic_curve")
    rep2 = gp.cylinder_detect(cub, cub.chart.grid(5))
    return [
        check("cylinder[plane_curve_embedded]", rep.is_cylinder, True, "=="),
        check("cylinder_plane[plane_curve_embedded]", dist, 1e-8),
        check("cylinder[cubic_curve]", rep2.is_cylinder, False, "==", span_dim=rep2.span_dim),
    ]


# ---------------------------------------------------------------- criterion 8

def curve_cases(seed: int = 0):
    holo = gallery.make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC})
    anti = gallery.make_example("plane_curve_embedded", {"N": 2})
    rnd = [gallery.random_immersion(1000 * seed + k, degree=3, m=1, N=2, cls=HOLOMORPHIC)
           for k in range(5)]
    return [holo, anti] + rnd


def involution_check(seed: int = 0, grid: int = 9) -> list:
    out = []
    for imm in curve_cases(seed):
        pts = imm.chart.grid(grid)
        inv = involution.verify_star_involution(imm, pts)["summary"]
        conf = involution.conformality_check(imm, pts)["summary"]
        c0, c1 = involution.star_class(imm, pts[:5])
        out.append(check(f"involution[{imm.name}]", inv["max_deviation"], 1e-8,
                         degenerate=inv["degenerate"]))
        out.append(check(f"conformality[{imm.name}]", conf["max_spread"], 1e-6,
                         degenerate=conf["degenerate"]))
        out.append(check(f"class_swap[{imm.name}]", c1.kind != c0.kind and "neither" not in (c0.kind, c1.kind),
                         True, "==", classes=[c0.kind, c1.kind]))
    return out


# ---------------------------------------------------------------- criterion 9

def cone_cases():
    curve = gallery.make_example("plane_curve_embedded", {"N": 2, "cls": HOLOMORPHIC})
    return [gallery.affine_lift(curve), gallery.affine_lift(gallery.make_example("cylinder")),
            gallery.affine_lift(gallery.make_example("plane"))]


def cone_check(seed: int = 0, samples: int = 20) -> list:
    out = []
    for imm in cone_cases():
        rep = pj.nullity_shift_check(imm, imm.chart.random(samples, seed=seed))["summary"]
        out.append(check(f"nullity_shift[{imm.name}]", rep["failures"] + rep["degenerate"], 0, "==",
                         shifts=rep["shifts"]))
        out.append(check(f"position_in_delta[{imm.name}]", rep["max_position_residual"], 1e-9))
    rep = pj.nullity_shift_check(np.array([1.0, 2.0j, 3.0]), [])["summary"]
    out.append(check("nullity_shift[point]", rep["shifts"], [(0, 1)], "=="))
    return out


def projective_check(seed: int = 0, samples: int = 20) -> list:
    rng = _rng(seed, 9)
    out = []
    lift = gallery.make_example("projective_cubic_lift")
    worst, nus = 0.0, set()
    Fcp = gp.AssembledHypersurface(lift, with_vertex=False)
    for w in lift.chart.random(samples, seed=int(rng.integers(2**31))):
        r = pj.cp_chart_route_check(lift, w, _cvec(rng, 1)[0])
        worst = max(worst, r["chordal"])
        c = _cvec(rng, Fcp.fiber_dim)
        nus.add(pj.cp_nullity(lift, np.concatenate([w, c])))
    out.append(check("cp_chart_route", worst, 1e-8, samples=samples))
    n = lift.ambient_dim - 2
    out.append(check("cp_constant_nu", sorted(nus), [n - lift.domain_dim], "=="))
    lr = 0.0
    for _ in range(1000):
        v = _cvec(rng, int(rng.integers(2, 6)))
        k = int(np.argmax(np.abs(v))) + 1
        p = pj.projectivize(v)
        lr = max(lr, pj.chordal_distance(pj.projectivize(pj.chart_lift(p, k)), p),
                 float(np.linalg.norm(pj.chart_lift(p, k) - v / v[k - 1]) / np.linalg.norm(v / v[k - 1])))
    out.append(check("projectivize_chart_lift_roundtrip", lr, 1e-13))
    plane = gallery.affine_lift(gallery.make_example("plane"))
    out.append(check("totally_geodesic[linear]", pj.totally_geodesic_test(plane, plane.chart.grid(4)).totally_geodesic,
                     True, "=="))
    out.append(check("totally_geodesic[cubic]", pj.totally_geodesic_test(lift, lift.chart.grid(4)).totally_geodesic,
                     False, "=="))
    mism = 0
    for name in ("cylinder", "cone_over_curve", "graph_quadric"):
        f = gallery.make_example(name)
        for w in f.chart.grid(3):
            tangent = analyze_point(f, w)[1].position_tangent
            mism += (pj.sharp_rank(f, w) == 2 * f.domain_dim) == tangent
    out.append(check("sharp_immersion_iff_not_tangent", mism, 0, "=="))
    return out


# ---------------------------------------------------------------- assembly

def run_suite(name: str, seed: int = 0, grid: int = 17) -> dict:
    if name == "identities":
        return _suite(name, algebraic_identities(seed) + structural_identities(seed))
    if name == "roundtrip":
        rt, _ = roundtrip_check(seed)
        return _suite(name, base_recovery_check(seed) + rt + vertex_flags_check(seed))
    if name == "gauss":
        return _suite(name, forward_check(grid) + singular_shape_check(seed, grid))
    if name == "star":
        return _suite(name, involution_check(seed))
    if name == "cone":
        return _suite(name, cone_check(seed))
    if name == "projective":
        return _suite(name, projective_check(seed))
    if name == "cylinder":
        return _suite(name, cylinder_check())
    raise NullityLabError(f"unknown suite {name!r}")


def run(names, seed: int = 0, grid: int = 17) -> dict:
    results = [run_suite(n, seed, grid) for n in names]
    return {"seed": seed, "grid": grid, "passed": all(r["passed"] for r in results), "suites": results}


__all__ = ["SUITES", "run", "run_suite", "check"]
