"""Named fixtures and seeded random immersions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationFailed, NotImmersedAtPoint, UnknownFixture
from .immersion import (
    ANTI_HOLOMORPHIC,
    HOLOMORPHIC,
    Chart,
    Monomial,
    ParametricImmersion,
    analyze_point,
    classify_holomorphy,
    frame,
)

IMAGE_RADIUS = 10.0
TANGENT_MARGIN = 1e-3


def _mono(coeff, *powers):
    return Monomial(complex(coeff), tuple(powers))


@dataclass(frozen=True, eq=False)
class FixtureDescriptor:
    name: str
    params: dict
    expected: dict
    immersion: ParametricImmersion = field(repr=False)


def _chart(params, center, radius):
    c = np.atleast_1d(np.asarray(params.get("center", center), dtype=np.complex128))
    return Chart(c, params.get("radius", radius))


def _plane(p):
    comps = ((_mono(1, 1, 0),), (_mono(1, 0, 1),), ())
    imm = ParametricImmersion("plane", _chart(p, [1, 1], 0.5), comps)
    return imm, {"class": HOLOMORPHIC, "nu": 2, "position_tangent": True, "totally_geodesic": True}


def _translated_plane(p):
    comps = ((_mono(1, 1, 0),), (_mono(1, 0, 1),), ())
    imm = ParametricImmersion("translated_plane", _chart(p, [1, 1], 0.5), comps, translation=[0, 0, 1])
    return imm, {"class": HOLOMORPHIC, "nu": 2, "position_tangent": False, "totally_geodesic": True}


def _cubic_curve(p):
    comps = ((_mono(1, 1),), (_mono(1, 2),), (_mono(1, 3),))
    imm = ParametricImmersion("cubic_curve", _chart(p, [1], 0.5), comps, conjugate_output=True)
    return imm, {"class": ANTI_HOLOMORPHIC, "nu": 0, "position_tangent": False, "totally_geodesic": False}


def _plane_curve_embedded(p):
    N = int(p.get("N", 3))
    comps = ((_mono(1, 1),), (_mono(1, 2),)) + ((),) * (N - 2)
    tr = np.zeros(N)
    tr[1] = 1.0
    cls = p.get("cls", ANTI_HOLOMORPHIC)
    imm = ParametricImmersion("plane_curve_embedded" if N > 2 else "plane_curve", _chart(p, [0], 0.5),
                              comps, conjugate_output=cls == ANTI_HOLOMORPHIC, translation=tr)
    return imm, {"class": cls, "nu": 0, "position_tangent": False, "totally_geodesic": False}


def _cylinder(p):
    comps = ((_mono(1, 1, 0),), (_mono(1, 2, 0),), (_mono(1, 0, 1),))
    imm = ParametricImmersion("cylinder", _chart(p, [0, 0], 0.5), comps, translation=[0, 1, 0])
    return imm, {"class": HOLOMORPHIC, "nu": 1, "position_tangent": False, "totally_geodesic": False}


def _graph_quadric(p):
    comps = ((_mono(1, 1, 0),), (_mono(1, 0, 1),), (_mono(1, 2, 0), _mono(1, 0, 2)))
    imm = ParametricImmersion("graph_quadric", _chart(p, [0, 0], 0.5), comps, translation=[0, 0, 1])
    return imm, {"class": HOLOMORPHIC, "nu": 0, "position_tangent": False, "totally_geodesic": False}


def _cone_over_curve(p):
    # z * (x, x^2 + 1, 1) in coordinates (z, x)
    comps = ((_mono(1, 1, 1),), (_mono(1, 1, 2), _mono(1, 1, 0)), (_mono(1, 1, 0),))
    imm = ParametricImmersion("cone_over_curve", _chart(p, [1, 0], 0.5), comps)
    return imm, {"class": HOLOMORPHIC, "nu": 1, "position_tangent": True, "totally_geodesic": False}


def _projective_cubic_lift(p):
    comps = ((_mono(1, 1),), (_mono(1, 2),), (_mono(1, 3),), ())
    imm = ParametricImmersion("projective_cubic_lift", _chart(p, [1], 0.5), comps,
                              conjugate_output=True, translation=[0, 0, 0, -1])
    return imm, {"class": ANTI_HOLOMORPHIC, "nu": 0, "position_tangent": False, "totally_geodesic": False}


CATALOG = {
    "plane": _plane,
    "translated_plane": _translated_plane,
    "cubic_curve": _cubic_curve,
    "plane_curve_embedded": _plane_curve_embedded,
    "cylinder": _cylinder,
    "graph_quadric": _graph_quadric,
    "cone_over_curve": _cone_over_curve,
    "projective_cubic_lift": _projective_cubic_lift,
}

# anti-holomorphic fixtures usable as Gauss-parametrization bases in C^N
BASE_FIXTURES = ("cubic_curve", "plane_curve_embedded")


def fixture(name: str, params: dict | None = None) -> FixtureDescriptor:
    params = dict(params or {})
    try:
        build = CATALOG[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    imm, expected = build(params)
    return FixtureDescriptor(name, params, expected, imm)


def make_example(name: str, params: dict | None = None) -> ParametricImmersion:
    return fixture(name, params).immersion


def check_expected(desc: FixtureDescriptor, per_axis: int = 5) -> dict:
    """Measured invariants of a fixture on a grid, next to the expected map."""
    imm = desc.immersion
    pts = imm.chart.grid(per_axis)
    cls = classify_holomorphy(imm, pts)
    nus, tangent, n1 = set(), set(), set()
    for w in pts:
        _, fr, sff, nd = analyze_point(imm, w)
        nus.add(nd.nu)
        tangent.add(fr.position_tangent)
        n1.add(bool(np.abs(sff.alpha).max() <= 1e-10))
    measured = {
        "class": cls.kind,
        "nu": nus.pop() if len(nus) == 1 else sorted(nus),
        "position_tangent": tangent.pop() if len(tangent) == 1 else None,
        "totally_geodesic": n1.pop() if len(n1) == 1 else None,
    }
    return {"expected": desc.expected, "measured": measured,
            "match": all(measured[k] == v for k, v in desc.expected.items())}


# ---------------------------------------------------------------- random immersions

def _monomials(m: int, degree: int):
    return [p for d in range(1, degree + 1)
            for p in itertools.product(range(d + 1), repeat=m) if sum(p) == d]


def _acceptable(imm: ParametricImmersion, pts) -> bool:
    for w in pts:
        try:
            fr = frame(imm._jet(w, 1))
        except NotImmersedAtPoint:
            return False
        if np.linalg.norm(fr.f_perp) <= TANGENT_MARGIN * np.linalg.norm(imm._eval(w)):
            return False
    return True


def random_immersion(seed: int, degree: int = 2, m: int = 1, N: int = 3,
                     cls: str = ANTI_HOLOMORPHIC, retries: int = 20,
                     radius: float = 0.5, grid: int = 5) -> ParametricImmersion:
    """Seeded polynomial immersion that is immersed and never tangent on a test grid.

    Coefficients decay with degree so the chart image stays in a ball of
    radius ``IMAGE_RADIUS``; the constant term is a random translation.
    """
    if not 1 <= m < N or degree < 1:
        raise ValueError("need 1 <= m < N and degree >= 1")
    if cls not in (HOLOMORPHIC, ANTI_HOLOMORPHIC):
        raise ValueError(f"class must be {HOLOMORPHIC!r} or {ANTI_HOLOMORPHIC!r}")
    rng = np.random.default_rng(seed)
    powers = _monomials(m, degree)
    chart = Chart(np.zeros(m), radius)
    pts = chart.grid(grid)
    for attempt in range(retries):
        coeffs = (rng.standard_normal((N, len(powers))) + 1j * rng.standard_normal((N, len(powers))))
        coeffs /= np.array([2.0 ** (sum(p) - 1) for p in powers])[None, :]
        translation = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        comps = tuple(tuple(Monomial(complex(c), p) for c, p in zip(row, powers)) for row in coeffs)
        imm = ParametricImmersion(f"random_s{seed}_d{degree}_m{m}_N{N}", chart, comps,
                                  conjugate_output=cls == ANTI_HOLOMORPHIC, translation=translation)
        size = max(np.linalg.norm(imm._eval(w)) for w in pts)
        if size > IMAGE_RADIUS:
            s = IMAGE_RADIUS / size
            comps = tuple(tuple(Monomial(t.coeff * s, t.powers) for t in c) for c in comps)
            imm = ParametricImmersion(imm.name, chart, comps, imm.conjugate_output, translation * s)
        if _acceptable(imm, pts):
            return imm
    raise GenerationFailed(f"no acceptable immersion for seed {seed} after {retries} attempts")


def affine_lift(imm: ParametricImmersion, value: complex = 1.0) -> ParametricImmersion:
    """``x -> (f(x), value)``: the section of a cone by a hyperplane, lifted."""
    comps = imm.components + ((),)
    tr = np.append(imm.translation, value)
    return ParametricImmersion(f"{imm.name}_lift", imm.chart, comps, imm.conjugate_output, tr)
