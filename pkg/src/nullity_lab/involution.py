"""The map ``f -> f* = i(f_perp)`` on nullity-free hypersurfaces.

``f*`` has the opposite holomorphy class of ``f`` and ``(f*)* = f``. For
curves in C^2 it is moreover conformal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complex_linalg import ATOL, RTOL, invert
from .errors import (
    NonzeroNullity,
    NotImmersedAtPoint,
    NumericalInconsistency,
    PositionTangent,
    ZeroVector,
)
from .immersion import (
    ChartMap,
    JetData,
    analyze_point,
    classify_holomorphy,
    frame,
    hessian_from_jacobian,
    immersion_rank,
    normal_part_derivative,
)


@dataclass(eq=False)
class StarMap(ChartMap):
    """``w -> invert(f_perp(w))`` with a chain-rule Jacobian.

    ``d(f_perp / s) = d f_perp / s - 2 <f_perp, d f_perp> f_perp / s^2`` with
    ``s = |f_perp|^2``; the Hessian differentiates that Jacobian numerically.
    """

    source: ChartMap

    def __post_init__(self):
        self.name = f"star({self.source.name})"
        self.chart = self.source.chart
        self.ambient_dim = self.source.ambient_dim

    def _fperp(self, j: JetData) -> np.ndarray:
        fr = frame(j)
        if fr.position_tangent:
            raise PositionTangent(f"position vector is tangent at {j.point}")
        return fr.f_perp

    def _eval(self, w):
        return invert(self._fperp(self.source._jet(w, 1)))

    def _jacobian(self, w):
        j = self.source._jet(w, 2)
        fp = self._fperp(j)
        dfp = normal_part_derivative(j)
        s = float(np.vdot(fp, fp).real)
        return fp / s, dfp / s - 2 * np.real(fp.conj() @ dfp)[None, :] * fp[:, None] / s**2

    def _jet(self, w, order):
        val, jac = self._jacobian(w)
        hess = None
        if order >= 2:
            hess = hessian_from_jacobian(lambda x: self._jacobian(x)[1], w, 1e-4 * self.chart.scale)
        return JetData(w, val, jac, hess)


def star(imm: ChartMap, samples, atol: float = ATOL, rtol: float = RTOL) -> StarMap:
    """Validate ``imm`` on ``samples`` and return its star map."""
    for w in samples:
        _, fr, _, nd = analyze_point(imm, w)
        if fr.normal.complex_dim != 1:
            raise NumericalInconsistency("the star map is defined for hypersurfaces")
        if fr.position_tangent:
            raise PositionTangent(f"position vector is tangent at {w}")
        if nd.nu:
            raise NonzeroNullity(f"relative nullity {nd.nu} at {w}")
    return StarMap(imm)


def _sample_status(fn):
    try:
        return fn(), "ok", None
    except (PositionTangent, NotImmersedAtPoint, ZeroVector) as exc:
        return None, "degenerate", str(exc)


def verify_star_involution(imm: ChartMap, samples, tol: float = 1e-8) -> dict:
    """Pointwise ``|(f*)*(w) - f(w)|`` with per-sample degeneracy records."""
    s1 = StarMap(imm)
    s2 = StarMap(s1)
    records = []
    for w in samples:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        rec = {"w": w}

        def dev():
            j = s1._jet(w, 1)
            if immersion_rank(j).effective_rank < 2 * w.size:
                raise NotImmersedAtPoint(f"f* is not immersed at {w}")
            return float(np.linalg.norm(s2._eval(w) - imm._eval(w)))

        value, status, err = _sample_status(dev)
        rec["status"] = status
        if err:
            rec["error"] = err
        else:
            rec["deviation"] = value
            if value > tol:
                rec["status"] = "fail"
        records.append(rec)
    ok = [r for r in records if "deviation" in r]
    summary = {
        "samples": len(records),
        "degenerate": sum(r["status"] == "degenerate" for r in records),
        "failures": sum(r["status"] == "fail" for r in records),
        "max_deviation": max((r["deviation"] for r in ok), default=0.0),
    }
    summary["passed"] = bool(ok) and summary["failures"] == 0 and summary["degenerate"] == 0
    return {"records": records, "summary": summary}


def conformality_spread(jac_f, jac_g, directions: int = 8) -> float:
    """Relative spread of ``|dg X| / |df X|`` over unit chart directions ``X``."""
    angles = np.pi * np.arange(directions) / directions
    X = np.stack([np.cos(angles), np.sin(angles)])
    ratios = np.linalg.norm(jac_g @ X, axis=0) / np.linalg.norm(jac_f @ X, axis=0)
    return float((ratios.max() - ratios.min()) / ratios.mean())


def conformality_check(imm: ChartMap, samples, tol: float = 1e-6, directions: int = 8) -> dict:
    if imm.domain_dim != 1:
        raise ValueError("conformality is checked for curves")
    s1 = StarMap(imm)
    records = []
    for w in samples:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        rec = {"w": w}

        def spread():
            jg = s1._jet(w, 1).jac
            if immersion_rank(JetData(w, None, jg)).effective_rank < 2:
                raise NotImmersedAtPoint(f"f* is not immersed at {w}")
            return conformality_spread(imm._jet(w, 1).jac, jg, directions)

        value, status, err = _sample_status(spread)
        rec["status"] = status
        if err:
            rec["error"] = err
        else:
            rec["spread"] = value
            if value > tol:
                rec["status"] = "fail"
        records.append(rec)
    ok = [r for r in records if "spread" in r]
    summary = {
        "samples": len(records),
        "degenerate": sum(r["status"] == "degenerate" for r in records),
        "failures": sum(r["status"] == "fail" for r in records),
        "max_spread": max((r["spread"] for r in ok), default=0.0),
    }
    summary["passed"] = bool(ok) and summary["failures"] == 0 and summary["degenerate"] == 0
    return {"records": records, "summary": summary}


def star_class(imm: ChartMap, samples):
    """``(class of imm, class of f*)`` as classification records."""
    samples = list(samples)
    return classify_holomorphy(imm, samples), classify_holomorphy(StarMap(imm), samples)
