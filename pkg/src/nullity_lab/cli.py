"""``nullity-lab`` command line: analyze, parametrize, verify.

Exit codes: 0 success, 1 assertion failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gallery, gauss_param as gp, suites
from .complex_linalg import ATOL, RTOL
from .errors import NotImmersedAtPoint, NullityLabError, PositionTangent, SpecError, UnknownFixture
from .immersion import (
    ANTI_HOLOMORPHIC,
    HOLOMORPHIC,
    classify_holomorphy,
    frame,
    holomorphy_residuals,
    relative_nullity,
    second_fundamental,
    verify_structural_identities,
)
from .specio import dump_report, load_spec

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
ORACLES = ("exact", "finite_difference", "both")
FORMATS = ("json", "csv", "ply")


@dataclass(frozen=True)
class RunConfig:
    atol: float = ATOL
    rtol: float = RTOL
    identity_tol: float = 1e-7
    grid: int = 17
    seed: int = 0
    oracle: str = "both"
    fiber_grid: int = 3
    out: str | None = None
    format: str = "json"

    def as_dict(self) -> dict:
        return {"atol": self.atol, "rtol": self.rtol, "identity_tol": self.identity_tol,
                "grid": self.grid, "seed": self.seed, "oracle": self.oracle}


class InputError(NullityLabError):
    """Bad command-line input; maps to exit code 2."""


def resolve_spec(source: str):
    """A spec file path, or the name of a gallery fixture."""
    path = Path(source)
    if path.exists():
        return load_spec(path)
    if source in gallery.CATALOG:
        return gallery.make_example(source)
    raise InputError(f"{source}: no such file or fixture")


def _rel_diff(a, b) -> float:
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b)) / scale)


def _jets(imm, w, cfg: RunConfig):
    """Jet used for the analysis, plus the exact/finite-difference disagreement."""
    if cfg.oracle == "finite_difference":
        return imm.jet(w, 2, oracle="finite_difference"), None
    j = imm.jet(w, 2)
    if cfg.oracle == "exact":
        return j, None
    jf = imm.jet(w, 2, oracle="finite_difference")
    return j, max(_rel_diff(j.jac, jf.jac), _rel_diff(j.hess, jf.hess))


# ---------------------------------------------------------------- analyze

def _analyze_point(imm, w, cls, cfg: RunConfig) -> dict:
    rec = {"w": w}
    try:
        j, oracle_gap = _jets(imm, w, cfg)
        fr = frame(j, atol=cfg.atol, rtol=cfg.rtol)
    except NotImmersedAtPoint as exc:
        return {**rec, "status": "not_immersed", "error": str(exc)}
    sff = second_fundamental(j, fr)
    nd = relative_nullity(sff, cfg.atol, cfg.rtol)
    holo, anti = holomorphy_residuals(j.jac)
    residuals = {"class": {HOLOMORPHIC: holo, ANTI_HOLOMORPHIC: anti}.get(cls, min(holo, anti))}
    if oracle_gap is not None:
        residuals["oracle"] = oracle_gap
    if cls == HOLOMORPHIC and fr.normal.complex_dim == 1 and not fr.position_tangent:
        s = verify_structural_identities(imm, w)
        residuals.update({k: s[k] for k in ("tangent_part", "normal_part", "dg_chain", "dg_J")})
    rec.update({
        "status": "ok",
        "nu": nd.nu,
        "position_tangent": fr.position_tangent,
        "totally_geodesic": bool(np.abs(sff.alpha).max() <= cfg.atol),
        "residuals": residuals,
    })
    worst = max(residuals.values())
    if worst > cfg.identity_tol:
        rec["status"] = "fail"
    return rec


def analyze(imm, cfg: RunConfig) -> dict:
    pts = imm.chart.grid(cfg.grid)
    cls = classify_holomorphy(imm, pts).kind
    records = suites.pmap(lambda w: _analyze_point(imm, w, cls, cfg), pts)
    ok = [r for r in records if "nu" in r]
    summary = {
        "samples": len(records),
        "class": cls,
        "nu_values": sorted({r["nu"] for r in ok}),
        "position_tangent_count": sum(r["position_tangent"] for r in ok),
        "totally_geodesic": bool(ok) and all(r["totally_geodesic"] for r in ok),
        "not_immersed": sum(r["status"] == "not_immersed" for r in records),
        "failures": sum(r["status"] == "fail" for r in records),
        "max_residuals": {k: max(r["residuals"][k] for r in ok if k in r["residuals"])
                          for k in sorted({k for r in ok for k in r["residuals"]})},
    }
    summary["passed"] = summary["failures"] == 0
    return {"command": "analyze", "immersion": imm.name, "config": cfg.as_dict(),
            "records": records, "summary": summary}


# ---------------------------------------------------------------- parametrize

def _param_point(base, F, w, c, cfg: RunConfig) -> dict:
    rec = {"w": w, "c": c}
    xi = gp.FiberPoint(w, c)
    try:
        fib = gp.gauss_bundle(base, w)
    except PositionTangent as exc:
        return {**rec, "status": "tangent", "error": str(exc)}
    rec["f"] = fib.point(c)
    verdict = gp.singular_test(base, xi, cfg.atol, cfg.rtol)
    rec["status"] = verdict.status
    if verdict.status != "regular":
        return rec
    x = F.chart_point(xi)
    j, oracle_gap = _jets(F, x, cfg)
    fr = frame(j, atol=cfg.atol, rtol=cfg.rtol)
    nd = relative_nullity(second_fundamental(j, fr), cfg.atol, cfg.rtol)
    rec["nu"] = nd.nu
    h, _ = holomorphy_residuals(j.jac)
    residuals = {"holo": h, "normal": gp.normality_residual(F, x)}
    if oracle_gap is not None:
        residuals["oracle"] = oracle_gap
    if cfg.oracle != "exact":
        residuals["sff_match"] = gp.shape_match(base, xi, F)
        g = gp.recover_base(F, x, nd).g
        residuals["roundtrip"] = float(np.linalg.norm(g - fib.f_hat) / max(1.0, np.linalg.norm(fib.f_hat)))
    rec["residuals"] = residuals
    return rec


def _vertex_flags(base, w, cfg: RunConfig) -> dict:
    try:
        fib = gp.gauss_bundle(base, w)
    except PositionTangent:
        return {}
    j = base._jet(fib.base_point, 2)
    ns, incl, _ = gp.vertex_flags(second_fundamental(j, frame(j)), fib.vertex, fib.L,
                                     cfg.atol, cfg.rtol)
    return {"vertex_nonsingular": ns, "L_in_N1perp": incl}


RESIDUAL_LIMITS = {"holo": None, "normal": 1e-9, "oracle": None, "sff_match": 1e-5, "roundtrip": 1e-9}


def parametrize(base, cfg: RunConfig) -> dict:
    F = gp.bundle_assembled(base)
    ws = base.chart.grid(cfg.grid)
    cs = F.fiber_grid(cfg.fiber_grid)
    flags = {w.tobytes(): _vertex_flags(base, w, cfg) for w in ws}
    jobs = [(w, c) for w in ws for c in cs]
    records = suites.pmap(lambda wc: _param_point(base, F, wc[0], wc[1], cfg), jobs)
    for r in records:
        r["flags"] = flags[r["w"].tobytes()]
        for k, v in r.get("residuals", {}).items():
            limit = RESIDUAL_LIMITS[k] or cfg.identity_tol
            if v > limit:
                r["status"] = "fail"
    reg = [r for r in records if "nu" in r]
    counts = {s: sum(r["status"] == s for r in records)
              for s in ("regular", "singular", "indeterminate", "tangent", "fail")}
    keys = sorted({k for r in reg for k in r["residuals"]})
    summary = {
        "samples": len(records),
        "counts": counts,
        "regular_fraction": (len(reg) - counts["fail"]) / len(records),
        "fiber_dim": F.fiber_dim,
        "nu_values": sorted({r["nu"] for r in reg}),
        "max_residuals": {k: max(r["residuals"][k] for r in reg if k in r["residuals"]) for k in keys},
    }
    summary["passed"] = bool(reg) and counts["fail"] == 0 and summary["nu_values"] == [F.fiber_dim]
    return {"command": "parametrize", "base": base.name, "config": cfg.as_dict(),
            "fiber_grid": cfg.fiber_grid, "records": records, "summary": summary}


def csv_text(report: dict) -> str:
    """Columns: w*_re/w*_im, c*_re/c*_im, f*_re/f*_im, status, nu."""
    recs = report["records"]
    m, nu = recs[0]["w"].size, recs[0]["c"].size
    N = next((r["f"].size for r in recs if "f" in r), 0)

    def pairs(prefix, n):
        return [f"{prefix}{k + 1}_{p}" for k in range(n) for p in ("re", "im")]

    def flat(z, n):
        if z is None:
            return [""] * (2 * n)
        return [repr(float(v)) for x in z for v in (x.real, x.imag)]

    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(pairs("w", m) + pairs("c", nu) + pairs("f", N) + ["status", "nu"])
    for r in recs:
        out.writerow(flat(r["w"], m) + flat(r["c"], nu) + flat(r.get("f"), N)
                     + [r["status"], r.get("nu", "")])
    return buf.getvalue()


def ply_slice(base, cfg: RunConfig) -> str:
    """ASCII PLY mesh over (Re w1, Re c1) with everything else at the chart center.

    ``x, y, z`` are the real parts of the first three ambient coordinates;
    the full point is kept in per-vertex ``f*_re``/``f*_im`` properties.
    """
    F = gp.bundle_assembled(base)
    if F.fiber_dim < 1:
        raise InputError("the base has a zero-dimensional fiber; nothing to slice")
    k = cfg.grid
    r = base.chart.radii[0]
    us = base.chart.center[0].real + r * np.linspace(-0.7, 0.7, k)
    vs = np.linspace(-1.0, 1.0, k)
    verts, index = [], {}
    for a, u in enumerate(us):
        for b, v in enumerate(vs):
            w = base.chart.center.copy()
            w[0] = u + 1j * base.chart.center[0].imag
            c = np.zeros(F.fiber_dim, dtype=np.complex128)
            c[0] = v
            try:
                p = gp.gauss_bundle(base, w).point(c)
            except PositionTangent:
                continue
            index[a, b] = len(verts)
            verts.append(p)
    faces = [(index[a, b], index[a + 1, b], index[a + 1, b + 1], index[a, b + 1])
             for a in range(k - 1) for b in range(k - 1)
             if all(q in index for q in ((a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)))]
    N = base.ambient_dim
    extra = [f"f{i + 1}_{p}" for i in range(N) for p in ("re", "im")]
    head = ["ply", "format ascii 1.0", f"comment slice of gauss({base.name})",
            f"element vertex {len(verts)}",
            *[f"property double {n}" for n in ("x", "y", "z", *extra)],
            f"element face {len(faces)}", "property list uchar int vertex_indices", "end_header"]
    lines = list(head)
    for p in verts:
        xyz = [p[i].real if i < N else 0.0 for i in range(3)]
        full = [v for z in p for v in (z.real, z.imag)]
        lines.append(" ".join(repr(float(v)) for v in xyz + full))
    lines += ["4 " + " ".join(map(str, f)) for f in faces]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- verify

def verify(name: str, cfg: RunConfig) -> dict:
    names = suites.SUITES if name == "all" else (name,)
    report = suites.run(names, cfg.seed, cfg.grid)
    report["command"] = "verify"
    return report


def first_failure(report: dict):
    for s in report["suites"]:
        if s["first_failure"] is not None:
            return {"suite": s["suite"], **s["first_failure"]}
    return None


# ---------------------------------------------------------------- plumbing

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_positive_int, default=17, help="grid points per real axis")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--atol", type=float, default=ATOL)
    common.add_argument("--rtol", type=float, default=RTOL)
    common.add_argument("--tol", type=float, default=1e-7, help="identity residual tolerance")
    common.add_argument("--oracle", choices=ORACLES, default="both")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="json")

    p = argparse.ArgumentParser(prog="nullity-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", parents=[common], help="per-point nullity, class and residuals")
    a.add_argument("--spec", required=True, help="spec file or fixture name")
    q = sub.add_parser("parametrize", parents=[common], help="sample the Gauss parametrization of a base")
    q.add_argument("--spec", required=True, help="base spec file or fixture name")
    q.add_argument("--fiber-grid", type=_positive_int, default=3, help="points per real fiber axis")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite", choices=(*suites.SUITES, "all"))
    return p


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    cfg = RunConfig(atol=args.atol, rtol=args.rtol, identity_tol=args.tol, grid=args.grid,
                    seed=args.seed, oracle=args.oracle, out=args.out, format=args.format,
                    fiber_grid=getattr(args, "fiber_grid", 3))
    if args.command != "parametrize" and cfg.format != "json":
        raise InputError(f"--format {cfg.format} is only available for parametrize")
    if args.command == "verify":
        report = verify(args.suite, cfg)
        _emit(dump_report(report), cfg.out)
        for s in report["suites"]:
            print(f"{s['suite']}: {'pass' if s['passed'] else 'FAIL'}", file=sys.stderr)
        bad = first_failure(report)
        if bad is not None:
            print("first failure: " + dump_report(bad).strip(), file=sys.stderr)
            return EXIT_FAIL
        return EXIT_OK

    imm = resolve_spec(args.spec)
    if args.command == "analyze":
        report = analyze(imm, cfg)
        _emit(dump_report(report), cfg.out)
        return EXIT_OK if report["summary"]["passed"] else EXIT_FAIL

    if cfg.format == "ply":
        _emit(ply_slice(imm, cfg), cfg.out)
        return EXIT_OK
    report = parametrize(imm, cfg)
    _emit(csv_text(report) if cfg.format == "csv" else dump_report(report), cfg.out)
    counts = report["summary"]["counts"]
    if counts["regular"] == 0:
        print("no regular points: the grid is entirely singular or tangent", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if report["summary"]["passed"] else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return _run(args)
    except (SpecError, UnknownFixture, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NullityLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
