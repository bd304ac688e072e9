"""Command line front end: validate, solve, certify, decorations, crossratio.

Exit codes: 0 pass, 2 fail (or invalid input), 3 indeterminate.
Every run writes ``<command>-manifest.json`` next to its report.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels, numrank
from .decoration_search import DecorationError, euler_certificate, search_tight
from .kmt_coordinates import CrossRatioError, cross_ratio_map, kmt_differential_rank, per_edge_iff
from .packing_engine import PackingError, export_svg, load_packing, save_packing, solve_fuchsian
from .rigidity_lab import (
    IndeterminateRank, RigidityError, build_jacobian, delta_on_v_report, jacobian_rank_report,
    projective_rigidity_report, totally_real_report, vanishing_certificate, vanishing_matrix,
)
from .surface_complex import ComplexError, euler_stats, load_complex, validate_quasi_simplicial
from .twisted_cochains import CochainComplex, HolonomyError, cohomology_dims

PASS, FAIL, INDETERMINATE = 0, 2, 3
ANGLE_TOL = 1e-5


@dataclass
class RunManifest:
    command: str
    inputs: dict
    tolerances: dict
    seed: int | None
    versions: dict
    outputs: list = field(default_factory=list)
    exit_code: int = 0
    started: float = 0.0
    elapsed: float = 0.0


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _versions() -> dict:
    return {"packrig": __version__, "numpy": np.__version__, "python": platform.python_version(),
            "kernels": kernels.BACKEND_NAME}


def _plain(obj):
    """JSON-ready copy; arrays become lists, non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(_plain(doc), indent=1, sort_keys=True) + "\n")
    return path


# --- commands -----------------------------------------------------------------

def cmd_validate(args, out: Path, manifest: RunManifest) -> int:
    manifest.inputs["complex"] = {"path": str(args.path), "sha256": _digest(args.path)}
    try:
        sc = load_complex(args.path)
    except ComplexError as exc:
        report = {"accepted": False, "error": str(exc)}
    else:
        q = validate_quasi_simplicial(sc)
        report = {"accepted": q["accepted"], "stats": euler_stats(sc),
                  "monogons": q["monogons"], "bigons": q["bigons"]}
        if not q["accepted"]:
            report["error"] = "not quasi-simplicial"
    manifest.outputs.append(str(_write_json(out / "validate-report.json", report)))
    print("accepted" if report["accepted"] else f"rejected: {report['error']}")
    return PASS if report["accepted"] else FAIL


def cmd_solve(args, out: Path, manifest: RunManifest) -> int:
    manifest.inputs["complex"] = {"path": str(args.path), "sha256": _digest(args.path)}
    manifest.tolerances["tol"] = args.tol
    try:
        p = solve_fuchsian(load_complex(args.path), tol=args.tol)
    except (ComplexError, PackingError) as exc:
        _write_json(out / "solve-report.json", {"solved": False, "error": str(exc)})
        manifest.outputs.append(str(out / "solve-report.json"))
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    save_packing(p, out / "packing.json")
    (out / "packing.svg").write_text(export_svg(p, depth=args.depth))
    report = {"solved": True, "radii": p.radii, "max_star_defect": max(d for d, _ in p.star_defects().values())}
    _write_json(out / "solve-report.json", report)
    manifest.outputs += [str(out / n) for n in ("packing.json", "packing.svg", "solve-report.json")]
    print(f"solved: {len(p.radii)} disks, written to {out / 'packing.json'}")
    return PASS


def _check(name, value, expected, status="ok") -> dict:
    if status != "ok":
        verdict = "indeterminate"
    else:
        verdict = "pass" if value == expected else "fail"
    return {"check": name, "value": value, "expected": expected, "verdict": verdict}


def certify_packing(p, dump: Path | None = None) -> dict:
    """Run every rigidity check on a packing; returns checks and raw reports."""
    sc = p.complex
    g = euler_stats(sc)["genus"]
    e = sc.n_edges
    coh = cohomology_dims(p)
    model = build_jacobian(p)
    jr = jacobian_rank_report(model)
    n_real = jr["shape"][1]
    dv = delta_on_v_report(p)
    tr = totally_real_report(p, model, jr)
    van = vanishing_certificate(p)
    proj = projective_rigidity_report(p, model)
    km = kmt_differential_rank(p, model, jr)
    iff = per_edge_iff(km)
    crm = cross_ratio_map(p, strict=False)
    dim = 6 * g - 6
    checks = [
        _check("dim H1", coh["dim_H1"], dim, coh["status"]),
        _check("rank J", jr["rank"], e, jr["status"]),
        _check("dim ker J", jr["kernel"], n_real - e, jr["status"]),
        _check("ker J mod orbit", jr["kernel_mod_orbit"], dim, jr["status"]),
        _check("rank delta on V", dv["rank"], 3 * sc.n_vertices, dv["status"]),
        _check("dim H", dv["dim_H"], dim, dv["status"]),
        _check("dim_C span H_R", tr["complex_rank"], dv["dim_H"]),
        _check("H_R inside H", tr["max_angle_sine"] < ANGLE_TOL, True),
        _check("vanishing kernel", van["kernel"], 0, van["status"]),
        _check("frozen kernel", proj["kernel"], 0, proj["status"]),
        _check("cross ratios real", bool(crm["real"]), True),
        _check("kmt rank", km["rank"], dim, km["status"]),
        _check("per-edge iff", iff["holds"], True),
    ]
    if dump is not None:
        cx = CochainComplex(p)
        np.savez(dump, J=model.matrix, D0=cx.D0, D1=cx.D1, delta1=cx.Delta1,
                 vanishing=vanishing_matrix(p), frozen=model.vertex_block, dcr=km["dcr"])
    drop = {"kernel_basis", "hr_basis", "H_basis", "coords", "dcr", "q_coords"}
    reports = {
        "cohomology": coh, "jacobian": jr, "delta_on_v": dv, "totally_real": tr,
        "vanishing": van, "projective": proj, "kmt": km,
        "cross_ratios": {str(k): float(v) for k, v in enumerate(crm["values"])},
    }
    reports = {k: ({a: b for a, b in r.items() if a not in drop} if k != "cross_ratios" else r)
               for k, r in reports.items()}
    return {"genus": g, "checks": checks, "reports": reports}


def overall_code(checks) -> int:
    verdicts = {c["verdict"] for c in checks}
    if "fail" in verdicts:
        return FAIL
    if "indeterminate" in verdicts:
        return INDETERMINATE
    return PASS


def cmd_certify(args, out: Path, manifest: RunManifest) -> int:
    manifest.inputs["packing"] = {"path": str(args.path), "sha256": _digest(args.path)}
    manifest.tolerances.update({"rank_rel_tol": numrank.REL_TOL, "min_gap": args.min_gap})
    saved = numrank.MIN_GAP
    numrank.MIN_GAP = args.min_gap
    try:
        p = load_packing(args.path)
        dump = out / "matrices.npz" if args.dump_matrices else None
        result = certify_packing(p, dump)
    except IndeterminateRank as exc:
        result = {"checks": [{"check": "setup", "value": str(exc), "expected": "clear rank",
                              "verdict": "indeterminate"}]}
    except (PackingError, ComplexError, HolonomyError, RigidityError, CrossRatioError,
            json.JSONDecodeError) as exc:
        result = {"checks": [{"check": "input", "value": str(exc), "expected": "valid packing",
                              "verdict": "fail"}]}
    finally:
        numrank.MIN_GAP = saved
    code = overall_code(result["checks"])
    result["exit_code"] = code
    manifest.outputs.append(str(_write_json(out / "certify-report.json", result)))
    if args.dump_matrices and (out / "matrices.npz").exists():
        manifest.outputs.append(str(out / "matrices.npz"))
    for c in result["checks"]:
        print(f"{c['verdict'].upper():13s} {c['check']}: {c['value']} (expected {c['expected']})")
    return code


def cmd_decorations(args, out: Path, manifest: RunManifest) -> int:
    manifest.inputs["complex"] = {"path": str(args.path), "sha256": _digest(args.path)}
    try:
        sc = load_complex(args.path)
        res = search_tight(sc, mode=args.mode, budget=args.budget, max_blue=args.max_blue,
                           seed=args.seed)
    except (ComplexError, DecorationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    found = res.pop("found")
    res["found"] = [{"decoration": d.to_document(),
                     "certificate": euler_certificate(sc, d, claimed_tight=True)["verdict"]}
                    for d in found]
    res["genus"] = euler_stats(sc)["genus"]
    manifest.outputs.append(str(_write_json(out / "decorations-report.json", res)))
    status = "complete" if res["complete"] else "incomplete"
    print(f"{args.mode}: {len(found)} nontrivial tight decorations ({status})")
    return PASS


def cmd_crossratio(args, out: Path, manifest: RunManifest) -> int:
    manifest.inputs["packing"] = {"path": str(args.path), "sha256": _digest(args.path)}
    try:
        crm = cross_ratio_map(load_packing(args.path))
    except (PackingError, CrossRatioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    doc = {"convention": crm["convention"], "max_imag": crm["max_imag"],
           "values": {str(k): float(v) for k, v in enumerate(crm["values"])}}
    manifest.outputs.append(str(_write_json(out / "crossratio.json", doc)))
    print(f"{len(crm['values'])} cross ratios, max imaginary part {crm['max_imag']:.2e}")
    return PASS


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="packrig", description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("."), help="directory for reports")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a triangulation file")
    p.add_argument("path", type=Path)

    p = sub.add_parser("solve", help="solve for the Fuchsian packing and draw it")
    p.add_argument("path", type=Path)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--depth", type=int, default=2, help="layers of the developed picture")

    p = sub.add_parser("certify", help="run the rigidity checks on a packing file")
    p.add_argument("path", type=Path)
    p.add_argument("--dump-matrices", action="store_true")
    p.add_argument("--min-gap", type=float, default=numrank.MIN_GAP,
                   help="singular value ratio required at every rank cut")

    p = sub.add_parser("decorations", help="search for nontrivial tight decorations")
    p.add_argument("path", type=Path)
    p.add_argument("--mode", choices=["backtracking", "randomized"], default="backtracking")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--max-blue", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("crossratio", help="write the edge cross ratios of a packing")
    p.add_argument("path", type=Path)
    return ap


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "certify": cmd_certify,
            "decorations": cmd_decorations, "crossratio": cmd_crossratio}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command=args.command, inputs={}, tolerances={},
                           seed=getattr(args, "seed", None), versions=_versions(),
                           started=time.time())
    if not Path(args.path).exists():
        print(f"error: {args.path} does not exist", file=sys.stderr)
        manifest.exit_code = FAIL
    else:
        manifest.exit_code = COMMANDS[args.command](args, out, manifest)
    manifest.elapsed = time.time() - manifest.started
    _write_json(out / f"{args.command}-manifest.json", asdict(manifest))
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
