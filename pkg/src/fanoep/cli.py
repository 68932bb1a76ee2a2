"""Command-line front end: ``fanoep <subcommand> [options]``.

Exit status: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import critical, expansions, jordan
from .dispersion import RootSolveError, spectrum
from .model import Medium, ModelParams, validate
from .selfenergy import QuadratureError, SheetBranch, sigma_closed, sigma_quadrature

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SUBCOMMANDS = ("eigs", "sweep", "phase", "ep", "fano", "expand", "sigma", "jordan")

DEFAULTS: Dict[str, Any] = {
    "alpha": 0.1, "alpha_b": None, "medium": "1d", "states": "double",
    "eps_a": None, "eps_b": None, "out": None, "format": "csv", "jobs": 1,
    "axis": "eps_a", "lo": None, "hi": None, "n": None, "log": False,
    "a_lo": -0.3, "a_hi": 0.3, "b_lo": -0.3, "b_hi": 0.3, "na": 241, "nb": 241,
    "kind": None, "eps_A": None, "eps_D": None, "theta": math.pi / 4,
    "z_re": None, "z_im": 0.0, "dps": None,
}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--alpha", type=float, help="coupling alpha_a (default 0.1)")
    g.add_argument("--alpha-b", dest="alpha_b", type=float, help="coupling alpha_b (default alpha)")
    g.add_argument("--medium", choices=["1d", "3d"], help="continuum dimension (default 1d)")
    g.add_argument("--states", choices=["single", "double"], help="number of levels (default double)")
    g.add_argument("--eps-a", dest="eps_a", type=float)
    g.add_argument("--eps-b", dest="eps_b", type=float)
    g.add_argument("--out", help="output file (default: standard output)")
    g.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    g.add_argument("--jobs", type=int, help="worker processes (default 1)")
    g.add_argument("--config", help="JSON file with option values; flags override it")
    g.add_argument("--dps", type=int, help="solve roots with this many decimal digits (mpmath)")
    return p


def _scan_args(p, axis_choices=None):
    if axis_choices:
        p.add_argument("--axis", choices=axis_choices)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")


def _grid_args(p):
    for name in ("a-lo", "a-hi", "b-lo", "b-hi"):
        p.add_argument("--" + name, dest=name.replace("-", "_"), type=float)
    p.add_argument("--na", type=int)
    p.add_argument("--nb", type=int)


EPILOG = "exit status: 0 success, 2 usage error, 3 numerical failure, 4 I/O error"


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="fanoep", description=__doc__.splitlines()[0], epilog=EPILOG)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_, epilog=EPILOG,
                              argument_default=argparse.SUPPRESS)

    add("eigs", "classified roots at one parameter point")
    _scan_args(add("sweep", "roots along a line in eps_a or eps_b"), ["eps_a", "eps_b"])
    _grid_args(add("phase", "phase label of every cell of an (eps_a, eps_b) grid"))
    p = add("ep", "exceptional points along a line, on a grid, or in closed form")
    _scan_args(p, ["eps_a", "eps_b"])
    _grid_args(p)
    p.add_argument("--closed-form", dest="closed_form", action="store_true",
                   help="single-level closed form only")
    p = add("fano", "BIC check and decay near the Fano point, scanning eps_D")
    p.add_argument("--eps-A", dest="eps_A", type=float)
    _scan_args(p)
    p = add("expand", "compare an expansion with exact roots")
    p.add_argument("--kind", choices=["single", "two", "fano", "polar"])
    p.add_argument("--eps-A", dest="eps_A", type=float)
    p.add_argument("--theta", type=float)
    _scan_args(p)
    p = add("sigma", "self-energy on both sheets and by quadrature")
    p.add_argument("--z-re", dest="z_re", type=float)
    p.add_argument("--z-im", dest="z_im", type=float)
    _scan_args(p)
    p = add("jordan", "2x2 effective Hamiltonian and Jordan-block check")
    p.add_argument("--kind", choices=["single", "two"])
    p.add_argument("--eps-A", dest="eps_A", type=float)
    p.add_argument("--eps-D", dest="eps_D", type=float)
    _scan_args(p)
    return parser


def parse_config(argv: Sequence[str]) -> Dict[str, Any]:
    """Merge defaults, an optional JSON config file and command-line flags (in that order)."""
    parser = build_parser()
    ns = vars(parser.parse_args(list(argv)))
    cfg = dict(DEFAULTS)
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        cfg.update(parse_config_text(text))
    cfg.update(ns)
    _check(cfg)
    return cfg


def parse_config_text(text: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON config: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("JSON config must be an object")
    out = {}
    for key, val in data.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS and k != "closed_form":
            raise UsageError(f"unknown config key {key!r}")
        out[k] = val
    return out


def _check(cfg: Dict[str, Any]) -> None:
    for key in ("alpha", "alpha_b"):
        v = cfg.get(key)
        if v is not None and not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise UsageError(f"--{key.replace('_', '-')} must be a positive number, got {v!r}")
    if cfg["medium"] not in ("1d", "3d"):
        raise UsageError(f"unknown medium {cfg['medium']!r}")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError(f"unknown format {cfg['format']!r}")
    if not (isinstance(cfg["jobs"], int) and cfg["jobs"] >= 1):
        raise UsageError("--jobs must be >= 1")
    for key in ("n", "na", "nb"):
        v = cfg.get(key)
        if v is not None and (not isinstance(v, int) or v < 2):
            raise UsageError(f"--{key} must be an integer >= 2")
    if cfg.get("dps") is not None and cfg["dps"] < 16:
        raise UsageError("--dps must be >= 16")


def _need(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))


def _axis(cfg) -> np.ndarray:
    _need(cfg, "lo", "hi", "n")
    lo, hi, n = cfg["lo"], cfg["hi"], cfg["n"]
    if not lo < hi:
        raise UsageError("--lo must be below --hi")
    if cfg.get("log"):
        if lo <= 0:
            raise UsageError("--log needs --lo > 0")
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def _params(cfg, eps_a=None, eps_b=None) -> ModelParams:
    ea = cfg["eps_a"] if eps_a is None else eps_a
    medium = Medium(cfg["medium"])
    if cfg["states"] == "single":
        return ModelParams.single(float(ea), cfg["alpha"], medium)
    eb = cfg["eps_b"] if eps_b is None else eps_b
    return ModelParams.double(float(ea), float(eb), cfg["alpha"], medium, cfg["alpha_b"])


# --------------------------------------------------------------------------
# subcommands; each returns (columns, rows, summary, warnings)

ROOT_COLUMNS = ["eps_a", "eps_b", "alpha", "medium", "root_index", "re_z", "im_z",
                "category", "branch", "residual", "multiplicity"]


def _root_rows(args) -> List[list]:
    p, dps = args
    s = spectrum(p, dps)
    rows = []
    # one row per root counted with multiplicity, so every point has deg f rows
    for r in s.roots:
        for _ in range(r.multiplicity):
            rows.append([p.eps_a, None if p.is_single else p.eps_b, p.alpha_a, p.medium.value,
                         len(rows), r.z.real, r.z.imag, r.category.value,
                         "" if r.branch is None else r.branch.label, r.residual, r.multiplicity])
    return rows


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(x) for x in items]


def _warnings(params: Sequence[ModelParams]) -> List[str]:
    seen = []
    for p in params:
        for w in validate(p):
            if w.startswith("error"):
                raise UsageError(w[len("error: "):])
            if w not in seen:
                seen.append(w)
    return seen


def cmd_eigs(cfg):
    _need(cfg, "eps_a")
    if cfg["states"] == "double":
        _need(cfg, "eps_b")
    p = _params(cfg)
    rows = _root_rows((p, cfg["dps"]))
    pairs = sum(1 for r in rows if r[6] > 0)  # one anti-resonance per pair
    return ROOT_COLUMNS, rows, f"{len(rows)} roots, {pairs} complex pair(s)", _warnings([p])


def cmd_sweep(cfg):
    xs = _axis(cfg)
    axis = cfg["axis"]
    if cfg["states"] == "double":
        _need(cfg, "eps_b" if axis == "eps_a" else "eps_a")
    elif axis == "eps_b":
        raise UsageError("single-level model has no eps_b axis")
    params = [_params(cfg, **{axis: float(x)}) for x in xs]
    warn = _warnings(params)
    chunks = _map(_root_rows, [(p, cfg["dps"]) for p in params], cfg["jobs"])
    rows = [r for c in chunks for r in c]
    return (ROOT_COLUMNS, rows,
            f"{len(rows)} rows over {len(xs)} points, {axis} in [{xs[0]:g}, {xs[-1]:g}]", warn)


def _grid_points(cfg):
    a = np.linspace(cfg["a_lo"], cfg["a_hi"], cfg["na"])
    b = np.linspace(cfg["b_lo"], cfg["b_hi"], cfg["nb"])
    if not (a[0] < a[-1] and b[0] < b[-1]):
        raise UsageError("grid bounds must satisfy lo < hi")
    return a, b


def _grid_warnings(cfg):
    corners = [ModelParams.double(x, y, cfg["alpha"], cfg["medium"])
               for x in (cfg["a_lo"], cfg["a_hi"]) for y in (cfg["b_lo"], cfg["b_hi"])]
    return _warnings(corners)


def cmd_phase(cfg):
    _grid_points(cfg)
    warn = _grid_warnings(cfg)
    d = critical.phase_diagram(cfg["a_lo"], cfg["a_hi"], cfg["b_lo"], cfg["b_hi"], cfg["na"],
                               cfg["nb"], cfg["alpha"], cfg["medium"], cfg["jobs"], trace_curves=False)
    rows = []
    for i, ea in enumerate(d.eps_a):
        for j, eb in enumerate(d.eps_b):
            lab = d.label(i, j)
            rows.append([float(ea), float(eb), "Indeterminate" if lab is None else lab.value,
                         int(d.pairs[i, j])])
    counts = {lab.value: int(np.sum(d.pairs == lab.pairs)) for lab in critical.PhaseLabel}
    counts["Indeterminate"] = int(np.sum(d.pairs < 0))
    summary = f"{len(rows)} cells; " + ", ".join(f"{k}={v}" for k, v in counts.items())
    return ["eps_a", "eps_b", "phase", "n_complex_pairs"], rows, summary, warn


EP_COLUMNS = ["curve_id", "eps_a", "eps_b", "re_zc", "im_zc"]


def _ep_row(e: critical.EPPoint):
    return ["" if e.curve_id is None else e.curve_id.value, e.eps_a, e.eps_b,
            e.z_c.real, e.z_c.imag]


def cmd_ep(cfg):
    if cfg.get("closed_form"):
        if cfg["states"] != "single" and cfg.get("eps_b") is not None:
            raise UsageError("--closed-form is for the single-level model")
        e = critical.ep_single_closed_form(cfg["alpha"], cfg["medium"])
        return EP_COLUMNS, [_ep_row(e)], "closed-form single-level EP", []
    if cfg.get("lo") is not None:
        xs = _axis(cfg)
        axis = cfg["axis"]
        if cfg["states"] == "double":
            _need(cfg, "eps_b" if axis == "eps_a" else "eps_a")
        base = _params(cfg, **{"eps_a": cfg["eps_a"] if cfg["eps_a"] is not None else 0.0})
        warn = _warnings([base.replace(**{axis: float(x)}) for x in (xs[0], xs[-1])])
        pts = critical.ep_locate_line(base, axis, float(xs[0]), float(xs[-1]), len(xs))
        rows = [_ep_row(e) for e in pts]
        flagged = sum(e.flagged for e in pts)
        return EP_COLUMNS, rows, f"{len(rows)} EP(s) along {axis}, {flagged} flagged", warn
    _grid_points(cfg)
    warn = _grid_warnings(cfg)
    d = critical.phase_diagram(cfg["a_lo"], cfg["a_hi"], cfg["b_lo"], cfg["b_hi"], cfg["na"],
                               cfg["nb"], cfg["alpha"], cfg["medium"], cfg["jobs"])
    rows = [_ep_row(e) for _, line in d.ep_curves for e in line]
    rows += [_ep_row(e) for e in d.ep_points if e.curve_id is None]
    mp = d.meeting_point
    where = "none" if mp is None else f"({mp.eps_a:.3g}, {mp.eps_b:.3g})"
    return EP_COLUMNS, rows, f"{len(rows)} EP(s) on {len(d.ep_curves)} curve(s); meeting point {where}", warn


def _fano_row(args):
    eA, eD, alpha, medium, dps = args
    bic = critical.bic_check(eA, alpha, medium, eps_D=eD)
    row = [eA, eD, bic.is_bic, bic.f_rel, bic.fprime_rel]
    if Medium(medium) is Medium.ONE_D:
        fd = expansions.fano_deviation(eA, eD, alpha)
        row += [fd.p_plus.real, fd.p_plus.imag]
    else:
        row += [None, None]
    row.append(expansions.fano_gamma_exact(eD, eA - eD, alpha, medium, dps))
    return row


def cmd_fano(cfg):
    _need(cfg, "eps_A")
    xs = _axis(cfg)
    eA = cfg["eps_A"]
    params = [ModelParams.double(eA + x, eA - x, cfg["alpha"], cfg["medium"]) for x in xs]
    warn = _warnings(params)
    rows = _map(_fano_row, [(eA, float(x), cfg["alpha"], cfg["medium"], cfg["dps"]) for x in xs],
                cfg["jobs"])
    bic = critical.bic_check(eA, cfg["alpha"], cfg["medium"])
    cols = ["eps_A", "eps_D", "is_bic", "f_rel", "fprime_rel", "re_p", "im_p", "gamma_exact"]
    return cols, rows, f"{len(rows)} points; BIC at eps_D=0: {bic.is_bic}", warn


def _expand_rows(args):
    kind, x, cfg = args
    dps = cfg["dps"] if cfg["dps"] is not None else expansions.DEFAULT_DPS
    (r,) = expansions.validate_expansion(kind, [x], alpha=cfg["alpha"], medium=cfg["medium"],
                                         eps_b=cfg["eps_b"] if cfg["eps_b"] is not None else 0.2,
                                         eps_A=cfg["eps_A"] if cfg["eps_A"] is not None else 0.2,
                                         theta=cfg["theta"], dps=dps)
    return [r.parameter, r.exact.real, r.exact.imag, r.approx.real, r.approx.imag, r.rel_err, r.valid]


def cmd_expand(cfg):
    _need(cfg, "kind")
    xs = _axis(cfg)
    if cfg["kind"] != "polar" and cfg["medium"] != "1d":
        raise UsageError(f"expansion {cfg['kind']!r} is one-dimensional")
    rows = _map(_expand_rows, [(cfg["kind"], float(x), cfg) for x in xs], cfg["jobs"])
    valid = sum(1 for r in rows if r[-1])
    worst = max(r[5] for r in rows)
    cols = ["parameter", "exact_re", "exact_im", "approx_re", "approx_im", "rel_err", "valid"]
    return cols, rows, f"{len(rows)} points, {valid} inside window, max rel_err {worst:.3g}", []


def cmd_sigma(cfg):
    if cfg.get("z_re") is not None:
        zs = [complex(cfg["z_re"], cfg["z_im"])]
    else:
        zs = [complex(x, cfg["z_im"]) for x in _axis(cfg)]
    rows = []
    for z in zs:
        sp = sigma_closed(z, SheetBranch.PLUS, cfg["medium"])
        sm = sigma_closed(z, SheetBranch.MINUS, cfg["medium"])
        try:
            q = sigma_quadrature(z, cfg["medium"])
            qre, qim = q.real, q.imag
        except ValueError:  # on the cut
            qre = qim = None
        rows.append([z.real, z.imag, sp.real, sp.imag, sm.real, sm.imag, qre, qim])
    cols = ["re_z", "im_z", "re_sigma_plus", "im_sigma_plus", "re_sigma_minus",
            "im_sigma_minus", "re_sigma_quad", "im_sigma_quad"]
    return cols, rows, f"{len(rows)} points", []


def cmd_jordan(cfg):
    _need(cfg, "kind")
    kind = cfg["kind"]
    key = "eps_a" if kind == "single" else "eps_A"
    if cfg.get("lo") is not None:
        xs = [float(x) for x in _axis(cfg)]
    else:
        _need(cfg, key)
        xs = [cfg[key]]
    rows = []
    for x in xs:
        if kind == "single":
            m = jordan.build_2x2_single(x, cfg["alpha"])
        else:
            _need(cfg, "eps_D")
            m = jordan.build_2x2_two(x, cfg["eps_D"], cfg["alpha"])
        r = jordan.analyze(m)
        l1, l2 = r.eigenvalues
        rows.append([x, l1.real, l1.imag, l2.real, l2.imag, r.defective, r.eigenvector_overlap,
                     r.rank_deficiency_certificate, r.scalar_degenerate])
    cols = [key, "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "defective",
            "eigenvector_overlap", "rank_certificate", "scalar_degenerate"]
    n_def = sum(1 for r in rows if r[5])
    return cols, rows, f"{len(rows)} matrices, {n_def} defective", []


COMMANDS = {"eigs": cmd_eigs, "sweep": cmd_sweep, "phase": cmd_phase, "ep": cmd_ep,
            "fano": cmd_fano, "expand": cmd_expand, "sigma": cmd_sigma, "jordan": cmd_jordan}


# --------------------------------------------------------------------------
# output

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest string that round-trips
    return str(v)


def _jsonable(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(columns: List[str], rows: List[list], fmt: str) -> str:
    if fmt == "json":
        objs = [{c: _jsonable(v) for c, v in zip(columns, r)} for r in rows]
        return json.dumps(objs, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def run(cfg: Dict[str, Any]) -> int:
    columns, rows, summary, warns = COMMANDS[cfg["subcommand"]](cfg)
    text = render(columns, rows, cfg["format"])
    line = f"{cfg['subcommand']}: {summary}"
    if warns:
        line += "; " + "; ".join(warns)
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(line)
    else:
        sys.stdout.write(text)
        print(line, file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"fanoep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RootSolveError, QuadratureError, critical.IndeterminatePhase,
            expansions.DegenerateQuadratic, ArithmeticError) as exc:
        print(f"fanoep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"fanoep: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"fanoep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
