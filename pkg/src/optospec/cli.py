"""Command-line front end.

Subcommands: ``spectrum``, ``eigenvalues``, ``dephasing``, ``validate`` and
``figure PRESET``. Parameters come from an optional flat ``key=value``
config file, overridden by flags. Probe frequencies are read and written
as detunings ``(w_p - w) / nu``.

Exit codes: 0 ok, 1 usage or bad configuration, 2 validation failure,
3 numerical error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .eigensystem import DegenerateEigenvalueError, Truncation, eigenvalue
from .model import BornApproximationWarning, MEVariant, ModelParams, derive_constants, validate_params

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("csv", "jsonl", "svg")
PARAM_KEYS = ("omega", "nu", "chi", "kappa", "gamma", "mbar")

# figure presets; frozen by a hash in the test suite
PRESETS = {
    "fig1": {"kind": "dephasing", "nu": 1.0, "chi": 1.0, "gamma": 0.01},
    "fig2a": {"kind": "spectrum", "nu": 1.0, "chi": 0.5, "kappa": 0.01, "gamma": 0.01, "mbar": 10.0},
    "fig2b": {"kind": "spectrum", "nu": 1.0, "chi": 1.5, "kappa": 0.01, "gamma": 0.01, "mbar": 10.0},
    "fig3a": {"kind": "spectrum", "nu": 1.0, "chi": 1.0, "kappa": 0.01, "gamma": 0.1, "mbar": 3.0,
              "envelope": 0.1},
    "fig3b": {"kind": "spectrum", "nu": 1.0, "chi": 1.0, "kappa": 0.01, "gamma": 0.1, "mbar": 30.0,
              "envelope": 0.1},
}


class UsageError(Exception):
    pass


def preset_hash(name: str) -> str:
    blob = json.dumps(PRESETS[name], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def preset_params(name: str, variant) -> ModelParams:
    preset = PRESETS[name]
    kw = {k: preset[k] for k in PARAM_KEYS if k in preset}
    return ModelParams(variant=variant, **kw)


# ---------------------------------------------------------------------------
# tables and output


@dataclass
class Table:
    columns: list
    rows: np.ndarray  # 2-d, numeric
    title: str = ""


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def table_csv(t: Table) -> str:
    out = io.StringIO()
    out.write(",".join(t.columns) + "\n")
    for row in t.rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def table_jsonl(t: Table) -> str:
    lines = []
    for row in t.rows:
        # round-trip through the fixed format so output is byte-stable
        rec = {c: json.loads(fmt(v)) if math.isfinite(float(v)) else None for c, v in zip(t.columns, row)}
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


_COLOURS = ("#1f4e9c", "#000000", "#7fa6e0", "#888888", "#7fa6e0", "#888888")


def table_svg(t: Table, width: int = 640, height: int = 400) -> str:
    """Polylines of every column against the first, with a plain frame."""
    x = np.asarray(t.rows[:, 0], dtype=float)
    ys = np.asarray(t.rows[:, 1:], dtype=float)
    m = 50
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(np.nanmin(ys)), float(np.nanmax(ys))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(v):
        return m + (v - x0) / (x1 - x0) * (width - 2 * m)

    def py(v):
        return height - m - (v - y0) / (y1 - y0) * (height - 2 * m)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" fill="none" stroke="#444"/>',
        f'<text x="{m}" y="{height - m + 20}" font-size="12">{fmt(x0)}</text>',
        f'<text x="{width - m}" y="{height - m + 20}" font-size="12" text-anchor="end">{fmt(x1)}</text>',
        f'<text x="{m - 5}" y="{height - m}" font-size="12" text-anchor="end">{fmt(y0)}</text>',
        f'<text x="{m - 5}" y="{m + 10}" font-size="12" text-anchor="end">{fmt(y1)}</text>',
        f'<text x="{width / 2:.1f}" y="{m - 15}" font-size="14" text-anchor="middle">{t.title}</text>',
    ]
    for i, name in enumerate(t.columns[1:]):
        pts = " ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(x, ys[:, i]) if math.isfinite(b))
        colour = _COLOURS[i % len(_COLOURS)]
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{pts}"><title>{name}</title></polyline>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render(t: Table, form: str) -> str:
    return {"csv": table_csv, "jsonl": table_jsonl, "svg": table_svg}[form](t)


def emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# configuration


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected key=value, got {raw.strip()!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def parse_triple(text: str, name: str, kinds):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"--{name} needs three ':'-separated fields, got {text!r}")
    try:
        return tuple(k(p) for k, p in zip(kinds, parts))
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r}") from None


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def resolve(args) -> dict:
    """Merge config file and flags into plain settings."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    known = set(PARAM_KEYS) | {"variant", "grid", "cutoffs", "normalize", "out", "format"}
    unknown = set(conf) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = dict(conf)
    for key in known:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            merged[key] = val
    kw = {}
    for key in PARAM_KEYS:
        if key in merged:
            try:
                kw[key] = float(merged[key])
            except ValueError:
                raise UsageError(f"{key} must be a number, got {merged[key]!r}") from None
    try:
        variant = MEVariant.parse(merged.get("variant", "ds"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = ModelParams(variant=variant, **kw)
    form = merged.get("format", "csv")
    if form not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}, got {form!r}")
    return {
        "params": params,
        "grid": parse_triple(merged["grid"], "grid", (float, float, int)) if "grid" in merged else None,
        "cutoffs": parse_triple(merged["cutoffs"], "cutoffs", (int, int, int)) if "cutoffs" in merged else None,
        "normalize": _truthy(merged.get("normalize", False)),
        "out": merged.get("out"),
        "format": form,
    }


def check_params(params: ModelParams):
    errors = validate_params(params, warn=False)
    if errors:
        raise UsageError("; ".join(errors))
    if params.gamma >= params.nu / 2:
        warnings.warn(
            f"gamma/nu = {params.gamma / params.nu:.3g} is outside the Born approximation",
            BornApproximationWarning,
            stacklevel=2,
        )


def detuning_grid(params: ModelParams, grid):
    start, stop, count = grid
    if count < 1:
        raise UsageError("grid count must be >= 1")
    if count > 1 and not stop > start:
        raise UsageError("grid stop must exceed start")
    return params.omega + params.nu * np.linspace(start, stop, count)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(s: dict) -> tuple[Table, Table]:
    from .spectrum import SpectrumRequest, absorption

    p = s["params"]
    check_params(p)
    grid = detuning_grid(p, s["grid"]) if s["grid"] else None
    res = absorption(SpectrumRequest(p, grid, cutoffs=s["cutoffs"], normalize=s["normalize"]))
    det = (res.grid - p.omega) / p.nu
    main = Table(["detuning", "A", "A_normalized"], np.column_stack([det, res.raw, res.values_normalized]),
                 title=f"absorption ({p.variant.value})")
    comp_rows = [[c.k, c.m, (c.center - p.omega) / p.nu, c.half_width, c.weight.real, c.weight.imag]
                 for c in res.components]
    comps = Table(["k", "m", "center", "half_width", "weight_re", "weight_im"], np.array(comp_rows, dtype=object))
    return main, comps


def cmd_eigenvalues(s: dict, ranges) -> Table:
    p = s["params"]
    check_params(p)
    lmax, nmax, kmax, mmax = ranges
    rows = []
    for l in range(-lmax, lmax + 1):
        for n in range(nmax + 1):
            for k in range(-kmax, kmax + 1):
                for m in range(mmax + 1):
                    lam = eigenvalue((l, n, k, m), p)
                    rows.append([l, n, k, m, lam.real, lam.imag])
    return Table(["l", "n", "k", "m", "re", "im"], np.array(rows, dtype=object), title="eigenvalues")


def cmd_dephasing(s: dict, mbar_grid) -> Table:
    from .spectrum import dephasing_curve

    start, stop, count = mbar_grid
    if start < 0:
        raise UsageError("mbar grid must be >= 0")
    grid = np.linspace(start, stop, count)
    return Table(["mbar", "ph", "ds"], dephasing_curve(grid, s["params"]), title="dimensionless dephasing rate")


def _union_grid(params_list, points=2001):
    from .spectrum import auto_cutoffs, default_grid

    lo, hi = math.inf, -math.inf
    for p in params_list:
        g = default_grid(p, auto_cutoffs(p))
        lo, hi = min(lo, g[0]), max(hi, g[-1])
    return np.linspace(lo, hi, points)


def figure_table(name: str) -> Table:
    from .spectrum import SpectrumRequest, absorption, dephasing_curve

    preset = PRESETS[name]
    if preset["kind"] == "dephasing":
        grid = np.concatenate([np.linspace(0, 2, 101), np.arange(3, 101, 1.0)])
        base = preset_params(name, MEVariant.PHENOMENOLOGICAL)
        return Table(["mbar", "ph", "ds"], dephasing_curve(grid, base), title=name)

    variants = (MEVariant.PHENOMENOLOGICAL, MEVariant.DRESSED_STATE)
    central = [preset_params(name, v) for v in variants]
    runs = [(f"{v.value}", p) for v, p in zip(variants, central)]
    if "envelope" in preset:
        d = preset["envelope"] * preset["mbar"]
        for v, p in zip(variants, central):
            runs.append((f"{v.value}_lo", replace(p, mbar=p.mbar - d)))
            runs.append((f"{v.value}_hi", replace(p, mbar=p.mbar + d)))
    grid = _union_grid([p for _, p in runs])
    cols, data = ["detuning"], [(grid - central[0].omega) / central[0].nu]
    for label, p in runs:
        res = absorption(SpectrumRequest(p, grid, normalize=True))
        cols.append(label)
        data.append(res.values)
    return Table(cols, np.column_stack(data), title=name)


def cmd_validate(s: dict, n_mech: int | None, points: int) -> tuple[bool, list]:
    """Oracle checks at the given parameters; returns (passed, report lines)."""
    from .oracle import (
        absorption_numeric,
        build_liouvillian,
        default_truncation,
        eigenvalues_near,
        off_sector_norm,
        steady_state,
        thermal_state,
    )
    from .spectrum import SpectrumRequest, absorption

    p = s["params"]
    check_params(p)
    if p.mbar > 3:
        raise UsageError("oracle comparisons are limited to mbar <= 3")
    if p.kappa <= 0 or p.gamma <= 0:
        raise UsageError("validation needs kappa > 0 and gamma > 0")
    trunc = default_truncation(p) if n_mech is None else Truncation(3, n_mech)
    lmat = build_liouvillian(p, trunc)
    report = []

    def check(name, value, tol):
        ok = bool(value < tol)
        report.append(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3e} (tol {tol:.0e})")
        return ok

    ok = check("sector conservation", off_sector_norm(lmat), 1e-12)
    rho = steady_state(lmat)
    ref = np.kron(np.diag([1.0] + [0.0] * (trunc.n_cav - 1)), thermal_state(p.mbar, trunc.n_mech))
    ok &= check("steady state (trace distance)", 0.5 * np.abs(np.linalg.eigvalsh(rho - ref)).sum(), 1e-7)

    labels = [(l, 0, k, m) for l in (0, 1) for k in range(-2, 3) for m in range(3)]
    worst = 0.0
    for l in (0, 1):
        sub = [lab for lab in labels if lab[0] == l]
        tg = [eigenvalue(lab, p) for lab in sub]
        near = eigenvalues_near(lmat, l, 0, tg)[:, 0]
        worst = max(worst, float(np.max(np.abs(near - tg))))
    ok &= check("eigenvalues l in {0,1}, n=0, |k|<=2, m<=2", worst, 1e-6)

    zpl = p.omega - abs(derive_constants(p).beta) ** 2 * p.nu
    grid = np.linspace(zpl - 4 * p.nu, zpl + 4 * p.nu, points)
    ana = absorption(SpectrumRequest(p, grid)).raw
    num = absorption_numeric(lmat, grid, rho)
    err = float(np.max(np.abs(ana / ana.max() - num / num.max())))
    ok &= check("spectrum vs resolvent (max-relative)", err, 1e-4)
    return bool(ok), report


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(sp):
    sp.add_argument("--config", help="flat key=value parameter file")
    sp.add_argument("--variant", help="ph or ds")
    for key in PARAM_KEYS:
        sp.add_argument(f"--{key}", type=float)
    sp.add_argument("--grid", help="start:stop:count in units of nu, relative to omega")
    sp.add_argument("--cutoffs", help="m_max:k_min:k_max")
    sp.add_argument("--normalize", action="store_true", default=None)
    sp.add_argument("--out", help="output path (default stdout)")
    sp.add_argument("--format", choices=FORMATS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="optospec", description="Absorption spectra of a damped optomechanical cavity.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("spectrum", help="closed-form absorption spectrum")
    _add_common(sp)
    sp.add_argument("--components", help="where to write the per-(k,m) component table")

    sp = sub.add_parser("eigenvalues", help="table of generator eigenvalues")
    _add_common(sp)
    sp.add_argument("--ranges", default="1:1:3:3", help="lmax:nmax:kmax:mmax")

    sp = sub.add_parser("dephasing", help="dimensionless dephasing rate of both variants")
    _add_common(sp)
    sp.add_argument("--mbar-grid", default="0:10:101", help="start:stop:count")

    sp = sub.add_parser("validate", help="compare analytic results with the brute-force oracle")
    _add_common(sp)
    sp.add_argument("--n-mech", type=int)
    sp.add_argument("--points", type=int, default=200)

    sp = sub.add_parser("figure", help="reproduce a figure preset (both variants)")
    sp.add_argument("preset", choices=sorted(PRESETS))
    sp.add_argument("--out")
    sp.add_argument("--format", choices=FORMATS, default="csv")
    return parser


def _error(msg: str, code: int, form: str) -> int:
    if form == "jsonl":
        sys.stdout.write(json.dumps({"error": msg, "code": code}) + "\n")
    else:
        sys.stderr.write(f"optospec: error: {msg}\n")
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    form = "jsonl" if "jsonl" in argv else "csv"
    try:
        args = build_parser().parse_args(argv)
        if args.command == "figure":
            form = args.format
            emit(render(figure_table(args.preset), form), args.out)
            return EXIT_OK
        s = resolve(args)
        form = s["format"]
        if args.command == "spectrum":
            main_t, comps = cmd_spectrum(s)
            emit(render(main_t, form), s["out"])
            target = args.components
            if target is None and s["out"]:
                stem = s["out"].rsplit(".", 1)[0]
                target = f"{stem}.components.{'jsonl' if form == 'jsonl' else 'csv'}"
            if target:
                emit(render(comps, "jsonl" if form == "jsonl" else "csv"), target)
        elif args.command == "eigenvalues":
            ranges = parse_triple_n(args.ranges, 4)
            emit(render(cmd_eigenvalues(s, ranges), form), s["out"])
        elif args.command == "dephasing":
            grid = parse_triple(args.mbar_grid, "mbar-grid", (float, float, int))
            emit(render(cmd_dephasing(s, grid), form), s["out"])
        elif args.command == "validate":
            passed, report = cmd_validate(s, args.n_mech, args.points)
            if form == "jsonl":
                text = "".join(json.dumps({"check": r.split(" ", 1)[1], "status": r.split(" ", 1)[0]}) + "\n"
                               for r in report)
            else:
                text = "\n".join(report) + "\n"
            emit(text, s["out"])
            return EXIT_OK if passed else EXIT_VALIDATION
        return EXIT_OK
    except UsageError as exc:
        return _error(str(exc), EXIT_USAGE, form)
    except OSError as exc:
        return _error(str(exc), EXIT_USAGE, form)
    except (FloatingPointError, DegenerateEigenvalueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        return _error(str(exc), EXIT_NUMERIC, form)


def parse_triple_n(text: str, n: int):
    parts = text.split(":")
    if len(parts) != n:
        raise UsageError(f"expected {n} ':'-separated integers, got {text!r}")
    try:
        vals = tuple(int(x) for x in parts)
    except ValueError:
        raise UsageError(f"cannot parse {text!r}") from None
    if min(vals) < 0:
        raise UsageError("ranges must be >= 0")
    return vals


if __name__ == "__main__":
    sys.exit(main())
