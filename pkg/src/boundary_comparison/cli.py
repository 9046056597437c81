"""Scenario-driven batch runner.

A scenario is a JSON object::

    {
      "name": "euclidean_annulus",
      "manifold": {"class": "WarpedTube", "warp": "1+t", "topology": "Cylinder",
                   "length": 2, "fiber": {"kind": "Circle", "length": "2*pi"}},
      "params": {"n": 2, "kappa": 0, "lam": -1},
      "grid": {"boundary_samples": 512},
      "suite": {"checks": ["log_jacobian", "volume_comparison"]},
      "tolerances": {"certification": 1e-9},
      "certify": true,
      "output": {"format": "both"}
    }

Chart surfaces use ``{"class": "ChartSurface2D", "G": ..., "beta_low": ...,
"beta_high": ..., "period": ...}``. Expressions follow the grammar of
:mod:`boundary_comparison.expr`; numeric fields also accept constant
expressions such as ``"2*pi"``.

Defaults:

=========================  ===========================================
field                      default
=========================  ===========================================
manifold.topology          Cylinder
manifold.t_max             40 (HalfInfinite truncation)
manifold.fiber             Circle of length 2*pi (n = 2), else RoundSphere(n-1, 1)
params.D                   computed inscribed radius
grid.boundary_samples      512
grid.step                  1e-3 (ODE step)
grid.grid_h                0.0125 (eikonal grid, chart surfaces)
grid.nt, grid.nx           derived from grid_h
grid.cut_constant          4
suite.checks               all checks
suite.t_values             [0.25, 0.5, 0.75]
suite.band                 (0.25 D', 0.75 D'), D' = min(inscribed radius, 2)
suite.chain                {"t": 0.5, "k_max": 6, "levels": [4, 12]}
suite.f_specs              ["1", "0", "1+0.5*sin(x)"]
suite.psi_specs            radial t, radial sin(pi t / 2D), a product vanishing on both sides, "0"
suite.iso_bands            (0.2 d, 0.8 d) per side, d = min(min cut time, 2)
suite.p_list               [2, 3]
suite.trials               3
tolerances.certification   1e-9
tolerances.rigidity        1e-6
tolerances.scale           1
certify                    true (false pushes a mis-declared manifold through the battery)
output.format              both
seed                       0
=========================  ===========================================

Exit codes: 0 all checks pass, 1 some check fails, 2 input or certification error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import kernels
from .expr import ExpressionError, as_expr, evaluate_constant
from .manifolds import (
    DEFAULT_T_MAX,
    CertificationError,
    Fiber,
    Resolution,
    build_chart_surface,
    build_warped_tube,
    certify_bounds,
    fiber_from_dict,
)
from .tube_geometry import RadialBand
from .verifiers import CHECK_NAMES, FAIL, SuiteConfig, run_suite

THREADS_ENV = "BOUNDARY_COMPARISON_THREADS"
CSV_COLUMNS = ("check", "name", "margin", "location_t", "location_x", "tolerance", "status")

_TOP_KEYS = {"name", "manifold", "params", "grid", "suite", "tolerances", "certify", "output", "seed", "description"}
_MANIFOLD_KEYS = {
    "WarpedTube": {"class", "warp", "fiber", "topology", "length", "t_max"},
    "ChartSurface2D": {"class", "G", "beta_low", "beta_high", "period"},
}
_PARAM_KEYS = {"n", "kappa", "lam", "D"}
_GRID_KEYS = {"boundary_samples", "step", "grid_h", "nt", "nx", "cut_constant", "profile_points"}
_SUITE_KEYS = {"checks", "t_values", "band", "chain", "f_specs", "psi_specs", "iso_bands", "p_list", "trials"}
_TOL_KEYS = {"certification", "rigidity", "scale"}
_OUTPUT_KEYS = {"format", "dir"}
FORMATS = ("csv", "json", "both")


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` is a dotted path, ``line`` a 1-based line when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class Scenario:
    name: str
    manifold: object
    params: kernels.ComparisonParams
    resolution: Resolution
    suite: SuiteConfig
    certification_tol: float = 1e-9
    certify: bool = True
    output_format: str = "both"
    output_dir: str | None = None
    seed: int = 0
    source: dict = field(default_factory=dict)


# --- parsing ------------------------------------------------------------------------

def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _check_keys(obj, allowed, path, text):
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", path, _line_of(text, path.rsplit(".", 1)[-1]) if path else None)
    for k in obj:
        if k not in allowed:
            raise ScenarioError(f"unknown key; allowed: {sorted(allowed)}", f"{path}.{k}" if path else k,
                                _line_of(text, k))


def _number(obj, key, path, text, default=None, integer=False, positive=False):
    if obj.get(key) is None:
        return default
    raw = obj[key]
    try:
        if isinstance(raw, bool):
            raise ValueError("booleans are not numbers")
        val = evaluate_constant(raw) if isinstance(raw, str) else float(raw)
    except (ExpressionError, ValueError, TypeError) as exc:
        raise ScenarioError(str(exc), f"{path}.{key}", _line_of(text, key)) from None
    if integer:
        if val != int(val):
            raise ScenarioError("expected an integer", f"{path}.{key}", _line_of(text, key))
        val = int(val)
    if positive and not val > 0:
        raise ScenarioError("must be positive", f"{path}.{key}", _line_of(text, key))
    return val


def _expr(obj, key, path, text, required=True):
    if key not in obj:
        if required:
            raise ScenarioError("missing required expression", f"{path}.{key}")
        return None
    raw = obj[key]
    if not isinstance(raw, (str, int, float)) or isinstance(raw, bool):
        raise ScenarioError("expected an expression string or number", f"{path}.{key}", _line_of(text, key))
    try:
        return as_expr(raw)
    except ExpressionError as exc:
        raise ScenarioError(str(exc), f"{path}.{key}", _line_of(text, key)) from None


def _build_manifold(spec, n, text):
    if not isinstance(spec, dict):
        raise ScenarioError("expected an object", "manifold", _line_of(text, "manifold"))
    cls = spec.get("class")
    if cls not in _MANIFOLD_KEYS:
        raise ScenarioError(f"class must be one of {sorted(_MANIFOLD_KEYS)}", "manifold.class", _line_of(text, "class"))
    _check_keys(spec, _MANIFOLD_KEYS[cls], "manifold", text)
    try:
        if cls == "WarpedTube":
            warp = _expr(spec, "warp", "manifold", text)
            if "fiber" in spec:
                if not isinstance(spec["fiber"], dict):
                    raise ScenarioError("expected an object", "manifold.fiber", _line_of(text, "fiber"))
                fiber = fiber_from_dict(spec["fiber"])
            elif n == 2:
                fiber = Fiber.circle(2 * math.pi)
            else:
                fiber = Fiber.round_sphere(n - 1, 1.0)
            topology = spec.get("topology", "Cylinder")
            if topology not in ("Cylinder", "Cap", "HalfInfinite"):
                raise ScenarioError("topology must be Cylinder, Cap or HalfInfinite", "manifold.topology",
                                    _line_of(text, "topology"))
            length = _number(spec, "length", "manifold", text, positive=True)
            t_max = _number(spec, "t_max", "manifold", text, default=DEFAULT_T_MAX, positive=True)
            return build_warped_tube(fiber, warp, topology, length, t_max)
        G = _expr(spec, "G", "manifold", text)
        lo = _expr(spec, "beta_low", "manifold", text)
        hi = _expr(spec, "beta_high", "manifold", text)
        period = _number(spec, "period", "manifold", text, default=2 * math.pi, positive=True)
        return build_chart_surface(G, lo, hi, period)
    except ScenarioError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(str(exc), "manifold") from None


def _float_list(obj, key, path, text, default):
    if key not in obj:
        return default
    raw = obj[key]
    if not isinstance(raw, list):
        raise ScenarioError("expected a list", f"{path}.{key}", _line_of(text, key))
    try:
        return tuple(evaluate_constant(v) if isinstance(v, str) else float(v) for v in raw)
    except (ExpressionError, ValueError, TypeError) as exc:
        raise ScenarioError(str(exc), f"{path}.{key}", _line_of(text, key)) from None


def _spec_list(obj, key, path, text):
    if key not in obj:
        return None
    raw = obj[key]
    if not isinstance(raw, list) or not all(isinstance(v, str) for v in raw):
        raise ScenarioError("expected a list of expression strings", f"{path}.{key}", _line_of(text, key))
    for v in raw:
        try:
            as_expr(v[len("radial:"):] if v.startswith("radial:") else v)
        except ExpressionError as exc:
            raise ScenarioError(str(exc), f"{path}.{key}", _line_of(text, key)) from None
    return list(raw)


def _build_suite(spec, text, seed, tol_scale, rigidity_tol, D) -> SuiteConfig:
    _check_keys(spec, _SUITE_KEYS, "suite", text)
    kw = {"seed": seed, "tol_scale": tol_scale, "rigidity_tol": rigidity_tol, "D": D}
    if "checks" in spec:
        checks = spec["checks"]
        if not isinstance(checks, list):
            raise ScenarioError("expected a list of check names", "suite.checks", _line_of(text, "checks"))
        bad = [c for c in checks if c not in CHECK_NAMES]
        if bad:
            raise ScenarioError(f"unknown check names {bad}; known: {list(CHECK_NAMES)}", "suite.checks",
                                _line_of(text, "checks"))
        kw["checks"] = tuple(checks)
    kw["t_values"] = _float_list(spec, "t_values", "suite", text, (0.25, 0.5, 0.75))
    if any(not 0 < t < 1 for t in kw["t_values"]):
        raise ScenarioError("t values must lie in (0, 1)", "suite.t_values", _line_of(text, "t_values"))
    if "band" in spec:
        b = _float_list(spec, "band", "suite", text, None)
        try:
            kw["band"] = RadialBand(*b)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(str(exc), "suite.band", _line_of(text, "band")) from None
    if "chain" in spec:
        ch = spec["chain"]
        _check_keys(ch, {"t", "k_max", "levels"}, "suite.chain", text)
        if "t" in ch:
            kw["chain_t"] = _number(ch, "t", "suite.chain", text)
        if "k_max" in ch:
            kw["chain_k_max"] = _number(ch, "k_max", "suite.chain", text, integer=True, positive=True)
        if "levels" in ch:
            lv = _float_list(ch, "levels", "suite.chain", text, None)
            if len(lv) != 2 or lv[0] > lv[1] or lv[0] < 1:
                raise ScenarioError("levels is [first, last] with 1 <= first <= last", "suite.chain.levels",
                                    _line_of(text, "levels"))
            kw["chain_levels"] = tuple(range(int(lv[0]), int(lv[1]) + 1))
    f_specs = _spec_list(spec, "f_specs", "suite", text)
    if f_specs is not None:
        kw["f_specs"] = f_specs
    psi_specs = _spec_list(spec, "psi_specs", "suite", text)
    if psi_specs is not None:
        kw["psi_specs"] = psi_specs
    if "iso_bands" in spec:
        ib = spec["iso_bands"]
        if not isinstance(ib, dict):
            raise ScenarioError("expected an object side -> [t1, t2]", "suite.iso_bands", _line_of(text, "iso_bands"))
        kw["iso_bands"] = {k: _float_list(ib, k, "suite.iso_bands", text, None) for k in ib}
    kw["p_list"] = _float_list(spec, "p_list", "suite", text, (2.0, 3.0))
    if any(not p > 1 for p in kw["p_list"]):
        raise ScenarioError("p values must exceed 1", "suite.p_list", _line_of(text, "p_list"))
    if "trials" in spec:
        kw["trials"] = _number(spec, "trials", "suite", text, integer=True)
    return SuiteConfig(**kw)


def parse_scenario_text(text: str, origin: str = "<scenario>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{origin}: malformed JSON ({exc.msg}, column {exc.colno})", line=exc.lineno) from None
    _check_keys(data, _TOP_KEYS, "", text)
    for key in ("manifold", "params"):
        if key not in data:
            raise ScenarioError("missing required section", key)
    params = data["params"]
    _check_keys(params, _PARAM_KEYS, "params", text)
    n = _number(params, "n", "params", text, integer=True)
    kappa = _number(params, "kappa", "params", text)
    lam = _number(params, "lam", "params", text)
    for key, val in (("n", n), ("kappa", kappa), ("lam", lam)):
        if val is None:
            raise ScenarioError("missing required number", f"params.{key}")
    try:
        cp = kernels.ComparisonParams(n, kappa, lam)
    except ValueError as exc:
        raise ScenarioError(str(exc), "params") from None
    D = _number(params, "D", "params", text, positive=True)
    manifold = _build_manifold(data["manifold"], n, text)

    grid = data.get("grid", {})
    _check_keys(grid, _GRID_KEYS, "grid", text)
    res_kw = {}
    for key, integer in (("boundary_samples", True), ("step", False), ("grid_h", False), ("nt", True),
                         ("nx", True), ("cut_constant", False), ("profile_points", True)):
        val = _number(grid, key, "grid", text, integer=integer, positive=True)
        if val is not None:
            res_kw[key] = val
    try:
        resolution = Resolution(**res_kw)
    except ValueError as exc:
        raise ScenarioError(str(exc), "grid") from None

    tols = data.get("tolerances", {})
    _check_keys(tols, _TOL_KEYS, "tolerances", text)
    cert_tol = _number(tols, "certification", "tolerances", text, default=1e-9, positive=True)
    rig_tol = _number(tols, "rigidity", "tolerances", text, default=1e-6, positive=True)
    scale = _number(tols, "scale", "tolerances", text, default=1.0, positive=True)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("expected an integer", "seed", _line_of(text, "seed"))
    certify = data.get("certify", True)
    if not isinstance(certify, bool):
        raise ScenarioError("expected true or false", "certify", _line_of(text, "certify"))
    out = data.get("output", {})
    _check_keys(out, _OUTPUT_KEYS, "output", text)
    fmt = out.get("format", "both")
    if fmt not in FORMATS:
        raise ScenarioError(f"format must be one of {FORMATS}", "output.format", _line_of(text, "format"))
    suite = _build_suite(data.get("suite", {}), text, seed, scale, rig_tol, D)
    name = data.get("name") or Path(origin).stem
    if not isinstance(name, str):
        raise ScenarioError("expected a string", "name", _line_of(text, "name"))
    return Scenario(name, manifold, cp, resolution, suite, cert_tol, certify, fmt, out.get("dir"), seed, data)


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario_text(text, str(path))


# --- reporting ----------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return int(obj)
    try:
        v = float(obj)
    except (TypeError, ValueError):
        return str(obj)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    return repr(float(v))


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        loc = r.worst_location
        t = loc.get("t", loc.get("r", ""))
        x = loc.get("x", "")
        w.writerow([r.check, r.name, _fmt(r.worst_margin), _fmt(t), _fmt(x), _fmt(r.tolerance), r.status])
    return buf.getvalue()


def reports_to_json(scenario: Scenario, cm, reports, verdict, exit_code: int) -> str:
    doc = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "params": {"n": scenario.params.n, "kappa": scenario.params.kappa, "lam": scenario.params.lam},
        "certification": {
            "certified": cm.certified,
            "ric_inf": cm.ric_inf,
            "h_inf": cm.h_inf,
            "margins": list(cm.margins),
            "tolerance": cm.tolerance,
        },
        "reports": [r.to_dict() for r in reports],
        "rigidity": verdict.to_dict(),
        "exit_code": exit_code,
    }
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


# --- running ------------------------------------------------------------------------

def execute(scenario: Scenario, threads: int = 1):
    """Certify and run the battery; returns ``(cm, reports, verdict, exit_code)``.

    Raises :class:`CertificationError` when certification is enforced and fails.
    """
    cm = certify_bounds(scenario.manifold, scenario.params, scenario.certification_tol,
                        enforce=scenario.certify, resolution=scenario.resolution)
    scenario.suite.threads = threads
    reports, verdict = run_suite(cm, scenario.suite)
    code = 1 if any(r.status == FAIL for r in reports) else 0
    return cm, reports, verdict, code


def run(scenario: Scenario, out_dir=None, fmt: str | None = None, threads: int = 1,
        dump_distance_field: bool = False, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cm, reports, verdict, code = execute(scenario, threads)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fmt = fmt or scenario.output_format
    out = Path(out_dir or scenario.output_dir or "reports")
    out.mkdir(parents=True, exist_ok=True)
    if fmt in ("csv", "both"):
        (out / f"{scenario.name}.csv").write_text(reports_to_csv(reports))
    if fmt in ("json", "both"):
        (out / f"{scenario.name}.json").write_text(reports_to_json(scenario, cm, reports, verdict, code))
    if dump_distance_field and cm.bundle.field is not None:
        cm.bundle.field.dump(out / f"{scenario.name}_distance_field.csv")
    for r in reports:
        print(f"{r.status.upper():7s} {r.name:30s} margin={r.worst_margin:+.3e} tol={r.tolerance:.1e}", file=stream)
    print(f"rigidity: {verdict.kind} (sup deviation {verdict.sup_deviation:.3e})", file=stream)
    return code


def _threads(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ScenarioError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boundary-comparison",
                                 description="Run the comparison-inequality battery on a scenario file.")
    ap.add_argument("--scenario", required=True, help="scenario JSON file, or the name of a bundled scenario")
    ap.add_argument("--out", help="output directory (default: scenario output.dir or ./reports)")
    ap.add_argument("--format", choices=FORMATS, help="report format")
    ap.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or 1)")
    ap.add_argument("--tol-scale", type=float, help="uniform tolerance multiplier")
    ap.add_argument("--seed", type=int, help="seed for trial-function sampling")
    ap.add_argument("--dump-distance-field", action="store_true", help="write the eikonal grid as CSV")
    return ap


def bundled_scenarios() -> dict:
    from importlib import resources

    root = resources.files("boundary_comparison") / "scenarios"
    return {p.name[:-5]: p for p in root.iterdir() if p.name.endswith(".json")}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        path = Path(args.scenario)
        if not path.exists():
            bundled = bundled_scenarios()
            if args.scenario not in bundled:
                raise ScenarioError(f"no such file or bundled scenario: {args.scenario}")
            sc = parse_scenario_text(bundled[args.scenario].read_text(), args.scenario)
        else:
            sc = parse_scenario(path)
        if args.tol_scale is not None:
            if not args.tol_scale > 0:
                raise ScenarioError("--tol-scale must be positive")
            sc.suite.tol_scale = args.tol_scale
        if args.seed is not None:
            sc.seed = args.seed
            sc.suite.seed = args.seed
        threads = _threads(args.threads)
        if threads < 1:
            raise ScenarioError("--threads must be >= 1")
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    return run(sc, args.out, args.format, threads, args.dump_distance_field)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
