"""Command-line front end: point queries, grid scans, suites, mollification.

Exit codes: 0 on success, 2 on invalid input (unknown family, malformed
point or region, bad config file, unwritable path), 3 on numerical failure
(eigensolver stall, empty sampling tier, quadrature breakdown, or a failing
verify suite).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError
from .functions import FunctionOracle, oracle_from_config
from .hessian_set import SamplingConfig, sample_hessian_set
from .hull_index import NonconvexityInterval, interval_from_hull
from .smoothing import MollifierConfig, mollification_membership_check
from .verify import DEFAULT_SEED, SUITES, run_suites

_CONFIG_KEYS = {"function", "sampling", "mollifier", "scan"}
_CSV_FIELDS = ("loc_low", "loc_high", "nloc_low", "nloc_high",
               "conv_low", "conv_high", "rho", "exact", "approximate_nloc")


@dataclass(frozen=True)
class ScanRequest:
    """A resolved grid scan: oracle, box, per-axis counts, output target."""

    function: FunctionOracle
    region: tuple[tuple[float, float], ...]
    grid: tuple[int, ...]
    sampling: SamplingConfig
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if len(self.region) != self.function.dim:
            raise ValueError(f"region has {len(self.region)} axes, function "
                             f"has dimension {self.function.dim}")
        if len(self.grid) != self.function.dim:
            raise ValueError(f"grid has {len(self.grid)} axes, function "
                             f"has dimension {self.function.dim}")
        for lo, hi in self.region:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"degenerate region axis [{lo}, {hi}]")
        for n in self.grid:
            if n < 1:
                raise ValueError(f"grid count {n} must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")


def _parse_params(text: str) -> dict:
    """Parse --params: 'a=2,b=3' pairs, or a JSON object for matrices."""
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("params JSON must be an object")
        return data
    out: dict = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"bad params entry {item!r}; expected key=value")
        out[key.strip()] = float(value)
    return out


def _parse_point(text: str) -> np.ndarray:
    try:
        values = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"malformed point {text!r}; expected comma-separated "
                         "decimals") from None
    return np.asarray(values, dtype=float)


def _parse_region(value) -> tuple[tuple[float, float], ...]:
    if isinstance(value, str):
        pairs = []
        for segment in value.split(","):
            lo, sep, hi = segment.partition(":")
            if not sep:
                raise ValueError(f"bad region segment {segment!r}; expected "
                                 "lo:hi")
            pairs.append((float(lo), float(hi)))
        return tuple(pairs)
    pairs = []
    for entry in value:
        lo, hi = entry
        pairs.append((float(lo), float(hi)))
    return tuple(pairs)


def _parse_grid(value, dim: int) -> tuple[int, ...]:
    if isinstance(value, str):
        counts = [int(tok) for tok in value.split(",")]
    elif isinstance(value, int):
        counts = [value]
    else:
        counts = [int(n) for n in value]
    if len(counts) == 1:
        counts = counts * dim
    if len(counts) != dim:
        raise ValueError(f"grid spec {value!r} does not match dimension {dim}")
    return tuple(counts)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config root must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}; allowed: "
                         f"{sorted(_CONFIG_KEYS)}")
    return data


def _resolve_oracle(args, cfg: dict) -> FunctionOracle:
    spec = dict(cfg.get("function", {}))
    if getattr(args, "function", None):
        spec["family"] = args.function
    if getattr(args, "params", None) is not None:
        spec["params"] = _parse_params(args.params)
    if "family" not in spec:
        raise ValueError("no function selected; pass --function or a config "
                         "file with a 'function' entry")
    return oracle_from_config(spec)


def _resolve_sampling(args, cfg: dict) -> SamplingConfig:
    data = dict(cfg.get("sampling", {}))
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return SamplingConfig.from_dict(data)


def _require_point(args, f: FunctionOracle) -> np.ndarray:
    if not getattr(args, "point", None):
        raise ValueError("--point is required")
    x = _parse_point(args.point)
    if x.size != f.dim:
        raise ValueError(f"point has {x.size} coordinates, function has "
                         f"dimension {f.dim}")
    return x


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return format(float(v), ".12g")


def _csv_text(dim: int, rows) -> str:
    header = [f"x{j + 1}" for j in range(dim)] + list(_CSV_FIELDS)
    lines = [",".join(header)]
    for point, iv in rows:
        rec = iv.to_dict()
        cells = [_format_value(v) for v in point]
        cells.extend(_format_value(rec[name]) for name in _CSV_FIELDS)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _json_rows(rows) -> list[dict]:
    return [{"point": [float(v) for v in point], **iv.to_dict()}
            for point, iv in rows]


def _emit(text: str, path: str | None) -> None:
    if path in (None, "", "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def run_scan(request: ScanRequest) -> list[tuple[np.ndarray, NonconvexityInterval]]:
    """Evaluate the interval on every grid point, row-major axis order.

    Each point draws its own seed from the scan seed and its flat index,
    so results do not depend on evaluation order.
    """
    axes = [np.linspace(lo, hi, n)
            for (lo, hi), n in zip(request.region, request.grid)]
    rows = []
    for k, multi in enumerate(np.ndindex(*request.grid)):
        x = np.array([axes[j][multi[j]] for j in range(len(axes))])
        point_seed = int(np.random.SeedSequence(
            [request.sampling.seed, k]).generate_state(1, np.uint64)[0])
        cfg = replace(request.sampling, seed=point_seed)
        hull = sample_hessian_set(request.function, x, cfg)
        rows.append((x, interval_from_hull(hull, seed=point_seed)))
    return rows


def _cmd_index(args) -> int:
    cfg = _load_config(args.config)
    f = _resolve_oracle(args, cfg)
    x = _require_point(args, f)
    sampling = _resolve_sampling(args, cfg)
    hull = sample_hessian_set(f, x, sampling)
    iv = interval_from_hull(hull, seed=sampling.seed)
    fmt = args.format or "json"
    if fmt == "json":
        payload = {"point": [float(v) for v in x], **iv.to_dict()}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = _csv_text(f.dim, [(x, iv)])
    _emit(text, args.output)
    return 0


def _cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    f = _resolve_oracle(args, cfg)
    scan_cfg = cfg.get("scan", {})
    if not isinstance(scan_cfg, dict):
        raise ValueError("config 'scan' entry must be an object")
    unknown = set(scan_cfg) - {"region", "grid", "format", "output"}
    if unknown:
        raise ValueError(f"unknown scan config keys {sorted(unknown)}")
    region_src = args.region if args.region is not None else scan_cfg.get("region")
    if region_src is None:
        raise ValueError("scan needs --region or a config 'scan.region' entry")
    grid_src = args.grid if args.grid is not None else scan_cfg.get("grid", 21)
    fmt = args.format or scan_cfg.get("format") or "csv"
    output = args.output if args.output is not None else scan_cfg.get("output")
    request = ScanRequest(function=f, region=_parse_region(region_src),
                          grid=_parse_grid(grid_src, f.dim),
                          sampling=_resolve_sampling(args, cfg),
                          output=output, format=fmt)
    rows = run_scan(request)
    if request.format == "json":
        text = json.dumps(_json_rows(rows), indent=2) + "\n"
    else:
        text = _csv_text(f.dim, rows)
    _emit(text, request.output)
    return 0


def _cmd_verify(args) -> int:
    names = args.suite or ["all"]
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    results = run_suites(names, seed=seed)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<24} {status}  worst {r.worst_slack:.3e}  "
                     f"tol {r.tolerance:g}  {r.seconds:6.2f}s  {r.detail}")
    failed = sum(1 for r in results if not r.passed)
    lines.append(f"{len(results) - failed}/{len(results)} suites passed")
    _emit("\n".join(lines) + "\n", args.output)
    return 0 if failed == 0 else 3


def _cmd_mollify(args) -> int:
    cfg = _load_config(args.config)
    f = _resolve_oracle(args, cfg)
    x = _require_point(args, f)
    mcfg = MollifierConfig.from_dict(cfg.get("mollifier", {}))
    if args.eps:
        eps = tuple(float(tok) for tok in args.eps.split(","))
        mcfg = replace(mcfg, epsilons=eps)
    sampling = _resolve_sampling(args, cfg)
    report = mollification_membership_check(f, x, mcfg, sampling)
    payload = {
        "point": [float(v) for v in x],
        "interval": {"loc_low": report.interval[0],
                     "loc_high": report.interval[1]},
        "samples": report.to_json_entries(),
        "pass": report.passed,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file (keys: function, sampling, "
                             "mollifier, scan); flags override it")
    common.add_argument("--function", metavar="FAMILY",
                        help="built-in function family")
    common.add_argument("--params", metavar="SPEC",
                        help="family parameters: key=value pairs or a JSON "
                             "object")
    common.add_argument("--seed", type=int, metavar="N",
                        help="sampling seed override")
    common.add_argument("--output", metavar="PATH",
                        help="write results to this file instead of stdout")

    parser = argparse.ArgumentParser(
        prog="convexgap",
        description="Interval-valued local nonconvexity indices of C^{1,1} "
                    "functions via generalized Hessian hulls.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", parents=[common],
                       help="compute the index interval at one point")
    p.add_argument("--point", metavar="COORDS",
                   help="comma-separated coordinates")
    p.add_argument("--format", choices=("json", "csv"),
                   help="output format (default json)")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("scan", parents=[common],
                       help="tabulate the index over a rectangular grid")
    p.add_argument("--region", metavar="BOX",
                   help="axis ranges lo:hi, comma-separated per axis")
    p.add_argument("--grid", metavar="COUNTS",
                   help="grid points per axis, one count or a comma list")
    p.add_argument("--format", choices=("json", "csv"),
                   help="output format (default csv)")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("verify", parents=[common],
                       help="run numerical property suites")
    p.add_argument("--suite", action="append", metavar="NAME",
                   choices=("all", *SUITES),
                   help="suite to run, repeatable (default all)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("mollify", parents=[common],
                       help="mollified-Hessian membership report")
    p.add_argument("--point", metavar="COORDS",
                   help="comma-separated coordinates")
    p.add_argument("--eps", metavar="LIST",
                   help="comma-separated mollifier radii")
    p.set_defaults(func=_cmd_mollify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 2
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
