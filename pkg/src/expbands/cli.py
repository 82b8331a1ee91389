"""Command-line front end: ingestion, calibration cache, and file outputs.

Subcommands: fit, region, band, metrics, calibrate, coverage, simulate,
reproduce-paper. Option precedence is flags > config file (--config, a JSON
document) > defaults; the calibration cache path comes from the config file
or the EXPBANDS_CACHE environment variable. Every output embeds the
resolved-config hash, the seed, and calibration provenance. Exit codes:
0 ok, 2 parse, 3 domain, 4 numeric, 5 calibration.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from . import bands as _bands
from . import metrics as _metrics
from . import regions as _regions
from .calibration import CalibrationCache, CalibrationKey, CalibrationResult
from .errors import (
    CalibrationError,
    DomainError,
    ExpBandsError,
    NumericError,
    ParseError,
)
from .model import (
    CensoringScheme,
    LocScale,
    MonotoneTransform,
    g_transform,
    mle,
    read_sample_csv,
    simulate_sample,
    umvue,
    write_sample_csv,
)
from .plotting import band_svg
from .reproduce import reproduce_paper
from .streams import batch_generator, substream

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_CALIBRATION = 0, 2, 3, 4, 5

_DEFAULTS = {
    "output_dir": ".",
    "formats": "json,csv",
    "seed": 20201222,
    "reps": 1_000_000,
    "level": 0.90,
    "grid_points": 1024,
    "boundary_points": 512,
    "transform": "identity",
    "replicates": 100_000,
    "force_recalibrate": False,
    "cache_path": None,
}

REGION_METHODS = ("c1", "c2", "c3", "c4p", "c4pp")
BAND_METHODS = ("b1", "b2", "b3", "b4", "b4p", "b4pp")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"config file {path} must hold a JSON object")
    unknown = set(doc) - set(_DEFAULTS)
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    cfg.update(_load_config_file(getattr(args, "config", None)))
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if not 0.0 < float(cfg["level"]) < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {cfg['level']}")
    if int(cfg["reps"]) < 1 or int(cfg["replicates"]) < 1:
        raise DomainError("reps and replicates must be >= 1")
    return cfg


def _config_hash(cfg: dict, command: str) -> str:
    # hash the computation-relevant parameters; where the artifacts land
    # (output dir, cache file) does not change what is computed
    semantic = {k: cfg[k] for k in sorted(cfg) if k not in ("output_dir", "cache_path")}
    doc = json.dumps({"command": command, **semantic}, sort_keys=True, default=str)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _cache(cfg: dict) -> CalibrationCache:
    path = cfg.get("cache_path") or os.environ.get("EXPBANDS_CACHE")
    if path is None:
        path = Path(cfg["output_dir"]) / "expbands-cache.jsonl"
    return CalibrationCache(path)


def _metadata(cfg: dict, command: str, calibrations: list[dict] | None = None) -> dict:
    return {
        "tool": "expbands",
        "version": __version__,
        "command": command,
        "config_hash": _config_hash(cfg, command),
        "seed": int(cfg["seed"]),
        "calibration": calibrations or [],
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def _provenance(res: CalibrationResult) -> dict:
    return {"key": dataclasses.asdict(res.key), "value": res.value,
            "mc_std_error": res.mc_std_error, "extra": res.extra}


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        json.dump(payload, fh, indent=2, default=float)
        fh.write("\n")


def _resolve_constants(method: str, level: float, scheme, cfg: dict) -> tuple[dict, list[dict]]:
    """Calibration constants needed by a region/band method, cache-backed."""
    cache = _cache(cfg)
    reps, seed = int(cfg["reps"]), int(cfg["seed"])
    force = bool(cfg["force_recalibrate"])
    m, n = scheme.m, int(scheme.effective_n)
    if method in ("c1", "c2", "b1", "b2"):
        return {}, []
    if method in ("c4p", "c4pp", "b4", "b4p", "b4pp"):
        key = CalibrationKey("d_p", m=m, n=n, level=1.0 - level, reps=reps,
                             seed=substream(seed, "d_p"))
        res = cache.get_or_compute(key, force=force)
        return {"d_p": res.value}, [_provenance(res)]
    if method == "c3":
        key = CalibrationKey("c_p", m=m, n=0, level=1.0 - level, reps=reps,
                             seed=substream(seed, "c_p"))
        res = cache.get_or_compute(key, force=force)
        return {"c_p": res.value}, [_provenance(res)]
    if method == "b3":
        key = CalibrationKey("p_of_tau", m=m, n=0, level=level, reps=reps,
                             seed=substream(seed, "c_p"))
        res = cache.get_or_compute(key, force=force)
        return {"c_p": res.extra["c"], "nominal_p": res.value}, [_provenance(res)]
    raise DomainError(f"unknown method {method!r}")


def _build_region(method: str, est, scheme, level: float, constants: dict):
    p = 1.0 - level
    if method == "c1":
        return _regions.build_c1(est, scheme, p)
    if method == "c2":
        return _regions.build_c2(est, scheme, p)
    if method == "c3":
        return _regions.build_c3(est, scheme, constants["c_p"])
    return _regions.build_c4(est, constants["d_p"], trimmed=method == "c4pp")


def _build_band(method: str, est, scheme, level: float, constants: dict,
                grid_points: int):
    p = 1.0 - level
    if method == "b1":
        return _bands.band_b1(est, scheme, p)
    if method == "b2":
        return _bands.band_b2(est, scheme, p)
    if method == "b3":
        return _bands.band_b3(est, scheme, constants["c_p"], nominal_p=constants["nominal_p"])
    if method == "b4":
        return _bands.band_b4(est, constants["d_p"], level=level)
    return _bands.band_b4_trimmed(est, constants["d_p"], trimmed=method == "b4pp",
                                  level=level, grid=_bands.GridSpec(points=grid_points))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load_data(args, cfg) -> tuple:
    sample = read_sample_csv(args.data)
    transform = MonotoneTransform(cfg["transform"])
    working = g_transform(sample, transform)
    return sample, working, transform


def cmd_fit(args, cfg) -> int:
    _, working, transform = _load_data(args, cfg)
    est = mle(working)
    mu_t, sigma_t = umvue(est, working.scheme)
    scheme = working.scheme
    payload = {
        "metadata": _metadata(cfg, "fit"),
        "scheme": {"n": scheme.n, "m": scheme.m, "removals": list(scheme.removals),
                   "gammas": list(scheme.gammas)},
        "transform": transform.kind,
        "mle": {"mu_hat": est.mu_hat, "sigma_hat": est.sigma_hat},
        "umvue": {"mu_tilde": mu_t, "sigma_tilde": sigma_t},
    }
    _write_json(Path(cfg["output_dir"]) / "fit.json", payload)
    print(json.dumps(payload["mle"]))
    return EXIT_OK


def cmd_region(args, cfg) -> int:
    _, working, transform = _load_data(args, cfg)
    est = mle(working)
    level = float(cfg["level"])
    constants, provenance = _resolve_constants(args.method, level, working.scheme, cfg)
    region = _build_region(args.method, est, working.scheme, level, constants)
    payload = {
        "metadata": _metadata(cfg, f"region.{args.method}", provenance),
        "level": level,
        "transform": transform.kind,
        **_regions.region_to_dict(region, points=int(cfg["boundary_points"])),
    }
    out = Path(cfg["output_dir"]) / f"region_{args.method}.json"
    _write_json(out, payload)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_band(args, cfg) -> int:
    _, working, transform = _load_data(args, cfg)
    est = mle(working)
    level = float(cfg["level"])
    constants, provenance = _resolve_constants(args.method, level, working.scheme, cfg)
    band = _build_band(args.method, est, working.scheme, level, constants,
                       int(cfg["grid_points"]))
    if args.marginal:
        band = _bands.marginal_band(band, working.scheme.gammas)
    if args.reliability:
        band = _bands.reliability_band(band)
    xs = _bands.default_grid(band, points=int(cfg["grid_points"]))
    xs_original = transform.invert(xs)
    formats = [f.strip() for f in str(cfg["formats"]).split(",") if f.strip()]
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    name = f"band_{band.kind}"
    if "json" in formats:
        payload = {"metadata": _metadata(cfg, f"band.{args.method}", provenance),
                   "transform": transform.kind, **_bands.band_to_dict(band)}
        _write_json(outdir / f"{name}.json", payload)
        written.append(f"{name}.json")
    if "csv" in formats:
        with (outdir / f"{name}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "lower", "upper"])
            for (xt, lo, hi), xo in zip(_bands.band_rows(band, xs), xs_original):
                writer.writerow([repr(float(xo)), repr(lo), repr(hi)])
        written.append(f"{name}.csv")
    if "svg" in formats:
        fitted = LocScale(est.mu_hat, est.sigma_hat)
        (outdir / f"{name}.svg").write_text(band_svg(band, xs, fitted=fitted))
        written.append(f"{name}.svg")
    print(f"wrote {', '.join(written)} (constants: {constants})")
    return EXIT_OK


def cmd_metrics(args, cfg) -> int:
    _, working, transform = _load_data(args, cfg)
    est = mle(working)
    level = float(cfg["level"])
    methods = BAND_METHODS if args.methods in (None, "all") else tuple(
        m.strip() for m in args.methods.split(","))
    bad = set(methods) - set(BAND_METHODS)
    if bad:
        raise DomainError(f"unknown band methods: {sorted(bad)}")
    rows = []
    provenance_all: list[dict] = []
    for method in methods:
        constants, provenance = _resolve_constants(method, level, working.scheme, cfg)
        band = _build_band(method, est, working.scheme, level, constants,
                           int(cfg["grid_points"]))
        bm = _metrics.band_metrics(band)
        rows.append({"band": method, "level": level,
                     "max_width": bm.max_width, "width_argmax": bm.width_argmax,
                     "area": None if bm.area == float("inf") else bm.area,
                     "area_infinite": bm.area == float("inf"),
                     "quadrature_error_estimate": bm.quadrature_error_estimate,
                     "constants": constants})
        provenance_all.extend(provenance)
    payload = {"metadata": _metadata(cfg, "metrics", provenance_all),
               "transform": transform.kind, "rows": rows}
    out = Path(cfg["output_dir"]) / "metrics.json"
    _write_json(out, payload)
    print(json.dumps(rows, default=float))
    return EXIT_OK


def cmd_calibrate(args, cfg) -> int:
    cache = _cache(cfg)
    reps, seed = int(cfg["reps"]), int(cfg["seed"])
    level = float(cfg["level"])
    m = int(args.m)
    if args.kind == "cp":
        key = CalibrationKey("c_p", m=m, n=0, level=1.0 - level, reps=reps,
                             seed=substream(seed, "c_p"))
    elif args.kind == "dp":
        if args.n is None:
            raise DomainError("--n is required for kind dp")
        key = CalibrationKey("d_p", m=m, n=int(args.n), level=1.0 - level, reps=reps,
                             seed=substream(seed, "d_p"))
    elif args.kind == "p-of-tau":
        key = CalibrationKey("p_of_tau", m=m, n=0, level=level, reps=reps,
                             seed=substream(seed, "c_p"))
    else:  # tau: analytic, needs c_p first
        cp_key = CalibrationKey("c_p", m=m, n=0, level=1.0 - level, reps=reps,
                                seed=substream(seed, "c_p"))
        cp_res = cache.get_or_compute(cp_key, force=bool(cfg["force_recalibrate"]))
        from .calibration import tau_of_p
        value = tau_of_p(m, 1.0 - level, cp_res.value)
        payload = {"metadata": _metadata(cfg, "calibrate.tau", [_provenance(cp_res)]),
                   "kind": "tau", "m": m, "region_level": level, "value": value}
        _write_json(Path(cfg["output_dir"]) / "calibration.json", payload)
        print(json.dumps({"tau": value}))
        return EXIT_OK
    res = cache.get_or_compute(key, force=bool(cfg["force_recalibrate"]))
    payload = {"metadata": _metadata(cfg, f"calibrate.{args.kind}", [_provenance(res)]),
               **_provenance(res)}
    _write_json(Path(cfg["output_dir"]) / "calibration.json", payload)
    print(json.dumps({"value": res.value, "mc_std_error": res.mc_std_error,
                      "extra": res.extra}))
    return EXIT_OK


def cmd_coverage(args, cfg) -> int:
    sample = read_sample_csv(args.data)
    scheme = sample.scheme
    level = float(cfg["level"])
    kind = args.kind
    if kind not in _metrics.COVERAGE_KINDS:
        raise DomainError(f"unknown coverage kind {kind!r}")
    # which calibration constant the coverage event needs, if any
    needs = {"c3": "c3", "b3": "b3", "c4p": "b4", "c4pp": "b4",
             "b4": "b4", "b4p": "b4", "b4pp": "b4"}
    constants: dict = {}
    provenance: list[dict] = []
    if kind in needs:
        constants, provenance = _resolve_constants(needs[kind], level, scheme, cfg)
        constants.pop("nominal_p", None)
    theta = LocScale(float(args.mu), float(args.sigma))
    report = _metrics.coverage_experiment(
        kind, theta, scheme, level, int(cfg["replicates"]),
        substream(int(cfg["seed"]), "coverage"), **constants)
    payload = {"metadata": _metadata(cfg, f"coverage.{kind}", provenance),
               **dataclasses.asdict(report)}
    _write_json(Path(cfg["output_dir"]) / f"coverage_{kind}.json", payload)
    print(json.dumps({"kind": kind, "coverage": report.coverage,
                      "std_error": report.std_error}))
    return EXIT_OK


def cmd_simulate(args, cfg) -> int:
    n, m = int(args.n), int(args.m)
    if args.removals:
        removals = tuple(int(r) for r in args.removals.split(","))
    else:
        removals = (0,) * (m - 1) + (n - m,)
    scheme = CensoringScheme(n=n, m=m, removals=removals)
    theta = LocScale(float(args.mu), float(args.sigma))
    rng = batch_generator(substream(int(cfg["seed"]), "simulate"), 0)
    sample = simulate_sample(theta, scheme, rng)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    write_sample_csv(sample, outdir / "sample.csv")
    _write_json(outdir / "sample_meta.json", {
        "metadata": _metadata(cfg, "simulate"),
        "theta": {"mu": theta.mu, "sigma": theta.sigma},
        "scheme": {"n": n, "m": m, "removals": list(removals)}})
    print(f"wrote {outdir / 'sample.csv'}")
    return EXIT_OK


def cmd_reproduce(args, cfg) -> int:
    report = reproduce_paper(reps=int(cfg["reps"]), seed=int(cfg["seed"]))
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.md").write_text(report.markdown())
    _write_json(outdir / "report.json", {
        "metadata": _metadata(cfg, "reproduce-paper"),
        "all_passed": report.all_passed,
        "checks": [dataclasses.asdict(r) for r in report.rows],
        "d_grid_audit": report.table3})
    print(f"wrote {outdir / 'report.md'}: {'PASS' if report.all_passed else 'FAIL'}")
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--output-dir", dest="output_dir")
    sub.add_argument("--config")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--reps", type=int)
    sub.add_argument("--level", type=float)
    sub.add_argument("--formats")
    sub.add_argument("--grid-points", dest="grid_points", type=int)
    sub.add_argument("--boundary-points", dest="boundary_points", type=int)
    sub.add_argument("--transform", choices=("identity", "log"))
    sub.add_argument("--replicates", type=int)
    sub.add_argument("--force-recalibrate", dest="force_recalibrate",
                     action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expbands",
        description="Exact confidence regions and cdf confidence bands for the "
                    "two-parameter exponential model under progressive type-II censoring.")
    parser.add_argument("--version", action="version", version=f"expbands {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("fit", help="maximum likelihood and UMVU estimates")
    p.add_argument("--data", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = subs.add_parser("region", help="confidence region with boundary polyline")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=REGION_METHODS)
    _add_common(p)
    p.set_defaults(func=cmd_region)

    p = subs.add_parser("band", help="confidence band for the cdf")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=BAND_METHODS)
    p.add_argument("--reliability", action="store_true",
                   help="transform to a band for the reliability function")
    p.add_argument("--marginal", action="store_true",
                   help="transform to a band for the last-failure marginal cdf")
    _add_common(p)
    p.set_defaults(func=cmd_band)

    p = subs.add_parser("metrics", help="maximum width and area per band")
    p.add_argument("--data", required=True)
    p.add_argument("--methods", help="comma list of bands, or 'all'")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = subs.add_parser("calibrate", help="Monte-Carlo calibration constants")
    p.add_argument("--kind", required=True, choices=("cp", "dp", "tau", "p-of-tau"))
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--n", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_calibrate)

    p = subs.add_parser("coverage", help="empirical coverage experiment")
    p.add_argument("--data", required=True, help="sample CSV supplying the scheme")
    p.add_argument("--kind", required=True)
    p.add_argument("--mu", required=True, type=float)
    p.add_argument("--sigma", required=True, type=float)
    _add_common(p)
    p.set_defaults(func=cmd_coverage)

    p = subs.add_parser("simulate", help="draw a synthetic sample")
    p.add_argument("--mu", required=True, type=float)
    p.add_argument("--sigma", required=True, type=float)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--removals", help="comma list of removal counts (default: type-II right)")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("reproduce-paper", help="rerun the bundled data example "
                                                "and table checks; write a report")
    _add_common(p)
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except ParseError as exc:
        _emit_error("parse", exc)
        return EXIT_PARSE
    except DomainError as exc:
        _emit_error("domain", exc)
        return EXIT_DOMAIN
    except NumericError as exc:
        _emit_error("numeric", exc)
        return EXIT_NUMERIC
    except CalibrationError as exc:
        _emit_error("calibration", exc)
        return EXIT_CALIBRATION
    except ExpBandsError as exc:  # pragma: no cover - safety net
        _emit_error("error", exc)
        return EXIT_DOMAIN


def _emit_error(kind: str, exc: Exception) -> None:
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}),
          file=sys.stderr)


if __name__ == "__main__":
    raise SystemExit(main())
