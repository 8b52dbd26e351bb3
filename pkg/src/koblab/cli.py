"""Command-line front end.

    koblab bound --domain ball --point 0 --direction e1
    koblab sweep --preset omega-m2 --out results/
    koblab sweep --domain my.dom --point 0.9,0 --direction normal --deltas 1e-2:1e-5:8
    koblab probe --domain saddle --seed 1
    koblab map-regularity --map identity --domain ball

``--domain`` takes a YAML domain file or a built-in name, ``--map`` a YAML map
file, ``identity`` or ``ball-aut:<a>``.  Reports go to
``<out>/<domain>_<experiment>_<tag>.{json,csv,dat}``; the tag defaults to a
UTC timestamp.

Exit status: 0 certified, 2 partial (one side missing, fewer than four
certified sweep samples, or a slope outside its window), 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import (
    FIT_MIN_SAMPLES,
    default_deltas,
    map_regularity,
    normal_ray_sweep,
    pseudoconvexity_probe,
)
from .bounds import (
    compute_bounds,
    disc_upper_bound_weighted_model,
    envelope_fit,
    model_envelope,
    tangential_weighted_lower_bound,
)
from .maps import HoloMapSpec, ball_automorphism
from .optimize import disc_upper_bound_optimize
from .presets import BUILTIN_DOMAINS, PRESETS, builtin_domain, check_windows, get_preset
from .specfile import SpecError, load_domain, load_map, parse_complex_vector

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    domain: Optional[str] = None
    target: Optional[str] = None
    map: Optional[str] = None
    preset: Optional[str] = None
    point: Optional[str] = None
    direction: Optional[str] = None
    deltas: Optional[str] = None
    windows: dict = field(default_factory=dict)
    k: float = 0.9
    K: Optional[float] = None
    m: Optional[float] = None
    degree: int = 3
    effort: int = 1
    budget: int = 200
    count: int = 100
    seed: int = 0
    threads: int = 1
    out: str = "."
    tag: Optional[str] = None

    def __post_init__(self):
        env = os.environ.get("KOBLAB_THREADS")
        if env:
            try:
                self.threads = int(env)
            except ValueError:
                raise UsageError(f"KOBLAB_THREADS must be an integer, got {env!r}") from None
        if self.threads < 1:
            raise UsageError("parallelism must be >= 1")


# -- argument parsing -----------------------------------------------------------


def resolve_domain(text: str):
    """A domain file path, or the name of a built-in domain."""
    path = Path(text)
    if path.exists():
        return load_domain(path)
    if text in BUILTIN_DOMAINS:
        return builtin_domain(text)
    raise UsageError(f"no domain file or built-in domain named {text!r} "
                     f"(built-ins: {', '.join(sorted(BUILTIN_DOMAINS))})")


def resolve_map(text: str, dim: int) -> HoloMapSpec:
    path = Path(text)
    if path.exists():
        return load_map(path)
    if text == "identity":
        return HoloMapSpec.identity(dim)
    m = re.fullmatch(r"ball-aut:([0-9.eE+-]+)", text)
    if m:
        return ball_automorphism(float(m.group(1)), dim)
    raise UsageError(f"no map file or built-in map named {text!r} (built-ins: identity, ball-aut:<a>)")


def parse_vector(text: str, dim: int) -> np.ndarray:
    """``0`` (origin), ``eK`` (K-th unit vector) or a comma list of complex entries."""
    text = text.strip()
    if text == "0":
        return np.zeros(dim, dtype=complex)
    m = re.fullmatch(r"e(\d+)", text)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= dim:
            raise UsageError(f"unit vector index {k} out of range 1..{dim}")
        v = np.zeros(dim, dtype=complex)
        v[k - 1] = 1.0
        return v
    try:
        return parse_complex_vector(text, dim)
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from None


def parse_deltas(text: Optional[str], default_start: float) -> np.ndarray:
    """``start:stop:count`` (geometric) or a comma list; strictly decreasing."""
    if text is None:
        return default_deltas(default_start)
    try:
        if ":" in text:
            a, b, c = text.split(":")
            deltas = np.geomspace(float(a), float(b), int(c))
        else:
            deltas = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"bad delta grid {text!r}") from None
    if deltas.size == 0 or np.any(deltas <= 0) or np.any(np.diff(deltas) >= 0):
        raise UsageError("delta grid must be positive and strictly decreasing")
    return deltas


def parse_window(text: str):
    try:
        side, lo, hi = text.split(":")
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise UsageError(f"bad window {text!r}; use side:lo:hi") from None
    if side not in ("lower", "upper") or not lo <= hi:
        raise UsageError(f"bad window {text!r}; side is lower or upper and lo <= hi")
    return side, (lo, hi)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="koblab", description="Certified Kobayashi metric bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1, help="worker pool width (KOBLAB_THREADS overrides)")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--tag", help="file-name suffix instead of the timestamp")

    b = sub.add_parser("bound", help="lower and upper bound at one (z, X)")
    b.add_argument("--domain", required=True)
    b.add_argument("--point", required=True)
    b.add_argument("--direction", required=True)
    b.add_argument("--k", type=float, default=0.9, help="cone aperture for the envelope bounds")
    b.add_argument("--degree", type=int, default=3)
    b.add_argument("--effort", type=int, default=1)
    common(b)

    s = sub.add_parser("sweep", help="bounds along the inner normal and blow-up exponent fits")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--domain")
    s.add_argument("--point", help="boundary base point, or an interior seed that is projected")
    s.add_argument("--direction", default="normal", help="'normal' or a vector")
    s.add_argument("--deltas", help="start:stop:count or a comma list")
    s.add_argument("--window", action="append", default=[], help="slope window side:lo:hi")
    s.add_argument("--k", type=float, default=0.9)
    s.add_argument("--m", type=float, help="model order: weighted tangential lower bound and explicit "
                   "disc family (base point at the origin, inner normal -Re z_n)")
    s.add_argument("--K", type=float, help="K-cone constant for --m (default |X| / |X_n|)")
    s.add_argument("--degree", type=int, default=3)
    s.add_argument("--effort", type=int, default=1)
    common(s)

    pr = sub.add_parser("probe", help="pseudoconvexity probe with witness discs")
    pr.add_argument("--domain", required=True)
    pr.add_argument("--budget", type=int, default=200)
    pr.add_argument("--deltas")
    common(pr)

    mr = sub.add_parser("map-regularity", help="normal preservation and Hoelder exponents of a map")
    mr.add_argument("--map", required=True)
    mr.add_argument("--domain", required=True, help="source domain")
    mr.add_argument("--target", help="target domain (default: the source)")
    mr.add_argument("--count", type=int, default=100)
    common(mr)
    return p


def config_from_args(args) -> ExperimentConfig:
    kw = {k: v for k, v in vars(args).items() if k in ExperimentConfig.__dataclass_fields__}
    windows = dict(parse_window(w) for w in getattr(args, "window", []))
    return ExperimentConfig(**kw, windows=windows)


# -- output ------------------------------------------------------------------------


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist() if not np.iscomplexobj(obj) else [[c.real, c.imag] for c in obj.ravel()]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def _finite(obj):
    """JSON has no inf/nan; write them as strings."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps(record) -> str:
    data = json.loads(json.dumps(record, default=_json_default))
    return json.dumps(_finite(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]+", "-", name).strip("-") or "domain"


def report_stem(cfg: ExperimentConfig, domain_name: str, experiment: str) -> Path:
    tag = cfg.tag or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{_safe(domain_name)}_{_safe(experiment)}_{_safe(tag)}"


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    return path


def _num(v):
    return "none" if v is None else repr(float(v))


def gnuplot_table(report) -> str:
    lines = ["# delta lower upper  (NaN = not certified)"]
    for s in report.samples:
        lo = s.lower if s.lower_ok else float("nan")
        up = s.upper if s.upper_ok else float("nan")
        lines.append(f"{float(s.delta)!r} {float(lo)!r} {float(up)!r}")
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------------


def run_bound(cfg: ExperimentConfig, log=print) -> int:
    dom = resolve_domain(cfg.domain)
    z = parse_vector(cfg.point, dom.dim)
    X = parse_vector(cfg.direction, dom.dim)
    if not dom.contains(z):
        raise UsageError("point not interior")
    res = compute_bounds(dom, z, X, k=cfg.k, degree=cfg.degree, effort=cfg.effort, seed=cfg.seed,
                         optimize=False)
    try:
        up, disc, info = disc_upper_bound_optimize(dom, z, X, degree=cfg.degree, effort=cfg.effort,
                                                   seed=cfg.seed)
        res.upper, res.witness, res.upper_margin = up, disc, info.get("margin")
    except RuntimeError as exc:
        res.notes.append(f"upper: {exc}")
    rec = res.to_record()
    rec["status"] = res.status
    path = _write(report_stem(cfg, dom.name, "bound").with_suffix(".json"), dumps(rec))
    log(f"lower {_num(res.lower)}  upper {_num(res.upper)}  [{res.status}]  -> {path}")
    if res.lower is not None and res.upper is not None and res.lower > res.upper * (1 + 1e-12):
        raise RuntimeError(f"lower bound {res.lower!r} exceeds upper bound {res.upper!r}")
    return EXIT_OK if res.status == "certified" else EXIT_PARTIAL


def _sweep_status(report, windows, sides):
    status = check_windows(report, windows)
    problems = []
    for side in sides:
        n = report.fits.get(side, {}).get("samples", 0)
        if n < FIT_MIN_SAMPLES:
            problems.append(f"{side}: {n} certified samples (< {FIT_MIN_SAMPLES})")
        elif side not in windows and report.fits[side].get("slope") is None:
            problems.append(f"{side}: no fit (r^2 below threshold)")
    problems += [f"{side}: slope {v}" for side, v in status.items() if v != "ok"]
    return status, problems


def _model_sides(dom, p0, direction, cfg):
    if isinstance(direction, str):
        raise UsageError("--m needs an explicit --direction vector")
    if direction[-1] == 0:
        raise UsageError("--m needs a direction with a normal component")
    K = cfg.K if cfg.K is not None else float(np.linalg.norm(direction) / abs(direction[-1]))
    if dom.model is not None and dom.model[0] == "omega" and np.allclose(p0, 0):
        if cfg.m != dom.model[1]:
            raise UsageError(f"--m {cfg.m:g} does not match the model order {dom.model[1]:g}")
        # the B terms are nonnegative, so the envelope has no mixed term
        env = model_envelope(dom.model[1], dom.model[2], dom.enclosing_radius, n=dom.dim, A_mixed=0.0)
    else:
        env = envelope_fit(dom, p0, cfg.m, seed=cfg.seed)

    def lower(z, X):
        return tangential_weighted_lower_bound(env, z, X, K, k=cfg.k)

    def upper(z, X):
        return disc_upper_bound_weighted_model(dom, z, X, cfg.m, k=cfg.k, K=K)[0]

    return lower, upper


def run_sweep(cfg: ExperimentConfig, log=print) -> int:
    if cfg.preset:
        preset = get_preset(cfg.preset)
        deltas = None if cfg.deltas is None else parse_deltas(cfg.deltas, 1e-2)
        report = preset.execute(workers=cfg.threads, seed=cfg.seed, deltas=deltas)
        windows = {**preset.windows, **cfg.windows}
        sides = list(windows)
        experiment = preset.name
    else:
        if not cfg.domain or not cfg.point:
            raise UsageError("sweep needs --preset, or --domain with --point")
        dom = resolve_domain(cfg.domain)
        p0 = parse_vector(cfg.point, dom.dim)
        deltas = parse_deltas(cfg.deltas, 1e-2 * dom.tubular_radius)
        direction = "normal" if cfg.direction in (None, "normal") else parse_vector(cfg.direction, dom.dim)

        if cfg.m is None:
            def lower(z, X):
                return compute_bounds(dom, z, X, k=cfg.k, seed=cfg.seed, optimize=False).lower

            def upper(z, X):
                return disc_upper_bound_optimize(dom, z, X, degree=cfg.degree, effort=cfg.effort,
                                                 seed=cfg.seed)[0]
        else:
            lower, upper = _model_sides(dom, p0, direction, cfg)

        point = None
        if cfg.m is not None:
            # model coordinates: the inner normal at p0 is -Re z_n
            e_n = np.zeros(dom.dim, dtype=complex)
            e_n[-1] = 1.0
            point = lambda d: p0 - d * e_n
        report = normal_ray_sweep(dom, p0, deltas, direction, lower, upper, workers=cfg.threads,
                                  seed=cfg.seed, point=point)
        windows = cfg.windows
        sides = ["lower", "upper"]
        experiment = "sweep"
    status, problems = _sweep_status(report, windows, sides)
    summary = report.summary()
    summary.update(experiment=experiment, windows={k: list(v) for k, v in windows.items()},
                   window_status=status, problems=problems, seed=cfg.seed)
    stem = report_stem(cfg, report.domain, experiment)
    _write(stem.with_suffix(".csv"), report.to_csv())
    _write(stem.with_suffix(".dat"), gnuplot_table(report))
    _write(stem.with_suffix(".json"), dumps(summary))
    for side in ("lower", "upper"):
        f = report.fits.get(side, {})
        log(f"{side}: slope {f.get('slope')!r}  r2 {f.get('r2')!r}  samples {f.get('samples')}  "
            f"window {status.get(side, '-')}")
    log(f"reports -> {stem}.{{csv,dat,json}}")
    if not report.sandwich_ok:
        raise RuntimeError("sweep sandwich violated: a lower bound exceeds an upper bound")
    for msg in problems:
        log(f"partial: {msg}")
    return EXIT_PARTIAL if problems else EXIT_OK


def run_probe(cfg: ExperimentConfig, log=print) -> int:
    dom = resolve_domain(cfg.domain)
    deltas = None if cfg.deltas is None else parse_deltas(cfg.deltas, 1e-3)
    res = pseudoconvexity_probe(dom, budget=cfg.budget, seed=cfg.seed, deltas=deltas, workers=cfg.threads)
    rec = res.to_record()
    rec.update(domain=dom.name, seed=cfg.seed, budget=cfg.budget)
    path = _write(report_stem(cfg, dom.name, "probe").with_suffix(".json"), dumps(rec))
    log(f"{res.verdict}  (min restricted eigenvalue {res.min_eigenvalue!r})  -> {path}")
    if res.sweep is not None and res.sweep.get("fit"):
        log(f"witness upper slope {res.sweep['fit']['slope']!r}")
    return EXIT_OK if res.min_eigenvalue is not None else EXIT_PARTIAL


def run_map_regularity(cfg: ExperimentConfig, log=print) -> int:
    dom1 = resolve_domain(cfg.domain)
    dom2 = dom1 if cfg.target is None else resolve_domain(cfg.target)
    h = resolve_map(cfg.map, dom1.dim)
    rep = map_regularity(h, dom1, dom2, count=cfg.count, seed=cfg.seed)
    rec = rep.to_record()
    rec.update(map=h.name, source=dom1.name, target=dom2.name, seed=cfg.seed)
    path = _write(report_stem(cfg, dom1.name, f"map-regularity-{h.name}").with_suffix(".json"), dumps(rec))
    log(f"preservation ratio {rep.normal_preservation_sup_ratio!r}  (real {rep.real_preservation_sup_ratio!r})"
        f"  alpha {rep.df_alpha_fit!r}  gamma {rep.holder_exponent_fit!r}  -> {path}")
    vals = (rep.normal_preservation_sup_ratio, rep.df_alpha_fit, rep.holder_exponent_fit)
    return EXIT_OK if all(v is not None and np.isfinite(v) for v in vals) else EXIT_PARTIAL


COMMANDS = {"bound": run_bound, "sweep": run_sweep, "probe": run_probe, "map-regularity": run_map_regularity}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (SpecError, UsageError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


__all__ = ["ExperimentConfig", "build_parser", "main", "parse_deltas", "parse_vector", "resolve_domain",
           "resolve_map", "run_bound", "run_map_regularity", "run_probe", "run_sweep"]
