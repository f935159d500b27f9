"""Command-line front end.

::

    oddborel [--config FILE] [--output PATH] [--precision BITS] [--dump-hex]
             [--jobs N] [command] [key=value ...]

Exit status is 0 when every requested tolerance was met, 2 when results were
written but some tolerance was missed, and 1 on hard errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path

import mpmath as mp
import numpy as np

from . import __version__, _accel
from .borel import (PadeDefectWarning, QuadSpec, distributional_sum, leroy_transform,
                    ordinary_sum, pade_construct)
from .cache import read_cache, serialize, write_cache
from .config import ConfigError, RunConfig, parse_config, validate
from .geometry import (RegionSpec, admissibility_conditions, choose_theta, in_parallelogram_P,
                       nevanlinna_membership, sector_membership)
from .series import OscillatorSpec, rs_expand
from .spectral import TraceOptions, trace_resonance

log = logging.getLogger("oddborel")

EXIT_OK, EXIT_ERROR, EXIT_TOLERANCE = 0, 1, 2
DIGITS = 30


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    """30 significant digits, deterministic."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    with mp.workdps(DIGITS + 10):
        x = mp.mpf(x)
        if mp.isnan(x):
            return "nan"
        return mp.nstr(x, DIGITS, min_fixed=-5, max_fixed=5) if x else "0"


def hexsig(x, prec: int) -> str:
    """Precision-tagged hexadecimal significand ``p<bits>:<sign>0x<man>p<exp>``."""
    if x is None:
        return ""
    with mp.workprec(prec):
        x = mp.mpf(x)
        if not x:
            return f"p{prec}:0x0p0"
        man, exp = x.man_exp
        sign = "-" if man < 0 else ""
        return f"p{prec}:{sign}0x{abs(man):x}p{exp}"


def _header(cfg: RunConfig) -> list[str]:
    return [
        f"# oddborel {__version__} numpy {np.__version__} mpmath {mp.__version__} "
        f"kernels {'numba' if _accel.USE_NUMBA else 'numpy'}",
        f"# config {cfg.echo()}",
    ]


# ---------------------------------------------------------------------------
# shared state per worker process


@lru_cache(maxsize=8)
def _expansion(k, j, S, cache):
    spec = OscillatorSpec(k, j)
    if cache and Path(cache).exists():
        exp = read_cache(cache, spec)
        if exp.order >= S:
            return type(exp)(spec, S, exp.a[:S + 1])
    return rs_expand(spec, S)


@lru_cache(maxsize=8)
def _approximants(k, j, S, M, prec, cache):
    exp = _expansion(k, j, S, cache)
    series = leroy_transform(exp)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PadeDefectWarning)
        p = pade_construct(series, M, prec)
        ref = pade_construct(series, max(p.M - 2, 0), prec) if p.M >= 2 else None
    return p, ref


def _sum_point(cfg: RunConfig, bp):
    """One row of the ``sum`` table: ``(values, status)``."""
    if not bp.abs > 0:
        raise ValueError("beta_abs must be positive")
    p, ref = _approximants(cfg.k, cfg.j, cfg.S, cfg.M, cfg.precision, cfg.cache)
    quad = QuadSpec(nodes=cfg.nodes, prec=cfg.precision)
    spec = OscillatorSpec(cfg.k, cfg.j)
    res = distributional_sum(p, bp.abs, spec.q, quad, reference=ref)
    d = res.diagnostics
    # continuation from Im beta > 0 at negative beta flips the width sign
    g = -res.g if math.isclose(bp.arg, math.pi) else res.g
    return {
        "f": res.f, "g": g, "pade_order": d.pade_order, "quad_error": d.quad_error,
        "poles": ";".join(fmt(pi.t.real if isinstance(pi.t, mp.mpc) else pi.t)
                          for pi in d.poles if pi.on_path),
        "low_confidence": d.low_confidence,
        "ok": bool(d.quad_error <= cfg.quad_tol and not d.low_confidence),
    }


def _ordinary_point(cfg: RunConfig, bp):
    p, _ = _approximants(cfg.k, cfg.j, cfg.S, cfg.M, cfg.precision, cfg.cache)
    quad = QuadSpec(nodes=cfg.nodes, prec=cfg.precision)
    res = ordinary_sum(p, bp.value, OscillatorSpec(cfg.k, cfg.j).q, quad)
    return {"f": mp.re(res.value), "g": mp.im(res.value), "pade_order": p.M,
            "quad_error": res.quad_error, "poles": "", "low_confidence": res.near_pole,
            "ok": bool(res.quad_error <= cfg.quad_tol and not res.near_pole)}


def _oracle_point(cfg: RunConfig, bp):
    spec = OscillatorSpec(cfg.k, cfg.j)
    opts = TraceOptions(N_schedule=tuple(cfg.N), homotopy_steps=cfg.steps, tol=cfg.tol,
                        prec=cfg.precision)
    beta = bp.value
    r = trace_resonance(spec, beta, opts)
    E = r.E_mp if r.E_mp is not None else mp.mpc(r.E)
    return {"beta": beta, "E": E, "N_used": r.N_used, "theta_used": r.theta_used,
            "plateau_spread": r.plateau_spread, "truncation_delta": r.truncation_delta,
            "residual": r.residual, "converged": r.converged, "ok": r.converged}


def _run_point(task):
    kind, cfg, bp = task
    try:
        if kind == "sum":
            return _sum_point(cfg, bp), None
        if kind == "ordinary":
            return _ordinary_point(cfg, bp), None
        if kind == "oracle":
            return _oracle_point(cfg, bp), None
        raise ValueError(kind)  # pragma: no cover
    except Exception as exc:  # reported per grid point
        return None, f"{type(exc).__name__}: {exc}"


def _map(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields results in submission order
        return list(pool.map(_run_point, tasks))


def _real_direction(bp) -> bool:
    return bp.arg == 0 or math.isclose(bp.arg, math.pi)


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(cfg: RunConfig, out):
    exp = rs_expand(OscillatorSpec(cfg.k, cfg.j), cfg.S)
    target = cfg.cache or cfg.output
    if target:
        write_cache(exp, target)
        if cfg.output and cfg.output != target:
            Path(cfg.output).write_text(serialize(exp), encoding="ascii")
    else:
        out.write(serialize(exp))
    return EXIT_OK


def cmd_sum(cfg: RunConfig, out):
    results = _map([("sum", cfg, bp) for bp in cfg.beta], cfg.jobs)
    w = csv.writer(out, lineterminator="\n")
    cols = ["beta_abs", "f", "g", "pade_order", "quad_error", "poles", "low_confidence", "status"]
    if cfg.dump_hex:
        cols += ["f_hex", "g_hex"]
    w.writerow(cols)
    status = EXIT_OK
    for bp, (row, err) in zip(cfg.beta, results):
        if err:
            status = EXIT_ERROR
            w.writerow([fmt(bp.abs), "nan", "nan", "", "", "", "", f"error: {err}"]
                       + (["", ""] if cfg.dump_hex else []))
            continue
        if not row["ok"] and status == EXIT_OK:
            status = EXIT_TOLERANCE
        vals = [fmt(bp.abs), fmt(row["f"]), fmt(row["g"]), fmt(row["pade_order"]),
                fmt(row["quad_error"]), row["poles"], fmt(row["low_confidence"]),
                "ok" if row["ok"] else "tolerance"]
        if cfg.dump_hex:
            vals += [hexsig(row["f"], cfg.precision), hexsig(row["g"], cfg.precision)]
        w.writerow(vals)
    return status


def cmd_oracle(cfg: RunConfig, out):
    results = _map([("oracle", cfg, bp) for bp in cfg.beta], cfg.jobs)
    w = csv.writer(out, lineterminator="\n")
    cols = ["re_beta", "im_beta", "re_E", "im_E", "N_used", "theta_used", "plateau_spread",
            "truncation_delta", "residual", "status"]
    if cfg.dump_hex:
        cols += ["re_E_hex", "im_E_hex"]
    w.writerow(cols)
    status = EXIT_OK
    for bp, (row, err) in zip(cfg.beta, results):
        b = bp.value
        if err:
            status = EXIT_ERROR
            w.writerow([fmt(b.real), fmt(b.imag)] + ["nan"] * 2 + [""] * 5 + [f"error: {err}"]
                       + (["", ""] if cfg.dump_hex else []))
            continue
        if not row["ok"] and status == EXIT_OK:
            status = EXIT_TOLERANCE
        E = row["E"]
        vals = [fmt(b.real), fmt(b.imag), fmt(mp.re(E)), fmt(mp.im(E)), fmt(row["N_used"]),
                fmt(row["theta_used"]), fmt(row["plateau_spread"]),
                fmt(row["truncation_delta"]), fmt(row["residual"]),
                "ok" if row["ok"] else "tolerance"]
        if cfg.dump_hex:
            vals += [hexsig(mp.re(E), cfg.precision), hexsig(mp.im(E), cfg.precision)]
        w.writerow(vals)
    return status


def cmd_compare(cfg: RunConfig, out):
    tasks = [("sum" if _real_direction(bp) else "ordinary", cfg, bp) for bp in cfg.beta]
    sums = _map(tasks, cfg.jobs)
    oracles = _map([("oracle", cfg, bp) for bp in cfg.beta], cfg.jobs)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["beta_abs", "arg_beta", "f", "g", "re_E", "im_E", "abs_f_minus_reE",
                "abs_absg_minus_absimE", "status"])
    status = EXIT_OK
    df_max, dg_max = mp.mpf(0), mp.mpf(0)
    for bp, (s, es), (o, eo) in zip(cfg.beta, sums, oracles):
        if es or eo:
            status = EXIT_ERROR
            w.writerow([fmt(bp.abs), fmt(bp.arg), "nan", "nan", "nan", "nan", "", "",
                        f"error: {es or eo}"])
            continue
        E = o["E"]
        df = abs(s["f"] - mp.re(E))
        dg = abs(abs(s["g"]) - abs(mp.im(E)))
        df_max, dg_max = max(df_max, df), max(dg_max, dg)
        ok = df <= cfg.f_tol and dg <= cfg.g_tol and o["ok"]
        if not ok and status == EXIT_OK:
            status = EXIT_TOLERANCE
        w.writerow([fmt(bp.abs), fmt(bp.arg), fmt(s["f"]), fmt(s["g"]), fmt(mp.re(E)),
                    fmt(mp.im(E)), fmt(df), fmt(dg), "ok" if ok else "tolerance"])
    out.write(f"# summary max_abs_f_minus_reE={fmt(df_max)} "
              f"max_abs_absg_minus_absimE={fmt(dg_max)} f_tol={fmt(cfg.f_tol)} "
              f"g_tol={fmt(cfg.g_tol)}\n")
    return status


def cmd_regions(cfg: RunConfig, out):
    region = RegionSpec(cfg.k, cfg.delta, cfg.R, cfg.B_delta)
    q = OscillatorSpec(cfg.k).q
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["arg_beta", "theta", "in_P", "cond_2k_plus_3", "cond_2k_minus_1", "in_sector",
                "nevanlinna_upper", "nevanlinna_lower", "theta_star", "theta_flagged"])
    args = np.linspace(*cfg.args[:2], cfg.args[2])
    thetas = np.linspace(*cfg.thetas[:2], cfg.thetas[2])
    for s in args:
        s = float(s)
        beta = cfg.radius * complex(math.cos(s), math.sin(s))
        sec = sector_membership(beta, region, arg_beta=s)
        up = nevanlinna_membership(beta, q, cfg.R, "upper", arg_beta=s)
        lo = nevanlinna_membership(beta, q, cfg.R, "lower", arg_beta=s)
        choice = choose_theta(s, cfg.k)
        for t in thetas:
            t = float(t)
            c1, c2 = admissibility_conditions(s, t, cfg.k)
            w.writerow([fmt(s), fmt(t), fmt(in_parallelogram_P(s, t, cfg.k)), fmt(c1), fmt(c2),
                        fmt(sec), fmt(up), fmt(lo), fmt(choice.theta), fmt(choice.flagged)])
    return EXIT_OK


COMMANDS = {"coeffs": cmd_coeffs, "sum": cmd_sum, "oracle": cmd_oracle,
            "compare": cmd_compare, "regions": cmd_regions}


def run_pipeline(cfg: RunConfig, out=None) -> int:
    """Execute ``cfg`` writing CSV to ``out`` (or ``cfg.output``); returns the exit code."""
    validate(cfg)
    if cfg.command == "coeffs":
        return cmd_coeffs(cfg, out or sys.stdout)
    buf = io.StringIO()
    buf.write("\n".join(_header(cfg)) + "\n")
    status = COMMANDS[cfg.command](cfg, buf)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    elif cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oddborel", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", type=Path, help="file of key=value lines")
    ap.add_argument("--output", help="output path (default: stdout)")
    ap.add_argument("--precision", type=int, help="working precision in bits")
    ap.add_argument("--dump-hex", action="store_true",
                    help="add precision-tagged hexadecimal significand columns")
    ap.add_argument("--jobs", type=int, help="worker processes for grid sweeps")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("settings", nargs="*", help="command name and/or key=value overrides")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_intermixed_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = []
    for tok in ns.settings:
        overrides.append(tok if "=" in tok else f"command={tok}")
    if ns.output:
        overrides.append(f"output={ns.output}")
    if ns.precision:
        overrides.append(f"precision={ns.precision}")
    if ns.dump_hex:
        overrides.append("dump_hex=1")
    if ns.jobs:
        overrides.append(f"jobs={ns.jobs}")
    try:
        text = ns.config.read_text() if ns.config else ""
        cfg = parse_config(text, overrides)
    except (OSError, ConfigError) as exc:
        print(f"oddborel: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return run_pipeline(cfg)
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"oddborel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
