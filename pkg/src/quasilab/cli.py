"""Command-line front end: ``quasilab {verify,report,lemma-w,derivation}``.

Exit codes: 0 pass, 1 verification failure, 2 usage or config error.
Tables are CSV with 12 significant digits.
"""
import argparse
import csv
from dataclasses import dataclass, field
import io
import math
import sys

import numpy as np

from . import asymptotics as asy
from . import kernels
from .maps import LOG2, identity_profile, kalton_peck_map, ribe_map
from .spaces import check_p
from .verify import DEFAULT_TOL, run_checks

FAMILIES = ("ribe", "kp", "kp-unscaled", "linear", "truncation:ribe", "truncation:kp")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    p: float = 1.0
    n_grid: list = field(default_factory=lambda: [16, 64, 256, 1024])
    budget: int = 2000
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOL))
    output_path: str = None
    family: str = None
    grid_step: float = 1e-3
    lo: float = -2.0
    hi: float = 2.0
    m: int = 4


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def write_csv(header, rows, path=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ------------------------------------------------------------------ config

def read_config_file(path):
    """``key = value`` lines, ``#`` comments."""
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _grid(text):
    try:
        grid = [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad n-grid {text!r}") from exc
    if not grid or min(grid) < 1:
        raise ConfigError(f"bad n-grid {text!r}")
    return grid


def _apply(cfg, key, val):
    try:
        if key == "p":
            cfg.p = check_p(val)
        elif key == "n_grid":
            cfg.n_grid = _grid(val)
        elif key in ("budget", "seed", "m"):
            setattr(cfg, key, int(val))
        elif key in ("grid_step", "lo", "hi"):
            setattr(cfg, key, float(val))
        elif key in ("out", "output_path"):
            cfg.output_path = val
        elif key == "family":
            cfg.family = val
        elif key == "tol" or key.startswith("tol."):
            name = key[4:] if key.startswith("tol.") else "all"
            _set_tol(cfg, name, val)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def _set_tol(cfg, name, val):
    v = float(val)
    if not v >= 0:
        raise ConfigError(f"tolerance must be >= 0, got {val}")
    if name == "all":
        cfg.tolerances = {k: v for k in DEFAULT_TOL}
    elif name in DEFAULT_TOL:
        cfg.tolerances[name] = v
    else:
        raise ConfigError(f"unknown tolerance {name!r} (use abs, rel, exact or all)")


def build_config(args):
    cfg = RunConfig(command=args.command)
    if args.command == "report":
        cfg.family = args.family
    if args.config:
        for key, val in read_config_file(args.config).items():
            _apply(cfg, key, val)
    for key in ("p", "n_grid", "budget", "seed", "out", "grid_step", "lo", "hi", "m"):
        val = getattr(args, key, None)
        if val is not None:
            _apply(cfg, key, val)
    for item in args.tol or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects KEY=VAL, got {item!r}")
        k, v = item.split("=", 1)
        _set_tol(cfg, k.strip(), v.strip())
    if cfg.budget < 1:
        raise ConfigError("budget must be >= 1")
    return cfg


# ---------------------------------------------------------------- commands

def cmd_verify(cfg):
    results = run_checks(seed=cfg.seed, budget=cfg.budget, tol=cfg.tolerances)
    failed = 0
    lines = []
    for chk, ok, detail in results:
        tag = "PASS" if ok else "FAIL"
        failed += not ok
        lines.append(f"{tag} {chk.module}.{chk.name}" + ("" if ok else f": {detail}"))
    lines.append(f"{len(results) - failed}/{len(results)} invariants passed "
                 f"(seed={cfg.seed}, backend={kernels.BACKEND})")
    text = "\n".join(lines) + "\n"
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 1 if failed else 0


def make_family(name, cfg):
    grid, p = cfg.n_grid, cfg.p
    if name == "ribe":
        return asy.ribe_family(grid)
    if name == "kp":
        return asy.kp_family(grid, p)
    if name == "kp-unscaled":
        return asy.kp_unscaled_family(grid, p)
    if name == "linear":
        return asy.linear_family(grid, p)
    if name.startswith("truncation:"):
        base = name.split(":", 1)[1]
        top = max(grid)
        if base == "ribe":
            phi = ribe_map(top)
        elif base == "kp":
            phi = kalton_peck_map(top, identity_profile(), p)
        else:
            raise ConfigError(f"unknown truncation base {base!r}")
        return asy.truncation_family(phi, grid, budget=cfg.budget, seed=cfg.seed)
    raise ConfigError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


def cmd_report(cfg):
    if not cfg.family:
        raise ConfigError("report needs a family")
    try:
        fam = make_family(cfg.family, cfg)
        rep = asy.accessibility_report(fam, budget=cfg.budget, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [(r.n, r.norm_est, r.q_lb, r.q_ub, r.dist_lb, rep.classification, r.notes, rep.seed)
            for r in rep.rows]
    write_csv(["n", "norm_est", "q_lb", "q_ub", "dist_lb", "classification", "notes", "seed"],
              rows, cfg.output_path)
    msg = f"classification: {rep.classification} ({rep.reason})\n"
    (sys.stdout if cfg.output_path else sys.stderr).write(msg)
    return 0


def cmd_lemma_w(cfg):
    if not cfg.grid_step > 0 or cfg.hi < cfg.lo:
        raise ConfigError("need grid_step > 0 and lo <= hi")
    count = int(round((cfg.hi - cfg.lo) / cfg.grid_step)) + 1
    best, s, t, over = kernels.lemma_w_grid(cfg.lo, cfg.grid_step, count)
    err = abs(best - LOG2)
    write_csv(["grid_step", "lo", "hi", "points", "max_ratio", "s_argmax", "t_argmax", "log2",
               "abs_error", "exceed_count", "seed"],
              [(cfg.grid_step, cfg.lo, cfg.hi, count * count, best, s, t, LOG2, err, over,
                cfg.seed)], cfg.output_path)
    sound, attained = over == 0, err <= 1e-3
    msg = (f"lemma-w: max={best:.12g} at ({s:.6g}, {t:.6g}); sound={'yes' if sound else 'no'}; "
           f"|max-log2|={err:.3g} {'<=' if attained else '>'} 1e-3\n")
    (sys.stdout if cfg.output_path else sys.stderr).write(msg)
    return 0 if sound and attained else 1


def cmd_derivation(cfg):
    p = cfg.p
    rng = np.random.default_rng(cfg.seed)
    rows, ok = [], True
    for n in cfg.n_grid:
        if n < 2:
            raise ConfigError("derivation needs n >= 2")
        s2 = np.zeros(n)
        s2[:2] = 1.0
        d = asy.leibniz_defect("homogeneous", s2, s2, n, p)
        variant = 0.0
        for _ in range(cfg.budget):
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            variant = max(variant, asy.leibniz_defect("variant", x, y, n, p).measured)
        decay = asy.idempotent_decay(n, min(cfg.m, n), p)
        ok &= abs(d.measured - d.closed_form) <= 1e-9 * max(d.closed_form, 1e-300)
        rows.append((n, d.measured, d.closed_form, variant, decay, cfg.seed))
    write_csv(["n", "defect_measured", "defect_closed_form", "variant_defect",
               "idempotent_decay", "seed"], rows, cfg.output_path)
    return 0 if ok else 1


COMMANDS = {"verify": cmd_verify, "report": cmd_report, "lemma-w": cmd_lemma_w,
            "derivation": cmd_derivation}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=str, help="exponent p > 0")
    common.add_argument("--n-grid", dest="n_grid", help="comma-separated dimensions")
    common.add_argument("--budget", type=str, help="samples per estimate")
    common.add_argument("--seed", type=str, help="root RNG seed")
    common.add_argument("--config", help="key = value config file (flags override it)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--tol", action="append", metavar="KEY=VAL",
                        help="tolerance override: abs, rel, exact or all")
    parser = argparse.ArgumentParser(prog="quasilab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run every invariant check")
    rep = sub.add_parser("report", parents=[common], help="accessibility report CSV")
    rep.add_argument("family", help=" | ".join(FAMILIES))
    lw = sub.add_parser("lemma-w", parents=[common], help="grid check of the omega defect")
    lw.add_argument("--grid-step", dest="grid_step", type=str)
    lw.add_argument("--lo", type=str)
    lw.add_argument("--hi", type=str)
    dv = sub.add_parser("derivation", parents=[common], help="Leibniz defect table")
    dv.add_argument("--m", type=str, help="idempotent support size")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        sys.stderr.write(f"quasilab: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
