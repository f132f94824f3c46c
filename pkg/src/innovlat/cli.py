"""Command-line front end.

Every subcommand resolves its configuration from an INI-style config file
(sections [model], [lattice], [run]) overridden by flags, echoes the
resolved configuration into every artifact it writes, and derives all
randomness from the mandatory seed, so identical invocations produce
byte-identical outputs (including --threads 1 vs N).

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 coupling
invariant violations (``couple``).  Errors are emitted as one JSON line on
stderr.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, rng
from .lattice import build_lattice
from .dynamics import (Params, exact_transient, product_measure_config,
                       single_site_config)
from .harris import dump_stream, evolve_harris, generate_events
from .gillespie import evolve_gillespie
from .coupling import check_alpha_ordering, check_projection
from .observables import (ADOPTION, AWARENESS, BassParams, bass_trajectory,
                          estimate_survival, raster_to_csv, raster_to_pgm,
                          sample_states, spacetime_raster, state_counts)
from .renormalization import (ExtinctionBlockSpec, SurvivalBlockSpec,
                              field_to_csv, oriented_reachability,
                              sample_block_field,
                              survival_field_from_realization)
from .estimation import estimate_critical, sweep, sweep_to_csv, sweep_to_jsonl

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_CHECK_FAILED = 4


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


_MODEL_KEYS = {"lambda": float, "alpha": float, "gamma": float, "forget": float}
_LATTICE_KEYS = {"dimension": int, "sides": str, "boundary": str}
_RUN_KEYS = {"seed": int, "horizon": float, "init": str, "mode": str,
             "replicates": int, "threads": int, "sampler": str}

_DEFAULTS = {
    "lambda": 1.0, "alpha": 1.0, "gamma": 0.0, "forget": 1.0,
    "dimension": 1, "sides": "100", "boundary": "torus",
    "seed": None, "horizon": 10.0, "init": "single-adopter",
    "mode": AWARENESS, "replicates": 100, "threads": 1,
    "sampler": "gillespie",
}


def _load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for section, keys in (("model", _MODEL_KEYS), ("lattice", _LATTICE_KEYS),
                          ("run", _RUN_KEYS)):
        if not parser.has_section(section):
            continue
        for key, value in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                out[key] = keys[key](value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value}") from exc
    return out


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_load_config_file(args.config))
    for key in cfg:
        flag = key.replace("-", "_")
        if flag == "lambda":
            flag = "lam"
        v = getattr(args, flag, None)
        if v is not None:
            cfg[key] = v
    if cfg["seed"] is None:
        raise ConfigError("a seed is required (flag --seed or [run] seed)")
    cfg["seed"] = int(cfg["seed"])
    return cfg


def _lattice_from(cfg: dict):
    sides = [int(s) for s in str(cfg["sides"]).split(",")]
    return build_lattice(int(cfg["dimension"]), sides, cfg["boundary"])


def _params_from(cfg: dict) -> Params:
    return Params(lam=cfg["lambda"], alpha=cfg["alpha"],
                  gamma=cfg["gamma"], forget=cfg["forget"])


def _initial_from(cfg: dict, spec) -> np.ndarray:
    text = str(cfg["init"])
    if text == "single-adopter":
        return single_site_config(spec, 2)
    if text == "single-aware":
        return single_site_config(spec, 1)
    if text == "all-ignorant":
        return np.zeros(spec.site_count, dtype=np.int8)
    if text.startswith("product:"):
        probs = [float(p) for p in text[len("product:"):].split(",")]
        return product_measure_config(spec, probs, int(cfg["seed"]))
    if text.startswith("explicit:"):
        states = [int(s) for s in text[len("explicit:"):].split(",")]
        if len(states) != spec.site_count:
            raise ConfigError("explicit initial state length != site count")
        return np.array(states, dtype=np.int8)
    raise ConfigError(f"unknown initial condition {text!r}")


def _echo_cfg(cfg: dict) -> dict:
    # thread count steers execution only; outputs are identical across it,
    # so it is excluded from the reproducibility echo
    return {k: v for k, v in cfg.items() if k != "threads"}


def _config_json(cfg: dict, extra: dict | None = None) -> str:
    d = _echo_cfg(cfg)
    if extra:
        d.update(extra)
    return json.dumps(d, sort_keys=True)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="INI config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--forget", type=float)
    p.add_argument("--dimension", type=int)
    p.add_argument("--sides", help="comma-separated side lengths")
    p.add_argument("--boundary", choices=["torus", "free"])
    p.add_argument("--horizon", type=float)
    p.add_argument("--init")
    p.add_argument("--replicates", type=int)
    p.add_argument("--sampler", choices=["gillespie", "harris"])


def build_parser() -> _Parser:
    parser = _Parser(prog="innovlat",
                     description="innovation diffusion lattice toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="one trajectory plus raster export")
    _add_common(p)
    p.add_argument("--raster-step", type=float, default=1.0)
    p.add_argument("--dump-events", action="store_true")

    p = sub.add_parser("sweep", help="survival estimates over a rate grid")
    _add_common(p)
    p.add_argument("--mode", choices=[AWARENESS, ADOPTION])
    p.add_argument("--lambdas", required=True)
    p.add_argument("--alphas", required=True)
    p.add_argument("--gammas", default="0")

    p = sub.add_parser("critical", help="bisection for a critical rate")
    _add_common(p)
    p.add_argument("--mode", choices=[AWARENESS, ADOPTION])
    p.add_argument("--axis", choices=["lambda", "alpha"], required=True)
    p.add_argument("--bracket", required=True, help="LOW,HIGH")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--tolerance", type=float, default=0.05)

    p = sub.add_parser("couple", help="coupling invariant checks")
    _add_common(p)
    p.add_argument("--mode", dest="couple_mode", choices=["contact", "alpha"],
                   default="contact")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--alpha-low", type=float, default=0.5)
    p.add_argument("--alpha-high", type=float, default=4.0)

    p = sub.add_parser("blocks", help="block-field sampling and reachability")
    _add_common(p)
    p.add_argument("--block-type", choices=["extinction", "survival"],
                   required=True)
    p.add_argument("--block-l", type=int, required=True)
    p.add_argument("--block-t", type=float, required=True)
    p.add_argument("--window", default="1x1", help="WIDTHxHEIGHT")
    p.add_argument("--replicates-per-site", type=int, default=1)
    p.add_argument("--correlated", action="store_true",
                   help="classify overlapping blocks on one realization "
                        "(survival blocks only)")

    p = sub.add_parser("oracle", help="exact transient distribution")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("bass", help="mean-field adoption curve")
    _add_common(p)
    p.add_argument("--bass-p", type=float, required=True)
    p.add_argument("--bass-q", type=float, required=True)
    p.add_argument("--bass-n", type=float, required=True)
    p.add_argument("--a0", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--t-step", type=float, default=0.5)
    return parser


def _cmd_simulate(args, out: Path) -> int:
    cfg = _resolve(args)
    cfg.update({"subcommand": "simulate", "raster_step": args.raster_step})
    spec = _lattice_from(cfg)
    params = _params_from(cfg)
    initial = _initial_from(cfg, spec)
    seed = cfg["seed"]
    if cfg["sampler"] == "harris":
        stream = generate_events(spec, params, cfg["horizon"], seed)
        traj = evolve_harris(initial, stream)
        if args.dump_events:
            dump_stream(stream, out / "events.txt")
    else:
        traj = evolve_gillespie(spec, params, initial, cfg["horizon"], seed)
    header = _config_json(cfg)
    step = args.raster_step
    if spec.dimension == 1:
        grid = spacetime_raster(traj, spec, step)
        _write_commented_csv(out / "raster.csv", header,
                             lambda fh: _raster_rows(fh, grid, step))
        _write_pgm(out / "raster.pgm", header, grid)
    else:
        n_cols = int(math.floor(traj.horizon / step)) + 1
        times = np.minimum(np.arange(n_cols) * step, traj.horizon)
        frames = sample_states(traj, times)
        with open(out / "frames.csv", "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# {header}\n")
            fh.write("t," + ",".join(f"s{i}" for i in range(spec.site_count))
                     + "\n")
            for t, row in zip(times, frames):
                fh.write(f"{float(t)!r}," +
                         ",".join(str(int(v)) for v in row) + "\n")
    n0, n1, n2 = state_counts(traj, traj.horizon)
    _write_json(out / "summary.json", {
        "config": _echo_cfg(cfg), "changes": len(traj),
        "final_counts": {"ignorant": n0, "aware": n1, "adopter": n2}})
    return EXIT_OK


def _raster_rows(fh, grid, step):
    cols = ",".join(f"t{j * step!r}" for j in range(grid.shape[1]))
    fh.write(f"site,{cols}\n")
    for i in range(grid.shape[0]):
        fh.write(str(i) + "," + ",".join(str(int(v)) for v in grid[i]) + "\n")


def _write_commented_csv(path, header, body_writer) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# {header}\n")
        body_writer(fh)


def _write_pgm(path, header, grid) -> None:
    from .observables import PGM_LEVELS
    h, w = grid.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("P2\n")
        fh.write(f"# {header}\n")
        fh.write(f"{w} {h}\n255\n")
        for i in range(h):
            fh.write(" ".join(str(PGM_LEVELS[int(v)]) for v in grid[i]) + "\n")


def _cmd_sweep(args, out: Path) -> int:
    cfg = _resolve(args)
    if args.mode:
        cfg["mode"] = args.mode
    lambdas = [float(v) for v in args.lambdas.split(",")]
    alphas = [float(v) for v in args.alphas.split(",")]
    gammas = [float(v) for v in args.gammas.split(",")]
    cfg.update({"subcommand": "sweep", "lambdas": lambdas, "alphas": alphas,
                "gammas": gammas})
    spec = _lattice_from(cfg)
    initial = _initial_from(cfg, spec)
    rows = sweep(lambdas, alphas, gammas, spec, initial, cfg["horizon"],
                 cfg["mode"], cfg["replicates"], cfg["seed"],
                 forget=cfg["forget"], sampler=cfg["sampler"],
                 threads=cfg["threads"])
    sweep_to_csv(rows, out / "sweep.csv", header_comment=_config_json(cfg))
    sweep_to_jsonl(rows, out / "sweep.jsonl",
                   meta={"seed": cfg["seed"], "config": _echo_cfg(cfg)})
    return EXIT_OK


def _cmd_critical(args, out: Path) -> int:
    cfg = _resolve(args)
    if args.mode:
        cfg["mode"] = args.mode
    else:
        cfg["mode"] = AWARENESS if args.axis == "lambda" else ADOPTION
    try:
        lo, hi = (float(v) for v in args.bracket.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad bracket {args.bracket!r}") from exc
    cfg.update({"subcommand": "critical", "axis": args.axis,
                "bracket": [lo, hi], "threshold": args.threshold,
                "tolerance": args.tolerance})
    spec = _lattice_from(cfg)
    initial = _initial_from(cfg, spec)
    est = estimate_critical(args.axis, _params_from(cfg), (lo, hi),
                            args.threshold, args.tolerance, spec, initial,
                            cfg["horizon"], cfg["replicates"], cfg["seed"],
                            mode=cfg["mode"], sampler=cfg["sampler"],
                            threads=cfg["threads"])
    _write_json(out / "critical.json",
                est.to_json_dict({"config": _echo_cfg(cfg)}))
    return EXIT_OK


def _cmd_couple(args, out: Path) -> int:
    cfg = _resolve(args)
    cfg.update({"subcommand": "couple", "coupling": args.couple_mode,
                "seeds": args.seeds, "alpha_low": args.alpha_low,
                "alpha_high": args.alpha_high})
    spec = _lattice_from(cfg)
    params = _params_from(cfg)
    initial = _initial_from(cfg, spec)
    violations = 0
    for i in range(args.seeds):
        run_seed = rng.derive_seed(cfg["seed"], rng.KIND_REPLICATE, i)
        if args.couple_mode == "contact":
            stream = generate_events(spec, params, cfg["horizon"], run_seed)
            violations += check_projection(initial, stream)
        else:
            violations += check_alpha_ordering(
                spec, cfg["lambda"], args.alpha_low, args.alpha_high,
                initial, cfg["horizon"], run_seed, forget=cfg["forget"])
    _write_json(out / "couple.json",
                {"config": _echo_cfg(cfg), "violations": violations})
    print(f"violations: {violations}")
    return EXIT_OK if violations == 0 else EXIT_CHECK_FAILED


def _cmd_blocks(args, out: Path) -> int:
    cfg = _resolve(args)
    try:
        w, h = (int(v) for v in args.window.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad window {args.window!r}") from exc
    cfg.update({"subcommand": "blocks", "block_type": args.block_type,
                "block_l": args.block_l, "block_t": args.block_t,
                "window": [w, h],
                "replicates_per_site": args.replicates_per_site,
                "correlated": bool(args.correlated)})
    params = _params_from(cfg)
    if args.block_type == "extinction":
        bspec = ExtinctionBlockSpec(L=args.block_l, T=args.block_t,
                                    dimension=cfg["dimension"])
    else:
        bspec = SurvivalBlockSpec(L=args.block_l, T=args.block_t)
    if args.correlated:
        if args.block_type != "survival":
            raise ConfigError("correlated mode exists for survival blocks only")
        field = survival_field_from_realization(params, bspec, (w, h),
                                                cfg["seed"])
        n_open = int(field.open.sum())
        n_sites = sum(1 for _ in field.sites())
        from .observables import SurvivalEstimate
        est = SurvivalEstimate.from_counts(n_open, max(n_sites, 1))
    else:
        field, est = sample_block_field(params, bspec, (w, h),
                                        args.replicates_per_site, cfg["seed"])
    max_row, top = oriented_reachability(field)
    _write_commented_csv(out / "blocks.csv", _config_json(cfg),
                         lambda fh: _field_rows(fh, field))
    _write_json(out / "blocks.json", {
        "config": _echo_cfg(cfg), "open_fraction": est.estimate,
        "ci": [est.ci_low, est.ci_high], "successes": est.successes,
        "trials": est.replicates, "max_row_reached": max_row,
        "top_row_reached": top})
    return EXIT_OK


def _field_rows(fh, field) -> None:
    fh.write("x,n,open\n")
    for (x, n) in field.sites():
        fh.write(f"{x},{n},{int(field.is_open(x, n))}\n")


def _cmd_oracle(args, out: Path) -> int:
    cfg = _resolve(args)
    cfg.update({"subcommand": "oracle", "t": args.t})
    spec = _lattice_from(cfg)
    params = _params_from(cfg)
    initial = _initial_from(cfg, spec)
    dist = exact_transient(spec, params, initial, args.t)

    def body(fh):
        fh.write("state_index," +
                 ",".join(f"s{i}" for i in range(spec.site_count)) +
                 ",probability\n")
        from .dynamics import decode_config
        for idx, p in enumerate(dist.weights):
            digits = ",".join(str(int(v))
                              for v in decode_config(idx, spec.site_count))
            fh.write(f"{idx},{digits},{float(p)!r}\n")

    _write_commented_csv(out / "oracle.csv", _config_json(cfg), body)
    _write_json(out / "oracle.json", {
        "config": _echo_cfg(cfg), "states": int(len(dist.weights)),
        "mass": float(dist.weights.sum())})
    return EXIT_OK


def _cmd_bass(args, out: Path) -> int:
    cfg = _resolve(args)
    cfg.update({"subcommand": "bass", "p": args.bass_p, "q": args.bass_q,
                "n": args.bass_n, "a0": args.a0, "t_max": args.t_max,
                "t_step": args.t_step})
    bp = BassParams(p=args.bass_p, q=args.bass_q, n=args.bass_n)
    n_pts = int(math.floor(args.t_max / args.t_step)) + 1
    grid = np.arange(n_pts) * args.t_step
    values = bass_trajectory(bp, grid, args.a0)

    def body(fh):
        fh.write("t,adopters\n")
        for t, a in zip(grid, values):
            fh.write(f"{float(t)!r},{float(a)!r}\n")

    _write_commented_csv(out / "bass.csv", _config_json(cfg), body)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "critical": _cmd_critical,
    "couple": _cmd_couple,
    "blocks": _cmd_blocks,
    "oracle": _cmd_oracle,
    "bass": _cmd_bass,
}


def _fail(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": message, "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.subcommand](args, out)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except (ValueError, OSError) as exc:
        return _fail(EXIT_RUNTIME, str(exc))


if __name__ == "__main__":
    sys.exit(main())
