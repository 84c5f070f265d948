"""Command-line front end.

Exit codes: 0 success, 1 property-check failure, 2 bounds only (conditional
lower bound), 3 deficient evaluation map, 64 usage error.

Every report embeds the effective configuration and the library version, and
contains nothing run-dependent, so identical inputs give byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .degeneration import DegenerationPath, max_workers, trivialization_check
from .errors import (
    InvalidConfigurationError,
    InvalidParameterError,
    SeshadriLabError,
    SurjectivityRequiredError,
)
from .interpolation import (
    Deficient,
    basis_split,
    evaluation_surjective,
    h0_linear_system,
    random_configuration,
)
from .kahler import disk_grid, fs_expansion, glue_potentials, packing_report, sine_perturbation
from .picard_lattice import seshadri_constant_general
from .rational import encode

EXIT_OK, EXIT_FAILURE, EXIT_BOUNDS_ONLY, EXIT_DEFICIENT, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _mults(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        out = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad multiplicity list {text!r}")
    if any(m < 0 for m in out):
        raise argparse.ArgumentTypeError("multiplicities must be nonnegative")
    return out


# option name -> (type, default)
OPTIONS: dict[str, tuple[Callable[[str], Any], Any]] = {
    "k": (int, None),
    "d": (int, None),
    "mults": (_mults, None),
    "stage": (int, None),
    "degree_bound": (int, 20),
    "seed": (int, 0),
    "grid": (int, 21),
    "tol": (float, 0.0),
    "n": (int, None),
    "m": (int, 2),
    "amplitude": (float, 1e-4),
    "format": (str, "json"),
    "out": (str, None),
}

COMMAND_OPTIONS = {
    "seshadri": ("k", "degree_bound"),
    "interpolate": ("d", "mults", "k", "seed"),
    "degenerate": ("d", "mults", "k", "stage", "seed"),
    "pack": ("k", "n", "degree_bound"),
    "fs-expand": ("m", "n"),
    "glue-demo": ("amplitude", "m", "grid", "tol"),
}


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seshadri-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "seshadri": "multipoint Seshadri constant bounds of O(1) at k general points of P^2",
        "interpolate": "fat-point linear system, surjectivity verdict and basis split",
        "degenerate": "rank constancy of lifted sections across the degeneration at one stage",
        "pack": "ball-packing radii and volumes from the Seshadri bounds",
        "fs-expand": "multinomial coefficients of (|Y|^2 + |T|^2)^m",
        "glue-demo": "positivity of a glued Fubini-Study potential on a disk grid",
    }
    for name, opts in COMMAND_OPTIONS.items():
        p = sub.add_parser(name, help=helps[name])
        for opt in opts:
            typ, _ = OPTIONS[opt]
            p.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ, default=None)
        p.add_argument("--config", default=None, help="flat key=value file; flags override it")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
    return parser


def effective_config(args: argparse.Namespace) -> dict[str, Any]:
    file_values = read_config(args.config) if args.config else {}
    cfg = {}
    for opt in COMMAND_OPTIONS[args.command] + ("format",):
        typ, default = OPTIONS[opt]
        value = getattr(args, opt, None)
        if value is None and opt in file_values:
            try:
                value = typ(file_values[opt])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config value for {opt}: {exc}")
        cfg[opt] = default if value is None else value
    if cfg["format"] not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg['format']!r}")
    return cfg


# --------------------------------------------------------------------------
# commands: each returns (exit code, report dict, csv rows)

Rows = list[list[Any]]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _point_count(cfg: dict) -> tuple[int, list[int]]:
    mults, k = cfg["mults"], cfg["k"]
    if mults is None:
        _require(k is not None, "give --mults or --k")
        _require(k >= 0, "--k must be nonnegative")
        cfg["mults"] = [1] * k
        return k, [1] * k
    if k is not None and k != len(mults):
        _require(len(mults) == 1, f"--k {k} does not match {len(mults)} multiplicities")
        mults = mults * k
    cfg["k"], cfg["mults"] = len(mults), mults
    return len(mults), mults


def _configuration(k: int, seed: int):
    """Seeded points; a coincidence (practically impossible) is re-seeded once."""
    try:
        return random_configuration(k, 2, seed)
    except InvalidConfigurationError:
        return random_configuration(k, 2, seed + 1)


def cmd_seshadri(cfg: dict) -> tuple[int, dict, Rows]:
    k = cfg["k"]
    _require(k is not None and k >= 1, "--k must be a positive integer")
    _require(cfg["degree_bound"] >= 1, "--degree-bound must be positive")
    b = seshadri_constant_general(k, cfg["degree_bound"])
    rows = [["k", "lower", "upper", "exact", "conditional", "upper_witness"],
            [k, b.lower, b.upper, b.exact, b.conditional, str(b.upper_witness)]]
    return (EXIT_BOUNDS_ONLY if b.conditional else EXIT_OK), {"bounds": b.to_json()}, rows


def cmd_interpolate(cfg: dict) -> tuple[int, dict, Rows]:
    d = cfg["d"]
    _require(d is not None and d >= 0, "--d must be a nonnegative integer")
    k, mults = _point_count(cfg)
    pts = _configuration(k, cfg["seed"])
    h0 = [h0_linear_system(pts, d, mults[:i] + [0] * (k - i)) for i in range(k + 1)]
    verdict = evaluation_surjective(pts, d, mults)
    report: dict[str, Any] = {
        "points": pts.to_json(),
        "mults": mults,
        "degree": d,
        "h0_by_stage": h0,
        "surjective": not isinstance(verdict, Deficient),
        "verdict": type(verdict).__name__,
        "rank": verdict.rank,
    }
    rows: Rows = [["stage", "h0"]] + [[i, v] for i, v in enumerate(h0)]
    if isinstance(verdict, Deficient):
        report["corank"] = verdict.corank
        report["split"] = None
        return EXIT_DEFICIENT, report, rows
    split = basis_split(pts, d, mults)
    report["split"] = {
        "B0": len(split.B0),
        "B": [len(b) for b in split.B],
        "Btilde": [len(b) for b in split.Btilde],
    }
    rows.append(["B0", len(split.B0)])
    for i, (b, bt) in enumerate(zip(split.B, split.Btilde), 1):
        rows.append([f"B{i}", len(b)])
        rows.append([f"Btilde{i}", len(bt)])
    return EXIT_OK, report, rows


def cmd_degenerate(cfg: dict) -> tuple[int, dict, Rows]:
    d = cfg["d"]
    _require(d is not None and d >= 0, "--d must be a nonnegative integer")
    k, mults = _point_count(cfg)
    _require(k >= 1, "need at least one point")
    stage = k if cfg["stage"] is None else cfg["stage"]
    _require(1 <= stage <= k, f"--stage must be in 1..{k}")
    cfg["stage"] = stage
    pts = _configuration(k, cfg["seed"])
    try:
        rep = trivialization_check(pts, d, mults, stage, DegenerationPath.default(k))
    except SurjectivityRequiredError as exc:
        return EXIT_DEFICIENT, {"points": pts.to_json(), "error": str(exc)}, [["error"], [str(exc)]]
    rows: Rows = [["t", "rank", "expected"]] + [[f.t, f.rank, f.expected] for f in rep.fibers]
    report = {"points": pts.to_json(), "trivialization": rep.to_json()}
    return (EXIT_OK if rep.ok else EXIT_FAILURE), report, rows


def cmd_pack(cfg: dict) -> tuple[int, dict, Rows]:
    k = cfg["k"]
    _require(k is not None and k >= 1, "--k must be a positive integer")
    n = cfg["n"] = 2 if cfg["n"] is None else cfg["n"]
    _require(n >= 1, "--n must be positive")
    b = seshadri_constant_general(k, cfg["degree_bound"])
    rep = packing_report(k, b, n)
    rows: Rows = [["bound", "radius", "volume", "gamma", "epsilon"]] + [list(r) for r in rep.csv_rows()]
    code = EXIT_BOUNDS_ONLY if b.conditional else EXIT_OK
    return code, {"packing": rep.to_json()}, rows


def cmd_fs_expand(cfg: dict) -> tuple[int, dict, Rows]:
    n = cfg["n"] = 2 if cfg["n"] is None else cfg["n"]
    _require(cfg["m"] >= 1 and n >= 1, "need --m >= 1 and --n >= 1")
    exp = fs_expansion(cfg["m"], n)
    rows: Rows = [[f"alpha{j + 1}" for j in range(n)] + ["beta", "c"]]
    rows += [list(a) + [b, c] for a, b, c in exp.terms]
    return EXIT_OK, {"expansion": exp.to_json()}, rows


def cmd_glue_demo(cfg: dict) -> tuple[int, dict, Rows]:
    _require(cfg["grid"] >= 2, "--grid must be at least 2")
    _require(cfg["m"] >= 1, "--m must be positive")
    inner, outer = sine_perturbation(cfg["amplitude"], cfg["m"])
    rep = glue_potentials(inner, outer, 1.0, 2.0, disk_grid(cfg["grid"], 2.0),
                          threads=max_workers(), tol=cfg["tol"])
    rows: Rows = [["re", "im", "potential", "min_eigenvalue"]]
    rows += [[p[0].real, p[0].imag, v, ev]
             for p, v, ev in zip(rep.grid.points, rep.grid.values, rep.min_eigenvalues)]
    report = {"r_inner": 1.0, "r_outer": 2.0, "gluing": rep.to_json()}
    return (EXIT_OK if rep.positive else EXIT_FAILURE), report, rows


COMMANDS = {
    "seshadri": cmd_seshadri,
    "interpolate": cmd_interpolate,
    "degenerate": cmd_degenerate,
    "pack": cmd_pack,
    "fs-expand": cmd_fs_expand,
    "glue-demo": cmd_glue_demo,
}

EXIT_MEANINGS = {
    EXIT_OK: "ok",
    EXIT_FAILURE: "property check failed",
    EXIT_BOUNDS_ONLY: "bounds only",
    EXIT_DEFICIENT: "deficient",
}


def render(command: str, cfg: dict, code: int, report: dict, rows: Rows) -> str:
    if cfg["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for r in rows:
            w.writerow(encode(r))
        return buf.getvalue()
    doc = {
        "command": command,
        "config": encode(cfg),
        "version": __version__,
        "exit_code": code,
        "status": EXIT_MEANINGS[code],
        "report": encode(report),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        code, report, rows = COMMANDS[args.command](cfg)
    except (UsageError, InvalidParameterError, IndexError) as exc:
        parser.print_usage(sys.stderr)
        print(f"seshadri-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeshadriLabError as exc:
        print(f"seshadri-lab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    text = render(args.command, cfg, code, report, rows)
    out = cfg.get("out") or args.out
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
