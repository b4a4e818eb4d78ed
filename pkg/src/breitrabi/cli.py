"""Command-line front end: sweeps, scans and figure-data export.

Output goes to ``--out`` (relative paths resolve against
``$BREITRABI_OUTPUT_DIR`` when it is set).  CSV files carry ``#`` header
lines with metadata; every command also writes ``<out>.meta.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .berry import (
    DEFAULT_STEPS,
    DegeneracyError,
    LoopSpec,
    marginal_phase_numeric,
    marginal_phase_scan,
    phase_difference,
)
from .crossings import find_avoided_crossings, find_real_crossings, phase_diagram
from .entanglement import ELECTRON, NUCLEAR, entropy_sweep
from .hamiltonian import AtomParams, load_presets
from .spectra import level_ids, spectrum_sweep
from .spin_algebra import HalfInteger

OUTPUT_DIR_ENV = "BREITRABI_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


def parse_range(text: str) -> tuple[float, float, int]:
    """``lo:hi:n`` with inclusive endpoints."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must look like lo:hi:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}: {exc}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"range {text!r} is not finite")
    if n < 2:
        raise ConfigError(f"range {text!r} needs at least 2 points")
    return lo, hi, n


def grid(text: str) -> np.ndarray:
    lo, hi, n = parse_range(text)
    return np.linspace(lo, hi, n)


def fmt(x) -> str:
    """Shortest round-trip text for a number."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0.0"
        return repr(x)
    return str(x)


@dataclass
class RunConfig:
    atom: str | dict = "hydrogen"
    f: float = 1.0
    B: str = "-0.5:0.5:1001"
    f_range: str = "-1:1:201"
    theta: str = "0:3.141592653589793:101"
    level: str | None = None
    subsystem: str = ELECTRON
    numeric: bool = False
    steps: int = DEFAULT_STEPS
    out: str = "out.csv"
    format: str = "csv"
    gnuplot: bool = False
    parameter_set: str = "text"

    def resolve_atom(self) -> AtomParams:
        presets = load_presets()
        if isinstance(self.atom, str):
            if self.atom not in presets:
                raise ConfigError(f"unknown atom preset {self.atom!r}; known: {sorted(presets)}")
            return presets[self.atom]
        missing = {"I", "a_prime", "b_prime"} - set(self.atom)
        if missing:
            raise ConfigError(f"inline atom lacks {sorted(missing)}")
        return AtomParams(str(self.atom.get("name", "custom")), HalfInteger.of(self.atom["I"]),
                          float(self.atom["a_prime"]), float(self.atom["b_prime"]))


def atom_record(atom: AtomParams) -> dict:
    return {"name": atom.name, "I": str(atom.I), "a_prime": atom.a_prime, "b_prime": atom.b_prime}


def output_path(out: str) -> Path:
    p = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    comments: list[str] = field(default_factory=list)


def write_table(table: Table, path: Path, fmt_name: str, meta: dict) -> list[Path]:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt_name == "csv":
            lines = [f"# {c}" for c in table.comments]
            lines.append(",".join(table.columns))
            lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
            path.write_text("\n".join(lines) + "\n")
        elif fmt_name == "json":
            payload = {
                "columns": table.columns,
                "comments": table.comments,
                "rows": [[_json_num(v) for v in row] for row in table.rows],
            }
            path.write_text(json.dumps(payload, sort_keys=True, allow_nan=True) + "\n")
        else:
            raise ConfigError(f"unknown format {fmt_name!r}")
        meta_path = path.with_name(path.name + ".meta.json")
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None
    return [path, meta_path]


def _json_num(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return str(v)


def write_gnuplot(path: Path, columns: list[str], xcol: int = 1) -> Path:
    gp = path.with_suffix(".gp")
    plots = ", \\\n     ".join(
        f"'{path.name}' using {xcol}:{k + 1} with lines title '{c}'"
        for k, c in enumerate(columns) if k + 1 != xcol
    )
    gp.write_text(f"set datafile separator ','\nset key outside\nplot {plots}\n")
    return gp


def _meta(command: str, cfg: RunConfig, atom: AtomParams, **extra) -> dict:
    params = {k: v for k, v in dataclasses.asdict(cfg).items() if k not in ("out",)}
    meta = {"command": command, "tool": "breitrabi", "version": __version__,
            "atom": atom_record(atom), "parameters": params}
    meta.update(extra)
    return meta


def levels_table(cfg: RunConfig) -> tuple[Table, AtomParams]:
    atom = cfg.resolve_atom()
    B = grid(cfg.B)
    table = spectrum_sweep(atom, B, f=cfg.f)
    cols = ["B"] + [i.label for i in table.ids]
    rows = [[float(b)] + list(e) for b, e in zip(B, table.energies)]
    return Table(cols, rows, [f"atom={atom.name} f={fmt(cfg.f)} energies in units of A"]), atom


def entropy_table(cfg: RunConfig) -> tuple[Table, AtomParams]:
    atom = cfg.resolve_atom()
    B = grid(cfg.B)
    ids = None if cfg.level is None else [cfg.level]
    tab = entropy_sweep(atom, ids, B, f=cfg.f)
    cols = ["B"] + [i.label for i in tab.ids]
    rows = [[float(b)] + list(s) for b, s in zip(B, tab.entropy)]
    return Table(cols, rows, [f"atom={atom.name} f={fmt(cfg.f)} entropy in bits"]), atom


def phase_diagram_tables(cfg: RunConfig):
    atom = cfg.resolve_atom()
    fs, Bs = grid(cfg.f_range), grid(cfg.B)
    pd = phase_diagram(atom, fs, Bs, with_entropy=True)
    gap_rows, ent_rows, berry_rows = [], [], []
    for i, f in enumerate(fs):
        for j, b in enumerate(Bs):
            m = pd.m_label[i, j]
            gap_rows.append([float(f), float(b), m, pd.gap[i, j]])
            ent_rows.append([float(f), float(b), pd.entropy[i, j]])
            # ground-state total phase over solid angle is -m
            berry_rows.append([float(f), float(b), -m + 0.0])
    note = f"atom={atom.name} a_prime={fmt(atom.a_prime)} b_prime={fmt(atom.b_prime)}"
    return {
        "gap": Table(["f", "B", "m", "gap"], gap_rows, [note, "gap in units of A"]),
        "entropy": Table(["f", "B", "entropy"], ent_rows, [note, "ground-state entropy in bits"]),
        "berry": Table(["f", "B", "beta_over_omega"], berry_rows, [note, "ground-state total phase / solid angle"]),
    }, atom


def berry_table(cfg: RunConfig):
    atom = cfg.resolve_atom()
    if cfg.level is None:
        raise ConfigError("berry needs --level")
    B, th = grid(cfg.B), grid(cfg.theta)
    subsystems = [ELECTRON, NUCLEAR] if cfg.subsystem == "both" else [cfg.subsystem]
    scans = {s: marginal_phase_scan(atom, cfg.level, B, th, f=cfg.f, subsystem=s) for s in subsystems}
    cols = ["theta", "B"] + [f"gamma_{s[0]}" for s in subsystems]
    if cfg.numeric:
        for s in subsystems:
            cols += [f"gamma_{s[0]}_numeric", f"deviation_{s[0]}"]
    rows = []
    max_dev = {s: 0.0 for s in subsystems}
    skipped = 0
    for r, t in enumerate(th):
        for c, b in enumerate(B):
            row = [float(t), float(b)] + [scans[s].gamma[r, c] for s in subsystems]
            if cfg.numeric:
                for s in subsystems:
                    try:
                        g = marginal_phase_numeric(atom, LoopSpec(float(t), float(b), cfg.f, cfg.steps),
                                                   cfg.level, s)
                        dev = abs(phase_difference(scans[s].gamma[r, c], g))
                        max_dev[s] = max(max_dev[s], dev)
                    except DegeneracyError:
                        g = dev = float("nan")
                        skipped += 1
                    row += [g, dev]
            rows.append(row)
    nodes = {s: [[float(t), list(n)] for t, n in zip(th, scans[s].nodes)] for s in subsystems}
    comments = [f"atom={atom.name} level={cfg.level} f={fmt(cfg.f)} phases in radians, (-pi, pi]"]
    extra = {"nodes": nodes}
    if cfg.numeric:
        extra["max_deviation"] = max_dev
        extra["degenerate_cells"] = skipped
        comments.append("numeric columns: discrete Wilson loops, steps=" + str(cfg.steps))
    return Table(cols, rows, comments), atom, extra


def crossings_table(cfg: RunConfig) -> tuple[Table, AtomParams]:
    atom = cfg.resolve_atom()
    lo, hi, n = parse_range(cfg.B)
    ids = level_ids(atom)
    events = []
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if a.m != b.m:
                events += find_real_crossings(atom, "B", cfg.f, (a, b), lo, hi, n)
    for m in sorted({i.m for i in ids}, reverse=True):
        if sum(1 for i in ids if i.m == m) == 2:
            events += find_avoided_crossings(atom, "B", cfg.f, m, lo, hi, n)
    events.sort(key=lambda e: (e.location, e.kind, e.level_a.sort_key, e.level_b.sort_key))
    rows = [[e.kind, "B", e.location, e.level_a.label, e.level_b.label, e.gap_at_event]
            for e in events]
    cols = ["kind", "parameter", "location", "level_a", "level_b", "gap"]
    return Table(cols, rows, [f"atom={atom.name} f={fmt(cfg.f)}"]), atom


def run_levels(cfg: RunConfig) -> list[Path]:
    table, atom = levels_table(cfg)
    path = output_path(cfg.out)
    written = write_table(table, path, cfg.format, _meta("levels", cfg, atom))
    if cfg.gnuplot and cfg.format == "csv":
        written.append(write_gnuplot(path, table.columns))
    return written


def run_entropy(cfg: RunConfig) -> list[Path]:
    table, atom = entropy_table(cfg)
    path = output_path(cfg.out)
    written = write_table(table, path, cfg.format, _meta("entropy", cfg, atom))
    if cfg.gnuplot and cfg.format == "csv":
        written.append(write_gnuplot(path, table.columns))
    return written


def _suffixed(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{path.suffix}")


def run_phase_diagram(cfg: RunConfig, **extra) -> list[Path]:
    tables, atom = phase_diagram_tables(cfg)
    path = output_path(cfg.out)
    written = []
    for tag, table in tables.items():
        written += write_table(table, _suffixed(path, tag), cfg.format,
                               _meta("phase-diagram", cfg, atom, grid=tag, **extra))
    return written


def run_berry(cfg: RunConfig) -> list[Path]:
    table, atom, extra = berry_table(cfg)
    return write_table(table, output_path(cfg.out), cfg.format, _meta("berry", cfg, atom, **extra))


def run_crossings(cfg: RunConfig) -> list[Path]:
    table, atom = crossings_table(cfg)
    return write_table(table, output_path(cfg.out), cfg.format, _meta("crossings", cfg, atom))


def _replace(cfg: RunConfig, **kw) -> RunConfig:
    return dataclasses.replace(cfg, **kw)


def run_figure(number: int, cfg: RunConfig) -> list[Path]:
    """Write the data behind one of the five figures into ``cfg.out`` (a directory)."""
    outdir = Path(cfg.out)
    ext = "." + cfg.format
    written = []

    def sub(name, **kw):
        return _replace(cfg, out=str(outdir / f"figure{number}{name}{ext}"), **kw)

    if number == 1:
        written += run_levels(sub("a", atom="hydrogen", f=1.0, B="-0.5:0.5:1001"))
        written += run_levels(sub("b", atom="hydrogen", f=-0.5, B="-0.5:0.5:1001"))
        written += run_entropy(sub("c", atom="hydrogen", f=1.0, B="-0.5:0.5:1001", level=None))
    elif number == 2:
        atom = "pedagogical-caption" if cfg.parameter_set == "caption" else "pedagogical"
        written += run_phase_diagram(sub("", atom=atom, f_range="-1:1:201", B="-1:1:201"),
                                     parameter_set=cfg.parameter_set, figure=2)
    elif number == 3:
        written += run_berry(sub("", atom="hydrogen", f=1.0, level="E[0]-", subsystem=ELECTRON,
                                 B="-0.2:0.2:101", theta=f"0:{math.pi!r}:101"))
    elif number == 4:
        written += run_levels(sub("a", atom="sodium", f=1.0, B="-0.2:0.2:1001"))
        written += run_entropy(sub("b", atom="sodium", f=1.0, B="-0.2:0.2:1001", level=None))
    elif number == 5:
        written += run_berry(sub("", atom="sodium", f=1.0, level="E[+1]-", subsystem="both",
                                 B="-0.2:0.2:101", theta=f"0:{math.pi!r}:101"))
    else:
        raise ConfigError(f"no figure {number}; choose 1-5")
    for p in written:
        if p.name.endswith(".meta.json"):
            meta = json.loads(p.read_text())
            meta["figure"] = number
            p.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return written


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings; flags override it")
    common.add_argument("--atom", help="preset name (hydrogen, sodium, pedagogical, pedagogical-caption)")
    common.add_argument("--I", dest="inline_I", help="inline nuclear spin, e.g. 3/2")
    common.add_argument("--a-prime", dest="inline_a", type=float, help="inline a/A in 1/T")
    common.add_argument("--b-prime", dest="inline_b", type=float, help="inline b/A in 1/T")
    common.add_argument("--f", type=float, help="hyperfine scale factor")
    common.add_argument("--B", help="field range lo:hi:n (tesla)")
    common.add_argument("--out", help="output file (directory for 'figure')")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--gnuplot", action="store_true", default=None,
                        help="also write a gnuplot script stub")

    parser = argparse.ArgumentParser(prog="breitrabi", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    subs.add_parser("levels", parents=[common], help="energy levels vs B")
    p = subs.add_parser("entropy", parents=[common], help="entanglement entropy vs B")
    p.add_argument("--level", help="single level such as 'E[0]-' (default: all)")
    p = subs.add_parser("phase-diagram", parents=[common], help="ground-state gap/entropy/phase grids")
    p.add_argument("--f-range", help="f range lo:hi:n")
    p = subs.add_parser("berry", parents=[common], help="marginal Berry phase scan over (B, theta)")
    p.add_argument("--level", help="level such as 'E[0]-'")
    p.add_argument("--theta", help="polar angle range lo:hi:n (radians)")
    p.add_argument("--subsystem", choices=[ELECTRON, NUCLEAR, "both"])
    p.add_argument("--numeric", action="store_true", default=None,
                   help="add Wilson-loop cross-check columns")
    p.add_argument("--steps", type=int, help="loop discretization for --numeric")
    subs.add_parser("crossings", parents=[common], help="real and avoided crossings along B")
    p = subs.add_parser("figure", parents=[common], help="write the data for figure 1-5")
    p.add_argument("number", type=int, choices=[1, 2, 3, 4, 5])
    p.add_argument("--parameter-set", choices=["text", "caption"],
                   help="figure 2 only: a'=0.1,b'=-0.01 (text) or a'=0.01,b'=-0.1 (caption)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(raw) - _FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        values.update(raw)
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    inline = [getattr(args, k, None) for k in ("inline_I", "inline_a", "inline_b")]
    if any(x is not None for x in inline):
        if any(x is None for x in inline):
            raise ConfigError("inline atoms need --I, --a-prime and --b-prime together")
        values["atom"] = {"name": "custom", "I": inline[0], "a_prime": inline[1], "b_prime": inline[2]}
    if args.command == "figure" and "out" not in values:
        values["out"] = "figures"
    cfg = RunConfig(**values)
    for name in ("B", "f_range", "theta"):
        parse_range(getattr(cfg, name))
    if cfg.steps < 3:
        raise ConfigError("--steps must be at least 3")
    return cfg


_RANGE_FLAGS = ("--B", "--f-range", "--theta", "--f")


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-0.5:0.5:11" as an option; glue it to its flag
    out: list[str] = []
    it = iter(range(len(argv)))
    for k in it:
        tok = argv[k]
        if tok in _RANGE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{tok}={argv[k + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        cfg = config_from_args(args)
        runners = {
            "levels": run_levels,
            "entropy": run_entropy,
            "phase-diagram": run_phase_diagram,
            "berry": run_berry,
            "crossings": run_crossings,
        }
        if args.command == "figure":
            written = run_figure(args.number, cfg)
        else:
            written = runners[args.command](cfg)
    except (ConfigError, KeyError, ValueError, DegeneracyError) as exc:
        print(f"breitrabi: error: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
