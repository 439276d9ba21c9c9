"""Command-line interface: ``zloop surface|spectrum|table|verify|transfer|simulate``.

Every command writes a table (CSV or JSON) whose manifest records the
command, surface, parameters, tool version and wall time.  With ``--out``
the manifest is also written next to the table as ``<out>.manifest.json``.

Exit codes: 0 success, 2 input or domain error, 3 convergence or
completeness guard, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceGuard, DomainError, ExplosionGuard, NumericalFailure, Uncertified
from .surfaces import load, preset, validate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GUARD = 3
EXIT_NUMERIC = 4

#: Default cutoff per surface kind when ``--cutoff`` is not given.
DEFAULT_CUTOFF = {"cylinder": 40.0, "schottky": 24.0, "octagon": 6.0}


@dataclass
class RunManifest:
    command: str
    surface: str | None
    parameters: dict
    version: str = __version__
    wall_time: float = 0.0
    notes: dict = field(default_factory=dict)


@dataclass
class Table:
    columns: list
    rows: list

    def as_records(self) -> list:
        return [dict(zip(self.columns, r)) for r in self.rows]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(table: Table, manifest: RunManifest, fmt: str) -> str:
    man = {k: _jsonable(v) for k, v in asdict(manifest).items()}
    if fmt == "json":
        recs = [{k: _jsonable(v) for k, v in r.items()} for r in table.as_records()]
        return json.dumps({"manifest": man, "columns": table.columns, "rows": recs}, indent=2,
                          default=_jsonable) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, default=_jsonable) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _model(args):
    if args.surface_file:
        model = load(args.surface_file)
        validate(model)
        return model, str(args.surface_file)
    model = preset(args.preset)
    return model, args.preset


def _parameter(args, required=True):
    from .loop_measure import SpectralParameter

    if args.s is not None and args.kappa is not None:
        raise DomainError("give either --kappa or --s, not both")
    if args.s is not None:
        return SpectralParameter.from_s(args.s)
    if args.kappa is not None:
        return SpectralParameter.from_kappa(args.kappa)
    if required:
        return SpectralParameter.from_kappa(0.0)
    return None


def _cutoff(args, model):
    return args.cutoff if args.cutoff is not None else DEFAULT_CUTOFF[model.kind]


def _grid(text, default):
    """``start:stop:step`` (inclusive), ``log:start:stop:count``, or a comma list."""
    if text is None:
        return list(default)
    try:
        if text.startswith("log:"):
            a, b, n = text[4:].split(":")
            return list(np.geomspace(float(a), float(b), int(n)))
        if ":" in text:
            a, b, h = map(float, text.split(":"))
            if not h > 0:
                raise ValueError
            n = int(math.floor((b - a) / h + 1e-9))
            return [a + k * h for k in range(n + 1)]
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse grid {text!r}") from None


def _spectrum(args, model):
    from .spectrum import length_spectrum

    return length_spectrum(model, _cutoff(args, model))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def command_surface(args):
    from .spectrum import delta_estimate

    model, desc = _model(args)
    summ = model.summary()
    delta = delta_estimate(model)
    rows = [
        ("name", summ["name"], 0.0),
        ("kind", summ["kind"], 0.0),
        ("rank", summ["rank"], 0.0),
        ("euler_char", summ["euler_char"], 0.0),
        ("n_c", summ["n_c"], 0.0),
        ("delta_estimate", delta, 1e-10 if model.kind == "schottky" else 0.0),
    ]
    for k, (tr, ln) in enumerate(zip(summ["generator_traces"], summ["generator_lengths"])):
        rows.append((f"trace[{k}]", tr, 4e-16 * tr))
        rows.append((f"length[{k}]", ln, 1e-15 * max(ln, 1.0)))
    return Table(["field", "value", "error"], rows), desc, {}


def command_spectrum(args):
    model, desc = _model(args)
    spec = _spectrum(args, model)
    rows = [(e.word_str, e.primitive_length, e.iterate, e.total_length, 1e-12 * e.total_length)
            for e in spec.entries]
    notes = {"certified": spec.certified, "gap": spec.gap, "max_word_length": spec.max_word_length,
             "delta_estimate": spec.delta_estimate, "c_min": spec.c_min, "collisions": spec.collisions}
    return Table(["word", "primitive_length", "iterate", "total_length", "length_error"], rows), desc, notes


def _table_mass(args, model):
    from .loop_measure import check_domain, class_mass

    p = _parameter(args)
    spec = _spectrum(args, model)
    check_domain(spec, p, args.allow_uncertified)
    rows = []
    for e in spec.entries:
        mu = class_mass(e.primitive_length, e.iterate, p)
        rows.append((e.word_str, e.primitive_length, e.iterate, mu, 8e-16 * mu))
    return Table(["word", "length", "m", "mass", "error"], rows)


def _table_zeta(args, model):
    from .selberg import zeta_euler

    spec = _spectrum(args, model)
    rows = []
    for s in _grid(args.grid, np.arange(1.0, 3.0001, 0.25)):
        z = zeta_euler(spec, s, allow_uncertified=args.allow_uncertified)
        rows.append((s, z.log_value, z.tail_bound))
    return Table(["s", "log_zeta", "tail_bound"], rows)


def _table_trace(args, model):
    from .heat_trace import trace_E

    p = _parameter(args)
    spec = _spectrum(args, model)
    rows = []
    for t in _grid(args.grid, np.geomspace(0.05, 50.0, 16)):
        pt = trace_E(spec, p, t, allow_uncertified=args.allow_uncertified)
        rows.append((pt.t, pt.value, pt.tail_bound))
    return Table(["t", "trace", "tail_bound"], rows)


def _table_qvmass(args, model):
    from .heat_trace import trace_integral_tail
    from .loop_measure import mass_by_quadratic_variation

    p = _parameter(args)
    spec = _spectrum(args, model)
    tail = trace_integral_tail(spec, p)
    rows = []
    grid = [args.varpi] if args.varpi is not None and args.grid is None else _grid(
        args.grid, np.geomspace(0.1, 100.0, 13))
    for w in grid:
        lo = mass_by_quadratic_variation(spec, p, w, "below", allow_uncertified=args.allow_uncertified)
        hi = mass_by_quadratic_variation(spec, p, w, "above", allow_uncertified=args.allow_uncertified)
        rows.append((w, lo, hi, tail + 1e-10 * (lo + hi)))
    return Table(["varpi", "mass_below", "mass_above", "error_bound"], rows)


def _table_delta(args, model):
    from .spectrum import delta_history

    hist = delta_history(model)
    rows = []
    prev = math.nan
    for k, d in enumerate(hist):
        # a truncated determinant may have no root in (0, 1); such orders report nan
        rows.append((k + 2, float(d), abs(float(d) - prev)))
        if math.isfinite(d):
            prev = float(d)
    return Table(["order", "delta", "change"], rows)


_TABLES = {"mass": _table_mass, "zeta": _table_zeta, "trace": _table_trace, "qvmass": _table_qvmass,
           "delta": _table_delta}


def command_table(args):
    model, desc = _model(args)
    return _TABLES[args.quantity](args, model), desc, {"quantity": args.quantity}


def command_verify(args):
    from .heat_trace import trace_integral, trace_integral_tail
    from .loop_measure import total_essential_mass
    from .selberg import verify_mass_identity

    model, desc = _model(args)
    p = _parameter(args)
    spec = _spectrum(args, model)
    rep = verify_mass_identity(model, p, spec.cutoff, N=args.colloc, allow_uncertified=args.allow_uncertified,
                          spec=spec)
    rows = [(r.identity, r.lhs, r.rhs, r.residual, r.bound, r.passed) for r in rep.rows]
    mass = total_essential_mass(spec, p, allow_uncertified=args.allow_uncertified)
    ti = trace_integral(spec, p, allow_uncertified=args.allow_uncertified)
    res = abs(ti - mass.value)
    bound = 1e-6 * max(mass.value, 1e-300)
    rows.append(("trace_integral=mass", ti, mass.value, res, bound, res <= bound))
    notes = {"certified": spec.certified, "truncation_error": mass.truncation_error,
             "trace_tail": trace_integral_tail(spec, p), "n_primitive": mass.n_primitive}
    return Table(["identity", "lhs", "rhs", "residual", "bound", "pass"], rows), desc, notes


def command_transfer(args):
    from .transfer import find_delta, fredholm_det

    model, desc = _model(args)
    N = args.colloc
    rows = []
    s_values = [args.s] if args.s is not None else _grid(args.grid, [0.5, 1.0, 1.5, 2.0])
    for s in s_values:
        d1 = fredholm_det(model, s, N).real
        d2 = fredholm_det(model, s, 2 * N).real
        rows.append(("det", s, d1, abs(d1 - d2)))
    delta = find_delta(model, N)
    rows.append(("delta", delta, fredholm_det(model, delta, N).real, abs(delta - find_delta(model, 2 * N))))
    return Table(["quantity", "s", "value", "error"], rows), desc, {"colloc": N}


def command_simulate(args):
    from .simulate import SimulationConfig, validate_kernel

    cfg = SimulationConfig(args.t if args.t is not None else 0.5, args.steps, args.paths, args.seed)
    rep = validate_kernel(cfg)
    rows = [
        ("ks_statistic", rep.ks_statistic, 1.36 / math.sqrt(rep.path_count)),
        ("ks_p_value", rep.p_value, 0.0),
        ("cosh_mean", rep.cosh_mean, rep.cosh_stderr),
        ("cosh_expected", rep.cosh_expected, 0.0),
        ("cosh_z", rep.cosh_z, 1.0),
    ]
    notes = {"insufficient_sample": rep.insufficient, "passed": rep.passed}
    return Table(["statistic", "value", "error"], rows), None, notes


COMMANDS = {
    "surface": command_surface,
    "spectrum": command_spectrum,
    "table": command_table,
    "verify": command_verify,
    "transfer": command_transfer,
    "simulate": command_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zloop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"zloop {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", default="cylinder(1)", help="cylinder(l), funnel3(l) or bolza")
    src.add_argument("--surface-file", type=Path, help="surface JSON file")
    common.add_argument("--kappa", type=float, help="killing rate, at least -1/4")
    common.add_argument("--s", type=float, help="spectral parameter instead of --kappa")
    common.add_argument("--cutoff", type=float, help="length cutoff L")
    common.add_argument("--colloc", type=int, default=32, help="collocation nodes per disk")
    common.add_argument("--t", type=float, help="time")
    common.add_argument("--varpi", type=float, help="quadratic-variation threshold")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", help="start:stop:step, log:start:stop:count or a comma list")
    common.add_argument("--allow-uncertified", action="store_true",
                        help="accept length spectra without a completeness certificate")
    common.add_argument("--out", type=Path, help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("surface", parents=[common], help="validate a surface and print its summary")
    sub.add_parser("spectrum", parents=[common], help="list oriented classes up to the cutoff")
    tab = sub.add_parser("table", parents=[common], help="tabulate a quantity over a grid")
    tab.add_argument("--quantity", choices=sorted(_TABLES), default="mass")
    sub.add_parser("verify", parents=[common], help="residuals of the loop-mass identities")
    sub.add_parser("transfer", parents=[common], help="transfer-operator determinants and delta")
    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of the heat kernel")
    sim.add_argument("--steps", type=int, default=2000)
    sim.add_argument("--paths", type=int, default=100_000)
    return parser


def _parameters(args) -> dict:
    skip = {"command", "out", "format", "preset", "surface_file"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
            if k not in skip and v is not None}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        table, desc, notes = COMMANDS[args.command](args)
    except (ConvergenceGuard, Uncertified) as exc:
        print(f"zloop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except NumericalFailure as exc:
        print(f"zloop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ExplosionGuard, OSError) as exc:
        print(f"zloop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    manifest = RunManifest(args.command, desc, _parameters(args), wall_time=time.perf_counter() - t0,
                           notes=notes)
    text = render(table, manifest, args.format)
    if args.out:
        _atomic_write(args.out, text)
        side = args.out.with_name(args.out.name + ".manifest.json")
        _atomic_write(side, json.dumps({k: _jsonable(v) for k, v in asdict(manifest).items()},
                                       indent=2, default=_jsonable) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
