"""Command-line driver.

Usage::

    localfield <command> [options]
    localfield <command> --config run.ini [options]

Commands: ``propagator``, ``order1``, ``order2``, ``contacts``, ``cavity``,
``ensemble``, ``report``.  Options may also come from an INI file whose
section is named after the command; keys mirror the long option names
(dashes or underscores).  Flags override the file.

Output is CSV (provenance in ``#`` comment lines) or JSON (``meta`` and
``rows``).  Exit status: 0 success, 2 configuration error, 3 convergence
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import platform
import sys
from dataclasses import dataclass, field
from importlib import metadata
from typing import Any, Callable

import numpy as np

from . import cavity, ensemble, perturbation, propagator
from .errors import ConvergenceError, LocalFieldError, PackingError

__all__ = ["RunConfig", "Table", "main", "run", "report", "build_parser", "read_csv",
           "read_json", "format_number", "EXIT_CONFIG", "EXIT_CONVERGENCE", "EXIT_IO"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

SIG_DIGITS = 12


def format_number(x) -> str:
    """Locale-independent text with 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), f".{SIG_DIGITS}g")
    return str(x)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


class ConfigError(LocalFieldError):
    """Invalid command-line or configuration-file input."""


# --- parameter specifications ------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    type: Callable = str
    default: Any = None
    help: str = ""
    flag: bool = False


def _floats(text):
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _bool(text):
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in {"1", "true", "yes", "on"}:
        return True
    if s in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _grid(text):
    """``start:stop:step`` inclusive grid; empty string gives an empty grid."""
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    s = str(text).strip()
    if not s:
        return ()
    parts = [float(v) for v in s.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ValueError(f"grid must be start:stop:step with step > 0, got {text!r}")
    start, stop, step = parts
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(max(n, 0)))


_PLAN = [
    Param("epsilons", _floats, None, "comma-separated decreasing damping rates"),
    Param("rho_max", float, None, "outer radial cutoff"),
    Param("extrapolation_order", int, None, "polynomial degree in epsilon"),
    Param("tolerance", float, None, "Cauchy tolerance of the extrapolation"),
]

SPECS = {
    "propagator": [
        Param("channel", str, None, "channel m,m' (default: all nine)"),
        Param("rho", float, 1.0, "dimensionless separation k0*R"),
        Param("theta", float, 0.0, "polar angle (rad)"),
        Param("phi", float, 0.0, "azimuth (rad)"),
        Param("radial", str, "h", "h (outgoing) or j (standing wave)"),
        Param("kernel", _bool, False, "also evaluate the angular-integral witness", True),
    ],
    "order1": list(_PLAN),
    "order2": [
        Param("channel", str, None, "channel m,m'"),
        Param("all", _bool, False, "all nine channels", True),
        Param("contacts", _bool, False, "include contact values", True),
        Param("total", _bool, False, "append the weighted channel sum", True),
        Param("expand", str, "middle", "re-expanded factor: middle, first or last"),
    ] + _PLAN,
    "contacts": [
        Param("channel", str, None, "channel m,m' (default: all nine)"),
    ] + _PLAN,
    "cavity": [
        Param("model", str, "virtual", "virtual, real or both"),
        Param("order", int, 2, "highest Taylor order"),
        Param("n_alpha", float, None, "also evaluate the rate at this N*alpha"),
    ],
    "ensemble": [
        Param("n_atoms", int, 200, "atoms per configuration"),
        Param("sample_radius", float, None, "ball radius R0 (default: matched radius)"),
        Param("match_near", float, 9.0, "look for a matched R0 near this value"),
        Param("exclusion_radius", float, 0.5, "hard-core radius b"),
        Param("n_samples", int, 100, "configurations"),
        Param("seed", int, 0, "64-bit seed"),
        Param("n_alpha", float, 0.01, "density times polarizability"),
        Param("k0", float, 1.0, "wavenumber"),
        Param("gamma_prime", float, 1.0, "dielectric half-width"),
        Param("shift_cap", float, float("inf"), "log samples whose |shift| exceeds this"),
        Param("workers", int, None, "worker threads (default: environment or CPU count)"),
    ],
    "report": [
        Param("n_alpha_grid", _grid, None, "start:stop:step grid of N*alpha"),
        Param("ensemble", _bool, False, "include a Monte Carlo estimate", True),
        Param("n_samples", int, 100, "ensemble configurations"),
        Param("seed", int, 0, "ensemble seed"),
    ] + _PLAN,
}


@dataclass
class RunConfig:
    """Fully resolved run description."""

    command: str
    parameters: dict = field(default_factory=dict)
    output_format: str = "csv"
    output_path: str = "-"

    def __post_init__(self):
        if self.command not in SPECS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        known = {p.name for p in SPECS[self.command]}
        extra = set(self.parameters) - known
        if extra:
            raise ConfigError(f"unknown parameters for {self.command}: {sorted(extra)}")
        resolved = {}
        for p in SPECS[self.command]:
            v = self.parameters.get(p.name, p.default)
            if v is None and p.type is _bool:
                v = False
            if v is not None:
                try:
                    v = p.type(v)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {p.name}: {exc}") from exc
            resolved[p.name] = v
        self.parameters = resolved


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict


# --- command handlers ------------------------------------------------------------

def _plan(p) -> perturbation.RegularizationPlan:
    kw = {}
    if p.get("epsilons"):
        kw["epsilons"] = p["epsilons"]
    for k in ("rho_max", "extrapolation_order", "tolerance"):
        if p.get(k) is not None:
            kw[k] = p[k]
    try:
        return perturbation.RegularizationPlan(**kw)
    except LocalFieldError as exc:
        raise ConfigError(str(exc)) from exc


def _channels(p, default_all=True):
    if p.get("channel"):
        try:
            return [propagator.Channel.parse(p["channel"])]
        except LocalFieldError as exc:
            raise ConfigError(str(exc)) from exc
    if default_all or p.get("all"):
        return list(propagator.CHANNELS)
    raise ConfigError("give --channel or --all")


def _cmd_propagator(p):
    if p["radial"] not in ("h", "j"):
        raise ConfigError("radial must be h or j")
    if p["rho"] <= 0 and p["radial"] == "h":
        raise ConfigError("rho must be positive for outgoing propagators")
    disp = propagator.Displacement(p["rho"], p["theta"], p["phi"])
    cols = ["channel", "rho", "theta", "phi", "re", "im"]
    if p["kernel"]:
        cols += ["kernel_re", "kernel_im"]
    rows = []
    for ch in _channels(p):
        g = propagator.propagator_element(ch, disp, radial=p["radial"])
        row = [f"{ch.m_from},{ch.m_to}", p["rho"], p["theta"], p["phi"], g.real, g.imag]
        if p["kernel"]:
            k = propagator.angular_kernel(ch, disp)
            row += [k.real, k.imag]
        rows.append(row)
    return cols, rows


def _cmd_order1(p):
    return ["quantity", "value"], [["first_order", perturbation.first_order_coefficient(_plan(p))]]


def _cmd_order2(p):
    plan = _plan(p)
    if p["expand"] not in ("middle", "first", "last"):
        raise ConfigError("expand must be middle, first or last")
    chans = _channels(p, default_all=False)
    cols = ["channel", "principal_value"]
    if p["contacts"]:
        cols += ["contact_value", "total"]
    rows = []
    for ch in chans:
        pv = perturbation.second_order_channel(ch, plan, expand=p["expand"]).principal_value
        row = [f"{ch.m_from},{ch.m_to}", pv]
        if p["contacts"]:
            c = perturbation.contact_term(ch, plan)
            row += [c, pv + c]
        rows.append(row)
    if p["total"]:
        pv = perturbation.total_second_order(False, plan)
        row = ["total", pv]
        if p["contacts"]:
            tot = perturbation.total_second_order(True, plan)
            row += [tot - pv, tot]
        rows.append(row)
    return cols, rows


def _cmd_contacts(p):
    plan = _plan(p)
    rows = [[f"{ch.m_from},{ch.m_to}", perturbation.contact_term(ch, plan)]
            for ch in _channels(p)]
    rows.append(["shell_2_1_2_0_2_-1", perturbation.contact_shell_integral(2, 1, 2, 0, 2, -1, plan)])
    return ["channel", "contact_value"], rows


def _cmd_cavity(p):
    models = ["virtual", "real"] if p["model"] == "both" else [p["model"]]
    cols = ["model", "order", "coefficient"]
    rows = []
    for m in models:
        try:
            coeffs = cavity.series_coefficients(m, p["order"])
        except LocalFieldError as exc:
            raise ConfigError(str(exc)) from exc
        rows += [[m, k, c] for k, c in enumerate(coeffs)]
        if p["n_alpha"] is not None:
            try:
                rows.append([m, "rate", cavity.decay_rate(m, p["n_alpha"])])
            except LocalFieldError as exc:
                raise ConfigError(str(exc)) from exc
    return cols, rows


def _ensemble_stats(p):
    b = p["exclusion_radius"]
    r0 = p.get("sample_radius")
    if r0 is None:
        r0 = ensemble.matched_sample_radius(b, p["match_near"], p["k0"])
    try:
        cfg = ensemble.EnsembleConfig(p["n_atoms"], r0, b, p["n_samples"], p["seed"],
                                      shift_cap=p["shift_cap"])
        params = ensemble.PhysicalParams.from_n_alpha(
            p["n_alpha"], cfg.density, k0=p["k0"], gamma_prime=p["gamma_prime"])
    except PackingError:
        raise
    except LocalFieldError as exc:
        raise ConfigError(str(exc)) from exc
    stats = ensemble.monte_carlo_average(cfg, params, workers=p.get("workers"))
    return cfg, params, stats


def _cmd_ensemble(p):
    cfg, params, st = _ensemble_stats(p)
    cols = ["n_alpha", "sample_radius", "delta", "mean_re", "mean_im", "se_re", "se_im",
            "rate_coefficient", "n_samples", "n_retries", "n_over_cap"]
    na = p["n_alpha"]
    rows = [[na, cfg.sample_radius, params.delta, st.mean_shift.real, st.mean_shift.imag,
             st.std_error[0], st.std_error[1], st.mean_shift.real / na, st.n_samples,
             st.n_retries, st.n_over_cap]]
    return cols, rows


def report(config: RunConfig) -> Table:
    """Comparison of microscopic, cavity and (optionally) Monte Carlo results.

    Without a grid the table lists expansion coefficients; with
    ``n_alpha_grid`` it lists the decay-rate ratio of each model per point.
    """
    p = config.parameters
    plan = _plan(p)
    o1 = perturbation.first_order_coefficient(plan)
    o2p = perturbation.total_second_order(False, plan)
    o2c = perturbation.total_second_order(True, plan)
    grid = p.get("n_alpha_grid")
    if grid is not None:
        cols = ["n_alpha", "virtual", "real", "micro_principal", "micro_contacts"]
        rows = [[x, cavity.decay_rate("virtual", x), cavity.decay_rate("real", x),
                 1 + o1 * x + o2p * x * x, 1 + o1 * x + o2c * x * x] for x in grid]
        return Table(cols, rows, _meta(config))
    real = cavity.series_coefficients("real", 2)
    virt = cavity.series_coefficients("virtual", 2)
    cols = ["source", "order", "coefficient"]
    rows = [
        ["microscopic", 1, o1],
        ["microscopic_principal", 2, o2p],
        ["microscopic_contacts", 2, o2c],
        ["virtual_cavity", 1, virt[1]],
        ["virtual_cavity", 2, virt[2]],
        ["real_cavity", 1, real[1]],
        ["real_cavity", 2, real[2]],
    ]
    if p.get("ensemble"):
        q = RunConfig("ensemble", {"n_samples": p["n_samples"], "seed": p["seed"]}).parameters
        _, _, st = _ensemble_stats(q)
        rows.append(["monte_carlo", 1, st.mean_shift.real / q["n_alpha"]])
    return Table(cols, rows, _meta(config))


def _cmd_report(p):
    t = report(RunConfig("report", dict(p)))
    return t.columns, t.rows


HANDLERS = {
    "propagator": _cmd_propagator,
    "order1": _cmd_order1,
    "order2": _cmd_order2,
    "contacts": _cmd_contacts,
    "cavity": _cmd_cavity,
    "ensemble": _cmd_ensemble,
    "report": _cmd_report,
}


# --- output ----------------------------------------------------------------------

def _meta(config: RunConfig) -> dict:
    params = {k: ([_json_value(x) for x in v] if isinstance(v, tuple) else _json_value(v))
              for k, v in config.parameters.items()}
    return {
        "tool": "localfield",
        "version": _version(),
        "command": config.command,
        "parameters": params,
        "seed": config.parameters.get("seed"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "significant_digits": SIG_DIGITS,
    }


def _cell(v):
    return format_number(v) if not isinstance(v, str) else v


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    for key, val in table.meta.items():
        buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, str) or v is None:
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    x = float(format_number(v))
    return x if np.isfinite(x) else format_number(v)


def render_json(table: Table) -> str:
    rows = [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows]
    return json.dumps({"meta": table.meta, "columns": table.columns, "rows": rows}, indent=2) + "\n"


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Parse CSV output back into ``(meta, rows)``; numeric cells become floats."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(body)
    rows = []
    for r in reader:
        out = {}
        for k, v in r.items():
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
        rows.append(out)
    return meta, rows


def read_json(text: str) -> tuple[dict, list[dict]]:
    data = json.loads(text)
    return data["meta"], data["rows"]


# --- entry points ----------------------------------------------------------------

def run(config: RunConfig, stdout=None) -> int:
    """Execute a resolved configuration and write its table.

    Returns the exit status; failures print a JSON error object to stderr.
    """
    stdout = sys.stdout if stdout is None else stdout
    try:
        cols, rows = HANDLERS[config.command](config.parameters)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, "convergence", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except LocalFieldError as exc:
        return _fail(EXIT_CONVERGENCE, type(exc).__name__, exc)
    table = Table(cols, rows, _meta(config))
    text = render_csv(table) if config.output_format == "csv" else render_json(table)
    try:
        if config.output_path in (None, "-"):
            stdout.write(text)
        else:
            with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    return EXIT_OK


def _fail(code, kind, exc):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit": code}) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localfield", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, spec in SPECS.items():
        sp = sub.add_parser(name, help=f"{name} computation")
        sp.add_argument("--config", help="INI file with a [%s] section" % name)
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--output", default=None, help="output path ('-' for stdout)")
        for prm in spec:
            opt = "--" + prm.name.replace("_", "-")
            if prm.flag:
                sp.add_argument(opt, dest=prm.name, action="store_const", const=True,
                                default=None, help=prm.help)
            else:
                sp.add_argument(opt, dest=prm.name, default=None, help=prm.help)
    return parser


def _from_file(path, command):
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not cp.has_section(command):
        return {}
    return {k.replace("-", "_"): v for k, v in cp.items(command)}


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    params, fmt, out = {}, "csv", "-"
    if args.config:
        params = _from_file(args.config, args.command)
        fmt = params.pop("format", fmt)
        out = params.pop("output", out)
    for prm in SPECS[args.command]:
        v = getattr(args, prm.name)
        if v is not None:
            params[prm.name] = v
    fmt = args.format or fmt
    out = args.output or out
    return RunConfig(args.command, params, fmt, out)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
