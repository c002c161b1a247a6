"""Command-line front end.

Usage::

    sta-anneal COMMAND [SCHEDULE] [key=value ...] [--config FILE] [--T 10] ...

Configuration files hold one ``key=value`` pair per line; ``#`` starts a
comment. Command-line pairs and flags override the file. Results are CSV
(``,`` separator, ``.`` decimal, LF line endings, 17 significant digits),
written atomically to ``--out`` or to stdout.

Exit codes: 0 success, 2 configuration error, 3 singular or divergent
schedule, 4 norm drift during integration.
"""

import argparse
import io
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, fields

import numpy as np

from .bloch import DEFAULT_STEPS as BLOCH_STEPS
from .bloch import evolve_bloch
from .errors import DivergentSchedule, NormDrift, SingularDrive
from .experiments import (SCHEDULES, PerturbationSpec, build_drive, mattis_run, stability_run,
                          sweep_T)
from .quantum import MAX_FULL_N, evolve_quantum
from .schedules import ModelParams

COMMANDS = ("design", "evolve-bloch", "evolve-quantum", "sweep-T", "stability", "mattis")
TRAJECTORY_HEADER = ("t", "m", "dm2_literal", "dm2_fluct", "n_x", "n_y", "n_z")
DESIGN_HEADER = ("t", "gamma_x", "gamma_y", "f", "h_z")
DEFAULT_H = 0.1

EXIT_CONFIG = 2
EXIT_SINGULAR = 3
EXIT_NORM = 4


class ConfigError(ValueError):
    """Invalid run configuration; ``where`` names the line or flag."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run.

    ``h=None`` means the default: 0.1, or 0 for the rotating schedule.
    ``steps=None`` selects the step count automatically.
    """

    command: str
    schedule: str = "ising1"
    J: float = 1.0
    h: float | None = None
    Gamma0: float = 1.0
    T: tuple = (10.0,)
    N: int = 4000
    h1: float = 1.0
    steps: int | None = None
    samples: int = 201
    h0: float = 0.0
    hp: float = 0.0
    omega: float = 10.0 * math.pi
    seed: int | None = None
    xi: tuple | None = None

    @property
    def h_value(self):
        if self.h is not None:
            return self.h
        return 0.0 if self.schedule == "rotating" else DEFAULT_H

    def params(self, T=None):
        N = len(self.xi) if self.xi is not None else self.N
        return ModelParams(J=self.J, h=self.h_value, Gamma0=self.Gamma0,
                           T=self.T[0] if T is None else T, N=N)

    @property
    def perturbation(self):
        return PerturbationSpec(self.h0, self.hp, self.omega)

    def serialize(self):
        """``key=value`` text that :func:`parse_config` maps back to this config."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(_fmt_value(x) for x in v)
            else:
                v = _fmt_value(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


def _fmt_value(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


# --- parsing -------------------------------------------------------------


def _float(raw):
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError(f"{raw!r} is not finite")
    return v


def _int(raw):
    v = float(raw)
    if not (math.isfinite(v) and v == int(v)):
        raise ValueError(f"{raw!r} is not an integer")
    return int(v)


def _float_list(raw):
    vals = tuple(_float(x) for x in raw.split(",") if x.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _sign_list(raw):
    vals = tuple(_int(x) for x in raw.split(",") if x.strip())
    if not vals or any(abs(v) != 1 for v in vals):
        raise ValueError("xi must be a comma-separated list of +1/-1")
    return vals


def _steps(raw):
    if raw.strip().lower() == "auto":
        return None
    v = _int(raw)
    if v < 1:
        raise ValueError("steps must be positive")
    return v


_CONVERT = {
    "command": str, "schedule": str, "J": _float, "h": _float, "Gamma0": _float,
    "T": _float_list, "N": _int, "h1": _float, "steps": _steps, "samples": _int,
    "h0": _float, "hp": _float, "omega": _float, "seed": _int, "xi": _sign_list,
}
_ALIASES = {"gamma0": "Gamma0", "G0": "Gamma0", "t": "T"}


def parse_lines(text, label="line"):
    """Split ``key=value`` text into ``(key, raw, where)`` entries."""
    entries = []
    for no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{label} {no}"
        if "=" not in body:
            raise ConfigError(f"expected key=value, got {body!r}", where)
        key, raw = (p.strip() for p in body.split("=", 1))
        entries.append((_ALIASES.get(key, key), raw, where))
    return entries


def build_config(entries):
    """Convert and validate entries; later entries override earlier ones."""
    values, origin = {}, {}
    for key, raw, where in entries:
        if key not in _CONVERT:
            raise ConfigError(f"unknown key {key!r}", where)
        try:
            values[key] = _CONVERT[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", where) from None
        origin[key] = where
    if "command" not in values:
        raise ConfigError("a command is required (one of " + ", ".join(COMMANDS) + ")")
    cfg = RunConfig(**values)
    validate(cfg, origin)
    return cfg


def parse_config(text):
    """Parse the documented ``key=value`` format into a validated :class:`RunConfig`."""
    return build_config(parse_lines(text))


def validate(cfg, origin=None):
    origin = origin or {}

    def fail(key, msg):
        raise ConfigError(msg, origin.get(key))

    if cfg.command not in COMMANDS:
        fail("command", f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}")
    if cfg.schedule not in SCHEDULES:
        fail("schedule", f"unknown schedule {cfg.schedule!r}; expected one of {', '.join(SCHEDULES)}")
    if cfg.schedule == "rotating" and cfg.h is not None and cfg.h != 0.0:
        fail("h", f"rotating forbids h != 0 (got h={cfg.h!r}); the rotating model has no longitudinal field")
    if cfg.schedule in ("ising1", "ising2") and cfg.h_value <= 0.0:
        fail("h", "ising schedules require h > 0")
    if cfg.samples < 2:
        fail("samples", "samples must be >= 2")
    if len(cfg.T) > 1 and cfg.command not in ("sweep-T", "stability"):
        fail("T", f"{cfg.command} takes a single T")
    for T in cfg.T:
        try:
            cfg.params(T)
        except ValueError as exc:
            # ModelParams messages start with the offending field name
            fail(str(exc).split()[0], str(exc))
    if cfg.command == "stability" and cfg.schedule == "linear":
        fail("schedule", "stability needs a designed schedule, not linear")
    if cfg.command == "evolve-bloch" and cfg.steps is not None and cfg.steps < 1000:
        fail("steps", "evolve-bloch needs at least 1000 steps")
    if cfg.command == "mattis":
        if cfg.xi is None and cfg.seed is None:
            fail("command", "mattis requires xi or seed")
        if cfg.schedule not in ("ising1", "ising2"):
            fail("schedule", "mattis requires ising1 or ising2")
        if cfg.xi is None and cfg.N > MAX_FULL_N:
            fail("N", f"mattis runs in the full Hilbert space and needs N <= {MAX_FULL_N}")
        if cfg.xi is not None and len(cfg.xi) > MAX_FULL_N:
            fail("xi", f"mattis supports at most {MAX_FULL_N} sites")
    if cfg.h0 < 0 or cfg.hp < 0:
        fail("h0" if cfg.h0 < 0 else "hp", "perturbation amplitudes must be >= 0")


# --- output --------------------------------------------------------------


def format_float(x):
    return "%.17g" % float(x)


def write_csv(header, rows):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_float(v) if not isinstance(v, str) else v for v in row) + "\n")
    return buf.getvalue()


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".sta-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _subsample(n_total, samples):
    return np.unique(np.round(np.linspace(0, n_total - 1, samples)).astype(int))


# --- commands ------------------------------------------------------------


def _log(msg):
    print(f"sta-anneal: {msg}", file=sys.stderr)


def cmd_design(cfg):
    drive, _ = build_drive(cfg.schedule, cfg.params(), cfg.h1)
    return write_csv(DESIGN_HEADER, drive.table(cfg.samples))


def cmd_evolve_bloch(cfg):
    p = cfg.params()
    drive, _ = build_drive(cfg.schedule, p, cfg.h1)
    tr = evolve_bloch(drive, p, steps=cfg.steps or BLOCH_STEPS)
    idx = _subsample(tr.t.size, cfg.samples)
    n = tr.n[idx]
    rows = np.column_stack([tr.t[idx], n[:, 2], n[:, 2] ** 2, np.zeros(idx.size), n])
    return write_csv(TRAJECTORY_HEADER, rows)


def _trajectory_rows(t, m, lit, fl, bloch):
    return np.column_stack([t, m, lit, fl, bloch])


def cmd_evolve_quantum(cfg):
    p = cfg.params()
    drive, _ = build_drive(cfg.schedule, p, cfg.h1)
    run = evolve_quantum(drive, p, steps=cfg.steps, samples=cfg.samples)
    _log(f"N={p.N} T={p.T:g} steps={run.steps}")
    return write_csv(TRAJECTORY_HEADER,
                     _trajectory_rows(run.t, run.m, run.dm2_literal, run.dm2_fluct, run.bloch))


def cmd_sweep(cfg):
    res = sweep_T(cfg.schedule, cfg.params(), cfg.T, steps=cfg.steps, samples=cfg.samples,
                  h1=cfg.h1)
    rows = []
    for i, r in enumerate(res.rows):
        pair = max((float(np.max(np.abs(r.m - o.m))) for j, o in enumerate(res.rows) if j != i),
                   default=0.0)
        rows.append((r.T, r.m_final, r.max_dev_mean_field, pair, r.steps))
        _log(f"T={r.T:g} wall={r.wall:.2f}s")
    return write_csv(("T", "m_final", "max_dev_mean_field", "max_pairwise_dm", "steps"), rows)


def cmd_stability(cfg):
    spec = cfg.perturbation
    results = [stability_run(cfg.params(T), cfg.schedule, spec, steps=cfg.steps,
                             samples=cfg.samples, h1=cfg.h1) for T in cfg.T]
    for r in results:
        _log(f"T={r.T:g} final_deviation={r.final_deviation:.6g} max_deviation={r.max_deviation:.6g}")
    if len(results) == 1:
        r = results[0]
        return write_csv(TRAJECTORY_HEADER,
                         _trajectory_rows(r.t, r.m, r.dm2_literal, r.dm2_fluct, r.bloch))
    rows = [(r.T, r.final_deviation, r.max_deviation, r.m[-1], r.m_unperturbed[-1]) for r in results]
    return write_csv(("T", "final_deviation", "max_deviation", "m_final", "m_final_unperturbed"), rows)


def cmd_mattis(cfg):
    res = mattis_run(cfg.params(), xi=cfg.xi, seed=cfg.seed, schedule=cfg.schedule,
                     steps=cfg.steps, samples=cfg.samples)
    _log(f"xi={','.join(str(int(x)) for x in res.xi)} gauge_error={res.gauge_error:.3g} "
         f"design_error={res.design_error:.3g}")
    header = ("t", "m_ferro") + tuple(f"sz_{i}" for i in range(res.xi.size))
    return write_csv(header, np.column_stack([res.t, res.m_ferro, res.sz]))


_DISPATCH = {
    "design": cmd_design, "evolve-bloch": cmd_evolve_bloch, "evolve-quantum": cmd_evolve_quantum,
    "sweep-T": cmd_sweep, "stability": cmd_stability, "mattis": cmd_mattis,
}


def run(cfg, out=None):
    """Execute ``cfg``; write the CSV to ``out`` (path) or return it."""
    text = _DISPATCH[cfg.command](cfg)
    if out is not None:
        atomic_write(out, text)
    return text


# --- entry point ---------------------------------------------------------

_FLAG_KEYS = ("T", "N", "schedule", "h0", "hp", "omega", "J", "h", "Gamma0", "h1", "steps",
              "samples", "seed", "xi")


def _arg_parser():
    ap = argparse.ArgumentParser(prog="sta-anneal", description=__doc__.split("\n\n")[0])
    ap.add_argument("items", nargs="*", metavar="COMMAND [SCHEDULE] [key=value ...]",
                    help="command, optional schedule name and config overrides")
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--out", help="output CSV path (default: stdout)")
    ap.add_argument("--print-config", action="store_true",
                    help="print the resolved configuration and exit")
    for key in _FLAG_KEYS:
        ap.add_argument(f"--{key}", dest=f"opt_{key}", metavar=key.upper())
    return ap


def resolve(argv):
    """Build ``(RunConfig, out, print_config)`` from command-line arguments."""
    ap = _arg_parser()
    ns = ap.parse_args(argv)
    entries = []
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                entries += parse_lines(fh.read(), f"{ns.config} line")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", ns.config) from None
    positional = []
    for item in ns.items:
        if "=" in item:
            entries += [(k, v, f"argument {item!r}") for k, v, _ in parse_lines(item)]
        else:
            positional.append(item)
    if len(positional) > 2:
        raise ConfigError(f"unexpected arguments {positional[2:]}")
    if positional:
        entries.append(("command", positional[0], "command argument"))
    if len(positional) == 2:
        entries.append(("schedule", positional[1], "schedule argument"))
    for key in _FLAG_KEYS:
        val = getattr(ns, f"opt_{key}")
        if val is not None:
            entries.append((key, val, f"--{key}"))
    return build_config(entries), ns.out, ns.print_config


def main(argv=None):
    try:
        cfg, out, show = resolve(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    if show:
        sys.stdout.write(cfg.serialize())
        return 0
    t0 = time.perf_counter()
    try:
        text = run(cfg, out)
    except (SingularDrive, DivergentSchedule) as exc:
        where = f" at t = {exc.t:.17g}" if exc.t is not None else ""
        _log(f"{type(exc).__name__}{where}: {exc}")
        return EXIT_SINGULAR
    except NormDrift as exc:
        _log(f"NormDrift: {exc}")
        return EXIT_NORM
    except ValueError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    _log(f"{cfg.command} done in {time.perf_counter() - t0:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
