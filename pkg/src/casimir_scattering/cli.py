"""Command-line front end, run configuration files, CSV tables and manifests.

A run is fully described by a :class:`RunConfig`.  Configuration files are
flat ``key = value`` lines with dotted sections; ``#`` starts a comment.
Every key, with its default:

=======================  ===========  ==========================================
key                      default      meaning
=======================  ===========  ==========================================
command                  (required)   ideal, lifshitz, eta-sweep, lateral-pfa,
                                      kernel, rho-sweep, ingest
mirror1.model            gold-plasma  perfect, gold-plasma, plasma, table
mirror1.lambda_P         137e-9       plasma wavelength (m), model = plasma
mirror1.path             ""           optical data file, model = table
mirror2.*                = mirror1    same keys; unset fields copy mirror1
geometry.L               1e-6         separation (m)
geometry.A               1e-4         area (m^2)
geometry.T               0            temperature (K)
corrugation.a1           1e-9         amplitude of mirror 1 (m)
corrugation.a2           1e-9         amplitude of mirror 2 (m)
corrugation.kappa_C      1e6          corrugation wavevector (1/m)
corrugation.b            0            lateral mismatch (m)
quadrature.rel_tol       1e-8         relative tolerance (1e-5 for kernels)
quadrature.max_subdivisions  400      adaptive budget per integral
sweep.L_min              1e-9         eta-sweep range (m), log spaced
sweep.L_max              1e-5
sweep.points             50
sweep.kappaL_min         1e-3         rho-sweep range of kappa_C L, log spaced
sweep.kappaL_max         10
output.path              <command>.csv
run.threads              1            worker threads for sweeps
=======================  ===========  ==========================================

Command-line flags override file values.  Exit codes: 0 success,
2 invalid configuration, 3 numerical non-convergence (partial table
written and flagged), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import metadata

import numpy as np

from .core import CONSTANTS, Geometry, MirrorPair
from .corrugation import (
    CorrugationSpec,
    RayleighFirstOrder,
    lateral_force_beyond_pfa,
    pfa_energy_correction,
    pfa_lateral_force,
    plane_curvature,
    response_kernel,
)
from .lifshitz import casimir_ideal, force, free_energy
from .materials import OpticalTableError, PlasmaModel, load_optical_table, preset
from .quadrature import QuadratureSpec

__all__ = [
    "ConfigError",
    "MirrorConfig",
    "RunConfig",
    "Table",
    "parse_config",
    "emit_config",
    "load_config",
    "emit_plot_data",
    "run",
    "main",
]

COMMANDS = ("ideal", "lifshitz", "eta-sweep", "lateral-pfa", "kernel", "rho-sweep", "ingest")
MODELS = ("perfect", "gold-plasma", "plasma", "table")

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key + ': ' if key else ''}{message}{where}")
        self.key = key
        self.line = line


@dataclass(frozen=True)
class MirrorConfig:
    model: str = "gold-plasma"
    lambda_P: float = 137e-9
    path: str = ""

    def build(self, key: str):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}", f"{key}.model")
        if self.model == "plasma":
            if not (math.isfinite(self.lambda_P) and self.lambda_P > 0):
                raise ConfigError("must be > 0", f"{key}.lambda_P")
            return PlasmaModel.from_wavelength(self.lambda_P)
        if self.model == "table":
            if not self.path:
                raise ConfigError("required for model = table", f"{key}.path")
            return load_optical_table(self.path)
        return preset(self.model)


@dataclass(frozen=True)
class RunConfig:
    command: str
    mirror1: MirrorConfig = MirrorConfig()
    mirror2: MirrorConfig | None = None
    L: float = 1e-6
    A: float = 1e-4
    T: float = 0.0
    a1: float = 1e-9
    a2: float = 1e-9
    kappa_C: float = 1e6
    b: float = 0.0
    rel_tol: float | None = None
    max_subdivisions: int = 400
    L_min: float = 1e-9
    L_max: float = 1e-5
    points: int = 50
    kappaL_min: float = 1e-3
    kappaL_max: float = 10.0
    out: str | None = None
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", "command")
        try:
            Geometry(self.L, self.A, self.T)
        except ValueError as exc:
            raise ConfigError(str(exc), "geometry." + str(exc).split()[0]) from None
        tol = self.tolerance
        if not 1e-14 < tol < 1e-2:
            raise ConfigError("must lie in (1e-14, 1e-2)", "quadrature.rel_tol")
        if self.max_subdivisions < 8:
            raise ConfigError("must be >= 8", "quadrature.max_subdivisions")
        if self.threads < 1:
            raise ConfigError("must be >= 1", "run.threads")
        if self.a1 < 0 or self.a2 < 0:
            raise ConfigError("amplitudes must be >= 0", "corrugation.a1/a2")
        if not self.kappa_C > 0:
            raise ConfigError("must be > 0", "corrugation.kappa_C")
        if self.command == "eta-sweep":
            if not 0 < self.L_min < self.L_max:
                raise ConfigError("need 0 < L_min < L_max", "sweep.L_min")
            if self.points < 2:
                raise ConfigError("must be >= 2", "sweep.points")
        if self.command == "rho-sweep":
            if not 0 < self.kappaL_min < self.kappaL_max:
                raise ConfigError("need 0 < kappaL_min < kappaL_max", "sweep.kappaL_min")
            if self.points < 2:
                raise ConfigError("must be >= 2", "sweep.points")
        if self.command == "ingest" and not self.mirror1.path:
            raise ConfigError("ingest needs an optical data file", "mirror1.path")
        for key, m in (("mirror1", self.mirror1), ("mirror2", self.mirror2)):
            if m is not None and m.model not in MODELS:
                raise ConfigError(f"unknown model {m.model!r}", f"{key}.model")
        return self

    @property
    def tolerance(self) -> float:
        if self.rel_tol is not None:
            return self.rel_tol
        return 1e-5 if self.command in ("kernel", "rho-sweep") else 1e-8

    @property
    def output_path(self) -> str:
        return self.out or f"{self.command}.csv"


# dotted key -> (attribute path, type)
_KEYS = {
    "command": ("command", str),
    "geometry.L": ("L", float),
    "geometry.A": ("A", float),
    "geometry.T": ("T", float),
    "corrugation.a1": ("a1", float),
    "corrugation.a2": ("a2", float),
    "corrugation.kappa_C": ("kappa_C", float),
    "corrugation.b": ("b", float),
    "quadrature.rel_tol": ("rel_tol", float),
    "quadrature.max_subdivisions": ("max_subdivisions", int),
    "sweep.L_min": ("L_min", float),
    "sweep.L_max": ("L_max", float),
    "sweep.points": ("points", int),
    "sweep.kappaL_min": ("kappaL_min", float),
    "sweep.kappaL_max": ("kappaL_max", float),
    "output.path": ("out", str),
    "run.threads": ("threads", int),
}
_MIRROR_KEYS = {"model": str, "lambda_P": float, "path": str}


def _convert(key: str, raw: str, typ, line: int | None):
    try:
        if typ is int:
            return int(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"cannot read {raw!r} as {typ.__name__}", key, line) from None


def _from_pairs(pairs) -> RunConfig:
    top, mirrors = {}, {"mirror1": {}, "mirror2": {}}
    for key, raw, line in pairs:
        head, _, tail = key.partition(".")
        if head in mirrors and tail in _MIRROR_KEYS:
            mirrors[head][tail] = _convert(key, raw, _MIRROR_KEYS[tail], line)
        elif key in _KEYS:
            attr, typ = _KEYS[key]
            top[attr] = _convert(key, raw, typ, line)
        else:
            raise ConfigError("unknown key", key, line)
    if "command" not in top:
        raise ConfigError("missing", "command")
    m1 = MirrorConfig(**mirrors["mirror1"])
    m2 = replace(m1, **mirrors["mirror2"]) if mirrors["mirror2"] else None
    return RunConfig(mirror1=m1, mirror2=m2, **top)


def parse_config(text: str) -> RunConfig:
    """Parse the flat dotted ``key = value`` format."""
    pairs = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", None, n)
        key, value = (s.strip() for s in line.split("=", 1))
        pairs.append((key, value, n))
    return _from_pairs(pairs)


def emit_config(config: RunConfig) -> str:
    """Serialise ``config``; ``parse_config(emit_config(c)) == c``."""
    lines = []
    for key, (attr, _) in _KEYS.items():
        value = getattr(config, attr)
        if value is not None:
            lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    for name in ("mirror1", "mirror2"):
        m = getattr(config, name)
        if m is None:
            continue
        for f in fields(m):
            value = getattr(m, f.name)
            lines.append(f"{name}.{f.name} = {value!r}" if isinstance(value, float)
                         else f"{name}.{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- output ---------------------------------------------------------------

@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_plot_data(table: Table, path: str, comments=()) -> str:
    """Write ``table`` as CSV with ``#`` comment lines; refuses an empty table."""
    if not table.rows:
        raise ValueError("refusing to write an empty table")
    out = [f"# {c}" for c in comments]
    out.append(",".join(table.columns))
    for row in table.rows:
        if len(row) != len(table.columns):
            raise ValueError("row length does not match the header")
        out.append(",".join(repr(float(v)) if not isinstance(v, str) else v for v in row))
    _atomic_write(path, "\n".join(out) + "\n")
    return path


def _config_hash(config: RunConfig) -> str:
    # the output location does not change the numbers
    return hashlib.sha256(emit_config(replace(config, out=None)).encode()).hexdigest()[:16]


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# --- commands -------------------------------------------------------------

def _pair(cfg: RunConfig) -> MirrorPair:
    m1 = cfg.mirror1.build("mirror1")
    m2 = m1 if cfg.mirror2 is None or cfg.mirror2 == cfg.mirror1 else cfg.mirror2.build("mirror2")
    return MirrorPair(m1, m2, Geometry(cfg.L, cfg.A, cfg.T))


def _spec(cfg: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=cfg.tolerance, max_subdivisions=cfg.max_subdivisions)


def _map(cfg: RunConfig, fn, items):
    if cfg.threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(cfg.threads) as pool:
        return list(pool.map(fn, items))


def _cmd_ideal(cfg):
    r = casimir_ideal(Geometry(cfg.L, cfg.A, cfg.T))
    return Table(("L_m", "A_m2", "E_Cas_J", "F_Cas_N", "P_Cas_Pa"),
                 [(cfg.L, cfg.A, r.energy, r.force, r.pressure)]), True


def _cmd_lifshitz(cfg):
    pair, spec = _pair(cfg), _spec(cfg)
    e = free_energy(pair, spec)
    f = force(pair, spec)
    row = (cfg.L, cfg.T, e.energy, e.energy_error, f.force, f.force_error, f.ratio_to_casimir)
    return Table(("L_m", "T_K", "E_J", "E_err_J", "F_N", "F_err_N", "eta_F"), [row]), \
        e.converged and f.converged


def _cmd_eta_sweep(cfg):
    pair, spec = _pair(cfg), _spec(cfg)
    grid = np.geomspace(cfg.L_min, cfg.L_max, cfg.points)
    results = _map(cfg, lambda L: force(pair.with_separation(float(L)), spec), grid)
    rows = []
    for L, r in zip(grid, results):
        F_cas = casimir_ideal(pair.geometry.with_separation(float(L))).force
        rows.append((float(L), r.ratio_to_casimir, r.force_error / F_cas))
    return Table(("L_m", "eta_F", "eta_F_err"), rows), all(r.converged for r in results)


def _corrugation(cfg) -> CorrugationSpec:
    return CorrugationSpec(cfg.a1, cfg.a2, cfg.kappa_C, cfg.b)


def _cmd_lateral_pfa(cfg):
    pair, spec, corr = _pair(cfg), _spec(cfg), _corrugation(cfg)
    curv = plane_curvature(pair, spec)
    dE = pfa_energy_correction(pair, corr, spec, curv)
    F = pfa_lateral_force(pair, corr, spec, curv)
    return Table(("b_m", "dE_PFA_J", "dE_PFA_err_J", "F_lat_PFA_N", "F_lat_PFA_err_N"),
                 [(cfg.b, dE.value, dE.error, F.value, F.error)]), True


def _cmd_kernel(cfg):
    pair, spec, corr = _pair(cfg), _spec(cfg), _corrugation(cfg)
    k = response_kernel(pair, cfg.kappa_C, spec=spec)
    F = lateral_force_beyond_pfa(pair, corr, spec=spec, kernel=k)
    cols = ("kappa_C_per_m", "G_C_J_per_m4", "G_C_err_J_per_m4", "G_0_J_per_m4",
            "G_0_err_J_per_m4", "rho_C", "rho_C_err", "F_lat_N", "F_lat_err_N")
    row = (cfg.kappa_C, k.G_C, k.G_C_error, k.G_0, k.G_0_error, k.rho_C, k.rho_C_error,
           F.value, F.error)
    return Table(cols, [row]), k.converged


def _cmd_rho_sweep(cfg):
    pair, spec = _pair(cfg), _spec(cfg)
    grid = np.geomspace(cfg.kappaL_min, cfg.kappaL_max, cfg.points) / cfg.L
    curv = plane_curvature(pair, spec)

    def one(q):
        q = float(q)
        return response_kernel(pair, q, RayleighFirstOrder(pair.mirror1, q),
                               RayleighFirstOrder(pair.mirror2, q), spec, curv)

    results = _map(cfg, one, grid)
    rows = [(r.kappa_C, r.rho_C, r.rho_C_error) for r in results]
    return Table(("kappa_C_per_m", "rho_C", "rho_C_err"), rows), all(r.converged for r in results)


def _cmd_ingest(cfg):
    material = load_optical_table(cfg.mirror1.path)
    rows = [(float(x), float(e)) for x, e in zip(material.grid, material.values)]
    return Table(("xi_rad_per_s", "eps_imag_axis"), rows), True


_COMMANDS = {
    "ideal": _cmd_ideal,
    "lifshitz": _cmd_lifshitz,
    "eta-sweep": _cmd_eta_sweep,
    "lateral-pfa": _cmd_lateral_pfa,
    "kernel": _cmd_kernel,
    "rho-sweep": _cmd_rho_sweep,
    "ingest": _cmd_ingest,
}


def run(config: RunConfig) -> int:
    """Execute one run, writing the CSV table and a JSON manifest next to it."""
    try:
        config.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table, converged = _COMMANDS[config.command](config)
    except (ConfigError, OpticalTableError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    elapsed = time.perf_counter() - start

    digest = _config_hash(config)
    path = config.output_path
    comments = [f"manifest_sha256={digest}", f"command={config.command}",
                f"converged={'yes' if converged else 'no'}"]
    manifest = {
        "config": emit_config(config),
        "config_sha256": digest,
        "version": _version(),
        "constants": asdict(CONSTANTS),
        "converged": converged,
        "columns": list(table.columns),
        "rows": [list(map(float, r)) for r in table.rows],
        "warnings": [str(w.message) for w in caught],
        "wall_time_s": elapsed,
    }
    try:
        emit_plot_data(table, path, comments)
        _atomic_write(path + ".manifest.json", json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not converged:
        print("error: numerical result did not converge; table flagged", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casimir", description="Casimir forces between plane and corrugated mirrors.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="flat dotted key = value file")
    p.add_argument("--tol", type=float, help="quadrature.rel_tol")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--threads", type=int, help="worker threads for sweeps")
    p.add_argument("--material", help="model of both mirrors (perfect, gold-plasma, plasma, table)")
    p.add_argument("--lambda-P", dest="lambda_P", type=float, help="plasma wavelength (m)")
    p.add_argument("--table", help="optical data file")
    p.add_argument("--L", type=float, help="separation (m)")
    p.add_argument("--A", type=float, help="area (m^2)")
    p.add_argument("--T", type=float, help="temperature (K)")
    p.add_argument("--a1", type=float)
    p.add_argument("--a2", type=float)
    p.add_argument("--kappa-C", dest="kappa_C", type=float, help="corrugation wavevector (1/m)")
    p.add_argument("--b", type=float, help="lateral mismatch (m)")
    p.add_argument("--L-min", dest="L_min", type=float)
    p.add_argument("--L-max", dest="L_max", type=float)
    p.add_argument("--kappaL-min", dest="kappaL_min", type=float)
    p.add_argument("--kappaL-max", dest="kappaL_max", type=float)
    p.add_argument("--points", type=int)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig(command=args.command)
    cfg = replace(cfg, command=args.command)
    overrides = {k: getattr(args, k) for k in
                 ("L", "A", "T", "a1", "a2", "kappa_C", "b", "L_min", "L_max",
                  "kappaL_min", "kappaL_max", "points", "out", "threads")
                 if getattr(args, k) is not None}
    if args.tol is not None:
        overrides["rel_tol"] = args.tol
    mirror = {}
    if args.material is not None:
        mirror["model"] = args.material
    if args.lambda_P is not None:
        mirror["lambda_P"] = args.lambda_P
    if args.table is not None:
        mirror["path"] = args.table
    if mirror:
        overrides["mirror1"] = replace(cfg.mirror1, **mirror)
        overrides["mirror2"] = None
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
