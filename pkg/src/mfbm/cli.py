"""Command-line front end: ``mfbm {coeffs,simulate,covariance,verify}``.

A run is described by a JSON config; command-line flags override its
fields.  Every artifact carries the resolved config and the tool version.

Exit codes: 0 success, 1 numerical failure, 2 invalid configuration,
3 verification failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .bases import BasisKind, BasisSpec, build_table, write_table
from .errors import MfbmError, ParameterError
from .harmonics import harmonic_count
from .kernel_cov import ModelParams, covariance_field, covariance_rm
from .simulator import TruncationSpec, design_matrix, sample_replicates, truncation_diagnostic, write_samples
from .verify import DEFAULT_TOLERANCES, run_checks

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3


@dataclass
class RunConfig:
    N: int = 2
    H: float = 0.5
    R: float = 1.0
    basis: str = "fourier_bessel"
    M: int = 10
    n_max: int = 20
    seed: int = 0
    replicates: int = 1
    combined: bool = True
    points: dict = field(default_factory=lambda: {"kind": "ray", "count": 11})
    radii: list | None = None
    out: str = "mfbm-out"
    threads: int = 1
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def model(self) -> ModelParams:
        return ModelParams(self.N, self.H, self.R)

    def truncation(self) -> TruncationSpec:
        return TruncationSpec(self.M, self.n_max)

    def validate(self) -> None:
        """Check every precondition before any computation starts."""
        p = self.model()
        BasisSpec.for_params(self.basis, p)
        self.truncation()
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")
        if self.replicates < 1:
            raise ParameterError("replicates must be >= 1")
        bad = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if bad:
            raise ParameterError(f"unknown tolerance names {sorted(bad)}; known: {sorted(DEFAULT_TOLERANCES)}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v >= 0):
                raise ParameterError(f"tolerance {k} must be a nonnegative number")
        pts = self.point_set()
        r = np.sqrt(np.sum(pts * pts, axis=1))
        outside = np.flatnonzero(r > self.R * (1 + 1e-12))
        if outside.size:
            i = int(outside[0])
            raise ParameterError(f"point {i} {pts[i].tolist()} lies outside the ball of radius {self.R}")
        for s in self.radius_grid():
            if not 0 < s <= self.R:
                raise ParameterError(f"radius {s} outside (0, R]")

    def point_set(self) -> np.ndarray:
        return make_points(self.points, self.N, self.R)

    def radius_grid(self) -> list[float]:
        if self.radii is not None:
            return [float(s) for s in self.radii]
        return [self.R * k / 8 for k in range(1, 9)]


def make_points(desc: dict, N: int, R: float) -> np.ndarray:
    """Point set from a descriptor: ``inline``, ``ray``, ``disk`` or ``lattice``."""
    kind = desc.get("kind")
    if kind == "inline":
        pts = np.asarray(desc["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != N:
            raise ParameterError(f"inline points must be a list of {N}-vectors")
        return pts
    if kind == "ray":
        count = int(desc.get("count", 11))
        d = np.asarray(desc.get("direction", [1.0] + [0.0] * (N - 1)), dtype=float)
        if d.shape != (N,) or not np.linalg.norm(d) > 0:
            raise ParameterError("ray direction must be a nonzero N-vector")
        if count < 2:
            raise ParameterError("ray needs count >= 2")
        d = d / np.linalg.norm(d)
        return np.array([R * k / (count - 1) * d for k in range(count)])
    if kind == "disk":
        rings = int(desc.get("rings", 4))
        per = int(desc.get("per_ring", 8))
        if rings < 1 or per < 1:
            raise ParameterError("disk needs rings >= 1 and per_ring >= 1")
        pts = [np.zeros(N)]
        for i in range(1, rings + 1):
            r = R * i / rings
            for j in range(per):
                x = np.zeros(N)
                x[0], x[1] = r * math.cos(2 * math.pi * j / per), r * math.sin(2 * math.pi * j / per)
                pts.append(x)
        return np.array(pts)
    if kind == "lattice":
        h = float(desc.get("spacing", 0.25))
        if not h > 0:
            raise ParameterError("lattice spacing must be positive")
        k = int(math.floor(R / h))
        axis = [h * i for i in range(-k, k + 1)]
        pts = [c for c in itertools.product(axis, repeat=N) if math.fsum(v * v for v in c) <= R * R * (1 + 1e-12)]
        return np.array(pts, dtype=float)
    raise ParameterError(f"unknown point set kind {kind!r}; use inline, ray, disk or lattice")


# settings that cannot change any computed number stay out of artifacts,
# so reruns with other thread counts or output paths are byte-identical
_NOT_ECHOED = ("out", "threads")


def _echo(cfg: RunConfig, command: str) -> dict:
    conf = {k: v for k, v in cfg.to_dict().items() if k not in _NOT_ECHOED}
    return {"tool": "mfbm", "version": __version__, "command": command, "config": conf}


def _header(cfg: RunConfig, command: str) -> str:
    return "# " + json.dumps(_echo(cfg, command), sort_keys=True) + "\n"


def cmd_coeffs(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.model()
    table = build_table(p, cfg.basis, cfg.M, cfg.n_max, threads=cfg.threads)
    write_table(table, out / "coefficients.csv", extra_meta=_echo(cfg, "coeffs"))
    lines = [
        f"mfbm {__version__} coefficient table",
        f"N={p.N} H={p.H!r} R={p.R!r} basis={table.basis.kind.value} M={cfg.M} n_max={cfg.n_max}",
        f"total terms: {cfg.truncation().term_count(p.N)}",
    ]
    for m in range(cfg.M + 1):
        head = ", ".join(f"{v:.6g}" for v in table.radial_param[m, :5])
        more = " ..." if cfg.n_max > 5 else ""
        lines.append(f"m={m} h={harmonic_count(m, p.N)} radial_param: {head}{more}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.model()
    table = build_table(p, cfg.basis, cfg.M, cfg.n_max, threads=cfg.threads)
    samples = sample_replicates(
        p, table.basis, cfg.truncation(), cfg.seed, cfg.point_set(), cfg.replicates, table=table, threads=cfg.threads
    )
    meta = _echo(cfg, "simulate")
    if cfg.combined:
        write_samples(samples, out / "field.csv", extra_meta=meta)
    else:
        for smp in samples:
            write_samples([smp], out / f"field_{smp.replicate:05d}.csv", extra_meta=meta)
    print(f"wrote {len(samples)} replicate(s) at {samples[0].points.shape[0]} points to {out}")
    return EXIT_OK


def cmd_covariance(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.model()
    radii = cfg.radius_grid()
    rows = ["m,s,t,R_m"]
    for m in range(cfg.M + 1):
        for s in radii:
            for t in radii:
                rows.append(f"{m},{s!r},{t!r},{covariance_rm(p, m, s, t)!r}")
    (out / "radial_covariance.csv").write_text(_header(cfg, "covariance") + "\n".join(rows) + "\n")

    pts = cfg.point_set()
    table = build_table(p, cfg.basis, cfg.M, cfg.n_max, threads=cfg.threads)
    B = design_matrix(p, table.basis, cfg.truncation(), pts, table=table, threads=cfg.threads)
    rows = ["i,j,field,truncated"]
    for i in range(len(pts)):
        for j in range(i, len(pts)):
            exact = covariance_field(p, pts[i], pts[j])
            trunc = math.fsum(B[i] * B[j])
            rows.append(f"{i},{j},{exact!r},{trunc!r}")
    (out / "field_covariance.csv").write_text(_header(cfg, "covariance") + "\n".join(rows) + "\n")

    rows = ["s,diagnostic"]
    for s in radii:
        rows.append(f"{s!r},{truncation_diagnostic(p, table.basis, cfg.truncation(), s, table=table)!r}")
    (out / "truncation_diagnostic.csv").write_text(_header(cfg, "covariance") + "\n".join(rows) + "\n")
    print(f"wrote covariance tables for {len(radii)} radii and {len(pts)} points to {out}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = run_checks(cfg.model(), cfg.tolerances)
    ok = all(r.passed for r in results)
    report = {**_echo(cfg, "verify"), "passed": ok, "checks": [r.to_dict() for r in results]}
    (out / "verify.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag} {r.name:<20} measured={r.measured:.3e} tol={r.tolerance:.1e}  {r.detail}")
    print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"coeffs": cmd_coeffs, "simulate": cmd_simulate, "covariance": cmd_covariance, "verify": cmd_verify}


def _parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance value {value!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mfbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--tolerance", action="append", type=_parse_tolerance, default=[], metavar="NAME=VALUE")
        sp.add_argument("--N", type=int)
        sp.add_argument("--H", type=float)
        sp.add_argument("--R", type=float)
        sp.add_argument("--basis", choices=[k.value for k in BasisKind])
        sp.add_argument("--M", type=int)
        sp.add_argument("--n-max", dest="n_max", type=int)
        sp.add_argument("--replicates", type=int)
        sp.add_argument("--separate", action="store_true", help="one CSV per replicate")
        sp.add_argument("--points", help="point set as JSON descriptor")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config is not None:
        data = json.loads(Path(args.config).read_text())
    cfg = RunConfig.from_dict(data)
    for name in ("out", "seed", "threads", "N", "H", "R", "basis", "M", "n_max", "replicates"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    if args.separate:
        cfg.combined = False
    if args.points:
        cfg.points = json.loads(args.points)
    if args.tolerance:
        cfg.tolerances = {**cfg.tolerances, **dict(args.tolerance)}
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ParameterError, json.JSONDecodeError, TypeError, OSError) as exc:
        print(f"mfbm: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ParameterError as exc:
        print(f"mfbm: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MfbmError as exc:
        print(f"mfbm: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
