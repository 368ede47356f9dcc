"""``iso-zmc`` command line: generate, verify, conjugate, deform."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog as cat
from . import diffgeo as dg
from . import verify as vf
from . import weierstrass as ws
from .weierstrass import QuadratureConfig, Tag, WeierstrassFamily

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    family: str = "catenoid"
    alpha: float = 1.0
    beta: float | None = None
    r: float = 1.0
    theta: float = math.pi / 4
    c: float = 0.0
    conjugated: bool = False
    u_range: tuple[float, float] | None = None
    v_range: tuple[float, float] | None = None
    nu: int = 41
    nv: int = 41
    quad_panels: int = 8
    quad_order: int = 16
    fd_step: float = dg.FD_STEP
    affine_step: float = dg.AFFINE_STEP
    tolerances: dict = field(default_factory=dict)
    lines: int = 0
    out: str | None = None
    report: str | None = None
    # deform only
    kind: str = "polar"
    params: list | None = None
    frames: int | None = None

    def family_obj(self) -> WeierstrassFamily:
        try:
            tag = Tag(self.family)
        except ValueError:
            raise UsageError(f"unknown family {self.family!r}; choose from {', '.join(t.value for t in Tag)}") from None
        beta = self.beta
        if beta is None:
            beta = 2.0 if tag is Tag.ENNEPER_TYPE else 1.0
        F = WeierstrassFamily(tag, alpha=self.alpha, beta=beta, r=self.r, theta=self.theta, c=self.c)
        return ws.conjugate(F) if self.conjugated else F

    def grid(self, F: WeierstrassFamily) -> vf.Grid:
        base = vf.default_grid(F)
        u = self.u_range or (base.u_min, base.u_max)
        v = self.v_range or (base.v_min, base.v_max)
        return vf.Grid(float(u[0]), float(u[1]), float(v[0]), float(v[1]), int(self.nu), int(self.nv))

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(panels=int(self.quad_panels), order=int(self.quad_order))

    def validate(self) -> None:
        try:
            F = self.family_obj()
            self.grid(F)
            self.quadrature()
            vf.tolerances_from(self.tolerances)
            if int(self.lines) < 0:
                raise UsageError("lines must be >= 0")
            if self.frames is not None and int(self.frames) < 1:
                raise UsageError("frames must be >= 1")
        except UsageError:
            raise
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from exc
        for name in ("fd_step", "affine_step"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise UsageError(f"{name} must be positive")

    def echo(self) -> dict:
        F = self.family_obj()
        g = self.grid(F)
        return {
            "family": F.tag.value,
            "params": F.params,
            "conjugated": self.conjugated,
            "grid": {"u_min": g.u_min, "u_max": g.u_max, "v_min": g.v_min, "v_max": g.v_max, "nu": g.nu, "nv": g.nv},
            "quadrature": {"panels": self.quad_panels, "order": self.quad_order},
            "fd_step": self.fd_step,
            "affine_step": self.affine_step,
            "tolerances": vf.tolerances_dict(vf.tolerances_from(self.tolerances)),
        }


_CONFIG_KEYS = {f.name for f in fields(JobConfig)}


def _parse_range(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        lo, hi = float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like a:b, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise argparse.ArgumentTypeError(f"range {text!r} must be finite and increasing")
    return lo, hi


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iso-zmc", description="Zero mean curvature surfaces in isotropic 3-space.")
    p.add_argument("--version", action="version", version=f"iso-zmc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="JSON file with JobConfig keys; flags override it")
    common.add_argument("--family", default=S, choices=[t.value for t in Tag])
    for name in ("alpha", "beta", "r", "theta", "c"):
        common.add_argument(f"--{name}", type=float, default=S)
    common.add_argument("--conjugated", action="store_true", default=S)
    common.add_argument("--u-range", dest="u_range", type=_parse_range, default=S, metavar="A:B")
    common.add_argument("--v-range", dest="v_range", type=_parse_range, default=S, metavar="A:B")
    common.add_argument("--nu", type=int, default=S)
    common.add_argument("--nv", type=int, default=S)
    common.add_argument("--quad-panels", dest="quad_panels", type=int, default=S)
    common.add_argument("--quad-order", dest="quad_order", type=int, default=S)
    common.add_argument("--fd-step", dest="fd_step", type=float, default=S)
    common.add_argument("--affine-step", dest="affine_step", type=float, default=S)
    for f in fields(vf.Tolerances):
        flag = "--tol-" + f.name.replace("_", "-")
        common.add_argument(flag, dest="tol_" + f.name, type=float, default=S, metavar="T")
    common.add_argument("--tol-fd", dest="tol_fd", type=float, default=S, metavar="T", help="set every finite-difference tolerance")
    common.add_argument("--out", default=S, help="mesh path (or output directory for deform)")
    common.add_argument("--report", default=S, help="JSON report path")
    sub.add_parser("generate", parents=[common], help="write a triangulated mesh")
    g = sub.choices["generate"]
    g.add_argument("--lines", type=int, default=S, help="export this many u- and v-lines as polylines")
    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sub.add_parser("conjugate", parents=[common], help="write a surface and its conjugate plus a pairing report")
    d = sub.add_parser("deform", parents=[common], help="frames and a convergence table along a deformation path")
    d.add_argument("--kind", default=S, choices=[k.value for k in cat.DeformationKind])
    d.add_argument("--params", type=_parse_floats, default=S, help="comma separated parameter values")
    d.add_argument("--frames", type=int, default=S)
    return p


def load_config(args: argparse.Namespace) -> JobConfig:
    raw: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg = JobConfig()
    try:
        cfg = replace(cfg, **raw)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    for r in ("u_range", "v_range"):
        val = getattr(cfg, r)
        if val is not None:
            if not (isinstance(val, (list, tuple)) and len(val) == 2):
                raise UsageError(f"{r} must be a pair [a, b]")
            setattr(cfg, r, (float(val[0]), float(val[1])))
    tol = dict(cfg.tolerances or {})
    ns = vars(args)
    if "tol_fd" in ns:
        for name in vf.Tolerances.FD_FIELDS:
            tol[name] = ns["tol_fd"]
    for key, val in ns.items():
        if key.startswith("tol_") and key != "tol_fd":
            tol[key[4:]] = val
        elif key in _CONFIG_KEYS and key not in ("tolerances",):
            setattr(cfg, key, val)
    cfg.tolerances = tol
    cfg.validate()
    return cfg


# -- output -----------------------------------------------------------------


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write text with LF endings via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0


def mesh_text(X: np.ndarray, polylines: list[list[int]] | None = None, header: str = "") -> str:
    """OBJ text for a (nv, nu, 3) grid of (l, x, y) points, written as (x, y, l).

    Each grid cell (i, j), (i, j+1), (i+1, j+1), (i+1, j) is split along the
    (i, j)-(i+1, j+1) diagonal.
    """
    nv, nu, _ = X.shape
    if not np.all(np.isfinite(X)):
        raise dg.DegenerateError("non-finite vertex in mesh")
    out = [f"# {line}" for line in header.splitlines()] if header else []
    for l, x, y in X.reshape(-1, 3):
        out.append(f"v {_num(x)} {_num(y)} {_num(l)}")
    idx = np.arange(nv * nu).reshape(nv, nu) + 1
    for i in range(nv - 1):
        for j in range(nu - 1):
            a, b, c, d = idx[i, j], idx[i, j + 1], idx[i + 1, j + 1], idx[i + 1, j]
            out.append(f"f {a} {b} {c}")
            out.append(f"f {a} {c} {d}")
    for line in polylines or []:
        out.append("l " + " ".join(str(k) for k in line))
    return "\n".join(out) + "\n"


def grid_polylines(nv: int, nu: int, count: int) -> tuple[list[list[int]], list[tuple[str, int]]]:
    """Vertex index lists (1-based) of ``count`` u-lines and ``count`` v-lines."""
    if count <= 0:
        return [], []
    idx = np.arange(nv * nu).reshape(nv, nu) + 1
    lines, meta = [], []
    for i in sorted(set(np.linspace(0, nv - 1, min(count, nv)).round().astype(int).tolist())):
        lines.append(idx[i, :].tolist())
        meta.append(("u-line", i))
    for j in sorted(set(np.linspace(0, nu - 1, min(count, nu)).round().astype(int).tolist())):
        lines.append(idx[:, j].tolist())
        meta.append(("v-line", j))
    return lines, meta


def sidecar_text(X: np.ndarray, lines, meta, U, V) -> str:
    flat = X.reshape(-1, 3)
    out = []
    for k, (line, (kind, pos)) in enumerate(zip(lines, meta)):
        fixed = f"v = {_num(V[pos, 0])}" if kind == "u-line" else f"u = {_num(U[0, pos])}"
        out.append(f"polyline {k} {kind} {fixed} {len(line)}")
        for i in line:
            l, x, y = flat[i - 1]
            out.append(f"{_num(x)} {_num(y)} {_num(l)}")
        out.append("")
    return "\n".join(out)


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False, ensure_ascii=True, allow_nan=False) + "\n"


def report_dict(cfg: JobConfig, R: vf.VerificationReport) -> dict:
    return {
        "tool": "iso-zmc",
        "version": __version__,
        "job": cfg.echo(),
        "model": R.model,
        "checks": [
            {
                "name": r.name,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
                "pass": r.passed,
                "excluded_points": r.excluded_points,
            }
            for r in R.records
        ],
        "excluded": [[z.real, z.imag] for z in R.excluded],
        "overall_pass": R.passed,
        "seed": 0,
    }


# -- commands ---------------------------------------------------------------


def sample_surface(F: WeierstrassFamily, grid: vf.Grid, Q: QuadratureConfig):
    """Surface samples on the grid; refuses grids that hit a zero of eta."""
    U, V = grid.mesh()
    Z = U + 1j * V
    bad = np.argwhere(ws.metric_factor(F, Z) < dg.DEGENERATE_TOL)
    if bad.size:
        i, j = bad[0]
        raise dg.DegenerateError(
            f"{F.label()}: metric degenerates at sample (i={i}, j={j}) z={Z[i, j].real:g}{Z[i, j].imag:+g}i"
            f" ({len(bad)} degenerate sample(s))"
        )
    return U, V, ws.integrate_surface(F, Z, Q)


def _default_out(cfg: JobConfig, F: WeierstrassFamily, suffix: str = ".obj") -> str:
    return cfg.out or f"{F.tag.value}{'_conj' if F.conjugated else ''}{suffix}"


def write_mesh(F, grid, Q, path, lines: int = 0) -> dict:
    U, V, X = sample_surface(F, grid, Q)
    polys, meta = grid_polylines(grid.nv, grid.nu, lines)
    header = f"iso-zmc {__version__}\n{F.label()}\nvertices (x, y, l)"
    atomic_write(path, mesh_text(X, polys, header))
    info = {"mesh": str(path), "vertices": int(grid.nu * grid.nv), "triangles": int(2 * (grid.nu - 1) * (grid.nv - 1))}
    if polys:
        side = str(path) + ".lines.txt"
        atomic_write(side, sidecar_text(X, polys, meta, U, V))
        info["polylines"] = side
    return info


def cmd_generate(cfg: JobConfig) -> int:
    F = cfg.family_obj()
    info = write_mesh(F, cfg.grid(F), cfg.quadrature(), _default_out(cfg, F), cfg.lines)
    print(f"wrote {info['mesh']}: {info['vertices']} vertices, {info['triangles']} triangles")
    return EXIT_OK


def cmd_verify(cfg: JobConfig) -> int:
    F = cfg.family_obj()
    R = vf.run_invariant_suite(
        F,
        grid=cfg.grid(F),
        tolerances=vf.tolerances_from(cfg.tolerances),
        fd_step=cfg.fd_step,
        affine_step=cfg.affine_step,
        quadrature=cfg.quadrature(),
    )
    text = dump_json(report_dict(cfg, R))
    atomic_write(cfg.report or f"{F.tag.value}_report.json", text)
    for r in R.records:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.max_residual:.3e} (tol {r.tolerance:.1e})")
    if not R.passed:
        print("failed checks: " + ", ".join(R.failures()), file=sys.stderr)
    return EXIT_OK if R.passed else EXIT_FAIL


def cmd_conjugate(cfg: JobConfig) -> int:
    F = cfg.family_obj()
    G = ws.conjugate(F)
    grid, Q = cfg.grid(F), cfg.quadrature()
    base = Path(_default_out(cfg, F))
    conj_path = base.with_name(base.stem + "_conjugate" + (base.suffix or ".obj"))
    a = write_mesh(F, grid, Q, base)
    b = write_mesh(G, grid, Q, conj_path)
    Z = grid.z()
    tol = vf.tolerances_from(cfg.tolerances).conjugate_pair
    metric = float(np.max(np.abs(ws.metric_factor(G, Z) - ws.metric_factor(F, Z))))
    qF, qG = ws.hopf_coefficient(F, Z), ws.hopf_coefficient(G, Z)
    hopf = float(np.max(np.abs(qG - 1j * qF)))
    ok = metric <= tol and hopf <= tol
    doc = {
        "tool": "iso-zmc",
        "version": __version__,
        "job": cfg.echo(),
        "surface": {"family": F.label(), **a},
        "conjugate": {"family": G.label(), **b},
        "checks": [
            {"name": "shared_metric", "max_residual": metric, "tolerance": tol, "pass": metric <= tol},
            {"name": "hopf_rotated_by_i", "max_residual": hopf, "tolerance": tol, "pass": hopf <= tol},
        ],
        "hopf": {"surface": complex(np.ravel(qF)[0]), "conjugate": complex(np.ravel(qG)[0])},
        "overall_pass": ok,
    }
    atomic_write(cfg.report or f"{F.tag.value}_pairing.json", dump_json(doc))
    print(f"wrote {a['mesh']} and {b['mesh']}; pairing {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# the polar path has its zero of eta at u > 1/r for every theta; the Bonnet
# path has one at the origin
DEFORM_GRIDS = {
    cat.DeformationKind.POLAR_PATH: ((-1.0, 0.8), (-1.0, 1.0)),
    cat.DeformationKind.TANH_PATH: ((-1.0, 1.0), (-1.0, 1.0)),
    cat.DeformationKind.BONNET_ALPHA: ((0.5, 2.0), (-1.0, 1.0)),
}


def deform_params(kind: cat.DeformationKind, params, frames) -> list[float]:
    if params:
        return [float(p) for p in params]
    n = frames or (15 if kind is cat.DeformationKind.POLAR_PATH else 5)
    if n < 1:
        raise UsageError("frames must be >= 1")
    if kind is cat.DeformationKind.POLAR_PATH:
        return np.linspace(0.1, 1.47, n).tolist() if n > 1 else [math.pi / 4]
    return [0.5**k for k in range(n)]


def _deform_frame(kind, p, cfg: JobConfig) -> WeierstrassFamily:
    beta = cfg.beta if cfg.beta is not None else 1.0
    F = cat.deformation_data(kind, p, r=cfg.r, beta=beta)
    return ws.conjugate(F) if cfg.conjugated else F


def cmd_deform(cfg: JobConfig) -> int:
    try:
        kind = cat.DeformationKind(cfg.kind)
    except ValueError:
        raise UsageError(f"unknown deformation kind {cfg.kind!r}") from None
    try:
        params = deform_params(kind, cfg.params, cfg.frames)
        frames = [_deform_frame(kind, p, cfg) for p in params]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    outdir = Path(cfg.out or f"deform_{kind.value}")
    Q = cfg.quadrature()
    meshes = []
    du, dv = DEFORM_GRIDS[kind]
    if kind is cat.DeformationKind.POLAR_PATH:
        du = (du[0] / cfg.r, du[1] / cfg.r)
    grid = vf.Grid(*(cfg.u_range or du), *(cfg.v_range or dv), cfg.nu, cfg.nv)
    for k, F in enumerate(frames):
        meshes.append(write_mesh(F, grid, Q, outdir / f"frame_{k:03d}.obj")["mesh"])
    # deviation from the limiting data, on a small pole-free grid
    if kind is cat.DeformationKind.POLAR_PATH:
        zg = np.add.outer(np.linspace(-1.0, 0.0, 9), 1j * np.linspace(-1.0, 1.0, 9))
        ends = ["theta0", "theta_pi2"]
    else:
        zg = np.add.outer(np.linspace(0.5, 2.0, 9), 1j * np.linspace(-1.0, 1.0, 9))
        ends = [""]
    beta = cfg.beta if cfg.beta is not None else 1.0
    tables = {}
    for end in ends:
        rows = cat.limit_convergence_rate(kind, zg, params, end=end, r=cfg.r, beta=beta)
        tables[end or "limit"] = {
            "rows": [{"param": r.param, "dev_h": r.dev_h, "dev_eta": r.dev_eta} for r in rows],
            "ratios_h": cat.convergence_ratios([r.dev_h for r in rows]),
            "ratios_eta": cat.convergence_ratios([r.dev_eta for r in rows]),
        }
    doc = {"tool": "iso-zmc", "version": __version__, "kind": kind.value, "params": params, "frames": meshes, "convergence": tables}
    atomic_write(cfg.report or str(outdir / "convergence.json"), dump_json(doc))
    print(f"wrote {len(meshes)} frames to {outdir}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "conjugate": cmd_conjugate, "deform": cmd_deform}


_RANGE_FLAGS = ("--u-range", "--v-range")


def _glue_ranges(argv: list[str]) -> list[str]:
    """Turn ``--u-range -1:1`` into ``--u-range=-1:1`` so argparse accepts it."""
    out, it = [], iter(argv)
    for a in it:
        if a in _RANGE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_ranges(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        vf.worker_count()
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"iso-zmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dg.DegenerateError, ws.PoleError) as exc:
        print(f"iso-zmc: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        # bad ISO_ZMC_THREADS and similar environment problems
        print(f"iso-zmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
