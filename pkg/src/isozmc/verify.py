"""Invariant suite: runs every applicable check on a parameter grid."""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import catalog as cat
from . import diffgeo as dg
from . import weierstrass as ws
from .catalog import Case, ConformalFactorModel
from .iso_core import P, embed, minkowski_form
from .weierstrass import QuadratureConfig, Tag, WeierstrassFamily

THREADS_ENV = "ISO_ZMC_THREADS"


@dataclass(frozen=True)
class Tolerances:
    conformality: float = 1e-8
    mean_curvature: float = 1e-8
    mean_curvature_fd: float = 1e-5
    fd_jet: float = 1e-6
    fd_gauss_map: float = 1e-5
    gauss_map: float = 1e-12
    hopf: float = 1e-8
    codazzi: float = 1e-10
    metric_model: float = 1e-10
    gauss_weingarten: float = 1e-6
    planarity: float = 1e-8
    axial: float = 1e-6
    pde: float = 1e-8
    ode: float = 1e-10
    conjugate_pair: float = 1e-10
    shaw: float = 1e-8
    affine_h: float = 1e-4
    affine_tangential: float = 1e-5
    affine_forms: float = 1e-8
    degenerate_fraction: float = 0.02

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"tolerance {f.name} must be a positive finite number, got {v!r}")

    # checks whose values come from finite differences
    FD_FIELDS = ("mean_curvature_fd", "fd_jet", "fd_gauss_map", "affine_h", "affine_tangential")


@dataclass(frozen=True)
class Grid:
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    nu: int = 41
    nv: int = 41

    def __post_init__(self):
        if self.nu < 2 or self.nv < 2:
            raise ValueError("grid needs nu, nv >= 2")
        vals = (self.u_min, self.u_max, self.v_min, self.v_max)
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("grid ranges must be finite")
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("grid ranges must be increasing")

    def mesh(self):
        """(U, V) of shape (nv, nu): rows are u-lines, columns are v-lines."""
        return np.meshgrid(np.linspace(self.u_min, self.u_max, self.nu), np.linspace(self.v_min, self.v_max, self.nv))

    def z(self):
        U, V = self.mesh()
        return U + 1j * V


def default_grid(F: WeierstrassFamily, n: int = 41) -> Grid:
    """A grid kept well away from zeros of eta, where differencing stays accurate."""
    t = F.tag
    if t is Tag.CATENOID:
        s = 1.0 / F.alpha
        return Grid(-s, s, 0.0, 2 * math.pi * s, n, n)
    if t is Tag.ENNEPER_TYPE:
        return Grid(0.6, 1.6, -1.0, 1.0, n, n)
    if t is Tag.BONNET_TYPE:
        s = 1.0 / F.alpha
        return Grid(0.5 * s, 2.0 * s, 0.5 * s, (2 * math.pi - 0.5) * s, n, n)
    if t is Tag.DEFORM_TANH:
        s = 1.0 / max(F.alpha, 1.0)
        return Grid(-s, s, -s, s, n, n)
    if t is Tag.DEFORM_POLAR:
        a, b = F.r * math.cos(F.theta), F.r * math.sin(F.theta)
        u0 = math.log((F.r + a) / b) / a
        half = min(1.0, math.pi / a - 0.5)
        return Grid(u0 - 2.25, u0 - 0.75, -half, half, n, n)
    return Grid(-1.0, 1.0, -1.0, 1.0, n, n)


def worker_count(default: int | None = None) -> int:
    """Worker cap from the environment (at least 1)."""
    n = default or min(4, os.cpu_count() or 1)
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if cap < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        n = min(n, cap)
    return max(1, n)


@dataclass
class CheckRecord:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    excluded_points: int = 0


@dataclass
class VerificationReport:
    family: str
    model: str | None
    grid: Grid
    records: list[CheckRecord] = field(default_factory=list)
    excluded: list[complex] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list[str]:
        return [r.name for r in self.records if not r.passed]

    def __getitem__(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self) -> list[str]:
        return [r.name for r in self.records]


def expected_hopf(F: WeierstrassFamily) -> complex:
    return 0j if F.tag is Tag.PLANE else -0.5 * F.eta_scale


def _rec(name, value, tol, excluded=0) -> CheckRecord:
    v = float(value)
    ok = bool(np.isfinite(v) and v <= tol)
    return CheckRecord(name, v, float(tol), ok, int(excluded))


def _maxabs(x) -> float:
    x = np.abs(np.asarray(x))
    return float(x.max()) if x.size else 0.0


class _Context:
    """Shared per-run data; the check groups below only read from it."""

    def __init__(self, F, M, grid, tol, fd_step, affine_step, Q):
        self.F, self.M, self.grid, self.tol = F, M, grid, tol
        self.fd_step, self.affine_step, self.Q = fd_step, affine_step, Q
        self.U, self.V = grid.mesh()
        Z = self.U + 1j * self.V
        self.Z = Z
        self.valid = ws.metric_factor(F, Z) >= dg.DEGENERATE_TOL
        self.nexcl = int((~self.valid).sum())
        self.z = Z[self.valid]
        self.J = dg.analytic_jet(F, self.z, Q) if self.z.size else None


def _group_jets(c: _Context) -> list[CheckRecord]:
    F, J, t = c.F, c.J, c.tol
    ex = c.nexcl
    ff = dg.fundamental_forms(J)
    conf = max(_maxabs((ff.E - ff.G) / ff.E), _maxabs(ff.F / ff.E))
    n = J.n
    nscale = np.max(np.abs(n), axis=-1) ** 2
    contract = max(
        _maxabs(minkowski_form(n, n) / nscale),
        _maxabs(minkowski_form(n, P) - 1.0),
        _maxabs(minkowski_form(n, embed(J.Xu)) / np.sqrt(nscale * ff.E)),
        _maxabs(minkowski_form(n, embed(J.Xv)) / np.sqrt(nscale * ff.E)),
    )
    q0 = expected_hopf(F)
    q_w = ws.hopf_coefficient(F, c.z)
    q_j = dg.hopf_from_jet(J)
    recs = [
        _rec("conformality", conf, t.conformality, ex),
        _rec("gauss_map_contract", contract, t.gauss_map, ex),
        _rec("mean_curvature_analytic", _maxabs(dg.mean_curvature(J)), t.mean_curvature, ex),
        _rec("hopf_weierstrass", _maxabs(q_w - q0), t.hopf, ex),
        _rec("hopf_jet", _maxabs(q_j - q0), t.hopf, ex),
        _rec("codazzi_hopf_constant", float(np.ptp(q_w.real) + np.ptp(q_w.imag)) if q_w.size else 0.0, t.codazzi, ex),
    ]
    G = ws.conjugate(F)
    pair = max(
        _maxabs(ws.metric_factor(G, c.z) - ws.metric_factor(F, c.z)),
        _maxabs(ws.hopf_coefficient(G, c.z) - 1j * q_w),
    )
    recs.append(_rec("conjugate_pairing", pair, t.conjugate_pair, ex))
    return recs


def _group_fd(c: _Context) -> list[CheckRecord]:
    u, v = c.z.real, c.z.imag
    Jf = dg.fd_jet(dg.family_sampler(c.F, c.Q), u, v, c.fd_step)
    Ja = c.J
    gap = max(_maxabs(getattr(Jf, k) - getattr(Ja, k)) for k in ("Xu", "Xv", "Xuu", "Xuv", "Xvv"))
    return [
        _rec("fd_jet_agreement", gap, c.tol.fd_jet, c.nexcl),
        # n is solved from the differenced tangents, which amplifies their error
        _rec("fd_gauss_map_agreement", _maxabs(Jf.n - Ja.n), c.tol.fd_gauss_map, c.nexcl),
        _rec("mean_curvature_fd", _maxabs(dg.mean_curvature(Jf)), c.tol.mean_curvature_fd, c.nexcl),
    ]


def _group_model(c: _Context) -> list[CheckRecord]:
    F, M, t, ex = c.F, c.M, c.tol, c.nexcl
    u, v = c.z.real, c.z.imag
    recs = []
    e_model = np.asarray(cat.eval_omega(M, u, v))
    eta = ws.metric_factor(F, c.z)
    recs.append(_rec("metric_model_agreement", _maxabs((e_model - eta) / eta), t.metric_model, ex))
    try:
        w = cat.omega_jet(M, u, v)
    except ValueError:
        recs.append(_rec("pde_residual", math.inf, t.pde, ex))
        return recs
    r1, r2 = cat.pde_residuals_of(w)
    recs.append(_rec("pde_residual", max(_maxabs(r1), _maxabs(r2)), t.pde, ex))
    recs.append(_rec("ode_residual", max(_maxabs(r) for r in cat.ode_residuals(M, u, v)), t.ode, ex))
    gw = dg.gauss_weingarten_residuals(c.J, w, expected_hopf(F))
    recs.append(_rec("gauss_weingarten", max(gw.values()), t.gauss_weingarten, ex))
    return recs


def _group_axial(c: _Context) -> list[CheckRecord]:
    F, M, t = c.F, c.M, c.tol
    if F.eta_scale != 1 or M.case not in (Case.CASE_1A, Case.CASE_1B, Case.CASE_1C):
        return []
    which = "w1" if M.case is Case.CASE_1A else "both"
    # carrier offsets need the full grid; degenerate points are masked as NaN
    Zg = np.where(c.valid, c.Z, c.z[0] if c.z.size else 0)
    A = dg.axial_directions(M, F, Zg, which, c.Q)
    for name in ("w1", "w2", "m1", "m2", "norm11", "norm22", "cross12"):
        val = getattr(A, name)
        if val is not None:
            mask = c.valid if val.ndim == c.valid.ndim else c.valid[..., None]
            setattr(A, name, np.where(mask, val, np.nan))
    J = dg.analytic_jet(F, Zg, c.Q)
    res = dg.plane_carrier_checks(A, J)
    b2 = M.b
    vals = [res.const_w1, res.const_w2, res.orth1, res.orth2, res.null_m, res.tangency, res.offset_spread]
    for norm in (A.norm11, A.norm22):
        if norm is not None:
            vals.append(float(np.nanmax(np.abs(norm - b2))))
    if A.cross12 is not None:
        vals.append(float(np.nanmax(np.abs(A.cross12))))
    vals = [0.0 if not np.isfinite(x) else x for x in vals]
    return [_rec("axial_directions", max(vals), t.axial, c.nexcl)]


def _group_planarity(c: _Context, lines: int = 21, samples: int = 64) -> list[CheckRecord]:
    if c.F.conjugated:
        return []
    g = c.grid
    worst = 0.0
    skipped = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for direction, fixed_rng, rng in (
            ("u", (g.v_min, g.v_max), (g.u_min, g.u_max)),
            ("v", (g.u_min, g.u_max), (g.v_min, g.v_max)),
        ):
            for fixed in np.linspace(*fixed_rng, lines):
                try:
                    pts = dg.extract_coordinate_polyline(c.F, direction, float(fixed), rng, samples, c.Q)
                except dg.DegenerateError:
                    skipped += 1
                    continue
                worst = max(worst, dg.plane_fit_residual(pts))
    return [_rec("planarity_coordinate_lines", worst, c.tol.planarity, skipped)]


def _group_shaw(c: _Context) -> list[CheckRecord]:
    F = c.F
    z0 = c.z[len(c.z) // 2]
    rec = ws.recover_eta_from_modulus(F, z0, c.z)
    ratio = ws.eval_eta(F, c.z) / rec
    dev = max(_maxabs(ratio - ratio[len(ratio) // 2]), _maxabs(np.abs(ratio) - 1.0))
    return [_rec("shaw_recovery", dev, c.tol.shaw, c.nexcl)]


def _group_affine(c: _Context) -> list[CheckRecord]:
    t, ex = c.tol, c.nexcl
    L, Mt, N = dg.determinant_forms(c.J)
    eta = ws.metric_factor(c.F, c.z)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(Mt)
    recs = [
        _rec("affine_asymptotic_forms", max(_maxabs(L), _maxabs(N)), t.affine_forms, ex),
        _rec("affine_metric", _maxabs(root - eta), t.affine_forms, ex),
    ]
    try:
        sh = dg.affine_shape(c.F, c.z, c.affine_step)
    except dg.DegenerateError:
        recs.append(_rec("affine_mean_curvature", math.inf, t.affine_h, ex))
        return recs
    recs.append(_rec("affine_mean_curvature", max(_maxabs(sh.H), _maxabs(sh.H_direct)), t.affine_h, ex))
    recs.append(_rec("affine_tangential_solve", _maxabs(sh.residual), t.affine_tangential, ex))
    return recs


def run_invariant_suite(
    F: WeierstrassFamily,
    M: ConformalFactorModel | None = None,
    grid: Grid | None = None,
    tolerances: Tolerances | None = None,
    *,
    fd_step: float = dg.FD_STEP,
    affine_step: float = dg.AFFINE_STEP,
    quadrature: QuadratureConfig = ws.DEFAULT_QUADRATURE,
    use_family_model: bool = True,
    workers: int | None = None,
) -> VerificationReport:
    """Run all checks that apply to ``F`` (and ``M``) on ``grid``.

    ``M`` defaults to the catalog model of the family.  Checks are grouped
    and the groups may run on several threads; the record order is fixed.
    """
    grid = grid or default_grid(F)
    tol = tolerances or Tolerances()
    if M is None and use_family_model:
        M = cat.model_for_family(F)
    ctx = _Context(F, M, grid, tol, fd_step, affine_step, quadrature)
    report = VerificationReport(F.label(), M.label() if M is not None else None, grid, excluded=[complex(z) for z in ctx.Z[~ctx.valid]])
    frac = ctx.nexcl / ctx.Z.size
    if ctx.J is None:
        report.records.append(_rec("degenerate_fraction", frac, tol.degenerate_fraction, ctx.nexcl))
        return report

    groups = [_group_jets, _group_fd]
    if F.tag is not Tag.PLANE:
        groups.append(_group_shaw)
    if M is not None:
        groups += [_group_model, _group_axial]
    groups.append(_group_planarity)
    if F.conjugated and F.tag is not Tag.PLANE:
        # the plane has Q = 0 and hence no asymptotic coordinates
        groups.append(_group_affine)

    n = workers or worker_count()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(lambda g: g(ctx), groups))
    else:
        results = [g(ctx) for g in groups]
    for r in results:
        report.records.extend(r)
    report.records.append(_rec("degenerate_fraction", frac, tol.degenerate_fraction, ctx.nexcl))
    return report


def tolerances_from(mapping: dict | None) -> Tolerances:
    known = {f.name for f in fields(Tolerances)}
    mapping = dict(mapping or {})
    unknown = set(mapping) - known
    if unknown:
        raise ValueError(f"unknown tolerance key(s): {', '.join(sorted(unknown))}")
    return Tolerances(**{k: float(v) for k, v in mapping.items()})


def tolerances_dict(t: Tolerances) -> dict:
    return asdict(t)
