"""Jets, fundamental forms, curvature lines, axial directions and affine data.

All routines broadcast over leading array axes: a grid of parameters gives
jets whose vector fields have shape ``grid.shape + (3,)`` (points and tangent
vectors in ``(l, x, y)``) or ``grid.shape + (4,)`` (the lightlike Gauss map).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import weierstrass as ws
from .catalog import ConformalFactorModel, OmegaJet, omega_jet
from .iso_core import P, VERTICAL, embed, iso_inner, minkowski_form
from .weierstrass import QuadratureConfig, WeierstrassFamily

DEGENERATE_TOL = 1e-12
FD_STEP = 1e-3
AFFINE_STEP = 1e-2


class DegenerateError(ValueError):
    """Metric or tangent plane degenerates at the requested point."""


@dataclass
class SurfaceJet:
    X: np.ndarray
    Xu: np.ndarray
    Xv: np.ndarray
    Xuu: np.ndarray
    Xuv: np.ndarray
    Xvv: np.ndarray
    n: np.ndarray
    nu: np.ndarray | None = None
    nv: np.ndarray | None = None


class FundamentalForms(NamedTuple):
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray

    @property
    def exp2omega(self):
        return self.E


def gauss_map_derivatives(h, dh):
    """(n_u, n_v) of the Gauss map of a holomorphic h."""
    h = np.asarray(h, dtype=complex)
    dh = np.asarray(dh, dtype=complex)

    def along(d):
        dm = 2.0 * (np.conj(h) * d).real
        return -0.5 * np.stack([dm, 2.0 * d.real, -2.0 * d.imag, dm], axis=-1)

    return along(dh), along(1j * dh)


def analytic_jet(F: WeierstrassFamily, z, Q: QuadratureConfig = ws.DEFAULT_QUADRATURE, with_position: bool = True) -> SurfaceJet:
    """Jet from the holomorphic integrand; X itself by quadrature."""
    z = np.asarray(z, dtype=complex)
    eta = np.abs(np.asarray(ws.eval_eta(F, z)))
    if np.any(eta < DEGENERATE_TOL):
        raise DegenerateError(f"{F.label()}: metric vanishes at {z[eta < DEGENERATE_TOL] if z.ndim else z}")
    W = ws.eval_integrand(F, z)
    Wp = ws.eval_integrand_derivative(F, z)
    h = np.asarray(ws.eval_h(F, z))
    dh = np.asarray(ws.eval_dh(F, z))
    nu, nv = gauss_map_derivatives(h, dh)
    X = ws.integrate_surface(F, z, Q) if with_position else np.full(W.shape, np.nan)
    return SurfaceJet(
        X=X,
        Xu=W.real,
        Xv=-W.imag,
        Xuu=Wp.real,
        Xuv=-Wp.imag,
        Xvv=-Wp.real,
        n=ws.gauss_map_from_h(h),
        nu=nu,
        nv=nv,
    )


def solve_gauss_map(Xu, Xv, rank_tol: float = 1e-12):
    """Lightlike n with <Xu, n> = <Xv, n> = 0 and <n, P> = 1.

    Writing n = (t, nx, ny, t + 1), the two tangency conditions are linear in
    (nx, ny) and <n, n> = 0 is linear in t, so the solution is unique.
    """
    Xu = np.asarray(Xu, dtype=float)
    Xv = np.asarray(Xv, dtype=float)
    a1, b1, c1 = Xu[..., 0], Xu[..., 1], Xu[..., 2]
    a2, b2, c2 = Xv[..., 0], Xv[..., 1], Xv[..., 2]
    det = b1 * c2 - c1 * b2
    scale = np.hypot(b1, c1) * np.hypot(b2, c2)
    if np.any(np.abs(det) <= rank_tol * np.maximum(scale, 1e-300)):
        raise DegenerateError("tangent plane degenerate (projection to the xy-plane has rank < 2)")
    nx = (-a1 * c2 + c1 * a2) / det
    ny = (-b1 * a2 + a1 * b2) / det
    t = -0.5 * (1.0 + nx * nx + ny * ny)
    return np.stack([t, nx, ny, t + 1.0], axis=-1)


def fd_jet(sampler: Callable, u, v, step: float = FD_STEP) -> SurfaceJet:
    """Second-order central-difference jet of ``sampler(u, v) -> (..., 3)``."""
    if not step > 0:
        raise ValueError("step must be positive")
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    h = step
    X = sampler(u, v)
    Xpu, Xmu = sampler(u + h, v), sampler(u - h, v)
    Xpv, Xmv = sampler(u, v + h), sampler(u, v - h)
    Xpp, Xpm = sampler(u + h, v + h), sampler(u + h, v - h)
    Xmp, Xmm = sampler(u - h, v + h), sampler(u - h, v - h)
    Xu = (Xpu - Xmu) / (2 * h)
    Xv = (Xpv - Xmv) / (2 * h)
    Xuu = (Xpu - 2 * X + Xmu) / (h * h)
    Xvv = (Xpv - 2 * X + Xmv) / (h * h)
    Xuv = (Xpp - Xpm - Xmp + Xmm) / (4 * h * h)
    return SurfaceJet(X, Xu, Xv, Xuu, Xuv, Xvv, solve_gauss_map(Xu, Xv))


def family_sampler(F: WeierstrassFamily, Q: QuadratureConfig = ws.DEFAULT_QUADRATURE) -> Callable:
    return lambda u, v: ws.integrate_surface(F, np.asarray(u) + 1j * np.asarray(v), Q)


def fundamental_forms(J: SurfaceJet) -> FundamentalForms:
    n = J.n
    return FundamentalForms(
        iso_inner(J.Xu, J.Xu),
        iso_inner(J.Xu, J.Xv),
        iso_inner(J.Xv, J.Xv),
        minkowski_form(embed(J.Xuu), n),
        minkowski_form(embed(J.Xuv), n),
        minkowski_form(embed(J.Xvv), n),
    )


def _check_metric(ff: FundamentalForms):
    if np.any(ff.E < DEGENERATE_TOL):
        raise DegenerateError("degenerate metric (E below threshold)")


def mean_curvature(J: SurfaceJet):
    ff = fundamental_forms(J)
    _check_metric(ff)
    return 0.5 * (ff.L + ff.N) / ff.E


def hopf_from_jet(J: SurfaceJet):
    ff = fundamental_forms(J)
    _check_metric(ff)
    return 0.25 * (ff.L - ff.N - 2j * ff.M)


def gauss_weingarten_residuals(J: SurfaceJet, w: OmegaJet, hopf: complex) -> dict:
    """Residuals of the structure equations with constant Hopf coefficient ``hopf``.

    For hopf = -1/2 these are the curvature-line equations, for hopf = -i/2
    the asymptotic-line ones.
    """
    e2 = np.exp(-2.0 * np.log(w.exp_omega))[..., None]
    wu, wv = w.u[..., None], w.v[..., None]
    rq, iq = hopf.real, hopf.imag
    out = {
        "Xuu": J.Xuu - (wu * J.Xu - wv * J.Xv + 2 * rq * VERTICAL),
        "Xuv": J.Xuv - (wv * J.Xu + wu * J.Xv - 2 * iq * VERTICAL),
        "Xvv": J.Xvv - (-wu * J.Xu + wv * J.Xv - 2 * rq * VERTICAL),
    }
    if J.nu is not None:
        Xu4, Xv4 = embed(J.Xu), embed(J.Xv)
        out["nu"] = J.nu + 2 * e2 * (rq * Xu4 - iq * Xv4)
        out["nv"] = J.nv - 2 * e2 * (iq * Xu4 + rq * Xv4)
    return {k: float(np.max(np.abs(val))) for k, val in out.items()}


def extract_coordinate_polyline(source, direction: str, fixed: float, rng, samples: int, Q: QuadratureConfig = ws.DEFAULT_QUADRATURE):
    """Points along a u-line (u varies, v = fixed) or a v-line (v varies, u = fixed)."""
    if samples < 4:
        raise ValueError("need at least 4 samples")
    t = np.linspace(rng[0], rng[1], samples)
    if direction in ("u", "u-line"):
        u, v = t, np.full_like(t, fixed)
        box = ((rng[0], rng[1]), (fixed, fixed))
    elif direction in ("v", "v-line"):
        u, v = np.full_like(t, fixed), t
        box = ((fixed, fixed), (rng[0], rng[1]))
    else:
        raise ValueError(f"direction must be 'u' or 'v', got {direction!r}")
    if isinstance(source, WeierstrassFamily):
        bad = ws.singular_points(source, *box, pad=1e-12)
        if bad:
            raise DegenerateError(f"{source.label()}: pole of h on the line at {bad[0]}")
        return ws.integrate_surface(source, u + 1j * v, Q)
    return np.asarray(source(u, v), dtype=float)


def plane_fit_residual(points) -> float:
    """sigma_min / sigma_max of the centered point cloud (0 for planar curves)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("need an (n >= 4, 3) array of points")
    s = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if s[0] == 0.0:
        raise ValueError("all points coincide")
    if s[1] / s[0] < 1e-12:
        warnings.warn("points are collinear (rank-1); residual is trivially zero", RuntimeWarning, stacklevel=2)
    return float(s[-1] / s[0])


@dataclass
class AxialResult:
    w1: np.ndarray | None
    w2: np.ndarray | None
    norm11: np.ndarray | None
    norm22: np.ndarray | None
    cross12: np.ndarray | None
    m1: np.ndarray | None
    m2: np.ndarray | None
    X: np.ndarray | None = None


def axial_from_jet(J: SurfaceJet, w: OmegaJet, which: str = "both", f_zero: bool = False, g_zero: bool = False) -> AxialResult:
    want1 = which in ("both", "w1")
    want2 = which in ("both", "w2")
    if want1 and f_zero:
        raise ValueError("f identically zero: no axial direction w1")
    if want2 and g_zero:
        raise ValueError("g identically zero: no axial direction w2")
    e2 = (1.0 / w.exp_omega**2)[..., None]
    wu, wv = w.u[..., None], w.v[..., None]
    w1 = w2 = m1 = m2 = None
    with np.errstate(divide="ignore", invalid="ignore"):
        if want1:
            w1 = w.uu[..., None] * J.Xu - w.uv[..., None] * J.Xv + wu * VERTICAL
            if not g_zero:
                m1 = -e2 * embed(J.Xv) + wv * J.n - (e2 / (2 * wv)) * P
        if want2:
            w2 = w.uv[..., None] * J.Xu - w.vv[..., None] * J.Xv + wv * VERTICAL
            if not f_zero:
                m2 = e2 * embed(J.Xu) + wu * J.n - (e2 / (2 * wu)) * P
    return AxialResult(
        w1=w1,
        w2=w2,
        norm11=iso_inner(w1, w1) if w1 is not None else None,
        norm22=iso_inner(w2, w2) if w2 is not None else None,
        cross12=iso_inner(w1, w2) if (w1 is not None and w2 is not None) else None,
        m1=m1,
        m2=m2,
        X=J.X,
    )


def axial_directions(M: ConformalFactorModel, F: WeierstrassFamily, z, which: str = "both", Q: QuadratureConfig = ws.DEFAULT_QUADRATURE) -> AxialResult:
    """Axial directions w1, w2 and plane carriers m1, m2 at z (broadcast)."""
    from .catalog import Case

    case = M.case
    f_zero = case is Case.CASE_2
    g_zero = case in (Case.CASE_1A, Case.CASE_2)
    if which in ("both", "w1") and f_zero:
        raise ValueError("f identically zero: no axial direction w1")
    if which in ("both", "w2") and g_zero:
        raise ValueError("g identically zero: no axial direction w2")
    z = np.asarray(z, dtype=complex)
    J = analytic_jet(F, z, Q)
    return axial_from_jet(J, omega_jet(M, z.real, z.imag), which, f_zero, g_zero)


class CarrierResiduals(NamedTuple):
    orth1: float
    orth2: float
    const_w1: float
    const_w2: float
    null_m: float
    tangency: float
    offset_spread: float


def _spread(a):
    if a is None:
        return 0.0
    flat = a.reshape(-1, a.shape[-1])
    return float(np.max(flat.max(axis=0) - flat.min(axis=0)))


def _unit(m):
    """m scaled by its largest component; non-finite carriers become NaN."""
    with np.errstate(invalid="ignore"):
        s = np.max(np.abs(m), axis=-1, keepdims=True)
        out = m / s
    return np.where(np.all(np.isfinite(out), axis=-1, keepdims=True), out, np.nan)


def _nanmax_abs(x) -> float:
    x = np.abs(np.asarray(x, dtype=float))
    return float(np.nanmax(x)) if np.any(np.isfinite(x)) else 0.0


def plane_carrier_checks(A: AxialResult, J: SurfaceJet | None = None, min_scale: float = 1e-6) -> CarrierResiduals:
    """Carrier orthogonality, w-constancy and plane membership.

    Null/orthogonality/tangency residuals use the carrier scaled to unit
    max-norm, so points where the printed normalization blows up (omega_v = 0
    for m1) do not swamp the statistics.  ``offset_spread`` needs a grid of
    shape (nv, nu): the offset <X, m1 / <m1, p>> must be constant along
    every u-line (rows), <X, m2 / <m2, p>> along every v-line (columns).
    """
    orth = [0.0, 0.0]
    null = tang = offs = 0.0
    pairs = ((A.m1, A.w1, (J.Xu, J.Xuu) if J is not None else (), -1), (A.m2, A.w2, (J.Xv, J.Xvv) if J is not None else (), -2))
    for i, (m, w, tangents, axis) in enumerate(pairs):
        if m is None:
            continue
        mu = _unit(m)
        null = max(null, _nanmax_abs(minkowski_form(mu, mu)))
        if w is not None:
            orth[i] = _nanmax_abs(minkowski_form(mu, embed(w)))
        for T in tangents:
            tang = max(tang, _nanmax_abs(minkowski_form(mu, embed(T))))
        if A.X is not None and m.ndim == 3 and np.all(np.isfinite(A.X)):
            s = minkowski_form(m, P)
            with np.errstate(invalid="ignore", divide="ignore"):
                q = minkowski_form(embed(A.X), m / s[..., None])
            q = np.where(np.isfinite(q) & (np.abs(s) > min_scale), q, np.nan)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                spread = np.nanmax(q, axis=axis) - np.nanmin(q, axis=axis)
            offs = max(offs, _nanmax_abs(spread))
    return CarrierResiduals(orth[0], orth[1], _spread(A.w1), _spread(A.w2), null, tang, offs)


class AffineData(NamedTuple):
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    normal: np.ndarray
    exp_omega: np.ndarray


def _det3(a, b, c):
    return np.linalg.det(np.stack([a, b, c], axis=-1))


def determinant_forms(J: SurfaceJet):
    """(det(Xu, Xv, Xuu), det(Xu, Xv, Xuv), det(Xu, Xv, Xvv)) in (l, x, y)."""
    return _det3(J.Xu, J.Xv, J.Xuu), _det3(J.Xu, J.Xv, J.Xuv), _det3(J.Xu, J.Xv, J.Xvv)


def projected_area(J: SurfaceJet):
    """det(Xu, Xv, p): area of the parallelogram spanned by the xy-projections."""
    return _det3(J.Xu, J.Xv, np.broadcast_to(VERTICAL, J.Xu.shape))


def affine_forms(J: SurfaceJet) -> AffineData:
    """Determinant forms, affine normal e^{-omega} X_uv and e^omega = sqrt(M~)."""
    L, M, N = determinant_forms(J)
    if np.any(M <= 0):
        raise DegenerateError("M~ <= 0: not an asymptotic-coordinate patch with positive orientation")
    e = np.sqrt(M)
    return AffineData(L, M, N, J.Xuv / e[..., None], e)


class AffineShape(NamedTuple):
    S: np.ndarray
    H: np.ndarray
    K: np.ndarray
    H_direct: np.ndarray
    residual: np.ndarray


_STENCILS = {
    2: ((1, 0.5),),
    4: ((1, 2.0 / 3.0), (2, -1.0 / 12.0)),
}


def affine_shape(F: WeierstrassFamily, z, step: float = AFFINE_STEP, order: int = 4) -> AffineShape:
    """Affine shape operator from d(normal) = -dX S with central differences.

    ``order`` selects the 2nd or 4th order central stencil for all first
    derivatives; the mixed derivative of log M~ is the product stencil.
    """
    if order not in _STENCILS:
        raise ValueError(f"unsupported stencil order {order}")
    z = np.asarray(z, dtype=complex)
    h = step
    stencil = _STENCILS[order]
    cache = {}

    def at(i, j):
        if (i, j) not in cache:
            J = analytic_jet(F, z + (i + 1j * j) * h, with_position=False)
            A = affine_forms(J)
            cache[(i, j)] = (A.normal, 0.5 * np.log(A.M))
        return cache[(i, j)]

    def d_u(k, j=0):
        return sum(c * (at(m, j)[k] - at(-m, j)[k]) for m, c in stencil) / h

    def d_v(k, i=0):
        return sum(c * (at(i, m)[k] - at(i, -m)[k]) for m, c in stencil) / h

    J0 = analytic_jet(F, z, with_position=False)
    n_u, n_v = d_u(0), d_v(0)
    T = np.stack([J0.Xu, J0.Xv], axis=-1)  # (..., 3, 2)
    B = -np.stack([n_u, n_v], axis=-1)
    S = np.linalg.pinv(T) @ B
    residual = np.max(np.abs(T @ S - B), axis=(-2, -1))
    w0 = at(0, 0)[1]
    w_u, w_v = d_u(1), d_v(1)
    w_uv = sum(c * (d_v(1, m) - d_v(1, -m)) for m, c in stencil) / h
    H = 0.5 * (S[..., 0, 0] + S[..., 1, 1])
    K = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
    return AffineShape(S, H, K, -np.exp(-w0) * (w_uv + w_u * w_v), residual)


def affine_shape_closed_form(w: OmegaJet):
    """Shape operator read off from the structure equations in asymptotic coordinates."""
    k = -1.0 / w.exp_omega
    s = w.uv + w.u * w.v
    return k[..., None, None] * np.stack(
        [np.stack([s, w.vv - w.u**2], axis=-1), np.stack([w.uu - w.v**2, s], axis=-1)], axis=-2
    )
