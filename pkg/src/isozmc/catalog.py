"""Closed-form conformal factors, classification and deformation families.

The conformal factor of a surface with planar curvature lines is built from
two one-variable functions ``f(u)``, ``g(v)`` solving

    f'' = a f,   f'^2 = a f^2 + b,   g'' = -a g,   g'^2 = -a g^2 + b

with ``a = alpha^2``, ``b = beta^2``.  For ``alpha > 0`` the factor is
``e^omega = |f' - g'| / alpha^2``; for ``alpha = 0`` it is
``(f^2 + g^2) / |f' + g'|``.  Taking absolute values matters: with
``f = e^{-alpha u}`` or the ``f(0) = 1`` normalization the raw quotient
``(f^2 + g^2) / (f' + g')`` is negative, and the positive factor corresponds
to ``(f, g) -> (-f, -g)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import weierstrass as ws
from .weierstrass import Tag, WeierstrassFamily

DEGENERATE_TOL = 1e-12


class Case(str, enum.Enum):
    CASE_1A = "1a"
    CASE_1B = "1b"
    CASE_1C = "1c"
    CASE_2 = "2"


class ICVariant(str, enum.Enum):
    ZERO_AT_ORIGIN = "zero_at_origin"  # f(0) = g(0) = 0 where possible
    ONE_AT_ORIGIN = "one_at_origin"  # f(0) = 1, g(0) = 0


def classify(alpha: float, beta: float) -> Case:
    if alpha < 0 or beta < 0:
        raise ValueError(f"alpha and beta must be non-negative, got ({alpha}, {beta})")
    if alpha > 0:
        return Case.CASE_1C if beta > 0 else Case.CASE_1A
    return Case.CASE_1B if beta > 0 else Case.CASE_2


@dataclass(frozen=True)
class ConformalFactorModel:
    """Closed-form ``(omega, f, g)`` for one case of the classification.

    ``g_sign = -1`` flips ``g`` (Case 1c only); for the ``f(0) = 1`` variant
    the flipped sign is already the default, matching ``g = -(beta/alpha) sin``.
    ``c`` is the constant value of ``omega`` in Case 2.
    """

    alpha: float = 0.0
    beta: float = 0.0
    c: float = 0.0
    ic_variant: ICVariant = ICVariant.ZERO_AT_ORIGIN
    g_sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ic_variant", ICVariant(self.ic_variant))
        case = classify(self.alpha, self.beta)
        if self.g_sign not in (1, -1):
            raise ValueError("g_sign must be +1 or -1")
        if self.g_sign == -1 and case is not Case.CASE_1C:
            raise ValueError("g_sign = -1 is only meaningful in Case 1c")

    @property
    def case(self) -> Case:
        return classify(self.alpha, self.beta)

    @property
    def a(self) -> float:
        return self.alpha**2

    @property
    def b(self) -> float:
        return self.beta**2

    def label(self) -> str:
        return f"Case{self.case.value}(alpha={self.alpha:g},beta={self.beta:g},{self.ic_variant.value},g_sign={self.g_sign})"


def model(alpha=0.0, beta=0.0, ic_variant=ICVariant.ZERO_AT_ORIGIN, c=0.0, g_sign=1) -> ConformalFactorModel:
    return ConformalFactorModel(alpha=alpha, beta=beta, c=c, ic_variant=ic_variant, g_sign=g_sign)


def f_derivatives(M: ConformalFactorModel, u):
    """(f, f', f'', f''') at u."""
    u = np.asarray(u, dtype=float)
    al, be = M.alpha, M.beta
    case = M.case
    zero = np.zeros_like(u)
    if case is Case.CASE_2:
        return zero, zero, zero, zero
    if case is Case.CASE_1A:
        e = np.exp(-al * u)
        return e, -al * e, al**2 * e, -(al**3) * e
    if case is Case.CASE_1B:
        if M.ic_variant is ICVariant.ZERO_AT_ORIGIN:
            return be * u, be + zero, zero, zero
        return 1.0 - be * u, -be + zero, zero, zero
    ch, sh = np.cosh(al * u), np.sinh(al * u)
    if M.ic_variant is ICVariant.ZERO_AT_ORIGIN:
        k = be / al
        return k * sh, k * al * ch, k * al**2 * sh, k * al**3 * ch
    s = math.hypot(al, be) / al
    f = ch - s * sh
    df = al * (sh - s * ch)
    return f, df, al**2 * f, al**2 * df


def g_derivatives(M: ConformalFactorModel, v):
    """(g, g', g'', g''') at v."""
    v = np.asarray(v, dtype=float)
    al, be = M.alpha, M.beta
    case = M.case
    zero = np.zeros_like(v)
    if case in (Case.CASE_2, Case.CASE_1A):
        return zero, zero, zero, zero
    if case is Case.CASE_1B:
        k = be if M.ic_variant is ICVariant.ZERO_AT_ORIGIN else -be
        return k * v, k + zero, zero, zero
    k = be / al
    if M.ic_variant is ICVariant.ONE_AT_ORIGIN:
        k = -k
    k *= M.g_sign
    sn, cs = np.sin(al * v), np.cos(al * v)
    return k * sn, k * al * cs, -k * al**2 * sn, -k * al**3 * cs


def eval_f(M: ConformalFactorModel, u):
    f = f_derivatives(M, u)[0]
    return float(f) if np.ndim(f) == 0 else f


def eval_g(M: ConformalFactorModel, v):
    g = g_derivatives(M, v)[0]
    return float(g) if np.ndim(g) == 0 else g


def _signed_factor(M, u, v):
    """Signed quantity whose absolute value is e^omega (before the constant scale)."""
    f, df, _, _ = f_derivatives(M, u)
    g, dg, _, _ = g_derivatives(M, v)
    if M.case is Case.CASE_1B:
        return (f * f + g * g) / (df + dg)
    return (df - dg) / M.a


def eval_omega(M: ConformalFactorModel, u, v):
    """e^omega, strictly positive away from the isolated metric zeros."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if M.case is Case.CASE_2:
        out = np.full(u.shape, math.exp(M.c))
    else:
        out = np.abs(_signed_factor(M, u, v))
    return float(out) if out.ndim == 0 else out


def degenerate_mask(M: ConformalFactorModel, u, v, tol: float = DEGENERATE_TOL):
    return np.asarray(eval_omega(M, u, v)) < tol


def omega_quotient(M: ConformalFactorModel, u, v):
    """(f^2 + g^2) / (f' + g') exactly as it comes out of the ODE solutions."""
    f, df, _, _ = f_derivatives(M, u)
    g, dg, _, _ = g_derivatives(M, v)
    return (f * f + g * g) / (df + dg)


class OmegaJet(NamedTuple):
    exp_omega: np.ndarray
    u: np.ndarray
    v: np.ndarray
    uu: np.ndarray
    uv: np.ndarray
    vv: np.ndarray


def omega_jet(M: ConformalFactorModel, u, v, tol: float = DEGENERATE_TOL) -> OmegaJet:
    """Analytic first and second derivatives of omega = log e^omega."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    e = np.asarray(eval_omega(M, u, v))
    if np.any(e < tol):
        raise ValueError(f"{M.label()}: metric-degenerate point (e^omega < {tol:g})")
    zero = np.zeros_like(u)
    case = M.case
    if case is Case.CASE_2:
        return OmegaJet(e, zero, zero, zero, zero, zero)
    f, df, ddf, dddf = f_derivatives(M, u)
    g, dg, ddg, dddg = g_derivatives(M, v)
    if case is Case.CASE_1B:
        G = f * f + g * g
        wu = 2 * f * df / G
        wv = 2 * g * dg / G
        return OmegaJet(e, wu, wv, 2 * df * df / G - wu * wu, -wu * wv, 2 * dg * dg / G - wv * wv)
    # omega = log|F| + const with F = f' - g'
    F = df - dg
    wu = ddf / F
    wv = -ddg / F
    return OmegaJet(e, wu, wv, dddf / F - wu * wu, ddf * ddg / (F * F), -dddg / F - wv * wv)


def pde_residuals_of(j: OmegaJet):
    """(omega_uu + omega_vv, omega_uv + omega_u omega_v)."""
    return j.uu + j.vv, j.uv + j.u * j.v


def pde_residuals(M: ConformalFactorModel, u, v):
    return pde_residuals_of(omega_jet(M, u, v))


def ode_residuals(M: ConformalFactorModel, u, v, f_scale: float = 1.0):
    """Residuals of the four ODEs; ``f_scale`` rescales f as a negative control."""
    f, df, ddf, _ = (f_scale * x for x in f_derivatives(M, u))
    g, dg, ddg, _ = g_derivatives(M, v)
    a, b = M.a, M.b
    return ddf - a * f, df * df - a * f * f - b, ddg + a * g, dg * dg + a * g * g - b


def printed_exp_omega(M: ConformalFactorModel, u, v):
    """e^omega as a direct per-case formula (positive convention in Case 1a)."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    al, be = M.alpha, M.beta
    case = M.case
    if case is Case.CASE_2:
        return np.full(u.shape, math.exp(M.c))
    if case is Case.CASE_1A:
        return np.exp(-al * u) / al
    if case is Case.CASE_1B:
        if M.ic_variant is ICVariant.ZERO_AT_ORIGIN:
            return 0.5 * be * (u * u + v * v)
        return ((1 - be * u) ** 2 + (be * v) ** 2) / (2 * be)
    if M.ic_variant is ICVariant.ZERO_AT_ORIGIN:
        return be / al**2 * (np.cosh(al * u) - M.g_sign * np.cos(al * v))
    s = math.hypot(al, be)
    return np.abs(al * np.sinh(al * u) - s * np.cosh(al * u) + be * np.cos(al * v)) / al**2


def model_for_family(F: WeierstrassFamily) -> ConformalFactorModel | None:
    """Conformal-factor model with e^omega = |eta| exactly; None for the plane."""
    t = F.tag
    if t is Tag.PLANE:
        return None
    if t is Tag.TRIVIAL_ENNEPER:
        return model(c=-F.c)
    if t is Tag.CATENOID:
        return model(alpha=F.alpha)
    if t is Tag.ENNEPER_TYPE:
        return model(beta=F.beta)
    if t is Tag.BONNET_TYPE:
        return model(alpha=F.alpha, beta=F.beta)
    if t is Tag.DEFORM_TANH:
        return model(alpha=F.alpha, beta=F.alpha**2 / 2, g_sign=-1)
    if t is Tag.DEFORM_POLAR:
        return model(alpha=F.r * math.cos(F.theta), beta=F.r * math.sin(F.theta), ic_variant=ICVariant.ONE_AT_ORIGIN)
    raise AssertionError(t)


class SurfaceTag(str, enum.Enum):
    TRIVIAL_ENNEPER_X0 = "trivial_enneper_x0"
    CATENOID_XR = "catenoid_xr"
    DEFORM_X_ALPHA = "deform_x_alpha"


@dataclass(frozen=True)
class ClosedFormSurface:
    tag: SurfaceTag
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tag", SurfaceTag(self.tag))
        if self.tag is SurfaceTag.DEFORM_X_ALPHA and not self.alpha > 0:
            raise ValueError("alpha must be > 0")


def closed_form_surface(S: ClosedFormSurface, u, v):
    """Explicit parametrizations in (l, x, y); broadcast over u, v."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if S.tag is SurfaceTag.TRIVIAL_ENNEPER_X0:
        return -np.stack([0.5 * (u * u - v * v), u, v], axis=-1)
    if S.tag is SurfaceTag.CATENOID_XR:
        e = np.exp(-u)
        return np.stack([u, -e * np.cos(v), e * np.sin(v)], axis=-1)
    a = S.alpha
    au, av = a * u, a * v
    return -np.stack(
        [
            2.0 * (np.cosh(au) * np.cos(av) - 1.0),
            a * (np.sinh(au) * np.cos(av) + au),
            a * (np.cosh(au) * np.sin(av) + av),
        ],
        axis=-1,
    ) / (2.0 * a * a)


class DeformationKind(str, enum.Enum):
    TANH_PATH = "tanh"  # beta = alpha^2 / 2, alpha -> 0 gives trivial Enneper
    POLAR_PATH = "polar"  # (alpha, beta) = r (cos theta, sin theta)
    BONNET_ALPHA = "bonnet_alpha"  # Bonnet-type with beta fixed, alpha -> 0 gives Enneper-type


def deformation_data(kind, param: float, *, r: float = 1.0, beta: float = 1.0) -> WeierstrassFamily:
    kind = DeformationKind(kind)
    if kind is DeformationKind.TANH_PATH:
        return ws.deform_tanh(param)
    if kind is DeformationKind.POLAR_PATH:
        return ws.deform_polar(r, param)
    return ws.bonnet_type(param, beta)


def limit_data(kind, end: str = "", *, r: float = 1.0, beta: float = 1.0) -> tuple[Callable, Callable]:
    """(h, eta) callables of the limiting surface at one end of a path.

    For the polar path ``end`` is ``"theta0"`` (catenoid) or ``"theta_pi2"``
    (Enneper-type surface translated to z = 1/r).
    """
    kind = DeformationKind(kind)
    if kind is DeformationKind.TANH_PATH:
        F = ws.trivial_enneper(0.0)
        return (lambda z: ws.eval_h(F, z)), (lambda z: ws.eval_eta(F, z))
    if kind is DeformationKind.BONNET_ALPHA:
        F = ws.enneper_type(beta)
        return (lambda z: ws.eval_h(F, z)), (lambda z: ws.eval_eta(F, z))
    if end == "theta0":
        F = ws.catenoid(r)
        return (lambda z: ws.eval_h(F, z)), (lambda z: ws.eval_eta(F, z))
    if end == "theta_pi2":
        F = ws.enneper_type(r)
        shift = 1.0 / r
        return (lambda z: ws.eval_h(F, np.asarray(z) - shift)), (lambda z: ws.eval_eta(F, np.asarray(z) - shift))
    raise ValueError(f"unknown end {end!r} for the polar path (use 'theta0' or 'theta_pi2')")


class LimitRow(NamedTuple):
    param: float
    dev_h: float
    dev_eta: float


def limit_convergence_rate(kind, z, params, *, end: str = "", r: float = 1.0, beta: float = 1.0) -> list[LimitRow]:
    """Max deviation of (h, eta) from the limit data over the grid ``z`` per parameter."""
    z = np.asarray(z, dtype=complex)
    h_lim, eta_lim = limit_data(kind, end, r=r, beta=beta)
    H0, E0 = h_lim(z), eta_lim(z)
    rows = []
    for p in params:
        F = deformation_data(kind, p, r=r, beta=beta)
        rows.append(
            LimitRow(
                float(p),
                float(np.max(np.abs(ws.eval_h(F, z) - H0))),
                float(np.max(np.abs(ws.eval_eta(F, z) - E0))),
            )
        )
    return rows


def convergence_ratios(values) -> list[float]:
    v = list(values)
    return [b / a for a, b in zip(v, v[1:])]
