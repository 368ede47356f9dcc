"""Weierstrass-type representation of zero mean curvature surfaces.

A surface is generated from a meromorphic ``h`` and a holomorphic one-form
``eta dz`` as ``X = Re int (h eta, eta, -i eta) dz`` in ``(l, x, y)``
coordinates.  The catalog below stores every family with the normalization
``eta = -1 / h'`` so that the Hopf coefficient ``eta h' / 2`` is exactly
``-1/2`` (or ``-i/2`` after conjugation).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

POLE_TOL = 1e-12


class PoleError(ValueError):
    """Raised when h is evaluated too close to one of its poles."""


class Tag(str, enum.Enum):
    PLANE = "plane"
    TRIVIAL_ENNEPER = "trivial_enneper"
    CATENOID = "catenoid"
    ENNEPER_TYPE = "enneper_type"
    BONNET_TYPE = "bonnet_type"
    DEFORM_TANH = "deform_tanh"
    DEFORM_POLAR = "deform_polar"


# eta-scale taking the canonical data to the listing (z, dz) / (e^z, e^{-z} dz)
_DISPLAY_SCALE = {Tag.TRIVIAL_ENNEPER: -1.0, Tag.CATENOID: -1.0}


@dataclass(frozen=True)
class WeierstrassFamily:
    """Immutable descriptor of one catalog family.

    Only the parameters relevant to ``tag`` are used: ``alpha`` for
    catenoid and the tanh path, ``beta`` for Enneper-type, both for
    Bonnet-type, ``(r, theta)`` for the polar path and ``c`` for the trivial
    Enneper surface.  ``reflected`` records the point reflection produced by
    conjugating twice; ``display`` switches to the sign used in the usual
    listing of the data.
    """

    tag: Tag
    alpha: float = 1.0
    beta: float = 1.0
    r: float = 1.0
    theta: float = math.pi / 4
    c: float = 0.0
    conjugated: bool = False
    reflected: bool = False
    display: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        t = self.tag
        if t in (Tag.CATENOID, Tag.BONNET_TYPE, Tag.DEFORM_TANH) and not self.alpha > 0:
            raise ValueError(f"{t.value}: alpha must be > 0, got {self.alpha}")
        if t in (Tag.ENNEPER_TYPE, Tag.BONNET_TYPE) and not self.beta > 0:
            raise ValueError(f"{t.value}: beta must be > 0, got {self.beta}")
        if t is Tag.DEFORM_POLAR:
            if not self.r > 0:
                raise ValueError(f"deform_polar: r must be > 0, got {self.r}")
            if not 0.0 < self.theta < math.pi / 2:
                raise ValueError(f"deform_polar: theta must lie in (0, pi/2), got {self.theta}")
        if not math.isfinite(self.c):
            raise ValueError("c must be finite")

    @property
    def eta_scale(self) -> complex:
        k = 1j if self.conjugated else 1.0 + 0j
        if self.reflected:
            k = -k
        if self.display:
            k *= _DISPLAY_SCALE.get(self.tag, 1.0)
        return k

    @property
    def params(self) -> dict:
        keys = {
            Tag.PLANE: (),
            Tag.TRIVIAL_ENNEPER: ("c",),
            Tag.CATENOID: ("alpha",),
            Tag.ENNEPER_TYPE: ("beta",),
            Tag.BONNET_TYPE: ("alpha", "beta"),
            Tag.DEFORM_TANH: ("alpha",),
            Tag.DEFORM_POLAR: ("r", "theta"),
        }[self.tag]
        return {k: getattr(self, k) for k in keys}

    def label(self) -> str:
        p = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        flags = "".join(
            s for s, on in (("*", self.conjugated), ("-", self.reflected), ("d", self.display)) if on
        )
        return f"{self.tag.value}({p}){flags}"


def plane() -> WeierstrassFamily:
    return WeierstrassFamily(Tag.PLANE)


def trivial_enneper(c: float = 0.0) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.TRIVIAL_ENNEPER, c=c)


def catenoid(alpha: float = 1.0) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.CATENOID, alpha=alpha)


def enneper_type(beta: float = 2.0) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.ENNEPER_TYPE, beta=beta)


def bonnet_type(alpha: float = 1.0, beta: float = 1.0) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.BONNET_TYPE, alpha=alpha, beta=beta)


def deform_tanh(alpha: float = 1.0) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.DEFORM_TANH, alpha=alpha)


def deform_polar(r: float = 1.0, theta: float = math.pi / 4) -> WeierstrassFamily:
    return WeierstrassFamily(Tag.DEFORM_POLAR, r=r, theta=theta)


def helicoid(alpha: float = 1.0) -> WeierstrassFamily:
    return conjugate(catenoid(alpha))


def thomsen_type(alpha: float = 1.0, beta: float = 1.0) -> WeierstrassFamily:
    return conjugate(bonnet_type(alpha, beta))


def conjugate(F: WeierstrassFamily) -> WeierstrassFamily:
    """(h, eta) -> (h, i eta); twice gives (h, -eta), kept as a reflection flag."""
    if F.conjugated:
        return replace(F, conjugated=False, reflected=not F.reflected)
    return replace(F, conjugated=True)


def canonical(F: WeierstrassFamily) -> WeierstrassFamily:
    """Strip conjugation, reflection and display flags."""
    return replace(F, conjugated=False, reflected=False, display=False)


class _Data(NamedTuple):
    h: np.ndarray
    dh: np.ndarray
    eta: np.ndarray
    deta: np.ndarray
    heta: np.ndarray
    dheta: np.ndarray


def _pole_guard(F, denom, what):
    if np.any(np.abs(denom) < POLE_TOL):
        raise PoleError(f"{F.label()}: z too close to a pole of h ({what})")


def _polar_consts(F):
    a = F.r * math.cos(F.theta)
    return a, math.cos(F.theta), math.sin(F.theta), np.exp(2j * F.theta)


def _h_pair(F, z):
    t = F.tag
    if t is Tag.PLANE:
        zero = np.zeros_like(z)
        return zero, zero
    if t is Tag.TRIVIAL_ENNEPER:
        k = math.exp(F.c)
        return k * z, np.full_like(z, k)
    if t is Tag.CATENOID:
        e = np.exp(F.alpha * z)
        return e, F.alpha * e
    if t is Tag.ENNEPER_TYPE:
        _pole_guard(F, z, "z = 0")
        return 2.0 / (F.beta * z), -2.0 / (F.beta * z * z)
    if t is Tag.BONNET_TYPE:
        a, b = F.alpha, F.beta
        s = np.sinh(0.5 * a * z)
        _pole_guard(F, s, "sinh(alpha z / 2) = 0")
        return (a / b) * np.cosh(0.5 * a * z) / s, -(a * a / (2.0 * b)) / (s * s)
    if t is Tag.DEFORM_TANH:
        a = F.alpha
        ch = np.cosh(0.5 * a * z)
        _pole_guard(F, ch, "cosh(alpha z / 2) = 0")
        return (2.0 / a) * np.sinh(0.5 * a * z) / ch, 1.0 / (ch * ch)
    if t is Tag.DEFORM_POLAR:
        a, c, s, ph = _polar_consts(F)
        E = np.exp(-a * z)
        D = E * (1.0 + c) - s
        _pole_guard(F, D, "denominator")
        return 2.0 * ph * c / D, 2.0 * ph * c * a * (1.0 + c) * E / (D * D)
    raise AssertionError(t)


def _eta_parts(F, z):
    """Canonical (eta, eta', h*eta, (h*eta)') in cancelled closed form."""
    t = F.tag
    one = np.ones_like(z)
    zero = np.zeros_like(z)
    if t is Tag.PLANE:
        return one, zero, zero, zero
    if t is Tag.TRIVIAL_ENNEPER:
        return -math.exp(-F.c) * one, zero, -z, -one
    if t is Tag.CATENOID:
        a = F.alpha
        e = np.exp(-a * z)
        return -e / a, e, -one / a, zero
    if t is Tag.ENNEPER_TYPE:
        b = F.beta
        return 0.5 * b * z * z, b * z, z, one
    if t is Tag.BONNET_TYPE:
        a, b = F.alpha, F.beta
        s = np.sinh(0.5 * a * z)
        return (2.0 * b / (a * a)) * s * s, (b / a) * np.sinh(a * z), np.sinh(a * z) / a, np.cosh(a * z)
    if t is Tag.DEFORM_TANH:
        a = F.alpha
        ch = np.cosh(0.5 * a * z)
        return -ch * ch, -0.5 * a * np.sinh(a * z), -np.sinh(a * z) / a, -np.cosh(a * z)
    if t is Tag.DEFORM_POLAR:
        a, c, s, ph = _polar_consts(F)
        sh, chh = np.sinh(a * z), np.cosh(a * z)
        eta = (c * sh - chh + s) / (F.r * c * c) / ph
        deta = (c * chh - sh) / c / ph
        ea = np.exp(a * z)
        return eta, deta, (s * ea - (1.0 + c)) / (a * (1.0 + c)), s * ea / (1.0 + c)
    raise AssertionError(t)


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _out(x, z):
    return complex(x) if np.ndim(z) == 0 else x


def eval_h(F: WeierstrassFamily, z):
    z = _as_complex(z)
    return _out(_h_pair(F, z)[0], z)


def eval_dh(F: WeierstrassFamily, z):
    z = _as_complex(z)
    return _out(_h_pair(F, z)[1], z)


def eval_eta(F: WeierstrassFamily, z):
    """Coefficient of dz, including the conjugation / reflection factor."""
    z = _as_complex(z)
    return _out(F.eta_scale * _eta_parts(F, z)[0], z)


def eval_deta(F: WeierstrassFamily, z):
    z = _as_complex(z)
    return _out(F.eta_scale * _eta_parts(F, z)[1], z)


def _integrand(F, z, derivative=False):
    z = _as_complex(z)
    eta, deta, heta, dheta = _eta_parts(F, z)
    k = F.eta_scale
    if derivative:
        e, he = k * deta, k * dheta
    else:
        e, he = k * eta, k * heta
    W = np.stack([he, e, -1j * e], axis=-1)
    if not np.all(np.isfinite(W)):
        raise FloatingPointError(f"{F.label()}: non-finite integrand")
    return W


def eval_integrand(F: WeierstrassFamily, z):
    """(h eta, eta, -i eta) with the product taken in closed form (entire)."""
    return _integrand(F, z)


def eval_integrand_derivative(F: WeierstrassFamily, z):
    return _integrand(F, z, derivative=True)


@dataclass(frozen=True)
class QuadratureConfig:
    base_point: complex = 0j
    panels: int = 8
    order: int = 16

    def __post_init__(self):
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if self.order < 2:
            raise ValueError("Gauss-Legendre order must be >= 2")

    def nodes(self):
        """Composite Gauss-Legendre nodes and weights on [0, 1]."""
        x, w = np.polynomial.legendre.leggauss(self.order)
        p = np.arange(self.panels)[:, None]
        t = (p + 0.5 * (x + 1.0)) / self.panels
        return t.ravel(), np.tile(w / (2.0 * self.panels), self.panels)


DEFAULT_QUADRATURE = QuadratureConfig()


def integrate_segment(F: WeierstrassFamily, a, b, Q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Complex integral of the integrand along straight segments a -> b (broadcast)."""
    a = _as_complex(a)
    b = _as_complex(b)
    a, b = np.broadcast_arrays(a, b)
    t, w = Q.nodes()
    d = b - a
    zeta = a[..., None] + t * d[..., None]
    W = _integrand(F, zeta)
    return np.einsum("...nk,n->...k", W, w) * d[..., None]


def integrate_surface(F: WeierstrassFamily, z, Q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Surface point(s) X(z) = Re int_{z0}^{z}; returns (..., 3) in (l, x, y)."""
    return integrate_segment(F, Q.base_point, z, Q).real


def integrate_polyline(F: WeierstrassFamily, vertices, Q: QuadratureConfig = DEFAULT_QUADRATURE):
    """Re of the integral along a polyline of complex vertices."""
    v = _as_complex(vertices)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("polyline needs at least two vertices")
    return integrate_segment(F, v[:-1], v[1:], Q).sum(axis=0).real


def path_independence_check(F: WeierstrassFamily, path_a, path_b, Q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Max coordinate difference between integrals along two polylines with shared ends."""
    a = _as_complex(path_a)
    b = _as_complex(path_b)
    if abs(a[0] - b[0]) > 1e-14 or abs(a[-1] - b[-1]) > 1e-14:
        raise ValueError("paths must share endpoints")
    return float(np.max(np.abs(integrate_polyline(F, a, Q) - integrate_polyline(F, b, Q))))


def gauss_map_from_h(h):
    """Lightlike Gauss map -(1 + |h|^2, 2 Re h, -2 Im h, -1 + |h|^2) / 2."""
    h = _as_complex(h)
    m = (h * np.conj(h)).real
    return -0.5 * np.stack([1.0 + m, 2.0 * h.real, -2.0 * h.imag, m - 1.0], axis=-1)


def metric_factor(F: WeierstrassFamily, z):
    """|eta|, i.e. the conformal factor e^omega of ds^2 = |eta|^2 |dz|^2."""
    z = _as_complex(z)
    m = np.abs(F.eta_scale * _eta_parts(F, z)[0])
    return float(m) if np.ndim(z) == 0 else m


def hopf_coefficient(F: WeierstrassFamily, z):
    """Q = eta h' / 2."""
    z = _as_complex(z)
    return _out(0.5 * F.eta_scale * _eta_parts(F, z)[0] * _h_pair(F, z)[1], z)


def modulus_squared(F: WeierstrassFamily, a, b):
    """Real-analytic closed form of |eta(a + ib)|^2; accepts complex a, b."""
    t = F.tag
    a = _as_complex(a)
    b = _as_complex(b)
    if t is Tag.PLANE:
        return np.ones_like(a + b)
    if t is Tag.TRIVIAL_ENNEPER:
        return math.exp(-2.0 * F.c) * np.ones_like(a + b)
    if t is Tag.CATENOID:
        al = F.alpha
        return np.exp(-2.0 * al * a) / al**2 + 0 * b
    if t is Tag.ENNEPER_TYPE:
        return 0.25 * F.beta**2 * (a * a + b * b) ** 2
    if t is Tag.BONNET_TYPE:
        al, be = F.alpha, F.beta
        return (be / al**2) ** 2 * (np.cosh(al * a) - np.cos(al * b)) ** 2
    if t is Tag.DEFORM_TANH:
        al = F.alpha
        return 0.25 * (np.cosh(al * a) + np.cos(al * b)) ** 2
    if t is Tag.DEFORM_POLAR:
        al = F.r * math.cos(F.theta)
        be = F.r * math.sin(F.theta)
        return ((al * np.sinh(al * a) - F.r * np.cosh(al * a) + be * np.cos(al * b)) / al**2) ** 2
    raise AssertionError(t)


def recover_eta_from_modulus(F: WeierstrassFamily, z0, z, phase: float = 0.0):
    """Rebuild eta from its modulus, fixing eta(z0) = e^{i phase} |eta(z0)|.

    The result agrees with ``eval_eta(F, z)`` up to one unit-modulus constant.
    """
    z0 = complex(z0)
    R0 = math.sqrt(abs(complex(modulus_squared(F, z0.real, z0.imag))))
    if R0 < POLE_TOL:
        raise ValueError(f"{F.label()}: eta vanishes at base point {z0}; choose another")
    eta0 = np.exp(1j * phase) * R0
    z = _as_complex(z)
    w = modulus_squared(F, 0.5 * (z + np.conj(z0)), (z - np.conj(z0)) / 2j) / np.conj(eta0)
    return _out(w, z)


def singular_points(F: WeierstrassFamily, u_range, v_range, pad: float = 0.0) -> list[complex]:
    """Zeros of eta (poles of h) inside the closed rectangle, padded by ``pad``."""
    u0, u1 = u_range[0] - pad, u_range[1] + pad
    v0, v1 = v_range[0] - pad, v_range[1] + pad
    t = F.tag
    if t is Tag.ENNEPER_TYPE:
        base, period = 0.0, None
    elif t is Tag.BONNET_TYPE:
        base, period = 0.0, 2 * math.pi / F.alpha
    elif t is Tag.DEFORM_TANH:
        base, period = 1j * math.pi / F.alpha, 2 * math.pi / F.alpha
    elif t is Tag.DEFORM_POLAR:
        a, c, s, _ = _polar_consts(F)
        base, period = math.log((1.0 + c) / s) / a + 0j, 2 * math.pi / a
    else:
        return []
    base = complex(base)
    if not u0 <= base.real <= u1:
        return []
    if period is None:
        return [base] if v0 <= base.imag <= v1 else []
    k0 = math.ceil((v0 - base.imag) / period)
    k1 = math.floor((v1 - base.imag) / period)
    return [complex(base.real, base.imag + k * period) for k in range(k0, k1 + 1)]
