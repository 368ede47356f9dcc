"""Minkowski 4-space model of isotropic 3-space.

Points of isotropic space are stored in coordinates ``(l, x, y)`` where ``l``
is the vertical (null) direction.  They embed into R^{3,1} as
``(l, x, y, l)``, i.e. the orthogonal complement of the lightlike vector
``P = (1, 0, 0, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRAM = np.diag([-1.0, 1.0, 1.0, 1.0])
P = np.array([1.0, 0.0, 0.0, 1.0])
P_TILDE = 0.5 * np.array([-1.0, 0.0, 0.0, 1.0])
E1 = np.array([0.0, 1.0, 0.0, 0.0])
E2 = np.array([0.0, 0.0, 1.0, 0.0])
ORIGIN = np.zeros(3)
# vertical direction of isotropic space in (l, x, y) coordinates; embeds to P
VERTICAL = np.array([1.0, 0.0, 0.0])

ISOMETRY_TOL = 1e-10


def minkowski_form(X, Y):
    """Bilinear form of signature (-+++), broadcast over leading axes."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return -X[..., 0] * Y[..., 0] + X[..., 1] * Y[..., 1] + X[..., 2] * Y[..., 2] + X[..., 3] * Y[..., 3]


def iso_inner(U, V):
    """Degenerate inner product dx^2 + dy^2 on tangent vectors (l, x, y)."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    return U[..., 1] * V[..., 1] + U[..., 2] * V[..., 2]


def embed(X):
    """(l, x, y) -> (l, x, y, l)."""
    X = np.asarray(X, dtype=float)
    return np.stack([X[..., 0], X[..., 1], X[..., 2], X[..., 0]], axis=-1)


def project(Y, tol: float = 1e-12):
    """Inverse of :func:`embed`; rejects vectors off the hyperplane <Y, P> = 0."""
    Y = np.asarray(Y, dtype=float)
    off = np.abs(minkowski_form(Y, P))
    scale = max(1.0, float(np.max(np.abs(Y), initial=0.0)))
    if np.any(off > tol * scale):
        raise ValueError(f"vector not in isotropic space: |<Y, p>| = {float(np.max(off)):.3e}")
    return Y[..., :3].copy()


def is_lightlike(X, tol: float = 0.0) -> bool:
    return bool(np.all(np.abs(minkowski_form(X, X)) <= tol))


@dataclass(frozen=True)
class PlaneCarrier:
    """Plane {x : <x, m> = q} of isotropic space, m lightlike with <m, P> = 1."""

    m: np.ndarray
    q: float = 0.0

    @classmethod
    def normalized(cls, m, q: float = 0.0) -> "PlaneCarrier":
        m = np.asarray(m, dtype=float)
        s = minkowski_form(m, P)
        if abs(s) < 1e-14:
            raise ValueError("carrier vector is orthogonal to p; cannot normalize")
        return cls(m / s, q / s)

    def offset(self, X):
        """<embed(X), m>; constant along any curve lying in a parallel plane."""
        return minkowski_form(embed(X), self.m)

    def contains(self, X, tol: float = 1e-10) -> bool:
        return bool(np.all(np.abs(self.offset(X) - self.q) <= tol))


@dataclass(frozen=True)
class Isometry4:
    """Linear isometry of R^{3,1} together with a parabolic radius."""

    matrix: np.ndarray
    radius: float = 0.0
    name: str = field(default="", compare=False)

    def form_defect(self) -> float:
        A = self.matrix
        return float(np.max(np.abs(A.T @ GRAM @ A - GRAM)))

    def fixes_p(self, tol: float = ISOMETRY_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix @ P - P)) <= tol)

    def is_isometry(self, tol: float = ISOMETRY_TOL) -> bool:
        return self.form_defect() <= tol

    def with_radius(self, r: float) -> "Isometry4":
        return Isometry4(self.matrix, float(r), self.name)

    def __call__(self, X):
        return parabolic_action(self, self.radius, X)


def parabolic_rotation_e1(v: float) -> Isometry4:
    """Parabolic rotations fixing e1 = (0, 1, 0, 0)."""
    h = 0.5 * v * v
    A = np.array(
        [
            [1.0 + h, 0.0, v, -h],
            [0.0, 1.0, 0.0, 0.0],
            [-v, 0.0, -1.0, v],
            [h, 0.0, v, 1.0 - h],
        ]
    )
    return Isometry4(A, name=f"P_e1({v})")


def parabolic_rotation_e2(u: float) -> Isometry4:
    """Parabolic rotations fixing e2 = (0, 0, 1, 0)."""
    h = 0.5 * u * u
    A = np.array(
        [
            [1.0 + h, -u, 0.0, -h],
            [u, -1.0, 0.0, -u],
            [0.0, 0.0, 1.0, 0.0],
            [h, -u, 0.0, 1.0 - h],
        ]
    )
    return Isometry4(A, name=f"P_e2({u})")


def parabolic_action(A: Isometry4, r: float, X):
    """X -> A(X + r p~) - r p~ on points (l, x, y) of isotropic space."""
    if not A.fixes_p():
        raise ValueError(f"isometry {A.name or ''} does not fix p; action leaves isotropic space")
    shift = r * P_TILDE
    Y = (embed(X) + shift) @ A.matrix.T - shift
    return project(Y, tol=1e-9)


def enneper_by_rotations(u, v):
    """Trivial Enneper surface generated from the origin by two parabolic rotations."""
    return parabolic_action(parabolic_rotation_e2(u), 1.0, parabolic_action(parabolic_rotation_e1(v), -1.0, ORIGIN))
