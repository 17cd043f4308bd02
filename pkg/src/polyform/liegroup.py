"""Three-dimensional Lie groups through structure constants, the left-invariant
exterior derivative, and curvature of left-invariant metrics.

Conventions: structure constants c[a, b, c] = c^a_{bc} are antisymmetric in
the last two slots and enter the Maurer-Cartan equation as
d eps^a = -1/2 c^a_{bc} eps^b ^ eps^c, equivalently [X_b, X_c] = c^a_{bc} X_a
for the dual frame.  Left-invariant k-forms are carried as coefficient arrays:
scalars, length-3 vectors, antisymmetric 3x3 matrices and the coefficient of
eps^1 ^ eps^2 ^ eps^3.
"""

from __future__ import annotations

import numpy as np

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS3[_i, _j, _k] = 1.0
    _EPS3[_i, _k, _j] = -1.0


class LieGroup3:
    """Simply connected 3D Lie group, identified by its structure constants."""

    def __init__(self, c, tag=None, tol=1e-12):
        c = np.asarray(c, dtype=float)
        if c.shape != (3, 3, 3):
            raise ValueError("structure constants must be a (3,3,3) array")
        if np.abs(c + np.transpose(c, (0, 2, 1))).max() > tol:
            raise ValueError("structure constants must be antisymmetric in the lower slots")
        jac = np.einsum("mbc,amd->abcd", c, c)
        jac = jac + np.transpose(jac, (0, 2, 3, 1)) + np.transpose(jac, (0, 3, 1, 2))
        if np.abs(jac).max() > tol:
            raise ValueError(f"Jacobi identity fails by {np.abs(jac).max():.3e}")
        self.c = c
        self.c.flags.writeable = False
        self.tag = tag

    def __repr__(self):
        return f"LieGroup3(tag={self.tag!r})"


def abelian_r3():
    return LieGroup3(np.zeros((3, 3, 3)), tag="R3")


def _c_from_pairs(pairs):
    """pairs: list of (a, b, c, value) with c^a_{bc} = value (antisymmetrized)."""
    c = np.zeros((3, 3, 3))
    for a, b, cc, v in pairs:
        c[a, b, cc] += v
        c[a, cc, b] -= v
    return c


def e11(a=1.0):
    """E(1,1): d eps^2 = a eps^2 ^ eps^1, d eps^3 = -a eps^3 ^ eps^1."""
    return LieGroup3(
        _c_from_pairs([(1, 0, 1, a), (2, 0, 2, -a)]), tag="E(1,1)"
    )


def tau2_r():
    """tau_2 (+) R: d eps^1 = -eps^1 ^ eps^2."""
    return LieGroup3(_c_from_pairs([(0, 0, 1, 1.0)]), tag="tau2+R")


def tau3_mu(mu):
    """tau_{3,mu}: d eps^1 = -eps^1 ^ eps^3, d eps^2 = -mu eps^2 ^ eps^3."""
    if not (-1.0 < mu <= 1.0) or mu == 0.0:
        raise ValueError("mu must lie in (-1, 1] minus 0")
    return LieGroup3(
        _c_from_pairs([(0, 0, 2, 1.0), (1, 1, 2, mu)]), tag=f"tau3,{mu}"
    )


def group_from_theta(theta, tol=1e-12):
    """Structure constants making (identity coframe, theta) a Cauchy pair.

    The constraint d e_a = Theta_ab e_b ^ e_u forces c^a_{bu} = -Theta_ab for
    b in {l, n}; the Jacobi identity reproduces the algebraic admissibility
    conditions on the shape operator.
    """
    theta = np.asarray(theta, dtype=float)
    pairs = []
    for a in range(3):
        for b in (1, 2):
            pairs.append((a, 0, b, theta[a, b]))
    return LieGroup3(_c_from_pairs(pairs), tag="from-theta", tol=max(tol, 1e-10))


CATALOG = {
    "R3": abelian_r3,
    "E(1,1)": e11,
    "tau2+R": tau2_r,
    "tau3,mu": tau3_mu,
}


# ---------------------------------------------------------------------------
# left-invariant exterior derivative
# ---------------------------------------------------------------------------

def d_leftinv(group, form):
    """Exterior derivative of a left-invariant form given by coefficients.

    Scalars (constants) map to zero one-forms, one-forms (length-3 arrays)
    to antisymmetric two-form matrices, two-forms to the top coefficient,
    top forms to zero.
    """
    form = np.asarray(form, dtype=float)
    if form.ndim == 0:
        return np.zeros(3)
    if form.shape == (3,):
        return -np.einsum("a,abc->bc", form, group.c)
    if form.shape == (3, 3):
        return float(-0.5 * np.einsum("amn,ab,mnb->", group.c, form, _EPS3))
    raise ValueError("unsupported form degree")


def wedge11(x, y):
    """Wedge of two left-invariant one-forms, as an antisymmetric matrix."""
    return np.outer(x, y) - np.outer(y, x)


# ---------------------------------------------------------------------------
# curvature of left-invariant metrics
# ---------------------------------------------------------------------------

def _frame_brackets(group, E):
    """f[c,a,b] with [X_a, X_b] = f[c,a,b] X_c for the frame dual to E."""
    E = np.asarray(E, dtype=float)
    G = np.linalg.inv(E).T
    return np.einsum("ai,bj,kij,ck->cab", G, G, group.c, E)


def levi_civita_coeffs(group, E):
    """Connection coefficients <nabla_{X_a} X_b, X_c> of the metric making the
    coframe rows of E orthonormal."""
    f = _frame_brackets(group, E)
    return 0.5 * (
        np.einsum("cab->abc", f) - np.einsum("abc->abc", f) + np.einsum("bca->abc", f)
    )


def riemann_leftinv(group, E):
    f = _frame_brackets(group, E)
    G = levi_civita_coeffs(group, E)
    R = (
        np.einsum("bcm,amd->abcd", G, G)
        - np.einsum("acm,bmd->abcd", G, G)
        - np.einsum("mab,mcd->abcd", f, G)
    )
    return R


def ricci_leftinv(group, E):
    """Ricci tensor in the orthonormal coframe basis."""
    if abs(np.linalg.det(E)) < 1e-14:
        raise ValueError("coframe matrix is singular")
    R = riemann_leftinv(group, E)
    return np.einsum("abca->bc", R)


def scalar_curvature_leftinv(group, E):
    """Scalar curvature of the left-invariant metric with orthonormal coframe E."""
    return float(np.trace(ricci_leftinv(group, E)))
