"""Minkowski (3,1) parabolic-pair and null-coframe calculus.

Mostly-plus signature with the timelike covector first, volume form
e^0 ^ e^1 ^ e^2 ^ e^3 and time orientation e^0.  Squares of irreducible real
spinors are polyforms u + u ^ l for a null u and a unit l orthogonal to u
(defined modulo l -> l + c u); a conjugate null covector v completes the pair
to a coframe (u, v, l, n) with n = -*(u ^ v ^ l), and the associated metric
is u (.) v + l (x) l + n (x) n.

Residual evaluators are provided for the torsion and skew-torsion exterior
differential systems on externally supplied coframe differentials.
"""

from __future__ import annotations

import numpy as np

from .kahler import (
    Multivector,
    QuadraticSpace,
    contract,
    det_inner,
    geometric_product,
    hodge,
    rotate,
    wedge,
)


class NotASquareError(ValueError):
    pass


class DegenerateZeroError(ValueError):
    pass


class MinkowskiSpace:
    """Four-dimensional mostly-plus Minkowski space with a time orientation."""

    def __init__(self):
        self.space = QuadraticSpace(3, 1)  # eta = (-1, +1, +1, +1)
        self.t_or = Multivector.basis(self.space, 0)

    def covector(self, components):
        return Multivector.covector(self.space, components)

    def basis(self, i):
        return Multivector.basis(self.space, i)

    def h(self, a, b):
        """Metric pairing of two grade-1 covectors."""
        return det_inner(a.grade(1), b.grade(1))

    def volume(self):
        return Multivector.volume(self.space)


DEFAULT_TOL = 1e-10


class ParabolicPair:
    """Null covector u plus a chosen unit representative l of [l]_u."""

    def __init__(self, mink, u, l, tol=DEFAULT_TOL):
        self.mink = mink
        self.u = u.grade(1)
        self.l = l.grade(1)
        if self.u.norm() < tol:
            raise DegenerateZeroError("u must be nonzero")
        checks = {
            "h(u,u)": mink.h(self.u, self.u),
            "h(u,l)": mink.h(self.u, self.l),
            "h(l,l)-1": mink.h(self.l, self.l) - 1.0,
        }
        bad = {k: v for k, v in checks.items() if abs(v) > tol * max(1.0, self.u.norm() ** 2)}
        if bad:
            raise ValueError(f"parabolic pair conditions violated: {bad}")

    def canonical(self):
        """Gauge-fix the representative l by removing its timelike projection."""
        t = self.mink.t_or
        c = -self.mink.h(self.l, t) / self.mink.h(self.u, t)
        return ParabolicPair(self.mink, self.u, self.l + c * self.u)

    def polyform(self):
        """The square u + u ^ l of the underlying spinor."""
        return self.u + wedge(self.u, self.l)


def square_to_pair(mink, alpha, tol=1e-9):
    """Extract the gauge-fixed parabolic pair of a spinor-square polyform.

    Raises NotASquareError when alpha fails the characterization (surviving
    grades {1,2}, null Dirac covector, decomposable two-form part with a unit
    orthogonal factor) and DegenerateZeroError on vanishing input.
    """
    scale = alpha.norm()
    if scale < tol:
        raise DegenerateZeroError("zero polyform")
    if alpha.max_grade_error({1, 2}) > tol * scale:
        raise NotASquareError("grades 0, 3, 4 must vanish")
    sq = geometric_product(alpha, alpha)
    if sq.norm() > tol * max(1.0, scale**2) * 10:
        raise NotASquareError("alpha <> alpha must vanish")
    u = alpha.grade(1)
    omega = alpha.grade(2)
    if u.norm() < tol * scale:
        raise NotASquareError("vanishing Dirac covector")
    if abs(mink.h(u, u)) > tol * max(1.0, scale**2):
        raise NotASquareError("Dirac covector is not null")
    hu_t = mink.h(u, mink.t_or)
    l = contract(mink.t_or, omega) * (1.0 / hu_t)
    try:
        pair = ParabolicPair(mink, u, l, tol=tol * max(1.0, scale))
    except ValueError as exc:
        raise NotASquareError(str(exc)) from exc
    if (wedge(u, l) - omega).norm() > tol * max(1.0, scale):
        raise NotASquareError("two-form part is not u ^ l")
    return pair


class NullCoframe:
    """Isotropic coframe (u, v, l, n): two null covectors pairing to one plus
    two orthonormal spacelike covectors, positively oriented."""

    def __init__(self, mink, u, v, l, n, tol=1e-9):
        self.mink = mink
        self.u, self.v, self.l, self.n = (x.grade(1) for x in (u, v, l, n))
        h = mink.h
        conds = {
            "h(u,u)": h(self.u, self.u),
            "h(v,v)": h(self.v, self.v),
            "h(u,v)-1": h(self.u, self.v) - 1.0,
            "h(l,l)-1": h(self.l, self.l) - 1.0,
            "h(n,n)-1": h(self.n, self.n) - 1.0,
            "h(u,l)": h(self.u, self.l),
            "h(u,n)": h(self.u, self.n),
            "h(v,l)": h(self.v, self.l),
            "h(v,n)": h(self.v, self.n),
            "h(l,n)": h(self.l, self.n),
        }
        bad = {k: val for k, val in conds.items() if abs(val) > tol}
        if bad:
            raise ValueError(f"null coframe conditions violated: {bad}")
        orient = wedge(wedge(self.u, self.v), wedge(self.l, self.n))
        if orient.coeffs[-1] <= 0.0:
            raise ValueError("coframe is not positively oriented")

    def covectors(self):
        return (self.u, self.v, self.l, self.n)

    def component_matrix(self):
        """Rows are the ambient components of (u, v, l, n)."""
        return np.array([x.covector_components() for x in self.covectors()])


def standard_coframe(mink):
    """Null adaptation of the orthonormal basis: u = e0+e1, v = (e1-e0)/2."""
    e = [mink.basis(i) for i in range(4)]
    return NullCoframe(mink, e[0] + e[1], 0.5 * (e[1] - e[0]), e[2], e[3])


def complete_coframe(mink, pair, v, tol=1e-9):
    """Extend a parabolic pair by a conjugate null covector v.

    The representative l is re-gauged to be orthogonal to v and n is fixed by
    n = -*(u ^ v ^ l), which also makes the coframe positively oriented.
    """
    v = v.grade(1)
    if abs(mink.h(v, v)) > tol or abs(mink.h(pair.u, v) - 1.0) > tol:
        raise ValueError("v must be null with h(u, v) = 1")
    l = pair.l + (-mink.h(pair.l, v)) * pair.u
    n = -1.0 * hodge(wedge(wedge(pair.u, v), l))
    return NullCoframe(mink, pair.u, v, l, n, tol=tol)


def gauge_act(mink, w, cf, tol=1e-9):
    """Torsor action of span(u,v)-orthogonal covectors on null coframes."""
    w = w.grade(1)
    if abs(mink.h(w, cf.u)) > tol or abs(mink.h(w, cf.v)) > tol:
        raise ValueError("gauge parameter must be orthogonal to span(u, v)")
    w2 = mink.h(w, w)
    return NullCoframe(
        mink,
        cf.u,
        cf.v - 0.5 * w2 * cf.u + w,
        cf.l - mink.h(w, cf.l) * cf.u,
        cf.n - mink.h(w, cf.n) * cf.u,
        tol=tol,
    )


def metric_of(cf):
    """Ambient 4x4 matrix of g = u (.) v + l (x) l + n (x) n."""
    u, v, l, n = (x.covector_components() for x in cf.covectors())
    return np.outer(u, v) + np.outer(v, u) + np.outer(l, l) + np.outer(n, n)


def stabilizer_element(mink, cf, c1, c2):
    """Element of the parabolic-pair stabilizer in SO_o(3,1), in the ambient
    basis acting on covector components.

    In the coframe basis the matrix has first row (1, -(c1^2+c2^2)/2, -c1, -c2)
    and shifts l by -c1 u, realizing the gauge transformations of [l]_u.
    """
    c1, c2 = float(c1), float(c2)
    I0 = np.array(
        [
            [1.0, -0.5 * (c1**2 + c2**2), -c1, -c2],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, c1, 1.0, 0.0],
            [0.0, c2, 0.0, 1.0],
        ]
    )
    F = cf.component_matrix()
    return F.T @ I0 @ np.linalg.inv(F.T)


def apply_covector_map(mink, T, a):
    """Push a polyform through a linear map on covector components."""
    return rotate(mink.space, T, a)


# ---------------------------------------------------------------------------
# torsion data
# ---------------------------------------------------------------------------

def _alt_part(A):
    return (A + np.transpose(A, (1, 2, 0)) + np.transpose(A, (2, 0, 1))) / 3.0


def _trace_part(eta, A):
    return np.einsum("m,mmj->j", eta, A)


class TorsionData:
    """Contorsion data xi + tau + H together with the auxiliary covectors
    kappa and rho of the torsion exterior system.

    tau is stored as a (4,4,4) array, covector slot first, antisymmetric in
    the last two slots; construction projects onto the cyclic-free and
    trace-free subspace.
    """

    def __init__(self, mink, xi=None, tau=None, H=None, kappa=None, rho=None):
        self.mink = mink
        zero1 = Multivector.zero(mink.space)
        self.xi = (xi or zero1).grade(1)
        self.kappa = (kappa or zero1).grade(1)
        self.rho = (rho or zero1).grade(1)
        self.H = (H or zero1).grade(3)
        raw = np.zeros((4, 4, 4)) if tau is None else np.asarray(tau, dtype=float)
        raw = 0.5 * (raw - np.transpose(raw, (0, 2, 1)))
        eta = mink.space.eta
        alt = _alt_part(raw)
        t = _trace_part(eta, raw - alt)
        emb = np.einsum("m,mi,j->mij", eta, np.eye(4), t) - np.einsum(
            "m,mj,i->mij", eta, np.eye(4), t
        )
        self.tau = raw - alt - emb / 3.0
        assert np.abs(_alt_part(self.tau)).max() < 1e-12
        assert np.abs(_trace_part(eta, self.tau)).max() < 1e-12

    def tau_contract(self, beta):
        """The two-form tau_beta, first slot contracted with the raised beta."""
        b = beta.covector_components() * self.mink.space.eta
        M = np.einsum("m,mij->ij", b, self.tau)
        out = Multivector.zero(self.mink.space)
        for i in range(4):
            for j in range(i + 1, 4):
                if M[i, j] != 0.0:
                    out = out + M[i, j] * wedge(
                        self.mink.basis(i), self.mink.basis(j)
                    )
        return out


def torsion_system_residual(cf, dcf, td):
    """Residual norms of the torsion exterior system.

    dcf maps each of "u","v","l","n" to the externally supplied 2-form du
    etc.  Returns a dict of coefficient norms of
        du - (H_u + xi^u - tau_u),
        dv - (H_v + xi^v - tau_v - kappa^l - rho^n),
        dl - (H_l + xi^l - tau_l + kappa^u),
        dn - (H_n + xi^n - tau_n + rho^u).
    """
    mink = cf.mink
    u, v, l, n = cf.covectors()

    def base(beta):
        return contract(beta, td.H) + wedge(td.xi, beta) - td.tau_contract(beta)

    rhs = {
        "u": base(u),
        "v": base(v) - wedge(td.kappa, l) - wedge(td.rho, n),
        "l": base(l) + wedge(td.kappa, u),
        "n": base(n) + wedge(td.rho, u),
    }
    return {k: (dcf[k].grade(2) - rhs[k]).norm() for k in ("u", "v", "l", "n")}


def skew_torsion_residual(cf, dcf, alpha, kappa=None, rho=None):
    """Residuals of the skew-torsion system du = *(alpha^u) etc., the H = *alpha
    specialization of the torsion system."""
    mink = cf.mink
    zero1 = Multivector.zero(mink.space)
    kappa = (kappa or zero1).grade(1)
    rho = (rho or zero1).grade(1)
    u, v, l, n = cf.covectors()
    rhs = {
        "u": hodge(wedge(alpha, u)),
        "v": hodge(wedge(alpha, v)) - wedge(kappa, l) - wedge(rho, n),
        "l": hodge(wedge(alpha, l)) + wedge(kappa, u),
        "n": hodge(wedge(alpha, n)) + wedge(rho, u),
    }
    return {k: (dcf[k].grade(2) - rhs[k]).norm() for k in ("u", "v", "l", "n")}
