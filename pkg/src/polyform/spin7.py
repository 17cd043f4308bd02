"""Self-dual 4-form calculus on Euclidean R^8: the Cayley form, the double
contraction operator, the algebraic conformal-Spin(7) criterion with its cubic
potential, metric deformations and a numerical critical-point finder.

Four-forms are carried either as multivectors on the (8,0) quadratic space or
as coordinate vectors in a fixed orthonormal basis of the 35-dimensional
self-dual subspace; the optimizer state lives entirely in the latter, which
enforces self-duality exactly.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .kahler import (
    Multivector,
    QuadraticSpace,
    blade_indices,
    blade_mask,
    det_inner,
    geometric_product,
    hodge,
    wedge,
)
from . import clifford

SQRT14 = np.sqrt(14.0)

_R8 = QuadraticSpace(8, 0)


def euclidean8():
    """The shared (8,0) quadratic space."""
    return _R8


class Euclidean8:
    """Oriented Euclidean metric on R^8, default the identity matrix."""

    def __init__(self, h=None):
        h = np.eye(8) if h is None else np.asarray(h, dtype=float)
        if h.shape != (8, 8) or np.max(np.abs(h - h.T)) > 1e-12:
            raise ValueError("metric must be a symmetric 8x8 matrix")
        np.linalg.cholesky(h)  # positive definiteness gate
        self.h = h
        self.h_inv = np.linalg.inv(h)

    @property
    def is_standard(self):
        return bool(np.allclose(self.h, np.eye(8)))


# ---------------------------------------------------------------------------
# tensor <-> multivector plumbing for 4-forms
# ---------------------------------------------------------------------------

_COMBOS4 = list(combinations(range(8), 4))
_PERMS4 = []
for _perm in __import__("itertools").permutations(range(4)):
    _sign = 1.0
    _p = list(_perm)
    for _i in range(4):
        for _j in range(_i + 1, 4):
            if _p[_i] > _p[_j]:
                _sign = -_sign
    _PERMS4.append((_perm, _sign))


def mv4_to_tensor(a):
    """Antisymmetric component tensor of a grade-4 multivector."""
    T = np.zeros((8, 8, 8, 8))
    for combo in _COMBOS4:
        c = a.coeffs[blade_mask(combo)]
        if c == 0.0:
            continue
        for perm, sign in _PERMS4:
            T[tuple(combo[k] for k in perm)] = sign * c
    return T


def tensor_to_mv4(T):
    """Grade-4 multivector with blade coefficients summed over index orderings.

    This realizes T_ijkl v^i^v^j^v^k^v^l for a general (not necessarily
    antisymmetric) coefficient tensor, as in the double contraction formula.
    """
    coeffs = np.zeros(_R8.n_blades)
    for combo in _COMBOS4:
        total = 0.0
        for perm, sign in _PERMS4:
            total += sign * T[tuple(combo[k] for k in perm)]
        coeffs[blade_mask(combo)] = total
    return Multivector(_R8, coeffs)


def antisym_tensor_to_mv4(T):
    """Grade-4 multivector whose blade coefficients are the sorted components
    of an already antisymmetric tensor (inverse of mv4_to_tensor)."""
    coeffs = np.zeros(_R8.n_blades)
    for combo in _COMBOS4:
        coeffs[blade_mask(combo)] = T[combo]
    return Multivector(_R8, coeffs)


def raise4(T, h_inv):
    return np.einsum(
        "im,jn,kp,lq,mnpq->ijkl", h_inv, h_inv, h_inv, h_inv, T, optimize=True
    )


def inner4(A, B, h_inv=None):
    """Determinant inner product of two 4-form tensors under a metric."""
    if h_inv is None:
        return float(np.einsum("ijkl,ijkl->", A, B)) / 24.0
    return float(np.einsum("ijkl,ijkl->", A, raise4(B, h_inv))) / 24.0


# ---------------------------------------------------------------------------
# self-dual basis
# ---------------------------------------------------------------------------

class SelfDualBasis:
    """Orthonormal blade-pair basis {(b + *b)/sqrt2} of the 35 self-dual 4-forms."""

    def __init__(self):
        cols = []
        legend = []
        seen = set()
        for combo in _COMBOS4:
            mask = blade_mask(combo)
            comp = (_R8.n_blades - 1) ^ mask
            if comp in seen:
                continue
            seen.add(mask)
            b = Multivector.blade(_R8, combo)
            v = (b + hodge(b)) * (1.0 / np.sqrt(2.0))
            cols.append(v.coeffs)
            legend.append(combo)
        self.matrix = np.array(cols).T  # (256, 35)
        self.legend = legend

    def to_vec(self, a):
        """Orthogonal projection of a multivector onto the self-dual coordinates."""
        return self.matrix.T @ a.coeffs

    def from_vec(self, x):
        return Multivector(_R8, self.matrix @ np.asarray(x, dtype=float))

    def antiselfdual_defect(self, a):
        return float(np.linalg.norm(a.grade(4).coeffs - self.matrix @ self.to_vec(a)))


_BASIS = SelfDualBasis()


def selfdual_basis():
    return _BASIS


class SelfDual4Form:
    """Grade-4 multivector on R^8 flagged (anti-)self-dual for the flat metric."""

    def __init__(self, phi, dual_sign=+1, check=True, tol=1e-9):
        if phi.space != _R8:
            raise ValueError("expected a multivector on the (8,0) space")
        if phi.max_grade_error({4}) > tol:
            raise ValueError("expected a homogeneous 4-form")
        self.phi = phi.grade(4)
        self.dual_sign = dual_sign
        if check:
            defect = (hodge(self.phi) - dual_sign * self.phi).norm()
            if defect > tol * max(1.0, self.phi.norm()):
                raise ValueError(f"form is not (anti-)self-dual: defect {defect:.3e}")

    @staticmethod
    def from_vec(x):
        return SelfDual4Form(_BASIS.from_vec(x), check=False)

    def vec(self):
        return _BASIS.to_vec(self.phi)

    def norm(self):
        return float(np.sqrt(max(det_inner(self.phi, self.phi), 0.0)))

    def __repr__(self):
        return f"SelfDual4Form(|phi|={self.norm():.6g})"


def cayley_form():
    """The canonical Cayley 4-form; coefficients +-1 on fourteen blades.

    Sign convention: the overall sign is fixed so that the form is the
    spinor bilinear of a positive-chirality unit spinor, equivalently so
    that it satisfies the double contraction identity
    Phi_ijab Phi_klab = 6 d_ik d_jl - 6 d_il d_jk - 4 Phi_ijkl and hence
    Phi Delta_2 Phi = -12 Phi.  The frequently quoted fourteen-term list
    with +e^1234 is the negative of this form.
    """
    terms = [
        (-1, (1, 2, 3, 4)), (-1, (1, 2, 5, 6)), (-1, (1, 2, 7, 8)),
        (-1, (1, 3, 5, 7)), (+1, (1, 3, 6, 8)), (+1, (1, 4, 5, 8)),
        (+1, (1, 4, 6, 7)), (-1, (5, 6, 7, 8)), (-1, (3, 4, 7, 8)),
        (-1, (3, 4, 5, 6)), (-1, (2, 4, 6, 8)), (+1, (2, 4, 5, 7)),
        (+1, (2, 3, 5, 8)), (+1, (2, 3, 6, 7)),
    ]
    coeffs = np.zeros(_R8.n_blades)
    for sign, idx in terms:
        coeffs[blade_mask(tuple(i - 1 for i in idx))] = float(sign)
    return SelfDual4Form(Multivector(_R8, coeffs))


# ---------------------------------------------------------------------------
# the double contraction operator
# ---------------------------------------------------------------------------

def _as_mv4(x):
    if isinstance(x, SelfDual4Form):
        return x.phi
    return x.grade(4)


def delta2(phi, omega, metric=None):
    """Double contraction Phi Delta_2 omega of two 4-forms, as a 4-form.

    Index formula (1/8) Phi_ijmn omega^mn_kl v^i^v^j^v^k^v^l; indices raised
    with the inverse of `metric` (identity by default).
    """
    P = mv4_to_tensor(_as_mv4(phi))
    O = mv4_to_tensor(_as_mv4(omega))
    if metric is not None and not metric.is_standard:
        O_raised = np.einsum("ma,nb,abkl->mnkl", metric.h_inv, metric.h_inv, O)
    else:
        O_raised = O
    T = np.einsum("ijmn,mnkl->ijkl", P, O_raised) / 8.0
    return tensor_to_mv4(T)


def lambda_op(phi, omega, metric=None):
    """The operator Lambda_Phi = 2 Phi Delta_2."""
    return 2.0 * delta2(phi, omega, metric=metric)


def delta2_matrix(phi):
    """Matrix of q -> Phi Delta_2 q restricted to the self-dual subspace."""
    cols = []
    for j in range(35):
        q = _BASIS.from_vec(np.eye(35)[j])
        cols.append(_BASIS.to_vec(delta2(phi, q)))
    return np.array(cols).T


def delta2_cubic_tensor(phi_basis=_BASIS):
    """Symmetric 3-tensor C[a,b,c] = <Phi_a Delta_2 Phi_b, Phi_c> on the 35 basis."""
    C = np.zeros((35, 35, 35))
    basis_mvs = [phi_basis.from_vec(np.eye(35)[i]) for i in range(35)]
    for a in range(35):
        for b in range(a, 35):
            v = delta2(basis_mvs[a], basis_mvs[b])
            row = np.array([det_inner(v, basis_mvs[c]) for c in range(35)])
            C[a, b] = row
            C[b, a] = row
    return C


_C3 = None


def _cubic():
    global _C3
    if _C3 is None:
        _C3 = delta2_cubic_tensor()
    return _C3


# ---------------------------------------------------------------------------
# criterion, potential, derivatives
# ---------------------------------------------------------------------------

class Spin7Certificate:
    """Residual record of the algebraic conformal-Spin(7) test."""

    def __init__(self, residual, selfdual_defect, norm, tol, degenerate=False):
        self.residual = float(residual)
        self.selfdual_defect = float(selfdual_defect)
        self.norm = float(norm)
        self.tol = float(tol)
        self.degenerate = bool(degenerate)
        scale = max(self.norm**2, 1e-30)
        self.is_conformal = bool(
            (not degenerate)
            and self.residual <= tol * scale
            and self.selfdual_defect <= tol * max(1.0, self.norm)
        )
        self.conformal_constant = float(14.0 ** (-0.25) * np.sqrt(self.norm)) if self.norm > 0 else 0.0
        self.is_metric = bool(self.is_conformal and abs(self.norm - SQRT14) <= tol * SQRT14)

    def to_dict(self):
        return {
            "residual": self.residual,
            "selfdual_defect": self.selfdual_defect,
            "norm": self.norm,
            "conformal_constant": self.conformal_constant,
            "is_conformal": self.is_conformal,
            "is_metric": self.is_metric,
            "degenerate": self.degenerate,
            "tol": self.tol,
        }

    def __repr__(self):
        tag = "degenerate" if self.degenerate else (
            "metric" if self.is_metric else ("conformal" if self.is_conformal else "not-spin7")
        )
        return f"Spin7Certificate({tag}, residual={self.residual:.3e}, |phi|={self.norm:.6g})"


def is_conformal_spin7(phi, metric=None, tol=1e-9):
    """Certificate for sqrt14 Phi Delta_2 Phi + 12 |Phi| Phi = 0 plus self-duality."""
    mv = _as_mv4(phi)
    if metric is None or metric.is_standard:
        norm = np.sqrt(max(det_inner(mv, mv), 0.0))
        if norm < 1e-14:
            return Spin7Certificate(0.0, 0.0, 0.0, tol, degenerate=True)
        resid_mv = SQRT14 * delta2(mv, mv) + 12.0 * norm * mv
        residual = np.sqrt(max(det_inner(resid_mv, resid_mv), 0.0))
        defect = (hodge(mv) - mv).norm()
        return Spin7Certificate(residual, defect, norm, tol)
    # general metric: index formulas plus the complement star
    P = mv4_to_tensor(mv)
    norm2 = inner4(P, P, metric.h_inv)
    if norm2 < 1e-28:
        return Spin7Certificate(0.0, 0.0, 0.0, tol, degenerate=True)
    norm = np.sqrt(norm2)
    O_r = raise4(P, metric.h_inv)
    T = np.einsum("ijmn,mnkl->ijkl", P, O_r) / 8.0
    D = np.zeros_like(T)
    for combo in _COMBOS4:
        total = 0.0
        for perm, sign in _PERMS4:
            total += sign * T[tuple(combo[k] for k in perm)]
        for perm, sign in _PERMS4:
            D[tuple(combo[k] for k in perm)] = sign * total
    R = SQRT14 * D + 12.0 * norm * P
    residual = np.sqrt(max(inner4(R, R, metric.h_inv), 0.0))
    S = star4_general(metric, P)
    defect = np.sqrt(max(inner4(S - P, S - P, metric.h_inv), 0.0))
    return Spin7Certificate(residual, defect, norm, tol)


def star4_general(metric, T):
    """Hodge star on 4-form tensors for an arbitrary Euclidean metric."""
    root_det = np.sqrt(np.linalg.det(metric.h))
    R = raise4(T, metric.h_inv)
    out = np.zeros_like(T)
    for combo in _COMBOS4:
        comp = tuple(i for i in range(8) if i not in combo)
        sign = _perm_sign(combo + comp)
        val = root_det * sign * R[comp]
        for perm, psign in _PERMS4:
            out[tuple(combo[k] for k in perm)] = psign * val
    return out


def _perm_sign(seq):
    s = 1.0
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def potential_W(phi, via="diamond"):
    """Cubic potential on self-dual forms; its critical points are the
    conformal Spin(7) forms and it vanishes there.

    `via` selects the geometric-product expression or the equivalent double
    contraction expression; both are exposed so tests can cross-check them.
    """
    mv = _as_mv4(phi)
    nrm2 = det_inner(mv, mv)
    if via == "diamond":
        cubic = -det_inner(geometric_product(mv, mv).grade(4), mv)
    elif via == "delta2":
        cubic = det_inner(delta2(mv, mv), mv)
    else:
        raise ValueError("via must be 'diamond' or 'delta2'")
    return float(SQRT14 / 3.0 * cubic + 4.0 * max(nrm2, 0.0) ** 1.5)


def grad_W(phi):
    """Self-dual projection of sqrt14 Phi Delta_2 Phi + 12 |Phi| Phi."""
    mv = _as_mv4(phi)
    norm = np.sqrt(max(det_inner(mv, mv), 0.0))
    if norm < 1e-14:
        return SelfDual4Form(Multivector.zero(_R8), check=False)
    g = SQRT14 * delta2(mv, mv) + 12.0 * norm * mv
    g_sd = _BASIS.from_vec(_BASIS.to_vec(g))
    return SelfDual4Form(g_sd, check=False)


def hess_W(phi, q1, q2):
    """Second differential of the potential at phi evaluated on (q1, q2)."""
    mv = _as_mv4(phi)
    a, b = _as_mv4(q1), _as_mv4(q2)
    norm = np.sqrt(max(det_inner(mv, mv), 0.0))
    if norm < 1e-14:
        raise ValueError("Hessian is evaluated away from the origin")
    term1 = SQRT14 * (det_inner(delta2(a, b) + delta2(b, a), mv))
    term2 = 12.0 * norm * det_inner(a, b)
    term3 = 12.0 / norm * det_inner(a, mv) * det_inner(mv, b)
    return float(term1 + term2 + term3)


def hess_W_matrix(phi):
    """Hessian of the potential restricted to the self-dual subspace."""
    x = phi.vec() if isinstance(phi, SelfDual4Form) else _BASIS.to_vec(_as_mv4(phi))
    norm = float(np.linalg.norm(x))
    C = _cubic()
    H = 2.0 * SQRT14 * np.einsum("abc,a->bc", C, x)
    H += 12.0 * norm * np.eye(35) + 12.0 / norm * np.outer(x, x)
    return H


def eigenspace_split(phi, tol=1e-8):
    """Projectors onto the 1, 7, 27 eigenspaces of q -> Phi Delta_2 q on the
    self-dual subspace (plus the anti-self-dual kernel dimension, 35).

    Requires a certified conformal Spin(7) input.
    """
    cert = is_conformal_spin7(phi, tol=tol)
    if not cert.is_conformal:
        raise ValueError(f"eigenspace split needs a conformal Spin(7) form: {cert!r}")
    M = delta2_matrix(_as_mv4(phi))
    evals, evecs = np.linalg.eigh(0.5 * (M + M.T))
    scale = cert.norm / SQRT14
    targets = {"1": -12.0 * scale, "7": -6.0 * scale, "27": 2.0 * scale}
    projectors = {}
    counts = {}
    for name, lam in targets.items():
        sel = np.abs(evals - lam) < 1e-6 * max(1.0, abs(lam))
        V = evecs[:, sel]
        projectors[name] = V @ V.T
        counts[name] = int(sel.sum())
    if (counts["1"], counts["7"], counts["27"]) != (1, 7, 27):
        raise ArithmeticError(f"unexpected eigenspace dimensions {counts}")
    return projectors, evals


# ---------------------------------------------------------------------------
# metric deformations
# ---------------------------------------------------------------------------

def metric_potential(metric, phi):
    """Potential as a function of the pair (metric, 4-form); the form need not
    be self-dual here."""
    P = mv4_to_tensor(_as_mv4(phi))
    hi = metric.h_inv
    cubic = (
        np.einsum(
            "abcd,efgh,ijkl,ai,bj,ce,df,gk,hl->",
            P, P, P, hi, hi, hi, hi, hi, hi,
            optimize=True,
        )
        / 8.0
    )
    nrm2 = inner4(P, P, hi)
    return float(SQRT14 / 3.0 * cubic + 4.0 * max(nrm2, 0.0) ** 1.5)


def metric_differential(metric, phi, k):
    """Differential of the metric potential in a metric direction k, by the
    explicit index contraction."""
    P = mv4_to_tensor(_as_mv4(phi))
    hi = metric.h_inv
    k = np.asarray(k, dtype=float)
    k_up = hi @ k @ hi  # variation of the inverse metric is -k_up
    nrm = np.sqrt(max(inner4(P, P, hi), 0.0))
    term1 = (
        -SQRT14
        / 4.0
        * np.einsum(
            "abcd,efgh,ijkl,ai,bj,ce,df,gk,hl->",
            P, P, P, k_up, hi, hi, hi, hi, hi,
            optimize=True,
        )
    )
    term2 = -nrm * np.einsum(
        "abcd,efgh,ae,bf,cg,dh->", P, P, k_up, hi, hi, hi, optimize=True
    )
    return float(term1 + term2)


def metric_differential_fd(metric, phi, k, step=1e-5):
    """Finite difference oracle for the metric differential; shrinks the step
    when the perturbed metric leaves the positive cone."""
    k = np.asarray(k, dtype=float)
    for _ in range(8):
        try:
            wp = metric_potential(Euclidean8(metric.h + step * k), phi)
            wm = metric_potential(Euclidean8(metric.h - step * k), phi)
            return (wp - wm) / (2.0 * step)
        except np.linalg.LinAlgError:
            step *= 0.25
    raise ArithmeticError("could not keep the perturbed metric positive definite")


# ---------------------------------------------------------------------------
# spinor bridge and optimizer
# ---------------------------------------------------------------------------

_SPIN7_MODULE = None


def spin7_module():
    """Shared (8,0) Clifford module with the symmetric positive pairing."""
    global _SPIN7_MODULE
    if _SPIN7_MODULE is None:
        _SPIN7_MODULE = clifford.build_module(_R8, sigma=+1)
    return _SPIN7_MODULE


def spin7_from_spinor(xi):
    """The 4-form of a chiral spinor: sixteen times the grade-4 part of its
    positive square.  Satisfies *Phi = mu Phi and B(xi,xi) = |Phi|/sqrt14."""
    if np.linalg.norm(xi.comps) == 0.0:
        raise ValueError("zero spinor")
    mu = clifford.chirality(xi)
    if mu is None:
        raise ValueError("spinor is not chiral")
    alpha = clifford.square_polyform(xi, +1)
    phi = 16.0 * alpha.grade(4)
    return SelfDual4Form(phi, dual_sign=mu), mu


class FindSpin7Config:
    def __init__(self, tol=1e-8, max_iter=100_000, armijo_c=1e-4, shrink=0.5,
                 init_step=None, norm_floor_factor=1e-3):
        self.tol = tol
        self.max_iter = max_iter
        self.armijo_c = armijo_c
        self.shrink = shrink
        self.init_step = init_step
        self.norm_floor_factor = norm_floor_factor


class FindSpin7Result:
    def __init__(self, form, certificate, iterations, converged, history):
        self.form = form
        self.certificate = certificate
        self.iterations = iterations
        self.converged = converged
        self.history = history


def _grad_vec(x, C):
    return SQRT14 * np.einsum("abc,a,b->c", C, x, x) + 12.0 * np.linalg.norm(x) * x


def _hess_vec_apply(x, g, C):
    nrm = np.linalg.norm(x)
    return (
        2.0 * SQRT14 * np.einsum("abc,a,b->c", C, x, g)
        + 12.0 * nrm * g
        + 12.0 / nrm * x * float(x @ g)
    )


def find_spin7(seed, cfg=None, record_every=0):
    """Steepest descent with Armijo backtracking on R(Phi) = |grad W(Phi)|^2
    over the self-dual subspace.

    Deterministic given seed and configuration.  Convergence is declared at
    |grad W| <= tol (absolute, matching the certificate gate at unit scale);
    collapse toward zero restarts from the renormalized iterate.
    """
    cfg = cfg or FindSpin7Config()
    C = _cubic()
    x = seed.vec() if isinstance(seed, SelfDual4Form) else _BASIS.to_vec(_as_mv4(seed))
    seed_norm = float(np.linalg.norm(x))
    if seed_norm == 0.0:
        raise ValueError("seed must be nonzero")
    floor = cfg.norm_floor_factor * max(1.0, seed_norm)
    step = cfg.init_step if cfg.init_step is not None else 1.0 / (2.0 * (16.0 * SQRT14) ** 2)
    history = []
    g = _grad_vec(x, C)
    R = float(g @ g)
    it = 0
    converged = False
    while it < cfg.max_iter:
        resid = np.sqrt(R)
        if record_every and it % record_every == 0:
            history.append((it, resid, float(np.linalg.norm(x))))
        if resid <= cfg.tol:
            converged = True
            break
        if np.linalg.norm(x) < floor:
            x = x * (seed_norm / np.linalg.norm(x))
            g = _grad_vec(x, C)
            R = float(g @ g)
            it += 1
            continue
        dR = 2.0 * _hess_vec_apply(x, g, C)
        slope = float(dR @ dR)
        if slope == 0.0:
            break
        # Armijo backtracking along -dR, re-expanding the step after success
        accepted = False
        while step > 1e-18:
            x_new = x - step * dR
            g_new = _grad_vec(x_new, C)
            R_new = float(g_new @ g_new)
            if R_new <= R - cfg.armijo_c * step * slope:
                x, g, R = x_new, g_new, R_new
                step *= 2.0
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            break
        it += 1
    form = SelfDual4Form.from_vec(x)
    cert = is_conformal_spin7(form, tol=cfg.tol)
    if record_every:
        history.append((it, float(np.sqrt(R)), float(np.linalg.norm(x))))
    return FindSpin7Result(form, cert, it, converged, history)


def random_so8(rng):
    """Haar-ish random rotation from the QR decomposition of a Gaussian."""
    M = rng.normal(size=(8, 8))
    Q, R = np.linalg.qr(M)
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def rotate4(R, phi):
    """Push a 4-form through a rotation of R^8 acting on covector components."""
    T = mv4_to_tensor(_as_mv4(phi))
    T2 = np.einsum("ai,bj,ck,dl,ijkl->abcd", R, R, R, R, T, optimize=True)
    return antisym_tensor_to_mv4(T2)
