"""Irreducible real Clifford modules in signature p - q = 0, 2 mod 8.

Gamma matrices are built recursively from 2x2 real seeds, each Cl(p,q)
obtained from Cl(p-1,q-1) by tensoring with the split 2x2 factor; Euclidean
eight dimensions uses the octonion left-multiplication construction.  The
admissible pairings are produced by averaging a Euclidean inner product over
the finite group generated by the gamma matrices and multiplying by the
volume elements of the definite subspaces.

All structural claims (Clifford relations, adjoint identity, symmetry type)
are verified numerically at construction time rather than assumed.
"""

from __future__ import annotations

import numpy as np

from .kahler import (
    Multivector,
    QuadraticSpace,
    blade_indices,
    geometric_product,
    hodge,
    pi,
    tau,
)

VERIFY_TOL = 1e-10


class NotASquareError(ValueError):
    """Polyform fails the algebraic square-of-a-spinor system."""


class UnsupportedSignatureError(ValueError):
    """No irreducible real Clifford module in this signature."""


# ---------------------------------------------------------------------------
# gamma matrix construction
# ---------------------------------------------------------------------------

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])
_EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])  # squares to -Id

# oriented Fano triples (e_i e_j = e_k, cyclic), 1-based imaginary units
_FANO = [(1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)]


def _octonion_left_mult():
    """Left-multiplication matrices L_1..L_7 of the imaginary octonion units."""
    table = np.zeros((8, 8, 8))  # table[i, j, :] = e_i * o_j in the basis (1, e_1..e_7)
    for i in range(1, 8):
        table[i, 0, i] = 1.0
        table[i, i, 0] = -1.0
    signed = {}
    for (i, j, k) in _FANO:
        for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
            signed[(a, b)] = (c, 1.0)
            signed[(b, a)] = (c, -1.0)
    for (a, b), (c, s) in signed.items():
        table[a, b, c] = s
    return [table[i].T.copy() for i in range(1, 8)]


def _build_gammas(p, q):
    if (p, q) == (0, 0):
        return []
    if (p, q) == (2, 0):
        return [_SIGMA1.copy(), _SIGMA3.copy()]
    if (p, q) == (8, 0):
        mats = []
        for L in _octonion_left_mult() + [np.eye(8)]:
            g = np.zeros((16, 16))
            g[:8, 8:] = L
            g[8:, :8] = L.T
            mats.append(g)
        return mats
    if p >= 1 and q >= 1:
        inner = _build_gammas(p - 1, q - 1)
        n = inner[0].shape[0] if inner else 1
        eye = np.eye(n)
        omega = _SIGMA1  # = (split +1 generator) * (split -1 generator) normalizer
        out = [np.kron(_EPS, eye)]
        out += [np.kron(omega, g) for g in inner]
        out.append(np.kron(_SIGMA3, eye))
        return out
    raise UnsupportedSignatureError(f"no real irreducible module for signature ({p},{q})")


def _blade_products(gammas, n_blades, N):
    """Matrices of all ordered blade products gamma^{i1} ... gamma^{ik}."""
    out = np.empty((n_blades, N, N))
    out[0] = np.eye(N)
    for b in range(1, n_blades):
        low = b & -b
        i = low.bit_length() - 1
        out[b] = gammas[i] @ out[b ^ low]
    return out


# ---------------------------------------------------------------------------
# module and pairing
# ---------------------------------------------------------------------------

class CliffordModule:
    """Irreducible real Clifford module with an admissible pairing.

    Attributes:
        space: underlying QuadraticSpace.
        N: real dimension 2^(d/2) of the module.
        gammas: list of d real N x N generator matrices.
        pairing: admissible bilinear pairing matrix B.
        sigma: adjoint type (+1 or -1).
        s: symmetry type of the pairing (+1 symmetric, -1 skew).
        volume_action: matrix of the Clifford volume element.
    """

    def __init__(self, space, gammas, pairing, sigma, s):
        self.space = space
        self.N = gammas[0].shape[0] if gammas else 1
        self.gammas = [np.asarray(g) for g in gammas]
        self.pairing = np.asarray(pairing)
        self.pairing_inv = np.linalg.inv(self.pairing)
        self.sigma = int(sigma)
        self.s = int(s)
        self.gamma_blades = _blade_products(self.gammas, space.n_blades, self.N)
        # (gamma^B)^{-1} = tau-sign * metric factor * gamma^B
        k = space.grades
        rev = np.where((k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)
        self._blade_inv_sign = rev * space.blade_metric
        self.volume_action = self.gamma_blades[space.n_blades - 1]

    def adjoint(self, E):
        """Pairing adjoint: B(x, E y) = B(adjoint(E) x, y)."""
        return self.pairing_inv @ E.T @ self.pairing

    def spinor(self, comps):
        return Spinor(self, comps)

    def endo(self, mat):
        return Endomorphism(self, mat)

    def random_spinor(self, rng, scale=1.0):
        return Spinor(self, rng.uniform(-scale, scale, size=self.N))

    def __repr__(self):
        return f"CliffordModule(signature={self.space.signature}, N={self.N}, sigma={self.sigma:+d}, s={self.s:+d})"


class Spinor:
    __slots__ = ("module", "comps")

    def __init__(self, module, comps):
        comps = np.asarray(comps, dtype=float)
        if comps.shape != (module.N,):
            raise ValueError("spinor has wrong dimension")
        self.module = module
        self.comps = comps

    def pairing_norm(self):
        return float(self.comps @ self.module.pairing @ self.comps)

    def __neg__(self):
        return Spinor(self.module, -self.comps)

    def __repr__(self):
        return f"Spinor({np.array2string(self.comps, precision=4)})"


class Endomorphism:
    __slots__ = ("module", "mat")

    def __init__(self, module, mat):
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (module.N, module.N):
            raise ValueError("endomorphism has wrong shape")
        self.module = module
        self.mat = mat

    def __repr__(self):
        return f"Endomorphism({np.array2string(self.mat, precision=4)})"


def _expected_symmetry(d, sigma):
    k = (d // 2) % 4
    if sigma == +1:
        return +1 if k in (0, 1) else -1
    return +1 if k in (0, 3) else -1


def averaged_inner_product(gammas, N, n_blades):
    """Euclidean inner product invariant under the finite gamma group."""
    blades = _blade_products(gammas, n_blades, N)
    S = np.einsum("bij,bik->jk", blades, blades) / n_blades
    return 0.5 * (S + S.T)


def build_pairing_raw(gammas, eta, sigma):
    """Admissible pairing before normalization, following the averaging recipe.

    Returns the matrix of B_sigma built from the invariant inner product and
    the volume elements of the definite subspaces of the metric.
    """
    d = len(eta)
    N = gammas[0].shape[0] if gammas else 1
    n_blades = 1 << d
    S = averaged_inner_product(gammas, N, n_blades)
    pos = [i for i in range(d) if eta[i] > 0]
    nu_pos = np.eye(N)
    for i in pos:
        nu_pos = nu_pos @ gammas[i]
    nu_all = np.eye(N)
    for g in gammas:
        nu_all = nu_all @ g
    nu_neg = np.linalg.inv(nu_pos) @ nu_all  # enforces nu = nu_+ . nu_-
    p = len(pos)
    if p % 2 == 1:
        vol = nu_pos if sigma == +1 else nu_neg
    else:
        vol = nu_neg if sigma == +1 else nu_pos
    return vol.T @ S


def build_pairing(module_or_gammas, sigma, eta=None):
    """Normalized admissible pairing of the requested adjoint type.

    Accepts either a CliffordModule or a raw gamma list plus eta.  Returns
    (pairing matrix, symmetry type).  Raises if the averaged pairing is
    degenerate or its symmetry disagrees with the classification table.
    """
    if isinstance(module_or_gammas, CliffordModule):
        gammas = module_or_gammas.gammas
        eta = module_or_gammas.space.eta
    else:
        gammas = module_or_gammas
        if eta is None:
            raise ValueError("eta required when passing raw gammas")
    d = len(eta)
    B = build_pairing_raw(gammas, eta, sigma)
    scale = np.max(np.abs(B))
    if scale < 1e-12 or np.linalg.matrix_rank(B) < B.shape[0]:
        raise ValueError("averaged pairing is degenerate; gamma construction is broken")
    B = B / scale
    sym = np.linalg.norm(B - B.T)
    skew = np.linalg.norm(B + B.T)
    s = +1 if sym < skew else -1
    if min(sym, skew) > VERIFY_TOL * B.shape[0]:
        raise ValueError("averaged pairing has no definite symmetry type")
    expected = _expected_symmetry(d, sigma)
    if s != expected:
        raise ValueError(f"pairing symmetry {s:+d} disagrees with table value {expected:+d}")
    p = int(np.sum(np.asarray(eta) > 0))
    q = d - p
    if p * q == 0 and s == +1:
        if np.linalg.eigvalsh(0.5 * (B + B.T))[0] < 0:
            B = -B
    return B, s


def build_module(space, sigma=+1):
    """Construct the irreducible real Clifford module of a quadratic space."""
    if not space.admits_real_module():
        raise UnsupportedSignatureError(
            f"signature {space.signature}: p - q mod 8 must be 0 or 2"
        )
    gammas = _build_gammas(space.p, space.q)
    # the recursion emits generators sorted negative-square first, matching eta
    squares = [float((g @ g)[0, 0]) for g in gammas]
    if not np.allclose(squares, space.eta):
        order = sorted(range(space.d), key=lambda i: squares[i])
        gammas = [gammas[i] for i in order]
    N = gammas[0].shape[0] if gammas else 1
    if N != 2 ** (space.d // 2):
        raise AssertionError("gamma construction produced a reducible module")
    for i, gi in enumerate(gammas):
        for j, gj in enumerate(gammas):
            anti = gi @ gj + gj @ gi
            want = 2.0 * (space.eta[i] if i == j else 0.0) * np.eye(N)
            if np.max(np.abs(anti - want)) > VERIFY_TOL:
                raise AssertionError(f"Clifford relations fail for generators ({i},{j})")
    B, s = build_pairing(gammas, sigma, eta=space.eta)
    module = CliffordModule(space, gammas, B, sigma, s)
    for i, g in enumerate(gammas):
        want = g if sigma == +1 else -g
        if np.max(np.abs(module.adjoint(g) - want)) > VERIFY_TOL:
            raise AssertionError(f"adjoint identity fails for generator {i}")
    return module


# ---------------------------------------------------------------------------
# quantization
# ---------------------------------------------------------------------------

def quantize(module, a):
    """Algebra isomorphism from the Kahler-Atiyah algebra onto End(Sigma)."""
    if a.space != module.space:
        raise ValueError("multivector and module live on different spaces")
    return Endomorphism(module, np.tensordot(a.coeffs, module.gamma_blades, axes=(0, 0)))


def dequantize(module, E):
    """Inverse of quantize via the trace-orthogonal blade expansion."""
    mat = E.mat if isinstance(E, Endomorphism) else np.asarray(E)
    traces = np.einsum("bij,ji->b", module.gamma_blades, mat)
    coeffs = module._blade_inv_sign * traces / module.N
    return Multivector(module.space, coeffs)


# ---------------------------------------------------------------------------
# square maps
# ---------------------------------------------------------------------------

def square_endo(xi, kappa=+1):
    """Signed square kappa * xi (x) B(-, xi) as an endomorphism."""
    m = xi.module
    return Endomorphism(m, float(kappa) * np.outer(xi.comps, m.pairing @ xi.comps))


def square_polyform(xi, kappa=+1):
    """Signed polyform square of a spinor."""
    return dequantize(xi.module, square_endo(xi, kappa))


def is_admissible(E, tol=1e-9):
    """E o E = tr(E) E together with the pairing symmetry E^t = s E."""
    m, A = E.module, E.mat
    scale = max(1.0, float(np.linalg.norm(A)))
    r1 = np.linalg.norm(A @ A - np.trace(A) * A) / max(1.0, scale**2)
    r2 = np.linalg.norm(m.adjoint(A) - m.s * A) / scale
    return bool(r1 < tol and r2 < tol)


def is_tame(E, rel_tol=1e-8):
    """Rank at most one, judged on the singular value spectrum."""
    sv = np.linalg.svd(E.mat, compute_uv=False)
    return bool(sv[0] < 1e-14 or sv[1] < rel_tol * sv[0])


def _witness_candidates(module):
    yield np.eye(module.N)
    for g in module.gammas:
        yield g
    d = module.space.d
    for i in range(d):
        for j in range(i + 1, d):
            yield module.gammas[i] @ module.gammas[j]


def tame_certificate(E, tol=1e-9):
    """Witness A with tr(EA) != 0 and E A E = tr(EA) E, if one exists."""
    A = E.mat
    scale = float(np.linalg.norm(A))
    if scale == 0.0:
        return None
    for W in _witness_candidates(E.module):
        t = float(np.trace(A @ W))
        if abs(t) <= 1e-8 * scale:
            continue
        if np.linalg.norm(A @ W @ A - t * A) < tol * max(1.0, scale**2):
            return Endomorphism(E.module, W)
        return None
    return None


def reconstruct_spinor(module, alpha, tol=1e-9):
    """Invert the polyform square map; returns (spinor, kappa).

    Zero input returns the zero spinor by convention.  Raises NotASquareError
    when alpha fails the algebraic characterization of spinor squares.
    """
    E = quantize(module, alpha).mat
    scale = float(np.linalg.norm(E))
    if scale < tol:
        return Spinor(module, np.zeros(module.N)), +1
    sym = tau(alpha) if module.sigma == +1 else pi(tau(alpha))
    if (sym - module.s * alpha).norm() > tol * max(1.0, alpha.norm()):
        raise NotASquareError("polyform violates the pairing symmetry condition")
    cert = tame_certificate(Endomorphism(module, E), tol=tol)
    if cert is None:
        raise NotASquareError("no trace witness: endomorphism is not of rank one")
    j = int(np.argmax(np.linalg.norm(E, axis=0)))
    xi0 = E[:, j] / np.linalg.norm(E[:, j])
    z = np.outer(xi0, module.pairing @ xi0)
    zz = float(np.sum(z * z))
    r = float(np.sum(E * z)) / zz
    kappa = +1 if r > 0 else -1
    xi = Spinor(module, np.sqrt(abs(r)) * xi0)
    resid = np.linalg.norm(square_endo(xi, kappa).mat - E)
    if resid > tol * max(1.0, scale):
        raise NotASquareError("rank-one factorization does not reproduce the polyform")
    return xi, kappa


def kernel_check(Q, xi, kappa=+1, tol=1e-9):
    """Evaluate the three equivalent kernel conditions for Q against xi.

    Returns (in_kernel, residuals) where residuals holds the spinor-side,
    endomorphism-side and polyform-side norms.
    """
    m = xi.module
    r_spinor = float(np.linalg.norm(Q.mat @ xi.comps))
    r_endo = float(np.linalg.norm(Q.mat @ square_endo(xi, kappa).mat))
    q_poly = dequantize(m, Q)
    alpha = square_polyform(xi, kappa)
    r_poly = geometric_product(q_poly, alpha).norm()
    scale = max(1.0, float(np.linalg.norm(Q.mat)) * max(1.0, float(np.linalg.norm(xi.comps)) ** 2))
    return bool(r_spinor < tol * scale), {
        "spinor": r_spinor,
        "endo": r_endo,
        "polyform": r_poly,
    }


def chirality(xi, tol=1e-9):
    """Chirality of a spinor in signature p - q = 0 mod 8, or None.

    Returns +1/-1 when xi is an eigenvector of the volume action and None
    otherwise; raises in signatures without a real chirality operator.
    """
    m = xi.module
    if (m.space.p - m.space.q) % 8 != 0:
        raise UnsupportedSignatureError("real chirality needs p - q = 0 mod 8")
    norm = float(np.linalg.norm(xi.comps))
    if norm == 0.0:
        return None
    v = m.volume_action @ xi.comps
    for mu in (+1, -1):
        if np.linalg.norm(v - mu * xi.comps) < tol * norm:
            return mu
    return None


def chiral_projector(module, mu):
    return Endomorphism(module, 0.5 * (np.eye(module.N) + mu * module.volume_action))


def polyform_chirality_defect(module, alpha, mu):
    """Norm of *(pi o tau)(alpha) - mu alpha, the polyform chirality condition."""
    return (hodge(pi(tau(alpha))) - mu * alpha).norm()


def module_to_dict(module):
    """JSON payload of the module for cross-implementation comparison."""
    return {
        "signature": [module.space.p, module.space.q],
        "N": module.N,
        "sigma": module.sigma,
        "symmetry": module.s,
        "gammas": [g.ravel().tolist() for g in module.gammas],
        "pairing": module.pairing.ravel().tolist(),
    }
