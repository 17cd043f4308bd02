"""Exterior algebra of a quadratic space with the metric-deformed geometric product.

Multivectors are stored densely over the 2^d blade basis of a (pseudo-)orthonormal
coframe, blades encoded as bitmasks with strictly increasing index order.  The
geometric product deforms the wedge product by metric contractions; grade
involutions, the Hodge star and the normalized trace are provided alongside.

Conventions:
  * eta is the diagonal metric, negative entries first (e.g. (-1,+1,+1,+1)).
  * the volume form is e^1 ^ ... ^ e^d in basis order, orientation +1.
  * inner products of forms use the determinant convention, so the volume
    form has square norm (-1)^q.
"""

from __future__ import annotations

import json

import numpy as np

DEFAULT_TOL = 1e-10


def _popcount(x):
    return bin(x).count("1")


def _merge_sign(a, b):
    """Sign from reordering the generators of blade `a` past those of `b`."""
    a >>= 1
    swaps = 0
    while a:
        swaps += _popcount(a & b)
        a >>= 1
    return -1.0 if swaps & 1 else 1.0


class QuadraticSpace:
    """Oriented quadratic vector space (V*, h*) of even dimension d = p + q.

    p counts +1 entries of the diagonal metric, q counts -1 entries; the -1
    directions come first in the fixed basis.  A custom signature ordering can
    be passed through `eta`.
    """

    def __init__(self, p, q, eta=None):
        d = p + q
        if d % 2 != 0 or not (2 <= d <= 8):
            raise ValueError(f"dimension p+q must be even and in [2, 8], got {d}")
        if eta is None:
            eta = [-1] * q + [+1] * p
        eta = np.asarray(eta, dtype=float)
        if eta.shape != (d,) or not np.all(np.abs(eta) == 1.0):
            raise ValueError("eta must be a length-d array of +1/-1 entries")
        if int(np.sum(eta > 0)) != p or int(np.sum(eta < 0)) != q:
            raise ValueError("eta entries inconsistent with (p, q)")
        self.p = int(p)
        self.q = int(q)
        self.d = int(d)
        self.eta = eta
        self.eta.flags.writeable = False
        self.orientation = +1
        self.n_blades = 1 << d
        self._build_tables()

    def _build_tables(self):
        n, d = self.n_blades, self.d
        blades = np.arange(n)
        self.grades = np.array([_popcount(b) for b in blades])
        # metric factor of each blade: product of eta over its indices
        bm = np.ones(n)
        for i in range(d):
            bm[(blades >> i) & 1 == 1] *= self.eta[i]
        self.blade_metric = bm
        gp_sign = np.empty((n, n))
        wedge_sign = np.zeros((n, n))
        for a in range(n):
            for b in range(n):
                s = _merge_sign(a, b)
                common = a & b
                m = 1.0
                while common:
                    i = (common & -common).bit_length() - 1
                    m *= self.eta[i]
                    common &= common - 1
                gp_sign[a, b] = s * m
                if a & b == 0:
                    wedge_sign[a, b] = s
        self.gp_sign = gp_sign
        self.wedge_sign = wedge_sign
        self.xor_index = blades[:, None] ^ blades[None, :]

    @property
    def signature(self):
        return (self.p, self.q)

    def admits_real_module(self):
        return (self.p - self.q) % 8 in (0, 2)

    def __eq__(self, other):
        return (
            isinstance(other, QuadraticSpace)
            and self.signature == other.signature
            and np.array_equal(self.eta, other.eta)
        )

    def __hash__(self):
        return hash((self.p, self.q, tuple(self.eta)))

    def __repr__(self):
        return f"QuadraticSpace(p={self.p}, q={self.q})"


def blade_indices(bits):
    """Sorted index tuple of a blade bitmask."""
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def blade_mask(indices):
    mask = 0
    for i in indices:
        if mask & (1 << i):
            raise ValueError("repeated index in blade")
        mask |= 1 << i
    return mask


class Multivector:
    """Dense multivector: 2^d coefficients over the blade basis of a space."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (space.n_blades,):
            raise ValueError("coefficient array has wrong length")
        self.space = space
        self.coeffs = coeffs
        self.coeffs.flags.writeable = False

    # -- constructors -------------------------------------------------
    @staticmethod
    def zero(space):
        return Multivector(space, np.zeros(space.n_blades))

    @staticmethod
    def scalar(space, x):
        c = np.zeros(space.n_blades)
        c[0] = x
        return Multivector(space, c)

    @staticmethod
    def basis(space, i):
        """Basis covector e^i (0-based index)."""
        c = np.zeros(space.n_blades)
        c[1 << i] = 1.0
        return Multivector(space, c)

    @staticmethod
    def blade(space, indices, coeff=1.0):
        mask = blade_mask(indices)
        sign = _merge_sign_of_sequence(indices)
        c = np.zeros(space.n_blades)
        c[mask] = sign * coeff
        return Multivector(space, c)

    @staticmethod
    def covector(space, components):
        components = np.asarray(components, dtype=float)
        c = np.zeros(space.n_blades)
        for i in range(space.d):
            c[1 << i] = components[i]
        return Multivector(space, c)

    @staticmethod
    def volume(space):
        c = np.zeros(space.n_blades)
        c[space.n_blades - 1] = 1.0
        return Multivector(space, c)

    # -- structure ----------------------------------------------------
    def grade(self, k):
        c = np.where(self.space.grades == k, self.coeffs, 0.0)
        return Multivector(self.space, c)

    def grades_present(self, tol=DEFAULT_TOL):
        return sorted({int(g) for g, c in zip(self.space.grades, self.coeffs) if abs(c) > tol})

    def scalar_part(self):
        return float(self.coeffs[0])

    def covector_components(self):
        return np.array([self.coeffs[1 << i] for i in range(self.space.d)])

    def max_grade_error(self, allowed_grades):
        mask = ~np.isin(self.space.grades, list(allowed_grades))
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.coeffs[mask])))

    def norm(self):
        """Euclidean norm of the coefficient array (signature independent)."""
        return float(np.linalg.norm(self.coeffs))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        _check_space(self, other)
        return Multivector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_space(self, other)
        return Multivector(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return Multivector(self.space, -self.coeffs)

    def __mul__(self, x):
        return Multivector(self.space, self.coeffs * float(x))

    __rmul__ = __mul__

    def __truediv__(self, x):
        return Multivector(self.space, self.coeffs / float(x))

    def __repr__(self):
        terms = []
        for b in range(self.space.n_blades):
            c = self.coeffs[b]
            if abs(c) > 1e-14:
                name = "1" if b == 0 else "e" + "".join(str(i + 1) for i in blade_indices(b))
                terms.append(f"{c:+.6g}*{name}")
        return "MV(" + (" ".join(terms) if terms else "0") + ")"


def _merge_sign_of_sequence(indices):
    """Sign of sorting an index sequence ascending (0 on repeats is excluded upstream)."""
    sign = 1.0
    idx = list(indices)
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


def _check_space(a, b):
    if a.space != b.space:
        raise ValueError("multivectors live on different quadratic spaces")


# ---------------------------------------------------------------------------
# products and involutions
# ---------------------------------------------------------------------------

def wedge(a, b):
    """Exterior product a ^ b."""
    _check_space(a, b)
    sp = a.space
    prod = np.outer(a.coeffs, b.coeffs) * sp.wedge_sign
    out = np.bincount(sp.xor_index.ravel(), weights=prod.ravel(), minlength=sp.n_blades)
    return Multivector(sp, out)


def geometric_product(a, b):
    """Geometric product a <> b (Clifford product transported to forms)."""
    _check_space(a, b)
    sp = a.space
    prod = np.outer(a.coeffs, b.coeffs) * sp.gp_sign
    out = np.bincount(sp.xor_index.ravel(), weights=prod.ravel(), minlength=sp.n_blades)
    return Multivector(sp, out)


gp = geometric_product


def contract(theta, a):
    """Interior product iota_{theta#} a for a grade-1 covector theta.

    The metric raising is built in: contract(e^i, e^i ^ beta) = eta_i * beta.
    """
    _check_space(theta, a)
    sp = theta.space
    if theta.max_grade_error({1}) > 0.0:
        raise ValueError("contract expects a homogeneous grade-1 first argument")
    out = np.zeros(sp.n_blades)
    comps = theta.covector_components()
    blades = np.arange(sp.n_blades)
    for i in range(sp.d):
        t = comps[i]
        if t == 0.0:
            continue
        bit = 1 << i
        has = (blades & bit) != 0
        src = blades[has]
        below = np.array([_popcount(b & (bit - 1)) for b in src])
        sign = np.where(below % 2 == 0, 1.0, -1.0)
        out[src ^ bit] += t * sp.eta[i] * sign * a.coeffs[src]
    return Multivector(sp, out)


def pi(a):
    """Grade involution: multiplies the grade-k part by (-1)^k."""
    sign = np.where(a.space.grades % 2 == 0, 1.0, -1.0)
    return Multivector(a.space, a.coeffs * sign)


def tau(a):
    """Reversal anti-automorphism: (-1)^(k(k-1)/2) on the grade-k part."""
    k = a.space.grades
    sign = np.where((k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)
    return Multivector(a.space, a.coeffs * sign)


def tau_hat(a):
    """Composition pi o tau."""
    return pi(tau(a))


def hodge(a):
    """Hodge star, computed blade by blade from the complement."""
    sp = a.space
    full = sp.n_blades - 1
    out = np.zeros(sp.n_blades)
    for b in range(sp.n_blades):
        c = a.coeffs[b]
        if c == 0.0:
            continue
        comp = full ^ b
        out[comp] += c * sp.blade_metric[b] * _merge_sign(b, comp)
    return Multivector(sp, out)


def ka_trace(a):
    """Normalized trace 2^(d/2) * (scalar part); cyclic under the geometric product."""
    return float(2 ** (a.space.d // 2) * a.coeffs[0])


def det_inner(a, b):
    """Determinant inner product of forms; blade-orthonormal with metric signs."""
    _check_space(a, b)
    return float(np.sum(a.coeffs * b.coeffs * a.space.blade_metric))


def det_norm_sq(a):
    return det_inner(a, a)


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------

def so_derivation(space, A, a):
    """Extend a linear map A on covector components to a derivation of forms.

    A acts on grade one by component multiplication (theta_i -> A_ij theta_j)
    and on a blade by the Leibniz rule.
    """
    A = np.asarray(A, dtype=float)
    out = np.zeros(space.n_blades)
    for b in range(space.n_blades):
        c = a.coeffs[b]
        if c == 0.0:
            continue
        idx = blade_indices(b)
        for pos, i in enumerate(idx):
            for j in range(space.d):
                if A[j, i] == 0.0:
                    continue
                if j in idx and j != i:
                    continue
                new_idx = list(idx)
                new_idx[pos] = j
                sign = _merge_sign_of_sequence(new_idx)
                out[blade_mask(new_idx)] += c * A[j, i] * sign
    return Multivector(space, out)


def rotate(space, R, a):
    """Push a multivector through an orthogonal transformation of components."""
    R = np.asarray(R, dtype=float)
    out = np.zeros(space.n_blades)
    for b in range(space.n_blades):
        c = a.coeffs[b]
        if c == 0.0:
            continue
        idx = blade_indices(b)
        if not idx:
            out[0] += c
            continue
        # expand R e^{i1} ^ ... ^ R e^{ik} over target blades via minors
        k = len(idx)
        from itertools import combinations

        for target in combinations(range(space.d), k):
            minor = R[np.ix_(target, idx)]
            out[blade_mask(target)] += c * np.linalg.det(minor)
    return Multivector(space, out)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def mv_to_dict(a, tol=0.0):
    coeffs = {
        str(b): float(a.coeffs[b])
        for b in range(a.space.n_blades)
        if abs(a.coeffs[b]) > tol
    }
    return {"signature": [a.space.p, a.space.q], "coeffs": coeffs}


def mv_from_dict(data, space=None):
    p, q = data["signature"]
    if space is None:
        space = QuadraticSpace(p, q)
    elif space.signature != (p, q):
        raise ValueError("signature mismatch between payload and space")
    c = np.zeros(space.n_blades)
    for key, val in data["coeffs"].items():
        c[int(key)] = float(val)
    return Multivector(space, c)


def mv_to_json(a):
    return json.dumps(mv_to_dict(a))


def mv_from_json(text, space=None):
    return mv_from_dict(json.loads(text), space=space)
