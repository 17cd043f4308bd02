"""Left-invariant parallel spinor flows on simply connected 3D Lie groups.

A Cauchy pair is a left-invariant coframe (rows of E in the Maurer-Cartan
basis, ordered u, l, n) together with a symmetric shape operator Theta in the
coframe basis, subject to the constraint exterior system
d e_a = Theta_ab e_b ^ e_u  and  d(Theta(e_u)) = 0.  The time evolution is
governed by dU/dt = -lapse * Theta_t U with U(0) = Id and closed-form
solutions in every admissible branch; a classical RK4 integrator provides the
numerical oracle.  The Hamiltonian constraint is the scalar constraint
H = s^h + Tr(Theta)^2 - |Theta|^2 of the induced 3-geometry.
"""

from __future__ import annotations

import numpy as np

from .liegroup import (
    LieGroup3,
    _EPS3,
    d_leftinv,
    group_from_theta,
    ricci_leftinv,
    scalar_curvature_leftinv,
    wedge11,
)

U, L, N = 0, 1, 2


class InadmissibleThetaError(ValueError):
    pass


class OutsideMaximalIntervalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# lapse specifications
# ---------------------------------------------------------------------------

class ConstantLapse:
    """Constant positive lapse; all closed forms consume it through B_t."""

    def __init__(self, value=1.0):
        if value <= 0:
            raise ValueError("lapse must be positive")
        self.value = float(value)

    def at(self, t):
        return self.value

    def B(self, t):
        return self.value * t

    def solve_B(self, target):
        return target / self.value


class TabulatedLapse:
    """Lapse sampled on a uniform-enough grid containing t = 0; B_t is the
    trapezoidal cumulative integral."""

    def __init__(self, ts, values):
        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != values.shape or len(ts) < 2:
            raise ValueError("need matching 1d sample arrays")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("sample times must be increasing")
        if np.any(values <= 0):
            raise ValueError("lapse must be positive")
        if ts[0] > 0 or ts[-1] < 0:
            raise ValueError("samples must bracket t = 0")
        self.ts = ts
        self.values = values
        cum = np.concatenate([[0.0], np.cumsum(np.diff(ts) * 0.5 * (values[1:] + values[:-1]))])
        self._cum = cum - np.interp(0.0, ts, cum)

    def at(self, t):
        return float(np.interp(t, self.ts, self.values))

    def B(self, t):
        if t < self.ts[0] or t > self.ts[-1]:
            raise OutsideMaximalIntervalError("t outside the tabulated lapse range")
        return float(np.interp(t, self.ts, self._cum))

    def solve_B(self, target):
        if target < self._cum[0] or target > self._cum[-1]:
            return None
        return float(np.interp(target, self._cum, self.ts))


def make_lapse(spec):
    if isinstance(spec, (ConstantLapse, TabulatedLapse)):
        return spec
    if isinstance(spec, (int, float)):
        return ConstantLapse(float(spec))
    if isinstance(spec, dict):
        return TabulatedLapse(spec["ts"], spec["values"])
    raise ValueError("lapse spec must be a number or {'ts': ..., 'values': ...}")


# ---------------------------------------------------------------------------
# Cauchy pairs and constraints
# ---------------------------------------------------------------------------

class CauchyPair:
    """Left-invariant coframe / shape-operator pair on a 3D Lie group."""

    def __init__(self, group, E=None, theta=None):
        self.group = group
        self.E = np.eye(3) if E is None else np.asarray(E, dtype=float)
        if abs(np.linalg.det(self.E)) < 1e-12:
            raise ValueError("coframe matrix must be invertible")
        theta = np.zeros((3, 3)) if theta is None else np.asarray(theta, dtype=float)
        if np.abs(theta - theta.T).max() > 1e-12:
            raise ValueError("shape operator must be symmetric")
        self.theta = 0.5 * (theta + theta.T)

    @staticmethod
    def from_theta(theta):
        """Canonical pair: identity coframe on the group generated by theta."""
        return CauchyPair(group_from_theta(theta), np.eye(3), theta)


def theta_invariants(theta):
    """(lambda, T, Delta) of the shape operator: the off-slice magnitude and
    the trace/determinant of the tangential 2x2 block."""
    lam = float(np.hypot(theta[U, L], theta[U, N]))
    T = float(theta[L, L] + theta[N, N])
    Delta = float(theta[L, L] * theta[N, N] - theta[L, N] ** 2)
    return lam, T, Delta


def one_form_to_mc(E, x_hat):
    return E.T @ np.asarray(x_hat, dtype=float)


def two_form_to_mc(E, omega_hat):
    return E.T @ np.asarray(omega_hat, dtype=float) @ E


def cauchy_residual(pair, theta=None):
    """Residual norms of the parallel Cauchy constraint system.

    Returns a dict with the three coframe equations d e_a = Theta_ab e_b ^ e_u
    and the closedness of Theta(e_u), all evaluated through theted
    left-invariant exterior derivative in the Maurer-Cartan basis.
    """
    theta = pair.theta if theta is None else theta
    g, E = pair.group, pair.E
    out = {}
    for a, name in zip((U, L, N), "uln"):
        d_ea = d_leftinv(g, E[a])
        rhs = sum(theta[a, b] * wedge11(E[b], E[U]) for b in range(3))
        out[name] = float(np.linalg.norm(d_ea - rhs))
    theta_eu = theta[U, :] @ E  # one-form Theta(e_u) in the MC basis
    out["dTheta_u"] = float(np.linalg.norm(d_leftinv(g, theta_eu)))
    return out


def classify_group(theta, tol=1e-10):
    """Isomorphism type of the group carrying a Cauchy pair with this shape
    operator: returns (tag, mu) with mu set only for the tau3 family."""
    theta = np.asarray(theta, dtype=float)
    lam, T, Delta = theta_invariants(theta)
    if lam > tol and abs(Delta) > tol:
        raise InadmissibleThetaError(
            f"lambda = {lam:.3g} and Delta = {Delta:.3g} cannot both be nonzero"
        )
    if abs(T) <= tol and abs(Delta) <= tol and lam <= tol:
        return "R3", None
    if abs(T) <= tol and lam <= tol and abs(Delta) > tol:
        return "E(1,1)", None
    if abs(Delta) <= tol:
        return "tau2+R", None
    # here T, Delta != 0 and lambda = 0
    if abs(theta[L, N]) > tol:
        root = np.sqrt(T * T - 4.0 * Delta)
        mu = (T - np.sign(T) * root) / (T + np.sign(T) * root)
    elif abs(theta[L, L]) >= abs(theta[N, N]):
        mu = theta[N, N] / theta[L, L]
    else:
        mu = theta[L, L] / theta[N, N]
    return "tau3,mu", float(mu)


def algebraic_theta_residuals(theta):
    """The four admissibility conditions coupling the initial shape operator."""
    t = theta
    return np.array(
        [
            t[L, N] * t[U, L] - t[L, L] * t[U, N],
            t[N, N] * t[U, L] - t[L, N] * t[U, N],
            t[L, N] * t[U, N] + t[U, L] * (t[L, L] + t[U, U]),
            t[L, N] * t[U, L] + t[U, N] * (t[N, N] + t[U, U]),
        ]
    )


# ---------------------------------------------------------------------------
# closed-form evolution of the shape operator
# ---------------------------------------------------------------------------

def maximal_interval(theta0, lapse):
    """Largest time interval on which the closed-form flow stays finite."""
    lapse = make_lapse(lapse)
    theta0 = np.asarray(theta0, dtype=float)
    lam, _, _ = theta_invariants(theta0)
    if lam == 0.0:
        tuu = theta0[U, U]
        if tuu == 0.0:
            return (-np.inf, np.inf)
        t0 = lapse.solve_B(1.0 / tuu)
        if t0 is None:
            return (-np.inf, np.inf)
        return (-np.inf, t0) if tuu > 0 else (t0, np.inf)
    y0 = np.arctan2(theta0[U, U], lam)
    tm = lapse.solve_B((-np.pi / 2.0 - y0) / lam)
    tp = lapse.solve_B((np.pi / 2.0 - y0) / lam)
    return (-np.inf if tm is None else tm, np.inf if tp is None else tp)


def _check_inside(theta0, lapse, t):
    tm, tp = maximal_interval(theta0, lapse)
    if not (tm < t < tp) and t != 0.0:
        raise OutsideMaximalIntervalError(f"t = {t} outside ({tm}, {tp})")


def theta_closed_form(theta0, lapse, t, tol=1e-9):
    """Shape operator at time t along the parallel spinor flow."""
    lapse = make_lapse(lapse)
    theta0 = np.asarray(theta0, dtype=float)
    _check_inside(theta0, lapse, t)
    B = lapse.B(t)
    lam, _, _ = theta_invariants(theta0)
    out = np.zeros((3, 3))
    if lam == 0.0:
        den = 1.0 - theta0[U, U] * B
        out[U, U] = theta0[U, U] / den
        out[L, L] = theta0[L, L] / den
        out[L, N] = out[N, L] = theta0[L, N] / den
        out[N, N] = theta0[N, N] / den
        return out
    resid = algebraic_theta_residuals(theta0)
    scale = max(1.0, float(np.abs(theta0).max()) ** 2)
    if np.abs(resid).max() > tol * scale:
        raise InadmissibleThetaError(
            f"initial data violates the algebraic flow conditions: {resid}"
        )
    tuu = theta0[U, U]
    y = lam * B + np.arctan2(tuu, lam)
    tan_y = np.tan(y)
    sec_y = 1.0 / np.cos(y)
    root = np.sqrt(lam * lam + tuu * tuu)
    c_ll = (theta0[L, L] * lam**2 + theta0[U, L] ** 2 * tuu) / (lam * root)
    c_nn = (theta0[N, N] * lam**2 + theta0[U, N] ** 2 * tuu) / (lam * root)
    c_ln = (theta0[L, N] * lam**2 + theta0[U, L] * theta0[U, N] * tuu) / (lam * root)
    out[U, U] = lam * tan_y
    out[U, L] = out[L, U] = theta0[U, L]
    out[U, N] = out[N, U] = theta0[U, N]
    out[L, L] = c_ll * sec_y - theta0[U, L] ** 2 / lam * tan_y
    out[N, N] = c_nn * sec_y - theta0[U, N] ** 2 / lam * tan_y
    out[L, N] = out[N, L] = c_ln * sec_y - theta0[U, L] * theta0[U, N] / lam * tan_y
    return out


def flow_closed_form(pair, lapse, t, tol=1e-9):
    """Coframe matrix E^t = U^t E of the left-invariant parallel spinor flow."""
    lapse = make_lapse(lapse)
    theta0 = pair.theta
    _check_inside(theta0, lapse, t)
    B = lapse.B(t)
    lam, T, Delta = theta_invariants(theta0)
    Umat = np.zeros((3, 3))
    if lam == 0.0:
        tuu = theta0[U, U]
        den = 1.0 - tuu * B
        Umat[U, U] = den
        block = theta0[1:, 1:]
        evals, Q = np.linalg.eigh(block)
        if abs(tuu) > 1e-13:
            # (1 - Tuu B)^(rho) with rho = eigenvalue / Tuu
            powers = den ** (evals / tuu)
        else:
            # formal limit Tuu -> 0: exponentials linear in B in the exponent
            powers = np.exp(-evals * B)
        Umat[1:, 1:] = Q @ np.diag(powers) @ Q.T
        return Umat @ pair.E
    resid = algebraic_theta_residuals(theta0)
    if np.abs(resid).max() > tol * max(1.0, float(np.abs(theta0).max()) ** 2):
        raise InadmissibleThetaError(
            f"initial data violates the algebraic flow conditions: {resid}"
        )
    tuu = theta0[U, U]
    tul, tun = theta0[U, L], theta0[U, N]
    y = lam * B + np.arctan2(tuu, lam)
    tan_y = np.tan(y)
    Umat[U, U] = 1.0 - tuu * B
    Umat[U, L] = -tul * B
    Umat[U, N] = -tun * B
    slope = tuu / lam - (1.0 - tuu * B) * tan_y
    Umat[L, U] = tul / lam * slope
    Umat[N, U] = tun / lam * slope
    Umat[L, L] = 1.0 + tul**2 * B / lam * tan_y
    Umat[N, N] = 1.0 + tun**2 * B / lam * tan_y
    Umat[L, N] = Umat[N, L] = tul * tun * B / lam * tan_y
    return Umat @ pair.E


# ---------------------------------------------------------------------------
# numerical oracle
# ---------------------------------------------------------------------------

class FlowState:
    """Snapshot of the flow: time, B_t, transition matrix, coframe, shape."""

    def __init__(self, t, B, Umat, E, theta, lapse_value):
        self.t = t
        self.B = B
        self.U = Umat
        self.E = E
        self.theta = theta
        self.lapse_value = lapse_value


def flow_numeric(pair, lapse, t_max, step):
    """Classical RK4 integration of dU/dt = -lapse * Theta^t U from U = Id.

    Returns the list of FlowState samples at the grid points.  Theta^t is
    supplied by the closed form, so this is a genuine independent check of
    the transition-matrix formulas only.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    lapse = make_lapse(lapse)
    theta0 = pair.theta
    tm, tp = maximal_interval(theta0, lapse)
    if not (tm < t_max < tp):
        raise OutsideMaximalIntervalError(f"t_max = {t_max} outside ({tm}, {tp})")
    n = int(round(abs(t_max) / step))
    h = t_max / max(n, 1)
    Umat = np.eye(3)
    states = [FlowState(0.0, 0.0, Umat.copy(), pair.E.copy(), theta0.copy(), lapse.at(0.0))]

    def rhs(t, M):
        return -lapse.at(t) * theta_closed_form(theta0, lapse, t) @ M

    t = 0.0
    for _ in range(n):
        k1 = rhs(t, Umat)
        k2 = rhs(t + h / 2.0, Umat + h / 2.0 * k1)
        k3 = rhs(t + h / 2.0, Umat + h / 2.0 * k2)
        k4 = rhs(t + h, Umat + h * k3)
        Umat = Umat + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        theta_t = theta_closed_form(theta0, lapse, t)
        states.append(
            FlowState(t, lapse.B(t), Umat.copy(), Umat @ pair.E, theta_t, lapse.at(t))
        )
    return states


def shape_from_metric_path(E_prev, E_next, dt, lapse_value):
    """Shape operator recovered from the flowed metric, -(1/2 lapse) dh/dt,
    expressed in the coframe basis at the midpoint."""
    h_prev = E_prev.T @ E_prev
    h_next = E_next.T @ E_next
    dh = (h_next - h_prev) / dt
    E_mid = 0.5 * (E_prev + E_next)
    theta_mc = -dh / (2.0 * lapse_value)
    Einv = np.linalg.inv(E_mid)
    return Einv.T @ theta_mc @ Einv


def integrability_residual(lapse, thetas, ts):
    """Finite-difference residuals of the six flow ODEs plus the pointwise
    algebraic conditions, for a sampled shape-operator path."""
    lapse = make_lapse(lapse)
    thetas = np.asarray(thetas, dtype=float)
    ts = np.asarray(ts, dtype=float)
    ode_resid = np.zeros(6)
    for k in range(1, len(ts) - 1):
        dt = ts[k + 1] - ts[k - 1]
        dot = (thetas[k + 1] - thetas[k - 1]) / dt
        th = thetas[k]
        lv = lapse.at(ts[k])
        want = {
            (U, U): lv * (th[U, U] ** 2 + th[U, L] ** 2 + th[U, N] ** 2),
            (U, L): 0.0,
            (U, N): 0.0,
            (L, L): lv * (th[L, L] * th[U, U] - th[U, L] ** 2),
            (L, N): lv * (th[L, N] * th[U, U] - th[U, N] * th[U, L]),
            (N, N): lv * (th[N, N] * th[U, U] - th[U, N] ** 2),
        }
        for i, (ab, w) in enumerate(want.items()):
            ode_resid[i] = max(ode_resid[i], abs(dot[ab] - w))
    alg = max(np.abs(algebraic_theta_residuals(th)).max() for th in thetas)
    keys = ["uu", "ul", "un", "ll", "ln", "nn"]
    out = {f"ode_{k}": float(v) for k, v in zip(keys, ode_resid)}
    out["algebraic"] = float(alg)
    return out


# ---------------------------------------------------------------------------
# Hamiltonian constraint
# ---------------------------------------------------------------------------

def hamiltonian_constraint(pair, theta=None):
    """H = s^h + Tr(Theta)^2 - |Theta|^2 for the orthonormal coframe metric."""
    theta = pair.theta if theta is None else theta
    s = scalar_curvature_leftinv(pair.group, pair.E)
    return float(s + np.trace(theta) ** 2 - np.sum(theta * theta))


def hamiltonian_evolution(pair, lapse, t):
    """Closed-form value of H_t along the flow, by the case laws."""
    lapse = make_lapse(lapse)
    theta0 = pair.theta
    _check_inside(theta0, lapse, t)
    H0 = hamiltonian_constraint(pair)
    lam, _, _ = theta_invariants(theta0)
    B = lapse.B(t)
    if lam == 0.0:
        return H0 / (1.0 - theta0[U, U] * B) ** 2
    y = lam * B + np.arctan2(theta0[U, U], lam)
    return H0 * lam**2 / (lam**2 + theta0[U, U] ** 2) / np.cos(y) ** 2


# ---------------------------------------------------------------------------
# skew-torsion constraint residuals
# ---------------------------------------------------------------------------

def _star1(x_hat):
    """Hodge star of a one-form in the orthonormal coframe basis (2-form out)."""
    return np.einsum("c,cab->ab", x_hat, _EPS3)


def _star2(omega_hat):
    """Hodge star of a 2-form in the orthonormal coframe basis (1-form out)."""
    return 0.5 * np.einsum("cab,ab->c", _EPS3, omega_hat)


class SkewCauchyData:
    """Cauchy pair extended by left-invariant skew-torsion data.

    alpha0 is the scalar part of the torsion one-form, alpha_perp its
    tangential part in the coframe basis; c2 (a 2-form) and psi (the dilaton
    velocity) ride along for interfaces that consume them but do not enter
    the constraint residuals.
    """

    def __init__(self, pair, alpha0=0.0, alpha_perp=None, c2=None, psi=None):
        self.pair = pair
        self.alpha0 = float(alpha0)
        self.alpha_perp = (
            np.zeros(3) if alpha_perp is None else np.asarray(alpha_perp, dtype=float)
        )
        self.c2 = None if c2 is None else np.asarray(c2, dtype=float)
        self.psi = psi


def skew_cauchy_residual(data):
    """Residuals of the skew-torsion spinor Cauchy constraints.

    Evaluates the three exterior equations, the closedness of the class
    representative Theta(e_u) + (1/2) * (alpha_perp ^ e_u), and the
    left-invariant exactness surrogate (its plain norm: on a simply connected
    group a left-invariant one-form is exact iff it vanishes).
    """
    pair, a0, ap = data.pair, data.alpha0, data.alpha_perp
    g, E, theta = pair.group, pair.E, pair.theta
    e_hat = np.eye(3)
    out = {}
    for a, name in zip((U, L, N), "uln"):
        lhs = d_leftinv(g, E[a])
        theta_ea = theta[a, :]  # one-form in the coframe basis
        rhs_hat = np.outer(theta_ea, e_hat[U]) - np.outer(e_hat[U], theta_ea)
        if a == U:
            bar = ap - a0 * e_hat[U]
            rhs_hat = rhs_hat + _star1(bar)
            w = _star2(wedge11(ap, e_hat[U]))
            rhs_hat = rhs_hat + 0.5 * wedge11(w, e_hat[U])
        else:
            rhs_hat = rhs_hat + (0.5 * ap[U] - a0) * _star1(e_hat[a])
        out[name] = float(np.linalg.norm(lhs - two_form_to_mc(E, rhs_hat)))
    rep_hat = theta[U, :] + 0.5 * _star2(wedge11(ap, e_hat[U]))
    rep_mc = one_form_to_mc(E, rep_hat)
    out["class_closed"] = float(np.linalg.norm(d_leftinv(g, rep_mc)))
    out["class_exact"] = float(np.linalg.norm(rep_hat))
    return out


def torsion_flat_witness(data):
    """The one-forms beta_l, beta_n whose closedness characterizes skew-torsion
    flat Cauchy data, with their closedness residuals."""
    pair, ap = data.pair, data.alpha_perp
    g, E, theta = pair.group, pair.E, pair.theta
    e_hat = np.eye(3)
    out = {}
    for a, name in zip((L, N), "ln"):
        beta_hat = theta[a, :] + 0.5 * _star2(wedge11(ap, e_hat[a]))
        beta_mc = one_form_to_mc(E, beta_hat)
        out[name] = (beta_hat, float(np.linalg.norm(d_leftinv(g, beta_mc))))
    return out
