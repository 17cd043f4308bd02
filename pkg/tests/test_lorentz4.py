import numpy as np
import pytest

from polyform.kahler import Multivector, det_inner, geometric_product, hodge, wedge
from polyform.clifford import build_module, square_polyform
from polyform.lorentz4 import (
    DegenerateZeroError,
    MinkowskiSpace,
    NotASquareError,
    NullCoframe,
    ParabolicPair,
    TorsionData,
    apply_covector_map,
    complete_coframe,
    gauge_act,
    metric_of,
    skew_torsion_residual,
    square_to_pair,
    stabilizer_element,
    standard_coframe,
    torsion_system_residual,
)

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


@pytest.fixture(scope="module")
def mink():
    return MinkowskiSpace()


@pytest.fixture(scope="module")
def module31(mink):
    return build_module(mink.space, sigma=-1)


def test_hodge_identity_suite(mink):
    cf = standard_coframe(mink)
    u, v, l, n = cf.covectors()
    nu = mink.volume()
    cases = [
        (hodge(u), -wedge(wedge(u, l), n)),
        (hodge(v), wedge(wedge(v, l), n)),
        (hodge(l), wedge(wedge(u, v), n)),
        (hodge(n), -wedge(wedge(u, v), l)),
        (hodge(wedge(u, v)), -wedge(l, n)),
        (hodge(wedge(u, l)), wedge(u, n)),
        (hodge(wedge(v, l)), -wedge(v, n)),
        (hodge(nu), Multivector.scalar(mink.space, -1.0)),
    ]
    for got, want in cases:
        assert np.allclose(got.coeffs, want.coeffs, atol=1e-12)
    # star squares to +1 on one-forms and -1 on two-forms
    rng = np.random.default_rng(0)
    a = Multivector(mink.space, rng.normal(size=16))
    one = a.grade(1)
    two = a.grade(2)
    assert (hodge(hodge(one)) - one).norm() < 1e-12
    assert (hodge(hodge(two)) + two).norm() < 1e-12
    # iota_w * b = *(b ^ w)
    from polyform.kahler import contract

    w = mink.covector(rng.normal(size=4))
    b = a.grade(2)
    assert (contract(w, hodge(b)) - hodge(wedge(b, w))).norm() < 1e-12


def test_parabolic_pair_validation(mink):
    e = [mink.basis(i) for i in range(4)]
    ParabolicPair(mink, e[0] + e[1], e[2])
    with pytest.raises(DegenerateZeroError):
        ParabolicPair(mink, Multivector.zero(mink.space), e[2])
    with pytest.raises(ValueError):
        ParabolicPair(mink, e[1], e[2])  # u not null
    with pytest.raises(ValueError):
        ParabolicPair(mink, e[0] + e[1], 2.0 * e[2])  # l not unit
    with pytest.raises(ValueError):
        ParabolicPair(mink, e[0] + e[1], e[1])  # l not orthogonal to u


def test_square_to_pair_already_canonical(mink):
    e = [mink.basis(i) for i in range(4)]
    u0 = e[0] + e[1]
    l0 = e[2]
    alpha = u0 + wedge(u0, l0)
    pair = square_to_pair(mink, alpha)
    assert (pair.u - u0).norm() < 1e-12
    assert (pair.l - l0).norm() < 1e-12


def test_square_to_pair_gauge_fixes(mink):
    e = [mink.basis(i) for i in range(4)]
    u0 = e[0] + e[1]
    l0 = e[2]
    alpha = u0 + wedge(u0, l0 + 3.0 * u0)
    pair = square_to_pair(mink, alpha)
    assert (pair.u - u0).norm() < 1e-12
    assert (pair.l - l0).norm() < 1e-12
    assert abs(mink.h(pair.l, mink.t_or)) < 1e-12


def test_square_to_pair_rejections(mink):
    e = [mink.basis(i) for i in range(4)]
    alpha = Multivector.scalar(mink.space, 1.0) + e[0] + e[1]
    with pytest.raises(NotASquareError):
        square_to_pair(mink, alpha)
    with pytest.raises(DegenerateZeroError):
        square_to_pair(mink, Multivector.zero(mink.space))
    # non-null Dirac covector
    with pytest.raises(NotASquareError):
        square_to_pair(mink, e[1] + wedge(e[1], e[2]))


def test_square_to_pair_round_trip_with_spinors(mink, module31):
    rng = np.random.default_rng(1)
    for _ in range(50):
        xi = module31.random_spinor(rng)
        if np.linalg.norm(xi.comps) < 1e-3:
            continue
        alpha = square_polyform(xi, +1)
        pair = square_to_pair(mink, alpha)
        back = pair.canonical().polyform()
        assert (back - alpha).norm() < 1e-9 * max(1.0, alpha.norm())


def test_complete_coframe_standard(mink):
    e = [mink.basis(i) for i in range(4)]
    pair = ParabolicPair(mink, e[0] + e[1], e[2])
    v = 0.5 * (e[1] - e[0])
    cf = complete_coframe(mink, pair, v)
    assert (cf.n - e[3]).norm() < 1e-12
    with pytest.raises(ValueError):
        complete_coframe(mink, pair, e[1])  # not null
    with pytest.raises(ValueError):
        complete_coframe(mink, pair, 2.0 * v + e[2] * 0.0 + (e[1] - e[0]))  # h(u,v) != 1


def test_complete_coframe_regauges_l(mink):
    e = [mink.basis(i) for i in range(4)]
    u = e[0] + e[1]
    pair = ParabolicPair(mink, u, e[2])
    w = e[2]
    v = 0.5 * (e[1] - e[0])
    v2 = v - 0.5 * mink.h(w, w) * u + w
    cf = complete_coframe(mink, pair, v2)
    assert abs(mink.h(cf.l, cf.v)) < 1e-12
    assert abs(mink.h(cf.l, cf.l) - 1.0) < 1e-12


def test_gauge_act_torsor(mink):
    # R^2 torsor structure: acting by (c1', c2') in the transformed frame
    # composes to (c1 + c1', c2 + c2') in the original frame
    cf = standard_coframe(mink)
    rng = np.random.default_rng(2)
    c1, c2, d1, d2 = rng.normal(size=4)
    id_cf = gauge_act(mink, Multivector.zero(mink.space), cf)
    for a, b in zip(id_cf.covectors(), cf.covectors()):
        assert (a - b).norm() < 1e-12
    mid = gauge_act(mink, c1 * cf.l + c2 * cf.n, cf)
    lhs = gauge_act(mink, d1 * mid.l + d2 * mid.n, mid)
    rhs = gauge_act(mink, (c1 + d1) * cf.l + (c2 + d2) * cf.n, cf)
    for a, b in zip(lhs.covectors(), rhs.covectors()):
        assert (a - b).norm() < 1e-11
    with pytest.raises(ValueError):
        gauge_act(mink, cf.u, cf)
    with pytest.raises(ValueError):
        gauge_act(mink, cf.l + 0.2 * cf.v, cf)


def test_gauge_act_direction_shift(mink):
    cf = standard_coframe(mink)
    a = 1.7
    out = gauge_act(mink, a * cf.l, cf)
    assert (out.v - (cf.v - 0.5 * a**2 * cf.u + a * cf.l)).norm() < 1e-12
    assert (out.l - (cf.l - a * cf.u)).norm() < 1e-12
    assert (out.n - cf.n).norm() < 1e-12


def test_metric_of(mink):
    cf = standard_coframe(mink)
    assert np.allclose(metric_of(cf), ETA, atol=1e-12)
    rng = np.random.default_rng(3)
    w = rng.normal() * cf.l + rng.normal() * cf.n
    cf2 = gauge_act(mink, w, cf)
    assert np.allclose(metric_of(cf2), metric_of(cf), atol=1e-11)
    # a boosted coframe still assembles a Lorentzian metric
    e = [mink.basis(i) for i in range(4)]
    lam = 2.5
    cf3 = NullCoframe(mink, lam * (e[0] + e[1]), 0.5 / lam * (e[1] - e[0]), e[2], e[3])
    sig = np.sort(np.linalg.eigvalsh(metric_of(cf3)))
    assert sig[0] < 0 < sig[1]
    assert (np.sign(sig) == [-1, 1, 1, 1]).all()


def test_stabilizer_element(mink):
    cf = standard_coframe(mink)
    T0 = stabilizer_element(mink, cf, 0.0, 0.0)
    assert np.allclose(T0, np.eye(4), atol=1e-12)
    rng = np.random.default_rng(4)
    for _ in range(10):
        c1, c2 = rng.normal(size=2)
        T = stabilizer_element(mink, cf, c1, c2)
        assert np.abs(T.T @ ETA @ T - ETA).max() < 1e-10
        assert abs(np.linalg.det(T) - 1.0) < 1e-10
        # fixes the spinor square
        alpha = cf.u + wedge(cf.u, cf.l)
        moved = apply_covector_map(mink, T, alpha)
        assert (moved - alpha).norm() < 1e-10
        # pullback of l is the gauge shift l - c1 u
        lt = apply_covector_map(mink, T, cf.l)
        assert (lt - (cf.l - c1 * cf.u)).norm() < 1e-10
    # group law: R^2 structure
    Ta = stabilizer_element(mink, cf, 1.0, 2.0)
    Tb = stabilizer_element(mink, cf, 3.0, -1.0)
    Tc = stabilizer_element(mink, cf, 4.0, 1.0)
    assert np.abs(Ta @ Tb - Tc).max() < 1e-10


def test_stabilizer_vs_boost_rotation(mink):
    # one-parameter boosts/rotations fix alpha only at the identity
    cf = standard_coframe(mink)
    alpha = cf.u + wedge(cf.u, cf.l)
    t = 0.3
    boost = np.eye(4)
    boost[0, 0] = boost[1, 1] = np.cosh(t)
    boost[0, 1] = boost[1, 0] = np.sinh(t)
    moved = apply_covector_map(mink, boost, alpha)
    assert (moved - alpha).norm() > 1e-3
    rot = np.eye(4)
    rot[2, 2] = rot[3, 3] = np.cos(t)
    rot[2, 3] = -np.sin(t)
    rot[3, 2] = np.sin(t)
    moved2 = apply_covector_map(mink, rot, alpha)
    assert (moved2 - alpha).norm() > 1e-3


# ---------------------------------------------------------------------------
# torsion residuals
# ---------------------------------------------------------------------------

def zero2(mink):
    return Multivector.zero(mink.space)


def test_torsion_residual_flat(mink):
    cf = standard_coframe(mink)
    dcf = {k: zero2(mink) for k in "uvln"}
    td = TorsionData(mink)
    res = torsion_system_residual(cf, dcf, td)
    assert max(res.values()) == 0.0


def test_torsion_residual_conformally_parallel(mink):
    # d(cf_a) = xi ^ cf_a solves the system with vectorial torsion xi
    cf = standard_coframe(mink)
    rng = np.random.default_rng(5)
    xi = mink.covector(rng.normal(size=4))
    dcf = {k: wedge(xi, x) for k, x in zip("uvln", cf.covectors())}
    td = TorsionData(mink, xi=xi)
    res = torsion_system_residual(cf, dcf, td)
    assert max(res.values()) < 1e-12


def test_torsion_residual_detects_perturbation(mink):
    cf = standard_coframe(mink)
    rng = np.random.default_rng(6)
    xi = mink.covector(rng.normal(size=4))
    dcf = {k: wedge(xi, x) for k, x in zip("uvln", cf.covectors())}
    raw = rng.normal(size=(4, 4, 4))
    td = TorsionData(mink, xi=xi, tau=raw)
    res = torsion_system_residual(cf, dcf, td)
    assert max(res.values()) > 1e-3


def test_torsion_residual_general_consistency(mink):
    # build dcf from arbitrary torsion data, then the residual must vanish
    cf = standard_coframe(mink)
    rng = np.random.default_rng(7)
    xi = mink.covector(rng.normal(size=4))
    kappa = mink.covector(rng.normal(size=4))
    rho = mink.covector(rng.normal(size=4))
    H = Multivector(mink.space, rng.normal(size=16)).grade(3)
    td = TorsionData(mink, xi=xi, tau=rng.normal(size=(4, 4, 4)), H=H,
                     kappa=kappa, rho=rho)
    from polyform.kahler import contract

    u, v, l, n = cf.covectors()
    dcf = {
        "u": contract(u, td.H) + wedge(xi, u) - td.tau_contract(u),
        "v": contract(v, td.H) + wedge(xi, v) - td.tau_contract(v)
        - wedge(kappa, l) - wedge(rho, n),
        "l": contract(l, td.H) + wedge(xi, l) - td.tau_contract(l) + wedge(kappa, u),
        "n": contract(n, td.H) + wedge(xi, n) - td.tau_contract(n) + wedge(rho, u),
    }
    res = torsion_system_residual(cf, dcf, td)
    assert max(res.values()) < 1e-12


def test_torsion_data_projection(mink):
    rng = np.random.default_rng(8)
    td = TorsionData(mink, tau=rng.normal(size=(4, 4, 4)))
    # cyclic sum and trace vanish by construction
    A = td.tau
    cyc = A + np.transpose(A, (1, 2, 0)) + np.transpose(A, (2, 0, 1))
    assert np.abs(cyc).max() < 1e-12
    tr = np.einsum("m,mmj->j", mink.space.eta, A)
    assert np.abs(tr).max() < 1e-12
    assert np.abs(A + np.transpose(A, (0, 2, 1))).max() < 1e-12


def test_skew_torsion_residual_parallel(mink):
    cf = standard_coframe(mink)
    dcf = {k: zero2(mink) for k in "uvln"}
    res = skew_torsion_residual(cf, dcf, Multivector.zero(mink.space))
    assert max(res.values()) == 0.0


def test_skew_torsion_matches_vacuum_cauchy(mink):
    # alpha = 0 reduces the skew system to the torsionless one
    cf = standard_coframe(mink)
    rng = np.random.default_rng(9)
    kappa = mink.covector(rng.normal(size=4))
    rho = mink.covector(rng.normal(size=4))
    dcf = {
        "u": zero2(mink),
        "v": -wedge(kappa, cf.l) - wedge(rho, cf.n),
        "l": wedge(kappa, cf.u),
        "n": wedge(rho, cf.u),
    }
    res = skew_torsion_residual(cf, dcf, Multivector.zero(mink.space), kappa, rho)
    assert max(res.values()) < 1e-12
    td = TorsionData(mink, kappa=kappa, rho=rho)
    res2 = torsion_system_residual(cf, dcf, td)
    assert max(res2.values()) < 1e-12


def test_skew_torsion_consistent_system(mink):
    cf = standard_coframe(mink)
    rng = np.random.default_rng(10)
    alpha = mink.covector(rng.normal(size=4))
    kappa = mink.covector(rng.normal(size=4))
    rho = mink.covector(rng.normal(size=4))
    dcf = {
        "u": hodge(wedge(alpha, cf.u)),
        "v": hodge(wedge(alpha, cf.v)) - wedge(kappa, cf.l) - wedge(rho, cf.n),
        "l": hodge(wedge(alpha, cf.l)) + wedge(kappa, cf.u),
        "n": hodge(wedge(alpha, cf.n)) + wedge(rho, cf.u),
    }
    res = skew_torsion_residual(cf, dcf, alpha, kappa, rho)
    assert max(res.values()) < 1e-12
    # a u-directed kappa inconsistency moves only the v residual
    res2 = skew_torsion_residual(cf, dcf, alpha, kappa + cf.u, rho)
    assert res2["u"] < 1e-12 and res2["l"] < 1e-12 and res2["n"] < 1e-12
    assert res2["v"] > 1e-3


def test_killing_specialization_residual(mink):
    # du = 2c u ^ l realized through vectorial torsion xi = -2c l
    cf = standard_coframe(mink)
    c = 0.8
    xi = -2.0 * c * cf.l
    dcf = {
        "u": 2.0 * c * wedge(cf.u, cf.l),
        "v": wedge(xi, cf.v),
        "l": wedge(xi, cf.l),
        "n": wedge(xi, cf.n),
    }
    td = TorsionData(mink, xi=xi)
    res = torsion_system_residual(cf, dcf, td)
    assert res["u"] < 1e-12
    assert max(res.values()) < 1e-12


def test_metric_compatibility_on_left_invariant_data(mink):
    # For dcf_a = xi ^ cf_a with constant coframe coefficients, the implied
    # brackets satisfy L_{X_w} g = 2 xi(X_w) g - f^w (.) xi (the tau = 0 case
    # of the symmetrized torsion system), with Lie derivatives reduced to
    # structure-constant contractions.
    cf = standard_coframe(mink)
    rng = np.random.default_rng(11)
    xi_hat = rng.normal(size=4)  # coefficients in the coframe basis
    covs = cf.covectors()
    xi = sum((xi_hat[i] * covs[i] for i in range(1, 4)), xi_hat[0] * covs[0])
    dcf = [wedge(xi, x) for x in covs]
    F = cf.component_matrix()
    V = np.linalg.inv(F).T  # rows: frame vectors dual to the coframe
    # W[a,b,c] = (d f^a)(X_b, X_c) from the ambient 2-form coefficients
    W = np.zeros((4, 4, 4))
    for a in range(4):
        M = np.zeros((4, 4))
        for i in range(4):
            for j in range(i + 1, 4):
                M[i, j] = dcf[a].coeffs[(1 << i) | (1 << j)]
                M[j, i] = -M[i, j]
        W[a] = V @ M @ V.T
    # metric in the coframe basis: g = f^u (.) f^v + f^l (x) f^l + f^n (x) f^n
    g_hat = np.zeros((4, 4))
    g_hat[0, 1] = g_hat[1, 0] = 1.0
    g_hat[2, 2] = g_hat[3, 3] = 1.0
    g_hat_inv = np.linalg.inv(g_hat)
    for w in range(4):
        # Lie derivative along the raised covector (f^w)# = ghat^{-1}[w,a] X_a;
        # [X_a, X_y] = -W[c,a,y] X_c and the metric is frame-constant, so
        # (L g)(X_y, X_z) = r_a (W[c,a,y] g[c,z] + W[c,a,z] g[y,c])
        r = g_hat_inv[w]
        lie = np.einsum("a,cay,cz->yz", r, W, g_hat) + np.einsum(
            "a,caz,yc->yz", r, W, g_hat
        )
        ew = np.eye(4)[w]
        sym = np.outer(ew, xi_hat) + np.outer(xi_hat, ew)
        want = 2.0 * float(r @ xi_hat) * g_hat - sym
        assert np.abs(lie - want).max() < 1e-10
