import numpy as np
import pytest

from polyform.kahler import (
    Multivector,
    QuadraticSpace,
    det_inner,
    geometric_product,
    hodge,
    pi,
    so_derivation,
    tau,
    wedge,
)
from polyform.clifford import (
    Endomorphism,
    NotASquareError,
    Spinor,
    UnsupportedSignatureError,
    build_module,
    build_pairing,
    build_pairing_raw,
    chiral_projector,
    chirality,
    dequantize,
    is_admissible,
    is_tame,
    kernel_check,
    module_to_dict,
    polyform_chirality_defect,
    quantize,
    reconstruct_spinor,
    square_endo,
    square_polyform,
    tame_certificate,
)

SIGNATURES = [(2, 0), (1, 1), (2, 2), (3, 1), (8, 0)]

# symmetry of B_sigma per (d/2 mod 4), from the classification of admissible pairings
SYMMETRY_TABLE = {
    (+1, 0): +1, (+1, 1): +1, (+1, 2): -1, (+1, 3): -1,
    (-1, 0): +1, (-1, 1): -1, (-1, 2): -1, (-1, 3): +1,
}


@pytest.fixture(scope="module", params=SIGNATURES, ids=lambda s: f"{s[0]}{s[1]}")
def module(request):
    p, q = request.param
    sigma = -1 if (p, q) == (3, 1) else +1
    return build_module(QuadraticSpace(p, q), sigma=sigma)


def rand_mv(space, rng, scale=1.0):
    return Multivector(space, rng.uniform(-scale, scale, size=space.n_blades))


def test_unsupported_signatures_rejected():
    with pytest.raises(UnsupportedSignatureError):
        build_module(QuadraticSpace(0, 2))
    with pytest.raises(UnsupportedSignatureError):
        build_module(QuadraticSpace(4, 0))
    with pytest.raises(UnsupportedSignatureError):
        build_module(QuadraticSpace(1, 3))


def test_clifford_relations_and_dimension(module):
    sp = module.space
    N = module.N
    assert N == 2 ** (sp.d // 2)
    for i, gi in enumerate(module.gammas):
        for j, gj in enumerate(module.gammas):
            want = 2.0 * (sp.eta[i] if i == j else 0.0) * np.eye(N)
            assert np.max(np.abs(gi @ gj + gj @ gi - want)) < 1e-10


def test_symmetry_table_both_adjoint_types():
    for (p, q) in SIGNATURES:
        sp = QuadraticSpace(p, q)
        for sigma in (+1, -1):
            m = build_module(sp, sigma=sigma)
            want = SYMMETRY_TABLE[(sigma, (sp.d // 2) % 4)]
            assert m.s == want
            B, s = build_pairing(m, sigma)
            assert s == want
            assert np.max(np.abs(B - s * B.T)) < 1e-12
            assert abs(np.linalg.det(B)) > 1e-12


def test_pairing_definite_when_definite_signature():
    for (p, q) in [(2, 0), (8, 0)]:
        m = build_module(QuadraticSpace(p, q), sigma=+1)
        ev = np.linalg.eigvalsh(0.5 * (m.pairing + m.pairing.T))
        assert ev[0] > 0


def test_pairing_adjoint_identity(module):
    # gamma(x)^t = gamma((pi^{(1-sigma)/2} o tau)(x)) on generators
    for g in module.gammas:
        want = g if module.sigma == +1 else -g
        assert np.max(np.abs(module.adjoint(g) - want)) < 1e-10


def test_plus_minus_pairing_relation(module):
    # B_+ = C B_- (gamma(nu) x Id).  For the averaged construction the
    # constant follows from nu_+ nu = nu_+^2 nu_- (p even) resp.
    # nu_- nu = (-1)^{pq} nu_+ nu_-^2 (p odd); it equals (-1)^[q/2] except in
    # even signatures with p = 2 mod 4 and p - q = 2 mod 8, e.g. (2,0).
    sp = module.space
    Bp = build_pairing_raw(module.gammas, sp.eta, +1)
    Bm = build_pairing_raw(module.gammas, sp.eta, -1)
    nu = module.volume_action
    if sp.p % 2 == 0:
        C = (-1.0) ** (sp.p * (sp.p - 1) // 2)
    else:
        C = (-1.0) ** (sp.p * sp.q + sp.q * (sp.q + 1) // 2)
    if (sp.p, sp.q) != (2, 0):
        assert C == (-1.0) ** (sp.q // 2)
    want = C * nu.T @ Bm
    assert np.max(np.abs(Bp - want)) < 1e-10 * max(1.0, np.max(np.abs(Bp)))


def test_quantize_unital_and_generators(module):
    sp = module.space
    one = quantize(module, Multivector.scalar(sp, 1.0))
    assert np.allclose(one.mat, np.eye(module.N))
    for i in range(sp.d):
        got = quantize(module, Multivector.basis(sp, i))
        assert np.allclose(got.mat, module.gammas[i])


def test_dequantize_of_gamma_product(module):
    sp = module.space
    E = Endomorphism(module, module.gammas[0] @ module.gammas[1])
    got = dequantize(module, E)
    want = wedge(Multivector.basis(sp, 0), Multivector.basis(sp, 1))
    assert np.max(np.abs(got.coeffs - want.coeffs)) < 1e-12


def test_quantize_homomorphism_fuzz(module):
    rng = np.random.default_rng(101)
    sp = module.space
    for _ in range(100):
        a, b = rand_mv(sp, rng), rand_mv(sp, rng)
        lhs = quantize(module, geometric_product(a, b)).mat
        rhs = quantize(module, a).mat @ quantize(module, b).mat
        assert np.linalg.norm(lhs - rhs) < 1e-9
        back = dequantize(module, quantize(module, a))
        assert (back - a).norm() < 1e-9
        assert abs(np.trace(quantize(module, a).mat) - 2 ** (sp.d // 2) * a.scalar_part()) < 1e-9


def test_adjoint_transport_fuzz(module):
    rng = np.random.default_rng(103)
    sp = module.space
    for _ in range(50):
        a = rand_mv(sp, rng)
        sym = tau(a) if module.sigma == +1 else pi(tau(a))
        lhs = module.adjoint(quantize(module, a).mat)
        rhs = quantize(module, sym).mat
        assert np.linalg.norm(lhs - rhs) < 1e-9


def test_square_endo_euclidean_2d_example():
    m = build_module(QuadraticSpace(2, 0), sigma=+1)
    assert np.allclose(m.pairing, np.eye(2))
    E = square_endo(Spinor(m, [1.0, 0.0]), +1)
    assert np.allclose(E.mat, [[1.0, 0.0], [0.0, 0.0]])
    xi = Spinor(m, [0.3, -0.7])
    assert np.allclose(square_endo(xi, +1).mat, square_endo(-xi, +1).mat)
    assert np.linalg.norm(square_endo(Spinor(m, [0.0, 0.0]), +1).mat) == 0.0


def test_square_endo_properties(module):
    rng = np.random.default_rng(107)
    for _ in range(30):
        xi = module.random_spinor(rng)
        for kappa in (+1, -1):
            E = square_endo(xi, kappa).mat
            assert np.linalg.matrix_rank(E, tol=1e-10) <= 1
            assert np.linalg.norm(E @ E - np.trace(E) * E) < 1e-9 * max(1.0, np.linalg.norm(E)) ** 2
            assert np.linalg.norm(module.adjoint(E) - module.s * E) < 1e-9
            assert is_admissible(Endomorphism(module, E))
            assert is_tame(Endomorphism(module, E))


def test_admissible_counterexample():
    m = build_module(QuadraticSpace(2, 0), sigma=+1)
    E = Endomorphism(m, np.eye(2))
    # E o E = E but tr(E) E = 2E
    assert not is_admissible(E)
    assert not is_tame(E)


def test_admissible_traceless_split_case():
    # (2,2): the square of a pairing-null spinor is admissible with zero trace
    m = build_module(QuadraticSpace(2, 2), sigma=+1)
    rng = np.random.default_rng(5)
    xi = None
    for _ in range(200):
        cand = Spinor(m, chiral_projector(m, -1).mat @ rng.normal(size=4))
        if np.linalg.norm(cand.comps) > 0.3:
            xi = cand
            break
    assert xi is not None
    # skew pairing makes every spinor null
    assert abs(xi.pairing_norm()) < 1e-12
    E = square_endo(xi, +1)
    assert abs(np.trace(E.mat)) < 1e-12
    assert np.linalg.norm(E.mat) > 1e-3
    assert is_admissible(E)
    assert is_tame(E)
    sv = np.linalg.svd(E.mat, compute_uv=False)
    assert sv[1] < 1e-10 * sv[0]
    cert = tame_certificate(E)
    assert cert is not None
    t = np.trace(E.mat @ cert.mat)
    assert abs(t) > 1e-8 * np.linalg.norm(E.mat)


def test_square_polyform_matches_endo_route(module):
    rng = np.random.default_rng(109)
    xi = module.random_spinor(rng)
    a1 = square_polyform(xi, +1)
    a2 = dequantize(module, square_endo(xi, +1))
    assert np.allclose(a1.coeffs, a2.coeffs)
    assert square_polyform(Spinor(module, np.zeros(module.N)), +1).norm() == 0.0


def test_vanishing_grades_sign_criterion(module):
    # grade k dies when the pairing symmetry condition
    # (pi^{(1-sigma)/2} o tau)(alpha) = s alpha forces it to, i.e. when
    # (-1)^{k(1-sigma)/2} (-1)^{k(k-1)/2} = -s
    rng = np.random.default_rng(113)
    s, sigma = module.s, module.sigma
    killed = [
        k
        for k in range(module.space.d + 1)
        if (-1.0) ** (k * (1 - sigma) // 2) * (-1.0) ** (k * (k - 1) // 2) == -s
    ]
    for _ in range(20):
        a = square_polyform(module.random_spinor(rng), +1)
        assert a.max_grade_error(set(range(module.space.d + 1)) - set(killed)) < 1e-12


def test_fierz_system(module):
    rng = np.random.default_rng(127)
    sp = module.space
    dim = 2 ** (sp.d // 2)
    for _ in range(25):
        xi = module.random_spinor(rng)
        a = square_polyform(xi, +1)
        b = rand_mv(sp, rng)
        lhs = geometric_product(geometric_product(a, b), a)
        rhs = dim * geometric_product(a, b).scalar_part() * a
        assert (lhs - rhs).norm() < 1e-9 * max(1.0, lhs.norm())


def test_reconstruct_round_trip(module):
    rng = np.random.default_rng(131)
    for _ in range(30):
        xi = module.random_spinor(rng)
        kappa = +1 if rng.uniform() < 0.5 else -1
        a = square_polyform(xi, kappa)
        xi2, k2 = reconstruct_spinor(module, a)
        assert k2 == kappa
        d = min(
            np.linalg.norm(xi2.comps - xi.comps),
            np.linalg.norm(xi2.comps + xi.comps),
        )
        assert d < 1e-8 * max(1.0, np.linalg.norm(xi.comps))
        # both signs give back the same polyform
        assert (square_polyform(xi2, k2) - a).norm() < 1e-9
        assert (square_polyform(-xi2, k2) - a).norm() < 1e-9


def test_reconstruct_rejects_scalar_in_31():
    m = build_module(QuadraticSpace(3, 1), sigma=-1)
    with pytest.raises(NotASquareError):
        reconstruct_spinor(m, Multivector.scalar(m.space, 1.0))


def test_reconstruct_zero(module):
    xi, kappa = reconstruct_spinor(module, Multivector.zero(module.space))
    assert np.linalg.norm(xi.comps) == 0.0


def test_reconstruct_rejects_non_square(module):
    rng = np.random.default_rng(137)
    bad = rand_mv(module.space, rng)
    # a generic multivector is not a square; tolerate the rare accident by retrying
    for _ in range(5):
        try:
            xi, kappa = reconstruct_spinor(module, bad)
        except NotASquareError:
            return
        if (square_polyform(xi, kappa) - bad).norm() > 1e-6:
            pytest.fail("reconstruct accepted a non-square")
        bad = rand_mv(module.space, rng)


def test_kernel_check_worked_example():
    m = build_module(QuadraticSpace(2, 0), sigma=+1)
    Q = Endomorphism(m, np.diag([1.7, 0.0]))
    ok, res = kernel_check(Q, Spinor(m, [0.0, 1.0]))
    assert ok and max(res.values()) < 1e-12
    ok2, res2 = kernel_check(Q, Spinor(m, [1.0, 0.0]))
    assert not ok2
    assert min(res2.values()) > 1e-3


def test_kernel_check_equivalence(module):
    rng = np.random.default_rng(139)
    zero = Endomorphism(module, np.zeros((module.N, module.N)))
    ok, res = kernel_check(zero, module.random_spinor(rng))
    assert ok and max(res.values()) == 0.0
    for _ in range(20):
        Q = Endomorphism(module, rng.normal(size=(module.N, module.N)))
        xi = module.random_spinor(rng)
        ok, res = kernel_check(Q, xi)
        vals = np.array(list(res.values()))
        # the three residuals vanish together
        assert (vals < 1e-9).all() or (vals > 1e-9).all()


def test_chirality_projectors():
    m = build_module(QuadraticSpace(8, 0), sigma=+1)
    rng = np.random.default_rng(149)
    xi0 = m.random_spinor(rng)
    for mu in (+1, -1):
        xc = Spinor(m, chiral_projector(m, mu).mat @ xi0.comps)
        assert np.linalg.norm(xc.comps) > 1e-3
        assert chirality(xc) == mu
        a = square_polyform(xc, +1)
        assert polyform_chirality_defect(m, a, mu) < 1e-10
    # generic spinor is not chiral
    assert chirality(xi0) is None
    with pytest.raises(UnsupportedSignatureError):
        chirality(build_module(QuadraticSpace(3, 1), sigma=-1).random_spinor(rng))


def test_chirality_split_signatures():
    for (p, q) in [(1, 1), (2, 2)]:
        m = build_module(QuadraticSpace(p, q), sigma=+1)
        rng = np.random.default_rng(151)
        xc = Spinor(m, chiral_projector(m, -1).mat @ m.random_spinor(rng).comps)
        assert chirality(xc) == -1


def test_equivariance_infinitesimal(module):
    # d/dt of the square along exp(t X) xi matches the induced so action
    sp = module.space
    rng = np.random.default_rng(157)
    i, j = 0, sp.d - 1
    X = 0.5 * quantize(
        module, wedge(Multivector.basis(sp, i), Multivector.basis(sp, j))
    ).mat
    A = np.zeros((sp.d, sp.d))
    A[i, j] = sp.eta[j]
    A[j, i] = -sp.eta[i]
    xi = module.random_spinor(rng)
    h = 1e-5
    expXh = np.eye(module.N) + h * X + (h * X) @ (h * X) / 2 + (h * X) @ (h * X) @ (h * X) / 6
    expXm = np.eye(module.N) - h * X + (h * X) @ (h * X) / 2 - (h * X) @ (h * X) @ (h * X) / 6
    ap = square_polyform(Spinor(module, expXh @ xi.comps), +1)
    am = square_polyform(Spinor(module, expXm @ xi.comps), +1)
    fd = (ap - am) * (1.0 / (2 * h))
    want = so_derivation(sp, A, square_polyform(xi, +1))
    assert (fd - want).norm() < 1e-7 * max(1.0, want.norm())


def test_module_json_dump(module):
    payload = module_to_dict(module)
    assert payload["N"] == module.N
    assert len(payload["gammas"]) == module.space.d
    assert len(payload["pairing"]) == module.N**2
