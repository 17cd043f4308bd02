"""Batch command-line front end: verification suites, Spin(7) optimization
runs, flow simulations and classification reports.

Exit codes: 0 success, 1 verification failure or non-convergence, 2 input
error.  All randomness flows from a single seeded generator and reductions
are sequential, so a fixed configuration reproduces identical output files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import clifford, spin7
from .kahler import Multivector, QuadraticSpace, det_inner, geometric_product, hodge, pi, tau
from .flow import (
    CauchyPair,
    InadmissibleThetaError,
    OutsideMaximalIntervalError,
    algebraic_theta_residuals,
    cauchy_residual,
    classify_group,
    flow_closed_form,
    flow_numeric,
    hamiltonian_constraint,
    hamiltonian_evolution,
    make_lapse,
    maximal_interval,
)
from .liegroup import CATALOG, LieGroup3, group_from_theta

SUPPORTED_SIGNATURES = [(2, 0), (1, 1), (2, 2), (3, 1), (8, 0)]


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# clifford self-check
# ---------------------------------------------------------------------------

def _selfcheck_signature(p, q, trials, rng, tol):
    space = QuadraticSpace(p, q)
    checks = []
    worst = {}
    for sigma in (+1, -1):
        m = clifford.build_module(space, sigma=sigma)
        worst[f"symmetry(sigma={sigma:+d})"] = float(
            np.max(np.abs(m.pairing - m.s * m.pairing.T))
        )
    m = clifford.build_module(space, sigma=-1 if (p, q) == (3, 1) else +1)
    hom = adj = tr = fierz = grades = roundtrip = 0.0
    dim = 2 ** (space.d // 2)
    for _ in range(trials):
        a = Multivector(space, rng.uniform(-1, 1, space.n_blades))
        b = Multivector(space, rng.uniform(-1, 1, space.n_blades))
        hom = max(
            hom,
            float(
                np.linalg.norm(
                    clifford.quantize(m, geometric_product(a, b)).mat
                    - clifford.quantize(m, a).mat @ clifford.quantize(m, b).mat
                )
            ),
        )
        sym = tau(a) if m.sigma == +1 else pi(tau(a))
        adj = max(
            adj,
            float(
                np.linalg.norm(
                    m.adjoint(clifford.quantize(m, a).mat)
                    - clifford.quantize(m, sym).mat
                )
            ),
        )
        tr = max(
            tr,
            abs(float(np.trace(clifford.quantize(m, a).mat)) - dim * a.scalar_part()),
        )
        xi = m.random_spinor(rng)
        alpha = clifford.square_polyform(xi, +1)
        lhs = geometric_product(geometric_product(alpha, b), alpha)
        rhs = dim * geometric_product(alpha, b).scalar_part() * alpha
        fierz = max(fierz, (lhs - rhs).norm())
        killed = [
            k
            for k in range(space.d + 1)
            if (-1.0) ** (k * (1 - m.sigma) // 2) * (-1.0) ** (k * (k - 1) // 2)
            == -m.s
        ]
        grades = max(
            grades,
            alpha.max_grade_error(set(range(space.d + 1)) - set(killed)),
        )
        xi2, kappa = clifford.reconstruct_spinor(m, alpha)
        roundtrip = max(
            roundtrip, (clifford.square_polyform(xi2, kappa) - alpha).norm()
        )
    worst.update(
        {
            "homomorphism": hom,
            "adjoint_transport": adj,
            "trace": tr,
            "fierz": fierz,
            "vanishing_grades": grades,
            "reconstruct_round_trip": roundtrip,
        }
    )
    if (p, q) == (1, 1):
        null_rel = 0.0
        for _ in range(trials):
            xi = m.random_spinor(rng)
            alpha = clifford.square_polyform(xi, +1)
            a1 = alpha.grade(1)
            null_rel = max(
                null_rel,
                abs(4.0 * det_inner(a1, a1) - xi.pairing_norm() ** 2),
            )
        worst["null_dirac_relation"] = null_rel
    for name, value in worst.items():
        checks.append({"signature": [p, q], "check": name, "worst": value, "pass": value < tol})
    return checks


def cmd_clifford_selfcheck(args):
    sigs = []
    for token in args.signatures:
        try:
            p, q = (int(x) for x in token.split(","))
        except ValueError as exc:
            raise InputError(f"bad signature token {token!r}") from exc
        if (p, q) not in SUPPORTED_SIGNATURES:
            raise InputError(f"unsupported signature ({p},{q})")
        sigs.append((p, q))
    rng = np.random.default_rng(args.seed)
    report = []
    for p, q in sigs:
        report.extend(_selfcheck_signature(p, q, args.trials, rng, args.tol))
    ok = all(c["pass"] for c in report)
    for c in report:
        print(
            f"[{'PASS' if c['pass'] else 'FAIL'}] ({c['signature'][0]},{c['signature'][1]}) "
            f"{c['check']}: worst {c['worst']:.3e}"
        )
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"tol": args.tol, "checks": report}, fh, indent=2)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# spin7 commands
# ---------------------------------------------------------------------------

def _form_to_payload(form):
    basis = spin7.selfdual_basis()
    return {
        "selfdual_coords": form.vec().tolist(),
        "basis_legend": [[i + 1 for i in combo] for combo in basis.legend],
        "convention": "(b + *b)/sqrt2 over the listed blades, 1-based indices",
    }


def _payload_to_form(payload):
    coords = np.asarray(payload["selfdual_coords"], dtype=float)
    if coords.shape != (35,):
        raise InputError("selfdual_coords must have 35 entries")
    return spin7.SelfDual4Form.from_vec(coords)


def _load_form(path_or_keyword):
    if path_or_keyword == "cayley":
        return spin7.cayley_form()
    try:
        with open(path_or_keyword) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read form file: {exc}") from exc
    return _payload_to_form(payload)


def cmd_spin7_verify(args):
    form = _load_form(args.form)
    cert = spin7.is_conformal_spin7(form, tol=args.tol)
    print(repr(cert))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(cert.to_dict(), fh, indent=2)
    return 0 if cert.is_conformal else 1


def cmd_spin7_optimize(args):
    seed_form = _load_form(args.form)
    rng = np.random.default_rng(args.seed)
    if args.perturb:
        q = rng.normal(size=35)
        q *= args.perturb * max(1.0, seed_form.norm()) / np.linalg.norm(q)
        seed_form = spin7.SelfDual4Form.from_vec(seed_form.vec() + q)
    cfg = spin7.FindSpin7Config(tol=args.tol, max_iter=args.max_iter)
    result = spin7.find_spin7(seed_form, cfg, record_every=args.log_every)
    print(
        f"{'converged' if result.converged else 'NOT converged'} after "
        f"{result.iterations} iterations; {result.certificate!r}"
    )
    if args.out:
        with open(args.out + ".form.json", "w") as fh:
            json.dump(_form_to_payload(result.form), fh)
        with open(args.out + ".cert.json", "w") as fh:
            json.dump(result.certificate.to_dict(), fh, indent=2)
        with open(args.out + ".log.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "residual", "norm"])
            writer.writerows(result.history)
    return 0 if result.converged and result.certificate.is_conformal else 1


# ---------------------------------------------------------------------------
# flow commands
# ---------------------------------------------------------------------------

def _load_scenario(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scenario: {exc}") from exc
    try:
        theta = np.asarray(data["theta0"], dtype=float)
        if theta.shape != (3, 3):
            raise InputError("theta0 must be 3x3")
        gspec = data.get("group", "from-theta")
        if isinstance(gspec, dict) and "structure_constants" in gspec:
            group = LieGroup3(np.asarray(gspec["structure_constants"], dtype=float))
        elif gspec == "from-theta":
            group = group_from_theta(theta)
        elif isinstance(gspec, dict) and gspec.get("name") == "tau3,mu":
            group = CATALOG["tau3,mu"](gspec["mu"])
        elif gspec in CATALOG and gspec != "tau3,mu":
            group = CATALOG[gspec]()
        else:
            raise InputError(f"unknown group spec {gspec!r}")
        E = np.asarray(data.get("coframe", np.eye(3)), dtype=float)
        pair = CauchyPair(group, E, theta)
        lapse = make_lapse(data.get("lapse", 1.0))
    except InputError:
        raise
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad scenario: {exc}") from exc
    return data, pair, lapse


def cmd_flow_classify(args):
    data, pair, _ = _load_scenario(args.scenario)
    try:
        tag, mu = classify_group(pair.theta, tol=args.tol)
    except InadmissibleThetaError as exc:
        raise InputError(str(exc)) from exc
    print(f"group: {tag}" + (f"  mu = {mu:.12g}" if mu is not None else ""))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"group": tag, "mu": mu}, fh, indent=2)
    return 0


def cmd_flow_check_cauchy(args):
    data, pair, _ = _load_scenario(args.scenario)
    res = cauchy_residual(pair)
    alg = np.abs(algebraic_theta_residuals(pair.theta))
    ok = max(res.values()) < args.tol
    for k, v in res.items():
        print(f"residual[{k}] = {v:.3e}")
    print("algebraic conditions:", np.array2string(alg, precision=3))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"residuals": res, "algebraic": alg.tolist(), "pass": bool(ok)}, fh, indent=2)
    return 0 if ok else 1


def cmd_flow_run(args):
    data, pair, lapse = _load_scenario(args.scenario)
    res = cauchy_residual(pair)
    if max(res.values()) > args.tol:
        which = int(np.argmax(np.abs(algebraic_theta_residuals(pair.theta))))
        raise InputError(
            f"initial data is not a Cauchy pair (worst residual {max(res.values()):.3e}, "
            f"largest algebraic condition #{which})"
        )
    t_max = float(data.get("t_max", 1.0))
    step = float(data.get("step", args.step))
    tm, tp = maximal_interval(pair.theta, lapse)
    clipped = False
    if not (tm < t_max < tp):
        t_max = 0.5 * tp if np.isfinite(tp) else t_max
        clipped = True
    try:
        states = flow_numeric(pair, lapse, t_max, step)
    except (OutsideMaximalIntervalError, InadmissibleThetaError) as exc:
        raise InputError(str(exc)) from exc
    E_cf = flow_closed_form(pair, lapse, states[-1].t)
    deviation = float(np.abs(states[-1].E - E_cf).max() / max(1.0, np.abs(E_cf).max()))
    worst_constraint = 0.0
    rows = []
    for s in states:
        cres = cauchy_residual(CauchyPair(pair.group, s.E, s.theta))
        worst_constraint = max(worst_constraint, max(cres.values()))
        H = hamiltonian_constraint(CauchyPair(pair.group, s.E, s.theta))
        rows.append(
            [s.t, s.B]
            + [s.theta[i, j] for i, j in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))]
            + list(s.E.ravel())
            + [max(cres.values()), H]
        )
    summary = {
        "t_final": states[-1].t,
        "interval": [tm if np.isfinite(tm) else None, tp if np.isfinite(tp) else None],
        "interval_clipped": clipped,
        "closed_vs_numeric": deviation,
        "max_constraint_residual": worst_constraint,
        "hamiltonian_initial": hamiltonian_constraint(pair),
        "hamiltonian_final_law": hamiltonian_evolution(pair, lapse, states[-1].t),
    }
    print(
        f"ran to t = {states[-1].t:.6g} ({len(states)} samples); closed-vs-numeric "
        f"deviation {deviation:.3e}; max constraint residual {worst_constraint:.3e}"
    )
    if clipped:
        print(f"note: requested horizon clipped to the maximal interval ({tm:.4g}, {tp:.4g})")
    if args.out:
        header = (
            ["t", "B"]
            + ["theta_uu", "theta_ul", "theta_un", "theta_ll", "theta_ln", "theta_nn"]
            + [f"E_{a}{i}" for a in "uln" for i in range(3)]
            + ["cauchy_residual", "hamiltonian"]
        )
        with open(args.out + ".csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        with open(args.out + ".json", "w") as fh:
            json.dump(summary, fh, indent=2)
    ok = deviation < 1e-5 and worst_constraint < 1e-6
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="polyform",
        description="Spinorial exterior forms: verification suites, Spin(7) "
        "optimization and left-invariant parallel spinor flows.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cs = sub.add_parser("clifford-selfcheck", help="run the Clifford module invariants")
    p_cs.add_argument("--signatures", nargs="*", default=["2,0", "1,1", "2,2", "3,1", "8,0"])
    p_cs.add_argument("--trials", type=int, default=100)
    p_cs.add_argument("--seed", type=int, default=0)
    p_cs.add_argument("--tol", type=float, default=1e-9)
    p_cs.add_argument("--out")
    p_cs.set_defaults(func=cmd_clifford_selfcheck)

    p_s7 = sub.add_parser("spin7", help="verify or optimize self-dual 4-forms")
    s7_sub = p_s7.add_subparsers(dest="spin7_command", required=True)
    p_v = s7_sub.add_parser("verify")
    p_v.add_argument("--form", default="cayley", help="'cayley' or a form JSON path")
    p_v.add_argument("--tol", type=float, default=1e-9)
    p_v.add_argument("--out")
    p_v.set_defaults(func=cmd_spin7_verify)
    p_o = s7_sub.add_parser("optimize")
    p_o.add_argument("--form", default="cayley")
    p_o.add_argument("--perturb", type=float, default=0.0, help="relative seed perturbation")
    p_o.add_argument("--seed", type=int, default=0)
    p_o.add_argument("--tol", type=float, default=1e-8)
    p_o.add_argument("--max-iter", type=int, default=100_000)
    p_o.add_argument("--log-every", type=int, default=10)
    p_o.add_argument("--out")
    p_o.set_defaults(func=cmd_spin7_optimize)

    p_f = sub.add_parser("flow", help="left-invariant parallel spinor flows")
    f_sub = p_f.add_subparsers(dest="flow_command", required=True)
    for name, fn in (
        ("run", cmd_flow_run),
        ("check-cauchy", cmd_flow_check_cauchy),
        ("classify", cmd_flow_classify),
    ):
        pf = f_sub.add_parser(name)
        pf.add_argument("--scenario", required=True)
        pf.add_argument("--tol", type=float, default=1e-9)
        pf.add_argument("--step", type=float, default=1e-3)
        pf.add_argument("--out")
        pf.set_defaults(func=fn)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
