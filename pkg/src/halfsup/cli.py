"""Command line interface: `halfsup <command> [options]`.

Every command writes its JSON/CSV outputs plus manifest.json into --out.
Options may also come from a key=value file given with --config; flags
given on the command line win.  Exit codes: 0 pass, 1 failed check or
module error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import random
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy

from . import __version__
from .amplifier import (amplified_square, amplifier_length_bound, amplifier_primes,
                        amplifier_value, build_amplifier, partition_Li, synthetic_system)
from .arith import gamma0_generators, random_gamma0
from .geometry import parse_point, reduce_to_F
from .hecke import eigenvalue_tau, records_to_csv, tau_product, verify_hecke_relations
from .kernel import PointPairInvariant, kernel_sum_K, phase_equivariance_residual, selberg_h
from .latcount import verify_counting_lemma
from .qexp import dilate, eta8_cubed, load_form, theta_series, verify_modularity
from .supnorm import (band_check, fit_results, l2_norm, l2_rankin_selberg, sup_search,
                      write_results_csv)

NORMALIZATION = ("V_included: <f, g> carries the factor 1/V, V = (pi/3) [SL2(Z) : Gamma_0(4N)]; "
                 "V_excluded columns omit it")


class UsageError(Exception):
    pass


def threads() -> int:
    v = os.environ.get("HALFSUP_THREADS")
    if v:
        try:
            n = int(v)
        except ValueError:
            raise UsageError("HALFSUP_THREADS must be a positive integer, got %r" % v)
        if n < 1:
            raise UsageError("HALFSUP_THREADS must be a positive integer, got %r" % v)
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------- outputs

def _c(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def write_json(path, obj) -> None:
    obj = dict(obj)
    obj.setdefault("normalization", NORMALIZATION)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=_plain)
        fh.write("\n")


def _plain(o):
    if isinstance(o, complex):
        return _c(o)
    if isinstance(o, (np.integer, np.floating)):
        return o.item()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError("cannot serialise %r" % (o,))


def stamp_csv(path) -> None:
    with open(path) as fh:
        body = fh.read()
    with open(path, "w") as fh:
        fh.write("# normalization: %s\n" % NORMALIZATION)
        fh.write(body)


def write_manifest(args, outputs) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    man = {"command": args.command, "config": cfg, "seed": args.seed,
           "outputs": sorted(outputs),
           "versions": {"halfsup": __version__, "python": platform.python_version(),
                        "numpy": np.__version__, "scipy": scipy.__version__}}
    write_json(os.path.join(args.out, "manifest.json"), man)


def _ints(s: str) -> list[int]:
    try:
        return [int(t) for t in s.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers, got %r" % s)


def _grid(s: str) -> tuple:
    try:
        a, b = s.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like 41x41, got %r" % s)


def _point(s: str) -> complex:
    try:
        return parse_point(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _form(args):
    if args.form_file:
        f = load_form(args.form_file)
    elif args.form == "theta":
        f = theta_series(args.prec)
    elif args.form == "eta8cubed":
        f = eta8_cubed(args.prec)
    else:
        raise UsageError("unknown form %r (theta, eta8cubed or --form-file)" % args.form)
    if args.dilate > 1:
        f = dilate(f, args.dilate)
    return f


# --------------------------------------------------------------- commands

def cmd_reduce(args):
    r = reduce_to_F(args.z, args.N)
    Q, i, j = r.decomposition
    out = {"N": args.N, "z": _c(args.z), "z_reduced": _c(r.z),
           "delta": list(r.delta.tuple()), "word": {"Q": Q, "A": i, "W2": j},
           "moves": [[t[0], list(t[1]) if t[0] == "move" else t[1]] for t in r.trace],
           "min_abs_cz_plus_d_sq": r.report.min_value,
           "im_bound": math.sqrt(3) / (4 * args.N)}
    write_json(os.path.join(args.out, "reduce.json"), out)
    print(json.dumps(out, sort_keys=True))
    return 0, ["reduce.json"]


def cmd_verify_form(args):
    auto = args.prec == 0
    if auto:
        args.prec = 64
    f = _form(args)
    gens = gamma0_generators(f.level)
    if auto:
        # sample points have Im >= 0.6/|c|; size the expansion for that floor
        cmax = max(abs(g.c) for g in gens)
        need = 15 * math.log(10) * 1.3 / (2 * math.pi * 0.59 / cmax)
        args.prec = int(math.ceil(need / args.dilate)) + 1
        f = _form(args)
    rep = verify_modularity(f, gens, tol=args.tol, npoints=args.points, seed=args.seed)
    out = {"form": f.name, "level": f.level, "weight": f.weight_num / 2,
           "precision": f.precision, "generators": len(gens), "checked": rep.checked,
           "max_residual": rep.max_residual, "passed": rep.passed,
           "failures": [[list(g), _c(z), r] for g, z, r in rep.failures[:20]]}
    write_json(os.path.join(args.out, "verify_form.json"), out)
    print("modularity %s: %d evaluations, max residual %.3g"
          % ("ok" if rep.passed else "FAILED", rep.checked, rep.max_residual))
    return (0 if rep.passed else 1), ["verify_form.json"]


def _records(f, primes, method):
    return [eigenvalue_tau(f, p, method=method) for p in primes]


def cmd_hecke_eig(args):
    f = _form(args)
    recs = _records(f, args.primes, args.method)
    records_to_csv(recs, os.path.join(args.out, "eigenvalues.csv"))
    stamp_csv(os.path.join(args.out, "eigenvalues.csv"))
    ok = all(r.is_eigen for r in recs)
    for r in recs:
        print("p=%d tau(p^2)=%.12g tau(p^4)=%.12g residuals=%s"
              % (r.p, r.tau_p2.real, r.tau_p4.real, {k: "%.2g" % v for k, v in r.residuals.items()}))
    return (0 if ok else 1), ["eigenvalues.csv"]


def cmd_relations(args):
    f = _form(args)
    recs = _records(f, args.primes, "cosets")
    prods = {}
    ps = args.primes
    if len(ps) >= 2:
        prods[(ps[0], ps[1])] = tau_product(f, ps[0], ps[1])
    rep = verify_hecke_relations(recs, products=prods, tol=args.tol)
    out = {"form": f.name, "precision": f.precision, "passed": rep.passed,
           "checks": [[n, list(a), float(r), bool(ok)] for n, a, r, ok in rep.checks]}
    write_json(os.path.join(args.out, "relations.json"), out)
    for n, a, r, ok in rep.checks:
        print("%-16s %-10s %.3g %s" % (n, a, r, "ok" if ok else "FAIL"))
    return (0 if rep.passed else 1), ["relations.json"]


def cmd_amplifier(args):
    N = args.N
    ps = amplifier_primes(args.Lam, N)
    if args.synthetic:
        def eta(n):
            return 1 + 0j if math.gcd(n, 4 * N) == 1 else 0j
        tau = synthetic_system(ps, eta, np.random.default_rng(args.seed))
        taus = {}
        for p in ps:
            taus[p * p], taus[p**4] = tau(p * p), tau(p**4)
    else:
        f = _form(args)
        if f.level % (4 * N):
            raise UsageError("form level %d is not a multiple of 4N = %d" % (f.level, 4 * N))
        taus = {}
        eta = f.character
        for p in ps:
            r = eigenvalue_tau(f, p, method="relation")
            taus[p * p], taus[p**4] = r.tau_p2, r.tau_p4
    w = build_amplifier(taus, args.Lam, N, eta)
    S, bound, degenerate = amplifier_length_bound(taus, args.Lam, N, eta)
    out = w.to_json()
    out.update(length=S, length_bound=bound, degenerate=degenerate,
               L_sets={str(k): v for k, v in partition_Li(w).items()})
    ok = True
    if args.synthetic:
        res = abs(amplifier_value(w, tau) - amplified_square(w, tau))
        out["identity_residual"] = res
        ok = res < 1e-9
    write_json(os.path.join(args.out, "amplifier.json"), out)
    print("primes %s, y_const %.6g, length %.6g >= %.6g" % (ps, w.y_const.real, S, bound))
    return (0 if ok else 1), ["amplifier.json"]


def _sample_F(N, count, rng):
    pts = []
    while len(pts) < count:
        z = complex(rng.uniform(-0.5, 0.5), 10 ** rng.uniform(-2, 0.3))
        pts.append(reduce_to_F(z, N).z)
    return pts


def cmd_count_matrices(args):
    rng = random.Random(args.seed)
    pts = [args.z] if args.z is not None else _sample_F(args.N, args.samples, rng)
    rep = verify_counting_lemma([reduce_to_F(z, args.N).z for z in pts], args.L, args.N, args.delta)
    rep.write_csv(os.path.join(args.out, "counts.csv"))
    stamp_csv(os.path.join(args.out, "counts.csv"))
    out = rep.to_json()
    out["ceiling"] = args.ceiling
    out["passed"] = rep.fitted_constant <= args.ceiling
    write_json(os.path.join(args.out, "counts.json"), out)
    print("N=%d L=%d delta=%g fitted constant %.4g (ceiling %g)"
          % (args.N, args.L, args.delta, rep.fitted_constant, args.ceiling))
    return (0 if out["passed"] else 1), ["counts.csv", "counts.json"]


def cmd_kernel_check(args):
    rng = random.Random(args.seed)
    k = PointPairInvariant(args.profile, args.scale)
    kappa = args.kappa
    z, w = args.z, args.w
    base = kernel_sum_K(z, w, args.N, kappa, k)
    rows = []
    worst = 0.0
    for _ in range(args.count):
        g = random_gamma0(4 * args.N, rng, 10)
        a = kernel_sum_K(g(z), w, args.N, kappa, k)
        b = kernel_sum_K(z, g(w), args.N, kappa, k)
        ra = abs(abs(a.value) - abs(base.value))
        rb = abs(abs(b.value) - abs(base.value))
        allowed = base.tail_bound + max(a.tail_bound, b.tail_bound) + 1e-9 * abs(base.value)
        worst = max(worst, ra, rb)
        rows.append({"gamma": list(g.tuple()), "res_z": ra, "res_w": rb, "allowed": allowed,
                     "ok": ra <= allowed and rb <= allowed})
    ph = []
    for _ in range(args.count):
        g = random_gamma0(4 * args.N, rng, 10)
        ph.append(phase_equivariance_residual(g, z, w, kappa))
    hval = selberg_h(k, 0.0)
    ok = all(r["ok"] for r in rows) and max(ph) < 1e-10
    out = {"N": args.N, "kappa": kappa, "profile": args.profile, "scale": args.scale,
           "z": _c(z), "w": _c(w), "K": _c(base.value), "terms": base.terms,
           "tail_bound": base.tail_bound, "checks": rows, "phase_residual": max(ph),
           "h_at_0": hval, "passed": ok}
    write_json(os.path.join(args.out, "kernel_check.json"), out)
    print("K(z,w) = %s over %d terms; worst automorphy residual %.3g; h(0) = %.6g"
          % (base.value, base.terms, worst, hval))
    return (0 if ok else 1), ["kernel_check.json"]


def _supnorm_one(f, args):
    l2 = l2_norm(f, resolution=args.resolution)
    if not l2.converged:
        raise ArithmeticError("L2 quadrature changed by %.3g between resolutions" % l2.change)
    return sup_search(f, grid=args.grid, refine_depth=args.depth, region=args.region, l2=l2)


def _result_json(r):
    return {"form": r.form, "level": r.level, "N": r.N, "sup": r.sup_value, "argmax": _c(r.argmax),
            "l2_V_included": r.l2_V_included, "l2_V_excluded": r.l2_V_excluded,
            "ratio_V_included": r.ratio, "ratio_V_excluded": r.ratio_V_excluded,
            "grid": list(r.grid), "depth": r.depth, "region": r.region, "gap": r.gap,
            "meta": {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                     for k, v in sorted(r.meta.items())}}


def cmd_supnorm(args):
    f = _form(args)
    r = _supnorm_one(f, args)
    write_results_csv([r], os.path.join(args.out, "supnorm.csv"))
    stamp_csv(os.path.join(args.out, "supnorm.csv"))
    out = _result_json(r)
    out["l2_rankin_selberg"] = l2_rankin_selberg(f) if f.offset.denominator == 1 else None
    write_json(os.path.join(args.out, "supnorm.json"), out)
    print("%s level %d: sup %.10g at %s, L2 %.10g (V included) %.10g (V excluded), ratio %.6g"
          % (r.form, r.level, r.sup_value, r.argmax, r.l2_V_included, r.l2_V_excluded, r.ratio))
    return 0, ["supnorm.csv", "supnorm.json"]


def cmd_scan_levels(args):
    base = eta8_cubed(args.prec)
    ds = []
    for lv in args.levels:
        if lv % base.level:
            raise UsageError("level %d is not a multiple of %d" % (lv, base.level))
        ds.append(lv // base.level)
    forms = [dilate(base, d) for d in ds]
    with ThreadPoolExecutor(max_workers=min(threads(), len(forms))) as ex:
        results = list(ex.map(lambda f: _supnorm_one(f, args), forms))
    write_results_csv(results, os.path.join(args.out, "scan.csv"))
    stamp_csv(os.path.join(args.out, "scan.csv"))
    out = {"results": [_result_json(r) for r in results],
           "note": "dilated forms have N = 16d, not odd squarefree; exponents are engine tests only"}
    ok = True
    for conv in ("V_included", "V_excluded"):
        try:
            fit = fit_results(results, conv)
            out["fit_" + conv] = {"alpha": fit.alpha, "intercept": fit.intercept,
                                  "residuals": fit.residuals}
            print("%s: alpha = %.4f, residuals %s" % (conv, fit.alpha,
                                                      ", ".join("%.3g" % v for v in fit.residuals)))
        except ValueError as exc:
            out["fit_" + conv] = {"error": str(exc)}
            print("%s: %s" % (conv, exc))
        C, rows, held = band_check(results, 0.6, convention=conv)
        out["band_" + conv] = {"C": C, "exponent": 0.6, "held": held,
                               "rows": [[n, r, b, bool(h)] for n, r, b, h in rows]}
        ok = ok and held
    write_json(os.path.join(args.out, "scan.json"), out)
    return (0 if ok else 1), ["scan.csv", "scan.json"]


def cmd_selftest(args):
    from .selftest import run_all
    res = run_all()
    for name, ok, detail in res:
        print("%s  %s  %s" % ("PASS" if ok else "FAIL", name, detail))
    write_json(os.path.join(args.out, "selftest.json"),
               {"checks": [[n, bool(ok), d] for n, ok, d in res]})
    return (0 if all(ok for _, ok, _ in res) else 1), ["selftest.json"]


# ----------------------------------------------------------------- parser

def _form_args(p, prec=4000):
    p.add_argument("--form", default="eta8cubed", help="theta or eta8cubed")
    p.add_argument("--form-file", default=None, help="JSON q-expansion file")
    p.add_argument("--prec", type=int, default=prec,
                   help="number of coefficients" + (" (0: sized from the generators)" if prec == 0 else ""))
    p.add_argument("--dilate", type=int, default=1, help="use f(dz)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfsup", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", default=None, help="key=value file; flags override it")
        p.add_argument("--out", default="halfsup_out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        return p

    p = add("reduce", cmd_reduce, "move a point into F(2N)")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--z", type=_point, required=False, default="0.3+0.2i")

    p = add("verify-form", cmd_verify_form, "numerical modularity check on generators")
    _form_args(p, 0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--points", type=int, default=3)

    p = add("hecke-eig", cmd_hecke_eig, "normalised Hecke eigenvalues tau(p^2), tau(p^4)")
    _form_args(p, 15000)
    p.add_argument("--primes", type=_ints, default="3,5,7,11")
    p.add_argument("--method", choices=("cosets", "relation"), default="cosets")

    p = add("relations", cmd_relations, "check the Hecke relations used by the amplifier")
    _form_args(p, 15000)
    p.add_argument("--primes", type=_ints, default="3,5,7,11")
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("amplifier", cmd_amplifier, "amplifier weights x_l and coefficients y_l")
    _form_args(p, 60000)
    p.add_argument("--Lam", type=float, default=10.0)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--synthetic", action="store_true", help="random eigenvalue system")

    p = add("count-matrices", cmd_count_matrices, "matrix counts and the counting lemma constant")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--z", type=_point, default=None)
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--L", type=int, default=2500)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--ceiling", type=float, default=50.0)

    p = add("kernel-check", cmd_kernel_check, "automorphy of the truncated kernel")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--kappa", type=float, default=1.5)
    p.add_argument("--profile", default="bump")
    p.add_argument("--scale", type=float, default=3.0)
    p.add_argument("--z", type=_point, default="0.2+0.8i")
    p.add_argument("--w", type=_point, default="-0.1+1.1i")
    p.add_argument("--count", type=int, default=20)

    for name, func, help in (("supnorm", cmd_supnorm, "sup norm, L2 norm and their ratio"),
                             ("scan-levels", cmd_scan_levels, "sup/L2 over dilated levels and the exponent fit")):
        p = add(name, func, help)
        if name == "supnorm":
            _form_args(p, 4000)
        else:
            p.add_argument("--levels", type=_ints, default="64,192,320,448,704")
            p.add_argument("--prec", type=int, default=4000)
        p.add_argument("--grid", type=_grid, default="41x41")
        p.add_argument("--depth", type=int, default=3)
        p.add_argument("--region", choices=("strip", "full"), default="strip")
        p.add_argument("--resolution", type=int, default=1)

    add("selftest", cmd_selftest, "run the quick invariant suite")
    return ap


def _read_config(path) -> dict:
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError("cannot read config %s: %s" % (path, exc))
    with fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected key=value" % (path, n))
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(ap, argv):
    """Re-parse with config values installed as defaults."""
    pre = ap.parse_args(argv)
    if not pre.config:
        return pre
    cfg = _read_config(pre.config)
    sp = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction)).choices[pre.command]
    known = {a.dest: a for a in sp._actions}
    for k, v in cfg.items():
        if k not in known or k in ("help", "config"):
            raise UsageError("unknown config field %r for %s" % (k, pre.command))
        a = known[k]
        if isinstance(a, argparse._StoreTrueAction):
            if v.lower() not in ("true", "false", "1", "0"):
                raise UsageError("config field %r must be true or false" % k)
            sp.set_defaults(**{k: v.lower() in ("true", "1")})
        else:
            sp.set_defaults(**{k: v})
    return ap.parse_args(argv)


def _validate(args):
    if getattr(args, "command", "") != "verify-form" and getattr(args, "prec", 1) < 1:
        raise UsageError("invalid config field 'prec': must be >= 1, got %r" % args.prec)
    for k in ("N", "L", "samples", "count", "points", "dilate", "resolution"):
        v = getattr(args, k, None)
        if v is not None and v < 1:
            raise UsageError("invalid config field %r: must be >= 1, got %r" % (k, v))
    for k in ("tol", "delta", "scale", "Lam", "ceiling"):
        v = getattr(args, k, None)
        if v is not None and not v > 0:
            raise UsageError("invalid config field %r: must be > 0, got %r" % (k, v))
    for k in ("levels", "primes"):
        v = getattr(args, k, None)
        if v is not None and (not v or min(v) < 1):
            raise UsageError("invalid config field %r: %r" % (k, v))


def _module_tag(exc) -> str:
    for fr in reversed(traceback.extract_tb(exc.__traceback__)):
        base = os.path.basename(fr.filename)
        if os.sep + "halfsup" + os.sep in fr.filename and base != "cli.py":
            return base[:-3]
    return "cli"


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        _validate(args)
        threads()
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except SystemExit as exc:          # argparse already printed the message
        return 2 if exc.code else 0
    os.makedirs(args.out, exist_ok=True)
    try:
        status, outputs = args.func(args)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:
        print("error [%s]: %s: %s" % (_module_tag(exc), type(exc).__name__, exc), file=sys.stderr)
        return 1
    write_manifest(args, outputs)
    return status


if __name__ == "__main__":
    sys.exit(main())
