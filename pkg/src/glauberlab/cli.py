"""Command-line experiment runner.

Subcommands: sample, verify, analyze, mixing, kernel-export.  Exit codes:
0 = everything as expected, 1 = a check failed, 2 = configuration or guard
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import analysis, dynamics, exact, fileio, models
from .ordercore import parse_state, stochastic_dominance


def _build_parser():
    ap = argparse.ArgumentParser(prog="glauberlab")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("sample", "verify", "analyze", "mixing", "kernel-export"):
        p = sub.add_parser(name)
        p.add_argument("--graph", required=True)
        p.add_argument("--params", required=True)
        p.add_argument("--transform", action="append", default=[])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--check", action="append", default=[])
        p.add_argument("--eps", type=float, default=0.1)
        p.add_argument("--t1", type=int, default=2)
        p.add_argument("--t2", type=int, default=3)
        p.add_argument("--steps", type=int, default=1000)
        p.add_argument("--record", default="")
    return ap


def _load(args):
    graph = models.Graph.from_file(args.graph)
    params = fileio.load_params(args.params)
    base = fileio.build_model(params, graph)
    model = fileio.apply_transforms(base, args.transform)
    parts = {"command": args.command, "graph": args.graph,
             "params": json.dumps(params, sort_keys=True),
             "transforms": ",".join(args.transform), "seed": args.seed,
             "eps": args.eps, "t1": args.t1, "t2": args.t2,
             "steps": args.steps, "record": args.record}
    return graph, params, base, model, fileio.config_hash(parts)


def _emit(args, text, suffix=""):
    if args.out:
        fileio.atomic_write(args.out + suffix, text)
    else:
        sys.stdout.write(text)


def _start_state(params, model):
    start = params.get("start", "ones")
    if start == "ones":
        return tuple([1] * model.n_vars)
    if start == "zeros":
        return tuple([0] * model.n_vars)
    return parse_state(start)


def cmd_sample(args):
    graph, params, base, model, chash = _load(args)
    record = [int(x) for x in args.record.split(",") if x] or None
    dyn = params.get("dynamics", "glauber")
    theta = float(params.get("theta", 0.25))
    t0 = time.time()
    if dyn == "glauber":
        run = dynamics.glauber_run(model, _start_state(params, model),
                                   args.steps, args.seed,
                                   record_at=record or range(args.steps + 1))
    elif dyn == "censored":
        period = int(params.get("period", 10))
        if graph.bipartite_k is None:
            raise ValueError("censored dynamics needs a bipartite graph")
        sched = dynamics.Schedule.two_level(
            range(graph.bipartite_k), range(graph.bipartite_k, graph.n),
            period, int(params.get("schedule-seed", 1)))
        run = dynamics.censored_glauber(model, _start_state(params, model),
                                        sched, args.steps, args.seed,
                                        record_at=record or
                                        range(args.steps + 1))
    elif dyn == "simulate":
        run, final = dynamics.simulate_algorithm(
            model, theta, args.t1, args.t2, args.seed,
            record_at=record or range(args.t1 * args.t2 + 1))
    elif dyn == "field":
        rng = dynamics.make_rng(args.seed, 0, "field")
        state = _start_state(params, model)
        run = dynamics.ChainRun(model, state, args.seed, args.steps)
        run.recorded[0] = state
        for t in range(1, args.steps + 1):
            state = dynamics.field_dynamics_step(model, theta, state, rng)
            run.recorded[t] = state
        run.final = state
    else:
        raise ValueError(f"unknown dynamics: {dyn!r}")
    wall = time.time() - t0

    # occupancy of value 1 across recorded states, per variable
    recs = [run.recorded[t] for t in sorted(run.recorded)]
    occ = [sum(1 for s in recs if s[v] == 1) / len(recs)
           for v in range(model.n_vars)]
    head = f"# config={chash} seed={args.seed} wall={wall:.3f}\n"
    _emit(args, head + run.dump_trajectory(), suffix=".traj.tsv")
    occ_csv = head + "var,frac_one\n" + "".join(
        f"{v},{exact.format_float(x)}\n" for v, x in enumerate(occ))
    _emit(args, occ_csv, suffix=".occupancy.csv")
    return 0


_DEFAULT_CHECKS = ["detailed-balance", "monotone-system",
                   "stochastic-monotonicity", "many-stationary",
                   "lift-identity", "dominance", "tv-comparison",
                   "single-vertex-mc"]


def _verify_checks(model, theta, t1, t2, selected):
    """Run the selected structural checks; yields result dicts.

    Expected-negative checks: plain-hardcore monotonicity (conditioning a
    neighbor occupied reverses the order) and the comparison counterexample.
    """
    is_plain_hc = isinstance(model, models.HardcoreModel) and model.graph.m > 0
    results = []

    def add(name, ok_raw, expected=True, witness=None):
        results.append({"check": name, "observed": bool(ok_raw),
                        "expected": expected,
                        "pass": bool(ok_raw) == expected,
                        "witness": witness})

    sup = exact.enumerate_support(model)
    gker = exact.glauber_kernel(model, sup)
    lifted = starg = freeze = lker = None
    if not model.ternary:
        lifted = models.lift_model(model, theta)
        lsup = exact.enumerate_support(lifted)
        lker = exact.glauber_kernel(lifted, lsup)
        freeze = exact.freeze_kernel(lifted, lsup)
        starg = exact.star_glauber_kernel(lifted, lsup)

    for name in selected:
        if name == "detailed-balance":
            worst = exact.check_detailed_balance(gker)
            if lker is not None:
                worst = max(worst, exact.check_detailed_balance(lker),
                            exact.check_detailed_balance(freeze),
                            exact.check_detailed_balance(starg))
            add(name, worst <= 1e-12, witness=worst)
        elif name == "monotone-system":
            ok, wit = exact.check_monotone_system(model)
            add(name, ok, expected=not is_plain_hc,
                witness=None if wit is None else repr(wit))
        elif name == "stochastic-monotonicity":
            if is_plain_hc or lker is None:
                ok, wit = exact.check_stochastic_monotonicity(gker)
                add(name, ok, expected=not is_plain_hc,
                    witness=None if wit is None else repr(wit))
            else:
                ok = True
                wit = None
                for ker in (lker, freeze, starg):
                    ok, wit = exact.check_stochastic_monotonicity(ker)
                    if not ok:
                        break
                add(name, ok, witness=None if wit is None else repr(wit))
        elif name == "many-stationary":
            ones = tuple([1] * model.n_vars)
            nu = exact.lift_pushforward(exact.point_mass(sup, ones), sup,
                                        theta, lker.support)
            worst = 0.0
            for _ in range(20):
                worst = max(worst, float(np.abs(nu @ freeze.matrix - nu).sum()))
                nu = nu @ lker.matrix
            add(name, worst <= 1e-10, witness=worst)
        elif name == "lift-identity":
            ones = tuple([1] * model.n_vars)
            mu_t = exact.point_mass(sup, ones)
            pi_t = exact.lift_pushforward(mu_t, sup, theta, lker.support)
            worst = 0.0
            for _ in range(20):
                mu_t = mu_t @ gker.matrix
                pi_t = pi_t @ lker.matrix
                push = exact.lift_pushforward(mu_t, sup, theta, lker.support)
                worst = max(worst, exact.tv_distance(push, pi_t))
            add(name, worst <= 1e-10, witness=worst)
        elif name == "dominance":
            _, lsup2, seq = exact.algorithm_kernel_sequence(
                model, theta, t1, t2, steps=2 * t1 * t2)
            ones = tuple([1] * model.n_vars)
            pi0 = exact.lift_pushforward(exact.point_mass(sup, ones), sup,
                                         theta, lsup2)
            alg = exact.propagate(pi0, seq)
            gd = [pi0]
            for _ in range(2 * t1 * t2):
                gd.append(gd[-1] @ lker.matrix)
            poset = lker.support.poset()
            ok, wit = True, None
            for a, b in zip(gd, alg):
                ok, wit = stochastic_dominance(a, b, poset)
                if not ok:
                    break
            add(name, ok, witness=None if wit is None else sorted(wit))
        elif name == "tv-comparison":
            _, lsup2, seq = exact.algorithm_kernel_sequence(
                model, theta, t1, t2)
            ones = tuple([1] * model.n_vars)
            pi0 = exact.lift_pushforward(exact.point_mass(sup, ones), sup,
                                         theta, lsup2)
            alg = exact.propagate(pi0, seq)
            mu = gker.stationary
            mu_t = exact.point_mass(sup, ones)
            worst = -math.inf
            for nu in alg:
                lhs = exact.tv_distance(mu_t, mu)
                rhs = exact.tv_distance(
                    exact.contract_pushforward(nu, lsup2, sup), mu)
                worst = max(worst, lhs - rhs)
                mu_t = mu_t @ gker.matrix
            add(name, worst <= 1e-10, witness=worst)
        elif name == "single-vertex-mc":
            ok, wit = True, None
            for v in range(model.n_vars):
                pv = exact.site_glauber_kernel(lifted, v, lker.support)
                qv = exact.site_star_glauber_kernel(lifted, v, lker.support)
                ok, wit = exact.check_mc_leq(pv, qv)
                if not ok:
                    break
            add(name, ok, witness=None if wit is None else repr(wit))
        elif name == "product-comparison":
            ok, wit = exact.check_mc_leq(lker, freeze @ starg)
            add(name, ok, expected=False,
                witness=None if wit is None else repr(wit))
        else:
            raise ValueError(f"unknown check: {name!r}")
    return results


def cmd_verify(args):
    graph, params, base, model, chash = _load(args)
    theta = float(params.get("theta", 0.25))
    selected = args.check or _DEFAULT_CHECKS
    results = _verify_checks(model, theta, args.t1, args.t2, selected)
    report = {"config": chash, "seed": args.seed, "results": results,
              "all_pass": all(r["pass"] for r in results)}
    _emit(args, json.dumps(report, indent=2, default=str) + "\n")
    return 0 if report["all_pass"] else 1


def cmd_analyze(args):
    graph, params, base, model, chash = _load(args)
    rng = dynamics.make_rng(args.seed, 0, "analyze")
    rep = analysis.independence_report(model, rng=rng)
    out = {"config": chash, "seed": args.seed,
           "sinf": rep.sinf, "marginal_stability": rep.marginal_stability,
           "coupling": rep.coupling, "ei_ratio": rep.ei_ratio}
    kind = params.get("model")
    if kind == "rc":
        theta, sched = analysis.rc_schedule(
            min(float(params.get(f"p.{i}", params.get("p.default")))
                for i in range(graph.m)),
            max(float(params.get(f"lambda.{i}", params.get("lambda.default")))
                for i in range(graph.n)),
            max(graph.n, 3))
        out["schedule"] = {"theta": theta, "segments": sched.segments,
                          "kappa": analysis.kappa(sched),
                          "log_kappa": analysis.log_kappa(sched)}
    elif kind == "bipartite-hardcore":
        deg = max(len(graph.neighbors(v)) for v in range(graph.n))
        theta, sched = analysis.bhc_schedule(
            float(params["lambda"]), max(deg, 1), max(graph.n, 3),
            float(params.get("delta", 0.5)))
        out["schedule"] = {"theta": theta, "segments": sched.segments,
                          "kappa": analysis.kappa(sched),
                          "log_kappa": analysis.log_kappa(sched)}
    if "schedule" in out:
        sup = exact.enumerate_support(model)
        mu = exact.stationary_distribution(model, sup)
        sched_obj = analysis.AlphaSchedule(out["schedule"]["theta"],
                                           tuple(out["schedule"]["segments"]))
        out["t_bound"] = analysis.t_bound(sched_obj, float(mu.min()), args.eps)
    if {"lambda", "d", "beta"} <= params.keys():
        grid = analysis.uniqueness_grid(
            float(params["lambda"]), float(params["d"]),
            float(params["beta"]), float(params.get("delta", 0.0)))
        out["uniqueness_grid"] = {str(w): g for w, g in grid.items()}
        out["uniqueness_note"] = "heuristic w-grid, not exhaustive"
    _emit(args, json.dumps(out, indent=2, default=str) + "\n")
    return 0


def cmd_mixing(args):
    graph, params, base, model, chash = _load(args)
    theta = float(params.get("theta", 0.25))
    eps = args.eps
    sup = exact.enumerate_support(model)
    gker = exact.glauber_kernel(model, sup)
    ones = tuple([1] * model.n_vars)
    t_gd = exact.exact_mixing_time(gker, ones, eps)
    fker = exact.fd_kernel(model, theta, sup)
    t_fd_ones = exact.exact_mixing_time(fker, ones, eps / 2)
    t_fd_worst = exact.exact_mixing_time(fker, None, eps / 2)
    t_fd = t_fd_worst
    delta = eps / (2 * max(t_fd, 1))
    t_tilted = exact.tilted_mixing_time(model, theta, delta)
    bound = t_fd * t_tilted
    head = ("config,seed,eps,theta,t_gd_ones,t_fd_ones,t_fd_worst,"
            "t_tilted,product_bound\n")
    row = (f"{chash},{args.seed},{exact.format_float(eps)},"
           f"{exact.format_float(theta)},{t_gd},{t_fd_ones},{t_fd_worst},"
           f"{t_tilted},{bound}\n")
    _emit(args, head + row)
    return 0 if t_gd <= bound else 1


def cmd_kernel_export(args):
    graph, params, base, model, chash = _load(args)
    sup = exact.enumerate_support(model)
    ker = exact.glauber_kernel(model, sup)
    text = f"# config={chash} seed={args.seed}\n" + exact.kernel_to_csv(ker)
    _emit(args, text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"sample": cmd_sample, "verify": cmd_verify,
                "analyze": cmd_analyze, "mixing": cmd_mixing,
                "kernel-export": cmd_kernel_export}
    try:
        return handlers[args.command](args)
    except (ValueError, RuntimeError, ArithmeticError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
