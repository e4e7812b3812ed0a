"""Command-line front end: hybridnet <verb> [flags].

Exit status is 0 on success, 1 on usage errors and 2 on runtime or
numerical errors. CSV output starts with a '#'-prefixed JSON metadata line.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import cutset as cs
from .harness import (
    SweepSpec,
    fit_exponent,
    reconcile,
    run_sweep,
    verify_lemma,
    write_table,
)
from .netgen import (
    Geometry,
    NetworkConfig,
    generate_network,
    instance_from_json,
    instance_to_json,
)
from .protocols import hc_exponent, imh_throughput, ish_throughput, mh_throughput
from .regimes import atlas_alpha, atlas_beta_gamma, classify

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _add_config(p: argparse.ArgumentParser, instance: bool = True) -> None:
    g = p.add_argument_group("network")
    g.add_argument("--n", type=int, help="number of nodes")
    g.add_argument("--alpha", type=float, default=3.0, help="path-loss exponent (> 2)")
    g.add_argument("--beta", type=float, default=0.0, help="BS exponent, m = n**beta")
    g.add_argument("--gamma", type=float, default=0.0, help="antenna exponent, l = n**gamma")
    g.add_argument("--epsilon0", type=float, default=0.1, help="BS radius coefficient (<= 1/4)")
    g.add_argument("--power", type=float, default=1.0, help="per-node power P")
    g.add_argument("--noise", type=float, default=1.0, help="noise variance N0")
    g.add_argument("--geometry", choices=[g.value for g in Geometry], default="extended")
    g.add_argument("--boundary-constant", type=float, default=1.0,
                   help="boundary antenna slots = ceil(c * sqrt(n/m))")
    g.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    if instance:
        g.add_argument("--instance", help="read the network from a JSON file instead")


def _add_output(p: argparse.ArgumentParser, formats=("csv", "json"), default="json") -> None:
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=formats, default=default, help="output format")


def _config(args) -> NetworkConfig:
    if args.n is None:
        raise UsageError("--n is required unless --instance is given")
    return NetworkConfig(n=args.n, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                         epsilon0=args.epsilon0, power_p=args.power, noise_n0=args.noise,
                         geometry=Geometry(args.geometry), seed=args.seed,
                         boundary_constant=args.boundary_constant)


def _instance(args):
    if getattr(args, "instance", None):
        with open(args.instance) as fh:
            return instance_from_json(fh.read())
    return generate_network(_config(args))


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_rows(args, rows: list[dict], meta: dict, doc=None) -> None:
    if args.format == "json":
        _emit(args, json.dumps(doc if doc is not None else {"meta": meta, "rows": rows},
                               indent=2, default=_json_default) + "\n")
    else:
        import io
        buf = io.StringIO()
        write_table(rows, buf, meta)
        _emit(args, buf.getvalue())


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ---------------------------------------------------------------------------
# verbs


def cmd_generate(args) -> None:
    _emit(args, instance_to_json(generate_network(_config(args))) + "\n")


def cmd_simulate(args) -> None:
    inst = _instance(args)
    cfg = inst.config
    row = {"scheme": args.scheme.upper(), "n": cfg.n, "m": cfg.m, "l": cfg.l, "alpha": cfg.alpha,
           "beta": cfg.beta, "gamma": cfg.gamma, "seed": cfg.seed}
    detail = {}
    if args.scheme == "hc":
        row.update(T_n="", exponent=hc_exponent(cfg.alpha))
    else:
        fn = {"ish": ish_throughput, "imh": imh_throughput, "mh": mh_throughput}[args.scheme]
        r = fn(inst, args.symbols)
        row.update(T_n=r.total_throughput, access_total=r.access_total, exit_total=r.exit_total,
                   active_pairs=r.active_pairs, failures=r.route_failures,
                   interference_up=r.interference[0].mean_power,
                   interference_down=r.interference[1].mean_power,
                   median_sinr=r.median_sinr if r.hop_sinr.size else "")
        detail = {"per_cell_rate": r.per_cell_rate,
                  "interference": [asdict(s) | {"direction": s.direction.value} for s in r.interference],
                  "extra": r.extra}
    meta = {"verb": "simulate", "config": cfg.to_dict()}
    _emit_rows(args, [row], meta, {"meta": meta, "result": row, "detail": detail})


def cmd_classify(args) -> None:
    rep = classify(args.alpha, args.beta, args.gamma)
    _emit(args, json.dumps(rep.to_dict(), indent=2) + "\n")


def cmd_atlas(args) -> None:
    if args.beta is not None or args.gamma is not None:
        if args.beta is None or args.gamma is None:
            raise UsageError("an alpha sweep needs both --beta and --gamma")
        alphas = np.linspace(args.alpha_min, args.alpha_max, args.grid)
        rows = atlas_alpha(args.beta, args.gamma, alphas)
        meta = {"verb": "atlas", "mode": "alpha", "beta": args.beta, "gamma": args.gamma}
    else:
        if args.alpha is None:
            raise UsageError("--alpha is required for a (beta, gamma) atlas")
        rows = atlas_beta_gamma(args.alpha, args.grid)
        meta = {"verb": "atlas", "mode": "beta_gamma", "alpha": args.alpha, "grid": args.grid}
    _emit_rows(args, rows, meta)


def cmd_cutset(args) -> None:
    inst = _instance(args)
    cfg = inst.config
    cut = cs.build_cut(inst)
    terms = cs.cutset_terms(inst, args.symbols, args.epsilon)
    row = {"n": cfg.n, "alpha": cfg.alpha, "beta": cfg.beta, "gamma": cfg.gamma, "seed": cfg.seed,
           "t1": terms.t1, "t2": terms.t2, "t3": terms.t3, "d4": terms.d4, "d5": terms.d5,
           "total": terms.total, "epsilon": args.epsilon,
           "direct_capacity": cs.direct_cut_capacity(inst, cut, args.symbols) if args.direct else "",
           "f3_norm": cs.f3_norm_stat(inst, cut, args.f3_samples) if args.f3_samples else ""}
    _emit_rows(args, [row], {"verb": "cutset", "config": cfg.to_dict()})


def cmd_sweep(args) -> None:
    if args.spec:
        with open(args.spec) as fh:
            spec = SweepSpec.from_json(fh.read())
    else:
        if not args.n_values:
            raise UsageError("give --spec or --n-values")
        spec = SweepSpec(n_values=args.n_values, trials_per_n=args.trials, alpha=args.alpha,
                         beta=args.beta, gamma=args.gamma, epsilon0=args.epsilon0,
                         geometry=args.geometry, schemes=args.schemes, base_seed=args.seed,
                         power_p=args.power, noise_n0=args.noise)
    rows = run_sweep(spec, args.workers)
    meta = {"verb": "sweep", "spec": asdict(spec)}
    _emit_rows(args, rows, meta)
    if args.summary:
        columns = {"ISH": "ISH_T", "IMH": "IMH_T", "MH": "MH_T", "CUTSET": "CUT_total"}
        fits = {}
        if len(spec.n_values) >= 4:
            for s in spec.schemes:
                if s in columns:
                    fits[s] = fit_exponent(rows, columns[s]).to_dict()
        failed = sum(bool(r["error"]) for r in rows)
        with open(args.summary, "w") as fh:
            json.dump({"spec": asdict(spec), "fits": fits, "failed_rows": failed}, fh, indent=2)


def cmd_verify(args) -> None:
    params = json.loads(args.params) if args.params else {}
    rep = verify_lemma(args.lemma, params)
    _emit(args, json.dumps(rep.to_dict(), indent=2, default=_json_default) + "\n")


def cmd_reconcile(args) -> None:
    params = {"alpha": args.alpha, "beta": args.beta, "gamma": args.gamma,
              "n_values": args.n_values, "trials": args.trials, "base_seed": args.seed,
              "workers": args.workers}
    rep = reconcile(params)
    _emit(args, json.dumps(rep.to_dict(), indent=2, default=_json_default) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="sample a network instance (JSON)")
    _add_config(p, instance=False)
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="throughput of one scheme on one instance")
    _add_config(p)
    p.add_argument("--scheme", choices=["ish", "imh", "mh", "hc"], required=True)
    p.add_argument("--symbols", type=int, default=1, help="fading symbols to average")
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="regime and best scheme at (alpha, beta, gamma)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("atlas", help="best-scheme grid over (beta, gamma) or over alpha")
    p.add_argument("--alpha", type=float, help="fixed alpha for a (beta, gamma) grid")
    p.add_argument("--beta", type=float, help="fixed beta for an alpha sweep")
    p.add_argument("--gamma", type=float, help="fixed gamma for an alpha sweep")
    p.add_argument("--grid", type=int, default=50, help="points per axis")
    p.add_argument("--alpha-min", type=float, default=2.01)
    p.add_argument("--alpha-max", type=float, default=6.0)
    _add_output(p, default="csv")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("cutset", help="cut-set bound terms on one instance")
    _add_config(p)
    p.add_argument("--symbols", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=cs.DEFAULT_EPSILON, help="n**epsilon factor on T3")
    p.add_argument("--direct", action="store_true", help=f"also log-det across the cut (n <= {cs.DIRECT_CUT_MAX_N})")
    p.add_argument("--f3-samples", type=int, default=0, help="symbols for the ||F3||^2 statistic")
    _add_output(p, default="csv")
    p.set_defaults(func=cmd_cutset)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over n")
    p.add_argument("--spec", help="SweepSpec JSON file (overrides the flags below)")
    p.add_argument("--n-values", type=int, nargs="+")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--schemes", nargs="+", default=["ISH"], help="ISH IMH MH HC CUTSET")
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--epsilon0", type=float, default=0.1)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--geometry", choices=[g.value for g in Geometry], default="extended")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--workers", type=int, help="worker processes (default HYBRIDNET_THREADS or CPU count)")
    p.add_argument("--summary", help="write fitted exponents to this JSON file")
    _add_output(p, default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="Monte Carlo lemma check")
    p.add_argument("--lemma", required=True, choices=["L1", "L3", "L5", "L6", "L7", "L8"])
    p.add_argument("--params", help="JSON object overriding the check's defaults")
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconcile", help="fitted vs analytic exponents at one parameter point")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n-values", type=int, nargs="+", default=[2**k for k in range(10, 17)])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.set_defaults(func=cmd_reconcile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"hybridnet {args.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "verb": args.verb}),
              file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
