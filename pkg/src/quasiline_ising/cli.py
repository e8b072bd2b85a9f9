"""Command-line entry point: ``qlising <subcommand> ...``.

Every subcommand prints a JSON summary on stdout. With ``--out`` (or the
``QLISING_OUT_DIR`` environment variable) it also writes an artifact that
embeds the resolved configuration and a hash of its inputs. Artifacts are
written to a temporary file and renamed into place.

Exit codes: 0 success, 2 precondition or cap violation, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import polynomials as poly
from .enumeration import EnumerationCapError
from .graphs import (
    GenerationError,
    Graph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    is_claw_free,
    is_quasi_line,
    line_graph,
    load_graph,
    path_graph,
    petersen_graph,
    random_bipartite_cubic,
    random_cubic,
)
from .spin_models import mu_to_str, parse_mu

OUT_DIR_ENV = "QLISING_OUT_DIR"
ARTIFACT_VERSION = 1


class UsageError(ValueError):
    pass


# -- helpers ------------------------------------------------------------------

def _exact_mu(text: str) -> Fraction:
    mu = parse_mu(text)
    if not isinstance(mu, Fraction) or mu <= 0:
        raise UsageError(f"mu must be a positive exact value, got {text!r}")
    return mu


def _big(x) -> str | int:
    """JSON-safe decimal rendering of ints and Fractions."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return str(x)


def _log2(x: Fraction) -> float:
    import math

    x = Fraction(x)
    return math.log2(x.numerator) - math.log2(x.denominator)


GENERATORS = {
    "cubic": lambda size, seed: random_cubic(size, seed),
    "bipartite-cubic": lambda size, seed: random_bipartite_cubic(size, seed),
    "line-of-cubic": lambda size, seed: line_graph(random_cubic(size, seed)),
    "complete": lambda size, seed: complete_graph(size),
    "complete-bipartite": lambda size, seed: complete_bipartite(size, size),
    "cycle": lambda size, seed: cycle_graph(size),
    "path": lambda size, seed: path_graph(size),
    "petersen": lambda size, seed: petersen_graph(),
}


def _graph(args, name: str = "graph") -> Graph:
    path = getattr(args, name)
    if path is not None:
        g = load_graph(path)
        if not isinstance(g, Graph):
            raise UsageError("this command needs a simple graph, not a multigraph")
        return g
    if args.family is None:
        raise UsageError(f"give --{name} FILE or --family with --size/--seed")
    return GENERATORS[args.family](args.size, args.seed)


def _add_graph_source(p: argparse.ArgumentParser, name: str = "graph") -> None:
    p.add_argument(f"--{name}", type=Path, help="graph JSON file")
    p.add_argument("--family", choices=sorted(GENERATORS), help="generate instead of loading")
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)


def _config(args) -> dict:
    skip = {"func", "out", "csv"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def _input_hash(config: dict, graphs: list[Graph]) -> str:
    h = hashlib.sha256(json.dumps(config, sort_keys=True).encode())
    for g in graphs:
        h.update(g.content_hash().encode())
    return h.hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_path(args, suffix: str = ".json") -> Path | None:
    if getattr(args, "out", None) is not None:
        return Path(args.out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env) / f"{args.command}{suffix}"
    return None


def _emit(args, result, graphs: list[Graph], summary=None, extra_files: dict[str, str] | None = None) -> None:
    config = _config(args)
    artifact = {
        "version": ARTIFACT_VERSION,
        "command": args.command,
        "config": config,
        "input_hash": _input_hash(config, graphs),
        "result": result,
    }
    path = _out_path(args)
    if path is not None:
        for suffix, text in (extra_files or {}).items():
            atomic_write(path.with_suffix(suffix), text)
        atomic_write(path, json.dumps(artifact, indent=2, sort_keys=True) + "\n")
    print(json.dumps(result if summary is None else summary))


# -- subcommands --------------------------------------------------------------

def cmd_gen(args) -> None:
    if args.family is None:
        raise UsageError("gen needs --family")
    g = GENERATORS[args.family](args.size, args.seed)
    d = g.to_dict()
    _emit(args, d, [g], summary={"n": g.n, "m": g.m, "hash": g.content_hash(), "graph": d})


def cmd_check_class(args) -> None:
    g = _graph(args)
    claw, witness = is_claw_free(g)
    ql, bad = is_quasi_line(g)
    result = {
        "n": g.n, "m": g.m,
        "claw_free": claw, "claw": None if witness is None else [witness[0], list(witness[1])],
        "quasi_line": ql, "quasi_line_violation": bad,
        "cubic": g.is_cubic(), "connected": g.is_connected(), "max_degree": g.max_degree,
    }
    _emit(args, result, [g])


def cmd_build_gstar(args) -> None:
    from .gadgets import build_gstar

    base = _graph(args, "base")
    out = build_gstar(base, args.kind)
    d = out.to_dict()
    summary = {"kind": args.kind, "n": out.gstar.n, "m": out.gstar.m, "max_degree": out.gstar.max_degree,
               "hash": out.gstar.content_hash()}
    _emit(args, d, [base], summary=summary)


def cmd_cutpoly(args) -> None:
    from .spin_models import cut_polynomial

    g = _graph(args)
    p = cut_polynomial(g, args.cap)
    result = {"coefficients": [str(c) for c in p.coeffs], "mass": str(p.mass)}
    if args.mu is not None:
        mu = _exact_mu(args.mu)
        result["mu"] = mu_to_str(mu)
        result["value"] = _big(poly.evaluate(p.coeffs, mu))
    _emit(args, result, [g], summary=list(p.coeffs))


def cmd_zsigma(args) -> None:
    from .gadgets import build_gstar, z_sigma_polynomial

    base = _graph(args, "base")
    out = build_gstar(base, args.kind)
    sigma = args.sigma or "+" * base.n
    coeffs = z_sigma_polynomial(out.layout, sigma)
    result = {"sigma": sigma, "kind": args.kind, "coefficients": [str(c) for c in coeffs],
              "degree": poly.degree(coeffs), "mass": str(sum(coeffs))}
    if args.mu is not None:
        mu = _exact_mu(args.mu)
        result["mu"] = mu_to_str(mu)
        result["log2_value"] = _log2(poly.evaluate(coeffs, mu))
    _emit(args, result, [base])


def cmd_sandwich(args) -> None:
    from dataclasses import asdict

    from .enumeration import spins_from_index
    from .gadgets import build_gstar, sandwich_check

    base = _graph(args, "base")
    out = build_gstar(base, args.kind)
    sigmas = [args.sigma] if args.sigma else [spins_from_index(i, base.n) for i in range(1 << base.n)]
    reports = [sandwich_check(out.layout, s) for s in sigmas]
    rows = []
    for r in reports:
        d = asdict(r)
        d["mass"], d["expected_mass"] = str(r.mass), str(r.expected_mass)
        rows.append(d)
    result = {"kind": args.kind, "all_ok": all(r.ok for r in reports), "checked": len(reports), "reports": rows}
    _emit(args, result, [base], summary={"all_ok": result["all_ok"], "checked": len(reports)})


def cmd_bottleneck(args) -> None:
    from .torpid import bottleneck_sums, certify_magnifier, find_magnifier_base

    if args.base is not None or args.family is not None:
        base = _graph(args, "base")
        cert = certify_magnifier(base)
    else:
        base, cert, _ = find_magnifier_base(args.size, args.seed)
    mu = _exact_mu(args.mu)
    r = bottleneck_sums(base, mu, cert)
    cond = r.conductance_report()
    result = {
        "n_per_side": r.n, "m": r.m, "mu": mu_to_str(mu),
        "magnifier_ratio": str(cert.min_ratio),
        "equal": [str(c) for c in r.equal], "plus": [str(c) for c in r.plus], "minus": [str(c) for c in r.minus],
        "log2_equal": _log2(r.equal_value), "log2_plus": _log2(r.plus_value),
        "equal_bound_ok": r.equal_bound_ok, "side_bound_ok": r.side_bound_ok,
        "separation_holds": r.separation_holds(), "symmetric": r.symmetric,
        "total_mass": str(r.total_mass), "threshold_mu": str(r.threshold_mu()),
        "log2_conductance_bound": _log2(cond.ratio),
    }
    summary = {k: result[k] for k in ("n_per_side", "mu", "equal_bound_ok", "side_bound_ok",
                                      "separation_holds", "symmetric", "threshold_mu")}
    _emit(args, result, [base], summary=summary)


def cmd_escape(args) -> None:
    from dataclasses import asdict

    from .torpid import EscapeConfig, escape_time_experiment, rows_to_csv, sign_test, summarise

    if args.config is not None:
        cfg = EscapeConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = EscapeConfig(tuple(args.sizes), args.mu, args.replicates, args.step_cap, args.seed,
                           not args.no_control, args.control_burn)
    _exact_mu(cfg.mu)
    rows = escape_time_experiment(cfg, args.workers)
    summ = summarise(rows)
    result = {"config": cfg.to_dict(), "summary": [asdict(s) for s in summ]}
    big = max(cfg.sizes)
    if cfg.control:
        g_times = [r.hit_time for r in rows if r.kind == "gstar" and r.size == big]
        c_times = [10 * r.hit_time for r in rows if r.kind == "control" and r.size == big]
        w, t, p = sign_test(c_times, g_times)
        result["control_sign_test"] = {"size": big, "wins": w, "trials": t, "p_value": p}
    _emit(args, result, [], extra_files={".csv": rows_to_csv(rows)})


def cmd_decode(args) -> None:
    from .cuts import decode_experiment

    base = _graph(args, "base")
    r = decode_experiment(base, args.mu, args.samples, args.seed)
    _emit(args, r.to_dict(), [base])


def cmd_audit_gadget(args) -> None:
    from dataclasses import asdict

    from .gadgets import gadget_internal_audit

    a = gadget_internal_audit(args.kind)
    d = asdict(a)
    d["argmax"] = list(a.argmax)
    d["histogram"] = list(a.histogram)
    _emit(args, d, [], summary={"kind": a.kind, "max_cut": a.max_cut, "maximisers": len(a.argmax),
                                "runner_up": a.second_best})


def cmd_maxcut(args) -> None:
    from .cuts import flip_local_search, maxcut_exact

    g = _graph(args)
    if args.local_search:
        start = args.start or "+" * g.n
        r = flip_local_search(g, start, seed=args.search_seed)
    else:
        r = maxcut_exact(g, args.cap)
    _emit(args, r.to_dict(), [g])


def cmd_roots(args) -> None:
    from .spin_models import field_polynomial, univariate_roots_in_z

    g = _graph(args)
    mu = _exact_mu(args.mu)
    roots = univariate_roots_in_z(field_polynomial(g, args.cap), mu, args.dps)
    max_imag = max(abs(r.value.imag) for r in roots)
    result = {
        "mu": mu_to_str(mu), "n": g.n,
        "roots": [{"re": r.value.real, "im": r.value.imag, "residual": r.residual, "converged": r.converged}
                  for r in roots],
        "max_abs_imag": max_imag, "all_real": all(r.is_real for r in roots),
    }
    _emit(args, result, [g], summary={"n": g.n, "max_abs_imag": max_imag, "all_real": result["all_real"]})


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlising", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", type=Path, help=f"artifact path (default: ${OUT_DIR_ENV}/{name}.json)")
        return p

    p = add("gen", cmd_gen, "generate a graph")
    p.add_argument("--family", choices=sorted(GENERATORS))
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)

    p = add("check-class", cmd_check_class, "claw-free / quasi-line recognition")
    _add_graph_source(p)

    p = add("build-gstar", cmd_build_gstar, "gadget reduction of a cubic base")
    _add_graph_source(p, "base")
    p.add_argument("--kind", choices=("H", "J"), default="H")

    p = add("cutpoly", cmd_cutpoly, "exact cut polynomial")
    _add_graph_source(p)
    p.add_argument("--mu")
    p.add_argument("--cap", type=int, default=26)

    p = add("zsigma", cmd_zsigma, "Z_sigma polynomial on the reduction")
    _add_graph_source(p, "base")
    p.add_argument("--kind", choices=("H", "J"), default="H")
    p.add_argument("--sigma", help="base configuration as a +/- string")
    p.add_argument("--mu")

    p = add("sandwich", cmd_sandwich, "check the Z_sigma sandwich bounds")
    _add_graph_source(p, "base")
    p.add_argument("--kind", choices=("H", "J"), default="H")
    p.add_argument("--sigma")

    p = add("bottleneck", cmd_bottleneck, "exact class sums over the Omega partition")
    _add_graph_source(p, "base")
    p.add_argument("--mu", default="2^76")

    p = add("escape", cmd_escape, "escape-time experiment")
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--sizes", type=int, nargs="+", default=[3, 4])
    p.add_argument("--mu", default="16")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--step-cap", type=int, default=10 ** 8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-control", action="store_true")
    p.add_argument("--control-burn", type=int, default=10 ** 6)
    p.add_argument("--workers", type=int, default=1)

    p = add("decode", cmd_decode, "Gibbs decoder success probability")
    _add_graph_source(p, "base")
    p.add_argument("--mu", default="16")
    p.add_argument("--samples", type=int, default=4000)

    p = add("audit-gadget", cmd_audit_gadget, "rank internal cuts of a gadget")
    p.add_argument("--kind", choices=("H", "J"), default="H")

    p = add("maxcut", cmd_maxcut, "exact max-cut or flip local search")
    _add_graph_source(p)
    p.add_argument("--local-search", action="store_true")
    p.add_argument("--start")
    p.add_argument("--search-seed", type=int)
    p.add_argument("--cap", type=int, default=30)

    p = add("roots", cmd_roots, "roots in z of the field polynomial")
    _add_graph_source(p)
    p.add_argument("--mu", default="2")
    p.add_argument("--dps", type=int, default=60)
    p.add_argument("--cap", type=int, default=20)
    return ap


PRECONDITION_ERRORS = (UsageError, EnumerationCapError, GenerationError, ValueError, FileNotFoundError, KeyError)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PRECONDITION_ERRORS as exc:
        print(f"qlising {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"qlising {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
