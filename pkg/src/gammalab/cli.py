"""Command-line experiment runner: ``gammalab run | report | list-probes``."""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .banach import SpaceDescriptor, VectorFamily, parse_space, type_cotype_probe, witness_search
from .calculus import SectorialOperator, diffusion_extend_probe, lps_sweep, parse_operator, parse_symbol
from .gamma import EstimatorConfig, interval_bounds_probe
from .holo import (gaussian_fn, rational_fn, sech_fn, sinc_witness, strip_chain_probe, theorem_probe,
                   y_chain_probe)
from .interp import BesovConfig, besov_chain_probe, interp_chain_probe
from .probes import ProbeAssertionError, ProbeResult, read_csv, write_csv

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 1, 2


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


# option name -> (type, default)
OPTIONS = {
    "probe": (str, None),
    "space": (str, "lp:2:4"),
    "operator": (str, "laplacian1d:32"),
    "symbol": (str, "q"),
    "function": (str, "gaussian"),
    "geometry": (str, "strip:0.1:0.3"),
    "levels": (str, "0.1,0.2,0.3,0.4"),
    "p": (float, None),
    "q": (float, None),
    "r": (float, 4.0),
    "theta": (float, 0.5),
    "alpha": (float, 0.5),
    "base": (int, 2),
    "N": (int, 8),
    "sizes": (str, None),
    "trials": (int, 1),
    "samples": (int, 4000),
    "points": (int, 256),
    "budget": (int, 50),
    "seed": (int, None),
    "out": (str, None),
    "json": (str, None),
    "svg": (str, None),
}


@dataclass
class Experiment:
    values: dict

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None

    @property
    def config(self):
        return EstimatorConfig(samples=self.samples, seed=self.seed)

    def sizes_or(self, default):
        if self.sizes:
            return [int(v) for v in str(self.sizes).split(",") if v.strip()]
        return default


def read_config_file(path):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in OPTIONS and k not in ("smoke", "timing"):
                raise InputError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v
    return out


def _coerce(key, value):
    if key in ("smoke", "timing"):
        return str(value).lower() in ("1", "true", "yes", "on") if isinstance(value, str) else bool(value)
    typ = OPTIONS[key][0]
    if value is None:
        return None
    if typ is float and str(value).lower() in ("inf", "oo"):
        return math.inf
    try:
        return typ(value)
    except ValueError:
        raise InputError(f"bad value for {key}: {value!r}") from None


def build_experiment(args) -> Experiment:
    merged = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for k in list(OPTIONS) + ["smoke", "timing"]:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            merged[k] = v
    vals = {k: _coerce(k, merged.get(k, d)) for k, (_, d) in OPTIONS.items()}
    vals["smoke"] = _coerce("smoke", merged.get("smoke", False))
    vals["timing"] = _coerce("timing", merged.get("timing", False))
    if vals["probe"] is None:
        raise InputError("no probe given")
    if vals["seed"] is None:
        raise InputError("a seed is required")
    if vals["smoke"]:
        vals["trials"] = min(vals["trials"], 4)
        vals["samples"] = min(vals["samples"], 1000)
        vals["points"] = min(vals["points"], 64)
        vals["budget"] = min(vals["budget"], 5)
        if vals["sizes"]:
            vals["sizes"] = ",".join(str(vals["sizes"]).split(",")[:2])
    return Experiment(vals)


# probe runners: each returns a list of ProbeResult
def _with_dim(space: SpaceDescriptor, n):
    if space.kind != "lp":
        raise InputError("size sweeps need an lp space")
    return SpaceDescriptor.lp(space.exponent, n)


def _geometry(text):
    try:
        kind, a, b = text.split(":")
        return kind, float(a), float(b)
    except ValueError:
        raise InputError(f"geometry must look like strip:a:b or sector:a:b, got {text!r}") from None


def _holo_function(name, space):
    x = np.ones(space.dim)
    table = {"gaussian": gaussian_fn, "sech": sech_fn, "rational": rational_fn}
    if name not in table:
        raise InputError(f"unknown function {name!r}; choose from {sorted(table)}")
    return table[name](x, space)


def _summary(probe_id, rows):
    ratios = np.array([r.ratio for r in rows])
    res = ProbeResult(
        f"{probe_id}.summary",
        float(np.mean([r.lhs for r in rows])), float(np.mean([r.rhs for r in rows])),
        ratio=float(ratios.max()), seed=rows[0].seed,
        params={"trials": len(rows), "min_ratio": float(ratios.min()), "max_ratio": float(ratios.max())},
    )
    res.holds = all(r.holds for r in rows)
    return res


def run_theorem(e: Experiment, kind):
    space = parse_space(e.space)
    geo, a, b = _geometry(e.geometry)
    exponent = e.p if kind == "type" else e.q
    if exponent is None:
        exponent = space.type_exponent if kind == "type" else space.cotype_exponent
    out = []
    for n in e.sizes_or([space.dim]):
        sp = _with_dim(space, n) if e.sizes else space
        w = sinc_witness(sp.dim, base=e.base, space=sp, mode=kind)
        res = theorem_probe(w, kind, exponent, geo, a, b, e.config)
        res.params["N"] = sp.dim
        out.append(res)
    return out


def run_constant(e: Experiment, kind):
    space = parse_space(e.space)
    exponent = e.p if kind == "type" else e.q
    if exponent is None:
        exponent = space.type_exponent if kind == "type" else space.cotype_exponent
    rng = np.random.default_rng(e.seed)
    rows = []
    for _ in range(e.trials):
        fam = VectorFamily(space, rng.standard_normal((e.N, space.dim)))
        rows.append(type_cotype_probe(fam, exponent, kind, samples=e.samples, seed=e.seed))
    return rows + ([_summary(f"{kind}-constant", rows)] if e.trials > 1 else [])


def run_witness_search(e: Experiment):
    space = parse_space(e.space)
    kind = "cotype" if e.q is not None else "type"
    exponent = e.q if e.q is not None else (e.p if e.p is not None else space.type_exponent)
    _, res = witness_search(space, kind, exponent, e.N, e.budget, e.seed, samples=e.samples)
    return [res]


def run_strip_chain(e: Experiment):
    space = parse_space(e.space)
    _, a, b = _geometry(e.geometry)
    return [strip_chain_probe(_holo_function(e.function, space), a, b, config=e.config)]


def run_y_chain(e: Experiment):
    space = parse_space(e.space)
    lv = [float(v) for v in e.levels.split(",")]
    if len(lv) != 4:
        raise InputError("levels must be four increasing numbers a,b,c,d")
    Y = ("gamma",) if e.p is None else ("lp", e.p)
    return [y_chain_probe(_holo_function(e.function, space), *lv, Y=Y, config=e.config)]


def run_interval(e: Experiment):
    space = parse_space(e.space)
    _, a, b = _geometry(e.geometry)
    return [interval_bounds_probe(_holo_function(e.function, space), a, b, config=e.config)]


def _symbol(e: Experiment):
    return parse_symbol(f"g:{e.alpha}" if e.symbol.strip() == "g" else e.symbol)


def _operator_for(e: Experiment, space):
    A = parse_operator(e.operator)
    m = A.shape[0]
    if m == space.dim:
        return SectorialOperator.certify(A, name=e.operator), space
    lifted = SectorialOperator.certify(np.kron(A, np.eye(space.dim)), name=f"{e.operator}(x)I{space.dim}")
    return lifted, SpaceDescriptor.power(space, m)


def run_lps(e: Experiment):
    space = parse_space(e.space)
    A, big = _operator_for(e, space)
    rng = np.random.default_rng(e.seed)
    X = rng.standard_normal((e.trials, big.dim)).T  # trial k does not depend on the trial count
    rows = lps_sweep(A, _symbol(e), X, big, e.p, e.q, points=e.points)
    for r in rows:
        r.seed = e.seed
    return rows + ([_summary("calculus.lps", rows)] if e.trials > 1 else [])


def run_diffusion(e: Experiment):
    space = parse_space(e.space)
    Q = parse_operator(e.operator)
    rng = np.random.default_rng(e.seed)
    rows = []
    for _ in range(e.trials):
        x = rng.standard_normal((Q.shape[0], space.dim))
        res = diffusion_extend_probe(Q, space, e.r, _symbol(e), x, e.p, e.q, points=e.points)
        res.seed = e.seed
        rows.append(res)
    return rows + ([_summary("calculus.diffusion", rows)] if e.trials > 1 else [])


def run_interp(e: Experiment):
    space = parse_space(e.space)
    A, big = _operator_for(e, space)
    p = big.type_exponent if e.p is None else e.p
    q = big.cotype_exponent if e.q is None else e.q
    return [interp_chain_probe(A, e.theta, p, q, max(e.trials, 1), e.seed, big)]


def run_besov(e: Experiment, swapped):
    return [besov_chain_probe(BesovConfig(e.r, n, e.theta), max(e.trials, 2), e.seed, swapped)
            for n in e.sizes_or([16, 32, 64, 128])]


PROBES = {
    "type-theorem": (lambda e: run_theorem(e, "type"), "type characterization on sinc witnesses"),
    "cotype-theorem": (lambda e: run_theorem(e, "cotype"), "cotype characterization on sinc witnesses"),
    "type-constant": (lambda e: run_constant(e, "type"), "Rademacher type ratio on random families"),
    "cotype-constant": (lambda e: run_constant(e, "cotype"), "Rademacher cotype ratio on random families"),
    "witness-search": (run_witness_search, "search for a family maximizing a type/cotype ratio"),
    "interval": (run_interval, "gamma norm on an interval against W^{1,1} and sup bounds"),
    "strip-chain": (run_strip_chain, "lattice / strip / line chain for a holomorphic function"),
    "y-chain": (run_y_chain, "five-term level chain for a holomorphic function"),
    "lps": (run_lps, "Littlewood-Paley-Stein square functions of an operator"),
    "diffusion": (run_diffusion, "mixed-norm square functions of a diffusion generator"),
    "interp-chain": (run_interp, "real interpolation vs fractional domain norms"),
    "besov": (lambda e: run_besov(e, False), "Besov / Bessel-potential embedding ratios over N"),
    "besov-swapped": (lambda e: run_besov(e, True), "Besov embeddings in the false direction"),
}


def _threads():
    env = os.environ.get("GAMMALAB_THREADS")
    return max(1, int(env)) if env else min(8, os.cpu_count() or 1)


def execute(e: Experiment):
    """Run every comma-separated probe; results come back in config order."""
    ids = [p.strip() for p in e.probe.split(",") if p.strip()]
    unknown = [p for p in ids if p not in PROBES]
    if unknown:
        raise InputError(f"unknown probe id(s): {', '.join(unknown)}")

    def one(pid):
        t0 = time.perf_counter()
        rows = PROBES[pid][0](e)
        dt = (time.perf_counter() - t0) * 1e3 / max(len(rows), 1)
        return rows, [dt] * len(rows)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(ids))) as pool:
        parts = list(pool.map(one, ids))
    rows = [r for rs, _ in parts for r in rs]
    times = [t for _, ts in parts for t in ts]
    return rows, times


def _xvalue(row, i):
    params = row["params"] if isinstance(row, dict) else row.params
    for key in ("N", "dim"):
        if key in params and params[key] is not None:
            return float(params[key])
    return float(i)


def classify(ratios, bounded_factor=1.25, run=3):
    """'growing' if strictly increasing over >= run consecutive points,
    else 'bounded' if max/min <= bounded_factor, else 'varying'."""
    r = [float(v) for v in ratios]
    if not r:
        return "empty"
    best = cur = 1
    for a, b in zip(r[:-1], r[1:]):
        cur = cur + 1 if b > a else 1
        best = max(best, cur)
    if best >= run:
        return "growing"
    lo, hi = min(r), max(r)
    if lo > 0 and hi / lo <= bounded_factor:
        return "bounded"
    return "varying"


def _groups(rows):
    out = {}
    for i, row in enumerate(rows):
        pid = row["probe_id"]
        if pid.endswith(".summary"):
            continue
        out.setdefault(pid, []).append((_xvalue(row, i), row["ratio"]))
    return out


def write_svg(groups, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "gammalab"
    fig, ax = plt.subplots(figsize=(6, 4))
    for pid, pts in sorted(groups.items()):
        pts = sorted(pts)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=pid)
    ax.set_xlabel("N (or row index)")
    ax.set_ylabel("ratio")
    if groups:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def summary_table(groups):
    lines = ["probe_id,points,min_ratio,max_ratio,classification"]
    for pid, pts in sorted(groups.items()):
        rs = [r for _, r in sorted(pts)]
        lines.append(f"{pid},{len(rs)},{min(rs)!r},{max(rs)!r},{classify(rs)}")
    return "\n".join(lines) + "\n"


def cmd_run(args):
    e = build_experiment(args)
    rows, times = execute(e)
    text = write_csv(rows, None, times if e.timing else None)
    if e.out:
        with open(e.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if e.json:
        with open(e.json, "w") as fh:
            for r in rows:
                fh.write(r.to_json() + "\n")
    if e.svg:
        write_svg(_groups([{"probe_id": r.probe_id, "params": r.params, "ratio": r.ratio} for r in rows]), e.svg)
    for r in rows:
        r.require()
    return EXIT_OK


def cmd_report(args):
    rows = []
    for path in args.inputs:
        rows.extend(read_csv(path))
    groups = _groups(rows)
    table = summary_table(groups)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    if args.svg:
        write_svg(groups, args.svg)
    return EXIT_OK


def cmd_list(args):
    for pid, (_, desc) in PROBES.items():
        print(f"{pid:16s} {desc}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="gammalab", description="Seeded gamma-norm and square-function experiments.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    r = sub.add_parser("run", help="run probes and write CSV rows")
    r.add_argument("--config", help="flat key = value file; flags override it")
    for k, (typ, _) in OPTIONS.items():
        r.add_argument(f"--{k}", dest=k, default=None, type=str)
    r.add_argument("--smoke", action="store_true", help="small, fast variant")
    r.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    r.set_defaults(func=cmd_run)
    rep = sub.add_parser("report", help="summarize probe CSV files")
    rep.add_argument("inputs", nargs="*")
    rep.add_argument("--svg")
    rep.add_argument("--summary")
    rep.set_defaults(func=cmd_report)
    ls = sub.add_parser("list-probes", help="list probe ids")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        return args.func(args)
    except ProbeAssertionError as exc:
        print(f"gammalab: assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (InputError, ValueError, OSError, KeyError) as exc:
        print(f"gammalab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
