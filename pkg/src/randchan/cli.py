"""Command line entry point: ``randchan <subcommand> ...``.

Every subcommand also accepts ``--config file.json`` holding a flat JSON object
whose keys are the long option names (dashes or underscores); explicit flags
override file values.  Output goes to ``--out``, else to
``$RANDCHAN_OUTPUT_DIR/<subcommand>.<ext>`` when that variable is set, else
stdout.

Exit status: 0 success, 1 a comparison row failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any

import numpy as np

from randchan import __version__
from randchan.errors import CapacityError, DomainError, SingularityError
from randchan import freeprob, montecarlo, moments, predictions
from randchan.weingarten import wg_exact

CSV_VERSION = 1
OUTPUT_DIR_ENV = "RANDCHAN_OUTPUT_DIR"

# defaults applied after config-file merge; None means required
DEFAULTS: dict[str, dict[str, Any]] = {
    "wg": {"n": None, "p": None, "format": "csv"},
    "moments": {"model": "single", "n": None, "k": None, "p_max": 4, "r": 1, "format": "csv"},
    "freeprob": {"action": None, "c": 1.0, "p": 6, "values": None, "inverse": False, "format": "json"},
    "predict": {"model": None, "regime": None, "c": None, "n": None, "k": None, "r": None,
                "phi": None, "order": 6, "format": "json"},
    "mc": {"model": "single", "n": None, "k": None, "samples": 100, "seed": 0,
           "stat": "moments:1,2,3", "per_sample": False, "dump_spectrum": None, "format": "csv"},
    "compare": {"model": "single", "n": None, "k": None, "p_max": 3, "samples": 1000, "seed": 0,
                "tolerance": 3.0, "format": "csv"},
    "entropy_sweep": {"model": "bi-conj", "c": 1.0, "ns": "20,30,40,50", "samples": 2, "seed": 0,
                      "format": "csv"},
}

EXACT_MOMENTS = {
    "single": lambda p, n, k: moments.rank_one_output_moment(p, n, k),
    "bi-indep": moments.bi_channel_independent_moment,
    "bi-conj": moments.bi_channel_conjugate_moment,
}


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _csv(kind: str, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# randchan-csv v{CSV_VERSION} {kind} ({__version__})\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _json(obj) -> str:
    def default(x):
        if isinstance(x, Fraction):
            return str(x)
        if isinstance(x, np.generic):
            return x.item()
        raise TypeError(type(x))

    return json.dumps(obj, indent=2, default=default) + "\n"


def _table(kind: str, columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        return _json([dict(zip(columns, row)) for row in rows])
    return _csv(kind, columns, rows)


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


# -- subcommands -------------------------------------------------------------------

def cmd_wg(cfg: dict) -> tuple[str, int]:
    wg = wg_exact(int(cfg["n"]), int(cfg["p"]))
    rows = [[label, value, float(value)] for label, value in wg.rows()]
    return _table("wg", ["cycle_type", "exact", "float"], rows, cfg["format"]), 0


def cmd_moments(cfg: dict) -> tuple[str, int]:
    seq = moments.moment_sequence(cfg["model"], int(cfg["p_max"]), int(cfg["n"]), int(cfg["k"]),
                                  int(cfg["r"]))
    rows = [[p, m, float(m)] for p, m in enumerate(seq.moments, start=1)]
    return _table("moments", ["p", "exact", "float"], rows, cfg["format"]), 0


def cmd_freeprob(cfg: dict) -> tuple[str, int]:
    action = cfg["action"]
    if action == "mp":
        c = cfg["c"]
        c = Fraction(c) if isinstance(c, str) else c
        rows = [[p, freeprob.mp_moment(p, c)] for p in range(1, int(cfg["p"]) + 1)]
        return _table("mp", ["p", "moment"], rows, cfg["format"]), 0
    if action == "transform":
        values = cfg["values"]
        if values is None:
            values = sys.stdin.read()
        try:
            data = json.loads(values) if isinstance(values, str) else values
        except json.JSONDecodeError as exc:
            raise UsageError(f"transform expects a JSON array: {exc}") from exc
        if not isinstance(data, list):
            raise UsageError("transform expects a JSON array")
        seq = [Fraction(x) if isinstance(x, (int, str)) else x for x in data]
        if cfg["inverse"]:
            out = freeprob.free_cumulants_to_moments(seq)
        else:
            out = freeprob.moments_to_free_cumulants(seq)
        name = "moment" if cfg["inverse"] else "cumulant"
        rows = [[i, x] for i, x in enumerate(out, start=1)]
        return _table("transform", ["p", name], rows, cfg["format"]), 0
    raise UsageError("freeprob needs an action: mp or transform")


def cmd_predict(cfg: dict) -> tuple[str, int]:
    params = {key: cfg[key] for key in ("c", "n", "k", "r", "order") if cfg.get(key) is not None}
    if cfg.get("phi") is not None:
        phi = cfg["phi"]
        params["phi"] = json.loads(phi) if isinstance(phi, str) else phi
    pred = predictions.predict(cfg["model"], cfg["regime"], params)
    return _json(pred.to_dict()), 0


def _parse_stat(stat: str) -> tuple[str, list[int]]:
    name, _, arg = stat.partition(":")
    if name == "moments":
        return name, _int_list(arg or "1,2,3")
    if name in ("entropy", "spectrum"):
        return name, []
    raise UsageError(f"unknown statistic {stat!r}")


def cmd_mc(cfg: dict, threads: int) -> tuple[str, int]:
    model, n, k = cfg["model"], int(cfg["n"]), int(cfg["k"])
    samples, seed = int(cfg["samples"]), int(cfg["seed"])
    kind, powers = _parse_stat(cfg["stat"])
    draw_spectra = kind == "spectrum" or cfg.get("dump_spectrum")
    spectra: list[np.ndarray] = []
    if draw_spectra:
        spectra = [montecarlo.sample_spectrum(model, n, k, montecarlo.sample_rng(seed, i))
                   for i in range(samples)]
        if cfg.get("dump_spectrum"):
            np.savetxt(cfg["dump_spectrum"], np.vstack(spectra),
                       header=f"randchan spectra v{CSV_VERSION} model={model} n={n} k={k} seed={seed}")
    if kind == "spectrum":
        rows = [[i, j, float(x)] for i, eig in enumerate(spectra) for j, x in enumerate(eig)]
        return _table("spectrum", ["sample", "index", "eigenvalue"], rows, cfg["format"]), 0
    stat = (montecarlo.moment_statistic(model, n, k, powers) if kind == "moments"
            else montecarlo.entropy_statistic(model, n, k))
    reports, values = montecarlo.estimate_vector(stat, samples, seed, threads)
    if cfg["per_sample"]:
        rows = [[i] + list(map(float, row)) for i, row in enumerate(values)]
        return _table("mc-samples", ["sample"] + stat.names, rows, cfg["format"]), 0
    rows = [[r.name, r.mean, r.stderr, r.count] for r in reports]
    return _table("mc", ["statistic", "mean", "stderr", "count"], rows, cfg["format"]), 0


def cmd_compare(cfg: dict, threads: int) -> tuple[str, int]:
    model, n, k = cfg["model"], int(cfg["n"]), int(cfg["k"])
    if model not in EXACT_MOMENTS:
        raise UsageError(f"compare supports models {sorted(EXACT_MOMENTS)}")
    ps = list(range(1, int(cfg["p_max"]) + 1))
    tol = float(cfg["tolerance"])
    exact = [EXACT_MOMENTS[model](p, n, k) for p in ps]
    reports, _ = montecarlo.estimate_vector(montecarlo.moment_statistic(model, n, k, ps),
                                            int(cfg["samples"]), int(cfg["seed"]), threads)
    limit_model = {"single": ("single_rank1", 1), "bi-indep": ("bi_indep", 2), "bi-conj": ("bi_indep", 2)}
    pmodel, power = limit_model[model]
    c = Fraction(k, n)
    law = predictions.predict(pmodel, "III", {"c": c, "order": len(ps)}).distribution
    rows, failed = [], False
    for p, ex, rep in zip(ps, exact, reports):
        # limit law of (c n)^power Z has normalized moments m_p; undo the scaling
        dim = n ** power
        pred = float(law.moment(p)) * dim / float(c * n) ** (power * p)
        if model == "bi-conj" and p > 1:
            pred += float(c * n) ** -p  # outlier near 1/(cn) on top of the bulk
        dev = abs(rep.mean - float(ex))
        # rounding floor: trace-normalized rows have stderr near machine epsilon
        ok = dev <= tol * rep.stderr + 1e-12 * max(1.0, abs(float(ex)))
        failed |= not ok
        rows.append([f"tr^{p}", ex, float(ex), rep.mean, rep.stderr, pred, "pass" if ok else "fail"])
    cols = ["statistic", "exact", "exact_float", "mc_mean", "mc_stderr", "prediction", "result"]
    return _table("compare", cols, rows, cfg["format"]), int(failed)


def cmd_entropy_sweep(cfg: dict, threads: int) -> tuple[str, int]:
    model, c = cfg["model"], float(cfg["c"])
    pmodel = "SINGLE" if model == "single" else "BI"
    rows = []
    for n in _int_list(cfg["ns"]):
        k = max(1, round(c * n))
        rep = montecarlo.estimate(montecarlo.entropy_statistic(model, n, k), int(cfg["samples"]),
                                  int(cfg["seed"]), threads, name="entropy")
        pred = predictions.entropy_asymptotic(pmodel, c, n)
        rows.append([n, k, rep.mean, rep.stderr, pred, rep.mean - pred])
    cols = ["n", "k", "entropy_mean", "entropy_stderr", "prediction", "gap"]
    return _table("entropy-sweep", cols, rows, cfg["format"]), 0


# -- plumbing ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randchan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat JSON file with option values")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for sampling (default: logical cores)")

    p = sub.add_parser("wg", help="exact Weingarten table")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    common(p)

    p = sub.add_parser("moments", help="exact output moments")
    p.add_argument("--model", choices=["single", "rank-r", "bi-indep", "bi-conj", "qzq"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p-max", type=int)
    p.add_argument("--r", type=int)
    common(p)

    p = sub.add_parser("freeprob", help="free Poisson moments and cumulant transforms")
    p.add_argument("action", nargs="?", choices=["mp", "transform"])
    p.add_argument("--c", type=str)
    p.add_argument("--p", type=int)
    p.add_argument("--values", help="JSON array (default: read stdin)")
    p.add_argument("--inverse", action="store_const", const=True,
                   help="cumulants to moments instead")
    common(p)

    p = sub.add_parser("predict", help="limit law for a model and regime (JSON)")
    p.add_argument("--model", choices=[m.value for m in predictions.Model])
    p.add_argument("--regime", choices=["I", "II", "III"])
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--phi", help="JSON array of input moments")
    p.add_argument("--order", type=int)
    common(p)

    for name, helptext in (("mc", "Monte Carlo estimates"),
                           ("compare", "exact vs Monte Carlo vs limit")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--model", choices=["single", "wishart", "bi-indep", "bi-conj"])
        p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        if name == "mc":
            p.add_argument("--stat", help="moments:1,2,3 | entropy | spectrum")
            p.add_argument("--per-sample", action="store_const", const=True)
            p.add_argument("--dump-spectrum", help="write all eigenvalues to this text file")
        else:
            p.add_argument("--p-max", type=int)
            p.add_argument("--tolerance", type=float, help="allowed |mean - exact| in standard errors")
        common(p)

    p = sub.add_parser("entropy-sweep", help="Monte Carlo entropy vs leading asymptotics")
    p.add_argument("--model", choices=["single", "bi-indep", "bi-conj"])
    p.add_argument("--c", type=float)
    p.add_argument("--ns", help="comma-separated n values")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags."""
    key = args.command.replace("-", "_")
    cfg = dict(DEFAULTS[key])
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a flat JSON object")
        for name, value in data.items():
            norm = name.replace("-", "_")
            if norm not in cfg and norm not in ("out", "threads"):
                raise UsageError(f"unknown config key {name!r} for {args.command}")
            cfg[norm] = value
    for name, value in vars(args).items():
        if value is not None and name not in ("command", "config"):
            cfg[name] = value
    missing = [name for name, value in cfg.items() if value is None and name in DEFAULTS[key]
               and DEFAULTS[key][name] is None and name not in ("values", "dump_spectrum")
               and not (key == "predict" and name in ("c", "n", "k", "r", "phi"))]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")
    if key in ("mc", "compare", "entropy_sweep") and cfg.get("seed") is None:
        raise UsageError("Monte Carlo runs need a seed")
    return cfg


def _write(text: str, cfg: dict, command: str) -> None:
    out = cfg.get("out")
    if not out and os.environ.get(OUTPUT_DIR_ENV):
        ext = "json" if text.lstrip().startswith(("{", "[")) else "csv"
        out = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{command}.{ext}")
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = resolve_config(args)
        threads = int(cfg.get("threads") or os.cpu_count() or 1)
        command = args.command
        if command == "wg":
            text, status = cmd_wg(cfg)
        elif command == "moments":
            text, status = cmd_moments(cfg)
        elif command == "freeprob":
            text, status = cmd_freeprob(cfg)
        elif command == "predict":
            text, status = cmd_predict(cfg)
        elif command == "mc":
            text, status = cmd_mc(cfg, threads)
        elif command == "compare":
            text, status = cmd_compare(cfg, threads)
        else:
            text, status = cmd_entropy_sweep(cfg, threads)
    except (UsageError, CapacityError, SingularityError, DomainError, ValueError) as exc:
        print(f"randchan {args.command}: error: {exc}", file=sys.stderr)
        return 2
    _write(text, cfg, args.command)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
