"""Command-line entry point: ``kplexq <subcommand> ...``.

Exit codes: 0 ok, 2 bad input, 3 size limit exceeded, 4 bad parameter.
Every file written with ``--out`` gets a ``<out>.manifest.json`` next to it.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import metadata
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import kernels
from .anneal import AnnealConfig, anneal
from .graph import (
    EXHAUSTIVE_LIMIT,
    Graph,
    GraphParseError,
    LimitExceeded,
    brute_force_mkp,
    complement,
    is_kplex,
    parse_graph,
    random_gnm,
)
from .grover import RNG_ID, snapshot_record
from .oracle import build_oracle, oracle_stats
from .qubo import DEFAULT_R, build_qubo, export_lp, export_qubo, parse_qubo, variable_count_row
from .search import DEFAULT_SHOTS, qmkp, qtkp

EXIT_OK, EXIT_INPUT, EXIT_LIMIT, EXIT_PARAM = 0, 2, 3, 4


class InputError(Exception):
    pass


class ParamError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


def _read_graph(path: Optional[str]) -> Graph:
    if not path:
        raise InputError("--graph is required")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return parse_graph(text)
    except (GraphParseError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _need_k(args) -> int:
    if args.k is None:
        raise ParamError("--k is required")
    if args.k < 1:
        raise ParamError(f"k must be >= 1, got {args.k}")
    return args.k


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _manifest(args, outputs: list[str], inputs: dict[str, str]) -> None:
    if not outputs:
        return
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    record = {
        "subcommand": args.command,
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "rng": RNG_ID,
        "backend": kernels.BACKEND,
        "version": _version(),
        "inputs": inputs,
        "outputs": outputs,
    }
    _write(outputs[0] + ".manifest.json", _dump_json(record))


# ---------------------------------------------------------------- subcommands


def cmd_exact(args) -> int:
    g = _read_graph(args.graph)
    k = _need_k(args)
    res = brute_force_mkp(g, k, EXHAUSTIVE_LIMIT)
    witness = res.witnesses[0] if res.witnesses else None
    if witness is not None and not is_kplex(g, witness, k):  # pragma: no cover - guard
        raise RuntimeError("witness failed verification")
    print(f"{res.optimum_size} {witness}" if witness is not None else "0")
    if args.out:
        _write(args.out, _dump_json(res.to_json()))
        _manifest(args, [args.out], {"graph": g.fingerprint()})
    return EXIT_OK


def cmd_grover(args) -> int:
    g = _read_graph(args.graph)
    k = _need_k(args)
    if g.n > EXHAUSTIVE_LIMIT:
        raise LimitExceeded(f"state vector over {g.n} qubits exceeds limit {EXHAUSTIVE_LIMIT}")
    if args.shots < 1:
        raise ParamError("--shots must be >= 1")
    outputs = []
    if args.t is not None:
        if not 1 <= args.t <= g.n:
            raise ParamError(f"T must lie in [1, {g.n}]")
        out = qtkp(g, k, args.t, args.shots, args.seed, keep_snapshots=bool(args.emit_amplitudes))
        print(f"result {out.result if out.found else 'none'}")
        print(f"M {out.M} iterations {out.iterations} success_frequency {out.success_frequency:.4f}")
        trace = {"mode": "qtkp", "k": k, "T": args.t, "found": out.found,
                 "result": out.result.vertices() if out.found else None, "M": out.M,
                 "iterations": out.iterations, "success_frequency": out.success_frequency,
                 "attempts": out.attempts, "shots": args.shots, "seed": args.seed}
        if args.emit_amplitudes:
            record = snapshot_record(out.run, k, args.t) if out.run else {"M": 0, "snapshots": []}
            _write(args.emit_amplitudes, _dump_json(record))
            outputs.append(args.emit_amplitudes)
    else:
        tr = qmkp(g, k, args.shots, args.seed)
        print(f"size {tr.size} {tr.final}")
        for p in tr.steps:
            print(f"probe T={p.T} {'found ' + str(p.witness) if p.feasible else 'none'}")
        trace = {"mode": "qmkp", **tr.to_json(args.graph, args.shots, args.seed)}
    if args.out:
        _write(args.out, _dump_json(trace))
        outputs.insert(0, args.out)
    _manifest(args, outputs, {"graph": g.fingerprint()})
    return EXIT_OK


def _model(args):
    g = _read_graph(args.graph)
    k = _need_k(args)
    if not args.r > 1:
        raise ParamError(f"penalty weight R must satisfy R > 1 (got {args.r})")
    return g, build_qubo(g, k, args.r)


def cmd_qubo(args) -> int:
    g, model = _model(args)
    text = export_qubo(model)
    print(f"vars {model.num_vars} linear {len(model.linear)} quadratic {len(model.quadratic)} "
          f"offset {model.offset:g}")
    if args.out:
        _write(args.out, text)
        _manifest(args, [args.out], {"graph": g.fingerprint()})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_lp(args) -> int:
    g, model = _model(args)
    text = export_lp(model)
    print(f"binaries {model.num_vars} products {len(model.quadratic)}")
    if args.out:
        _write(args.out, text)
        _manifest(args, [args.out], {"graph": g.fingerprint()})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_anneal(args) -> int:
    if not args.model:
        raise InputError("--model is required")
    try:
        model = parse_qubo(Path(args.model).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {args.model}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise InputError(f"{args.model}: {exc}") from exc
    g = _read_graph(args.graph)
    k = args.k if args.k is not None else model.k
    if k is None or k < 1:
        raise ParamError("k missing from model file; pass --k")
    if model.fingerprint and complement(g).fingerprint() != model.fingerprint:
        raise InputError("graph does not match the graph the model was built from")
    if args.shots < 1 or args.sweeps < 1:
        raise ParamError("--shots and --sweeps must be >= 1")
    rep = anneal(model, AnnealConfig(args.shots, args.sweeps, seed=args.seed), g, k)
    best = rep.best_feasible()
    print(f"best_cost {rep.best_cost:g}")
    print(f"decoded size {best.size} {best} feasible {is_kplex(g, best, k)}")
    if args.out:
        _write(args.out, rep.trajectory_csv())
        _write(args.out + ".json", rep.sidecar_json())
        _manifest(args, [args.out, args.out + ".json"],
                  {"graph": g.fingerprint(), "model": Path(args.model).name})
    return EXIT_OK


def cmd_stats(args) -> int:
    g = _read_graph(args.graph)
    k = _need_k(args)
    T = args.t if args.t is not None else 1
    if not 1 <= T <= g.n:
        raise ParamError(f"T must lie in [1, {g.n}]")
    text = _dump_json(oracle_stats(build_oracle(complement(g), k, T)))
    sys.stdout.write(text)
    if args.out:
        _write(args.out, text)
        _manifest(args, [args.out], {"graph": g.fingerprint()})
    return EXIT_OK


def _parse_range(text: str) -> range:
    try:
        lo, _, rest = text.partition(":")
        hi, _, step = rest.partition(":")
        out = range(int(lo), int(hi) + 1, int(step or 1))
    except ValueError as exc:
        raise ParamError(f"bad range {text!r}; expected LO:HI[:STEP]") from exc
    if not out or out.start < 1:
        raise ParamError(f"empty or non-positive range {text!r}")
    return out


GROWTH_COLUMNS = ("n", "m", "k", "qubo_vars", "qubo_vars_ceil_log2", "oracle_wires", "oracle_gates")


def growth_rows(ns: range, density: float, k: int, seed: int, oracle: bool = True) -> list[dict]:
    rows = []
    for n in ns:
        m = int(round(density * n * (n - 1) / 2))
        sub = int(np.random.SeedSequence([seed, n]).generate_state(1)[0])
        g = random_gnm(n, m, sub)
        row = variable_count_row(g, k)
        if oracle:
            st = oracle_stats(build_oracle(complement(g), k, 1))
            row["oracle_wires"], row["oracle_gates"] = st["wires"], st["gates"]
        rows.append(row)
    return rows


def cmd_growth(args) -> int:
    k = _need_k(args)
    if not 0 <= args.density <= 1:
        raise ParamError("--density must lie in [0, 1]")
    rows = growth_rows(_parse_range(args.n_range), args.density, k, args.seed, not args.no_oracle)
    cols = [c for c in GROWTH_COLUMNS if c in rows[0]]
    text = ",".join(cols) + "\n" + "".join(",".join(str(r[c]) for c in cols) + "\n" for r in rows)
    sys.stdout.write(text)
    if args.out:
        _write(args.out, text)
        _manifest(args, [args.out], {})
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.n is None or args.m is None:
        raise ParamError("--n and --m are required")
    try:
        g = random_gnm(args.n, args.m, args.seed)
    except ValueError as exc:
        raise ParamError(str(exc)) from exc
    text = g.to_edge_list()
    if args.out:
        _write(args.out, text)
        _manifest(args, [args.out], {})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kplexq", description="Maximum k-plex workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_: str, *flags: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        if "graph" in flags:
            sp.add_argument("--graph", help="edge-list or DIMACS graph file")
        if "k" in flags:
            sp.add_argument("--k", type=int)
        if "seed" in flags:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output file (a manifest is written next to it)")
        return sp

    add("exact", cmd_exact, "exhaustive maximum k-plex", "graph", "k")

    sp = add("grover", cmd_grover, "qTKP with --t, else qMKP", "graph", "k", "seed")
    sp.add_argument("--t", type=int)
    sp.add_argument("--shots", type=int, default=DEFAULT_SHOTS)
    sp.add_argument("--emit-amplitudes", dest="emit_amplitudes", metavar="PATH")

    for name, func in (("qubo", cmd_qubo), ("lp", cmd_lp)):
        sp = add(name, func, f"export the {name.upper()} model", "graph", "k")
        sp.add_argument("--r", type=float, default=DEFAULT_R)

    sp = add("anneal", cmd_anneal, "simulated annealing on a QUBO file", "graph", "k", "seed")
    sp.add_argument("--model", help="QUBO file written by the qubo subcommand")
    sp.add_argument("--shots", type=int, default=200)
    sp.add_argument("--sweeps", type=int, default=2)

    sp = add("stats", cmd_stats, "oracle wire/gate census", "graph", "k")
    sp.add_argument("--t", type=int)

    sp = add("growth", cmd_growth, "variable-count and oracle-size table", "k", "seed")
    sp.add_argument("--n-range", dest="n_range", default="10:40")
    sp.add_argument("--density", type=float, default=0.5)
    sp.add_argument("--no-oracle", dest="no_oracle", action="store_true")

    sp = add("gen", cmd_gen, "random G(n, m) graph", "seed")
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARAM
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ParamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
