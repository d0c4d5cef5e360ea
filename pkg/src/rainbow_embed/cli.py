"""Command-line front end: ``rainbow-embed {embed,pack,odc,label,diagnose,gen}``.

Exit codes: 0 verified success, 2 bad input (files, parameters, config),
3 a feasibility gate rejected the input, 4 the retry budget ran out.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .applications import bipartite_packing, cyclic_packing, distance_colouring, harmonious_labelling, odc_cover
from .errors import GateError, GraphFormatError, GroupError, InstanceError, RetriesExhausted
from .generators import path_graph, random_tree
from .graphcore import (
    ColouredGraph,
    atomic_write_text,
    colouring_stats,
    format_coloured_graph,
    load_coloured_graph,
)
from .groups import load_group_table, parse_group_spec
from .pipeline import PipelineConfig, embed_quasirandom
from .pipeline.config import parse_eps_schedule
from .regularity import check_quasirandom
from .verify import check_embedding, check_rainbow

SCHEMA = "rainbow-embed/1"
EXIT_OK, EXIT_INPUT, EXIT_GATE, EXIT_RETRIES = 0, 2, 3, 4


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


# ----------------------------------------------------------------- helpers
def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load(path: str, *, coloured: bool) -> ColouredGraph:
    try:
        return load_coloured_graph(path, require_colours=coloured)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then the config file, then explicit flags."""
    cfg = PipelineConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("the config file must hold a JSON object")
        cfg = PipelineConfig.from_mapping(data, cfg)
    flags: dict[str, Any] = {}
    if args.seed is not None:
        flags["rng_seed"] = args.seed
    for name in ("gamma", "mu", "retries"):
        if getattr(args, name) is not None:
            flags[name] = getattr(args, name)
    if args.eps_schedule is not None:
        flags["eps_schedule"] = parse_eps_schedule(args.eps_schedule)
    if args.force:
        flags["force"] = True
    return cfg.replace(**flags) if flags else cfg


def _manifest(args: argparse.Namespace, cfg: PipelineConfig, inputs: dict[str, str]) -> dict:
    return {
        "command": args.command,
        "inputs": {k: {"path": p, "sha256": _sha256(p)} for k, p in sorted(inputs.items())},
        "config": cfg.to_dict(),
        "seed": cfg.rng_seed,
        "output": args.out,
        "version": __version__,
    }


def _emit(args: argparse.Namespace, payload: dict, summary: list[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        sys.stdout.write("\n".join(summary) + "\n")


def _fail(args: argparse.Namespace, manifest: dict | None, status: str, message: str, details: Any) -> None:
    payload = {"schema": SCHEMA, "manifest": manifest, "status": status, "message": message,
               "details": _jsonable(details)}
    if args.out and manifest is not None:
        atomic_write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"{status}: {message}\n")
        if status == "gate-rejected" and isinstance(details, dict) and "boundedness" in details:
            for row in details["boundedness"].get("failures", [])[:20]:
                sys.stderr.write(f"  colour {row['colour']}: {row['value']} > {details['boundedness']['limit']}\n")


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------- commands
def cmd_embed(args: argparse.Namespace) -> int:
    cfg = _config(args)
    G = _load(args.host, coloured=True)
    H = _load(args.target, coloured=False)
    manifest = _manifest(args, cfg, {"host": args.host, "target": args.target})
    emb, tr = embed_quasirandom(G, H, cfg)
    phi = dict(emb.assignment)
    v1, v2 = check_embedding(H, G, phi), check_rainbow(G, phi, H)
    if not (v1.ok and v2.ok):
        raise AssertionError("embedding failed independent verification")
    edges = [[x, y, phi[x], phi[y], str(G.label_of(G.colour_matrix[phi[x], phi[y]]))] for x, y in H.edge_list()]
    payload = {
        "schema": SCHEMA, "manifest": manifest, "status": "success",
        "embedding": {str(x): v for x, v in sorted(phi.items())},
        "edges": edges,
        "verdict": {"embedding": v1.as_dict(), "rainbow": v2.as_dict()},
        "transcript": tr.to_dict(),
    }
    _emit(args, payload, ["status: success", f"seed: {cfg.rng_seed}", f"vertices embedded: {len(phi)}",
                          f"colours used: {len(edges)}", tr.to_text().rstrip()])
    return EXIT_OK


def cmd_pack(args: argparse.Namespace) -> int:
    cfg = _config(args)
    H = _load(args.target, coloured=False)
    manifest = _manifest(args, cfg, {"target": args.target})
    if args.bipartite:
        res = bipartite_packing(H, args.n, cfg)
    else:
        res = cyclic_packing(H, args.n, cfg)
    payload = {"schema": SCHEMA, "manifest": manifest, "status": "success",
               "kind": "bipartite" if args.bipartite else "cyclic", **res.as_dict(),
               "transcript": res.transcript.to_dict() if res.transcript else None}
    _emit(args, payload, ["status: success", f"seed: {cfg.rng_seed}", f"copies: {len(res.copies)}",
                          f"edge-disjoint: {'yes' if res.verdict.ok else 'no'}",
                          f"decomposition: {'yes' if res.decomposition else 'no'}"])
    return EXIT_OK


def cmd_odc(args: argparse.Namespace) -> int:
    cfg = _config(args)
    H = _load(args.target, coloured=False)
    manifest = _manifest(args, cfg, {"target": args.target})
    res = odc_cover(H, args.k, cfg)
    payload = {"schema": SCHEMA, "manifest": manifest, "status": "success", **res.as_dict(),
               "transcript": res.transcript.to_dict() if res.transcript else None}
    mult = ", ".join(f"{k}: {v}" for k, v in sorted(res.multiplicity.items()))
    _emit(args, payload, ["status: success", f"seed: {cfg.rng_seed}", f"copies: {len(res.copies)}",
                          f"edge multiplicities: {mult}", f"check_odc: {'ok' if res.verdict.ok else 'failed'}"])
    return EXIT_OK


def cmd_label(args: argparse.Namespace) -> int:
    cfg = _config(args)
    H = _load(args.target, coloured=False)
    inputs = {"target": args.target}
    if os.path.exists(args.group):
        group = load_group_table(args.group)
        inputs["group"] = args.group
    else:
        group = parse_group_spec(args.group)
    manifest = _manifest(args, cfg, inputs)
    manifest["group"] = args.group
    res = harmonious_labelling(H, group, cfg)
    payload = {"schema": SCHEMA, "manifest": manifest, "status": "success", **res.as_dict(),
               "transcript": res.transcript.to_dict() if res.transcript else None}
    labels = " ".join(f"{x}:{v}" for x, v in sorted(res.labelling.items()))
    _emit(args, payload, ["status: success", f"seed: {cfg.rng_seed}", f"labelling: {labels}",
                          f"harmonious: {'yes' if res.verdict.ok else 'no'}"])
    return EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    G = _load(args.host, coloured=True)
    stats = colouring_stats(G)
    n = G.vertex_count
    density = 2 * G.edge_count / (n * (n - 1)) if n > 1 else 0.0
    d = args.density if args.density is not None else density
    report: dict[str, Any] = {
        "vertices": n, "edges": G.edge_count, "colours": len(G.colours), "density": round(density, 9),
        "global_max": stats.global_max, "local_max": stats.local_max, "codegree": stats.codegree,
        "locally_bounded": {"lambda": args.lam, "holds": stats.local_max <= args.lam},
    }
    lines = [f"vertices: {n}", f"edges: {G.edge_count}", f"colours: {len(G.colours)}",
             f"global_max: {stats.global_max}", f"local_max: {stats.local_max}",
             f"codegree: {stats.codegree}",
             f"locally {args.lam}-bounded: {'yes' if stats.local_max <= args.lam else 'no'}"]
    try:
        verdict = check_quasirandom(G, args.eps, d, sample_count=args.samples, rng_seed=args.seed or 0)
    except ValueError as exc:
        report["quasirandom"] = {"skipped": str(exc)}
        lines.append(f"quasirandom: skipped ({exc})")
    else:
        report["quasirandom"] = {"eps": args.eps, "d": round(d, 9), **verdict.as_dict()}
        lines.append(f"quasirandom (eps={args.eps}, d={d:.4g}): {'pass' if verdict.passed else 'fail'}")
        if verdict.witnesses:
            w = verdict.witnesses[0]
            lines.append(f"witness: {w.kind} left={list(w.left)} right={list(w.right)} value={w.value:.4g}")
    payload = {"schema": SCHEMA, "manifest": {"command": "diagnose", "inputs": {"host": {
        "path": args.host, "sha256": _sha256(args.host)}}, "seed": args.seed or 0, "output": args.out,
        "version": __version__}, "status": "success", "report": report}
    _emit(args, payload, lines)
    return EXIT_OK


def _grid(a: int, b: int) -> ColouredGraph:
    edges = []
    for i in range(a):
        for j in range(b):
            v = i * b + j
            if j + 1 < b:
                edges.append((v, v + 1))
            if i + 1 < a:
                edges.append((v, v + b))
    return ColouredGraph(a * b, edges)


def _bounded_graph(n: int, m: int, delta: int, seed: int) -> ColouredGraph:
    rng = np.random.default_rng([seed, 0xBD])
    deg = [0] * n
    edges: set[tuple[int, int]] = set()
    for _ in range(50 * max(1, m)):
        if len(edges) >= m:
            break
        u, v = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        if (u, v) not in edges and deg[u] < delta and deg[v] < delta:
            edges.add((u, v))
            deg[u] += 1
            deg[v] += 1
    if len(edges) < m:
        raise InputError(f"could only place {len(edges)} of {m} edges with maximum degree {delta}")
    return ColouredGraph(n, sorted(edges))


def _gen(kind: str, params: Sequence[str], seed: int) -> ColouredGraph:
    def ints(k: int) -> list[int]:
        if len(params) != k:
            raise InputError(f"gen {kind} takes {k} parameter(s)")
        try:
            return [int(p) for p in params]
        except ValueError:
            raise InputError(f"gen {kind} parameters must be integers") from None

    if kind == "distance-kn":
        (n,) = ints(1)
        if n < 3:
            raise InputError("distance-kn needs n >= 3")
        return distance_colouring(n)
    if kind == "xor-clique":
        (k,) = ints(1)
        if not 1 <= k <= 12:
            raise InputError("xor-clique needs 1 <= k <= 12")
        n = 2**k
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        return ColouredGraph(n, edges, [i ^ j for i, j in edges])
    if kind == "gnp":
        if len(params) != 3:
            raise InputError("gen gnp takes: n p colours")
        try:
            n, p, c = int(params[0]), float(params[1]), int(params[2])
        except ValueError:
            raise InputError("gen gnp takes: n (int) p (float) colours (int)") from None
        if n < 1 or not 0 <= p <= 1 or c < 1:
            raise InputError("gen gnp needs n >= 1, 0 <= p <= 1 and colours >= 1")
        rng = np.random.default_rng([seed, 0x6E])
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < p
        edges = np.stack([iu[0][keep], iu[1][keep]], axis=1)
        return ColouredGraph(n, edges, rng.integers(c, size=len(edges)).tolist())
    if kind == "tree":
        m, delta = ints(2)
        if m < 0 or delta < 1 or (delta == 1 and m > 1):
            raise InputError("gen tree needs edges >= 0 and a feasible maximum degree")
        return random_tree(m, delta, seed)
    if kind == "bounded":
        n, m, delta = ints(3)
        if n < 2 or m < 0 or delta < 1:
            raise InputError("gen bounded needs n >= 2, m >= 0 and delta >= 1")
        return _bounded_graph(n, m, delta, seed)
    if kind == "grid":
        a, b = ints(2)
        if a < 1 or b < 1:
            raise InputError("grid sides must be positive")
        return _grid(a, b)
    if kind == "path":
        (m,) = ints(1)
        if m < 0:
            raise InputError("path length must be non-negative")
        return path_graph(m)
    raise InputError(f"unknown kind {kind!r}")


GEN_KINDS = ("distance-kn", "xor-clique", "gnp", "tree", "bounded", "grid", "path")


def cmd_gen(args: argparse.Namespace) -> int:
    g = _gen(args.kind, args.params, args.seed or 0)
    text = format_coloured_graph(g)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ parser
def _common(p: argparse.ArgumentParser, *, pipeline: bool = True) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed (recorded in the output)")
    p.add_argument("--out", default=None, help="result file, written atomically")
    p.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")
    if pipeline:
        p.add_argument("--gamma", type=float, default=None, help="slack gamma in (0, 1]")
        p.add_argument("--mu", type=float, default=None, help="completion reservoir fraction")
        p.add_argument("--retries", type=int, default=None, help="whole-pipeline attempts")
        p.add_argument("--eps-schedule", default=None, help="comma-separated increasing tolerances")
        p.add_argument("--force", action="store_true", help="skip the feasibility gates")
        p.add_argument("--config", default=None, help="JSON file of configuration values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rainbow-embed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="rainbow copy of a target graph in a coloured host")
    p.add_argument("host", help="coloured host graph file")
    p.add_argument("target", help="target graph file (colours ignored)")
    _common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("pack", help="cyclic or bipartite packing by rotating a rainbow copy")
    p.add_argument("-n", type=int, required=True, help="host size")
    p.add_argument("--target", required=True, help="target graph file")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--cyclic", action="store_true", help="copies in K_n (default)")
    kind.add_argument("--bipartite", action="store_true", help="copies in K_n,n")
    _common(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("odc", help="approximate orthogonal double cover of K_{2^k}")
    p.add_argument("-k", type=int, required=True, help="exponent: the host is K_{2^k}")
    p.add_argument("--target", required=True, help="target graph file")
    _common(p)
    p.set_defaults(func=cmd_odc)

    p = sub.add_parser("label", help="harmonious labelling over an abelian group")
    p.add_argument("--group", required=True, help="Z16, Z2xZ4, or a group table file")
    p.add_argument("--target", required=True, help="target graph file")
    _common(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("diagnose", help="colouring statistics and a quasirandomness check")
    p.add_argument("host", help="coloured host graph file")
    p.add_argument("--eps", type=float, default=0.1, help="regularity tolerance")
    p.add_argument("--density", type=float, default=None, help="target density (default: measured)")
    p.add_argument("--lambda", dest="lam", type=int, default=2, help="local boundedness to report")
    p.add_argument("--samples", type=int, default=64, help="sampled set pairs")
    _common(p, pipeline=False)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("gen", help="write a generated graph")
    p.add_argument("kind", choices=GEN_KINDS)
    p.add_argument("params", nargs="*", help="kind-specific integers (gnp: n p colours)")
    _common(p, pipeline=False)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, GraphFormatError, GroupError, InstanceError, ValueError) as exc:
        _fail(args, None, "input-error", str(exc), None)
        return EXIT_INPUT
    except GateError as exc:
        _fail(args, _safe_manifest(args), "gate-rejected", str(exc), exc.report)
        return EXIT_GATE
    except RetriesExhausted as exc:
        _fail(args, _safe_manifest(args), "retries-exhausted", str(exc), {"stage": exc.stage, **(
            exc.details if isinstance(exc.details, dict) else {})})
        return EXIT_RETRIES


def _safe_manifest(args: argparse.Namespace) -> dict | None:
    try:
        cfg = _config(args)
        inputs = {k: getattr(args, k) for k in ("host", "target") if getattr(args, k, None)}
        return _manifest(args, cfg, inputs)
    except Exception:
        return None


if __name__ == "__main__":
    sys.exit(main())
