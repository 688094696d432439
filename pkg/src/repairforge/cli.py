"""Command line interface: ``repairforge <command> ...``.

Failures print one JSON object ``{"error", "message", "exit_code"}`` on stderr
and exit with the error class's status code.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, codes, io, pipelines, transform
from .errors import FormatError, LengthMismatch, RepairForgeError, SingularSystem
from .report import render_csv, render_json, render_text
from .simulation import default_rng, simulate_repair_all


def _emit(text: str) -> None:
    sys.stdout.write(text)


def _spec_of(code):
    return code.spec if isinstance(code, transform.TransformedCode) else code


def _write_code(code, out: str, lineage=None) -> None:
    io.save_spec(out, code, lineage)
    spec = _spec_of(code)
    _emit(f"wrote {out}: {spec.name or 'code'} n={spec.n} k={spec.k} alpha={spec.alpha}\n")


# -- commands -----------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.family == "evenodd":
        spec = codes.evenodd(args.p)
    elif args.family == "mdr1":
        spec = codes.mdr1_6_4()
    else:
        if args.n is None or args.k is None:
            raise LengthMismatch("cauchy needs --n and --k")
        spec = codes.cauchy_binary_mds(args.n, args.k, args.w)
    _write_code(spec, args.out or f"{spec.name}.spec")
    return 0


def cmd_verify(args) -> int:
    code = io.load_code(args.spec)
    spec = _spec_of(code)
    verdict = codes.verify_mds(spec)
    if not verdict:
        raise SingularSystem(f"not MDS: nodes {list(verdict.counterexample)} do not determine the message")
    _emit(f"OK: MDS on all {verdict.checked} {spec.k}-subsets of {spec.n} nodes\n")
    if args.simulate:
        reports = simulate_repair_all(code, args.trials, args.seed)
        _emit(f"OK: {len(reports)} node repairs verified over {args.trials} trial(s)\n")
    return 0


def cmd_encode(args) -> int:
    code = io.load_code(args.spec)
    spec = _spec_of(code)
    data = Path(args.message).read_bytes()
    stripes, pad = io.message_to_stripes(data, spec.k * spec.alpha)
    payloads = codes.encode(spec, stripes)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = io.spec_sha256(spec)
    for x, p in enumerate(payloads):
        io.write_shard(out / io.shard_name(x), x, p, pad_bits=pad, message_bytes=len(data),
                       spec_sha256=digest)
    _emit(f"wrote {spec.n} shards ({stripes.shape[1]} stripe(s), {pad} pad bits) to {out}\n")
    return 0


def _read_shards(spec, directory: str) -> tuple[dict, dict]:
    digest = io.spec_sha256(spec)
    shards, header = {}, None
    for path in sorted(Path(directory).glob("*.shard")):
        head, payload = io.read_shard(path)
        if head.get("spec_sha256") != digest:
            raise FormatError(f"{path} was written for a different spec")
        if head["alpha"] != spec.alpha:
            raise FormatError(f"{path}: alpha {head['alpha']} differs from spec alpha {spec.alpha}")
        shards[head["node"]] = payload
        header = head
    if header is None:
        raise FormatError(f"no shard files in {directory}")
    return shards, header


def cmd_erase(args) -> int:
    path = Path(args.dir) / io.shard_name(args.node)
    if not path.exists():
        raise FormatError(f"{path} does not exist")
    path.unlink()
    _emit(f"erased node {args.node}\n")
    return 0


def cmd_decode(args) -> int:
    code = io.load_code(args.spec)
    spec = _spec_of(code)
    shards, header = _read_shards(spec, args.dir)
    if isinstance(code, transform.TransformedCode):
        stripes = transform.decode_transformed(code, shards)
    else:
        stripes = codes.reconstruct(spec, shards)
    data = io.stripes_to_message(stripes, header["message_bytes"])
    Path(args.out).write_bytes(data)
    used = sorted(shards)[:spec.k]
    _emit(f"decoded {len(data)} bytes from nodes {used} to {args.out}\n")
    return 0


def _repair(code, node, shards):
    if isinstance(code, transform.TransformedCode):
        return transform.repair_node(code, node, shards)
    return codes.repair_with_strategy(code, node, shards)


def _render(reports, fmt: str, title: str = "") -> str:
    if fmt == "json":
        return render_json(reports, code=title)
    if fmt == "csv":
        return render_csv(reports)
    return render_text(reports, title)


def cmd_repair(args) -> int:
    code = io.load_code(args.spec)
    spec = _spec_of(code)
    if args.dir:
        shards, header = _read_shards(spec, args.dir)
        shards.pop(args.node, None)
        payload, rep = _repair(code, args.node, shards)
        io.write_shard(Path(args.dir) / io.shard_name(args.node), args.node, payload,
                       pad_bits=header["pad_bits"], message_bytes=header["message_bytes"],
                       spec_sha256=header["spec_sha256"])
    else:
        msg = default_rng(args.seed).integers(0, 2, spec.k * spec.alpha, dtype=np.uint8)
        cw = codes.encode(spec, msg)
        payload, rep = _repair(code, args.node, {y: cw[y] for y in range(spec.n) if y != args.node})
        if not np.array_equal(payload, cw[args.node]):
            raise SingularSystem(f"repair of node {args.node} returned a wrong payload")
    _emit(_render([rep], args.format, spec.name))
    return 0


def cmd_transform(args) -> int:
    spec = io.load_spec(args.spec)
    if spec.alpha % 2 and args.N is None:
        spec = transform.space_share(spec, 2)
    targets = [int(t) for t in args.targets.split(",")]
    cfg = transform.make_config(spec, targets, args.variant, perms=args.perms, N=args.N)
    tc = transform.apply_transform(spec, cfg)
    for node, why in tc.fallbacks.items():
        sys.stderr.write(f"note: node {node} falls back to naive repair ({why})\n")
    _write_code(tc, args.out)
    return 0


def cmd_pipeline(args) -> int:
    base = io.load_spec(args.base)
    if args.algorithm == "alg1":
        result = pipelines.algorithm1(base, perms=args.perms, pair_remainders=not args.pair_targets_only,
                                      audit_trials=args.audit, seed=args.seed)
    else:
        result = pipelines.algorithm2(base, force_space_share=args.force_space_share, perms=args.perms,
                                      seed=args.seed)
    for note in result.notes:
        sys.stderr.write(f"note: {note}\n")
    out = args.out or f"{base.name or 'code'}-{args.algorithm}.spec"
    _write_code(result.final, out)
    if args.manifest:
        Path(args.manifest).write_text(json.dumps(result.manifest(), indent=1) + "\n")
    return 0


def cmd_report(args) -> int:
    code = io.load_code(args.spec)
    spec = _spec_of(code)
    reports = simulate_repair_all(code, args.trials, args.seed)
    _emit(_render(reports, args.format, spec.name))
    if args.figure:
        from .plotting import plot_access, plot_bandwidth
        prefix = Path(args.figure)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        bw, acc = f"{prefix}_bandwidth.png", f"{prefix}_access.png"
        plot_bandwidth(reports, bw, spec.name)
        plot_access(reports, acc, spec.name)
        sys.stderr.write(f"figures: {bw} {acc}\n")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repairforge",
                                     description="Binary MDS codes with optimal repair access.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a base code spec")
    p.add_argument("family", choices=["evenodd", "mdr1", "cauchy"])
    p.add_argument("--p", type=int, default=3, help="EVENODD prime")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--w", type=int, default=4, help="Cauchy field width")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="exhaustive MDS check")
    p.add_argument("spec")
    p.add_argument("--simulate", action="store_true", help="also repair every node")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("encode", help="split a file into shard files")
    p.add_argument("spec")
    p.add_argument("message")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("erase", help="delete one node's shard")
    p.add_argument("dir")
    p.add_argument("--node", type=int, required=True)
    p.set_defaults(func=cmd_erase)

    p = sub.add_parser("decode", help="rebuild the file from any k shards")
    p.add_argument("spec")
    p.add_argument("dir")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("repair", help="rebuild one node and report what it cost")
    p.add_argument("spec")
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--dir", help="shard directory; without it a random codeword is used")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("transform", help="apply one transformation round")
    p.add_argument("spec")
    p.add_argument("--targets", required=True, help="comma separated node ids")
    p.add_argument("--variant", choices=[v.value for v in transform.Variant], default="pair_targets")
    p.add_argument("--perms", choices=["auto", "identity", "cyclic"], default="auto")
    p.add_argument("--N", type=int, help="segment length (default: alpha)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("pipeline", help="run a full multi-round pipeline")
    p.add_argument("algorithm", choices=["alg1", "alg2"])
    p.add_argument("--base", required=True)
    p.add_argument("--perms", choices=["auto", "identity", "cyclic"], default="auto")
    p.add_argument("--pair-targets-only", action="store_true",
                   help="alg1: never use the systematic-preserving variant")
    p.add_argument("--force-space-share", action="store_true", help="alg2: always space-share first")
    p.add_argument("--audit", type=int, default=0, metavar="TRIALS",
                   help="alg1: simulate repairs after every round")
    p.add_argument("--seed", type=int)
    p.add_argument("--manifest", help="write a JSON round manifest here")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="repair every node and tabulate bandwidth and access")
    p.add_argument("spec")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--figure", metavar="PREFIX", help="also write PREFIX_bandwidth.png and PREFIX_access.png")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RepairForgeError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except OSError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 11}
        sys.stderr.write(json.dumps(err) + "\n")
        return 11


if __name__ == "__main__":
    sys.exit(main())
