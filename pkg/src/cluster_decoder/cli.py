"""Command-line interface: ``cluster-decoder {hgp,simulate,decode,stats,replay}``."""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .cluster_decomp import InconsistentSyndrome, build_cluster_forest, dump_forest
from .css_code import (
    AlistError,
    CssCode,
    code_violation,
    hypergraph_product,
    load_alist,
    load_code,
    regular_ldpc,
    repetition_code,
    save_code,
)
from .decoders import DECODERS, DecoderConfig, ErasureDecoder
from .erasure_sim import SimConfig, cluster_stats, dumps_json, run_trials, stats_to_csv
from .gf2_linalg import BitVector

log = logging.getLogger("cluster_decoder")

EXIT_INCONSISTENT = 3


def _rates(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from None
    if not vals or any(not 0 <= p <= 1 for p in vals):
        raise argparse.ArgumentTypeError("rates must be a nonempty comma list in [0, 1]")
    return vals


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _bound(text: str) -> int | None:
    if text.lower() in ("inf", "infinity", "none"):
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'inf', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("cluster size bound must be >= 0")
    return value


_UNSET = object()


def _decoder_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> DecoderConfig:
    bound = args.max_cluster_size
    if args.decoder == "cluster":
        if bound is _UNSET:
            parser.error("--decoder cluster needs --max-cluster-size (an integer or 'inf')")
        return DecoderConfig("cluster", bound)
    if bound is not _UNSET:
        parser.error("--max-cluster-size only applies to --decoder cluster")
    return DecoderConfig(args.decoder)


def _manifest(argv: list[str], config: dict, seed: int | None, code: CssCode, started: str) -> dict:
    return {
        "command": argv,
        "command_line": shlex.join(["cluster-decoder", *argv]),
        "config": config,
        "master_seed": seed,
        "code_fingerprint": code.fingerprint(),
        "code": {"name": code.name, "n": code.n, "k": code.k},
        "tool_version": __version__,
        "started": started,
        "finished": _now(),
    }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load_code_or_exit(parser: argparse.ArgumentParser, location: str) -> CssCode:
    try:
        code = load_code(location)
    except FileNotFoundError as e:
        parser.exit(1, f"error: {e}\n")
    except AlistError as e:
        parser.exit(1, f"error: parse error: {e}\n")
    problem = code_violation(code)
    if problem is not None:
        parser.exit(1, f"error: code at {location} is invalid: {problem}\n")
    return code


# --- commands -----------------------------------------------------------------


def cmd_hgp(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> int:
    try:
        if args.alist:
            ha = load_alist(args.alist)
            hb = load_alist(args.alist_b) if args.alist_b else ha
        elif args.repetition:
            ha = hb = repetition_code(args.repetition)
        elif args.regular:
            n0, dv, dc = args.regular
            ha = hb = regular_ldpc(n0, dv, dc, args.code_seed)
        else:
            parser.error("give one of --alist, --repetition or --regular")
    except FileNotFoundError as e:
        parser.exit(1, f"error: {e}\n")
    except AlistError as e:
        parser.exit(1, f"error: parse error: {e}\n")
    except ValueError as e:
        parser.exit(1, f"error: {e}\n")
    code = hypergraph_product(ha, hb, name=args.name or "")
    if code.k <= 0:
        log.warning("code has k = %d logical qubits", code.k)
    save_code(code, args.out, name=args.name or f"hgp_{code.n}_{code.k}")
    print(code)
    return 0


def cmd_simulate(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> int:
    started = _now()
    decoder = _decoder_config(parser, args)
    code = _load_code_or_exit(parser, args.code)
    cfg = SimConfig(decoder, args.rates, args.trials, args.seed, args.threads)
    result = run_trials(code, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(result.to_csv())
    config = {
        "command": "simulate",
        "code": str(Path(args.code).resolve()),
        "decoder": decoder.kind,
        "max_cluster_size": decoder.max_cluster_size,
        "rates": list(args.rates),
        "trials": args.trials,
        "threads": args.threads,
    }
    sidecar = {"manifest": _manifest(argv, config, args.seed, code, started), "results": result.to_json()}
    out.with_suffix(".json").write_text(dumps_json(sidecar))
    for r in result.rates:
        print(f"p={r.rate:.4f} failures={r.failures}/{r.trials} rate={r.failure_rate:.6f} "
              f"ci=[{r.ci_low:.6f},{r.ci_high:.6f}]")
    return 0


def cmd_stats(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> int:
    started = _now()
    code = _load_code_or_exit(parser, args.code)
    thresholds = args.thresholds
    stats = cluster_stats(code, args.rates, args.trials, thresholds, args.seed, args.threads)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(stats_to_csv(stats, thresholds))
    config = {
        "command": "stats",
        "code": str(Path(args.code).resolve()),
        "rates": list(args.rates),
        "trials": args.trials,
        "thresholds": list(thresholds),
        "threads": args.threads,
    }
    sidecar = {"manifest": _manifest(argv, config, args.seed, code, started)}
    out.with_suffix(".json").write_text(dumps_json(sidecar))
    for st in stats:
        exceed = " ".join(f">{t}:{st.exceed_fraction[t]:.4f}" for t in thresholds)
        print(f"p={st.rate:.4f} not_peelable={st.not_peelable_fraction:.4f} {exceed}")
    return 0


def _read_vectors(parser: argparse.ArgumentParser, path: str, length: int, what: str) -> list[BitVector]:
    p = Path(path)
    if not p.is_file():
        parser.exit(1, f"error: no such {what} file: {path}\n")
    vectors = []
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            v = BitVector.from_string(line)
        except ValueError as e:
            parser.exit(1, f"error: {path}:{lineno}: {e}\n")
        if v.length != length:
            parser.exit(1, f"error: {path}:{lineno}: expected {length} bits, got {v.length}\n")
        vectors.append(v)
    return vectors


def cmd_decode(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> int:
    decoder_cfg = _decoder_config(parser, args)
    code = _load_code_or_exit(parser, args.code)
    erasures = _read_vectors(parser, args.erasure, code.n, "erasure")
    syndromes = _read_vectors(parser, args.syndrome, code.h1.rows, "syndrome")
    if len(erasures) != len(syndromes):
        parser.exit(1, f"error: {len(erasures)} erasures but {len(syndromes)} syndromes\n")
    decoder = ErasureDecoder(code.h1, decoder_cfg)
    lines = []
    for i, (eps, s) in enumerate(zip(erasures, syndromes)):
        try:
            res = decoder.decode(s, eps)
            if args.dump_forest:
                _, residual = decoder.peel(s, eps)
                if not residual.is_empty():
                    dump_forest(build_cluster_forest(residual, decoder.graph), sys.stdout)
        except InconsistentSyndrome as e:
            print(f"error: vector {i}: inconsistent syndrome: {e}", file=sys.stderr)
            return EXIT_INCONSISTENT
        sizes = ",".join(str(x) for x in res.cluster_sizes) or "-"
        status = "found" if res.found else ("oversize" if res.oversize else "no_solution")
        print(f"vector {i}: {status} peelable={str(res.peelable).lower()} "
              f"cluster_sizes={sizes} max_cluster_size={res.max_cluster_size}")
        lines.append(res.x_hat.to_string() if res.x_hat is not None else "none")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replay(parser: argparse.ArgumentParser, args: argparse.Namespace, argv: list[str]) -> int:
    meta = json.loads(Path(args.manifest).read_text())["manifest"]
    old = list(meta["command"])
    if "--out" not in old:
        parser.exit(1, "error: manifest command has no --out\n")
    i = old.index("--out")
    old[i + 1] = args.out
    return main(old)


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cluster-decoder", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hgp", help="build a hypergraph product code")
    h.add_argument("--alist", help="classical parity-check matrix (alist)")
    h.add_argument("--alist-b", help="second classical matrix; defaults to --alist")
    h.add_argument("--repetition", type=int, metavar="L", help="use the length-L repetition code")
    h.add_argument("--regular", type=int, nargs=3, metavar=("N0", "COL_DEG", "ROW_DEG"),
                   help="use a seeded random biregular LDPC code")
    h.add_argument("--code-seed", type=int, default=0, help="seed for --regular")
    h.add_argument("--name")
    h.add_argument("--out", required=True, help="output directory")
    h.set_defaults(func=cmd_hgp)

    def common(sp: argparse.ArgumentParser, decoder: bool) -> None:
        sp.add_argument("--code", required=True, help="code directory or manifest.json")
        if decoder:
            sp.add_argument("--decoder", required=True, choices=DECODERS)
            sp.add_argument("--max-cluster-size", type=_bound, default=_UNSET,
                            help="cluster size bound C, or 'inf'")

    s = sub.add_parser("simulate", help="Monte Carlo failure rates")
    common(s, decoder=True)
    s.add_argument("--rates", type=_rates, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1, help="worker processes; 0 = all cores")
    s.add_argument("--out", required=True, help="CSV path; a .json sidecar is written next to it")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("decode", help="decode erasure/syndrome vectors from files")
    common(d, decoder=True)
    d.add_argument("--erasure", required=True, help="bit strings, one per line")
    d.add_argument("--syndrome", required=True, help="bit strings, one per line")
    d.add_argument("--out", help="write estimates here instead of stdout")
    d.add_argument("--dump-forest", action="store_true", help="print the cluster forest")
    d.set_defaults(func=cmd_decode)

    st = sub.add_parser("stats", help="cluster size statistics")
    common(st, decoder=False)
    st.add_argument("--rates", type=_rates, required=True)
    st.add_argument("--trials", type=int, required=True)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--thresholds", type=_ints, default=(10, 20, 50, 100, 200))
    st.add_argument("--threads", type=int, default=1)
    st.add_argument("--out", required=True)
    st.set_defaults(func=cmd_stats)

    r = sub.add_parser("replay", help="rerun the command recorded in a JSON sidecar")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    if getattr(args, "threads", 0) < 0:
        parser.error("--threads must be >= 0")
    return args.func(parser, args, argv)


if __name__ == "__main__":
    sys.exit(main())
