"""Failure rate vs erasure rate on a seeded [[1600,64]] hypergraph product code.

Writes one CSV per decoder (x, y, error1, error2) plus a JSON sidecar.

    python3 scripts/failure_rates_1600.py --trials 20000 --out results/rates
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from cluster_decoder.css_code import hypergraph_product, regular_ldpc
from cluster_decoder.decoders import DecoderConfig
from cluster_decoder.erasure_sim import SimConfig, dumps_json, run_trials

log = logging.getLogger("rates")


@dataclass(frozen=True)
class RatesConfig:
    code_seed: int = 0
    rates: tuple[float, ...] = (0.20, 0.24, 0.28, 0.30, 0.32, 0.36, 0.40)
    trials: int = 10_000
    seed: int = 1
    threads: int = 0
    bounds: tuple[int | None, ...] = (None, 200, 100, 50, 20, 10)
    out: str = "results/rates"
    decoders: list[DecoderConfig] = field(init=False)

    def __post_init__(self) -> None:
        ds = [DecoderConfig("peeling")] + [DecoderConfig("cluster", c) for c in self.bounds]
        object.__setattr__(self, "decoders", ds)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=RatesConfig.trials)
    ap.add_argument("--seed", type=int, default=RatesConfig.seed)
    ap.add_argument("--threads", type=int, default=RatesConfig.threads)
    ap.add_argument("--out", default=RatesConfig.out)
    args = ap.parse_args()
    cfg = RatesConfig(trials=args.trials, seed=args.seed, threads=args.threads, out=args.out)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    h = regular_ldpc(32, 3, 4, seed=cfg.code_seed)
    code = hypergraph_product(h, h)
    log.info("code %s, fingerprint %s", code, code.fingerprint()[:12])
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for dec in cfg.decoders:
        res = run_trials(code, SimConfig(dec, cfg.rates, cfg.trials, cfg.seed, cfg.threads))
        stem = str(dec).replace("(", "_").replace(")", "").replace("=", "")
        (out / f"{stem}.csv").write_text(res.to_csv())
        meta = {k: v for k, v in asdict(cfg).items() if k != "decoders"}
        (out / f"{stem}.json").write_text(dumps_json({"config": meta, "results": res.to_json()}))
        for r in res.rates:
            log.info("%-16s p=%.2f rate=%.6f [%.6f, %.6f]", dec, r.rate, r.failure_rate, r.ci_low, r.ci_high)


if __name__ == "__main__":
    main()
