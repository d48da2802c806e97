"""Maximum cluster size census on the seeded [[1600,64]] code.

    python3 scripts/cluster_census_1600.py --trials 5000 --out results/census.csv
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cluster_decoder.css_code import hypergraph_product, regular_ldpc
from cluster_decoder.erasure_sim import cluster_stats, stats_to_csv


@dataclass(frozen=True)
class CensusConfig:
    code_seed: int = 0
    rates: tuple[float, ...] = tuple(np.round(np.arange(0.30, 0.501, 0.02), 2))
    thresholds: tuple[int, ...] = (10, 20, 50, 100, 200)
    trials: int = 5000
    seed: int = 1
    threads: int = 0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=CensusConfig.trials)
    ap.add_argument("--threads", type=int, default=CensusConfig.threads)
    ap.add_argument("--out", default="results/census.csv")
    args = ap.parse_args()
    cfg = CensusConfig(trials=args.trials, threads=args.threads)

    h = regular_ldpc(32, 3, 4, seed=cfg.code_seed)
    code = hypergraph_product(h, h)
    stats = cluster_stats(code, cfg.rates, cfg.trials, cfg.thresholds, cfg.seed, cfg.threads)
    text = stats_to_csv(stats, cfg.thresholds)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(text)
    print(text, end="")


if __name__ == "__main__":
    main()
