"""Gaussian elimination vs unbounded cluster decoding on the [[13,1]] code.

Both decoders return a solution whenever one exists, so their failure
rates should agree up to sampling noise.

    python3 scripts/ml_equivalence_13.py --trials 100000
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from cluster_decoder.css_code import hypergraph_product, repetition_code
from cluster_decoder.decoders import DecoderConfig
from cluster_decoder.erasure_sim import SimConfig, run_trials


@dataclass(frozen=True)
class MlConfig:
    rates: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    trials: int = 100_000
    seed: int = 7
    threads: int = 0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=MlConfig.trials)
    ap.add_argument("--threads", type=int, default=MlConfig.threads)
    args = ap.parse_args()
    cfg = MlConfig(trials=args.trials, threads=args.threads)

    code = hypergraph_product(repetition_code(3), repetition_code(3))
    runs = {
        kind: run_trials(code, SimConfig(DecoderConfig(kind), cfg.rates, cfg.trials, cfg.seed, cfg.threads))
        for kind in ("gaussian", "cluster", "peeling")
    }
    print("p      gaussian             cluster(inf)         peeling    overlap")
    for i, p in enumerate(cfg.rates):
        g, c, pe = (runs[k].rates[i] for k in ("gaussian", "cluster", "peeling"))
        overlap = g.ci_low <= c.ci_high and c.ci_low <= g.ci_high
        print(f"{p:.2f}   {g.failure_rate:.5f} ±{g.ci_high - g.failure_rate:.5f}   "
              f"{c.failure_rate:.5f} ±{c.ci_high - c.failure_rate:.5f}   {pe.failure_rate:.5f}    {overlap}")


if __name__ == "__main__":
    main()
