"""Sweep the clustering-loss weight for a few seeds; writes one sweep directory per seed.

    python scripts/beta_sweep.py --dataset pubmed --data-root data --out runs/sweep
"""

import argparse
import json
from dataclasses import replace
from pathlib import Path

from gaeco.ingest import load_dataset
from gaeco.train import TrainConfig, beta_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", required=True)
    ap.add_argument("--data-root", required=True)
    ap.add_argument("--betas", default="0,0.01,0.1,1,10")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    bundle = load_dataset(args.dataset, args.data_root)
    betas = [float(b) for b in args.betas.split(",")]
    cfg = TrainConfig(dataset=args.dataset, epochs=args.epochs)
    for seed in args.seeds:
        rows = beta_sweep(replace(cfg, seed=seed), betas, bundle, Path(args.out) / f"seed{seed}")
        for row in rows:
            print(json.dumps({"seed": seed, **row}), flush=True)


if __name__ == "__main__":
    main()
