"""With and without the clustering loss over several seeds on one dataset.

Prints one JSON line per run and a median summary. Example:

    python scripts/ablation.py --dataset cora --data-root data --seeds 0 1 2
"""

import argparse
import json
from dataclasses import replace

import numpy as np

from gaeco.ingest import load_dataset
from gaeco.train import TrainConfig, train


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", required=True)
    ap.add_argument("--data-root", required=True)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    ap.add_argument("--beta", type=float, help="default: per-dataset value")
    ap.add_argument("--pos-weight", default=None, help="number or 'balanced'")
    ap.add_argument("--recon-reduction", choices=["entry", "node"])
    args = ap.parse_args()

    bundle = load_dataset(args.dataset, args.data_root)
    base = TrainConfig(dataset=args.dataset, epochs=args.epochs, beta=args.beta)
    if args.pos_weight is not None:
        pw = args.pos_weight
        base = replace(base, pos_weight=pw if pw == "balanced" else float(pw))
    if args.recon_reduction:
        base = replace(base, recon_reduction=args.recon_reduction)

    summary = {}
    for ablation in ("with_clust", "no_clust"):
        scores = []
        for seed in args.seeds:
            rep = train(replace(base, seed=seed, ablation=ablation), bundle)
            scores.append((rep.nmi, rep.ari))
            print(json.dumps({"ablation": ablation, "seed": seed, "nmi": rep.nmi,
                              "ari": rep.ari, "seconds": round(rep.wall_time, 1)}), flush=True)
        arr = np.array(scores)
        summary[ablation] = {"median_nmi": float(np.median(arr[:, 0])),
                             "median_ari": float(np.median(arr[:, 1]))}
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
