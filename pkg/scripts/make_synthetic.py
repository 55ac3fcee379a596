"""Write an attributed stochastic block model in the .content/.cites layout.

    python scripts/make_synthetic.py --out data/synth --name synth --n 600 --k 4
"""

import argparse
import json
from pathlib import Path

from gaeco.synthetic import attributed_sbm, write_content_cites


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--name", default="synth")
    ap.add_argument("--n", type=int, default=600)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--avg-degree", type=float, default=4.0)
    ap.add_argument("--homophily", type=float, default=0.8)
    ap.add_argument("--features", type=int, default=300)
    ap.add_argument("--words", type=int, default=12, help="active features per node")
    ap.add_argument("--topic-share", type=float, default=0.5,
                    help="fraction of a node's words drawn from its community topic")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    bundle = attributed_sbm(n=args.n, k=args.k, avg_degree=args.avg_degree,
                            homophily=args.homophily, n_features=args.features,
                            words_per_node=args.words, topic_share=args.topic_share,
                            seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_content_cites(bundle, out / f"{args.name}.content", out / f"{args.name}.cites")
    print(json.dumps(bundle.stats()))


if __name__ == "__main__":
    main()
