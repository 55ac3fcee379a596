"""Command line entry point: ``gaeco train | sweep | score``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import nullcontext

from .metrics import score
from .train import TrainConfig, beta_sweep, read_labels, train


def _add_data_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("data")
    g.add_argument("--dataset", default="custom",
                   help="dataset name; cora/citeseer/pubmed also select the default beta")
    g.add_argument("--data-root", help="directory searched for <dataset>.content/.cites")
    g.add_argument("--content", help=".content file (or Pubmed-Diabetes NODE .tab)")
    g.add_argument("--cites", help=".cites file (or Pubmed-Diabetes DIRECTED .tab)")
    g.add_argument("--edges", help="generic format: TSV edge list")
    g.add_argument("--features", help="generic format: CSV features")
    g.add_argument("--labels", help="generic format: one label per line")


def _pos_weight(text: str):
    if text == "balanced":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'balanced', got {text!r}")


def _add_train_args(p: argparse.ArgumentParser):
    d = TrainConfig()
    g = p.add_argument_group("training")
    g.add_argument("--k", type=int, help="cluster count (default: ground-truth count)")
    g.add_argument("--epochs", type=int, default=d.epochs)
    g.add_argument("--warmup", type=int, default=d.warmup_epochs,
                   help="epochs with the clustering loss weighted 0")
    g.add_argument("--refresh-period", type=int, default=d.centroid_refresh_period)
    g.add_argument("--lr", type=float, default=d.lr)
    g.add_argument("--dropout-input", type=float, default=d.dropout_input)
    g.add_argument("--dropout-attention", type=float, default=d.dropout_attention)
    g.add_argument("--heads", type=int, default=d.heads)
    g.add_argument("--hidden", type=int, default=d.hidden)
    g.add_argument("--embed", type=int, default=d.embed)
    g.add_argument("--raw-embeddings", action="store_true",
                   help="skip the unit-norm rescaling of embedding rows")
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("--recon-mode", choices=["auto", "dense", "sampled"], default=d.recon_mode)
    g.add_argument("--neg-per-pos", type=int, default=d.neg_per_pos)
    g.add_argument("--dense-cap", type=int, default=d.dense_cap)
    g.add_argument("--no-recon-diagonal", action="store_true",
                   help="reconstruction target has a zero diagonal")
    g.add_argument("--pos-weight", type=_pos_weight, default=d.pos_weight,
                   help="weight of positive entries in the BCE, or 'balanced'")
    g.add_argument("--recon-reduction", choices=["entry", "node"], default=d.recon_reduction,
                   help="divide the summed BCE by the entry count or by the node count")
    g.add_argument("--no-normalize", action="store_true", help="skip feature row-normalization")
    g.add_argument("--ablation", choices=["with_clust", "no_clust"], default=d.ablation)
    g.add_argument("--clip-norm", type=float)
    g.add_argument("--n-init", type=int, default=d.kmeans_n_init)
    g.add_argument("--eval-every", type=int, default=0,
                   help="log NMI/ARI every N epochs (diagnostic)")
    g.add_argument("--out", required=True, help="output directory")


def _config(args, beta=None) -> TrainConfig:
    return TrainConfig(
        dataset=args.dataset, data_root=args.data_root, content=args.content, cites=args.cites,
        edges=args.edges, features=args.features, labels=args.labels,
        beta=beta, k=args.k, epochs=args.epochs, warmup_epochs=args.warmup,
        centroid_refresh_period=args.refresh_period, lr=args.lr,
        dropout_input=args.dropout_input, dropout_attention=args.dropout_attention,
        heads=args.heads, hidden=args.hidden, embed=args.embed,
        l2_embeddings=not args.raw_embeddings, seed=args.seed,
        recon_mode=args.recon_mode, neg_per_pos=args.neg_per_pos, dense_cap=args.dense_cap,
        recon_diagonal=not args.no_recon_diagonal, pos_weight=args.pos_weight,
        recon_reduction=args.recon_reduction,
        normalize_features=not args.no_normalize, ablation=args.ablation,
        clip_norm=args.clip_norm, kmeans_n_init=args.n_init, eval_every=args.eval_every)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaeco", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model and score its communities")
    _add_data_args(p)
    p.add_argument("--beta", type=float, help="clustering loss weight")
    _add_train_args(p)

    p = sub.add_parser("sweep", help="one training run per beta value")
    _add_data_args(p)
    p.add_argument("--betas", required=True, help="comma separated, e.g. 0.01,0.1,1,10")
    _add_train_args(p)

    p = sub.add_parser("score", help="NMI/ARI between two label files")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    return parser


def _thread_limit():
    n = os.environ.get("GAECO_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        with _thread_limit():
            if args.command == "score":
                out = score(read_labels(args.truth), read_labels(args.pred))
            elif args.command == "train":
                rep = train(_config(args, args.beta), out_dir=args.out)
                out = {"nmi": rep.nmi, "ari": rep.ari, "k": rep.k, "epochs": args.epochs,
                       "wall_time": round(rep.wall_time, 3), "out": args.out}
            else:
                betas = [float(b) for b in args.betas.split(",") if b.strip()]
                out = beta_sweep(_config(args), betas, out_dir=args.out)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"gaeco: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(out, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
