"""Graph attention autoencoder with a k-means loss for community detection."""

from .graph import FeatureMatrix, Graph, Partition, build_graph, dense_adjacency, neighbors
from .metrics import ari, nmi
from .train import RunReport, TrainConfig, beta_sweep, train

__all__ = [
    "FeatureMatrix", "Graph", "Partition", "build_graph", "dense_adjacency", "neighbors",
    "ari", "nmi", "RunReport", "TrainConfig", "beta_sweep", "train",
]
__version__ = "0.1.0"
