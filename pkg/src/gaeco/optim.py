"""Adam with bias correction over a fixed list of tensors."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


class Adam:
    def __init__(self, params: list[Tensor], lr: float = 0.005, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, clip_norm: float | None = None):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self, grads: list[np.ndarray | None] | None = None) -> None:
        """Apply one update in place. ``grads`` defaults to each tensor's ``.grad``;
        a missing gradient counts as zero."""
        if grads is None:
            grads = [p.grad for p in self.params]
        if len(grads) != len(self.params):
            raise ValueError(f"{len(grads)} gradients for {len(self.params)} parameters")
        gs = []
        for p, g in zip(self.params, grads):
            if g is None:
                g = np.zeros_like(p.data)
            if g.shape != p.data.shape:
                raise ValueError(f"gradient shape {g.shape} does not match {p.name or 'parameter'} "
                                 f"{p.data.shape}")
            if not np.isfinite(g).all():
                raise FloatingPointError(f"non-finite gradient for {p.name or 'parameter'}")
            gs.append(g)
        if self.clip_norm is not None:
            norm = np.sqrt(sum(float((g * g).sum()) for g in gs))
            if norm > self.clip_norm:
                gs = [g * (self.clip_norm / norm) for g in gs]

        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, gs, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
