"""Autoencoder probe: is the data simple enough for a plain feedforward network?"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from .dataset import Dataset
from .network import (
    AutoencoderSpec,
    TrainConfig,
    TrainingError,
    build_autoencoder,
    build_autoencoder_spec,
    train,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "MAX_ATTEMPTS",
    "AUTOENCODER_TRAINING",
    "HeuristicVerdict",
    "default_bottleneck",
    "complexity_check",
]

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1000.0
MAX_ATTEMPTS = 3
AUTOENCODER_TRAINING = TrainConfig(
    epochs=100, learning_rate=0.001, batch_size=128, loss="mse", clip_norm=100.0
)


@dataclass(frozen=True)
class HeuristicVerdict:
    attempt_losses: tuple[float, ...]
    min_loss: float
    threshold: float
    recommended: bool
    spec: AutoencoderSpec | None = None


def default_bottleneck(n_features: int) -> int:
    return 128 if n_features > 512 else 32


def complexity_check(
    d: Dataset,
    bottleneck: int | None = None,
    cfg: TrainConfig = AUTOENCODER_TRAINING,
    threshold: float = DEFAULT_THRESHOLD,
    attempts: int = MAX_ATTEMPTS,
) -> HeuristicVerdict:
    """Train the powers-of-two autoencoder on raw features, up to ``attempts`` times.

    Attempt ``i`` seeds both initialisation and batch order with
    ``cfg.seed + i``. A diverged attempt scores ``inf``. Stops at the first
    attempt whose final reconstruction loss is under ``threshold``.
    """
    if not 1 <= attempts <= MAX_ATTEMPTS:
        raise ValueError(f"attempts must be between 1 and {MAX_ATTEMPTS}")
    if bottleneck is None:
        bottleneck = default_bottleneck(d.n_features)
    if bottleneck < 1:
        raise ValueError("bottleneck must be positive")
    spec = build_autoencoder_spec(d.n_features, bottleneck)
    cfg = replace(cfg, loss="mse")

    losses = []
    for i in range(attempts):
        seed = cfg.seed + i
        net = build_autoencoder(spec, seed=seed)
        try:
            _, history = train(net, d, replace(cfg, seed=seed))
            final = history[-1]
        except TrainingError as err:
            log.warning("autoencoder attempt %d diverged: %s", i + 1, err)
            final = math.inf
        losses.append(final)
        if final < threshold:
            break
    best = min(losses)
    return HeuristicVerdict(tuple(losses), best, threshold, best < threshold, spec)
