"""Bidirectional GRU regressor: a coefficient window in, (arousal, valence) out."""

from __future__ import annotations

import torch
from torch import nn


class GruRegressor(nn.Module):
    """Two stacked bidirectional GRU layers followed by a linear head.

    The head reads the final hidden state of both directions of the top
    layer (2 * hidden features).
    """

    def __init__(self, input_dim: int = 50, hidden: int = 128, layers: int = 2, dropout: float = 0.5):
        super().__init__()
        self.gru = nn.GRU(
            input_size=input_dim,
            hidden_size=hidden,
            num_layers=layers,
            batch_first=True,
            bidirectional=True,
            dropout=dropout if layers > 1 else 0.0,
        )
        self.head = nn.Linear(2 * hidden, 2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, T, input_dim) -> (B, 2)
        _, h = self.gru(x)
        fwd, bwd = h[-2], h[-1]  # top layer, both directions
        return self.head(torch.cat([fwd, bwd], dim=1))
