"""Compact transformer encoder with start/end span heads, trained from
scratch (no pretrained hub is reachable in this environment)."""

from __future__ import annotations

import torch
from torch import nn


class SpanExtractor(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        dim: int = 128,
        heads: int = 4,
        layers: int = 2,
        ffn_dim: int = 256,
        max_len: int = 512,
        dropout: float = 0.1,
        pad_id: int = 0,
    ):
        super().__init__()
        self.pad_id = pad_id
        self.max_len = max_len
        self.token_embedding = nn.Embedding(vocab_size, dim, padding_idx=pad_id)
        self.position_embedding = nn.Embedding(max_len, dim)
        # aligned question-overlap input feature (extractive-QA staple)
        self.overlap_embedding = nn.Embedding(2, dim)
        # segments: 0 = question+context, 1 = instruction block
        self.segment_embedding = nn.Embedding(2, dim)
        encoder_layer = nn.TransformerEncoderLayer(
            d_model=dim,
            nhead=heads,
            dim_feedforward=ffn_dim,
            dropout=dropout,
            batch_first=True,
            norm_first=True,  # pre-norm: stable from-scratch training at this scale
        )
        self.encoder = nn.TransformerEncoder(
            encoder_layer, num_layers=layers, norm=nn.LayerNorm(dim), enable_nested_tensor=False
        )
        self.span_head = nn.Linear(dim, 2)

    def forward(
        self,
        ids: torch.Tensor,
        mask: torch.Tensor,
        overlap: torch.Tensor | None = None,
        segment: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """ids [B,T] long; mask/overlap/segment [B,T] bool. Returns start
        and end logits [B,T] with padding masked to -inf."""
        positions = torch.arange(ids.size(1), device=ids.device).unsqueeze(0)
        x = self.token_embedding(ids) + self.position_embedding(positions)
        if overlap is not None:
            x = x + self.overlap_embedding(overlap.long())
        if segment is not None:
            x = x + self.segment_embedding(segment.long())
        x = self.encoder(x, src_key_padding_mask=~mask)
        start_logits, end_logits = self.span_head(x).unbind(-1)
        neg = torch.finfo(start_logits.dtype).min
        start_logits = start_logits.masked_fill(~mask, neg)
        end_logits = end_logits.masked_fill(~mask, neg)
        return start_logits, end_logits


def best_spans(
    start_logits: torch.Tensor,
    end_logits: torch.Tensor,
    context_start: torch.Tensor,
    context_end: torch.Tensor,
    max_span_len: int = 8,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Highest-scoring (start, end) pair per row with start <= end <
    start + max_span_len, both inside the row's context region."""
    batch, seq_len = start_logits.shape
    positions = torch.arange(seq_len, device=start_logits.device)
    in_context = (positions.unsqueeze(0) >= context_start.unsqueeze(1)) & (
        positions.unsqueeze(0) < context_end.unsqueeze(1)
    )
    neg = torch.finfo(start_logits.dtype).min
    start = start_logits.masked_fill(~in_context, neg)
    end = end_logits.masked_fill(~in_context, neg)
    scores = start.unsqueeze(2) + end.unsqueeze(1)  # [B, T_start, T_end]
    band = (positions.unsqueeze(0) >= positions.unsqueeze(1)) & (
        positions.unsqueeze(0) < positions.unsqueeze(1) + max_span_len
    )
    scores = scores.masked_fill(~band.unsqueeze(0), neg)
    flat = scores.view(batch, -1).argmax(dim=1)
    return flat // seq_len, flat % seq_len
