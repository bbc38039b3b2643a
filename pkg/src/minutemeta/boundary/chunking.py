"""Sliding-window chunking for sequences longer than the encoder limit."""
from __future__ import annotations

from minutemeta.errors import ConfigError


def chunk_with_stride(
    n_tokens: int, max_length: int = 512, stride: int = 128
) -> list[tuple[int, int]]:
    """[start, end) windows over a token sequence.

    Consecutive windows overlap by exactly ``stride`` tokens (the final
    window may be shorter); every token lands in at least one window.
    """
    if stride >= max_length:
        raise ConfigError(f"stride {stride} must be below max_length {max_length}")
    if stride < 0 or max_length <= 0:
        raise ConfigError("max_length must be positive and stride non-negative")
    if n_tokens <= 0:
        return []
    step = max_length - stride
    windows = []
    start = 0
    while True:
        end = min(start + max_length, n_tokens)
        windows.append((start, end))
        if end == n_tokens:
            return windows
        start += step


def window_for_span(
    windows: list[tuple[int, int]], span: tuple[int, int]
) -> int | None:
    """Index of the first window fully containing [span_start, span_end)."""
    for i, (start, end) in enumerate(windows):
        if span[0] >= start and span[1] <= end:
            return i
    return None
