"""Counter-based random streams keyed by (seed, stream)."""
from __future__ import annotations

import numpy as np

_U64 = 1 << 64


class RngStream:
    """A Philox generator whose 128-bit key is ``(seed, stream)``.

    Distinct keys give independent sequences and the counter starts at zero,
    so replica ``r`` of an experiment is reproducible on any worker without
    coordination. Not thread-safe: give each worker its own stream.
    """

    def __init__(self, seed: int, stream: int = 0):
        for name, v in (("seed", seed), ("stream", stream)):
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {v!r}")
        self.seed = int(seed)
        self.stream = int(stream)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> RngStream:
        """Fresh stream with the same seed and another stream index."""
        return RngStream(self.seed, stream)

    @property
    def counter(self) -> np.ndarray:
        return self.generator.bit_generator.state["state"]["counter"].copy()

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"
