"""Versioned historical-embedding store with a hard bounded-staleness contract.

Double buffered: writers stage entries for the *next* super-batch while
readers only see entries promoted at the last super-batch boundary. That
makes the accessibility window structural; the version-gap bound
``reading_batch - version <= 2n - 1`` is additionally asserted on every hit.
"""

from __future__ import annotations

import threading

import numpy as np


class StalenessViolation(RuntimeError):
    """A reuse event exceeded the 2n-1 version gap. Should never happen."""


class StoreContractError(ValueError):
    """Misuse of the staging protocol (wrong target super-batch, bad window)."""


class EmbeddingStore:
    """Historical embeddings keyed by vertex, one staged set per super-batch.

    One writer role and one reader role may run concurrently with a
    coordinator calling :meth:`advance_super_batch` between super-batches.
    """

    def __init__(self, n: int, emb_dim: int):
        if n < 1:
            raise StoreContractError(f"super-batch size must be >= 1, got {n}")
        self.n = n
        self.emb_dim = emb_dim
        self.current_super_batch = 0
        self._window_start = 0  # first batch of the current super-batch
        self._window_len = n
        self._current: dict[int, tuple[np.ndarray, int]] = {}
        self._staging: dict[int, tuple[np.ndarray, int]] = {}
        self._lock = threading.RLock()
        self.hits = 0
        self.misses = 0
        self.puts = 0
        self.max_observed_gap = 0
        self.max_gap_batch = -1
        self.max_gap_super_batch = -1

    @property
    def gap_bound(self) -> int:
        return 2 * self.n - 1

    def put(self, v: int, emb: np.ndarray, version: int,
            target_super_batch: int) -> None:
        """Stage an embedding computed at parameter ``version`` for the next
        super-batch. Staging for any other target is a contract violation."""
        with self._lock:
            if target_super_batch != self.current_super_batch + 1:
                raise StoreContractError(
                    f"put targets super-batch {target_super_batch} but only "
                    f"{self.current_super_batch + 1} is stageable"
                )
            self._staging[int(v)] = (np.array(emb, dtype=np.float64,
                                              copy=True), int(version))
            self.puts += 1

    def get(self, v: int, reading_batch: int):
        """Return the embedding staged for the current super-batch, or None.

        Every hit is checked against the 2n-1 gap bound; a violating hit is
        an internal contract failure, not a recoverable miss.
        """
        with self._lock:
            if not (self._window_start <= reading_batch
                    < self._window_start + self._window_len):
                raise StoreContractError(
                    f"read at batch {reading_batch} outside current "
                    f"super-batch window [{self._window_start}, "
                    f"{self._window_start + self._window_len})"
                )
            entry = self._current.get(int(v))
            if entry is None:
                self.misses += 1
                return None
            emb, version = entry
            gap = reading_batch - version
            if gap > self.gap_bound:
                raise StalenessViolation(
                    f"vertex {v}: version gap {gap} exceeds bound "
                    f"{self.gap_bound} (read batch {reading_batch}, "
                    f"embedding version {version})"
                )
            self.hits += 1
            if gap > self.max_observed_gap:
                self.max_observed_gap = gap
                self.max_gap_batch = reading_batch
                self.max_gap_super_batch = self.current_super_batch
            return emb

    def advance_super_batch(self, window_start: int | None = None,
                            window_len: int | None = None) -> None:
        """Promote the staged set; entries staged two super-batches ago die.

        ``window_start`` is the first batch of the new super-batch (defaults
        to the end of the previous window) and ``window_len`` its batch count.
        """
        with self._lock:
            self._current = self._staging
            self._staging = {}
            self.current_super_batch += 1
            if window_start is None:
                window_start = self._window_start + self._window_len
            self._window_start = int(window_start)
            self._window_len = int(window_len) if window_len else self.n
            if self._window_len < 1 or self._window_len > self.n:
                raise StoreContractError(
                    f"super-batch window length {self._window_len} outside [1, {self.n}]"
                )

    def reset_epoch(self, window_start: int) -> None:
        """Drop all entries at an epoch boundary (no cross-epoch persistence).

        The super-batch counter restarts with the new epoch's groups.
        """
        with self._lock:
            self._current = {}
            self._staging = {}
            self.current_super_batch = 0
            self._window_start = int(window_start)
            self._window_len = self.n

    def staged_count(self) -> int:
        with self._lock:
            return len(self._staging)

    def live_entries(self) -> int:
        with self._lock:
            return len(self._current) + len(self._staging)

    def memory_bytes(self) -> int:
        """Accounting view: live entries x emb_dim x 8 bytes."""
        return self.live_entries() * self.emb_dim * 8

    def contains_current(self, v: int) -> bool:
        with self._lock:
            return int(v) in self._current
