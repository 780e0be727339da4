"""Counter-based Gaussian increments.

Steps are grouped in blocks of ``STEPS_PER_BLOCK`` and paths in chunks of
``PATHS_PER_CHUNK``. The draws for block ``k // STEPS_PER_BLOCK`` and chunk
``i // PATHS_PER_CHUNK`` come from one Philox stream keyed by (seed, block)
whose counter starts at the chunk number, laid out as an array of shape
(path, step, component). Every increment is therefore a pure function of
(seed, path, step, component) and does not depend on which other paths are
simulated or in which order.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ArgumentError

_UINT64 = 2**64

STEPS_PER_BLOCK = 16
PATHS_PER_CHUNK = 1024


def _key(seed: int, block: int) -> np.ndarray:
    if not 0 <= int(seed) < _UINT64:
        raise ArgumentError("Semente deve ser um inteiro de 64 bits sem sinal.")
    return np.array([int(seed), int(block)], dtype=np.uint64)


def gaussian_chunk(seed: int, block: int, chunk: int, dim: int = 1) -> np.ndarray:
    """Normals for one chunk of paths over one block of steps, shape (paths, steps, dim)."""
    # chunk sits in the third counter word; draws only advance the first two
    bit_generator = np.random.Philox(
        counter=np.array([0, 0, int(chunk), 0], dtype=np.uint64), key=_key(seed, block)
    )
    return np.random.Generator(bit_generator).standard_normal(
        (PATHS_PER_CHUNK, STEPS_PER_BLOCK, dim)
    )


class GaussianStream:
    """Increments for a run, drawn one block of steps at a time.

    The chunks of the current block are kept until the step leaves it, so a
    simulation loop pays for a generator once per chunk and block.
    """

    def __init__(self, seed: int, dim: int = 1):
        _key(seed, 0)
        if dim < 1:
            raise ArgumentError("Dimensao deve ser >= 1.")
        self.seed = int(seed)
        self.dim = int(dim)
        self._block: int | None = None
        self._draws = np.empty((0, STEPS_PER_BLOCK, self.dim))
        self._covered = np.zeros(0, dtype=bool)

    def _cover(self, block: int, chunks: np.ndarray) -> None:
        if block != self._block:
            self._block = block
            self._covered[:] = False
        n_chunks = int(chunks.max()) + 1
        if n_chunks > self._covered.size:
            draws = np.empty((n_chunks * PATHS_PER_CHUNK, STEPS_PER_BLOCK, self.dim))
            draws[: self._draws.shape[0]] = self._draws
            covered = np.zeros(n_chunks, dtype=bool)
            covered[: self._covered.size] = self._covered
            self._draws, self._covered = draws, covered
        missing = np.unique(chunks[~self._covered[chunks]])
        for chunk in missing:
            start = int(chunk) * PATHS_PER_CHUNK
            self._draws[start : start + PATHS_PER_CHUNK] = gaussian_chunk(
                self.seed, block, int(chunk), self.dim
            )
        self._covered[missing] = True

    def increments(self, step: int, path_indices: np.ndarray) -> np.ndarray:
        """Standard normal draws of shape (len(path_indices), dim) for one step."""
        path_indices = np.asarray(path_indices, dtype=np.int64)
        if path_indices.size == 0:
            return np.empty((0, self.dim))
        if np.any(path_indices < 0):
            raise ArgumentError("Indices de trajetoria devem ser nao negativos.")
        block, offset = divmod(int(step), STEPS_PER_BLOCK)
        self._cover(block, path_indices // PATHS_PER_CHUNK)
        return self._draws[path_indices, offset]


def gaussian_increments(
    seed: int, step: int, path_indices: np.ndarray, dim: int = 1
) -> np.ndarray:
    """Standard normal draws of shape (len(path_indices), dim)."""
    return GaussianStream(seed, dim).increments(step, path_indices)
