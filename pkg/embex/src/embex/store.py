"""Writer for the embedding store file pair consumed by the optimizer.

Matrix file layout: 8-byte magic ``EMBSTOR1``, uint32-LE row count N,
uint32-LE dimension m, then N*m float32-LE values in row-major order.
Index file: one variant word per line, row order matching the matrix.
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMBSTOR1"


def write_store(words, matrix, index_path, matrix_path) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
    if len(words) != matrix.shape[0]:
        raise ValueError(
            f"{len(words)} words but {matrix.shape[0]} matrix rows"
        )
    if len(set(words)) != len(words):
        raise ValueError("duplicate variant words")
    n, m = matrix.shape
    Path(index_path).write_text("".join(w + "\n" for w in words))
    with open(matrix_path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", n, m))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())
