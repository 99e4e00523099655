"""
Word vector loading and the Euclidean ground cost between words
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.distance import cdist

from readability_wmd.errors import EmbeddingFormatError, TokenIndexError
from readability_wmd.utils import PathLike

if TYPE_CHECKING:
    from readability_wmd.domain_types import NBowVector

logger = logging.getLogger(__name__)


class EmbeddingTable(BaseModel):
    """Token to dense vector map; rows are the word positions of the ground space"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., gt=0, description="Vector dimensionality")
    vocab: Dict[str, int] = Field(..., description="Token to row index")
    vectors: np.ndarray = Field(..., description="float64 matrix, one row per token")

    @model_validator(mode="after")
    def _check_matrix(self) -> "EmbeddingTable":
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.dim:
            raise ValueError(f"vectors must have shape (n, {self.dim}), got {self.vectors.shape}")
        if len(self.vocab) != self.vectors.shape[0]:
            raise ValueError("vocabulary size differs from row count")
        if any(not 0 <= index < self.vectors.shape[0] for index in self.vocab.values()):
            raise ValueError("vocabulary index out of range")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors contain non-finite values")
        self.vectors.setflags(write=False)
        return self

    @classmethod
    def from_vectors(
        cls, tokens: Sequence[str], vectors: Sequence[Sequence[float]], normalize: bool = False
    ) -> "EmbeddingTable":
        """
        Build a table from parallel token and vector lists

        Args:
            tokens (Sequence[str]): Unique tokens, row order
            vectors (Sequence[Sequence[float]]): One vector per token
            normalize (bool): Scale every row to unit length

        Returns:
            EmbeddingTable: Immutable table
        """
        matrix = np.array(vectors, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise ValueError("need at least one vector")
        if normalize:
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            matrix = np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)
        vocab = {token: index for index, token in enumerate(tokens)}
        if len(vocab) != len(tokens):
            raise ValueError("duplicate tokens")
        return cls(dim=matrix.shape[1], vocab=vocab, vectors=matrix)

    @property
    def tokens(self) -> List[str]:
        ordered = [""] * len(self.vocab)
        for token, index in self.vocab.items():
            ordered[index] = token
        return ordered

    def __len__(self) -> int:
        return len(self.vocab)


def load_vec(
    path: PathLike, max_vocab: Optional[int] = None, normalize: bool = False
) -> EmbeddingTable:
    """
    Load a fastText text `.vec` file

    Args:
        path (PathLike): File starting with a "<count> <dim>" header
        max_vocab (Optional[int]): Keep only the first `max_vocab` distinct tokens
        normalize (bool): Scale rows to unit length after loading

    Returns:
        EmbeddingTable: Rows in file order, first occurrence wins on duplicates

    Raises:
        EmbeddingFormatError: malformed header, wrong row arity, non-finite value
    """
    if max_vocab is not None and max_vocab < 1:
        raise EmbeddingFormatError(f"max_vocab must be positive, got {max_vocab}")

    tokens: List[str] = []
    rows: List[List[float]] = []
    seen = set()
    duplicates = 0
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError("header must be '<count> <dim>'", 1)
        try:
            declared, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise EmbeddingFormatError("header must hold two integers", 1) from exc
        if declared < 0 or dim < 1:
            raise EmbeddingFormatError(f"invalid header counts {declared} {dim}", 1)

        for line_no, line in enumerate(handle, start=2):
            if max_vocab is not None and len(tokens) >= max_vocab:
                break
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise EmbeddingFormatError(
                    f"token {token!r} has {len(values)} values, expected {dim}", line_no
                )
            try:
                vector = [float(v) for v in values]
            except ValueError as exc:
                raise EmbeddingFormatError(f"non-numeric value for {token!r}", line_no) from exc
            if not all(math.isfinite(v) for v in vector):
                raise EmbeddingFormatError(f"non-finite value for {token!r}", line_no)
            if token in seen:
                duplicates += 1
                continue
            seen.add(token)
            tokens.append(token)
            rows.append(vector)

    if not tokens:
        raise EmbeddingFormatError(f"no vectors in {path}")
    if max_vocab is None and len(tokens) + duplicates != declared:
        logger.warning(f"{path}: header declares {declared} rows, found {len(tokens) + duplicates}")
    if duplicates:
        logger.warning(f"{path}: skipped {duplicates} duplicate tokens")
    logger.info(f"Loaded {len(tokens)} vectors of dimension {dim} from {path}")
    return EmbeddingTable.from_vectors(tokens, rows, normalize=normalize)


def save_vec(table: EmbeddingTable, path: PathLike) -> None:
    """Write a table in `.vec` text format with full float64 precision"""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(table)} {table.dim}\n")
        for token, row in zip(table.tokens, table.vectors):
            handle.write(token + " " + " ".join(repr(float(v)) for v in row) + "\n")


def _check_index(table: EmbeddingTable, index: int) -> None:
    if not 0 <= index < len(table):
        raise TokenIndexError(f"token index {index} outside table of {len(table)} rows")


def ground_cost(table: EmbeddingTable, i: int, j: int) -> float:
    """
    Euclidean distance between the vectors of tokens i and j

    Args:
        table (EmbeddingTable): Vector source
        i (int): Row index
        j (int): Row index

    Returns:
        float: ||x_i - x_j||
    """
    _check_index(table, i)
    _check_index(table, j)
    if i == j:
        return 0.0
    return float(np.linalg.norm(table.vectors[i] - table.vectors[j]))


def cost_matrix(table: EmbeddingTable, a: "NBowVector", b: "NBowVector") -> np.ndarray:
    """
    Ground costs over support(a) x support(b), supports in ascending index order

    Args:
        table (EmbeddingTable): Vector source
        a (NBowVector): Source distribution
        b (NBowVector): Destination distribution

    Returns:
        np.ndarray: |support(a)| x |support(b)| nonnegative matrix
    """
    rows, cols = a.indices(), b.indices()
    for index in (rows[0], rows[-1], cols[0], cols[-1]):
        _check_index(table, int(index))
    costs = cdist(table.vectors[rows], table.vectors[cols], metric="euclidean")
    # Shared tokens cost exactly zero
    costs[rows[:, None] == cols[None, :]] = 0.0
    return costs
