"""Common model interface: full-column, selected-column and selected-row RHS."""

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

import numpy as np

from tdb_sparse.errors import TDBError


# extent of the RK4 stability region along the negative real and the imaginary axis
RK4_REAL_LIMIT = 2.78
RK4_IMAG_LIMIT = 2.82


class ModelError(TDBError):
    """Physics model evaluation errors."""

    pass


def column_chunks(k: int, threads: int) -> List[slice]:
    """Contiguous column blocks, one per worker; fixed for a given (k, threads)."""
    threads = max(1, min(threads, k))
    bounds = np.linspace(0, k, threads + 1).astype(int)
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


class Model(ABC):
    """
    A discretized PDE right-hand side F(V, t) acting on sample columns.

    Every column of the ensemble is an independent state sample, so evaluation is
    split into column blocks and may run on a thread pool. Each column is computed by
    the same arithmetic regardless of the split, which keeps results bit-identical
    across thread counts.

    Attributes:
        n: State dimension (rows).
        wx: Spatial quadrature weights (length n).
        threads: Worker count for column-parallel evaluation.
    """

    n: int
    wx: np.ndarray
    threads: int = 1

    @abstractmethod
    def _columns(self, V: np.ndarray, t: float, samples: np.ndarray) -> np.ndarray:
        """RHS of every row for the given columns."""

    @abstractmethod
    def _rows(
        self,
        rows: np.ndarray,
        lookup: np.ndarray,
        Vsub: np.ndarray,
        t: float,
        samples: np.ndarray,
    ) -> np.ndarray:
        """RHS at the selected rows; lookup maps a global row to its position in Vsub."""

    @abstractmethod
    def stencil(self, row: int) -> List[int]:
        """Rows other than `row` whose values its RHS depends on."""

    @property
    def sample_count(self) -> Optional[int]:
        """Number of ensemble columns the model carries random inputs for, if any."""
        return None

    def _samples(self, k: int, samples: Optional[np.ndarray]) -> np.ndarray:
        if samples is None:
            return np.arange(k)
        samples = np.asarray(samples, dtype=np.intp)
        if samples.shape != (k,):
            raise ModelError(f"{samples.shape[0]} sample indices given for {k} columns")
        return samples

    def _parallel(self, k: int, work: Callable[[slice], np.ndarray]) -> np.ndarray:
        chunks = column_chunks(k, self.threads)
        if len(chunks) <= 1:
            return work(slice(0, k))
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(work, chunks))
        return np.concatenate(parts, axis=1)

    def rhs_columns(
        self, V: np.ndarray, t: float, samples: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """
        Full right-hand side for a block of columns.

        Args:
            V: States n×k.
            t: Time.
            samples: Ensemble index of each column (defaults to 0..k-1).

        Returns:
            RHS n×k.
        """
        V = np.asarray(V, dtype=float)
        if V.ndim != 2 or V.shape[0] != self.n:
            raise ModelError(f"state block has shape {V.shape}, expected ({self.n}, k)")
        idx = self._samples(V.shape[1], samples)
        return self._parallel(V.shape[1], lambda c: self._columns(V[:, c], t, idx[c]))

    def closure(self, rows: np.ndarray) -> np.ndarray:
        """
        Rows needed to evaluate the RHS at `rows`, ordered as [rows; adjacency].

        The adjacency part is sorted and excludes the selected rows themselves.
        """
        rows = np.asarray(rows, dtype=np.intp)
        chosen = set(int(r) for r in rows)
        extra = sorted({a for r in rows for a in self.stencil(int(r))} - chosen)
        return np.concatenate([rows, np.asarray(extra, dtype=np.intp)])

    def rhs_rows(
        self,
        rows: np.ndarray,
        Vsub: np.ndarray,
        t: float,
        samples: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Right-hand side at selected rows from the state restricted to their closure.

        Args:
            rows: Selected rows (length p).
            Vsub: State values at closure(rows), shape (p + |adjacency|)×k.
            t: Time.
            samples: Ensemble index of each column (defaults to 0..k-1).

        Returns:
            RHS p×k, equal to the same rows of rhs_columns on the full state.

        Raises:
            ModelError: If Vsub does not cover the closure of rows.
        """
        rows = np.asarray(rows, dtype=np.intp)
        Vsub = np.asarray(Vsub, dtype=float)
        full = self.closure(rows)
        if Vsub.ndim != 2 or Vsub.shape[0] != full.shape[0]:
            raise ModelError(
                f"missing adjacency rows: got {Vsub.shape[0] if Vsub.ndim else 0} state rows, "
                f"closure of {rows.shape[0]} selected rows has {full.shape[0]}"
            )
        lookup = np.full(self.n, -1, dtype=np.intp)
        lookup[full] = np.arange(full.shape[0])
        idx = self._samples(Vsub.shape[1], samples)
        return self._parallel(
            Vsub.shape[1], lambda c: self._rows(rows, lookup, Vsub[:, c], t, idx[c])
        )

    @staticmethod
    def gather(lookup: np.ndarray, needed: np.ndarray, Vsub: np.ndarray) -> np.ndarray:
        """Rows of Vsub for global indices `needed`; fails on rows outside the closure."""
        pos = lookup[needed]
        if np.any(pos < 0):
            missing = np.unique(np.asarray(needed)[pos < 0])
            raise ModelError(f"missing adjacency rows {missing.tolist()}")
        return Vsub[pos]
