"""Interwoven interconnection matrices P = sum_j M_j (x) D_j.

Global index of (cell i, signal j), both 0-based, is ``i*r + j``. All algebra
goes through the constructor list; ``dense`` exists for export and as an
independent check.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import NegativeEntry, NonSquare, Singular
from .numerics import as_matrix, eig_general, eig_symmetric, EigenDecomposition, lu_factor, max_abs, SYMMETRY_TOL


def selector(j: int, r: int) -> np.ndarray:
    """D_j = diag(delta_{j,0}, ..., delta_{j,r-1})."""
    d = np.zeros((r, r))
    d[j, j] = 1.0
    return d


@dataclass(frozen=True, eq=False)
class InterwovenMatrix:
    constructors: tuple

    @property
    def r(self) -> int:
        return len(self.constructors)

    @property
    def N(self) -> int:
        return self.constructors[0].shape[0]

    @cached_property
    def dense(self) -> np.ndarray:
        r, n = self.r, self.N
        out = np.zeros((r * n, r * n))
        for j, m in enumerate(self.constructors):
            out[j::r, j::r] = m
        return out

    def apply(self, y: np.ndarray) -> np.ndarray:
        """u = P y without forming P; ``y`` is flat (N*r) or shaped (N, r)."""
        y = np.asarray(y)
        yy = y.reshape(self.N, self.r)
        u = np.empty_like(yy, dtype=float)
        for j, m in enumerate(self.constructors):
            u[:, j] = m @ yy[:, j]
        return u.reshape(y.shape)

    def dense_csv(self) -> str:
        rows = [",".join(f"{v:.12g}" for v in row) for row in self.dense]
        return "\n".join(rows) + "\n"


def interweave(constructors: Sequence) -> InterwovenMatrix:
    mats = [as_matrix(getattr(m, "matrix", m)) for m in constructors]
    if not mats:
        raise NonSquare("need at least one constructor")
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise NonSquare("constructors must be square and of equal size")
    for m in mats:
        m.setflags(write=False)
    return InterwovenMatrix(tuple(mats))


def kron_dense(constructors: Sequence) -> np.ndarray:
    """Reference realisation sum_j M_j (x) D_j with explicit Kronecker products."""
    r = len(constructors)
    return sum(np.kron(np.asarray(m, float), selector(j, r)) for j, m in enumerate(constructors))


def tau(x: int, r: int, n: int) -> int:
    """1-based permutation ((x-1) mod r) n + floor((x-1)/r) + 1."""
    return ((x - 1) % r) * n + (x - 1) // r + 1


def block_diagonalize(p: InterwovenMatrix):
    """Return ``(order, blocks)`` with ``p.dense[order][:, order]`` block diagonal.

    ``order[k]`` is the original 0-based index placed at position ``k``; it is
    the inverse of the tau map, so Q with ``Q[i, tau(i)] = 1`` gives
    ``Q^T P Q = dense[order][:, order]``. Blocks are read back from the
    permuted dense matrix, not copied from the constructors.
    """
    r, n = p.r, p.N
    order = np.empty(r * n, dtype=int)
    for x in range(1, r * n + 1):
        order[tau(x, r, n) - 1] = x - 1
    pd = p.dense[np.ix_(order, order)]
    blocks = [pd[j * n:(j + 1) * n, j * n:(j + 1) * n].copy() for j in range(r)]
    return order, blocks


def _is_sym(m) -> bool:
    return max_abs(m - m.T) <= SYMMETRY_TOL * max(max_abs(m), np.finfo(float).tiny)


def interwoven_spectrum(p: InterwovenMatrix) -> EigenDecomposition:
    """Union of constructor spectra, computed block by block."""
    vals = []
    sym = True
    for m in p.constructors:
        if _is_sym(m):
            vals.append(eig_symmetric(m).values.astype(complex))
        else:
            sym = False
            vals.append(eig_general(m, max_dim=None).values)
    v = np.concatenate(vals)
    order = np.lexsort((v.imag, v.real))
    v = v[order]
    if sym:
        v = v.real
    return EigenDecomposition(v, None, sym)


def interwoven_inverse(p: InterwovenMatrix) -> InterwovenMatrix:
    inv = []
    for j, m in enumerate(p.constructors):
        lu = lu_factor(m)
        if lu.singular_at is not None:
            raise Singular(f"constructor {j} is singular", index=j)
        inv.append(lu.solve(np.eye(p.N)))
    return interweave(inv)


def interwoven_power(p: InterwovenMatrix, k: int) -> InterwovenMatrix:
    if k < 1:
        raise ValueError("power must be >= 1")
    return interweave([_power(m, int(k)) for m in p.constructors])


def _power(m: np.ndarray, k: int) -> np.ndarray:
    """Binary exponentiation with plain products."""
    out, base = None, m
    while k:
        if k & 1:
            out = base if out is None else out @ base
        k >>= 1
        if k:
            base = base @ base
    return out


def interwoven_trace(p: InterwovenMatrix) -> float:
    return float(sum(np.trace(m) for m in p.constructors))


def interwoven_det(p: InterwovenMatrix) -> float:
    return float(np.prod([lu_factor(m).det() for m in p.constructors]))


def is_irreducible(m) -> bool:
    """Strong connectivity of the directed graph of nonzero entries."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NonSquare("irreducibility needs a square matrix")
    if np.any(a < 0):
        raise NegativeEntry("irreducibility check expects a nonnegative matrix")
    pattern = a != 0
    n = a.shape[0]
    if n == 0:
        return True

    def all_reached(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = seen.copy()
        while frontier.any():
            nxt = adj[frontier].any(0) & ~seen
            seen |= nxt
            frontier = nxt
        return bool(seen.all())

    return all_reached(pattern) and all_reached(pattern.T)


def block_diag(blocks: Sequence) -> np.ndarray:
    """diag(B_1, ..., B_N) for equally sized square blocks."""
    blocks = [np.asarray(b, float) for b in blocks]
    k = blocks[0].shape[0]
    out = np.zeros((k * len(blocks), k * len(blocks)))
    for i, b in enumerate(blocks):
        out[i * k:(i + 1) * k, i * k:(i + 1) * k] = b
    return out
