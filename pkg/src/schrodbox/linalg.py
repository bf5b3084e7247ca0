"""Discretized magnetic Hamiltonian and its Crank-Nicolson (Cayley) propagator.

The kinetic operator is assembled as

    H = -Lap_h + i A . grad_h + i grad_h . (A psi) + |A|^2 + V,

which is the literal expansion of (-i grad_h - A)^2 + V with symmetric
differences.  Because the symmetric difference is antisymmetric under the
grid inner product, the two first-order terms are mutually adjoint and H
is Hermitian by construction; an explicit verification pass certifies it.

One Cayley step solves (I + i tau/2 H) y = psi and returns 2y - psi, i.e.
psi' = (I - i tau/2 H)(I + i tau/2 H)^{-1} psi, the unitary rational
approximation of exp(-i tau H).
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .grid import Grid, WaveFunction

DIRECT_SOLVE_LIMIT = 200_000
DENSE_ORACLE_LIMIT = 4096


class SolverError(RuntimeError):
    """A linear solve failed to reach its residual tolerance."""


class AssemblyError(RuntimeError):
    """The assembled operator failed its Hermiticity certificate."""


@dataclass
class SparseHermitianOperator:
    """CSR operator on grid fields with a Hermiticity certificate."""

    grid: Grid
    matrix: sp.csr_matrix
    scale: float
    hermitian_certified: bool = False

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (self.matrix @ values.reshape(-1)).reshape(self.grid.shape)

    def dense(self) -> np.ndarray:
        if self.n > DENSE_ORACLE_LIMIT:
            raise ValueError(f"refusing to densify n={self.n} > {DENSE_ORACLE_LIMIT}")
        return self.matrix.toarray()


def _pair_indices(shape, axis, step):
    """(rows, cols) flat indices of all pairs (x, x + step e_axis) in range."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    row_sl = [slice(None)] * len(shape)
    col_sl = [slice(None)] * len(shape)
    p = shape[axis]
    if step > 0:
        row_sl[axis] = slice(0, p - step)
        col_sl[axis] = slice(step, p)
    else:
        row_sl[axis] = slice(-step, p)
        col_sl[axis] = slice(0, p + step)
    return idx[tuple(row_sl)].ravel(), idx[tuple(col_sl)].ravel(), tuple(row_sl), tuple(col_sl)


def assemble_hamiltonian(grid: Grid, A=None, V=None, stencil: str = "paper") -> SparseHermitianOperator:
    """Assemble (-i grad_h - A)^2 + V as a sparse Hermitian operator.

    A is a list of d real node-sampled component fields (or None for no
    magnetic coupling); V is a real node field (or None).  The "paper"
    stencil composes two symmetric differences per axis (width-2h second
    difference); "compact" swaps in the 3-point second difference for the
    Laplacian part only.
    """
    shape = grid.shape
    n = grid.size
    h = grid.h
    if A is not None:
        A = [np.asarray(a, dtype=float) for a in A]
        if len(A) != grid.d:
            raise ValueError(f"vector potential has {len(A)} components for d={grid.d}")
        for a in A:
            if a.shape != shape:
                raise ValueError("vector potential component shape mismatch")
        if all(np.all(a == 0.0) for a in A):
            A = None
    if V is not None:
        V = np.asarray(V, dtype=float)
        if V.shape != shape:
            raise ValueError("potential field shape mismatch")

    rows, cols, vals = [], [], []
    diag = np.zeros(shape)

    lap_step = 2 if stencil == "paper" else 1
    lap_off = -1.0 / (4.0 * h * h) if stencil == "paper" else -1.0 / (h * h)
    lap_diag = 1.0 / (2.0 * h * h) if stencil == "paper" else 2.0 / (h * h)
    for ax in range(grid.d):
        diag += lap_diag
        for step in (lap_step, -lap_step):
            r, c, _, _ = _pair_indices(shape, ax, step)
            rows.append(r)
            cols.append(c)
            vals.append(np.full(len(r), lap_off, dtype=complex))

    if A is not None:
        for ax in range(grid.d):
            a = A[ax]
            for step, sign in ((1, 1.0), (-1, -1.0)):
                r, c, row_sl, col_sl = _pair_indices(shape, ax, step)
                # i A.grad contributes A(x); i grad.(A psi) contributes A(x + step h).
                coeff = sign * 1j / (2.0 * h) * (a[row_sl].ravel() + a[col_sl].ravel())
                rows.append(r)
                cols.append(c)
                vals.append(coeff)
            diag += a * a

    if V is not None:
        diag = diag + V

    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag.ravel().astype(complex))

    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    mat.sum_duplicates()

    scale = float(np.max(np.abs(mat).sum(axis=1)))
    op = SparseHermitianOperator(grid=grid, matrix=mat, scale=max(scale, 1e-300))
    defect = float(np.abs(mat - mat.getH()).max())
    if defect > 1e-12 * op.scale:
        raise AssemblyError(f"Hermiticity defect {defect} exceeds 1e-12 * scale {op.scale}")
    op.hermitian_certified = True
    return op


def _gmres(matrix, b, x0, rtol, maxiter, M):
    kwargs = {"maxiter": maxiter, "M": M, "x0": x0}
    if "rtol" in inspect.signature(spla.gmres).parameters:
        kwargs["rtol"] = rtol
    else:  # scipy < 1.12
        kwargs["tol"] = rtol
    return spla.gmres(matrix, b, **kwargs)


class CayleyStepper:
    """Applies (I - i tau/2 H)(I + i tau/2 H)^{-1} with a cached factorization.

    Strategy "direct" (sparse LU) is used up to DIRECT_SOLVE_LIMIT unknowns,
    "krylov" (GMRES with diagonal preconditioning, relative residual `tol`,
    at most `maxiter` iterations) beyond that; pass `strategy` to override.
    """

    def __init__(self, op: SparseHermitianOperator, tau: float, strategy: str | None = None,
                 tol: float = 1e-10, maxiter: int = 500):
        self.op = op
        self.tau = float(tau)
        self.tol = tol
        self.maxiter = maxiter
        if strategy is None:
            strategy = "direct" if op.n <= DIRECT_SOLVE_LIMIT else "krylov"
        if strategy not in ("direct", "krylov"):
            raise ValueError(f"unknown solve strategy {strategy!r}")
        self.strategy = strategy
        eye = sp.identity(op.n, dtype=complex, format="csr")
        self._plus = (eye + (0.5j * self.tau) * op.matrix).tocsc()
        self._lu = None
        self._precond = None
        if self.strategy == "direct":
            self._lu = spla.splu(self._plus)
        else:
            dinv = 1.0 / self._plus.diagonal()
            self._precond = spla.LinearOperator(
                self._plus.shape, matvec=lambda x: dinv * x, dtype=complex
            )

    def step_values(self, values: np.ndarray) -> np.ndarray:
        b = values.reshape(-1).astype(complex)
        if self.strategy == "direct":
            y = self._lu.solve(b)
        else:
            y, info = _gmres(self._plus, b, x0=b, rtol=self.tol,
                             maxiter=self.maxiter, M=self._precond)
            resid = np.linalg.norm(self._plus @ y - b) / max(np.linalg.norm(b), 1e-300)
            if info != 0 or resid > 10.0 * self.tol:
                raise SolverError(
                    f"GMRES did not converge (info={info}, relative residual={resid:.3e})"
                )
        return (2.0 * y - b).reshape(values.shape)


def cayley_step(stepper: CayleyStepper, psi: WaveFunction) -> WaveFunction:
    """One Crank-Nicolson step of the stepper's operator applied to psi."""
    if psi.grid is not stepper.op.grid and psi.grid != stepper.op.grid:
        raise ValueError("state and stepper live on different grids")
    return WaveFunction(psi.grid, stepper.step_values(psi.values))


class DensePropagator:
    """Exact unitary propagation exp(-i H t) by dense eigendecomposition."""

    def __init__(self, op: SparseHermitianOperator):
        if op.n > DENSE_ORACLE_LIMIT:
            raise ValueError(f"dense oracle capped at {DENSE_ORACLE_LIMIT} nodes, got {op.n}")
        self.op = op
        self.eigvals, self.eigvecs = eigh(op.dense())

    def apply(self, t: float, values: np.ndarray) -> np.ndarray:
        coeff = self.eigvecs.conj().T @ values.reshape(-1)
        coeff = np.exp(-1j * self.eigvals * t) * coeff
        return (self.eigvecs @ coeff).reshape(values.shape)


def dense_propagator_oracle(op: SparseHermitianOperator, t: float, psi: WaveFunction) -> WaveFunction:
    """Test oracle: exact exp(-i H t) psi via dense eigendecomposition."""
    return WaveFunction(psi.grid, DensePropagator(op).apply(t, psi.values))


def export_triplets(op: SparseHermitianOperator, path) -> None:
    """Write the operator as 'row col re im' text lines (debug format)."""
    coo = op.matrix.tocoo()
    with open(path, "w") as out:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            out.write(f"{r} {c} {float(v.real)!r} {float(v.imag)!r}\n")
