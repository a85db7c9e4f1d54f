"""Truncated Fock spaces with sparse operators and states.

Tensor ordering convention: site 0 is the slowest-varying index, i.e. the
basis state with flat index ``i`` has occupations
``np.unravel_index(i, (cutoff,) * n_modes)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

HERMITIAN_RTOL = 1e-12


class DimensionError(ValueError):
    """Operator/state constructed against mismatched spaces."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated bosonic Hilbert space: ``cutoff`` levels per mode."""

    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError(f"cutoff must be >= 2, got {self.cutoff}")
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")

    @property
    def dim(self) -> int:
        return self.cutoff**self.n_modes

    def single_mode(self) -> "FockSpace":
        return FockSpace(self.cutoff, 1)

    def occupations(self) -> np.ndarray:
        """(dim, n_modes) integer array of per-mode occupations."""
        idx = np.unravel_index(np.arange(self.dim), (self.cutoff,) * self.n_modes)
        return np.stack(idx, axis=1)


def _canonical_csr(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.sum_duplicates()
    m.sort_indices()
    return m


@dataclass(frozen=True)
class OperatorMatrix:
    """Sparse operator tied to a FockSpace.

    Treated as immutable after construction; do not mutate ``matrix``.
    """

    space: FockSpace
    matrix: sp.csr_matrix
    hermitian_hint: bool = False

    def __post_init__(self):
        m = _canonical_csr(self.matrix)
        if m.shape != (self.space.dim, self.space.dim):
            raise DimensionError(
                f"matrix shape {m.shape} does not match space dimension {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)
        if self.hermitian_hint:
            defect = abs(m - m.getH()).max()
            scale = abs(m).max() or 1.0
            if defect > HERMITIAN_RTOL * scale:
                raise ValueError(f"hermitian_hint set but max|M - M^dag| = {defect:g}")

    @property
    def dim(self) -> int:
        return self.space.dim

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.matrix.getH(), self.hermitian_hint)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self.matrix @ other.matrix)

    def _check_space(self, other) -> None:
        if other.space != self.space:
            raise DimensionError(f"space mismatch: {self.space} vs {other.space}")


@dataclass(frozen=True)
class StateVector:
    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.space.dim,):
            raise DimensionError(
                f"amplitude shape {amp.shape} does not match dimension {self.space.dim}"
            )
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.space, self.amplitudes / self.norm)

    def to_density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.space, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise DimensionError(
                f"matrix shape {m.shape} does not match dimension {self.space.dim}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def validate(self, trace_tol=1e-8, herm_tol=1e-10, eig_slack=1e-8) -> None:
        """Check Hermiticity, unit trace and positivity up to truncation slack."""
        m = self.matrix
        if abs(m - m.conj().T).max() > herm_tol:
            raise ValueError("density matrix not Hermitian")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace = {self.trace}, not 1")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if w.min() < -eig_slack:
            raise ValueError(f"negative eigenvalue {w.min():g}")


def destroy_op(space: FockSpace) -> OperatorMatrix:
    """Annihilation operator ``a`` on a single-mode space."""
    if space.n_modes != 1:
        raise DimensionError("destroy_op requires a single-mode space")
    n = np.arange(1, space.cutoff)
    mat = sp.diags(np.sqrt(n.astype(float)), offsets=1, shape=(space.dim, space.dim), dtype=complex)
    return OperatorMatrix(space, mat)


def number_op(space: FockSpace) -> OperatorMatrix:
    if space.n_modes != 1:
        raise DimensionError("number_op requires a single-mode space")
    mat = sp.diags(np.arange(space.cutoff, dtype=float).astype(complex))
    return OperatorMatrix(space, mat, hermitian_hint=True)


def identity_op(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space, sp.identity(space.dim, dtype=complex, format="csr"), hermitian_hint=True)


def embed_site(op: OperatorMatrix, site: int, array_space: FockSpace) -> OperatorMatrix:
    """Embed a single-mode operator at ``site``: I x ... x op x ... x I."""
    if op.space.n_modes != 1:
        raise DimensionError("embed_site takes a single-mode operator")
    if op.space.cutoff != array_space.cutoff:
        raise DimensionError(
            f"cutoff mismatch: operator {op.space.cutoff}, array {array_space.cutoff}"
        )
    if not 0 <= site < array_space.n_modes:
        raise DimensionError(f"site {site} out of range for {array_space.n_modes} modes")
    c = array_space.cutoff
    left = c**site
    right = c ** (array_space.n_modes - site - 1)
    factors = []
    if left > 1:
        factors.append(sp.identity(left, dtype=complex, format="csr"))
    factors.append(op.matrix)
    if right > 1:
        factors.append(sp.identity(right, dtype=complex, format="csr"))
    mat = reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)
    return OperatorMatrix(array_space, mat, hermitian_hint=op.hermitian_hint)


def expectation(op: OperatorMatrix, state) -> complex:
    """<psi|M|psi> for a StateVector, Tr(M rho) for a DensityMatrix."""
    if op.space != state.space:
        raise DimensionError(f"space mismatch: {op.space} vs {state.space}")
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    if isinstance(state, DensityMatrix):
        # Tr(M rho) via elementwise sum over the sparse entries of M
        m = op.matrix.tocoo()
        return complex(np.sum(m.data * state.matrix[m.col, m.row]))
    raise TypeError(f"unsupported state type {type(state)!r}")


def vacuum_state(space: FockSpace) -> StateVector:
    amp = np.zeros(space.dim, dtype=complex)
    amp[0] = 1.0
    return StateVector(space, amp)


def fock_state(space: FockSpace, occupations) -> StateVector:
    occ = np.atleast_1d(np.asarray(occupations, dtype=int))
    if occ.shape != (space.n_modes,):
        raise DimensionError(f"need {space.n_modes} occupation numbers, got {occ.shape}")
    if occ.min() < 0 or occ.max() >= space.cutoff:
        raise DimensionError("occupation out of range")
    idx = int(np.ravel_multi_index(tuple(occ), (space.cutoff,) * space.n_modes))
    amp = np.zeros(space.dim, dtype=complex)
    amp[idx] = 1.0
    return StateVector(space, amp)


def coherent_state(space: FockSpace, alpha: complex) -> StateVector:
    """Truncated coherent state |alpha> on a single mode, renormalized."""
    if space.n_modes != 1:
        raise DimensionError("coherent_state requires a single-mode space")
    n = np.arange(space.cutoff)
    from scipy.special import gammaln

    log_mag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0) if alpha != 0 else np.where(n == 0, 0.0, -np.inf)
    amp = np.exp(log_mag - abs(alpha) ** 2 / 2) * np.exp(1j * n * np.angle(alpha))
    return StateVector(space, amp).normalized()


def partial_trace(state, keep_sites) -> DensityMatrix:
    """Reduced density matrix over ``keep_sites`` (order preserved)."""
    space = state.space
    keep = list(keep_sites)
    if any(not 0 <= s < space.n_modes for s in keep) or len(set(keep)) != len(keep):
        raise DimensionError(f"bad keep_sites {keep}")
    trace_out = [s for s in range(space.n_modes) if s not in keep]
    c = space.cutoff
    shape = (c,) * space.n_modes
    if isinstance(state, StateVector):
        t = state.amplitudes.reshape(shape)
        t = np.transpose(t, keep + trace_out)
        mat = t.reshape(c ** len(keep), -1)
        rho = mat @ mat.conj().T
    elif isinstance(state, DensityMatrix):
        t = state.matrix.reshape(shape + shape)
        perm = keep + trace_out
        t = np.transpose(t, perm + [space.n_modes + p for p in perm])
        nk, nt = c ** len(keep), c ** len(trace_out)
        t = t.reshape(nk, nt, nk, nt)
        rho = np.einsum("aibi->ab", t)
    else:
        raise TypeError(f"unsupported state type {type(state)!r}")
    return DensityMatrix(FockSpace(c, len(keep)), rho)
