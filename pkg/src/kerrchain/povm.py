"""Phase-sector measurement operators and configuration probabilities.

The angular sector operator E(theta) is built from the coherent-state
resolution of identity restricted to polar angles in [-theta, theta]. Its
Fock matrix elements are
``(1/pi) Gamma((k+k'+2)/2) / sqrt(k! k'!) * sin((k-k') theta) / (k-k')``
with the diagonal limit theta/pi; everything is evaluated in log space so
large cutoffs do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.special import gammaln

from .fock import (
    DensityMatrix,
    DimensionError,
    FockSpace,
    OperatorMatrix,
    StateVector,
    expectation,
)

KINDS = {"tripling": 3, "doubling": 2}


def e_theta_dense(theta: float, cutoff: int) -> np.ndarray:
    if not 0.0 < theta <= np.pi:
        raise ValueError(f"theta must be in (0, pi], got {theta}")
    k = np.arange(cutoff)
    log_amp = gammaln((k[:, None] + k[None, :] + 2) / 2.0) - 0.5 * (
        gammaln(k + 1.0)[:, None] + gammaln(k + 1.0)[None, :]
    )
    dk = k[:, None] - k[None, :]
    safe = np.where(dk == 0, 1, dk)
    angular = np.where(dk == 0, theta, np.sin(dk * theta) / safe)
    return np.exp(log_amp) * angular / np.pi


def e_theta(theta: float, space: FockSpace) -> OperatorMatrix:
    """Sector operator E(theta) on a single-mode space."""
    if space.n_modes != 1:
        raise DimensionError("e_theta requires a single-mode space")
    return OperatorMatrix(space, e_theta_dense(theta, space.cutoff), hermitian_hint=True)


@dataclass(frozen=True)
class MeasurementSet:
    """Ordered POVM elements for one mode: 3 sectors or 2 half-planes."""

    kind: str
    elements: tuple

    @property
    def n_outcomes(self) -> int:
        return KINDS[self.kind]

    @property
    def space(self) -> FockSpace:
        return self.elements[0].space

    def dense_elements(self):
        return [p.toarray() for p in self.elements]

    def completeness_defect(self) -> float:
        total = sum(p.matrix for p in self.elements)
        eye = np.eye(self.space.dim)
        return float(abs(total.toarray() - eye).max())


def measurement_set(kind: str, space: FockSpace) -> MeasurementSet:
    """POVM elements {P_j}.

    tripling: P_0 = E(pi/3), P_{j+1} = N3^dag P_j N3 with the single-mode
    rotation N3 = exp[-(2 pi i/3) a^dag a]; element j covers the sector
    around angle 2 pi j / 3.
    doubling: P_1 = E(pi/2) on the right half-plane and P_0 its parity
    conjugate on the left half-plane.
    """
    if space.n_modes != 1:
        raise DimensionError("measurement_set requires a single-mode space")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {sorted(KINDS)}")
    k = np.arange(space.cutoff)
    dk = k[:, None] - k[None, :]
    if kind == "tripling":
        p0 = e_theta_dense(np.pi / 3, space.cutoff)
        phase = np.exp(2j * np.pi * dk / 3.0)
        elements = tuple(
            OperatorMatrix(space, p0 * phase**j, hermitian_hint=True) for j in range(3)
        )
    else:
        p1 = e_theta_dense(np.pi / 2, space.cutoff)
        parity = np.where(dk % 2 == 0, 1.0, -1.0)
        p0 = p1 * parity  # conjugation by exp(i pi a^dag a)
        elements = (
            OperatorMatrix(space, p0, hermitian_hint=True),
            OperatorMatrix(space, p1, hermitian_hint=True),
        )
    return MeasurementSet(kind, elements)


@dataclass(frozen=True)
class ConfigProbabilities:
    """Probability table over well-label configurations (j_1 ... j_N)."""

    kind: str
    n_sites: int
    table: dict

    @property
    def n_outcomes(self) -> int:
        return KINDS[self.kind]

    def prob(self, config) -> float:
        return self.table[tuple(config)]

    def total(self) -> float:
        return float(sum(self.table.values()))

    def configs(self):
        """Configurations in canonical (lexicographic) order."""
        return sorted(self.table)

    def clamped(self, config) -> float:
        return min(max(self.prob(config), 0.0), 1.0)

    def marginalized(self, site: int) -> "ConfigProbabilities":
        """Sum out one site, producing the (N-1)-site table."""
        if not 0 <= site < self.n_sites:
            raise DimensionError(f"site {site} out of range")
        out = {}
        for cfg, p in self.table.items():
            reduced = cfg[:site] + cfg[site + 1 :]
            out[reduced] = out.get(reduced, 0.0) + p
        return ConfigProbabilities(self.kind, self.n_sites - 1, out)

    def csv_rows(self):
        """(config-string, probability) rows in lexicographic order."""
        return [("".join(map(str, cfg)), self.table[cfg]) for cfg in self.configs()]


def _apply_site(tensor: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def config_probabilities(state, mset: MeasurementSet, n_sites: int = None) -> ConfigProbabilities:
    """Full table p_{j1...jN} = <psi| P_{j1} x ... x P_{jN} |psi>."""
    space = state.space
    n = space.n_modes if n_sites is None else n_sites
    if space.n_modes != n:
        raise DimensionError(f"state has {space.n_modes} modes, expected {n}")
    if mset.space.cutoff != space.cutoff:
        raise DimensionError("measurement-set cutoff does not match state space")
    povm = mset.dense_elements()
    table = {}
    if isinstance(state, StateVector):
        c = space.cutoff
        psi = state.amplitudes.reshape((c,) * n)

        def recurse(axis, tensor, prefix):
            if axis == n:
                table[prefix] = float(np.real(np.vdot(psi, tensor)))
                return
            for j, p in enumerate(povm):
                recurse(axis + 1, _apply_site(tensor, p, axis), prefix + (j,))

        recurse(0, psi, ())
    elif isinstance(state, DensityMatrix):
        from functools import reduce

        for cfg in product(range(mset.n_outcomes), repeat=n):
            full = reduce(np.kron, (povm[j] for j in cfg)) if n > 1 else povm[cfg[0]]
            p = float(np.real(np.sum(full.T * state.matrix)))
            table[cfg] = p
    else:
        raise TypeError(f"unsupported state type {type(state)!r}")
    return ConfigProbabilities(mset.kind, n, table)
