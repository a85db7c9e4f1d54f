"""Low-lying spectra, symmetric-state identification, and coupling shifts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .fock import FockSpace, OperatorMatrix, StateVector
from .model import ArrayConfig, OscillatorParams, build_array_hamiltonian, build_single_hamiltonian
from .povm import MeasurementSet, config_probabilities
from .symmetry import apply_projector_elements, build_generators, commuting_subgroup, config_orbit

DENSE_LIMIT = 4000
SYMMETRIC_FLAG_THRESHOLD = 0.99
DEGENERACY_TOL = 1e-9


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    symmetric_flags: np.ndarray = None
    vectors: np.ndarray = None  # columns are eigenvectors

    def n_symmetric(self) -> int:
        return int(np.sum(self.symmetric_flags))

    def state(self, space: FockSpace, index: int) -> StateVector:
        return StateVector(space, self.vectors[:, index])

    def csv_rows(self):
        rows = []
        for i, e in enumerate(self.eigenvalues):
            flag = "" if self.symmetric_flags is None else int(self.symmetric_flags[i])
            rows.append((i, float(e), flag))
        return rows


def _lowest_eigs(h, k: int, want_vectors: bool):
    dim = h.shape[0]
    k = min(k, dim)
    if dim <= DENSE_LIMIT:
        dense = h.toarray()
        if want_vectors:
            w, v = np.linalg.eigh(dense)
            return w[:k], v[:, :k]
        return np.linalg.eigvalsh(dense)[:k], None
    # deterministic start vector keeps degenerate-subspace output reproducible
    v0 = np.ones(dim) / np.sqrt(dim)
    w, v = spla.eigsh(h, k=k, which="SA", v0=v0, maxiter=5000)
    order = np.argsort(w)
    return w[order], (v[:, order] if want_vectors else None)


def single_spectrum_path(path_points, space: FockSpace, k: int, base: OscillatorParams = None):
    """k lowest single-oscillator eigenvalues at each (r, delta) point."""
    if space.n_modes != 1:
        raise ValueError("single_spectrum_path requires a single-mode space")
    if k > space.dim:
        raise ValueError("k exceeds the space dimension")
    base = base or OscillatorParams(delta=0.0)
    results = []
    for r, delta in path_points:
        params = base.with_(delta=delta, drive=r)
        h = build_single_hamiltonian(params, space)
        w, _ = _lowest_eigs(h.matrix, k, want_vectors=False)
        results.append(SpectrumResult(eigenvalues=np.asarray(w)))
    return results


def array_low_spectrum(
    params: OscillatorParams,
    config: ArrayConfig,
    space: FockSpace,
    k: int,
    want_vectors: bool = True,
) -> SpectrumResult:
    """k lowest array eigenpairs with totally-symmetric flags.

    States within DEGENERACY_TOL are grouped; the symmetric flags inside a
    degenerate group are assigned by diagonalizing the projector restricted
    to the group, so the count of flags is basis-independent. Vectors are
    rotated to that projector eigenbasis within each group.
    """
    h = build_array_hamiltonian(params, config, space)
    w, v = _lowest_eigs(h.matrix, k, want_vectors=True)
    gens = build_generators(config.n_sites, space)
    group = commuting_subgroup(gens, h)

    flags = np.zeros(len(w), dtype=bool)
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[stop - 1] <= DEGENERACY_TOL * max(1.0, abs(w[start])):
            stop += 1
        block = v[:, start:stop]
        proj_block = np.column_stack(
            [apply_projector_elements(group, block[:, i]) for i in range(stop - start)]
        )
        gram = block.conj().T @ proj_block
        gram = (gram + gram.conj().T) / 2
        vals, rot = np.linalg.eigh(gram)
        # descending projector weight: symmetric members first
        order = np.argsort(vals)[::-1]
        vals, rot = vals[order], rot[:, order]
        v[:, start:stop] = block @ rot
        flags[start : start + int(np.sum(vals > SYMMETRIC_FLAG_THRESHOLD))] = True
        start = stop

    return SpectrumResult(
        eigenvalues=np.asarray(w),
        symmetric_flags=flags,
        vectors=v if want_vectors else None,
    )


def lowest_symmetric_energy(result: SpectrumResult) -> float:
    idx = np.nonzero(result.symmetric_flags)[0]
    if len(idx) == 0:
        raise ValueError("no symmetric state among the computed eigenpairs")
    return float(result.eigenvalues[idx[0]])


def dominant_orbit(state: StateVector, mset: MeasurementSet):
    """Orbit whose summed configuration probability is largest for a state."""
    table = config_probabilities(state, mset)
    totals = {}
    for cfg, p in table.table.items():
        rep = config_orbit(cfg, modulus=mset.n_outcomes).representative
        totals[rep] = totals.get(rep, 0.0) + p
    return max(sorted(totals), key=lambda rep: totals[rep]), totals


def perturbative_shift(sign: str, v: float, x0: float, n_sites: int = 3) -> float:
    """First-order coupling shift of the lowest symmetric state on a ring.

    Each edge of the ring contributes -|V| X0^2 cos(dtheta) with dtheta the
    angle between neighboring well positions in the classically optimal
    configuration: 0 for attractive coupling, 2 pi/3 for repulsive coupling
    between period-3 wells.
    """
    if sign not in ("ferro", "antiferro"):
        raise ValueError("sign must be 'ferro' or 'antiferro'")
    v = abs(v)
    n_edges = 1 if n_sites == 2 else n_sites
    per_edge = -v * x0**2 if sign == "ferro" else -v * x0**2 / 2.0
    return n_edges * per_edge
