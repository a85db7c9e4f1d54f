"""Symmetry generators on the array space and configuration orbits.

Every group element generated by the global rotation, the cyclic site
shift, and the site reversal is a phase-permutation matrix: it maps basis
state |i> to ``omega^q[i] |target[i]>`` with omega = exp(-2 pi i / 3). The
closure is computed on that structural form, which makes deduplication
exact and keeps the projector sparse even for large arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import DimensionError, FockSpace, OperatorMatrix, StateVector

OMEGA = np.exp(-2j * np.pi / 3.0)


@dataclass(frozen=True)
class GroupElement:
    """U|i> = omega^phase[i] |target[i]> with omega = exp(-2 pi i/3)."""

    target: np.ndarray
    phase: np.ndarray

    def key(self) -> bytes:
        return self.target.tobytes() + self.phase.tobytes()

    def compose(self, other: "GroupElement") -> "GroupElement":
        """self applied after other."""
        t1, q1 = other.target, other.phase
        return GroupElement(self.target[t1], (q1 + self.phase[t1]) % 3)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = np.empty_like(vec)
        out[self.target] = np.exp(-2j * np.pi / 3.0 * self.phase) * vec
        return out

    def matrix(self, space: FockSpace) -> sp.csr_matrix:
        dim = space.dim
        data = np.exp(-2j * np.pi / 3.0 * self.phase)
        return sp.csr_matrix((data, (self.target, np.arange(dim))), shape=(dim, dim))


def _identity_element(dim: int) -> GroupElement:
    return GroupElement(np.arange(dim), np.zeros(dim, dtype=np.int8))


def _site_permutation_element(space: FockSpace, site_map) -> GroupElement:
    """Element sending |n_1 ... n_N> to the state with n'_k = n_{site_map(k)}."""
    occ = space.occupations()
    new_occ = occ[:, site_map]
    target = np.ravel_multi_index(new_occ.T, (space.cutoff,) * space.n_modes)
    return GroupElement(np.asarray(target), np.zeros(space.dim, dtype=np.int8))


def _rotation_element(space: FockSpace) -> GroupElement:
    n_tot = space.occupations().sum(axis=1)
    return GroupElement(np.arange(space.dim), (n_tot % 3).astype(np.int8))


def closure(generators, max_elements: int = 1000):
    """Breadth-first closure of the group generated by ``generators``."""
    if not generators:
        raise ValueError("need at least one generator")
    dim = len(generators[0].target)
    ident = _identity_element(dim)
    elements = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in generators:
                prod = g.compose(e)
                k = prod.key()
                if k not in elements:
                    elements[k] = prod
                    nxt.append(prod)
                    if len(elements) > max_elements:
                        raise RuntimeError("group closure did not terminate")
        frontier = nxt
    return list(elements.values())


@dataclass(frozen=True)
class SymmetryGenerators:
    space: FockSpace
    n3: OperatorMatrix
    translate: OperatorMatrix
    reverse: OperatorMatrix
    group_order: int
    elements: tuple  # full closure as GroupElements
    generator_elements: dict  # name -> GroupElement


def build_generators(n_sites: int, space: FockSpace) -> SymmetryGenerators:
    """Global -2pi/3 rotation, cyclic site shift, and site reversal.

    The translation satisfies T^dag a_n T = a_{n+1} (indices mod N) and the
    reversal R^dag a_n R = a_{N-1-n} in 0-based labels.
    """
    if space.n_modes != n_sites:
        raise DimensionError(f"space has {space.n_modes} modes, expected {n_sites}")
    n3 = _rotation_element(space)
    # T^dag a_n T = a_{n+1}: as an active map T moves the content of site
    # n+1 to site n, i.e. |n_1 ... n_N> -> |n_2 ... n_N n_1>.
    shift_map = [(k + 1) % n_sites for k in range(n_sites)]
    translate = _site_permutation_element(space, shift_map)
    reverse = _site_permutation_element(space, list(range(n_sites - 1, -1, -1)))
    elements = closure([n3, translate, reverse])
    gens = {"n3": n3, "translate": translate, "reverse": reverse}
    return SymmetryGenerators(
        space=space,
        n3=OperatorMatrix(space, n3.matrix(space)),
        translate=OperatorMatrix(space, translate.matrix(space)),
        reverse=OperatorMatrix(space, reverse.matrix(space)),
        group_order=len(elements),
        elements=tuple(elements),
        generator_elements=gens,
    )


def commuting_subgroup(generators: SymmetryGenerators, hamiltonian: OperatorMatrix, tol: float = 1e-9):
    """Closure of the generators that commute with the given Hamiltonian.

    Used for non-uniform coupling graphs (e.g. a frustrated triangle) where
    the translation is not a symmetry and must be dropped.
    """
    h = hamiltonian.matrix
    scale = abs(h).max() or 1.0
    kept = []
    for name in ("n3", "translate", "reverse"):
        el = generators.generator_elements[name]
        u = el.matrix(generators.space)
        defect = abs(h @ u - u @ h).max()
        if defect <= tol * scale:
            kept.append(el)
    return closure(kept)


def symmetric_projector(generators, space: FockSpace = None) -> OperatorMatrix:
    """P_sym = (1/|G|) sum_g U_g over the generated group."""
    if isinstance(generators, SymmetryGenerators):
        elements = generators.elements
        space = generators.space
    else:
        elements = list(generators)
        if space is None:
            raise ValueError("space required when passing raw group elements")
    total = None
    for el in elements:
        m = el.matrix(space)
        total = m if total is None else total + m
    return OperatorMatrix(space, total / len(elements), hermitian_hint=True)


def apply_projector_elements(elements, vec: np.ndarray) -> np.ndarray:
    """P_sym applied to a raw amplitude vector without forming the matrix."""
    acc = np.zeros_like(vec)
    for el in elements:
        acc += el.apply(vec)
    return acc / len(elements)


def symmetric_weight(state: StateVector, projector) -> float:
    """||P_sym |psi>||^2, the population in the totally symmetric sector."""
    if isinstance(projector, OperatorMatrix):
        if projector.space != state.space:
            raise DimensionError("projector/state space mismatch")
        proj = projector.matrix @ state.amplitudes
    else:
        proj = apply_projector_elements(projector, state.amplitudes)
    return float(np.real(np.vdot(proj, proj)))


# --- configuration orbits ----------------------------------------------------


@dataclass(frozen=True)
class ConfigOrbit:
    representative: tuple
    members: frozenset

    @property
    def size(self) -> int:
        return len(self.members)


def config_orbit(config, n_sites: int = None, modulus: int = 3) -> ConfigOrbit:
    """Orbit of a well-label string under shift, reversal, and label rotation."""
    cfg = tuple(int(j) for j in config)
    n = len(cfg) if n_sites is None else n_sites
    if len(cfg) != n:
        raise ValueError(f"configuration length {len(cfg)} != n_sites {n}")
    if any(not 0 <= j < modulus for j in cfg):
        raise ValueError(f"labels must be in [0, {modulus})")
    seen = {cfg}
    frontier = [cfg]
    while frontier:
        nxt = []
        for c in frontier:
            images = (
                (c[-1],) + c[:-1],               # cyclic shift
                c[::-1],                          # reversal
                tuple((j - 1) % modulus for j in c),  # label rotation
            )
            for im in images:
                if im not in seen:
                    seen.add(im)
                    nxt.append(im)
        frontier = nxt
    return ConfigOrbit(min(seen), frozenset(seen))


def all_orbits(n_sites: int, modulus: int = 3):
    """Disjoint orbits covering all modulus^N configurations."""
    from itertools import product

    remaining = set(product(range(modulus), repeat=n_sites))
    orbits = []
    while remaining:
        cfg = min(remaining)
        orb = config_orbit(cfg, n_sites, modulus)
        orbits.append(orb)
        remaining -= orb.members
    return orbits
