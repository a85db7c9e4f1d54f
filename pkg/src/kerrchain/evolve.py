"""Schroedinger propagation of preparation sweeps with measurement records.

The swept Hamiltonian H(t) = H_static + r(t) H_drive + delta(t) H_number is
applied through a fused sparse kernel; integration uses an adaptive embedded
Runge-Kutta pair on the complex state vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .fock import FockSpace, StateVector, vacuum_state
from .kernels import FusedOperator
from .model import ArrayConfig, OscillatorParams, SweepSchedule, hamiltonian_parts
from .povm import ConfigProbabilities, config_probabilities, measurement_set
from .symmetry import apply_projector_elements, build_generators, commuting_subgroup


class LeakageError(RuntimeError):
    """Truncation-boundary population exceeded the acceptance threshold."""

    def __init__(self, max_leakage: float, threshold: float, suggested_cutoff: int):
        self.max_leakage = max_leakage
        self.threshold = threshold
        self.suggested_cutoff = suggested_cutoff
        super().__init__(
            f"boundary leakage {max_leakage:.3e} exceeds {threshold:.1e}; "
            f"retry with cutoff >= {suggested_cutoff}"
        )


class IntegrationError(RuntimeError):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    prob_tables: list  # ConfigProbabilities per recorded time
    norms: np.ndarray
    leakage: np.ndarray
    symmetric_weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def probability(self, config) -> np.ndarray:
        cfg = tuple(int(j) for j in config)
        return np.array([t.prob(cfg) for t in self.prob_tables])

    def final_table(self) -> ConfigProbabilities:
        return self.prob_tables[-1]

    def orbit_representatives(self):
        from .symmetry import all_orbits

        table0 = self.prob_tables[0]
        modulus = table0.n_outcomes
        return [o.representative for o in all_orbits(table0.n_sites, modulus)]

    def to_csv(self, path) -> None:
        """t, one probability column per orbit representative, diagnostics."""
        import csv

        reps = self.orbit_representatives()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["t"] + ["p_" + "".join(map(str, r)) for r in reps]
            header += ["norm", "leakage", "symmetric_weight"]
            w.writerow(header)
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                row += [repr(float(self.prob_tables[i].prob(r))) for r in reps]
                row += [
                    repr(float(self.norms[i])),
                    repr(float(self.leakage[i])),
                    repr(float(self.symmetric_weights[i])),
                ]
                w.writerow(row)

    def write_meta(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _leakage_mask(space: FockSpace) -> np.ndarray:
    occ = space.occupations()
    return (occ >= space.cutoff - 2).any(axis=1)


def propagate_sweep(
    params: OscillatorParams,
    config: ArrayConfig,
    schedule: SweepSchedule,
    space: FockSpace,
    n_records: int = 200,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    leak_tol: float = 1e-4,
    method: str = "RK45",
) -> Trajectory:
    """Propagate the all-vacuum state through the sweep and record diagnostics.

    Records ``n_records`` evenly spaced samples of the configuration
    probability table, the norm, the truncation-boundary leakage (population
    with any mode in its top two levels), and the totally-symmetric weight.
    Raises LeakageError after integration if the leakage threshold is hit.
    """
    if n_records < 2:
        raise ValueError("n_records must be >= 2")
    static, drive_unit, number = hamiltonian_parts(params, config, space)
    fused = FusedOperator(static, drive_unit, number)
    psi0 = vacuum_state(space).amplitudes

    def rhs(t, y):
        r, delta = schedule.at(t)
        return fused.apply(-1j, -1j * r, -1j * delta, y)

    t_eval = np.linspace(0.0, schedule.t_f, n_records)
    sol = solve_ivp(
        rhs, (0.0, schedule.t_f), psi0, method=method, t_eval=t_eval, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}")

    mset = measurement_set(params.drive_order, space.single_mode())
    mask = _leakage_mask(space)
    gens = build_generators(config.n_sites, space)
    h_final = static + schedule.r_max * drive_unit  # end-of-sweep Hamiltonian
    group = commuting_subgroup(gens, h_final)

    tables, norms, leaks, weights = [], [], [], []
    for i in range(n_records):
        amp = sol.y[:, i]
        norms.append(float(np.linalg.norm(amp)))
        leaks.append(float(np.sum(np.abs(amp[mask]) ** 2)))
        tables.append(config_probabilities(StateVector(space, amp), mset))
        proj = apply_projector_elements(group, amp)
        weights.append(float(np.real(np.vdot(proj, proj))))

    traj = Trajectory(
        times=t_eval,
        prob_tables=tables,
        norms=np.array(norms),
        leakage=np.array(leaks),
        symmetric_weights=np.array(weights),
        meta={
            "params": {
                "delta_ini": schedule.delta_ini,
                "r_max": schedule.r_max,
                "t_f": schedule.t_f,
                "kerr": params.kerr,
                "drive_order": params.drive_order,
                "n_sites": config.n_sites,
                "couplings": list(config.couplings),
                "boundary": config.boundary,
                "cutoff": space.cutoff,
            },
            "numerics": {
                "method": method,
                "rtol": rtol,
                "atol": atol,
                "n_records": n_records,
                "leak_tol": leak_tol,
                "group_order": len(group),
            },
            "diagnostics": {
                "max_leakage": max(leaks),
                "max_norm_drift": float(max(abs(n - 1.0) for n in norms)),
                "min_symmetric_weight": min(weights),
                "n_rhs_evaluations": int(sol.nfev),
            },
        },
    )
    if max(leaks) > leak_tol:
        raise LeakageError(max(leaks), leak_tol, space.cutoff + 4)
    return traj


def geometric_asymmetry(traj: Trajectory, orbit_a, orbit_b) -> float:
    """Max over time of |p(rep_a) - p(rep_b)| between two orbit classes."""
    a = tuple(int(j) for j in orbit_a)
    b = tuple(int(j) for j in orbit_b)
    for cfg in (a, b):
        if cfg not in traj.prob_tables[0].table:
            raise KeyError(f"configuration {cfg} not present in the table")
    return float(np.max(np.abs(traj.probability(a) - traj.probability(b))))
