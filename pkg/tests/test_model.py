import numpy as np
import pytest

from kerrchain.fock import FockSpace, fock_state
from kerrchain.model import (
    ArrayConfig,
    OscillatorParams,
    SweepSchedule,
    build_array_hamiltonian,
    build_single_hamiltonian,
    classical_gradient,
    classical_surface,
    find_extrema,
    hamiltonian_parts,
    minima_threshold_drive,
    well_radius,
)

TRIPLING = OscillatorParams(delta=0.0, drive=1.4, kerr=1.0, drive_order="tripling")


def test_single_hamiltonian_diagonal_and_drive_entries():
    space = FockSpace(6, 1)
    params = OscillatorParams(delta=6.0, drive=1.4, kerr=1.0, drive_order="tripling")
    h = build_single_hamiltonian(params, space).toarray()
    # diagonal: delta*n + K*n*(n-1)
    assert h[2, 2] == pytest.approx(6.0 * 2 + 2.0)
    assert h[3, 3] == pytest.approx(6.0 * 3 + 6.0)
    # tripling drive: <0|H|3> = -r sqrt(3!)
    assert h[0, 3] == pytest.approx(-1.4 * np.sqrt(6.0))
    assert h[3, 0] == pytest.approx(-1.4 * np.sqrt(6.0))
    assert h[0, 2] == 0.0


def test_doubling_drive_entries():
    space = FockSpace(5, 1)
    params = OscillatorParams(delta=0.0, drive=0.9, kerr=1.0, drive_order="doubling")
    h = build_single_hamiltonian(params, space).toarray()
    assert h[0, 2] == pytest.approx(-0.9 * np.sqrt(2.0))
    assert h[1, 3] == pytest.approx(-0.9 * np.sqrt(6.0))
    assert h[0, 3] == 0.0


def test_hamiltonian_is_hermitian():
    space = FockSpace(8, 2)
    h = build_array_hamiltonian(TRIPLING, ArrayConfig.ring(2, 0.4), space).toarray()
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_coupling_term_matrix_element():
    space = FockSpace(3, 2)
    v = 0.4
    h = build_array_hamiltonian(
        TRIPLING.with_(drive=0.0), ArrayConfig.ring(2, v), space
    ).toarray()
    bra = fock_state(space, [1, 0]).amplitudes
    ket = fock_state(space, [0, 1]).amplitudes
    # H_i = -V (a0^dag a1 + a1^dag a0): <10|H|01> = -V
    assert bra.conj() @ h @ ket == pytest.approx(-v)


def test_parts_recombine_to_full_hamiltonian():
    space = FockSpace(5, 2)
    params = OscillatorParams(delta=2.5, drive=0.8, kerr=1.0, drive_order="tripling")
    config = ArrayConfig.ring(2, -0.3)
    static, drive_unit, number = hamiltonian_parts(params.with_(drive=0.0, delta=0.0), config, space)
    full = build_array_hamiltonian(params, config, space)
    recombined = static + 0.8 * drive_unit + 2.5 * number
    assert np.max(np.abs(recombined.toarray() - full.toarray())) < 1e-12


def test_array_config_validation():
    with pytest.raises(ValueError):
        ArrayConfig(3, ((0, 0, 1.0),))
    with pytest.raises(ValueError):
        ArrayConfig(3, ((0, 3, 1.0),))
    with pytest.raises(ValueError):
        ArrayConfig(3, ((0, 1, 1.0), (1, 0, 2.0)))
    ring = ArrayConfig.ring(4, 0.4)
    assert len(ring.couplings) == 4
    assert ring.is_uniform_ring()
    assert ArrayConfig.ring(2, 0.4).couplings == ((0, 1, 0.4),)


def test_schedule_endpoints_and_linearity():
    sch = SweepSchedule(r_max=1.4, delta_ini=6.0, t_f=100.0)
    assert sch.at(0.0) == pytest.approx((0.0, 6.0))
    assert sch.at(100.0) == pytest.approx((1.4, 0.0))
    assert sch.at(50.0) == pytest.approx((0.7, 3.0))


def test_classical_surface_value_at_minimum():
    # X0^2 = 12.5 at r = 1.4, delta = 0; surface value -16.4375 at the minimum
    x0 = well_radius(TRIPLING)
    assert x0**2 == pytest.approx(12.5, abs=1e-12)
    assert classical_surface(TRIPLING, x0, 0.0) == pytest.approx(-16.4375, abs=1e-10)
    gx, gy = classical_gradient(TRIPLING, x0, 0.0)
    assert abs(gx) < 1e-9 and abs(gy) < 1e-9


def test_classical_surface_threefold_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y = rng.normal(size=2) * 2
        r = np.hypot(x, y)
        th = np.arctan2(y, x)
        e0 = classical_surface(TRIPLING, x, y)
        for dth in (2 * np.pi / 3, -2 * np.pi / 3):
            e1 = classical_surface(TRIPLING, r * np.cos(th + dth), r * np.sin(th + dth))
            assert e1 == pytest.approx(e0, abs=1e-10)


def test_minima_threshold_against_grid_search():
    # oracle: brute-force grid search for off-origin minima on both sides
    # of the closed-form threshold r^2 = 8K(delta - 2K)/9
    params = OscillatorParams(delta=3.0, drive=0.0, kerr=1.0, drive_order="tripling")
    r_thr = minima_threshold_drive(params)
    assert r_thr == pytest.approx(np.sqrt(8.0 * (3.0 - 2.0) / 9.0), abs=1e-12)
    below = find_extrema(params.with_(drive=0.95 * r_thr))
    above = find_extrema(params.with_(drive=1.2 * r_thr))

    def off_origin(res):
        return [m for m in res.minima() if np.hypot(*m.position) > 1e-6]

    assert len(off_origin(below)) == 0
    assert len(off_origin(above)) == 3


def test_extrema_structure_at_reference_point():
    res = find_extrema(TRIPLING)
    minima = res.minima()
    saddles = res.saddles()
    assert len(minima) == 3
    assert len(saddles) == 3
    radii = sorted(np.hypot(*m.position) for m in minima)
    assert radii[0] == pytest.approx(radii[-1], abs=1e-8)
    assert radii[0] == pytest.approx(np.sqrt(12.5), abs=1e-6)
    # minima at angles 0, +-2pi/3
    angles = sorted(np.arctan2(m.position[1], m.position[0]) for m in minima)
    assert angles[1] == pytest.approx(0.0, abs=1e-6)
    assert angles[0] == pytest.approx(-2 * np.pi / 3, abs=1e-6)


def test_zero_coupling_spectrum_additivity():
    # eigenvalues of the V=0 two-site Hamiltonian are sums of single-site ones
    space1 = FockSpace(3, 1)
    space2 = FockSpace(3, 2)
    params = OscillatorParams(delta=1.2, drive=0.6, kerr=1.0, drive_order="tripling")
    h1 = np.linalg.eigvalsh(build_single_hamiltonian(params, space1).toarray())
    h2 = np.linalg.eigvalsh(
        build_array_hamiltonian(params, ArrayConfig.ring(2, 0.0), space2).toarray()
    )
    sums = np.sort(np.add.outer(h1, h1).ravel())
    assert np.max(np.abs(h2 - sums)) < 1e-8


def test_params_validation():
    with pytest.raises(ValueError):
        OscillatorParams(delta=0.0, drive=0.0, kerr=1.0, drive_order="quadrupling")
    with pytest.raises(ValueError):
        OscillatorParams(delta=0.0, drive=0.0, kerr=0.0)
