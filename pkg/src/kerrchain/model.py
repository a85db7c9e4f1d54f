"""Rotating-frame Hamiltonians, sweep schedules, and the classical surface.

All frequencies are in units of the Kerr coefficient K (kept as a field so
rescaling to lab units is a display concern). ``drive_order`` selects the
subharmonic: "tripling" uses a cubic drive term, "doubling" a quadratic one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import DimensionError, FockSpace, OperatorMatrix, destroy_op, embed_site, number_op

DRIVE_ORDERS = ("tripling", "doubling")


@dataclass(frozen=True)
class OscillatorParams:
    delta: float
    drive: float = 0.0
    kerr: float = 1.0
    drive_order: str = "tripling"

    def __post_init__(self):
        if self.kerr <= 0:
            raise ValueError("kerr must be positive")
        if self.drive < 0:
            raise ValueError("drive must be non-negative")
        if self.drive_order not in DRIVE_ORDERS:
            raise ValueError(f"drive_order must be one of {DRIVE_ORDERS}")

    def with_(self, **kw) -> "OscillatorParams":
        d = dict(delta=self.delta, drive=self.drive, kerr=self.kerr, drive_order=self.drive_order)
        d.update(kw)
        return OscillatorParams(**d)


@dataclass(frozen=True)
class ArrayConfig:
    """Coupling graph of the oscillator array.

    ``couplings`` is a tuple of (m, n, V) undirected edges with m < n; each
    edge contributes -V (a_m^dag a_n + a_n^dag a_m) to the Hamiltonian.
    """

    n_sites: int
    couplings: tuple = ()
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.boundary not in ("periodic", "open"):
            raise ValueError("boundary must be 'periodic' or 'open'")
        seen = set()
        canonical = []
        for m, n, v in self.couplings:
            if m == n:
                raise ValueError(f"self-coupling on site {m}")
            if not (0 <= m < self.n_sites and 0 <= n < self.n_sites):
                raise ValueError(f"edge ({m},{n}) out of range")
            key = (min(m, n), max(m, n))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canonical.append((key[0], key[1], float(v)))
        object.__setattr__(self, "couplings", tuple(canonical))

    @classmethod
    def ring(cls, n_sites: int, v: float) -> "ArrayConfig":
        """Uniform nearest-neighbor chain with periodic boundary conditions."""
        if n_sites == 1:
            edges = ()
        elif n_sites == 2:
            edges = ((0, 1, v),)
        else:
            edges = tuple((i, (i + 1) % n_sites, v) for i in range(n_sites))
        return cls(n_sites, edges, "periodic")

    @classmethod
    def chain(cls, n_sites: int, v: float) -> "ArrayConfig":
        edges = tuple((i, i + 1, v) for i in range(n_sites - 1))
        return cls(n_sites, edges, "open")

    def is_uniform_ring(self) -> bool:
        if self.boundary != "periodic" or self.n_sites < 3:
            return self.n_sites <= 2
        want = {(i, (i + 1) % self.n_sites) for i in range(self.n_sites)}
        want = {(min(a, b), max(a, b)) for a, b in want}
        have = {(m, n) for m, n, _ in self.couplings}
        vs = {v for _, _, v in self.couplings}
        return have == want and len(vs) == 1


@dataclass(frozen=True)
class SweepSchedule:
    """Linear ramp: drive 0 -> r_max while detuning delta_ini -> 0."""

    r_max: float
    delta_ini: float
    t_f: float

    def __post_init__(self):
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")

    def at(self, t: float):
        s = min(max(t, 0.0), self.t_f) / self.t_f
        return s * self.r_max, (1.0 - s) * self.delta_ini


def schedule_at(schedule: SweepSchedule, t: float):
    """(r, delta) at time t, clamped to [0, t_f]."""
    return schedule.at(t)


def _single_parts(params: OscillatorParams, space: FockSpace):
    """(kerr_term, drive_unit, number) for one mode; H = kerr + r*drive_unit + delta*number."""
    a = destroy_op(space)
    adag = a.dag()
    kerr = params.kerr * (adag @ adag @ a @ a)
    if params.drive_order == "tripling":
        d = a @ a @ a
    else:
        d = a @ a
    drive_unit = -1.0 * (d + d.dag())
    return kerr, drive_unit, number_op(space)


def build_single_hamiltonian(params: OscillatorParams, space: FockSpace) -> OperatorMatrix:
    """H0 = delta a^dag a + K a^dag^2 a^2 - r (a^p + a^dag^p), p = 3 or 2."""
    if space.n_modes != 1:
        raise DimensionError("single-oscillator Hamiltonian needs a single-mode space")
    kerr, drive_unit, num = _single_parts(params, space)
    h = kerr + params.drive * drive_unit + params.delta * num
    return OperatorMatrix(space, h.matrix, hermitian_hint=True)


def hamiltonian_parts(params: OscillatorParams, config: ArrayConfig, space: FockSpace):
    """Split the array Hamiltonian into (static, drive_unit, number) parts.

    H(r, delta) = static + r * drive_unit + delta * number. The static part
    holds the Kerr terms and the coupling; the two swept scalars multiply
    cached sparse matrices so propagation never rebuilds the Hamiltonian.
    """
    if space.n_modes != config.n_sites:
        raise DimensionError(
            f"space has {space.n_modes} modes but config has {config.n_sites} sites"
        )
    single = space.single_mode()
    kerr1, drive1, num1 = _single_parts(params, single)
    static = None
    drive_unit = None
    number = None
    for site in range(config.n_sites):
        k = embed_site(kerr1, site, space)
        d = embed_site(drive1, site, space)
        n = embed_site(num1, site, space)
        static = k if static is None else static + k
        drive_unit = d if drive_unit is None else drive_unit + d
        number = n if number is None else number + n
    a1 = destroy_op(single)
    for m, n, v in config.couplings:
        am = embed_site(a1, m, space)
        an = embed_site(a1, n, space)
        hop = am.dag() @ an
        static = static + (-v) * (hop + hop.dag())
    return (
        OperatorMatrix(space, static.matrix, hermitian_hint=True),
        OperatorMatrix(space, drive_unit.matrix, hermitian_hint=True),
        OperatorMatrix(space, number.matrix, hermitian_hint=True),
    )


def build_array_hamiltonian(
    params: OscillatorParams, config: ArrayConfig, space: FockSpace
) -> OperatorMatrix:
    static, drive_unit, number = hamiltonian_parts(params, config, space)
    h = static + params.drive * drive_unit + params.delta * number
    return OperatorMatrix(space, h.matrix, hermitian_hint=True)


# --- classical phase-space surface -----------------------------------------
#
# H0(X, Y) = delta/2 (X^2+Y^2-1) + K/4 [(X^2+Y^2-2)^2 - 1] - r (X^3 - 3 X Y^2)/sqrt(2)
#
# The cubic is the unique real three-fold-symmetric form, equal to
# 2^{3/2} Re[(X+iY)/sqrt(2)]^3, consistent with the operator drive term
# evaluated on coherent states.


def classical_surface(params: OscillatorParams, X, Y):
    if params.drive_order != "tripling":
        raise ValueError("classical surface is defined for the tripling drive")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    s = X**2 + Y**2
    quad = 0.5 * params.delta * (s - 1.0) + 0.25 * params.kerr * ((s - 2.0) ** 2 - 1.0)
    cubic = -params.drive * (X**3 - 3.0 * X * Y**2) / np.sqrt(2.0)
    out = quad + cubic
    return float(out) if out.ndim == 0 else out


def classical_gradient(params: OscillatorParams, X: float, Y: float):
    s = X * X + Y * Y
    k, d, r = params.kerr, params.delta, params.drive
    gx = d * X + k * X * (s - 2.0) - 3.0 * r * (X * X - Y * Y) / np.sqrt(2.0)
    gy = d * Y + k * Y * (s - 2.0) + 6.0 * r * X * Y / np.sqrt(2.0)
    return np.array([gx, gy])


def classical_hessian(params: OscillatorParams, X: float, Y: float):
    s = X * X + Y * Y
    k, d, r = params.kerr, params.delta, params.drive
    c = 1.0 / np.sqrt(2.0)
    hxx = d + k * (s - 2.0) + 2.0 * k * X * X - 6.0 * r * X * c
    hyy = d + k * (s - 2.0) + 2.0 * k * Y * Y + 6.0 * r * X * c
    hxy = 2.0 * k * X * Y + 6.0 * r * Y * c
    return np.array([[hxx, hxy], [hxy, hyy]])


def well_radius(params: OscillatorParams):
    """Distance X0 of the off-origin minima from the origin, or None.

    Stationarity along Y=0 gives K X^2 - (3r/sqrt(2)) X + (delta - 2K) = 0;
    the larger root is the minimum radius when it exists.
    """
    k, d, r = params.kerr, params.delta, params.drive
    if r == 0:
        return np.sqrt(2.0 - d / k) if d < 2 * k else None
    b = 3.0 * r / np.sqrt(2.0) / k
    disc = b * b - 4.0 * (d / k - 2.0)
    if disc < 0:
        return None
    x0 = (b + np.sqrt(disc)) / 2.0
    return x0 if x0 > 0 else None


def minima_threshold_drive(params: OscillatorParams) -> float:
    """Critical drive above which the three off-origin minima exist."""
    k, d = params.kerr, params.delta
    return np.sqrt(8.0 * k * (d - 2.0 * k) / 9.0) if d > 2 * k else 0.0


@dataclass(frozen=True)
class ClassicalExtremum:
    position: tuple
    energy: float
    kind: str  # "minimum", "saddle", or "maximum"


@dataclass(frozen=True)
class ExtremaResult:
    extrema: tuple
    degenerate_ring: bool = False
    ring_radius: float = None

    def minima(self):
        return [e for e in self.extrema if e.kind == "minimum"]

    def saddles(self):
        return [e for e in self.extrema if e.kind == "saddle"]


class ExtremaSearchError(RuntimeError):
    pass


def find_extrema(params: OscillatorParams, grid_n: int = 64, grad_tol: float = 1e-10) -> ExtremaResult:
    """All stationary points of the classical surface, Newton-polished.

    Seeds come from a grid over a box scaled to the estimated well radius.
    The undriven below-threshold case (r=0, delta < 2K) has a degenerate
    ring of minima and is returned flagged instead of as a point list.
    """
    if params.drive_order != "tripling":
        raise ValueError("find_extrema is defined for the tripling drive")
    if params.drive == 0:
        origin = _classify_point(params, 0.0, 0.0)
        if params.delta < 2 * params.kerr:
            rad = np.sqrt(2.0 - params.delta / params.kerr)
            return ExtremaResult((origin,), degenerate_ring=True, ring_radius=rad)
        return ExtremaResult((origin,))

    x0_est = well_radius(params) or 1.0
    half = 1.5 * max(x0_est, 1.0)
    pts = np.linspace(-half, half, grid_n)
    found = []
    for sx in pts:
        for sy in pts:
            sol = _newton(params, sx, sy, grad_tol)
            if sol is None:
                continue
            x, y = sol
            if abs(x) > half + 1e-6 or abs(y) > half + 1e-6:
                continue
            if any((x - fx) ** 2 + (y - fy) ** 2 < 1e-12 for fx, fy in found):
                continue
            found.append((x, y))
    if not found:
        raise ExtremaSearchError(f"no stationary points converged for {params}")
    extrema = tuple(_classify_point(params, x, y) for x, y in sorted(found))
    return ExtremaResult(extrema)


def _newton(params, x, y, grad_tol, max_iter=60):
    for _ in range(max_iter):
        g = classical_gradient(params, x, y)
        if np.dot(g, g) < grad_tol**2:
            return x, y
        h = classical_hessian(params, x, y)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)) or np.dot(step, step) > 1e4:
            return None
        x, y = x - step[0], y - step[1]
    return None


def _classify_point(params, x, y, tol=1e-8):
    w = np.linalg.eigvalsh(classical_hessian(params, x, y))
    scale = max(abs(w).max(), 1.0)
    if w[0] > tol * scale:
        kind = "minimum"
    elif w[1] < -tol * scale:
        kind = "maximum"
    else:
        kind = "saddle"
    return ClassicalExtremum((float(x), float(y)), float(classical_surface(params, x, y)), kind)
