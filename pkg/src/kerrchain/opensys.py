"""Dissipative single-oscillator diagnostics.

Lindblad steady states on the truncated Fock space, Wigner distributions via
the Laguerre-polynomial recurrence, origin-curvature diagnostics and scans,
classical drift fixed points with the three-state threshold, a semiclassical
Fokker-Planck steady state, and the two-level avoided-crossing transition
probability.

Conventions: alpha = (X + iY)/sqrt(2); W is normalized so that the vacuum
has W(0) = 2/pi and the plane integral is 1. The reported origin curvature
is d^2 W / (d alpha d alpha*) = (1/4) (d_xx + d_yy) W with x = Re alpha.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import gammaln

from .fock import DensityMatrix, DimensionError, FockSpace, OperatorMatrix, destroy_op
from .model import OscillatorParams, build_single_hamiltonian, well_radius


@dataclass(frozen=True)
class DissipationParams:
    kappa: float
    nbar: float = 0.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")


class SteadyStateError(RuntimeError):
    pass


def liouvillian(params: OscillatorParams, diss: DissipationParams, space: FockSpace) -> OperatorMatrix:
    """Vectorized generator: d vec(rho)/dt = L vec(rho), row-major vec.

    L = -i[H, .] + (kappa/2)(nbar+1) D[a] + (kappa/2) nbar D[a^dag] with
    D[c] rho = 2 c rho c^dag - c^dag c rho - rho c^dag c.
    """
    if space.n_modes != 1:
        raise DimensionError("liouvillian requires a single-mode space")
    h = build_single_hamiltonian(params, space).matrix
    a = destroy_op(space).matrix
    adag = a.getH()
    eye = sp.identity(space.dim, dtype=complex, format="csr")

    def spre_spost(A, B):
        # row-major vec(A rho B) = kron(A, B.T) vec(rho)
        return sp.kron(A, B.T, format="csr")

    lind = -1j * (spre_spost(h, eye) - spre_spost(eye, h))
    k_down = 0.5 * diss.kappa * (diss.nbar + 1.0)
    lind = lind + k_down * (
        2.0 * spre_spost(a, adag) - spre_spost(adag @ a, eye) - spre_spost(eye, adag @ a)
    )
    if diss.nbar > 0:
        k_up = 0.5 * diss.kappa * diss.nbar
        lind = lind + k_up * (
            2.0 * spre_spost(adag, a) - spre_spost(a @ adag, eye) - spre_spost(eye, a @ adag)
        )
    return OperatorMatrix(FockSpace(space.dim**2, 1), lind)


def steady_state(
    lind: OperatorMatrix, check_unique: bool = False, residual_rtol: float = 1e-10
) -> DensityMatrix:
    """Unique trace-one solution of L rho = 0 by sparse direct solve.

    One row of L is replaced by the trace constraint. The residual of the
    unmodified generator on the solution is checked against
    ``residual_rtol * max|L|``.
    """
    m = lind.matrix
    d2 = m.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2:
        raise ValueError("liouvillian dimension is not a perfect square")
    scale = abs(m.data).max() if m.nnz else 1.0

    a = m.tolil(copy=True)
    a[0, :] = 0.0
    for i in range(d):
        a[0, i * d + i] = scale
    b = np.zeros(d2, dtype=complex)
    b[0] = scale
    x = spla.spsolve(a.tocsc(), b)
    if not np.all(np.isfinite(x)):
        raise SteadyStateError("sparse solve returned non-finite entries")

    residual = float(np.abs(m @ x).max())
    if residual > residual_rtol * scale:
        raise SteadyStateError(f"residual {residual:g} exceeds {residual_rtol:g} * |L|")
    if check_unique:
        try:
            vals = spla.eigs(m, k=2, sigma=0.0, which="LM", return_eigenvectors=False)
        except Exception as exc:  # noqa: BLE001 - diagnostics only
            raise SteadyStateError(f"null-space probe failed: {exc}") from exc
        second = sorted(abs(vals))[1]
        if second < 1e-10 * scale:
            raise SteadyStateError("degenerate steady state: null space dimension > 1")

    rho = x.reshape(d, d)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.real(np.trace(rho))
    return DensityMatrix(FockSpace(d, 1), rho)


# --- Wigner distribution -----------------------------------------------------


@dataclass
class WignerGrid:
    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray  # values[iy, ix]
    spacing: float
    mass_captured: float = 1.0
    low_mass_warning: bool = False

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.x_axis, axis=1), self.y_axis))

    def value_at_origin(self) -> float:
        ix = int(np.argmin(np.abs(self.x_axis)))
        iy = int(np.argmin(np.abs(self.y_axis)))
        return float(self.values[iy, ix])

    def to_csv(self, path) -> None:
        """Matrix CSV with x header row and y header column."""
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y\\x"] + [repr(float(x)) for x in self.x_axis])
            for iy, y in enumerate(self.y_axis):
                w.writerow([repr(float(y))] + [repr(float(v)) for v in self.values[iy]])


def wigner_points(rho: DensityMatrix, alphas: np.ndarray) -> np.ndarray:
    """W evaluated at arbitrary complex phase-space points.

    Laguerre-recurrence evaluation over the Fock matrix of rho; cost is
    O(cutoff^2) per point, vectorized over the point array.
    """
    r = rho.matrix
    m_dim = r.shape[0]
    a = np.asarray(alphas, dtype=complex)
    shape = a.shape
    a = a.ravel()
    x = 4.0 * np.abs(a) ** 2
    envelope = np.exp(-0.5 * x)
    w = np.zeros(a.size)
    # For each diagonal offset k, run the normalized generalized-Laguerre
    # three-term recurrence in m; each g equals the Wigner transform of
    # |m><m+k| up to the global 2/pi, and stays O(1), so the upward sweep
    # is numerically stable.
    for k in range(m_dim):
        g_prev = np.zeros(a.size, dtype=complex)
        g = (2.0 * a) ** k * np.exp(-0.5 * gammaln(k + 1.0)) * envelope
        for m in range(m_dim - k):
            if m > 0:
                c1 = (2.0 * m + k - 1.0 - x) / np.sqrt(m * (m + k))
                c2 = np.sqrt((m - 1.0) * (m - 1.0 + k) / (m * (m + k))) if m > 1 else 0.0
                g, g_prev = -c1 * g - c2 * g_prev, g
            if k == 0:
                w += np.real(r[m, m]) * np.real(g)
            else:
                w += 2.0 * np.real(r[m, m + k] * g)
    return (2.0 / np.pi) * w.reshape(shape)


def default_half_width(params: OscillatorParams = None) -> float:
    if params is None:
        return 4.0
    x0 = well_radius(params)
    return max(4.0, 1.5 * x0 / np.sqrt(2.0)) if x0 else 4.0


def wigner(rho: DensityMatrix, half_width: float = None, npts: int = 151, params: OscillatorParams = None) -> WignerGrid:
    """Wigner distribution on a square (Re alpha, Im alpha) grid."""
    if half_width is None:
        half_width = default_half_width(params)
    if npts % 2 == 0:
        npts += 1  # keep a node at the origin
    axis = np.linspace(-half_width, half_width, npts)
    x, y = np.meshgrid(axis, axis)
    vals = wigner_points(rho, x + 1j * y)
    grid = WignerGrid(axis, axis.copy(), vals, float(axis[1] - axis[0]))
    grid.mass_captured = grid.integral()
    grid.low_mass_warning = abs(grid.mass_captured - 1.0) > 1e-2
    return grid


def laplacian_from_grid(grid: WignerGrid) -> float:
    """(1/4)(d_xx + d_yy) W at the grid node nearest the origin."""
    ix = int(np.argmin(np.abs(grid.x_axis)))
    iy = int(np.argmin(np.abs(grid.y_axis)))
    h = grid.spacing
    v = grid.values
    lap = (
        v[iy, ix + 1] + v[iy, ix - 1] + v[iy + 1, ix] + v[iy - 1, ix] - 4.0 * v[iy, ix]
    ) / h**2
    return 0.25 * float(lap)


def laplacian_at_origin(rho_or_grid, step: float = 0.1, rel_tol: float = 1e-3):
    """Origin curvature d_alpha d_alpha* W via Richardson-extrapolated stencils.

    Accepts a DensityMatrix (direct point evaluation) or a WignerGrid
    (finite differences on the stored grid, no extrapolation).
    """
    if isinstance(rho_or_grid, WignerGrid):
        return laplacian_from_grid(rho_or_grid)
    rho = rho_or_grid

    def five_point(h):
        pts = np.array([0.0, h, -h, 1j * h, -1j * h])
        w = wigner_points(rho, pts)
        return (w[1] + w[2] + w[3] + w[4] - 4.0 * w[0]) / h**2

    l_h = five_point(step)
    l_2 = five_point(step / 2.0)
    l_4 = five_point(step / 4.0)
    rich_coarse = (4.0 * l_2 - l_h) / 3.0
    value = (4.0 * l_4 - l_2) / 3.0
    spread = abs(value - rich_coarse)
    if spread > max(rel_tol * abs(value), 2e-4):
        raise RuntimeError(f"origin-curvature extrapolation not converged (spread {spread:g})")
    return 0.25 * float(value)


# --- scans --------------------------------------------------------------------


@dataclass
class ScanTable:
    axis1_name: str
    axis2_name: str
    rows: list = field(default_factory=list)  # (v1, v2, laplacian or None, sign, error)

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.axis1_name, self.axis2_name, "laplacian", "sign"])
            for v1, v2, lap, sign, err in self.rows:
                w.writerow(
                    [repr(float(v1)), repr(float(v2)), "" if lap is None else repr(float(lap)), sign]
                )

    def sign_map(self) -> dict:
        return {(v1, v2): sign for v1, v2, _, sign, _ in self.rows}

    def positive_region(self, axis2_value):
        """Axis-1 values with positive origin curvature at fixed axis-2 value."""
        return [v1 for v1, v2, lap, sign, _ in self.rows if v2 == axis2_value and sign > 0]


_SCAN_KEYS = {"r", "kappa", "nbar", "delta"}


def _scan_point(base_params: OscillatorParams, base_diss: DissipationParams, space, assignments):
    params, diss = base_params, base_diss
    for name, value in assignments:
        if name == "r":
            params = params.with_(drive=value)
        elif name == "delta":
            params = params.with_(delta=value)
        elif name == "kappa":
            diss = DissipationParams(kappa=value, nbar=diss.nbar)
        elif name == "nbar":
            diss = DissipationParams(kappa=diss.kappa, nbar=value)
    rho = steady_state(liouvillian(params, diss, space))
    return laplacian_at_origin(rho)


def scan_laplacian(
    axis1,
    axis2,
    base_params: OscillatorParams,
    base_diss: DissipationParams,
    space: FockSpace,
    threads: int = 1,
) -> ScanTable:
    """Origin-curvature table over two parameter axes.

    ``axis1``/``axis2`` are (name, values) pairs with names among
    {r, kappa, nbar, delta}. Per-point failures are recorded and the scan
    continues.
    """
    name1, vals1 = axis1
    name2, vals2 = axis2
    for name in (name1, name2):
        if name not in _SCAN_KEYS:
            raise ValueError(f"axis {name!r} not in {sorted(_SCAN_KEYS)}")
    points = [(v1, v2) for v1 in vals1 for v2 in vals2]

    def run(pt):
        v1, v2 = pt
        try:
            lap = _scan_point(base_params, base_diss, space, [(name1, v1), (name2, v2)])
            return (float(v1), float(v2), lap, int(np.sign(lap)), None)
        except Exception as exc:  # noqa: BLE001 - per-point failures are data
            return (float(v1), float(v2), None, 0, str(exc))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, points))
    else:
        rows = [run(pt) for pt in points]
    return ScanTable(name1, name2, rows)


# --- classical drift ------------------------------------------------------------


@dataclass(frozen=True)
class FixedPointReport:
    points: tuple  # ((alpha, stable), ...), alpha complex
    three_state_regime: bool  # direct count of stable nonzero fixed points == 3
    inequality_three_state: bool  # closed-form threshold prediction

    def stable_points(self):
        return [alpha for alpha, stable in self.points if stable]

    @property
    def consistent(self) -> bool:
        return self.three_state_regime == self.inequality_three_state


def drift_velocity(params: OscillatorParams, diss: DissipationParams, alpha):
    """First-derivative (classical) part of the phase-space equation of motion."""
    k, d, r = params.kerr, params.delta, params.drive
    return (
        -1j * (d + 2.0 * k * (np.abs(alpha) ** 2 - 1.0)) * alpha
        + 3j * r * np.conj(alpha) ** 2
        - 0.5 * diss.kappa * alpha
    )


def _drift_jacobian(params, diss, alpha):
    k, r = params.kerr, params.drive
    aa = -1j * (params.delta + 2.0 * k * (2.0 * np.abs(alpha) ** 2 - 1.0)) - 0.5 * diss.kappa
    bb = -2j * k * alpha**2 + 6j * r * np.conj(alpha)
    return np.array(
        [
            [np.real(aa + bb), -np.imag(aa - bb)],
            [np.imag(aa + bb), np.real(aa - bb)],
        ]
    )


def _is_stable(params, diss, alpha) -> bool:
    eigs = np.linalg.eigvals(_drift_jacobian(params, diss, alpha))
    return bool(np.all(np.real(eigs) < 0))


def three_state_inequality(params: OscillatorParams, diss: DissipationParams) -> bool:
    """(3r/2K)^2 > sqrt((2 - D/K)^2 + (kappa/2K)^2) - 2 + D/K."""
    k = params.kerr
    lhs = (3.0 * params.drive / (2.0 * k)) ** 2
    rhs = np.sqrt((2.0 - params.delta / k) ** 2 + (diss.kappa / (2.0 * k)) ** 2) - 2.0 + params.delta / k
    return bool(lhs > rhs)


def classical_fixed_points(params: OscillatorParams, diss: DissipationParams) -> FixedPointReport:
    """Fixed points of the drift field with linear-stability labels.

    Nonzero fixed points solve 9 r^2 u = [D + 2K(u-1)]^2 + kappa^2/4 for
    u = |alpha|^2 (a quadratic), with the phase set by the residual relation;
    every candidate is Newton-polished and classified by the Jacobian.
    """
    if params.drive_order != "tripling":
        raise ValueError("classical_fixed_points is defined for the tripling drive")
    k, d, r, kap = params.kerr, params.delta, params.drive, diss.kappa
    points = [(0j, _is_stable(params, diss, 0j))]
    if r > 0:
        a2 = 4.0 * k * k
        a1 = 4.0 * k * (d - 2.0 * k) - 9.0 * r * r
        a0 = (d - 2.0 * k) ** 2 + kap * kap / 4.0
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc >= 0:
            for root_sign in (+1.0, -1.0):
                u = (-a1 + root_sign * np.sqrt(disc)) / (2.0 * a2)
                if u <= 1e-12:
                    continue
                rho = np.sqrt(u)
                dd = d + 2.0 * k * (u - 1.0)
                target = (kap / 2.0 + 1j * dd) / (3j * r * rho)
                theta0 = -np.angle(target) / 3.0
                for branch in range(3):
                    alpha = rho * np.exp(1j * (theta0 + 2.0 * np.pi * branch / 3.0))
                    alpha = _newton_polish(params, diss, alpha)
                    if alpha is None:
                        continue
                    points.append((alpha, _is_stable(params, diss, alpha)))
    # deduplicate (polishing may merge branches at degeneracies)
    unique = []
    for alpha, stable in points:
        if not any(abs(alpha - b) < 1e-8 for b, _ in unique):
            unique.append((alpha, stable))
    n_stable_nonzero = sum(1 for alpha, stable in unique if stable and abs(alpha) > 1e-8)
    return FixedPointReport(
        points=tuple(unique),
        three_state_regime=(n_stable_nonzero == 3),
        inequality_three_state=three_state_inequality(params, diss),
    )


def _newton_polish(params, diss, alpha, tol=1e-12, max_iter=50):
    z = np.array([alpha.real, alpha.imag])
    for _ in range(max_iter):
        v = drift_velocity(params, diss, z[0] + 1j * z[1])
        f = np.array([v.real, v.imag])
        if np.dot(f, f) < tol**2:
            return z[0] + 1j * z[1]
        jac = _drift_jacobian(params, diss, z[0] + 1j * z[1])
        try:
            z = z - np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
    return None


# --- semiclassical Fokker-Planck steady state -----------------------------------


def semiclassical_steady_state(
    params: OscillatorParams,
    diss: DissipationParams,
    half_width: float = None,
    npts: int = 121,
) -> WignerGrid:
    """Steady state of the drift-diffusion truncation of the phase-space equation.

    Third-derivative (quantum) terms are dropped; the dissipative diffusion
    coefficient is kappa (nbar + 1/2)/4 per Cartesian axis. Finite-volume
    discretization: upwind advection, central diffusion, zero-flux walls.
    """
    if diss.kappa <= 0:
        raise ValueError("semiclassical steady state requires kappa > 0")
    if half_width is None:
        report = classical_fixed_points(params, diss)
        radius = max((abs(a) for a, _ in report.points), default=0.0)
        half_width = max(2.5, 1.8 * radius)
    if npts % 2 == 0:
        npts += 1
    axis = np.linspace(-half_width, half_width, npts)
    h = float(axis[1] - axis[0])
    diffusion = diss.kappa * (diss.nbar + 0.5) / 4.0

    n = npts

    def vel(xx, yy):
        v = drift_velocity(params, diss, xx + 1j * yy)
        return v.real, v.imag

    idx = lambda i, j: i * n + j  # i indexes y, j indexes x  # noqa: E731
    data, rows, cols = [], [], []

    def add(i, j, i2, j2, coeff):
        rows.append(idx(i, j))
        cols.append(idx(i2, j2))
        data.append(coeff)

    for i in range(n):
        for j in range(n):
            # x-direction faces (j +/- 1/2)
            if j + 1 < n:
                u, _ = vel(0.5 * (axis[j] + axis[j + 1]), axis[i])
                # advective upwind flux out of cell (i,j) through +x face
                if u >= 0:
                    add(i, j, i, j, -u / h)
                    add(i, j + 1, i, j, u / h)
                else:
                    add(i, j, i, j + 1, -u / h)
                    add(i, j + 1, i, j + 1, u / h)
                # diffusive flux
                add(i, j, i, j + 1, diffusion / h**2)
                add(i, j, i, j, -diffusion / h**2)
                add(i, j + 1, i, j, diffusion / h**2)
                add(i, j + 1, i, j + 1, -diffusion / h**2)
            # y-direction faces (i +/- 1/2)
            if i + 1 < n:
                _, u = vel(axis[j], 0.5 * (axis[i] + axis[i + 1]))
                if u >= 0:
                    add(i, j, i, j, -u / h)
                    add(i + 1, j, i, j, u / h)
                else:
                    add(i, j, i + 1, j, -u / h)
                    add(i + 1, j, i + 1, j, u / h)
                add(i, j, i + 1, j, diffusion / h**2)
                add(i, j, i, j, -diffusion / h**2)
                add(i + 1, j, i, j, diffusion / h**2)
                add(i + 1, j, i + 1, j, -diffusion / h**2)

    a = sp.csr_matrix((data, (rows, cols)), shape=(n * n, n * n)).tolil()
    # replace the corner-cell equation with the normalization constraint
    a[0, :] = h * h
    b = np.zeros(n * n)
    b[0] = 1.0
    w = spla.spsolve(a.tocsc(), b)
    if not np.all(np.isfinite(w)):
        raise SteadyStateError("Fokker-Planck solve returned non-finite entries")
    vals = w.reshape(n, n)
    vals = vals / (vals.sum() * h * h)

    grid = WignerGrid(axis, axis.copy(), vals, h)
    boundary_mass = (
        vals[0, :].sum() + vals[-1, :].sum() + vals[1:-1, 0].sum() + vals[1:-1, -1].sum()
    ) * h * h
    grid.mass_captured = 1.0 - float(boundary_mass)
    grid.low_mass_warning = boundary_mass > 1e-3
    return grid


def landau_zener(gap_half: float, rate_param: float) -> float:
    """Transition probability 1 - exp(-pi Omega^2 / beta^2)."""
    if rate_param == 0:
        raise ZeroDivisionError("rate parameter must be nonzero")
    return 1.0 - np.exp(-np.pi * gap_half**2 / rate_param**2)
