"""Implicit cell-centered finite volume assembly for the composite grid.

Each subdomain advances the heat equation with its own time step using
backward Euler and two-point fluxes.  The interface between the fine and
coarse subdomains is closed in one of four ways: the coupling either
introduces explicit interface pressure/flux unknowns on the face ("is1") or
expresses interface fluxes through the neighbor cell values across the face
("is2", overlapping), and either subdomain may act as the master whose
pressure supplies the Dirichlet data, the other returning its flux as
Neumann data.  The window system collecting all fine sub-levels, the coarse
level and (for "is1") the interface unknowns is also assembled monolithically
as a direct-solve reference.

Sign convention: fluxes are oriented left to right, u = (p_right - p_left) / d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse

from .errors import ConfigurationError, DimensionError
from .grid import CompositeGrid
from .projection import COARSE, FINE, Trace

IS1 = "is1"  # interface-unknown coupling
IS2 = "is2"  # overlapping coupling


@dataclass(frozen=True)
class Variant:
    """One of the four interface coupling schemes."""

    interface_scheme: str  # IS1 or IS2
    master: str  # "fine" or "coarse"

    def __post_init__(self) -> None:
        if self.interface_scheme not in (IS1, IS2):
            raise ConfigurationError(f"unknown interface scheme {self.interface_scheme!r}")
        if self.master not in (FINE, COARSE):
            raise ConfigurationError(f"master must be 'fine' or 'coarse', got {self.master!r}")

    @property
    def slave(self) -> str:
        return COARSE if self.master == FINE else FINE

    @property
    def name(self) -> str:
        return f"{self.interface_scheme}-{self.master}"

    @classmethod
    def parse(cls, name: str) -> "Variant":
        try:
            scheme, master = name.strip().lower().split("-")
            return cls(scheme, master)
        except (ValueError, ConfigurationError):
            raise ConfigurationError(
                f"variant must be one of is1-fine, is1-coarse, is2-fine, is2-coarse; got {name!r}"
            ) from None


VARIANTS = (
    Variant(IS1, FINE),
    Variant(IS1, COARSE),
    Variant(IS2, FINE),
    Variant(IS2, COARSE),
)


@dataclass(frozen=True)
class Problem:
    """Data of the continuous problem dp/dt - d2p/dx2 = f.

    All callables must accept numpy arrays (broadcasting over x and t).
    When ``exact_solution`` is set, the other fields are derived from it
    (manufactured mode) except that the boundary data may be zeroed.
    """

    source: Callable
    p0: Callable
    g_lo: Callable
    g_hi: Callable
    exact_solution: Callable | None = None


def manufactured_problem(homogeneous_boundary: bool = False) -> Problem:
    """Bump solution p = exp(20(t - t^2) - 37x^2 + 8x - 1) with its induced
    source f = p * (20(1 - 2t) - (8 - 74x)^2 + 74) and boundary traces."""

    def exact(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.exp(20.0 * (t - t * t) - 37.0 * x * x + 8.0 * x - 1.0)

    def source(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return exact(x, t) * (20.0 * (1.0 - 2.0 * t) - (8.0 - 74.0 * x) ** 2 + 74.0)

    if homogeneous_boundary:
        g_lo = _zero_of_t
        g_hi = _zero_of_t
    else:
        g_lo = lambda t: exact(0.0, t)  # noqa: E731
        g_hi = lambda t: exact(1.0, t)  # noqa: E731

    return Problem(
        source=source,
        p0=lambda x: exact(x, 0.0),
        g_lo=g_lo,
        g_hi=g_hi,
        exact_solution=exact,
    )


def _zero_of_t(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def _zero_of_x(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def zero_problem() -> Problem:
    """All data zero; the exact solution is identically zero."""
    return Problem(
        source=lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape),
        p0=_zero_of_x,
        g_lo=_zero_of_t,
        g_hi=_zero_of_t,
        exact_solution=lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape),
    )


def polynomial_problem(source_coeffs, initial_coeffs) -> Problem:
    """Source f(x) and initial value p0(x) given as ascending polynomial
    coefficients in x; homogeneous Dirichlet data, no exact solution."""
    sc = np.asarray(source_coeffs, dtype=float)
    ic = np.asarray(initial_coeffs, dtype=float)
    return Problem(
        source=lambda x, t: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), sc)
        + 0.0 * np.asarray(t, dtype=float),
        p0=lambda x: np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), ic),
        g_lo=_zero_of_t,
        g_hi=_zero_of_t,
        exact_solution=None,
    )


# -- source quadrature --------------------------------------------------------

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)


def slab_source_averages(problem: Problem, faces: np.ndarray, t0: float, t1: float) -> np.ndarray:
    """Space-time averages of the source over each cell of ``faces`` times
    the slab (t0, t1), by 3-point tensor Gauss-Legendre quadrature."""
    faces = np.asarray(faces, dtype=float)
    xc = 0.5 * (faces[:-1] + faces[1:])
    hx = np.diff(faces)
    xs = xc[:, None] + 0.5 * hx[:, None] * _GAUSS_NODES[None, :]  # (n, 3)
    ts = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * _GAUSS_NODES  # (3,)
    vals = problem.source(xs[:, :, None], ts[None, None, :])  # (n, 3, 3)
    # weights sum to 2 per axis on [-1, 1]; averaging divides the 4 back out
    return np.einsum("i,j,nij->n", _GAUSS_WEIGHTS, _GAUSS_WEIGHTS, vals) / 4.0


def cell_average_source(
    problem: Problem, cell: tuple[float, float], time_interval: tuple[float, float]
) -> float:
    """Average of the source over one space-time cell (order >= 3 per axis)."""
    return float(
        slab_source_averages(problem, np.array(cell, dtype=float), *time_interval)[0]
    )


@dataclass(frozen=True)
class WindowInputs:
    """Per-window precomputed data: slab-averaged sources and boundary values,
    shared by the predictor, the corrector sweeps and the monolithic system."""

    window: int
    fine_source: np.ndarray  # (K, n_fine)
    coarse_source: np.ndarray  # (n_coarse,)
    g_lo_fine: np.ndarray  # (K,) left boundary value at fine slab midpoints
    g_lo_coarse: float  # left boundary value at the coarse slab midpoint
    g_hi_coarse: float  # right boundary value at the coarse slab midpoint

    @property
    def predictor_fine_source(self) -> np.ndarray:
        # coarse-slab average on fine cells = mean of the fine-slab averages
        return self.fine_source.mean(axis=0)


def precompute_window_inputs(grid: CompositeGrid, window: int, problem: Problem) -> WindowInputs:
    ratio = grid.ratio
    fine_source = np.empty((ratio, grid.n_fine))
    for k in range(1, ratio + 1):
        fine_source[k - 1] = slab_source_averages(problem, grid.faces_fine, *grid.fine_slab(window, k))
    coarse_source = slab_source_averages(problem, grid.faces_coarse, *grid.coarse_slab(window))
    mid_fine = np.array([grid.fine_midtime(window, k) for k in range(1, ratio + 1)])
    mid_coarse = grid.coarse_midtime(window)
    return WindowInputs(
        window=window,
        fine_source=fine_source,
        coarse_source=coarse_source,
        g_lo_fine=np.atleast_1d(np.asarray(problem.g_lo(mid_fine), dtype=float)),
        g_lo_coarse=float(problem.g_lo(mid_coarse)),
        g_hi_coarse=float(problem.g_hi(mid_coarse)),
    )


# -- linear systems -----------------------------------------------------------


@dataclass
class LinearSystem:
    """Square system with labeled unknowns, stored banded (tridiagonal
    subdomain steps) or sparse (monolithic window systems)."""

    rhs: np.ndarray
    labels: tuple[str, ...]
    bands: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None  # (lower, diag, upper)
    sparse: scipy.sparse.csr_matrix | None = None

    def __post_init__(self) -> None:
        if (self.bands is None) == (self.sparse is None):
            raise DimensionError("LinearSystem needs exactly one of bands or sparse")
        if self.sparse is not None and self.sparse.shape != (self.n, self.n):
            raise DimensionError("matrix and right-hand side sizes differ")

    @property
    def n(self) -> int:
        return self.rhs.size

    @property
    def matrix(self) -> scipy.sparse.csr_matrix:
        if self.sparse is not None:
            return self.sparse
        lower, diag, upper = self.bands
        return scipy.sparse.diags(
            [lower[1:], diag, upper[:-1]], offsets=[-1, 0, 1], format="csr"
        )


@dataclass(frozen=True)
class InterfaceClosure:
    """Interface data for a single-subdomain solve.

    kind:
      - "dirichlet_interface": given interface pressure; flux (p_eps - p_K) / d_own
      - "dirichlet_neighbor":  given neighbor cell value; flux (P - p_K) / d_across
      - "neumann":             given flux inserted directly
    The trace resolution must match the subdomain being solved.
    """

    kind: str
    trace: Trace

    def __post_init__(self) -> None:
        if self.kind not in ("dirichlet_interface", "dirichlet_neighbor", "neumann"):
            raise DimensionError(f"unknown closure kind {self.kind!r}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind != "neumann"


def _tridiag_base(widths: np.ndarray, centers: np.ndarray, dt: float, source, prev):
    """Mass and interior-flux part shared by every subdomain step."""
    n = widths.size
    lower = np.zeros(n)
    diag = widths / dt
    upper = np.zeros(n)
    rhs = widths * source + (widths / dt) * np.asarray(prev, dtype=float)
    if n > 1:
        inv_d = 1.0 / np.diff(centers)
        diag[:-1] += inv_d
        diag[1:] += inv_d
        upper[:-1] -= inv_d
        lower[1:] -= inv_d
    return lower, diag, upper, rhs


def assemble_subdomain_step(
    grid: CompositeGrid,
    subdomain: str,
    window: int,
    k: int | None,
    state_prev: np.ndarray,
    closure: InterfaceClosure,
    problem: Problem,
    inputs: WindowInputs | None = None,
) -> LinearSystem:
    """Tridiagonal system for one time level of one subdomain.

    For the fine subdomain ``k`` is the sub-level in 1..K and ``state_prev``
    the values at sub-level k-1; for the coarse subdomain ``k`` is ignored
    and ``state_prev`` holds the window-start values.  The exterior end gets
    the half-cell Dirichlet flux u = (g - p_K) / (h/2); the interface end is
    closed per ``closure``.
    """
    if subdomain == FINE:
        if k is None or not (1 <= k <= grid.ratio):
            raise DimensionError(f"fine sub-level k={k!r} outside 1..{grid.ratio}")
        closure.trace.require(FINE, grid.ratio)
        data = float(closure.trace.values[k - 1])
        if inputs is not None:
            source = inputs.fine_source[k - 1]
            g = float(inputs.g_lo_fine[k - 1])
        else:
            source = slab_source_averages(problem, grid.faces_fine, *grid.fine_slab(window, k))
            g = float(problem.g_lo(grid.fine_midtime(window, k)))
        lower, diag, upper, rhs = _tridiag_base(
            grid.widths_fine, grid.centers_fine, grid.dt_fine, source, state_prev
        )
        # exterior Dirichlet at the left end
        d_bnd = 0.5 * grid.widths_fine[0]
        diag[0] += 1.0 / d_bnd
        rhs[0] += g / d_bnd
        # interface at the right end
        if closure.kind == "dirichlet_interface":
            diag[-1] += 1.0 / grid.d_fine
            rhs[-1] += data / grid.d_fine
        elif closure.kind == "dirichlet_neighbor":
            diag[-1] += 1.0 / grid.d_across
            rhs[-1] += data / grid.d_across
        else:
            rhs[-1] += data
        labels = tuple(f"fine[{j}]" for j in range(grid.n_fine))
    elif subdomain == COARSE:
        closure.trace.require(COARSE)
        data = float(closure.trace.values[0])
        if inputs is not None:
            source = inputs.coarse_source
            g = inputs.g_hi_coarse
        else:
            source = slab_source_averages(problem, grid.faces_coarse, *grid.coarse_slab(window))
            g = float(problem.g_hi(grid.coarse_midtime(window)))
        lower, diag, upper, rhs = _tridiag_base(
            grid.widths_coarse, grid.centers_coarse, grid.dt_coarse, source, state_prev
        )
        # exterior Dirichlet at the right end
        d_bnd = 0.5 * grid.widths_coarse[-1]
        diag[-1] += 1.0 / d_bnd
        rhs[-1] += g / d_bnd
        # interface at the left end (left-to-right flux enters with + sign)
        if closure.kind == "dirichlet_interface":
            diag[0] += 1.0 / grid.d_coarse
            rhs[0] += data / grid.d_coarse
        elif closure.kind == "dirichlet_neighbor":
            diag[0] += 1.0 / grid.d_across
            rhs[0] += data / grid.d_across
        else:
            rhs[0] -= data
        labels = tuple(f"coarse[{j}]" for j in range(grid.n_coarse))
    else:
        raise DimensionError(f"subdomain must be 'fine' or 'coarse', got {subdomain!r}")
    return LinearSystem(rhs=rhs, labels=labels, bands=(lower, diag, upper))


def assemble_composite_step(
    grid: CompositeGrid,
    window: int,
    fine_prev: np.ndarray,
    coarse_prev: np.ndarray,
    problem: Problem,
    inputs: WindowInputs | None = None,
) -> LinearSystem:
    """One implicit step of size dt_coarse on the union mesh (fine spatial cells
    kept): the predictor system, equal to the conforming single-domain scheme."""
    if inputs is not None:
        source = np.concatenate([inputs.predictor_fine_source, inputs.coarse_source])
        g_lo, g_hi = inputs.g_lo_coarse, inputs.g_hi_coarse
    else:
        t_mid = grid.coarse_midtime(window)
        source = np.concatenate(
            [
                slab_source_averages(problem, grid.faces_fine, *grid.coarse_slab(window)),
                slab_source_averages(problem, grid.faces_coarse, *grid.coarse_slab(window)),
            ]
        )
        g_lo, g_hi = float(problem.g_lo(t_mid)), float(problem.g_hi(t_mid))
    widths = np.concatenate([grid.widths_fine, grid.widths_coarse])
    centers = np.concatenate([grid.centers_fine, grid.centers_coarse])
    prev = np.concatenate([np.asarray(fine_prev, dtype=float), np.asarray(coarse_prev, dtype=float)])
    lower, diag, upper, rhs = _tridiag_base(widths, centers, grid.dt_coarse, source, prev)
    diag[0] += 2.0 / widths[0]
    rhs[0] += g_lo * 2.0 / widths[0]
    diag[-1] += 2.0 / widths[-1]
    rhs[-1] += g_hi * 2.0 / widths[-1]
    labels = tuple(f"union[{j}]" for j in range(widths.size))
    return LinearSystem(rhs=rhs, labels=labels, bands=(lower, diag, upper))


# -- monolithic window system -------------------------------------------------


class WindowLayout:
    """Unknown numbering of the monolithic window system: fine cells at all K
    sub-levels, coarse cells at the window end, then (is1 only) the interface
    pressures at the K fine sub-levels and at the coarse level."""

    def __init__(self, grid: CompositeGrid, variant: Variant):
        self.ratio = grid.ratio
        self.n_fine = grid.n_fine
        self.n_coarse = grid.n_coarse
        self.has_interface_unknowns = variant.interface_scheme == IS1
        self.n_unknowns = self.ratio * self.n_fine + self.n_coarse
        if self.has_interface_unknowns:
            self.n_unknowns += self.ratio + 1

    def fine(self, k: int, j: int) -> int:
        """Fine cell j at sub-level k (1-based k)."""
        return (k - 1) * self.n_fine + j

    def coarse(self, j: int) -> int:
        return self.ratio * self.n_fine + j

    def iface_fine(self, k: int) -> int:
        return self.ratio * self.n_fine + self.n_coarse + (k - 1)

    def iface_coarse(self) -> int:
        return self.ratio * self.n_fine + self.n_coarse + self.ratio

    def labels(self) -> tuple[str, ...]:
        out = [f"fine[k={k},j={j}]" for k in range(1, self.ratio + 1) for j in range(self.n_fine)]
        out += [f"coarse[j={j}]" for j in range(self.n_coarse)]
        if self.has_interface_unknowns:
            out += [f"p_iface_fine[k={k}]" for k in range(1, self.ratio + 1)]
            out += ["p_iface_coarse"]
        return tuple(out)


def assemble_monolithic_window(
    grid: CompositeGrid,
    window: int,
    fine_start: np.ndarray,
    coarse_start: np.ndarray,
    variant: Variant,
    problem: Problem,
    inputs: WindowInputs | None = None,
) -> LinearSystem:
    """The exact coupled system of one coarse window: subdomain schemes at all
    levels plus the variant's two interface conditions."""
    if inputs is None:
        inputs = precompute_window_inputs(grid, window, problem)
    lay = WindowLayout(grid, variant)
    K, n1, n2 = lay.ratio, lay.n_fine, lay.n_coarse
    d1, d2, dd = grid.d_fine, grid.d_coarse, grid.d_across
    dt1, dt2 = grid.dt_fine, grid.dt_coarse
    h1, h2 = grid.widths_fine, grid.widths_coarse
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs = np.zeros(lay.n_unknowns)

    def add(r: int, c: int, v: float) -> None:
        rows.append(r)
        cols.append(c)
        vals.append(v)

    inv_dist1 = 1.0 / np.diff(grid.centers_fine) if n1 > 1 else np.empty(0)
    inv_dist2 = 1.0 / np.diff(grid.centers_coarse) if n2 > 1 else np.empty(0)

    # fine cell equations, sub-levels k = 1..K
    for k in range(1, K + 1):
        for j in range(n1):
            r = lay.fine(k, j)
            add(r, r, h1[j] / dt1)
            if k == 1:
                rhs[r] += (h1[j] / dt1) * fine_start[j]
            else:
                add(r, lay.fine(k - 1, j), -h1[j] / dt1)
            rhs[r] += h1[j] * inputs.fine_source[k - 1, j]
            if j > 0:
                add(r, r, inv_dist1[j - 1])
                add(r, lay.fine(k, j - 1), -inv_dist1[j - 1])
            else:
                d_bnd = 0.5 * h1[0]
                add(r, r, 1.0 / d_bnd)
                rhs[r] += float(inputs.g_lo_fine[k - 1]) / d_bnd
            if j < n1 - 1:
                add(r, r, inv_dist1[j])
                add(r, lay.fine(k, j + 1), -inv_dist1[j])
            else:
                # interface flux of the fine side at sub-level k
                if variant.interface_scheme == IS1:
                    add(r, r, 1.0 / d1)
                    add(r, lay.iface_fine(k), -1.0 / d1)
                elif variant.master == COARSE:
                    # ghost neighbor equals the coarse value at the window end
                    add(r, r, 1.0 / dd)
                    add(r, lay.coarse(0), -1.0 / dd)
                else:
                    # flux equals the coarse-side flux with ghost = time mean
                    add(r, lay.coarse(0), -1.0 / dd)
                    for kk in range(1, K + 1):
                        add(r, lay.fine(kk, n1 - 1), (1.0 / K) / dd)

    # coarse cell equations at the window end
    for j in range(n2):
        r = lay.coarse(j)
        add(r, r, h2[j] / dt2)
        rhs[r] += (h2[j] / dt2) * coarse_start[j] + h2[j] * inputs.coarse_source[j]
        if j < n2 - 1:
            add(r, r, inv_dist2[j])
            add(r, lay.coarse(j + 1), -inv_dist2[j])
        else:
            d_bnd = 0.5 * h2[-1]
            add(r, r, 1.0 / d_bnd)
            rhs[r] += inputs.g_hi_coarse / d_bnd
        if j > 0:
            add(r, r, inv_dist2[j - 1])
            add(r, lay.coarse(j - 1), -inv_dist2[j - 1])
        else:
            # interface flux of the coarse side (enters with + sign)
            if variant.interface_scheme == IS1:
                add(r, r, 1.0 / d2)
                add(r, lay.iface_coarse(), -1.0 / d2)
            else:
                # both masters: flux (coarse cell - time mean of fine cell) / d
                add(r, r, 1.0 / dd)
                for kk in range(1, K + 1):
                    add(r, lay.fine(kk, n1 - 1), -(1.0 / K) / dd)

    # interface conditions (is1 only; is2 has them substituted above)
    if variant.interface_scheme == IS1:
        if variant.master == COARSE:
            for k in range(1, K + 1):
                r = lay.iface_fine(k)
                add(r, lay.iface_fine(k), 1.0)
                add(r, lay.iface_coarse(), -1.0)
            r = lay.iface_coarse()
            add(r, lay.coarse(0), dt2 / d2)
            add(r, lay.iface_coarse(), -dt2 / d2)
            for k in range(1, K + 1):
                add(r, lay.iface_fine(k), -dt1 / d1)
                add(r, lay.fine(k, n1 - 1), dt1 / d1)
        else:
            for k in range(1, K + 1):
                r = lay.iface_fine(k)
                add(r, lay.iface_fine(k), 1.0 / d1)
                add(r, lay.fine(k, n1 - 1), -1.0 / d1)
                add(r, lay.coarse(0), -1.0 / d2)
                add(r, lay.iface_coarse(), 1.0 / d2)
            r = lay.iface_coarse()
            add(r, lay.iface_coarse(), dt2)
            for k in range(1, K + 1):
                add(r, lay.iface_fine(k), -dt1)

    matrix = scipy.sparse.coo_matrix(
        (vals, (rows, cols)), shape=(lay.n_unknowns, lay.n_unknowns)
    ).tocsr()
    return LinearSystem(rhs=rhs, labels=lay.labels(), sparse=matrix)
