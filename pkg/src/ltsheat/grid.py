"""Composite space-time grid: two 1D cell-centered meshes with a shared
interface face and a nested pair of time steps.

The fine subdomain lies left of the interface and carries the small time
step ``dt_fine``; the coarse subdomain lies right of it with ``dt_coarse``.
``dt_coarse`` must be an integer multiple K of ``dt_fine``, and the horizon
``t_end`` an integer multiple of ``dt_coarse``, so the simulation splits
into coarse windows of K fine sub-steps each.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

#: relative tolerance for the integer-ratio checks (K and window count)
RATIO_RTOL = 1e-12


def _as_integer_ratio(value: float, name: str) -> int:
    """Round ``value`` to the nearest integer, rejecting non-integer ratios."""
    n = int(round(value))
    if n < 1 or abs(value - n) > RATIO_RTOL * max(1.0, abs(value)):
        raise ConfigurationError(
            f"{name} = {value!r} is not a positive integer (relative tolerance {RATIO_RTOL})"
        )
    return n


@dataclass(frozen=True)
class GridConfig:
    """User-facing description of the composite grid.

    Cell widths default to uniform per subdomain; explicit width lists may
    be given for nonuniform meshes and must tile the subdomain exactly.
    """

    domain_lo: float
    domain_hi: float
    interface_x: float
    n_cells_fine: int
    n_cells_coarse: int
    dt_fine: float
    dt_coarse: float
    t_end: float
    widths_fine: tuple[float, ...] | None = None
    widths_coarse: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.domain_lo < self.interface_x < self.domain_hi):
            raise ConfigurationError(
                f"interface_x must lie strictly inside the domain: "
                f"{self.domain_lo} < {self.interface_x} < {self.domain_hi} fails"
            )
        if self.n_cells_fine < 1 or self.n_cells_coarse < 1:
            raise ConfigurationError("each subdomain needs at least one cell")
        for dt, name in ((self.dt_fine, "dt_fine"), (self.dt_coarse, "dt_coarse")):
            if not (dt > 0.0 and np.isfinite(dt)):
                raise ConfigurationError(f"{name} must be positive and finite, got {dt!r}")
        if not (self.t_end > 0.0 and np.isfinite(self.t_end)):
            raise ConfigurationError(f"t_end must be positive and finite, got {self.t_end!r}")
        for widths, n, name in (
            (self.widths_fine, self.n_cells_fine, "widths_fine"),
            (self.widths_coarse, self.n_cells_coarse, "widths_coarse"),
        ):
            if widths is not None:
                if len(widths) != n:
                    raise ConfigurationError(f"{name} has {len(widths)} entries, expected {n}")
                if any(w <= 0.0 for w in widths):
                    raise ConfigurationError(f"{name} entries must be positive")


@dataclass(frozen=True)
class CompositeGrid:
    """Built composite grid: geometry per subdomain plus the time structure.

    ``d_fine`` and ``d_coarse`` are the distances from the interface face to
    the adjacent fine/coarse cell centers (half the touching cell widths).
    All arrays are read-only.
    """

    domain_lo: float
    domain_hi: float
    interface_x: float
    widths_fine: np.ndarray
    widths_coarse: np.ndarray
    centers_fine: np.ndarray
    centers_coarse: np.ndarray
    faces_fine: np.ndarray
    faces_coarse: np.ndarray
    dt_fine: float
    dt_coarse: float
    t_end: float
    ratio: int
    n_windows: int
    n_fine_steps: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_fine_steps", self.ratio * self.n_windows)
        for arr in (
            self.widths_fine,
            self.widths_coarse,
            self.centers_fine,
            self.centers_coarse,
            self.faces_fine,
            self.faces_coarse,
        ):
            arr.setflags(write=False)

    @property
    def n_fine(self) -> int:
        return self.widths_fine.size

    @property
    def n_coarse(self) -> int:
        return self.widths_coarse.size

    @property
    def d_fine(self) -> float:
        """Distance from the interface to the last fine cell center."""
        return 0.5 * float(self.widths_fine[-1])

    @property
    def d_coarse(self) -> float:
        """Distance from the interface to the first coarse cell center."""
        return 0.5 * float(self.widths_coarse[0])

    @property
    def d_across(self) -> float:
        """Center-to-center distance across the interface."""
        return self.d_fine + self.d_coarse

    # -- time slabs ---------------------------------------------------------
    # Window n (1-based) covers ((n-1)*dt_coarse, n*dt_coarse]; its k-th fine
    # slab (k = 1..K) covers the matching dt_fine subinterval.

    def coarse_slab(self, window: int) -> tuple[float, float]:
        t0 = (window - 1) * self.dt_coarse
        return t0, t0 + self.dt_coarse

    def fine_slab(self, window: int, k: int) -> tuple[float, float]:
        t0 = (window - 1) * self.dt_coarse + (k - 1) * self.dt_fine
        return t0, t0 + self.dt_fine

    def coarse_midtime(self, window: int) -> float:
        return (window - 0.5) * self.dt_coarse

    def fine_midtime(self, window: int, k: int) -> float:
        return (window - 1) * self.dt_coarse + (k - 0.5) * self.dt_fine


@dataclass(frozen=True)
class ValidationReport:
    """Grid-quality checks: interface stretch ratios and the (vacuous in 1D)
    face-barycenter condition."""

    stretch_master_fine: float
    stretch_master_coarse: float
    alpha_max: float
    master_fine_ok: bool
    master_coarse_ok: bool
    barycenter_ok: bool

    @property
    def passed(self) -> bool:
        return self.master_fine_ok and self.master_coarse_ok and self.barycenter_ok


def _build_widths(widths: tuple[float, ...] | None, n: int, length: float, name: str) -> np.ndarray:
    if widths is None:
        return np.full(n, length / n)
    w = np.asarray(widths, dtype=float)
    total = float(np.sum(w))
    if abs(total - length) > 1e-12 * max(1.0, abs(length)):
        raise ConfigurationError(
            f"{name} sum {total!r} does not tile the subdomain of length {length!r}"
        )
    # rescale so the faces land exactly on the subdomain ends
    return w * (length / total)


def build_composite_grid(config: GridConfig) -> CompositeGrid:
    """Build and validate the composite grid from a configuration.

    Raises ConfigurationError when dt_coarse/dt_fine or t_end/dt_coarse is
    not an integer within the relative tolerance, or geometry is invalid.
    """
    ratio = _as_integer_ratio(config.dt_coarse / config.dt_fine, "dt_coarse / dt_fine")
    n_windows = _as_integer_ratio(config.t_end / config.dt_coarse, "t_end / dt_coarse")

    len_fine = config.interface_x - config.domain_lo
    len_coarse = config.domain_hi - config.interface_x
    widths_fine = _build_widths(config.widths_fine, config.n_cells_fine, len_fine, "widths_fine")
    widths_coarse = _build_widths(
        config.widths_coarse, config.n_cells_coarse, len_coarse, "widths_coarse"
    )

    faces_fine = config.domain_lo + np.concatenate(([0.0], np.cumsum(widths_fine)))
    faces_fine[-1] = config.interface_x
    faces_coarse = config.interface_x + np.concatenate(([0.0], np.cumsum(widths_coarse)))
    faces_coarse[-1] = config.domain_hi
    if np.any(np.diff(faces_fine) <= 0.0) or np.any(np.diff(faces_coarse) <= 0.0):
        raise ConfigurationError("cell faces are not strictly increasing")

    return CompositeGrid(
        domain_lo=config.domain_lo,
        domain_hi=config.domain_hi,
        interface_x=config.interface_x,
        widths_fine=widths_fine,
        widths_coarse=widths_coarse,
        centers_fine=0.5 * (faces_fine[:-1] + faces_fine[1:]),
        centers_coarse=0.5 * (faces_coarse[:-1] + faces_coarse[1:]),
        faces_fine=faces_fine,
        faces_coarse=faces_coarse,
        dt_fine=config.dt_fine,
        dt_coarse=config.dt_coarse,
        t_end=config.t_end,
        ratio=ratio,
        n_windows=n_windows,
    )


def validate_grid(grid: CompositeGrid, alpha_max: float) -> ValidationReport:
    """Report the interface stretch ratio d_master/d_slave for both master
    choices against ``alpha_max``. Report-only: never raises."""
    r_fine = grid.d_fine / grid.d_coarse
    r_coarse = grid.d_coarse / grid.d_fine
    return ValidationReport(
        stretch_master_fine=r_fine,
        stretch_master_coarse=r_coarse,
        alpha_max=alpha_max,
        master_fine_ok=r_fine <= alpha_max,
        master_coarse_ok=r_coarse <= alpha_max,
        # interface faces are points in 1D, so the barycenter condition holds
        barycenter_ok=True,
    )
