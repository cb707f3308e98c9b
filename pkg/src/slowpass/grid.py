"""Uniform 1-D grids, zero-flux diffusion operators, and cosine-mode diagnostics.

The domain is [-L, L] with N points and zero-flux (Neumann) boundaries
realized by ghost-point reflection: f[-1] = f[1] and f[N] = f[N-2]. The
matching modal basis is the DCT-I family cos(n*pi*(x+L)/(2L)), n = 0..N-1,
whose members all have vanishing derivative at both ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.linalg import solve_banded

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh on [-L, L] with spacing dx = 2L/(N-1)."""

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise InvalidArgumentError(f"half-length must be positive, got {self.L}")
        if self.N < 3:
            raise InvalidArgumentError(f"need at least 3 grid points, got {self.N}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    def index_of(self, x: float) -> int:
        """Nearest grid index to position x."""
        return int(round((x + self.L) / self.dx))

    def mode_wavenumber(self, n) -> np.ndarray:
        """Wavenumber k_n = n*pi/(2L) of cosine mode n."""
        return np.asarray(n) * np.pi / (2.0 * self.L)


def build_grid(L: float, N: int) -> Grid1D:
    """Construct a Grid1D, validating L > 0 and N >= 3."""
    return Grid1D(L=float(L), N=int(N))


def _check_field(f: np.ndarray, grid: Grid1D) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[-1] != grid.N:
        raise InvalidArgumentError(
            f"field length {f.shape[-1]} does not match grid with {grid.N} points"
        )
    return f


def apply_laplacian(f: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Second difference of f with zero-flux boundaries.

    Interior: (f[j-1] - 2 f[j] + f[j+1]) / dx^2. At the ends the ghost
    reflection doubles the inward neighbour, preserving second-order
    accuracy and zero flux. Works on the last axis of any-shaped input.
    """
    f = _check_field(f, grid)
    out = np.empty_like(f, dtype=np.result_type(f.dtype, np.float64))
    out[..., 1:-1] = f[..., :-2] - 2.0 * f[..., 1:-1] + f[..., 2:]
    out[..., 0] = 2.0 * (f[..., 1] - f[..., 0])
    out[..., -1] = 2.0 * (f[..., -2] - f[..., -1])
    out /= grid.dx ** 2
    return out


class DiffusionOperator:
    """Crank-Nicolson half of the splitting: solves f_t = d f_xx over dt.

    Precomputes the tridiagonal factors for a fixed (diffusivity, dt) pair
    so repeated steps cost one banded solve each. The diffusivity may be
    complex (linear dispersion) as long as its real part is non-negative.
    """

    def __init__(self, grid: Grid1D, diffusivity, dt: float):
        if dt <= 0:
            raise InvalidArgumentError(f"dt must be positive, got {dt}")
        d = complex(diffusivity)
        if d.real < 0:
            raise InvalidArgumentError(
                f"diffusivity real part must be non-negative, got {d}"
            )
        self.grid = grid
        self.diffusivity = d if d.imag != 0 else d.real
        self.dt = float(dt)
        self.identity = d == 0
        if self.identity:
            return

        N = grid.N
        r = 0.5 * self.dt * self.diffusivity / grid.dx ** 2
        dtype = complex if np.iscomplexobj(np.asarray(self.diffusivity)) else float
        # implicit side (I - r*Lap) in banded storage for solve_banded
        ab = np.zeros((3, N), dtype=dtype)
        ab[1, :] = 1.0 + 2.0 * r
        ab[0, 1:] = -r
        ab[2, :-1] = -r
        ab[0, 1] = -2.0 * r      # ghost reflection at the left end
        ab[2, -2] = -2.0 * r     # and at the right end
        self._ab = ab
        self._r = r

    def _explicit(self, f):
        r = self._r
        out = np.empty_like(f, dtype=np.result_type(f.dtype, np.asarray(r).dtype))
        out[..., 1:-1] = (1.0 - 2.0 * r) * f[..., 1:-1] + r * (f[..., :-2] + f[..., 2:])
        out[..., 0] = (1.0 - 2.0 * r) * f[..., 0] + 2.0 * r * f[..., 1]
        out[..., -1] = (1.0 - 2.0 * r) * f[..., -1] + 2.0 * r * f[..., -2]
        return out

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = _check_field(f, self.grid)
        if self.identity:
            return f.copy()
        rhs = self._explicit(f)
        if rhs.ndim == 1:
            return solve_banded((1, 1), self._ab, rhs)
        return solve_banded((1, 1), self._ab, rhs.T).T

    def solve_implicit(self, rhs: np.ndarray) -> np.ndarray:
        """Apply (I - (d dt/2) Lap)^(-1) alone; used by the reference
        integrator to keep reaction terms inside the implicit solve."""
        rhs = _check_field(rhs, self.grid)
        if self.identity:
            return rhs.copy()
        if rhs.ndim == 1:
            return solve_banded((1, 1), self._ab, rhs)
        return solve_banded((1, 1), self._ab, rhs.T).T


def diffusion_substep(f: np.ndarray, diffusivity, dt: float, grid: Grid1D) -> np.ndarray:
    """One Crank-Nicolson diffusion step with zero-flux boundaries."""
    return DiffusionOperator(grid, diffusivity, dt).apply(f)


def diffusion_mode_factor(grid: Grid1D, diffusivity, dt: float, mode: int):
    """Exact per-step amplification of cosine mode ``mode`` under the CN scheme.

    The discrete symbol of mode n is k^2 = 4 sin^2(n*pi/(2(N-1))) / dx^2,
    so the factor is (1 - d k^2 dt/2) / (1 + d k^2 dt/2).
    """
    theta = np.pi * mode / (grid.N - 1)
    k2 = 4.0 * np.sin(0.5 * theta) ** 2 / grid.dx ** 2
    z = 0.5 * complex(diffusivity) * k2 * dt
    factor = (1.0 - z) / (1.0 + z)
    return factor.real if factor.imag == 0 else factor


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    """Half-weight endpoint quadrature weights; the sampled cosine modes
    are exactly orthogonal under this inner product."""
    w = np.ones(grid.N)
    w[0] = w[-1] = 0.5
    return w


@dataclass(frozen=True)
class Spectrum:
    """Cosine-mode decomposition of a scalar field.

    mode[n] indexes the basis function cos(n*pi*(x+L)/(2L)) with wavenumber
    k[n] = n*pi/(2L); coeff[n] is its amplitude, so the field is exactly
    sum_n coeff[n] * cos(k[n] (x+L)). energy[n] = |coeff[n]|^2 * ||mode n||^2
    under the half-weight-endpoint inner product, which makes the energies
    sum to the discrete field energy (Parseval).
    """

    mode: np.ndarray
    wavenumber: np.ndarray
    coeff: np.ndarray
    energy: np.ndarray

    @property
    def total_energy(self) -> float:
        return float(self.energy.sum())


def _mode_norms_sq(N: int) -> np.ndarray:
    norms = np.full(N, 0.5 * (N - 1))
    norms[0] = norms[-1] = float(N - 1)
    return norms


def cosine_spectrum(f: np.ndarray, grid: Grid1D) -> Spectrum:
    """Decompose f in the zero-flux cosine basis on [-L, L].

    The unnormalized DCT-I equals twice the weighted projection onto each
    sampled cosine, so amplitudes follow by dividing out the mode norms.
    """
    f = _check_field(f, grid)
    if f.ndim != 1:
        raise InvalidArgumentError("cosine_spectrum expects a single scalar field")
    if np.iscomplexobj(f):
        proj = 0.5 * (dct(f.real, type=1) + 1j * dct(f.imag, type=1))
    else:
        proj = 0.5 * dct(f, type=1)
    norms = _mode_norms_sq(grid.N)
    coeff = proj / norms
    n = np.arange(grid.N)
    return Spectrum(
        mode=n,
        wavenumber=grid.mode_wavenumber(n),
        coeff=coeff,
        energy=np.abs(coeff) ** 2 * norms,
    )


def cosine_reconstruct(spectrum: Spectrum, grid: Grid1D) -> np.ndarray:
    """Invert cosine_spectrum; round-trips to round-off."""
    c = spectrum.coeff

    def _synth(cr):
        # sum_n c_n cos(pi n j/(N-1)) from the DCT-I of the coefficients
        alt = cr[-1] * np.where(np.arange(grid.N) % 2 == 0, 1.0, -1.0)
        return 0.5 * dct(cr, type=1) + 0.5 * (cr[0] + alt)

    if np.iscomplexobj(c):
        return _synth(c.real) + 1j * _synth(c.imag)
    return _synth(c)


def field_energy(f: np.ndarray, grid: Grid1D | None = None) -> float:
    """Discrete field energy sum_j w_j |f_j|^2 with half-weight endpoints."""
    f = np.asarray(f)
    e = np.abs(f) ** 2
    return float(e.sum() - 0.5 * (e[..., 0] + e[..., -1]))
