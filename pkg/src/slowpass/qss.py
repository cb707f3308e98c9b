"""Quasi-stationary states and Hopf loci for both models.

The CGL QSS comes in three flavours: a two-term asymptotic expansion in
sqrt(eps), a pointwise Newton root of the local cubic balance, and a
whole-field Newton solve that keeps the diffusion term (needed for large
sources and order-one diffusivities). The membrane model's QSS is the
depolarized root of the current-balance equation with gating at steady
state. The Hopf locus is found per grid position by bracketed bisection of
the leading real part of the pointwise Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import InvalidArgumentError, NoQSSError
from .grid import Grid1D
from .models import (
    CGLParams,
    LactotrophParams,
    SourceProfile,
    cgl_jacobian_real,
    gating_steady,
    lactotroph_currents,
    lactotroph_jacobian,
    source_eval,
)

__all__ = [
    "QSSField",
    "HopfLocus",
    "cgl_qss",
    "cgl_qss_field",
    "cgl_qss_residual",
    "lactotroph_qss",
    "lactotroph_qss_field",
    "hopf_locus",
]


@dataclass(frozen=True)
class QSSField:
    """Per-grid-point quasi-stationary state at one ramp value."""

    ramp_value: float
    values: np.ndarray
    method: str
    residual: float = 0.0


@dataclass(frozen=True)
class HopfLocus:
    """Samples (x, critical ramp value, crossing frequency)."""

    x: np.ndarray
    ramp: np.ndarray
    omega: np.ndarray

    def interp_ramp(self, x):
        order = np.argsort(self.x)
        return np.interp(x, self.x[order], self.ramp[order])


# ---------------------------------------------------------------------------
# CGL quasi-stationary states


def cgl_qss_asymptotic(x, mu, params: CGLParams, source: SourceProfile):
    """Expansion of the QSS through order eps^(3/2).

    A = -I/(mu+i w0) sqrt(eps)
        + [ (I + D (mu+i w0) I'') / (mu+i w0)^3
            - alpha I^3 / ((mu+i w0)^2 (mu^2+w0^2)) ] eps^(3/2)

    with D = beta_r + i beta_i and alpha = 1 + i alpha_i. The cubic-term
    coefficient is the self-consistent alpha (substituting the leading term
    back into the balance), which is what makes the residual O(eps^(5/2)).
    """
    mt = mu + 1j * params.omega0
    if mt == 0:
        raise InvalidArgumentError("QSS expansion undefined at mu + i*omega0 = 0")
    I = source_eval(source, x)
    Ixx = source.second_derivative(x)
    e = params.eps
    lead = -I / mt * np.sqrt(e)
    corr = (I + params.D * mt * Ixx) / mt**3 - params.alpha * I**3 / (mt**2 * (mu**2 + params.omega0**2))
    return lead + corr * e**1.5


def _newton_pointwise(A0, mu, params: CGLParams, forcing, tol=1e-12, max_iter=50):
    """Vectorized Newton for (mu+i w0) A + forcing - alpha |A|^2 A = 0."""
    A = np.atleast_1d(np.asarray(A0, dtype=complex)).copy()
    forcing = np.broadcast_to(np.atleast_1d(forcing), A.shape)
    mt = mu + 1j * params.omega0
    scale = 1.0 + np.abs(A)
    for _ in range(max_iter):
        F = mt * A + forcing - params.alpha * np.abs(A) ** 2 * A
        if np.all(np.abs(F) <= tol * scale):
            return A
        J = cgl_jacobian_real(A, mu, params)
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(np.abs(det) < 1e-300):
            raise NoQSSError("singular Jacobian in pointwise QSS Newton (near fold)")
        du = (J[..., 1, 1] * F.real - J[..., 0, 1] * F.imag) / det
        dv = (-J[..., 1, 0] * F.real + J[..., 0, 0] * F.imag) / det
        A = A - (du + 1j * dv)
        scale = 1.0 + np.abs(A)
    raise NoQSSError(f"pointwise QSS Newton did not converge in {max_iter} iterations")


def cgl_qss(x, mu, params: CGLParams, source: SourceProfile, method: str = "asymptotic"):
    """Pointwise QSS at position(s) x and ramp value mu.

    method "asymptotic" evaluates the sqrt(eps)-expansion; "newton" solves
    the local cubic balance seeded from the expansion (continuation in mu is
    the caller's job; pass the previous solution via the seed of
    _newton_pointwise through cgl_qss_field for field-level work).
    """
    if method == "asymptotic":
        return cgl_qss_asymptotic(x, mu, params, source)
    if method != "newton":
        raise InvalidArgumentError(f"unknown QSS method {method!r}")
    forcing = np.sqrt(params.eps) * source_eval(source, x)
    seed = cgl_qss_asymptotic(x, mu, params, source)
    out = _newton_pointwise(seed, mu, params, forcing)
    return out if np.ndim(x) else complex(out[0])


def _interleave(A):
    out = np.empty(2 * A.shape[0])
    out[0::2] = A.real
    out[1::2] = A.imag
    return out


def _deinterleave(U):
    return U[0::2] + 1j * U[1::2]


def _linear_diffusive_qss(grid: Grid1D, mu, params: CGLParams, forcing):
    """Solve (mu + i w0 + eps D Lap) A = -forcing with zero-flux ends."""
    N = grid.N
    d = params.pde_diffusivity
    r = d / grid.dx**2
    ab = np.zeros((3, N), dtype=complex)
    ab[1, :] = mu + 1j * params.omega0 - 2.0 * r
    ab[0, 1:] = r
    ab[2, :-1] = r
    ab[0, 1] = 2.0 * r
    ab[2, -2] = 2.0 * r
    return solve_banded((1, 1), ab, -forcing.astype(complex))


def cgl_qss_field(
    grid: Grid1D,
    mu,
    params: CGLParams,
    source: SourceProfile,
    method: str = "newton",
    include_diffusion: bool = False,
    seed=None,
    tol: float = 1e-11,
    max_iter: int = 50,
) -> QSSField:
    """QSS over a whole grid at ramp value mu.

    With include_diffusion the full balance
        (mu + i w0) A + eps D A_xx + sqrt(eps) I_app - alpha |A|^2 A = 0
    is solved by Newton on the interleaved real system with a banded
    Jacobian; otherwise the balance is pointwise.
    """
    x = grid.x
    forcing = np.sqrt(params.eps) * source_eval(source, x)
    if method == "asymptotic":
        vals = cgl_qss_asymptotic(x, mu, params, source)
        return QSSField(ramp_value=float(mu), values=vals, method="asymptotic")
    if method != "newton":
        raise InvalidArgumentError(f"unknown QSS method {method!r}")

    if not include_diffusion:
        seed_vals = seed if seed is not None else cgl_qss_asymptotic(x, mu, params, source)
        vals = _newton_pointwise(seed_vals, mu, params, forcing, tol=tol)
        res = float(np.max(np.abs((mu + 1j * params.omega0) * vals + forcing - params.alpha * np.abs(vals) ** 2 * vals)))
        return QSSField(ramp_value=float(mu), values=vals, method="newton", residual=res)

    N = grid.N
    d = params.pde_diffusivity
    dr, di = d.real, d.imag
    inv_dx2 = 1.0 / grid.dx**2
    A = np.asarray(seed if seed is not None else _linear_diffusive_qss(grid, mu, params, forcing), dtype=complex).copy()

    def lap(v):
        out = np.empty_like(v)
        out[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
        out[0] = 2.0 * (v[1] - v[0])
        out[-1] = 2.0 * (v[-2] - v[-1])
        return out * inv_dx2

    def residual(A):
        return (mu + 1j * params.omega0) * A + d * lap(A) + forcing - params.alpha * np.abs(A) ** 2 * A

    for _ in range(max_iter):
        F = residual(A)
        err = np.max(np.abs(F))
        if err <= tol * (1.0 + np.max(np.abs(A))):
            break
        # banded Jacobian over interleaved (Re, Im) unknowns: local 2x2
        # reaction blocks plus the complex diffusion stencil
        Jloc = cgl_jacobian_real(A, mu, params)
        ab = np.zeros((7, 2 * N))
        main = 2.0 * inv_dx2
        # diagonal entries (row offset 3 = main diagonal in banded storage)
        ab[3, 0::2] = Jloc[:, 0, 0] - dr * main
        ab[3, 1::2] = Jloc[:, 1, 1] - dr * main
        ab[2, 1::2] = Jloc[:, 0, 1] + di * main  # (u_j row, v_j col)
        ab[4, 0:-1:2] = Jloc[:, 1, 0] - di * main  # (v_j row, u_j col)
        # neighbour coupling: d * inv_dx2 with ghost doubling at the ends
        cr = np.full(N - 1, dr * inv_dx2)
        ci = np.full(N - 1, di * inv_dx2)
        crL, ciL = cr.copy(), ci.copy()   # coupling to the left neighbour
        crR, ciR = cr.copy(), ci.copy()   # coupling to the right neighbour
        crR[0] *= 2.0
        ciR[0] *= 2.0
        crL[-1] *= 2.0
        ciL[-1] *= 2.0
        # u_j row, u_{j+1} col -> superdiagonal offset 2; v contribution offset 1/3
        ab[1, 2::2] = crR          # u_j <- u_{j+1}
        ab[0, 3::2] = -ciR         # u_j <- v_{j+1}
        ab[2, 2::2] = ciR          # v_j <- u_{j+1}
        ab[1, 3::2] = crR          # v_j <- v_{j+1}
        ab[5, 0:-2:2] = crL        # u_j <- u_{j-1}
        ab[4, 1:-2:2] = -ciL       # u_j <- v_{j-1}
        ab[6, 0:-2:2] = ciL        # v_j <- u_{j-1}
        ab[5, 1:-1:2] = crL        # v_j <- v_{j-1}
        rhs = _interleave(-F)
        dU = solve_banded((3, 3), ab, rhs)
        A = A + _deinterleave(dU)
    else:
        raise NoQSSError(f"field QSS Newton did not converge in {max_iter} iterations")
    return QSSField(ramp_value=float(mu), values=A, method="newton+diffusion", residual=float(np.max(np.abs(residual(A)))))


def cgl_qss_residual(x, mu, params: CGLParams, source: SourceProfile, h_x: float = 1e-3, h_mu: float = 1e-4):
    """Residual of the asymptotic QSS in the full slow-time balance.

    Measures |(mu+i w0) A + eps D A_xx + sqrt(eps) I_app - alpha |A|^2 A
    - eps dA/dmu| with A the asymptotic QSS; derivatives are centered
    differences of the expansion. Scales like eps^(5/2).
    """
    def A(xx, m):
        return cgl_qss_asymptotic(xx, m, params, source)

    x = np.asarray(x, dtype=float)
    Axx = (A(x + h_x, mu) - 2.0 * A(x, mu) + A(x - h_x, mu)) / h_x**2
    Amu = (A(x, mu + h_mu) - A(x, mu - h_mu)) / (2.0 * h_mu)
    a = A(x, mu)
    forcing = np.sqrt(params.eps) * source_eval(source, x)
    res = (
        (mu + 1j * params.omega0) * a
        + params.pde_diffusivity * Axx
        + forcing
        - params.alpha * np.abs(a) ** 2 * a
        - params.eps * Amu
    )
    return np.abs(res)


# ---------------------------------------------------------------------------
# Membrane-model quasi-stationary states


def _current_balance(V, I_total, params):
    _, n_inf, _, e_inf = gating_steady(V, params)
    I_Ca, I_K, I_A, I_L = lactotroph_currents(V, n_inf, e_inf, params)
    return I_Ca + I_K + I_A + I_L - I_total


def lactotroph_qss(
    x,
    I,
    params: LactotrophParams,
    source: SourceProfile,
    v_range=(-75.0, 0.0),
    n_scan: int = 601,
):
    """Depolarized quasi-stationary state (V, n, e) at position x.

    Solves I + I_app(x) = I_Ca + I_K + I_A + I_L with n, e at gating steady
    state and returns the largest-V root found by a scan-and-bracket search
    over v_range.
    """
    if params.g_Ca == 0 and params.g_K == 0 and params.g_A == 0 and params.g_L == 0:
        raise InvalidArgumentError("degenerate membrane: all conductances zero, no voltage balance")
    I_total = I + source_eval(source, x)
    Vs = np.linspace(v_range[0], v_range[1], n_scan)
    h = _current_balance(Vs, I_total, params)
    sign = np.sign(h)
    crossings = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    root = None
    if sign[-1] == 0:
        root = Vs[-1]
    for idx in crossings[::-1]:
        root = brentq(_current_balance, Vs[idx], Vs[idx + 1], args=(I_total, params), xtol=1e-12)
        break
    if root is None:
        exact = np.nonzero(h == 0)[0]
        if exact.size:
            root = Vs[exact[-1]]
        else:
            raise NoQSSError(f"no voltage balance in [{v_range[0]}, {v_range[1]}] for I={I_total:g}")
    _, n_inf, _, e_inf = gating_steady(root, params)
    return float(root), float(n_inf), float(e_inf)


def lactotroph_qss_field(
    grid: Grid1D,
    I,
    params: LactotrophParams,
    source: SourceProfile,
    seed_V=None,
    v_range=(-75.0, 0.0),
) -> QSSField:
    """Depolarized QSS over a grid; Newton from a seed when available.

    Without a seed every point is bracketed independently; with one (the
    previous ramp value's solution) a vectorized Newton refines it, which is
    what makes per-snapshot QSS tracking affordable.
    """
    x = grid.x
    I_total = I + source_eval(source, x)
    if seed_V is None:
        V = np.array([lactotroph_qss(xi, I, params, source, v_range=v_range)[0] for xi in x])
    else:
        V = np.asarray(seed_V, dtype=float).copy()
        for _ in range(60):
            _, n_inf, _, e_inf = gating_steady(V, params)
            I_Ca, I_K, I_A, I_L = lactotroph_currents(V, n_inf, e_inf, params)
            F = I_Ca + I_K + I_A + I_L - I_total
            if np.max(np.abs(F)) < 1e-11 * (1.0 + np.abs(I_total).max()):
                break
            # dF/dV of the reduced balance (gating slaved to V)
            m_inf, n_inf2, a_inf, e_inf2 = gating_steady(V, params)
            dmdV = m_inf * (1 - m_inf) / params.s_m
            dndV = n_inf2 * (1 - n_inf2) / params.s_n
            dadV = a_inf * (1 - a_inf) / params.s_a
            dedV = -e_inf2 * (1 - e_inf2) / params.s_e
            dFdV = (
                params.g_Ca * (dmdV * (V - params.V_Ca) + m_inf)
                + params.g_K * (dndV * (V - params.V_K) + n_inf2)
                + params.g_A * ((dadV * e_inf2 + a_inf * dedV) * (V - params.V_K) + a_inf * e_inf2)
                + params.g_L
            )
            V = V - F / dFdV
        else:
            raise NoQSSError("seeded membrane QSS Newton did not converge")
    _, n_inf, _, e_inf = gating_steady(V, params)
    vals = np.stack([V, n_inf, e_inf])
    return QSSField(ramp_value=float(I), values=vals, method="newton", residual=0.0)


# ---------------------------------------------------------------------------
# Hopf locus


def _cgl_max_re_eig(x, mu, params, source, about):
    if about == "origin":
        A = 0.0 + 0.0j
    else:
        A = cgl_qss(x, mu, params, source, method="newton")
    J = cgl_jacobian_real(A, mu, params)
    eigs = np.linalg.eigvals(J)
    i = np.argmax(eigs.real)
    return eigs[i].real, abs(eigs[i].imag)


def _lactotroph_max_re_eig(x, I, params, source):
    V, n, e = lactotroph_qss(x, I, params, source)
    J = lactotroph_jacobian(V, n, e, params)
    eigs = np.linalg.eigvals(J)
    # leading oscillatory pair: largest real part among complex eigenvalues,
    # falling back to the overall leader
    cplx = eigs[np.abs(eigs.imag) > 1e-12]
    pick = cplx if cplx.size else eigs
    i = np.argmax(pick.real)
    return pick[i].real, abs(pick[i].imag)


def hopf_locus(
    model: str,
    params,
    source: SourceProfile,
    x_samples,
    ramp_range,
    about: str = "origin",
    tol: float = 1e-8,
    n_scan: int = 60,
) -> HopfLocus:
    """Locate, per x, the ramp value where the pointwise linearization about
    the QSS first crosses to instability.

    ramp_range is scanned for a sign change of the leading real part; the
    crossing is then bisected to `tol` in the ramp value. Positions with no
    crossing are dropped from the returned samples.
    """
    x_samples = np.atleast_1d(np.asarray(x_samples, dtype=float))
    lo, hi = float(ramp_range[0]), float(ramp_range[1])
    if model == "cgl":
        eig = lambda xx, r: _cgl_max_re_eig(xx, r, params, source, about)
    elif model == "lactotroph":
        eig = lambda xx, r: _lactotroph_max_re_eig(xx, r, params, source)
    else:
        raise InvalidArgumentError(f"unknown model {model!r}")

    xs, ramps, omegas = [], [], []
    grid_r = np.linspace(lo, hi, n_scan)
    for xx in x_samples:
        vals = []
        for r in grid_r:
            try:
                vals.append(eig(xx, r)[0])
            except NoQSSError:
                vals.append(np.nan)
        vals = np.asarray(vals)
        ok = np.isfinite(vals)
        idx = None
        for j in range(n_scan - 1):
            if ok[j] and ok[j + 1] and vals[j] * vals[j + 1] < 0:
                idx = j
                break
        if idx is None:
            continue
        a, b = grid_r[idx], grid_r[idx + 1]
        fa = vals[idx]
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = eig(xx, mid)[0]
            if fa * fm <= 0:
                b = mid
            else:
                a, fa = mid, fm
        r_star = 0.5 * (a + b)
        xs.append(xx)
        ramps.append(r_star)
        omegas.append(eig(xx, r_star)[1])
    return HopfLocus(x=np.asarray(xs), ramp=np.asarray(ramps), omega=np.asarray(omegas))
