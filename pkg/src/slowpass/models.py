"""Reaction terms, applied-current profiles, and slow-parameter ramps.

Two models share one interface:

* a complex Ginzburg-Landau (CGL) field A(x, t) with a slowly increasing
  linear growth rate mu, and
* a conductance-based pituitary-cell membrane model (V, n, e)(x, t) with a
  slowly decreasing baseline current I.

The diffusion terms are handled by the integrator; the right-hand sides
here are the purely local (reaction) parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .configfile import parse_config
from .errors import InvalidArgumentError

__all__ = [
    "SourceProfile",
    "RampSpec",
    "CGLParams",
    "LactotrophParams",
    "source_eval",
    "cgl_rhs",
    "cgl_jacobian_real",
    "gating_steady",
    "lactotroph_rhs",
    "lactotroph_currents",
    "lactotroph_jacobian",
    "load_lactotroph_params",
]


@dataclass(frozen=True)
class SourceProfile:
    """Applied-current profile I_app(x).

    kinds:
      gaussian  -- a * exp(-x^2 / (4 sigma))
      constant  -- a everywhere
      tabulated -- linear interpolation of (x, value) samples; queries
                   outside the table raise.
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    sigma: float = 1.0
    table_x: np.ndarray | None = None
    table_values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "constant", "tabulated"):
            raise InvalidArgumentError(f"unknown source kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise InvalidArgumentError("gaussian source needs sigma > 0")
        if self.kind == "tabulated":
            if self.table_x is None or self.table_values is None:
                raise InvalidArgumentError("tabulated source needs table_x and table_values")
            object.__setattr__(self, "table_x", np.asarray(self.table_x, dtype=float))
            object.__setattr__(self, "table_values", np.asarray(self.table_values, dtype=float))

    def __call__(self, x):
        return source_eval(self, x)

    def second_derivative(self, x):
        """d^2 I_app / dx^2; analytic for gaussian/constant, centered
        differences on the table spacing for tabulated profiles."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(x)
        if self.kind == "gaussian":
            s = self.sigma
            return self(x) * (x * x / (4.0 * s * s) - 1.0 / (2.0 * s))
        h = np.min(np.diff(self.table_x))
        return (self(x + h) - 2.0 * self(x) + self(x - h)) / h**2


def source_eval(profile: SourceProfile, x):
    """Evaluate the applied-current profile at x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if profile.kind == "constant":
        out = np.full_like(x, profile.amplitude)
    elif profile.kind == "gaussian":
        out = profile.amplitude * np.exp(-x * x / (4.0 * profile.sigma))
    else:
        tx, tv = profile.table_x, profile.table_values
        if np.any(x < tx[0]) or np.any(x > tx[-1]):
            raise InvalidArgumentError("tabulated source queried outside its table range")
        out = np.interp(x, tx, tv)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RampSpec:
    """Slow drift of the bifurcation parameter: value(t) = initial +/- rate*t.

    direction "increasing" suits the CGL growth rate mu, "decreasing" the
    membrane baseline current I. The ramp is evaluated exactly from t, never
    integrated, so snapshots carry ramp values with no accumulation error.
    """

    initial: float
    rate: float
    direction: str = "increasing"

    def __post_init__(self):
        if self.direction not in ("increasing", "decreasing"):
            raise InvalidArgumentError(f"ramp direction must be increasing/decreasing, got {self.direction!r}")
        if self.rate < 0:
            raise InvalidArgumentError("ramp rate must be non-negative; use direction for sign")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "increasing" else -1.0

    def value(self, t):
        return self.initial + self.sign * self.rate * np.asarray(t)

    def time_of(self, value: float) -> float:
        """Time at which the ramp reaches the given value."""
        if self.rate == 0:
            raise InvalidArgumentError("ramp with zero rate never reaches a new value")
        return (value - self.initial) / (self.sign * self.rate)


@dataclass(frozen=True)
class CGLParams:
    """Complex Ginzburg-Landau constants.

    The field equation is A_t = (mu + i*omega0) A + eps*D A_xx
    + sqrt(eps) I_app(x) - (1 + i*alpha_i) |A|^2 A with D = beta_r + i*beta_i.
    """

    eps: float = 0.01
    omega0: float = 0.5
    alpha_i: float = 0.6
    beta_r: float = 1.0
    beta_i: float = 0.0

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidArgumentError("eps must be positive")

    @property
    def alpha(self) -> complex:
        return 1.0 + 1j * self.alpha_i

    @property
    def D(self) -> complex:
        return self.beta_r + 1j * self.beta_i

    @property
    def pde_diffusivity(self) -> complex:
        """Coefficient of A_xx in the field equation: eps * (beta_r + i beta_i)."""
        return self.eps * self.D


def cgl_rhs(A, mu, x, params: CGLParams, source: SourceProfile):
    """Local CGL reaction rate; the eps*D*A_xx term lives in the integrator."""
    forcing = np.sqrt(params.eps) * source_eval(source, x)
    return (mu + 1j * params.omega0) * A + forcing - params.alpha * (np.abs(A) ** 2) * A

def cgl_jacobian_real(A, mu, params: CGLParams):
    """Jacobian of the local CGL rate in real (Re A, Im A) coordinates.

    Returns an array of shape (..., 2, 2) matching the shape of A; this is
    also the linearization used for the Hopf locus.
    """
    A = np.asarray(A, dtype=complex)
    u, v = A.real, A.imag
    ai = params.alpha_i
    mod2 = u * u + v * v
    cr = u - ai * v      # Re[(1 + i alpha_i) A]
    ci = ai * u + v      # Im[(1 + i alpha_i) A]
    J = np.empty(A.shape + (2, 2))
    J[..., 0, 0] = mu - (2.0 * u * cr + mod2)
    J[..., 0, 1] = -params.omega0 - (2.0 * v * cr - ai * mod2)
    J[..., 1, 0] = params.omega0 - (2.0 * u * ci + ai * mod2)
    J[..., 1, 1] = mu - (2.0 * v * ci + mod2)
    return J


@dataclass(frozen=True)
class LactotrophParams:
    """Constants of the pituitary-cell membrane model.

    Units: capacitance pF, conductances nS, potentials mV, times ms,
    currents pA, diffusivity (space units)^2/ms. The ionic currents are
    calcium (instantaneous activation m), delayed-rectifier potassium
    (gating variable n), A-type potassium (instantaneous activation a,
    inactivation e), and leak.
    """

    C_m: float = 10.0
    g_Ca: float = 2.0
    g_K: float = 4.0
    g_A: float = 5.0
    g_L: float = 0.2
    V_Ca: float = 60.0
    V_K: float = -75.0
    V_L: float = -50.0
    tau_n: float = 40.0
    tau_e: float = 20.0
    v_m: float = -20.0
    s_m: float = 12.0
    v_n: float = -5.0
    s_n: float = 10.0
    v_a: float = -20.0
    s_a: float = 10.0
    v_e: float = -60.0
    s_e: float = 5.0
    D: float = 0.0

    def __post_init__(self):
        if self.C_m <= 0 or self.tau_n <= 0 or self.tau_e <= 0:
            raise InvalidArgumentError("C_m, tau_n, tau_e must be positive")
        for name in ("g_Ca", "g_K", "g_A", "g_L"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"conductance {name} must be non-negative")
        if self.D < 0:
            raise InvalidArgumentError("diffusivity must be non-negative")

    def with_(self, **kwargs) -> "LactotrophParams":
        return replace(self, **kwargs)


def load_lactotroph_params(path=None, **overrides) -> LactotrophParams:
    """Load membrane constants from a flat key=value file.

    Without a path, the packaged defaults are used. Keyword overrides are
    applied last.
    """
    if path is None:
        text = resources.files("slowpass.data").joinpath("lactotroph_params.cfg").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    values = parse_config(text)
    known = {f.name for f in LactotrophParams.__dataclass_fields__.values()}
    unknown = set(values) - known
    if unknown:
        raise InvalidArgumentError(f"unknown lactotroph parameter keys: {sorted(unknown)}")
    values.update(overrides)
    return LactotrophParams(**values)


def gating_steady(V, params: LactotrophParams):
    """Steady-state gating values (m_inf, n_inf, a_inf, e_inf) at voltage V.

    Boltzmann activations increase with V; the A-current inactivation e_inf
    decreases. All values lie in (0, 1).
    """
    V = np.asarray(V, dtype=float)
    m = 1.0 / (1.0 + np.exp((params.v_m - V) / params.s_m))
    n = 1.0 / (1.0 + np.exp((params.v_n - V) / params.s_n))
    a = 1.0 / (1.0 + np.exp((params.v_a - V) / params.s_a))
    e = 1.0 / (1.0 + np.exp((V - params.v_e) / params.s_e))
    return m, n, a, e


def lactotroph_currents(V, n, e, params: LactotrophParams):
    """Ionic currents (I_Ca, I_K, I_A, I_L) at the given state."""
    m_inf, _, a_inf, _ = gating_steady(V, params)
    I_Ca = params.g_Ca * m_inf * (V - params.V_Ca)
    I_K = params.g_K * n * (V - params.V_K)
    I_A = params.g_A * a_inf * e * (V - params.V_K)
    I_L = params.g_L * (V - params.V_L)
    return I_Ca, I_K, I_A, I_L


def lactotroph_rhs(state, x, I, params: LactotrophParams, source: SourceProfile):
    """Local membrane dynamics: rates for (V, n, e); diffusion of V is separate.

    state is shaped (3, ...) with components V, n, e; x broadcasts against
    the trailing axes.
    """
    V, n, e = state[0], state[1], state[2]
    m_inf, n_inf, a_inf, e_inf = gating_steady(V, params)
    I_Ca = params.g_Ca * m_inf * (V - params.V_Ca)
    I_K = params.g_K * n * (V - params.V_K)
    I_A = params.g_A * a_inf * e * (V - params.V_K)
    I_L = params.g_L * (V - params.V_L)
    out = np.empty_like(np.asarray(state, dtype=float))
    out[0] = (-(I_Ca + I_K + I_A + I_L) + I + source_eval(source, x)) / params.C_m
    out[1] = (n_inf - n) / params.tau_n
    out[2] = (e_inf - e) / params.tau_e
    return out


def lactotroph_jacobian(V, n, e, params: LactotrophParams):
    """Analytic Jacobian of the local (V, n, e) dynamics, shape (..., 3, 3).

    Uses closed-form Boltzmann derivatives so eigenvalue curves stay smooth
    for the Hopf bisection.
    """
    V = np.asarray(V, dtype=float)
    m_inf, n_inf, a_inf, e_inf = gating_steady(V, params)
    dm = m_inf * (1.0 - m_inf) / params.s_m
    dn = n_inf * (1.0 - n_inf) / params.s_n
    da = a_inf * (1.0 - a_inf) / params.s_a
    de = -e_inf * (1.0 - e_inf) / params.s_e
    dIdV = (
        params.g_Ca * (dm * (V - params.V_Ca) + m_inf)
        + params.g_K * n
        + params.g_A * (da * e * (V - params.V_K) + a_inf * e)
        + params.g_L
    )
    J = np.zeros(V.shape + (3, 3))
    J[..., 0, 0] = -dIdV / params.C_m
    J[..., 0, 1] = -params.g_K * (V - params.V_K) / params.C_m
    J[..., 0, 2] = -params.g_A * a_inf * (V - params.V_K) / params.C_m
    J[..., 1, 0] = dn / params.tau_n
    J[..., 1, 1] = -1.0 / params.tau_n
    J[..., 2, 0] = de / params.tau_e
    J[..., 2, 2] = -1.0 / params.tau_e
    return J
