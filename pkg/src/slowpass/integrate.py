"""Time integration by balanced Strang splitting, with a Crank-Nicolson
reference integrator for cross-checking.

A Strang step is half a diffusion step (Crank-Nicolson, zero-flux), a full
RK4 step of the local reaction with the ramp evaluated at the substage
times, and another half diffusion step. The reference integrator treats
diffusion implicitly over the whole step and evaluates the nonlinearity at
the midpoint through a fixed-point sweep.

Trajectories persist to a long-format CSV (t, mu_or_I, x, components...)
and to a compact binary format. Binary layout, little-endian:

    magic  b"RDSN"      4 bytes
    version             uint32 (currently 1)
    flags               uint32 (bit 0: field is complex)
    n_points            uint64
    n_components        uint64 (stored value planes; 2 for a complex field)
    n_snapshots         uint64
    x grid              n_points float64
    per snapshot: t float64, ramp float64, planes (n_components x n_points
    float64, C order)
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BlowUpError, InvalidArgumentError, ResolutionWarning, SchemaError, StepFailureError
from .grid import DiffusionOperator, Grid1D
from .models import (
    CGLParams,
    LactotrophParams,
    RampSpec,
    SourceProfile,
    cgl_rhs,
    lactotroph_rhs,
    source_eval,
)

__all__ = [
    "RunConfig",
    "Trajectory",
    "strang_step",
    "cn_reference_step",
    "integrate_run",
    "save_trajectory_csv",
    "load_trajectory_csv",
    "save_trajectory_binary",
    "load_trajectory_binary",
]

BLOWUP_THRESHOLD = 1.0e6
_MAGIC = b"RDSN"


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulation."""

    model: str                      # "cgl" | "lactotroph"
    grid: Grid1D
    params: object                  # CGLParams | LactotrophParams
    source: SourceProfile
    ramp: RampSpec
    dt: float
    t_end: float
    snapshot_stride: int = 1
    integrator: str = "strang"      # "strang" | "cn_reference"
    mode_guard_kmax: Optional[float] = None   # defaults to eps^(-3/2) for CGL

    def __post_init__(self):
        if self.model not in ("cgl", "lactotroph"):
            raise InvalidArgumentError(f"unknown model {self.model!r}")
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        if self.t_end <= 0:
            raise InvalidArgumentError("t_end must be positive")
        if self.snapshot_stride < 1:
            raise InvalidArgumentError("snapshot stride must be >= 1")
        if self.integrator not in ("strang", "cn_reference"):
            raise InvalidArgumentError(f"unknown integrator {self.integrator!r}")

    @property
    def component_names(self):
        return ("re", "im") if self.model == "cgl" else ("V", "n", "e")


@dataclass
class Trajectory:
    """Time-stamped field snapshots plus the exact ramp value at each time."""

    t: np.ndarray
    ramp: np.ndarray
    fields: np.ndarray              # (n_snap, N) complex or (n_snap, 3, N) real
    config: Optional[RunConfig] = None
    x: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.x is None and self.config is not None:
            self.x = self.config.grid.x

    @property
    def n_snapshots(self) -> int:
        return len(self.t)

    def voltage(self) -> np.ndarray:
        """Scalar observable per snapshot: V for the membrane model, |A| for CGL."""
        if self.fields.ndim == 3:
            return self.fields[:, 0, :]
        return np.abs(self.fields)

    def series_at(self, x_pos: float):
        """Time series of the scalar observable at the grid point nearest x_pos."""
        idx = int(np.argmin(np.abs(self.x - x_pos)))
        return self.x[idx], self.voltage()[:, idx]


class _ModelOps:
    """Precomputed per-run reaction/diffusion machinery."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        g = cfg.grid
        self.applied = source_eval(cfg.source, g.x)
        if cfg.model == "cgl":
            p: CGLParams = cfg.params
            self.forcing = np.sqrt(p.eps) * self.applied
            self.diffusivities = (p.pde_diffusivity,)
            self.complex_field = True
        else:
            p: LactotrophParams = cfg.params
            self.diffusivities = (p.D, 0.0, 0.0)
            self.complex_field = False

    def reaction(self, t, state):
        cfg = self.cfg
        mu = cfg.ramp.value(t)
        if cfg.model == "cgl":
            p = cfg.params
            return (mu + 1j * p.omega0) * state + self.forcing - p.alpha * np.abs(state) ** 2 * state
        return lactotroph_rhs(state, cfg.grid.x, mu, cfg.params, cfg.source)

    def half_ops(self, dt):
        return [DiffusionOperator(self.cfg.grid, d, 0.5 * dt) for d in self.diffusivities]

    def full_ops(self, dt):
        return [DiffusionOperator(self.cfg.grid, d, dt) for d in self.diffusivities]

    def diffuse(self, ops, state):
        if self.cfg.model == "cgl":
            return ops[0].apply(state)
        out = state.copy()
        out[0] = ops[0].apply(state[0])
        return out

    def solve_implicit(self, ops, state):
        if self.cfg.model == "cgl":
            return ops[0].solve_implicit(state)
        out = state.copy()
        out[0] = ops[0].solve_implicit(state[0])
        return out


def _rk4(ops: _ModelOps, t, dt, state):
    k1 = ops.reaction(t, state)
    k2 = ops.reaction(t + 0.5 * dt, state + 0.5 * dt * k1)
    k3 = ops.reaction(t + 0.5 * dt, state + 0.5 * dt * k2)
    k4 = ops.reaction(t + dt, state + dt * k3)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_blowup(state, t):
    mag = np.abs(state)
    finite = np.isfinite(mag)
    if finite.all() and (mag <= BLOWUP_THRESHOLD).all():
        return
    per_x = np.where(finite, mag, np.inf)
    if per_x.ndim > 1:
        per_x = per_x.max(axis=0)
    raise BlowUpError(t, int(np.argmax(per_x)))


def strang_step(f: np.ndarray, t: float, dt: float, cfg: RunConfig, _ops: _ModelOps | None = None,
                _half=None) -> np.ndarray:
    """One balanced splitting step: D(dt/2) o R_RK4(dt) o D(dt/2)."""
    if dt <= 0:
        raise InvalidArgumentError("dt must be positive")
    ops = _ops or _ModelOps(cfg)
    half = _half or ops.half_ops(dt)
    out = ops.diffuse(half, np.asarray(f))
    out = _rk4(ops, t, dt, out)
    out = ops.diffuse(half, out)
    _check_blowup(out, t + dt)
    return out


def cn_reference_step(f: np.ndarray, t: float, dt: float, cfg: RunConfig, _ops: _ModelOps | None = None,
                      _full=None, max_sweeps: int = 25, tol: float = 1e-12) -> np.ndarray:
    """One Crank-Nicolson step with midpoint nonlinearity.

    Solves (I - dt/2 L) u+ = (I + dt/2 L) u + dt * R((u + u+)/2, t + dt/2)
    by fixed-point sweeps on u+ (typically two are enough; failure to
    converge within max_sweeps raises).
    """
    if dt <= 0:
        raise InvalidArgumentError("dt must be positive")
    ops = _ops or _ModelOps(cfg)
    full = _full or ops.full_ops(dt)
    f = np.asarray(f)
    base = ops.diffuse(full, f)
    new = base.copy()
    for _ in range(max_sweeps):
        mid = 0.5 * (f + new)
        candidate = base + ops.solve_implicit(full, dt * ops.reaction(t + 0.5 * dt, mid))
        delta = np.max(np.abs(candidate - new))
        new = candidate
        if delta <= tol * (1.0 + np.max(np.abs(new))):
            _check_blowup(new, t + dt)
            return new
        if not np.all(np.isfinite(new)):
            break
    raise StepFailureError(
        f"midpoint fixed point did not converge in {max_sweeps} sweeps at t={t:g} (dt may be too large)"
    )


def _mode_guard(cfg: RunConfig):
    if cfg.model == "cgl":
        kmax = cfg.mode_guard_kmax
        if kmax is None:
            kmax = cfg.params.eps ** -1.5
        if cfg.grid.dx > np.pi / kmax:
            warnings.warn(
                f"grid spacing dx={cfg.grid.dx:g} does not resolve modes up to "
                f"k={kmax:g} (needs dx <= {np.pi / kmax:g}); high-mode damping "
                "must justify this resolution",
                ResolutionWarning,
                stacklevel=3,
            )


def integrate_run(cfg: RunConfig, initial: np.ndarray) -> Trajectory:
    """Integrate from t=0 to cfg.t_end, snapshotting every stride-th step.

    Deterministic given (cfg, initial); raises BlowUpError with the failing
    time and grid index if the state leaves the finite range.
    """
    initial = np.asarray(initial)
    expected = (cfg.grid.N,) if cfg.model == "cgl" else (3, cfg.grid.N)
    if initial.shape != expected:
        raise InvalidArgumentError(f"initial state shape {initial.shape} != expected {expected}")
    if not np.all(np.isfinite(initial)):
        raise InvalidArgumentError("initial state contains non-finite entries")
    _mode_guard(cfg)

    ops = _ModelOps(cfg)
    dt = cfg.dt
    n_steps = int(round(cfg.t_end / dt))
    if abs(n_steps * dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        n_steps = int(np.ceil(cfg.t_end / dt))

    if cfg.integrator == "strang":
        half = ops.half_ops(dt)
        step = lambda u, t: strang_step(u, t, dt, cfg, _ops=ops, _half=half)
    else:
        full = ops.full_ops(dt)
        step = lambda u, t: cn_reference_step(u, t, dt, cfg, _ops=ops, _full=full)

    state = initial.astype(complex if ops.complex_field else float, copy=True)
    times = [0.0]
    snaps = [state.copy()]
    for i in range(n_steps):
        t = i * dt
        state = step(state, t)
        if (i + 1) % cfg.snapshot_stride == 0 or (i + 1) == n_steps:
            times.append((i + 1) * dt)
            snaps.append(state.copy())
    t_arr = np.asarray(times)
    return Trajectory(t=t_arr, ramp=np.asarray(cfg.ramp.value(t_arr)), fields=np.stack(snaps), config=cfg)


# ---------------------------------------------------------------------------
# Persistence


def _fmt(v: float) -> str:
    return format(v, ".17g")


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """Long-format CSV: t, mu_or_I, x, then one column per component."""
    names = traj.config.component_names if traj.config else (
        ("re", "im") if np.iscomplexobj(traj.fields) else tuple(f"c{i}" for i in range(traj.fields.shape[1]))
    )
    x = traj.x
    with open(path, "w", newline="") as fh:
        fh.write("t,mu_or_I,x," + ",".join(names) + "\n")
        for i in range(traj.n_snapshots):
            t_s, r_s = _fmt(traj.t[i]), _fmt(traj.ramp[i])
            if traj.fields.ndim == 2:
                comps = (traj.fields[i].real, traj.fields[i].imag)
            else:
                comps = tuple(traj.fields[i, c] for c in range(traj.fields.shape[1]))
            for j in range(len(x)):
                fh.write(f"{t_s},{r_s},{_fmt(x[j])}," + ",".join(_fmt(c[j]) for c in comps) + "\n")


def load_trajectory_csv(path) -> Trajectory:
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if names[:3] != ("t", "mu_or_I", "x"):
        raise SchemaError(f"trajectory CSV must start with t,mu_or_I,x; got {names[:3]}")
    comp_names = names[3:]
    t_all = data["t"]
    t_vals, idx = np.unique(t_all, return_index=True)
    order = np.argsort(idx)
    t_vals = t_vals[order]
    n_t = len(t_vals)
    n_x = len(t_all) // n_t
    x = data["x"][:n_x]
    ramp = data["mu_or_I"][:: n_x][:n_t]
    planes = np.stack([data[c].reshape(n_t, n_x) for c in comp_names], axis=1)
    if comp_names == ("re", "im"):
        fields = planes[:, 0, :] + 1j * planes[:, 1, :]
    else:
        fields = planes
    return Trajectory(t=t_vals, ramp=ramp, fields=fields, x=x)


def save_trajectory_binary(traj: Trajectory, path) -> None:
    is_complex = traj.fields.ndim == 2
    planes = 2 if is_complex else traj.fields.shape[1]
    n = len(traj.x)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIQQQ", 1, 1 if is_complex else 0, n, planes, traj.n_snapshots))
        fh.write(np.asarray(traj.x, dtype="<f8").tobytes())
        for i in range(traj.n_snapshots):
            fh.write(struct.pack("<dd", float(traj.t[i]), float(traj.ramp[i])))
            if is_complex:
                fh.write(traj.fields[i].real.astype("<f8").tobytes())
                fh.write(traj.fields[i].imag.astype("<f8").tobytes())
            else:
                fh.write(traj.fields[i].astype("<f8").tobytes())


def load_trajectory_binary(path) -> Trajectory:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise SchemaError(f"bad magic {magic!r}; not a trajectory snapshot file")
        version, flags, n, planes, n_snap = struct.unpack("<IIQQQ", fh.read(32))
        if version != 1:
            raise SchemaError(f"unsupported snapshot format version {version}")
        x = np.frombuffer(fh.read(8 * n), dtype="<f8")
        t = np.empty(n_snap)
        ramp = np.empty(n_snap)
        is_complex = bool(flags & 1)
        if is_complex:
            fields = np.empty((n_snap, n), dtype=complex)
        else:
            fields = np.empty((n_snap, planes, n))
        for i in range(n_snap):
            t[i], ramp[i] = struct.unpack("<dd", fh.read(16))
            raw = np.frombuffer(fh.read(8 * n * planes), dtype="<f8").reshape(planes, n)
            fields[i] = raw[0] + 1j * raw[1] if is_complex else raw
    return Trajectory(t=t, ramp=ramp, fields=fields, x=x)
