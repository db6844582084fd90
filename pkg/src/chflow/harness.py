"""Experiment registry and sweep runner.

Each experiment fixes a domain, initial data, measurement times, and a
reference solution; each scheme adapter knows how to initialize itself
from the experiment data, expose an ODE right-hand side over a flat state
vector, and evaluate its interpolant on the measurement grid. The runner
sweeps n = 2^k, times the integrator call, measures errors against the
reference, and emits one row per measurement time.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import multipeakon as mp
from . import reference_schemes as rs
from . import reference_solutions as ref
from . import variational as vd
from .grid import GridSpec
from .metrics import ErrorReport, Interpolant, error_norms
from .ode import Tolerances, integrate

SCHEMES = ("vd", "cmp", "hr", "lp", "lp2ch", "ckr", "ps", "psda")

RESULT_FIELDS = (
    "experiment", "scheme", "n", "t_final", "l2_error", "h1_error",
    "rho_l2_error", "runtime_seconds", "energy_deviation",
    "momentum_deviation", "accepted_steps", "rejected_steps",
)


class SchemeRejected(ValueError):
    """Initial data outside the scheme's admissible class."""


@dataclass
class ResultRow:
    experiment: str
    scheme: str
    n: int
    t_final: float
    l2_error: float | None = None
    h1_error: float | None = None
    rho_l2_error: float | None = None
    runtime_seconds: float | None = None
    energy_deviation: float | None = None
    momentum_deviation: float | None = None
    accepted_steps: int | None = None
    rejected_steps: int | None = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in RESULT_FIELDS}


@dataclass
class ExperimentConfig:
    experiment: str
    scheme: str
    kmin: int
    kmax: int
    abs_tol: float | None = None
    rel_tol: float | None = None
    k0: int | None = None
    shifted: bool | None = None
    timing_repeats: int = 3

    def __post_init__(self):
        spec = experiment_spec(self.experiment)
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme not in spec.schemes:
            raise ValueError(
                f"scheme {self.scheme!r} is not applicable to {self.experiment!r}")
        if not (1 <= self.kmin <= self.kmax):
            raise ValueError("need 1 <= kmin <= kmax")
        if self.abs_tol is None:
            self.abs_tol = spec.tol
        if self.rel_tol is None:
            self.rel_tol = spec.tol
        if self.k0 is None:
            self.k0 = self.kmax + 2
        if self.shifted is None:
            self.shifted = spec.shifted


# -- experiment registry ------------------------------------------------------


@dataclass
class ExperimentSpec:
    id: str
    schemes: tuple
    tol: float
    shifted: bool = False
    qualitative: bool = False

    def domain(self) -> float:
        raise NotImplementedError

    def u0(self):
        raise NotImplementedError

    def rho0(self):
        return None

    def measure_times(self) -> list:
        raise NotImplementedError

    def trace_times(self):
        return None

    def reference(self, t: float) -> Interpolant | None:
        return None

    def vd_formulation(self) -> str:
        return "H"

    def vd_init(self, g: GridSpec):
        return vd.init_lagrangian(self.u0(), self.rho0(), g, self.vd_formulation())


class SmoothCH(ExperimentSpec):
    def __init__(self):
        super().__init__("smooth-ch", ("vd", "cmp", "hr", "lp", "ckr", "ps", "psda"), 1e-10)

    def domain(self):
        return ref.traveling_wave_ch().period

    def u0(self):
        w = ref.traveling_wave_ch()
        return lambda x: w.u(0.0, x)

    def measure_times(self):
        return [self.domain() / 3.0]

    def reference(self, t):
        w = ref.traveling_wave_ch()
        return Interpolant(u=lambda x: w.u(t, x), ux=lambda x: w.ux(t, x))


class Smooth2CH(ExperimentSpec):
    def __init__(self):
        super().__init__("smooth-2ch", ("vd", "lp2ch"), 1e-8)

    def domain(self):
        return ref.traveling_wave_2ch().period

    def u0(self):
        w = ref.traveling_wave_2ch()
        return lambda x: w.u(0.0, x)

    def rho0(self):
        w = ref.traveling_wave_2ch()
        return lambda x: w.rho(0.0, x)

    def measure_times(self):
        return [self.domain() / 2.0]

    def reference(self, t):
        w = ref.traveling_wave_2ch()
        return Interpolant(u=lambda x: w.u(t, x), ux=lambda x: w.ux(t, x),
                           rho=lambda x: w.rho(t, x))


class PeriodicPeakonExp(ExperimentSpec):
    def __init__(self):
        super().__init__("periodic-peakon", ("vd", "hr", "lp", "ckr", "ps", "psda"),
                         1e-8, shifted=True)
        self.c, self.x0, self.L = 1.0, 0.5, 1.0

    def domain(self):
        return self.L

    def u0(self):
        w = ref.periodic_peakon(self.c, self.x0, self.L)
        return lambda x: w.u(0.0, x)

    def measure_times(self):
        return [self.L]

    def reference(self, t):
        w = ref.periodic_peakon(self.c, self.x0, self.L)
        return Interpolant(u=lambda x: w.u(t, x), ux=lambda x: w.ux(t, x))


@lru_cache(maxsize=4)
def _two_peakon_states(times: tuple):
    states = ref.two_peakon_reference(list(times))
    return dict(zip(times, states))


@lru_cache(maxsize=4)
def _four_peakon_states(times: tuple):
    states = ref.four_peakon_reference(list(times))
    return dict(zip(times, states))


class PeakonAntipeakon(ExperimentSpec):
    def __init__(self):
        super().__init__("peakon-antipeakon", ("vd", "cmp", "lp", "ckr", "ps", "psda"),
                         1e-9)
        self.L = 2.0 * np.pi

    def domain(self):
        return self.L

    def u0(self):
        return ref.peakon_antipeakon_initial(1.0, self.L)

    def measure_times(self):
        return [4.5]

    def reference(self, t):
        state = _two_peakon_states(tuple(self.measure_times()))[t]
        u, ux = ref.peakon_interpolant_pair(state)
        return Interpolant(u=u, ux=ux)


class CollisionInit(ExperimentSpec):
    def __init__(self):
        super().__init__("collision-init", ("vd",), 1e-8)
        self.L, self.E = 8.0, 6.0

    def domain(self):
        return self.L

    def u0(self):
        return lambda x: np.zeros_like(np.asarray(x, dtype=np.float64))

    def cumulative_measure(self):
        def F(x):
            if x <= 2.0:
                return 0.0
            if x <= 6.0:
                return 3.0
            return 6.0
        return F

    def measure_times(self):
        return [2.0, 4.0]

    def reference(self, t):
        state = _four_peakon_states(tuple(self.measure_times()))[t]
        u, ux = ref.peakon_interpolant_pair(state)
        return Interpolant(u=u, ux=ux)

    def vd_init(self, g: GridSpec):
        return vd.init_from_measure(self.u0(), self.cumulative_measure(), self.E, g)


class SineCH(ExperimentSpec):
    def __init__(self):
        super().__init__("sine-ch", ("vd", "cmp"), 1e-10, qualitative=True)

    def domain(self):
        return 2.0 * np.pi

    def u0(self):
        return np.sin

    def measure_times(self):
        return [6.0 * np.pi]

    def trace_times(self):
        return np.linspace(0.0, 6.0 * np.pi, 30)


class Sine2CH(ExperimentSpec):
    def __init__(self):
        super().__init__("sine-2ch", ("vd",), 1e-10, qualitative=True)

    def domain(self):
        return 2.0 * np.pi

    def u0(self):
        return np.sin

    def rho0(self):
        return lambda x: np.full_like(np.asarray(x, dtype=np.float64), 2.0)

    def measure_times(self):
        return [6.0 * np.pi]

    def trace_times(self):
        return np.linspace(0.0, 6.0 * np.pi, 30)

    def vd_formulation(self):
        return "h"


_REGISTRY = {}
for _cls in (SmoothCH, Smooth2CH, PeriodicPeakonExp, PeakonAntipeakon,
             CollisionInit, SineCH, Sine2CH):
    _inst = _cls()
    _REGISTRY[_inst.id] = _inst

EXPERIMENTS = tuple(_REGISTRY)


def experiment_spec(exp_id: str) -> ExperimentSpec:
    if exp_id not in _REGISTRY:
        raise ValueError(f"unknown experiment {exp_id!r}")
    return _REGISTRY[exp_id]


# -- scheme adapters ----------------------------------------------------------


class _Adapter:
    """Bundles the flat-vector ODE view of one scheme instance."""

    def __init__(self, v0, rhs, interpolant, invariants):
        self.v0 = v0
        self.rhs = rhs
        self.interpolant = interpolant   # vector -> Interpolant
        self.invariants = invariants     # dict name -> vector -> float


def _sample(f, x):
    v = np.asarray(f(x), dtype=np.float64)
    if v.shape != x.shape:
        v = np.asarray([f(xi) for xi in x], dtype=np.float64)
    return v


def _vd_adapter(spec: ExperimentSpec, g: GridSpec) -> _Adapter:
    template = spec.vd_init(g)
    system = "2CH" if np.any(template.r != 0.0) else "CH"

    def rhs(t, v):
        return np.concatenate(vd.rhs_vd(template.with_vector(v), system))

    def interp(v):
        st = template.with_vector(v)
        has_rho = system == "2CH"
        return Interpolant(
            u=lambda x: vd.eval_lagrangian_interpolant(st, x)[0],
            ux=lambda x: vd.eval_lagrangian_interpolant(st, x)[1],
            rho=(lambda x: vd.eval_lagrangian_interpolant(st, x)[2]) if has_rho else None)

    inv = {
        "energy": lambda v: vd.lagrangian_invariants(template.with_vector(v))[0],
        "momentum": lambda v: vd.lagrangian_invariants(template.with_vector(v))[1],
    }
    return _Adapter(template.pack(), rhs, interp, inv)


def _cmp_adapter(spec: ExperimentSpec, g: GridSpec) -> _Adapter:
    state0 = mp.init_peakons(spec.u0(), g)
    L = g.L

    def rhs(t, v):
        return np.concatenate(mp.rhs_periodic(mp.PeakonState.unpack(v, L)))

    def interp(v):
        st = mp.PeakonState.unpack(v, L)
        u, ux = ref.peakon_interpolant_pair(st)
        return Interpolant(u=u, ux=ux)

    inv = {"energy": lambda v: float(v[-1])}   # H_n is the last packed entry
    return _Adapter(state0.pack(), rhs, interp, inv)


def _fd_adapter(spec: ExperimentSpec, g: GridSpec, scheme: str) -> _Adapter:
    xs = g.xi
    u0s = _sample(spec.u0(), xs)
    stencil = "compact" if scheme == "hr" else "noncompact"
    m0 = rs.helmholtz_apply(u0s, stencil, g)
    if scheme == "hr":
        mmax = float(np.max(m0))
        if mmax <= 0 or float(np.min(m0)) < -1e-3 * mmax:
            raise SchemeRejected("momentum data is not a nonnegative measure")
    if scheme == "lp2ch":
        rho0 = _sample(spec.rho0(), xs)
        v0 = np.concatenate([m0, rho0])
    else:
        v0 = m0.copy()
    n = g.n

    def rhs(t, v):
        if scheme == "lp2ch":
            md, rd = rs.rhs_fd(rs.EulerianState(scheme, v[:n], v[n:]), scheme, g)
            return np.concatenate([md, rd])
        md, _ = rs.rhs_fd(rs.EulerianState(scheme, v), scheme, g)
        return md

    def interp(v, rho_interp="linear"):
        m = v[:n] if scheme == "lp2ch" else v
        u = rs.helmholtz_invert(m, stencil, g)
        it = Interpolant(
            u=lambda x: rs.eval_grid_interpolant(u, g, x)[0],
            ux=lambda x: rs.eval_grid_interpolant(u, g, x)[1])
        if scheme == "lp2ch":
            rho = v[n:]
            if rho_interp == "linear":
                it.rho = lambda x: rs.eval_grid_interpolant(rho, g, x)[0]
            else:
                it.rho = lambda x: rho[np.mod(np.floor(np.asarray(x) / g.dxi).astype(int), n)]
        return it

    def energy(v):
        m = v[:n] if scheme == "lp2ch" else v
        u = rs.helmholtz_invert(m, stencil, g)
        if scheme == "hr":
            du = (np.roll(u, -1) - u) / g.dxi
        else:
            du = (np.roll(u, -1) - np.roll(u, 1)) / (2 * g.dxi)
        e = 0.5 * g.dxi * np.sum(u * u + du * du)
        if scheme == "lp2ch":
            e += 0.5 * g.dxi * np.sum(v[n:] ** 2)
        return float(e)

    inv = {"energy": energy,
           "momentum": lambda v: float(g.dxi * np.sum(v[:n] if scheme == "lp2ch" else v))}
    return _Adapter(v0, rhs, interp, inv)


def _ckr_adapter(spec: ExperimentSpec, g: GridSpec) -> _Adapter:
    xs = g.xi + 0.5 * g.dxi
    u0s = _sample(spec.u0(), xs)

    def rhs(t, v):
        return rs.rhs_ckr(v, g)

    def interp(v):
        return Interpolant(
            u=lambda x: rs.eval_grid_interpolant(v, g, x, offset=0.5)[0],
            ux=lambda x: rs.eval_grid_interpolant(v, g, x, offset=0.5)[1])

    def energy(v):
        du = (v - np.roll(v, 1)) / g.dxi
        return float(0.5 * g.dxi * np.sum(v * v + du * du))

    return _Adapter(u0s.copy(), rhs, interp, {"energy": energy})


def _ps_adapter(spec: ExperimentSpec, g: GridSpec, dealias: bool) -> _Adapter:
    xs = g.xi
    u0s = _sample(spec.u0(), xs)
    st0 = rs.spectral_init(u0s, g.L)
    n = g.n
    a = st0.a
    L = g.L

    def unpack(v):
        return rs.SpectralState(v[:n] + 1j * v[n:], a)

    def rhs(t, v):
        vdot = rs.rhs_ps(unpack(v), dealias=dealias)
        return np.concatenate([vdot.real, vdot.imag])

    def interp(v):
        st = unpack(v)
        return Interpolant(
            u=lambda x: rs.ps_eval(st, L, x),
            ux=lambda x: rs.ps_eval(st, L, x, deriv=True))

    def energy(v):
        st = unpack(v)
        u = np.fft.ifft(st.V).real
        k = rs.fft_freqs(n)
        ux = np.fft.ifft(1j * k * st.V).real / a
        return float(0.5 * g.dxi * np.sum(u * u + ux * ux))

    v0 = np.concatenate([st0.V.real, st0.V.imag])
    return _Adapter(v0, rhs, interp, {"energy": energy})


def make_adapter(spec: ExperimentSpec, scheme: str, n: int) -> _Adapter:
    g = GridSpec(n, spec.domain())
    if scheme == "vd":
        return _vd_adapter(spec, g)
    if scheme == "cmp":
        return _cmp_adapter(spec, g)
    if scheme in ("hr", "lp", "lp2ch"):
        return _fd_adapter(spec, g, scheme)
    if scheme == "ckr":
        return _ckr_adapter(spec, g)
    if scheme in ("ps", "psda"):
        return _ps_adapter(spec, g, dealias=(scheme == "psda"))
    raise ValueError(f"unknown scheme {scheme!r}")


# -- runner -------------------------------------------------------------------


def _nan_row(exp_id, scheme, n, t):
    return ResultRow(exp_id, scheme, n, t, l2_error=math.nan, h1_error=math.nan,
                     runtime_seconds=math.nan, energy_deviation=math.nan,
                     momentum_deviation=math.nan)


def run(config: ExperimentConfig):
    """Execute one (experiment, scheme) sweep. Returns (rows, failure_count)."""
    spec = experiment_spec(config.experiment)
    tol = Tolerances(config.abs_tol, config.rel_tol)
    measure = spec.measure_times()
    trace = spec.trace_times()
    output_times = np.unique(np.concatenate(
        [np.asarray(measure, dtype=np.float64),
         np.asarray(trace, dtype=np.float64) if trace is not None else []]))
    t_end = float(output_times[-1])

    rows = []
    failures = 0
    for k in range(config.kmin, config.kmax + 1):
        n = 2 ** k
        try:
            adapter = make_adapter(spec, config.scheme, n)
            runtimes = []
            traj = None
            sample_times = np.unique(np.concatenate([[0.0], output_times]))
            for _ in range(max(1, config.timing_repeats)):
                t0 = time.perf_counter()
                traj = integrate(adapter.rhs, adapter.v0, (0.0, t_end), tol,
                                 output_times=sample_times)
                runtimes.append(time.perf_counter() - t0)
            runtime = float(np.median(runtimes))
            states = dict(zip(traj.times, traj.states))
            inv0 = {name: ev(traj.states[0]) for name, ev in adapter.invariants.items()}

            def deviation(name, upto):
                if name not in adapter.invariants:
                    return None
                ev = adapter.invariants[name]
                ts = [t for t in traj.times if t <= upto + 1e-12]
                return float(max(abs(ev(states[t]) - inv0[name]) for t in ts))

            for t_m in measure:
                v = states[min(states, key=lambda t: abs(t - t_m))]
                row = ResultRow(config.experiment, config.scheme, n, float(t_m),
                                runtime_seconds=runtime,
                                accepted_steps=traj.stats.accepted,
                                rejected_steps=traj.stats.rejected,
                                energy_deviation=deviation("energy", t_m),
                                momentum_deviation=deviation("momentum", t_m))
                reference = spec.reference(t_m)
                if reference is not None:
                    g = GridSpec(n, spec.domain())
                    rep = error_norms(adapter.interpolant(v), reference, g,
                                      config.k0, config.shifted)
                    row.l2_error = rep.l2
                    row.h1_error = rep.h1
                    row.rho_l2_error = rep.rho_l2
                rows.append(row)
        except Exception:
            failures += 1
            for t_m in measure:
                rows.append(_nan_row(config.experiment, config.scheme, n, float(t_m)))
    return rows, failures


# -- emission -----------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def emit(rows, fmt: str, path: str) -> None:
    """Write rows as CSV (fixed header) or JSON lines."""
    if fmt == "csv":
        lines = [",".join(RESULT_FIELDS)]
        for r in rows:
            d = r.as_dict()
            lines.append(",".join(_fmt(d[k]) for k in RESULT_FIELDS))
        text = "\n".join(lines) + "\n"
    elif fmt == "jsonl":
        out = []
        for r in rows:
            out.append(json.dumps(r.as_dict(), allow_nan=True))
        text = "\n".join(out) + ("\n" if out else "")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def parse_csv(path: str):
    """Read back an emitted CSV into ResultRow objects (round-trip exact)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    header = lines[0].split(",")
    if header != list(RESULT_FIELDS):
        raise ValueError("unexpected result header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        kw = {}
        for key, raw in zip(RESULT_FIELDS, parts):
            if raw == "":
                kw[key] = None
            elif key in ("experiment", "scheme"):
                kw[key] = raw
            elif key in ("n", "accepted_steps", "rejected_steps"):
                kw[key] = int(raw)
            else:
                kw[key] = float(raw)
        rows.append(ResultRow(**kw))
    return rows
