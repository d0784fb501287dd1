"""Interacting-particle Euler-Maruyama integrator with delay segments.

N particles share an empirical per-site law; its root second moment feeds
back into drift and diffusion, the standard synchronous particle
approximation of the mean-field limit.  Noise is counter-based (Philox
keyed by (seed, step)), so runs are bitwise reproducible regardless of
scheduling and two systems can share a noise path exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import SegmentBuffer, neg_laplacian, tail_mass_values

# Second key words >= _INIT_STREAM_BASE are reserved for initial-condition
# sampling; step streams use the step index directly and stay far below.
_INIT_STREAM_BASE = 0xFFFF_FFFF_0000_0000


class DivergenceError(RuntimeError):
    """The explicit scheme produced a non-finite state."""

    def __init__(self, particle: int, site: int, step: int):
        self.particle = particle
        self.site = site
        self.step = step
        super().__init__(
            f"non-finite state at particle {particle}, site {site}, "
            f"step {step}; reduce dt or stiffness"
        )


def noise_block(seed: int, step: int, particles: int, sites: int) -> np.ndarray:
    """Standard-normal block for one step, shape (particles, sites)."""
    key = np.array([seed, step], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.standard_normal((particles, sites))


def _init_rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed, _INIT_STREAM_BASE + stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    half_width: int
    particle_count: int
    delay: float
    t_start: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.particle_count < 1:
            raise ValueError("particle_count must be >= 1")
        if self.half_width < 1:
            raise ValueError("half_width must be >= 1")
        k = self.delay / self.dt
        if abs(k - round(k)) > 1e-9 * max(1.0, round(k)) or round(k) < 1:
            raise ValueError(
                f"delay {self.delay} must be a positive integer multiple "
                f"of dt {self.dt}"
            )

    @property
    def segment_steps(self) -> int:
        return int(round(self.delay / self.dt))

    @property
    def site_count(self) -> int:
        return 2 * self.half_width + 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)


@dataclass(frozen=True)
class InitialCondition:
    """Sampler for the initial delay segment, constant in segment time.

    kinds:
      zero              point mass at the origin
      spike:c           deterministic value c at site 0
      const:c:radius    deterministic value c on |i| <= radius
      gaussian:s:radius site-iid normal with scale s on |i| <= radius
    """

    kind: str = "zero"
    value: float = 0.0
    radius: int = -1  # -1 means the whole truncation

    def __post_init__(self):
        if self.kind not in ("zero", "spike", "const", "gaussian"):
            raise ValueError(f"unknown initial condition kind {self.kind!r}")

    @classmethod
    def from_spec(cls, text: str) -> "InitialCondition":
        parts = text.split(":")
        kind = parts[0]
        if kind == "zero":
            return cls("zero")
        if kind == "spike":
            return cls("spike", float(parts[1]))
        if kind in ("const", "gaussian"):
            radius = int(parts[2]) if len(parts) > 2 else -1
            return cls(kind, float(parts[1]), radius)
        raise ValueError(f"unknown initial condition kind {kind!r}")

    def to_spec(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "spike":
            return f"spike:{self.value!r}"
        return f"{self.kind}:{self.value!r}:{self.radius}"

    def sample(self, cfg: SolverConfig, stream: int = 0) -> np.ndarray:
        """Segment frames for all particles, shape (K+1, N, sites)."""
        k1 = cfg.segment_steps + 1
        n, s = cfg.particle_count, cfg.site_count
        radius = cfg.half_width if self.radius < 0 else self.radius
        mask = np.abs(cfg.sites) <= radius
        if self.kind == "zero":
            return np.zeros((k1, n, s))
        if self.kind == "spike":
            frames = np.zeros((k1, n, s))
            frames[:, :, cfg.half_width] = self.value
            return frames
        if self.kind == "const":
            profile = np.where(mask, self.value, 0.0)
            return np.broadcast_to(profile, (k1, n, s)).copy()
        rng = _init_rng(cfg.seed, stream)
        profile = rng.normal(0.0, self.value, (n, s)) * mask
        return np.broadcast_to(profile, (k1, n, s)).copy()


class ParticleEnsemble:
    """N coupled particles, each carrying a delay segment.

    frames has shape (K+1, N, sites); frames[0] is the state at t-r,
    frames[-1] the state at t.
    """

    def __init__(self, config: SolverConfig, frames: np.ndarray,
                 step_index: int = 0):
        expected = (config.segment_steps + 1, config.particle_count,
                    config.site_count)
        if frames.shape != expected:
            raise ValueError(f"frames shape {frames.shape}, expected {expected}")
        self.config = config
        self.frames = np.asarray(frames, dtype=float)
        self.step_index = step_index

    @property
    def half_width(self) -> int:
        return self.config.half_width

    @property
    def time(self) -> float:
        return self.config.t_start + self.step_index * self.config.dt

    @property
    def current(self) -> np.ndarray:
        return self.frames[-1]

    @property
    def delayed(self) -> np.ndarray:
        return self.frames[0]

    def frame_at_offset(self, s: float) -> np.ndarray:
        """Frame at segment offset s in [-r, 0], shape (N, sites)."""
        r = self.config.delay
        if s < -r - 1e-12 or s > 1e-12:
            raise ValueError(f"offset {s} outside [-{r}, 0]")
        idx = int(round((s + r) / self.config.dt))
        return self.frames[idx]

    def segment_of(self, k: int) -> SegmentBuffer:
        return SegmentBuffer.from_array(
            self.frames[:, k, :], self.config.delay, self.config.dt,
            self.config.half_width)

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(self.config, self.frames.copy(),
                                self.step_index)


def init_ensemble(cfg: SolverConfig, ic: InitialCondition,
                  stream: int = 0) -> ParticleEnsemble:
    return ParticleEnsemble(cfg, ic.sample(cfg, stream))


def _increment(coeffs, t, sites, cur, delayed, m, nu, lam, dt, dW):
    """One Euler-Maruyama increment; shared by step() and picard_solve()
    so the two paths are bitwise identical at the fixed point."""
    f = coeffs.drift(t, sites, cur, delayed, m)
    g = coeffs.forcing(t, sites)
    sig = coeffs.diffusion(t, sites, cur, delayed, m)
    return dt * (-nu * neg_laplacian(cur) - lam * cur + f + g) + sig * dW


def _mean_field(cur: np.ndarray) -> np.ndarray:
    """Per-site root second moment across particles."""
    return np.sqrt(np.mean(cur**2, axis=0))


def step(ens: ParticleEnsemble, coeffs, nu: float, lam: float,
         shared_noise: np.ndarray | None = None) -> ParticleEnsemble:
    """Advance all particles by one time step, in place."""
    cfg = ens.config
    cur = ens.current
    if shared_noise is None:
        dW = noise_block(cfg.seed, ens.step_index, cfg.particle_count,
                         cfg.site_count) * np.sqrt(cfg.dt)
    else:
        dW = shared_noise
    # blow-up is reported through DivergenceError, not float warnings
    with np.errstate(over="ignore", invalid="ignore"):
        m = _mean_field(cur)
        new = cur + _increment(coeffs, ens.time, cfg.sites, cur, ens.delayed,
                               m, nu, lam, cfg.dt, dW)
    if not np.all(np.isfinite(new)):
        bad = np.argwhere(~np.isfinite(new))[0]
        raise DivergenceError(int(bad[0]), int(bad[1]) - cfg.half_width,
                              ens.step_index)
    ens.frames[:-1] = ens.frames[1:]
    ens.frames[-1] = new
    ens.step_index += 1
    return ens


def run_until(ens: ParticleEnsemble, coeffs, nu: float, lam: float,
              T: float) -> ParticleEnsemble:
    """Iterate step() until time T (T - t must be a multiple of dt)."""
    cfg = ens.config
    span = (T - ens.time) / cfg.dt
    n = int(round(span))
    if n < 0 or abs(span - n) > 1e-6:
        raise ValueError(f"T={T} not reachable from t={ens.time} on the grid")
    for _ in range(n):
        step(ens, coeffs, nu, lam)
    return ens


def em_trajectory(cfg: SolverConfig, ic: InitialCondition, coeffs, nu: float,
                  lam: float, steps: int, stream: int = 0):
    """Run the explicit scheme and record every state.

    Returns (ensemble, states) with states of shape (steps+1, N, sites).
    """
    ens = init_ensemble(cfg, ic, stream)
    states = np.empty((steps + 1, cfg.particle_count, cfg.site_count))
    states[0] = ens.current
    for k in range(steps):
        step(ens, coeffs, nu, lam)
        states[k + 1] = ens.current
    return ens, states


def picard_solve(cfg: SolverConfig, ic: InitialCondition, coeffs, nu: float,
                 lam: float, steps: int, iterations: int,
                 stream: int = 0) -> np.ndarray:
    """Discrete Picard iteration on a fixed noise path.

    Iterate n accumulates increments evaluated along iterate n-1 (values,
    delayed values and laws alike); iterate 0 is frozen at the initial
    state.  After `steps` iterations the fixed point is the explicit
    trajectory exactly.  Returns states of shape (steps+1, N, sites).
    """
    K = cfg.segment_steps
    n, s = cfg.particle_count, cfg.site_count
    seg0 = ic.sample(cfg, stream)  # (K+1, N, sites)
    noise = [noise_block(cfg.seed, k, n, s) * np.sqrt(cfg.dt)
             for k in range(steps)]
    sites = cfg.sites

    hist_prev = np.empty((K + steps + 1, n, s))
    hist_prev[: K + 1] = seg0
    hist_prev[K + 1 :] = seg0[-1]
    # early iterates can overflow transiently far past the exact prefix;
    # those entries are overwritten on later sweeps, so float warnings
    # there are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(iterations):
            hist_new = np.empty_like(hist_prev)
            hist_new[: K + 1] = seg0
            for k in range(steps):
                cur = hist_prev[K + k]
                delayed = hist_prev[k]
                t = cfg.t_start + k * cfg.dt
                inc = _increment(coeffs, t, sites, cur, delayed,
                                 _mean_field(cur), nu, lam, cfg.dt, noise[k])
                hist_new[K + k + 1] = hist_new[K + k] + inc
            hist_prev = hist_new
    return hist_prev[K:]


@dataclass
class CoupledPair:
    """Two ensembles driven by the same noise path."""

    a: ParticleEnsemble
    b: ParticleEnsemble

    def __post_init__(self):
        if self.a.config != self.b.config:
            raise ValueError("coupled ensembles must share the solver config")
        if self.a.step_index != self.b.step_index:
            raise ValueError("coupled ensembles must be synchronized in time")

    def gap(self) -> float:
        """Mean over particles of the squared sup-segment difference."""
        diff = self.a.frames - self.b.frames
        per_particle = np.max(np.sum(diff**2, axis=2), axis=0)
        return float(np.mean(per_particle))


def couple_run(pair: CoupledPair, coeffs, nu: float, lam: float, T: float,
               record_every: float) -> list:
    """Step both ensembles with identical noise; record (t, gap)."""
    cfg = pair.a.config
    every = int(round(record_every / cfg.dt))
    if every < 1 or abs(record_every / cfg.dt - every) > 1e-6:
        raise ValueError("record_every must be a positive multiple of dt")
    total = int(round((T - pair.a.time) / cfg.dt))
    series = [(pair.a.time, pair.gap())]
    for k in range(total):
        dW = noise_block(cfg.seed, pair.a.step_index, cfg.particle_count,
                         cfg.site_count) * np.sqrt(cfg.dt)
        step(pair.a, coeffs, nu, lam, shared_noise=dW)
        step(pair.b, coeffs, nu, lam, shared_noise=dW)
        if (k + 1) % every == 0:
            series.append((pair.a.time, pair.gap()))
    return series


def second_moment_segment(ens: ParticleEnsemble) -> float:
    sup = np.max(np.sum(ens.frames**2, axis=2), axis=0)
    return float(np.mean(sup))


def fourth_moment_segment(ens: ParticleEnsemble) -> float:
    sup = np.max(np.sum(ens.frames**2, axis=2), axis=0)
    return float(np.mean(sup**2))


def sup_segment_tail(ens: ParticleEnsemble, n: int) -> float:
    """Mean over particles of the sup over the segment of the tail mass."""
    tails = tail_mass_values(ens.frames, n, ens.half_width)  # (K+1, N)
    return float(np.mean(np.max(tails, axis=0)))
