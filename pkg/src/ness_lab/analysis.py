"""Parameter-space exploration: concurrence maxima, entanglement boundaries,
critical heat currents and heat-current/concurrence region scans.

Steady states inside optimization and sampling loops are evaluated through
the excitation-sector direct solver (memory case) or the closed-form
steady state (memoryless case); both routes are validated against the
eigendecomposition nullspace solver by the test suite.

Random log-uniform sampling alone badly undersamples the extremes of the
``(|Q_dot|, C)`` region, so :func:`sample_cq_region` follows the cloud with
penalized derivative-free searches that push toward the upper hull, the
lower hull and the maximal current before the hulls are binned.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import generators, observables
from .errors import ParameterError, SingularBoundaryError
from .model import ModelParams

_SQRT2 = math.sqrt(2.0)
_LOG_LO, _LOG_HI = math.log(1e-2), math.log(1e3)  # sampling range of couplings
_CLIP_LO, _CLIP_HI = math.log(1e-6), math.log(1e3)  # hard search bounds
DEFAULT_SEARCH_BOX = ((1e-2, 1e3), (1e-2, 1e3))
OVERHANG_MIN_C = 1e-3
N_HULL_BINS = 200


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a concurrence (or current) maximization."""

    best_params: ModelParams
    c_max: float
    q_dot_at_best: float
    n_evaluations: int
    converged: bool


@dataclass
class RegionSample:
    """Sampled ``(|Q_dot|, C)`` cloud with per-bin hull estimates.

    ``points_q``/``points_c``/``points_couplings`` hold one row per steady
    state (couplings ordered gamma1, gamma2, upsilon1, upsilon2);
    ``hull_lower``/``hull_upper`` are the per-bin concurrence extremes over
    the ``bin_edges`` grid (NaN for empty bins).
    """

    z1: float
    z2: float
    p: float
    seed: int
    points_q: np.ndarray
    points_c: np.ndarray
    points_couplings: np.ndarray
    bin_edges: np.ndarray = field(default=None)
    hull_lower: np.ndarray = field(default=None)
    hull_upper: np.ndarray = field(default=None)
    bin_counts: np.ndarray = field(default=None)

    def iter_points(self):
        """Yield (q_abs, concurrence, (g1, g2, u1, u2)) tuples."""
        for q, c, g in zip(self.points_q, self.points_c, self.points_couplings):
            yield float(q), float(c), tuple(float(x) for x in g)


# ---------------------------------------------------------------------------
# Point evaluation.  The memory case avoids any operator construction by
# working with precomputed diagonal masks and index maps on the 16-dim state.
# ---------------------------------------------------------------------------

_BITS = np.array([[int(b) for b in format(i, "04b")] for i in range(16)])
_EXCITED = 1 - _BITS  # excited-first basis: bit 0 means excited


def _system_reduction_batch(states: np.ndarray) -> np.ndarray:
    """Partial trace over the memory qubits for a (n, 16, 16) batch."""
    resh = states.reshape(-1, 4, 4, 4, 4)
    return np.einsum("nsmtm->nst", resh)


def _x_concurrence_batch(rho_s: np.ndarray) -> np.ndarray:
    p11 = np.clip(rho_s[:, 0, 0].real, 0.0, None)
    p44 = np.clip(rho_s[:, 3, 3].real, 0.0, None)
    val = 2.0 * (np.abs(rho_s[:, 1, 2]) - np.sqrt(p11 * p44))
    return np.clip(val, 0.0, 1.0)


def _heat_current_batch(states: np.ndarray, z1, z2, g1, g2, p) -> np.ndarray:
    """Dissipator-route bath-1 current for a (n, 16, 16) batch (scaled units)."""
    diags = np.einsum("nii->ni", states).real
    occ = diags @ _EXCITED  # (n, 4): excitation of S1, S2, M1, M2
    z1m, z1p = (1.0 - np.asarray(z1)) / 2.0, (1.0 + np.asarray(z1)) / 2.0
    direct = g1 * (z1m * occ[:, 0] - z1p * (1.0 - occ[:, 0]))
    via_mem = g1 * (z1m * occ[:, 2] - z1p * (1.0 - occ[:, 2]))
    return (1.0 - p) * direct + p * via_mem


def _eval_memoryless_batch(z1, z2, g1, g2) -> tuple[np.ndarray, np.ndarray]:
    """(q_abs, concurrence) arrays from the closed-form steady state."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    eta = (z1 - z2) * g1 * g2 / ((g1 + g2) * (g1 * g2 + 4.0))
    s1 = z1 - 4.0 * eta / g1
    s2 = z2 + 4.0 * eta / g2
    u1, u2 = (1.0 + s1) / 2.0, (1.0 + s2) / 2.0
    p11 = u1 * u2 - eta**2
    p44 = (1.0 - u1) * (1.0 - u2) - eta**2
    conc = np.clip(2.0 * (np.abs(eta) - np.sqrt(np.clip(p11 * p44, 0.0, None))), 0.0, 1.0)
    return 2.0 * np.abs(eta), conc


def _eval_couplings(z1: float, z2: float, p: float,
                    couplings: np.ndarray) -> tuple[float, float]:
    """(q_abs, concurrence) of the steady state at one coupling vector."""
    g1, g2, u1, u2 = couplings
    if p == 0.0:
        q, c = _eval_memoryless_batch(z1, z2, g1, g2)
        return float(q), float(c)
    params = ModelParams(z1=z1, z2=z2, gamma1=g1, gamma2=g2,
                         upsilon1=u1, upsilon2=u2, p=p)
    state = generators.fast_steady_state(params)
    batch = state[None, :, :]
    q = _heat_current_batch(batch, z1, z2, g1, g2, p)[0]
    c = _x_concurrence_batch(_system_reduction_batch(batch))[0]
    return float(abs(q)), float(c)


def _eval_couplings_batch(z1, z2, p, couplings: np.ndarray,
                          chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Batched version of :func:`_eval_couplings`; invalid solves become NaN."""
    if p == 0.0:
        return _eval_memoryless_batch(z1, z2, couplings[:, 0], couplings[:, 1])
    n = couplings.shape[0]
    qs = np.full(n, np.nan)
    cs = np.full(n, np.nan)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        params = [ModelParams(z1=z1, z2=z2, gamma1=g[0], gamma2=g[1],
                              upsilon1=g[2], upsilon2=g[3], p=p)
                  for g in couplings[lo:hi]]
        states, _ = generators.fast_steady_states(params)
        good = ~np.isnan(states[:, 0, 0])
        if not np.any(good):
            continue
        sub = states[good]
        q = _heat_current_batch(sub, z1, z2, couplings[lo:hi][good, 0],
                                couplings[lo:hi][good, 1], p)
        c = _x_concurrence_batch(_system_reduction_batch(sub))
        idx = np.arange(lo, hi)[good]
        qs[idx] = np.abs(q)
        cs[idx] = c
    return qs, cs


# ---------------------------------------------------------------------------
# Entanglement boundary of the memoryless model.
# ---------------------------------------------------------------------------

def memoryless_boundary(z1: float) -> tuple[float, float]:
    """Bath-temperature boundary ``z2 = (4 +- 3 sqrt2 z1)/(4 z1 +- 3 sqrt2)``.

    Returns ``(z2_high, z2_low)``; pairs beyond them (``z2 > z2_high`` or
    ``z2 < z2_low``) admit entangled steady states for suitable couplings.
    """
    den_high = 4.0 * z1 + 3.0 * _SQRT2
    den_low = 4.0 * z1 - 3.0 * _SQRT2
    if abs(den_high) < 1e-12 or abs(den_low) < 1e-12:
        raise SingularBoundaryError(f"boundary formula singular at z1={z1}")
    z2_high = (4.0 + 3.0 * _SQRT2 * z1) / den_high
    z2_low = (4.0 - 3.0 * _SQRT2 * z1) / den_low
    return z2_high, z2_low


def memoryless_boundary_couplings(z1: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Couplings with exactly marginal concurrence on the two boundaries.

    Returns ``((g1_high, g2_high), (g1_low, g2_low))`` with
    ``g1 = 2/(sqrt2 +- z1)`` and ``g2 = 4 sqrt2 - g1``; the '+' branch
    belongs to the ``z2_high`` boundary.
    """
    g1_high = 2.0 / (_SQRT2 + z1)
    g1_low = 2.0 / (_SQRT2 - z1)
    return (g1_high, 4.0 * _SQRT2 - g1_high), (g1_low, 4.0 * _SQRT2 - g1_low)


def memoryless_entanglement_possible(z1: float, z2: float) -> bool:
    """Closed-form region test ``z1 z2 + sqrt(9/8) |z1 - z2| > 1``."""
    return z1 * z2 + math.sqrt(9.0 / 8.0) * abs(z1 - z2) > 1.0


# ---------------------------------------------------------------------------
# Concurrence maximization.
# ---------------------------------------------------------------------------

def _clip_log(x: np.ndarray, hi: float) -> np.ndarray:
    return np.clip(x, _CLIP_LO, math.log(hi))


def _nelder_mead(fun, x0, max_evals, ftol=1e-11, xtol=1e-8):
    return minimize(fun, x0, method="Nelder-Mead",
                    options=dict(maxfev=max_evals, fatol=ftol, xatol=xtol))


def _deterministic_starts(z1: float, z2: float, p: float, u_seed: float = 1.0) -> list[np.ndarray]:
    """Symmetric warm starts: heat-current optimum plus boundary couplings."""
    gammas = [(2.0, 2.0)]
    for z in (z1, z2):
        (g1h, g2h), (g1l, g2l) = memoryless_boundary_couplings(z)
        gammas += [(g1h, g2h), (g2h, g1h), (g1l, g2l), (g2l, g1l)]
    starts = []
    for g1, g2 in gammas:
        if p == 0.0:
            starts.append(np.log([g1, g2]))
        else:
            for u in (u_seed, 2.0 * u_seed):
                starts.append(np.log([g1, g2, u, u]))
    return starts


def maximize_concurrence(z1: float, z2: float, p: float,
                         search_box=None, *, n_starts: int = 20, seed: int = 0,
                         max_evals_per_start: int = 2000,
                         extra_starts=None) -> OptimizationResult:
    """Maximize steady-state concurrence over the coupling ratios.

    Multi-start Nelder-Mead in log-coupling space: log-uniform random seeds
    plus deterministic warm starts (the heat-current optimum and the
    analytic boundary couplings), followed by a tightening polish run from
    the best point.  Deterministic for a fixed seed.  ``c_max = 0`` is a
    valid outcome.

    ``search_box = ((gamma_lo, gamma_hi), (upsilon_lo, upsilon_hi))``
    constrains the seeds; searches may drift below the lower edge but are
    clipped at the upper edge.
    """
    if search_box is None:
        search_box = DEFAULT_SEARCH_BOX
    (g_lo, g_hi), (u_lo, u_hi) = search_box
    ndim = 2 if p == 0.0 else 4
    hi = g_hi if p == 0.0 else max(g_hi, u_hi)
    evaluations = 0

    def objective(x):
        nonlocal evaluations
        evaluations += 1
        logc = _clip_log(np.asarray(x, dtype=float), hi)
        couplings = np.exp(logc) if ndim == 4 else np.array(
            [math.exp(logc[0]), math.exp(logc[1]), 0.0, 0.0])
        try:
            _, c = _eval_couplings(z1, z2, p, couplings)
        except Exception:
            return 1.0
        return -c

    rng = np.random.default_rng(seed)
    starts = _deterministic_starts(z1, z2, p)
    if extra_starts is not None:
        for s in extra_starts:
            s = np.asarray(s, dtype=float)
            starts.append(np.log(np.clip(s[:ndim], 1e-6, hi)))
    n_random = max(n_starts - len(starts), 4)
    for _ in range(n_random):
        lo_g, hi_g = math.log(g_lo), math.log(g_hi)
        draw = [rng.uniform(lo_g, hi_g), rng.uniform(lo_g, hi_g)]
        if ndim == 4:
            draw += [rng.uniform(math.log(u_lo), math.log(u_hi)),
                     rng.uniform(math.log(u_lo), math.log(u_hi))]
        starts.append(np.array(draw))

    best_x, best_f, best_ok = None, np.inf, False
    for x0 in starts:
        res = _nelder_mead(objective, x0[:ndim], max_evals_per_start)
        if res.fun < best_f:
            best_x, best_f, best_ok = res.x, res.fun, bool(res.success)
    # polish from the champion with tight tolerances
    res = _nelder_mead(objective, best_x, max_evals_per_start, ftol=1e-13, xtol=1e-10)
    if res.fun <= best_f:
        best_x, best_f, best_ok = res.x, res.fun, bool(res.success) or best_ok

    logc = _clip_log(np.asarray(best_x, dtype=float), hi)
    if ndim == 2:
        couplings = np.array([math.exp(logc[0]), math.exp(logc[1]), 0.0, 0.0])
    else:
        couplings = np.exp(logc)
    q_abs, c_max = _eval_couplings(z1, z2, p, couplings)
    params = ModelParams(z1=z1, z2=z2, gamma1=couplings[0], gamma2=couplings[1],
                         upsilon1=couplings[2], upsilon2=couplings[3], p=p)
    q_signed = _signed_heat_current(params)
    return OptimizationResult(best_params=params, c_max=c_max,
                              q_dot_at_best=q_signed,
                              n_evaluations=evaluations, converged=best_ok)


def _signed_heat_current(params: ModelParams) -> float:
    if params.p == 0.0:
        return observables.heat_current_analytic(
            params.z1, params.z2, params.gamma1, params.gamma2)
    state = generators.fast_steady_state(params)
    return observables.heat_current_dissipator(state, params, bath=1)


# ---------------------------------------------------------------------------
# (|Q_dot|, C) region sampling with hull refinement.
# ---------------------------------------------------------------------------

def _refine_region(z1, z2, p, q_pts, c_pts, g_pts, rng, n_anchors=24,
                   max_evals=240):
    """Push the sampled cloud toward its true boundary.

    Penalized searches per |Q_dot| anchor (maximize and minimize C at that
    current) plus dedicated runs for the maximal current, the maximal
    current among near-separable states, and the maximal concurrence.
    Every evaluated steady state is appended with its exact (q, C) pair.
    """
    found_logs: list[np.ndarray] = []

    def record(x):
        found_logs.append(np.array(x, dtype=float))

    ndim = 2 if p == 0.0 else 4

    def full(x):
        logc = _clip_log(np.asarray(x, dtype=float), 1e3)
        if ndim == 2:
            return np.array([math.exp(logc[0]), math.exp(logc[1]), 0.0, 0.0])
        return np.exp(logc)

    def evaluate(x):
        try:
            return _eval_couplings(z1, z2, p, full(x))
        except Exception:
            return np.nan, np.nan

    def run(objective, x0):
        res = _nelder_mead(objective, x0, max_evals, ftol=1e-10, xtol=1e-7)
        record(res.x)
        return res.x

    q_scale = max(np.nanmax(q_pts), 1e-6)
    kappa = 50.0 / q_scale**2

    def start_near(q0, prefer_high_c):
        dist = np.abs(q_pts - q0)
        near = np.argsort(dist)[:50]
        pick = near[np.nanargmax(c_pts[near])] if prefer_high_c else near[np.nanargmin(c_pts[near])]
        return np.log(np.clip(g_pts[pick][:ndim], 1e-6, 1e3))

    anchors = np.linspace(0.02, 1.0, n_anchors) * q_scale
    for q0 in anchors:
        def hi_obj(x, q0=q0):
            q, c = evaluate(x)
            if not np.isfinite(q):
                return 1.0
            return -c + kappa * (q - q0) ** 2

        def lo_obj(x, q0=q0):
            q, c = evaluate(x)
            if not np.isfinite(q):
                return 1.0
            return c + kappa * (q - q0) ** 2

        run(hi_obj, start_near(q0, True))
        run(lo_obj, start_near(q0, False))

    def neg_q(x):
        q, c = evaluate(x)
        return -q if np.isfinite(q) else 1.0

    def neg_q_separable(x):
        q, c = evaluate(x)
        if not np.isfinite(q):
            return 1.0
        return -q + 1e3 * max(0.0, c - 5e-4)

    def neg_c(x):
        q, c = evaluate(x)
        return -c if np.isfinite(c) else 1.0

    x_top = start_near(q_scale, True)
    for obj in (neg_q, neg_c):
        x = x_top
        for _ in range(3):
            x = run(obj, x)
    sep_mask = c_pts < 1e-6
    if np.any(sep_mask):
        x = np.log(np.clip(g_pts[sep_mask][np.argmax(q_pts[sep_mask])][:ndim], 1e-6, 1e3))
        for _ in range(3):
            x = run(neg_q_separable, x)

    if not found_logs:
        return q_pts, c_pts, g_pts
    new_g = np.stack([full(x) for x in found_logs])
    new_q, new_c = _eval_couplings_batch(z1, z2, p, new_g)
    good = np.isfinite(new_q)
    return (np.concatenate([q_pts, new_q[good]]),
            np.concatenate([c_pts, new_c[good]]),
            np.concatenate([g_pts, new_g[good]]))


def _bin_hulls(q_pts, c_pts, n_bins: int):
    q_max = float(np.nanmax(q_pts)) if q_pts.size else 1.0
    edges = np.linspace(0.0, q_max * (1.0 + 1e-12), n_bins + 1)
    idx = np.clip(np.searchsorted(edges, q_pts, side="right") - 1, 0, n_bins - 1)
    lower = np.full(n_bins, np.nan)
    upper = np.full(n_bins, np.nan)
    counts = np.zeros(n_bins, dtype=int)
    np.add.at(counts, idx, 1)
    filled_lower = np.full(n_bins, np.inf)
    filled_upper = np.full(n_bins, -np.inf)
    np.minimum.at(filled_lower, idx, c_pts)
    np.maximum.at(filled_upper, idx, c_pts)
    nonempty = counts > 0
    lower[nonempty] = filled_lower[nonempty]
    upper[nonempty] = filled_upper[nonempty]
    return edges, lower, upper, counts


def sample_cq_region(z1: float, z2: float, p: float, n_samples: int, seed: int,
                     *, refine: bool = True, n_bins: int = N_HULL_BINS) -> RegionSample:
    """Scan steady states over log-uniform couplings in (0, 1000]^4.

    Returns the point cloud plus per-bin hull estimates; with ``refine``
    (default) the cloud is sharpened by boundary-following local searches,
    without which the hull extremes are badly undersampled.
    """
    if n_samples < 10:
        raise ParameterError(f"n_samples must be >= 10, got {n_samples}")
    rng = np.random.default_rng(seed)
    draws = np.exp(rng.uniform(_LOG_LO, _LOG_HI, size=(n_samples, 4)))
    if p == 0.0:
        draws[:, 2:] = 0.0
    q_pts, c_pts = _eval_couplings_batch(z1, z2, p, draws)
    good = np.isfinite(q_pts)
    q_pts, c_pts, g_pts = q_pts[good], c_pts[good], draws[good]
    if refine and q_pts.size:
        q_pts, c_pts, g_pts = _refine_region(z1, z2, p, q_pts, c_pts, g_pts, rng)
    edges, lower, upper, counts = _bin_hulls(q_pts, c_pts, n_bins)
    return RegionSample(z1=z1, z2=z2, p=p, seed=seed,
                        points_q=q_pts, points_c=c_pts, points_couplings=g_pts,
                        bin_edges=edges, hull_lower=lower, hull_upper=upper,
                        bin_counts=counts)


def detect_overhang(region: RegionSample,
                    min_c: float = OVERHANG_MIN_C) -> tuple[float, float] | None:
    """Largest |Q_dot| interval whose sampled lower hull stays above ``min_c``.

    Bins without samples break an interval (conservative: undersampling is
    never reported as guaranteed entanglement).  Returns ``None`` when no
    such interval exists.
    """
    positive = (region.bin_counts > 0) & (region.hull_lower > min_c)
    best = None
    start = None
    for k, flag in enumerate(np.append(positive, False)):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            if best is None or (k - start) > (best[1] - best[0]):
                best = (start, k)
            start = None
    if best is None:
        return None
    return float(region.bin_edges[best[0]]), float(region.bin_edges[best[1]])


def critical_heat_currents(z1: float, z2: float, p: float, *,
                           n_samples: int = 4000, seed: int = 0,
                           resolution: float = 1e-3) -> tuple[float, float] | None:
    """Extremal |Q_dot| over couplings whose steady state is entangled.

    Returns ``(q_crit_min, q_crit_max)`` bracketed to ``resolution`` by
    penalized local searches seeded from a region scan, or ``None`` when
    the temperature pair admits no entanglement.
    """
    region = sample_cq_region(z1, z2, p, n_samples, seed)
    entangled = region.points_c > 1e-9
    if not np.any(entangled):
        return None
    qs = region.points_q[entangled]
    gs = region.points_couplings[entangled]
    ndim = 2 if p == 0.0 else 4

    def evaluate(x):
        logc = _clip_log(np.asarray(x, dtype=float), 1e3)
        couplings = (np.array([math.exp(logc[0]), math.exp(logc[1]), 0.0, 0.0])
                     if ndim == 2 else np.exp(logc))
        try:
            return _eval_couplings(z1, z2, p, couplings)
        except Exception:
            return np.nan, np.nan

    def bracket(sign):
        k0 = int(np.argmin(qs)) if sign > 0 else int(np.argmax(qs))
        x = np.log(np.clip(gs[k0][:ndim], 1e-6, 1e3))
        prev = None
        for _ in range(6):
            def obj(y):
                q, c = evaluate(y)
                if not np.isfinite(q):
                    return 10.0
                return sign * q + 1e3 * max(0.0, 1e-6 - c) / 1e-6
            res = _nelder_mead(obj, x, 600, ftol=1e-12, xtol=1e-9)
            x = res.x
            q, _ = evaluate(x)
            if prev is not None and abs(q - prev) < resolution:
                break
            prev = q
        return q

    return float(bracket(+1)), float(bracket(-1))


# ---------------------------------------------------------------------------
# Concurrence-maximum maps over the temperature plane.
# ---------------------------------------------------------------------------

def _cmax_point(task):
    (z1, z2, p, seed, n_starts, extra) = task
    result = maximize_concurrence(z1, z2, p, seed=seed, n_starts=n_starts,
                                  extra_starts=extra)
    return result


def cmax_grid(z_values, p: float, *, seed: int = 0, n_starts: int = 20,
              threads: int = 1, warm_starts: dict | None = None) -> list[tuple]:
    """``maximize_concurrence`` on every (z1, z2) pair of a square grid.

    Returns ``[(i, j, z1, z2, OptimizationResult), ...]`` in row-major grid
    order regardless of execution order; ``warm_starts`` may map ``(i, j)``
    to extra coupling seeds (used to chain maps across memory parameters).
    """
    z_values = np.asarray(z_values, dtype=float)
    tasks = []
    for i, z1 in enumerate(z_values):
        for j, z2 in enumerate(z_values):
            extra = warm_starts.get((i, j)) if warm_starts else None
            tasks.append((float(z1), float(z2), p, seed, n_starts, extra))
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_cmax_point, tasks, chunksize=4))
    else:
        results = [_cmax_point(t) for t in tasks]
    out = []
    k = 0
    for i, z1 in enumerate(z_values):
        for j, z2 in enumerate(z_values):
            out.append((i, j, float(z1), float(z2), results[k]))
            k += 1
    return out
