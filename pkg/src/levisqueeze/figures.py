"""Bundled experiment recipes, addressable by short figure ids.

Each id maps to a fixed parameter set and grid and produces one table of
plain columns, so the CLI can render any of them to CSV without bespoke
plotting code.  Two parameter families appear throughout: the far-detuned
scheme (delta = 5 omega_x) and the resonant rotating-frame scheme
(delta = omega_x); both share kappa = 0.2, lam = 0.3, a bath occupation of
2e7 and a quality factor of 1e9 unless a recipe varies them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .dynamics import (
    evolve,
    find_threshold,
    periodic_steady_state,
    stability,
    steady_state,
)
from .errors import ConfigError, ParameterError, UnstableModelError
from .gaussian import LinearGaussianModel
from .metrics import (
    mechanical_block,
    optimize_over_time,
    squeezing_metrics,
    vsq_trajectory,
)
from .models import (
    SystemParams,
    bogoliubov_ground_variance,
    build_bogoliubov_dissipative,
    build_eliminated_modulated,
    build_full_cs,
    build_full_modulated,
    effective_modulated,
    initial_covariance,
    threshold_coupling,
)

#: Overridable run controls understood by every recipe in addition to the
#: SystemParams fields and q_m.
RUN_KEYS = ("t_end", "dt", "points")


def detuned_params() -> SystemParams:
    return SystemParams(omega_x=1.0, kappa=0.2, delta=5.0, lam=0.3, q_m=1e9, nbar=2e7)


def resonant_params() -> SystemParams:
    return SystemParams(omega_x=1.0, kappa=0.2, delta=1.0, lam=0.3, q_m=1e9, nbar=2e7)


@dataclass(frozen=True)
class FigureJob:
    """A figure id plus overrides for parameters or run controls."""

    figure_id: str
    overrides: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class FigureData:
    figure_id: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    meta: dict


@dataclass(frozen=True)
class ModulationOptimum:
    """Outcome of optimizing steady squeezing over the modulation depth."""

    alpha_crit: float | None
    alpha_opt: float
    v_sq: float
    v_asq: float


def _cycle_min_vsq(params: SystemParams) -> float | None:
    """Quasistationary squeezed variance of the lab-frame resonant scheme.

    The rotating-frame steady state hides the micromotion that mixes part of
    the antisqueezed quadrature back in; the observable squeezing is the
    minimum over one modulation cycle of the time-periodic lab dynamics.
    None when that dynamics has no periodic steady state.
    """
    model = build_full_modulated(params)
    try:
        cycle = periodic_steady_state(model, math.pi / params.omega_x)
    except UnstableModelError:
        return None
    return float(vsq_trajectory(cycle).min())


def modulation_instability(
    params: SystemParams, alpha_max: float = 1.95, tol: float = 1e-5
) -> float | None:
    """Smallest unstable modulation depth of the cooling model, if any."""

    def family(alpha: float) -> LinearGaussianModel:
        return build_bogoliubov_dissipative(params.with_value("alpha", alpha))

    grid = np.linspace(0.0, alpha_max, 40)
    verdicts = [stability(family(a)).stable for a in grid]
    if not verdicts[0]:
        raise ParameterError("cooling model already unstable at zero modulation")
    for lo, hi, s_lo, s_hi in zip(grid, grid[1:], verdicts, verdicts[1:]):
        if s_lo and not s_hi:
            return find_threshold(family, (lo, hi), tol=tol)
    return None


def optimize_modulation(
    params: SystemParams,
    alpha_max: float = 1.95,
    grid_points: int = 60,
    tol: float = 1e-5,
) -> ModulationOptimum:
    """Minimize the steady squeezed variance over the modulation depth.

    The stable branch below the instability (or the whole [0, alpha_max]
    range when none exists) is scanned on a uniform grid; the discrete
    minimum is polished with one parabolic step evaluated exactly.
    """
    alpha_crit = modulation_instability(params, alpha_max, tol)
    top = alpha_max if alpha_crit is None else alpha_crit * (1.0 - 1e-3)
    grid = np.linspace(0.0, top, grid_points)

    def value(alpha: float) -> tuple[float, float]:
        result = steady_state(build_bogoliubov_dissipative(params.with_value("alpha", alpha)))
        rep = squeezing_metrics(mechanical_block(result.covariance))
        return rep.v_sq, rep.v_asq

    vals = [value(a) for a in grid]
    v_sq = np.array([v[0] for v in vals])
    i = int(np.argmin(v_sq))
    best_alpha, (best_v, best_va) = float(grid[i]), vals[i]
    if 0 < i < len(grid) - 1:
        d0 = (v_sq[i] - v_sq[i - 1]) / (grid[i] - grid[i - 1])
        curv = ((v_sq[i + 1] - v_sq[i]) / (grid[i + 1] - grid[i]) - d0) / (
            grid[i + 1] - grid[i - 1]
        )
        if curv > 0.0:
            a_star = 0.5 * (grid[i - 1] + grid[i]) - d0 / (2.0 * curv)
            a_star = min(max(a_star, grid[i - 1]), grid[i + 1])
            v_star, va_star = value(float(a_star))
            if v_star < best_v:
                best_alpha, best_v, best_va = float(a_star), v_star, va_star
    return ModulationOptimum(
        alpha_crit=alpha_crit, alpha_opt=best_alpha, v_sq=best_v, v_asq=best_va
    )


# ---------------------------------------------------------------------------
# Recipes
# ---------------------------------------------------------------------------


def _apply_overrides(params: SystemParams, overrides: Mapping[str, float]) -> SystemParams:
    for key, val in overrides.items():
        if key in RUN_KEYS:
            continue
        params = params.with_value(key, float(val))
    return params


def _run(overrides: Mapping[str, float], key: str, default: float | None) -> float | None:
    val = overrides.get(key, default)
    return None if val is None else float(val)


def _traj_rows(result, prefix: tuple = ()) -> list[tuple]:
    stack = result.stacked()
    labels = result.covariances[0].basis.labels
    ix, ip = labels.index("x"), labels.index("p")
    a, b, c = stack[:, ix, ix], stack[:, ix, ip], stack[:, ip, ip]
    mean, rad = 0.5 * (a + c), np.sqrt((0.5 * (a - c)) ** 2 + b**2)
    v_sq, v_asq = mean - rad, mean + rad
    rows = []
    for k, t in enumerate(result.times):
        rows.append(
            prefix
            + (
                float(t),
                float(a[k]),
                float(b[k]),
                float(c[k]),
                float(v_sq[k]),
                float(v_asq[k]),
                float(v_sq[k] / v_asq[k]),
            )
        )
    return rows


_TRAJ_COLS = ("t", "Vxx", "Vxp", "Vpp", "v_sq", "v_asq", "eta")


def _fig2a(ov: Mapping[str, float]) -> FigureData:
    """Transient squeezing of the far-detuned scheme from the ground state."""
    p = _apply_overrides(detuned_params(), ov)
    t_end = _run(ov, "t_end", 100.0)
    model = build_full_cs(p)
    result = evolve(model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None))
    return FigureData(
        "fig2a",
        _TRAJ_COLS,
        tuple(_traj_rows(result)),
        {"params": p, "t_end": t_end, "model": "full"},
    )


def _fig2b(ov: Mapping[str, float]) -> FigureData:
    """Same transient at threshold coupling and just below it."""
    base = _apply_overrides(detuned_params(), ov)
    t_end = _run(ov, "t_end", 100.0)
    lam_th = threshold_coupling(base)
    rows: list[tuple] = []
    for name, lam in (("at-threshold", lam_th), ("below-threshold", 1.58)):
        p = base.with_value("lam", lam)
        model = build_full_cs(p)
        result = evolve(model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None))
        rows.extend(_traj_rows(result, (name,)))
    return FigureData(
        "fig2b",
        ("series",) + _TRAJ_COLS,
        tuple(rows),
        {"params": base, "t_end": t_end, "lam_threshold": lam_th},
    )


def _nbar0_grid(points: int) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-2, 1e6, points - 1)])


def _fig2c(ov: Mapping[str, float]) -> FigureData:
    """Best transient squeezing versus initial occupation, detuned scheme."""
    base = _apply_overrides(detuned_params(), ov)
    t_end = _run(ov, "t_end", 100.0)
    points = int(_run(ov, "points", 21))
    lam_th = threshold_coupling(base)
    rows: list[tuple] = []
    for name, lam in (("base-coupling", base.lam), ("at-threshold", lam_th)):
        for nbar0 in _nbar0_grid(points):
            p = base.with_value("lam", lam).with_value("nbar0", nbar0)
            model = build_full_cs(p)
            result = evolve(
                model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None)
            )
            rep = optimize_over_time(result)
            rows.append((name, float(nbar0), rep.v_sq, rep.time))
    return FigureData(
        "fig2c",
        ("series", "nbar0", "v_sq_opt", "t_opt"),
        tuple(rows),
        {"params": base, "t_end": t_end, "lam_threshold": lam_th},
    )


def _fig3a(ov: Mapping[str, float]) -> FigureData:
    """Effective rotating-frame rates versus modulation depth."""
    base = _apply_overrides(detuned_params(), ov)
    points = int(_run(ov, "points", 101))
    rows = []
    for alpha in np.linspace(0.0, 0.1, points):
        p = base.with_value("alpha", float(alpha))
        shifted = effective_modulated(p, "shifted-frame")
        bare = effective_modulated(p, "bare-frame")
        rows.append(
            (float(alpha), shifted.omega_eff, bare.omega_eff, shifted.zeta_eff)
        )
    return FigureData(
        "fig3a",
        ("alpha", "omega_eff", "omega_eff_bare_frame", "zeta_eff"),
        tuple(rows),
        {"params": base},
    )


def _fig3b(ov: Mapping[str, float]) -> FigureData:
    """Rotating-frame transients of the weakly modulated scheme."""
    base = _apply_overrides(detuned_params().with_value("alpha", 0.01), ov)
    t_end = _run(ov, "t_end", 600.0)
    rows: list[tuple] = []
    for name, phi in (("phi-0", 0.0), ("phi-half-pi", math.pi / 2.0)):
        p = base.with_value("phi", phi)
        model = build_eliminated_modulated(p)
        result = evolve(model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None))
        rows.extend(_traj_rows(result, (name,)))
    return FigureData(
        "fig3b", ("series",) + _TRAJ_COLS, tuple(rows), {"params": base, "t_end": t_end}
    )


def _fig3c(ov: Mapping[str, float]) -> FigureData:
    """Best rotating-frame squeezing versus initial occupation."""
    base = _apply_overrides(detuned_params().with_value("alpha", 0.01), ov)
    t_end = _run(ov, "t_end", 600.0)
    points = int(_run(ov, "points", 21))
    rows: list[tuple] = []
    for name, phi in (("phi-0", 0.0), ("phi-half-pi", math.pi / 2.0)):
        for nbar0 in _nbar0_grid(points):
            p = base.with_value("phi", phi).with_value("nbar0", float(nbar0))
            model = build_eliminated_modulated(p)
            result = evolve(
                model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None)
            )
            rep = optimize_over_time(result)
            rows.append((name, float(nbar0), rep.v_sq, rep.time))
    return FigureData(
        "fig3c",
        ("series", "nbar0", "v_sq_opt", "t_opt"),
        tuple(rows),
        {"params": base, "t_end": t_end},
    )


def _fig3d(ov: Mapping[str, float]) -> FigureData:
    """Best rotating-frame squeezing versus modulation phase."""
    base = _apply_overrides(detuned_params().with_value("alpha", 0.01), ov)
    t_end = _run(ov, "t_end", 600.0)
    points = int(_run(ov, "points", 13))
    rows = []
    for phi in np.linspace(0.0, math.pi, points):
        p = base.with_value("phi", float(phi))
        model = build_eliminated_modulated(p)
        result = evolve(model, initial_covariance(p, model.basis), t_end, _run(ov, "dt", None))
        rep = optimize_over_time(result)
        rows.append((float(phi), rep.v_sq, rep.time))
    return FigureData(
        "fig3d", ("phi", "v_sq_opt", "t_opt"), tuple(rows), {"params": base, "t_end": t_end}
    )


def _fig4a(ov: Mapping[str, float]) -> FigureData:
    """Steady squeezing of the cooling scheme versus modulation depth."""
    base = _apply_overrides(resonant_params(), ov)
    points = int(_run(ov, "points", 40))
    rows: list[tuple] = []
    meta: dict = {"params": base}
    for name, q_m in (("qm-1e9", 1e9), ("qm-1e8", 1e8)):
        p = base.with_value("q_m", q_m)
        alpha_crit = modulation_instability(p)
        meta[f"alpha_crit_{name}"] = alpha_crit
        top = 1.95 if alpha_crit is None else alpha_crit * (1.0 - 1e-3)
        for alpha in np.linspace(0.0, top, points):
            pa = p.with_value("alpha", float(alpha))
            rep = squeezing_metrics(
                mechanical_block(steady_state(build_bogoliubov_dissipative(pa)).covariance)
            )
            rows.append(
                (
                    name,
                    float(alpha),
                    rep.v_sq,
                    rep.v_asq,
                    rep.eta,
                    bogoliubov_ground_variance(float(alpha)),
                    _cycle_min_vsq(pa),
                )
            )
    return FigureData(
        "fig4a",
        ("series", "alpha", "v_sq", "v_asq", "eta", "v_alpha", "v_sq_full"),
        tuple(rows),
        meta,
    )


def _fig4b(ov: Mapping[str, float]) -> FigureData:
    """Depth-optimized steady squeezing versus mechanical quality factor."""
    base = _apply_overrides(resonant_params(), ov)
    points = int(_run(ov, "points", 26))
    rows = []
    for q_m in np.geomspace(1e7, 1e12, points):
        p = base.with_value("q_m", float(q_m))
        opt = optimize_modulation(p)
        rows.append(
            (float(q_m), p.gamma * p.nbar / p.omega_x, opt.alpha_opt, opt.v_sq)
        )
    return FigureData(
        "fig4b", ("q_m", "gamma_nbar", "alpha_opt", "v_sq_opt"), tuple(rows), {"params": base}
    )


def _fig4c(ov: Mapping[str, float]) -> FigureData:
    """Depth-optimized steady squeezing versus cavity linewidth."""
    base = _apply_overrides(resonant_params(), ov)
    points = int(_run(ov, "points", 20))
    rows: list[tuple] = []
    for name, lam in (("lam-0.3", 0.3), ("lam-0.5", 0.5)):
        for kappa in np.linspace(0.05, 1.0, points):
            p = base.with_value("lam", lam).with_value("kappa", float(kappa))
            opt = optimize_modulation(p)
            rows.append((name, float(kappa), opt.alpha_opt, opt.v_sq))
    return FigureData(
        "fig4c", ("series", "kappa", "alpha_opt", "v_sq_opt"), tuple(rows), {"params": base}
    )


def _figs5(ov: Mapping[str, float]) -> FigureData:
    """Phase independence of the steady cooling-scheme squeezing."""
    base = _apply_overrides(resonant_params(), ov)
    points = int(_run(ov, "points", 25))
    rows: list[tuple] = []
    for name, alpha in (("alpha-0.4", 0.4), ("alpha-0.1", 0.1), ("alpha-0.01", 0.01)):
        for phi in np.linspace(0.0, 2.0 * math.pi, points):
            p = base.with_value("alpha", alpha).with_value("phi", float(phi))
            rep = squeezing_metrics(
                mechanical_block(steady_state(build_bogoliubov_dissipative(p)).covariance)
            )
            rows.append((name, float(phi), rep.v_sq, rep.v_asq, rep.eta, _cycle_min_vsq(p)))
    return FigureData(
        "figS5",
        ("series", "phi", "v_sq", "v_asq", "eta", "v_sq_full"),
        tuple(rows),
        {"params": base},
    )


FIGURES: dict[str, Callable[[Mapping[str, float]], FigureData]] = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig2c": _fig2c,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig3c": _fig3c,
    "fig3d": _fig3d,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig4c": _fig4c,
    "figS5": _figs5,
}


def run_figure(job: FigureJob) -> FigureData:
    """Evaluate one bundled recipe."""
    try:
        recipe = FIGURES[job.figure_id]
    except KeyError:
        raise ConfigError(
            f"unknown figure id {job.figure_id!r}, expected one of {sorted(FIGURES)}"
        ) from None
    return recipe(job.overrides)
