"""Ad hoc sensor-network model on the square lattice: energy accounting under
minimum-hop routing to a central fusion center, total gathered information,
energy efficiency, the coverage/density/energy scaling experiments, and the
optimal-density search under a total energy budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corrmap import PhysicalField, zeta_from_spacing
from .inforates import DEFAULT_GRID, kli_rate_sfcar, mi_rate_sfcar, stein_kli
from ._util import parallel_map

__all__ = [
    "InfeasibleEnergyError",
    "NetworkConfig",
    "NetworkReport",
    "FitResult",
    "hop_sum",
    "hop_sum_closed",
    "total_energy",
    "network_report",
    "fit_loglog",
    "sweep_fixed_density",
    "sweep_fixed_pernode_energy",
    "sweep_spacing",
    "sweep_infinite_density",
    "sweep_energy_fixed_all",
    "optimal_density",
    "FixedDensitySweep",
    "PernodeEnergySweep",
    "SpacingSweep",
    "DensitySweep",
    "EnergySweep",
    "DensityOptimum",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasibleEnergyError(ValueError):
    """The energy budget cannot cover the required communication energy."""


@dataclass(frozen=True)
class NetworkConfig:
    """Lattice sensor network: n^2 nodes with spacing dn [m], sensing energy
    es [J/node], radio constant e0 [J/m^nu], propagation loss nu >= 2,
    diffusion rate alpha [1/m], and SNR-per-joule gain beta (SNR = beta * es).

    ``fusion=True`` switches to the in-network aggregation energy model where
    every node transmits exactly once (communication = n^2 links).
    """

    n: int
    dn: float
    es: float
    e0: float
    nu: float
    alpha: float
    beta: float
    fusion: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.dn <= 0.0:
            raise ValueError(f"dn must be positive, got {self.dn!r}")
        if self.es < 0.0:
            raise ValueError(f"es must be >= 0, got {self.es!r}")
        if self.e0 <= 0.0:
            raise ValueError(f"e0 must be positive, got {self.e0!r}")
        if self.nu < 2.0:
            raise ValueError(f"nu must be >= 2, got {self.nu!r}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        PhysicalField(self.alpha)  # validates alpha

    @property
    def side_length(self) -> float:
        return self.n * self.dn


@dataclass(frozen=True)
class NetworkReport:
    """One network operating point: information, energy, and their ratio."""

    n: int
    dn: float
    snr: float
    zeta: float
    per_node_info: float
    total_info: float
    total_energy: float
    efficiency: float


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float


def hop_sum(n: int) -> int:
    """Total hop count sum_{ij} |i - floor(n/2)| + |j - floor(n/2)|.

    Computed by enumeration and checked against the closed forms
    n(n-1)(n+1)/2 (n odd) and n^3/2 (n even).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    d = np.abs(np.arange(n) - n // 2)
    total = int(2 * n * d.sum())
    closed = n * (n - 1) * (n + 1) // 2 if n % 2 else n**3 // 2
    assert total == closed, f"hop count {total} != closed form {closed} at n={n}"
    return total


def hop_sum_closed(n: float) -> float:
    """Odd-n closed form n(n-1)(n+1)/2 extended to non-integer n.

    Used by the density optimization, where n = L*sqrt(mu) is deliberately
    not rounded to an integer.
    """
    return 0.5 * n * (n - 1.0) * (n + 1.0)


def total_energy(cfg: NetworkConfig) -> float:
    """Total sensing plus routing energy n^2 es + hops * e0 * dn^nu [J]."""
    links = cfg.n**2 if cfg.fusion else hop_sum(cfg.n)
    return cfg.n**2 * cfg.es + links * cfg.e0 * cfg.dn**cfg.nu


def _per_node_rate(snr: float, zeta: float, measure: str, grid: int) -> float:
    if measure == "kli":
        return kli_rate_sfcar(snr, zeta, grid)
    if measure == "mi":
        return mi_rate_sfcar(snr, zeta, grid)
    raise ValueError(f"measure must be 'kli' or 'mi', got {measure!r}")


def _decorrelated_limit(snr: float, measure: str) -> float:
    return stein_kli(snr) if measure == "kli" else 0.5 * math.log1p(snr)


def network_report(cfg: NetworkConfig, measure: str = "kli", grid: int = DEFAULT_GRID) -> NetworkReport:
    """Evaluate one configuration: spacing -> zeta, es -> SNR, rate -> totals."""
    zeta = zeta_from_spacing(PhysicalField(cfg.alpha), cfg.dn)
    snr = cfg.beta * cfg.es
    rate = _per_node_rate(snr, zeta, measure, grid)
    info = cfg.n**2 * rate
    energy = total_energy(cfg)
    return NetworkReport(
        n=cfg.n,
        dn=cfg.dn,
        snr=snr,
        zeta=zeta,
        per_node_info=rate,
        total_info=info,
        total_energy=energy,
        efficiency=info / energy,
    )


def _ols(x: np.ndarray, y: np.ndarray) -> FitResult:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(slope=float(slope), intercept=float(intercept), r2=r2)


def fit_loglog(x: Sequence[float], y: Sequence[float], drop_smallest: float = 0.25) -> FitResult:
    """OLS slope of log y vs log x, discarding the smallest-x quarter.

    The scaling laws are asymptotic; the smallest sweep points are
    pre-asymptotic transients that bias the fitted exponent.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires positive data")
    order = np.argsort(x)
    keep = order[int(len(x) * drop_smallest):]
    if len(keep) < 2:
        raise ValueError("not enough points left to fit")
    return _ols(np.log(x[keep]), np.log(y[keep]))


@dataclass(frozen=True)
class FixedDensitySweep:
    reports: tuple[NetworkReport, ...]
    eta_vs_area: FitResult       # expect slope -1/2
    info_vs_energy: FitResult    # expect slope 2/3 (1 with in-network fusion)


def sweep_fixed_density(
    cfg: NetworkConfig,
    n_list: Sequence[int],
    measure: str = "kli",
    grid: int = DEFAULT_GRID,
    threads: int = 1,
) -> FixedDensitySweep:
    """Grow the coverage area at fixed spacing and sensing energy.

    Fits log(efficiency) against log(area) and log(total info) against
    log(total energy) over the retained (largest) points.
    """
    reports = tuple(
        parallel_map(lambda n: network_report(replace(cfg, n=n), measure, grid), n_list, threads)
    )
    area = [r.n**2 * r.dn**2 for r in reports]
    return FixedDensitySweep(
        reports=reports,
        eta_vs_area=fit_loglog(area, [r.efficiency for r in reports]),
        info_vs_energy=fit_loglog([r.total_energy for r in reports], [r.total_info for r in reports]),
    )


@dataclass(frozen=True)
class PernodeEnergySweep:
    n_list: tuple[int, ...]
    gathered_side: tuple[float, ...]   # side m of the sub-lattice the budget can gather
    per_node_info: tuple[float, ...]
    ebar: float
    info_vs_nodes: FitResult           # expect slope -1/3


def sweep_fixed_pernode_energy(
    cfg: NetworkConfig,
    n_list: Sequence[int],
    measure: str = "kli",
    grid: int = DEFAULT_GRID,
) -> PernodeEnergySweep:
    """Grow the network with a fixed per-node energy budget Ebar.

    Ebar is the base sensing energy plus the per-node communication share at
    the smallest n, so the smallest network exactly exhausts its budget.  A
    deployment of n^2 nodes pools n^2 * Ebar joules, which buys gathering
    from a centered sub-lattice of side m(n) <= n at the configured sensing
    energy (the routing cost grows like m^3, the pool only like n^2).  The
    per-node information of the deployment is m^2 * rate / n^2; its exponent
    in the node count N = n^2 is the quantity of interest.
    """
    n_sorted = sorted(n_list)
    n0 = n_sorted[0]
    ec = cfg.e0 * cfg.dn**cfg.nu
    ebar = cfg.es + hop_sum(n0) * ec / n0**2
    zeta = zeta_from_spacing(PhysicalField(cfg.alpha), cfg.dn)
    rate = _per_node_rate(cfg.beta * cfg.es, zeta, measure, grid)

    def gathered(budget: float, n: int) -> float:
        # largest (real) side m with m^2 es + hops(m) ec <= budget
        lo, hi = 1.0, float(n)
        if hi**2 * cfg.es + hop_sum_closed(hi) * ec <= budget:
            return hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if mid**2 * cfg.es + hop_sum_closed(mid) * ec <= budget:
                lo = mid
            else:
                hi = mid
        return lo

    sides, per_node = [], []
    for n in n_sorted:
        m = gathered(n**2 * ebar, n)
        sides.append(m)
        per_node.append(m**2 * rate / n**2)
    nodes = [n**2 for n in n_sorted]
    return PernodeEnergySweep(
        n_list=tuple(n_sorted),
        gathered_side=tuple(sides),
        per_node_info=tuple(per_node),
        ebar=ebar,
        info_vs_nodes=fit_loglog(nodes, per_node),
    )


@dataclass(frozen=True)
class SpacingSweep:
    dn_list: tuple[float, ...]
    rates: tuple[float, ...]
    limit: float                 # decorrelated per-node information D
    gap_fit: FitResult           # slope of log((D - rate)/sqrt(dn)) vs dn
    alpha_estimate: float        # -slope, expect alpha


def sweep_spacing(
    cfg: NetworkConfig,
    dn_list: Sequence[float],
    measure: str = "kli",
    grid: int = DEFAULT_GRID,
) -> SpacingSweep:
    """Per-node information versus sensor spacing at fixed SNR.

    The gap to the decorrelated limit D closes like sqrt(dn) exp(-alpha dn),
    so the slope of log(gap/sqrt(dn)) against dn estimates -alpha.
    """
    snr = cfg.beta * cfg.es
    field = PhysicalField(cfg.alpha)
    limit = _decorrelated_limit(snr, measure)
    dns = sorted(dn_list)
    rates = [_per_node_rate(snr, zeta_from_spacing(field, d), measure, grid) for d in dns]
    xs, ys = [], []
    for d, r in zip(dns, rates):
        gap = limit - r
        if gap > 0.0:
            xs.append(d)
            ys.append(math.log(gap / math.sqrt(d)))
    if len(xs) >= 2:
        fit = _ols(np.asarray(xs), np.asarray(ys))
    else:
        # spacing so large the gap is below roundoff everywhere
        fit = FitResult(slope=math.nan, intercept=math.nan, r2=math.nan)
    return SpacingSweep(
        dn_list=tuple(dns),
        rates=tuple(rates),
        limit=limit,
        gap_fit=fit,
        alpha_estimate=-fit.slope,
    )


@dataclass(frozen=True)
class DensitySweep:
    mu_list: tuple[float, ...]
    rates: tuple[float, ...]
    per_area_info: tuple[float, ...]   # mu * rate
    plateau_variation: float           # (max-min)/mean over the top density decade


def sweep_infinite_density(
    L: float,
    mu_list: Sequence[float],
    measure: str,
    snr: float,
    alpha: float,
    grid: int = DEFAULT_GRID,
) -> DensitySweep:
    """Per-node information versus node density on a fixed L x L area at fixed SNR."""
    if L <= 0.0:
        raise ValueError(f"L must be positive, got {L!r}")
    field = PhysicalField(alpha)
    mus = sorted(mu_list)
    if mus[0] <= 0.0:
        raise ValueError("densities must be positive")
    rates = [_per_node_rate(snr, zeta_from_spacing(field, 1.0 / math.sqrt(mu)), measure, grid) for mu in mus]
    products = [mu * r for mu, r in zip(mus, rates)]
    top = [p for mu, p in zip(mus, products) if mu >= mus[-1] / 10.0]
    mean_top = sum(top) / len(top)
    variation = (max(top) - min(top)) / mean_top if mean_top > 0 else math.inf
    return DensitySweep(
        mu_list=tuple(mus),
        rates=tuple(rates),
        per_area_info=tuple(products),
        plateau_variation=variation,
    )


@dataclass(frozen=True)
class EnergySweep:
    et_list: tuple[float, ...]
    total_info: tuple[float, ...]
    increments: tuple[float, ...]      # total-info gain per successive budget step


def sweep_energy_fixed_all(
    cfg: NetworkConfig,
    et_list: Sequence[float],
    measure: str = "kli",
    grid: int = DEFAULT_GRID,
) -> EnergySweep:
    """Total information versus total energy at fixed n, dn.

    All excess energy above the fixed communication cost goes to sensing.
    Raises InfeasibleEnergyError if any budget is below the communication
    floor.
    """
    comm = hop_sum(cfg.n) * cfg.e0 * cfg.dn**cfg.nu
    ets = sorted(et_list)
    if ets[0] <= comm:
        raise InfeasibleEnergyError(
            f"total energy {ets[0]:.6g} J is below the communication floor {comm:.6g} J"
        )
    zeta = zeta_from_spacing(PhysicalField(cfg.alpha), cfg.dn)
    infos = []
    for et in ets:
        es = (et - comm) / cfg.n**2
        infos.append(cfg.n**2 * _per_node_rate(cfg.beta * es, zeta, measure, grid))
    increments = tuple(b - a for a, b in zip(infos, infos[1:]))
    return EnergySweep(et_list=tuple(ets), total_info=tuple(infos), increments=increments)


@dataclass(frozen=True)
class DensityOptimum:
    mu_star: float
    info_star: float
    mu_list: tuple[float, ...]          # feasible grid densities
    total_info: tuple[float, ...]
    local_maxima: tuple[tuple[float, float], ...]


def optimal_density(
    L: float,
    et: float,
    alpha: float,
    beta: float,
    e0: float,
    nu: float,
    measure: str = "kli",
    mu_grid: Sequence[float] | None = None,
    grid: int = DEFAULT_GRID,
    refine_rel_tol: float = 1e-4,
) -> DensityOptimum:
    """Density maximizing total information on an L x L area under budget et.

    For each density mu: n = L*sqrt(mu) with no integer rounding, dn = L/n,
    communication energy from the odd-n closed form, sensing energy from the
    budget at equality, SNR = beta * es, and total information = n^2 times
    the per-node rate.  Densities with negative sensing energy are excluded.
    The best grid point is refined by golden-section search; interior local
    maxima of the grid curve are reported alongside.
    """
    if mu_grid is None:
        mu_grid = np.logspace(-1, 4, 201)
    field = PhysicalField(alpha)

    def evaluate(mu: float) -> float:
        n = L * math.sqrt(mu)
        if n < 1.0:
            return -math.inf  # below a single node the hop model is meaningless
        dn = L / n
        es = (et - hop_sum_closed(n) * e0 * dn**nu) / n**2
        if es <= 0.0:
            return -math.inf
        snr = beta * es
        zeta = zeta_from_spacing(field, dn)
        return n**2 * _per_node_rate(snr, zeta, measure, grid)

    mus = np.sort(np.asarray(mu_grid, dtype=float))
    if mus[0] <= 0.0:
        raise ValueError("densities must be positive")
    infos = np.array([evaluate(mu) for mu in mus])
    feasible = np.isfinite(infos)
    if not feasible.any():
        raise InfeasibleEnergyError("no density satisfies the energy constraint")
    mus_f, infos_f = mus[feasible], infos[feasible]

    maxima = []
    for i in range(1, len(mus_f) - 1):
        if infos_f[i] > infos_f[i - 1] and infos_f[i] >= infos_f[i + 1]:
            maxima.append((float(mus_f[i]), float(infos_f[i])))

    best = int(np.argmax(infos_f))
    lo = mus_f[max(best - 1, 0)]
    hi = mus_f[min(best + 1, len(mus_f) - 1)]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = evaluate(x1), evaluate(x2)
    while hi - lo > refine_rel_tol * hi:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = evaluate(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = evaluate(x2)
    mu_star = 0.5 * (lo + hi)
    return DensityOptimum(
        mu_star=float(mu_star),
        info_star=float(evaluate(mu_star)),
        mu_list=tuple(float(m) for m in mus_f),
        total_info=tuple(float(v) for v in infos_f),
        local_maxima=tuple(maxima),
    )
