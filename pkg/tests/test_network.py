"""Sensor-network energy accounting, reports, and scaling experiments."""

import math
from dataclasses import replace

import numpy as np
import pytest

from gmrfinfo.inforates import stein_kli
from gmrfinfo.network import (
    InfeasibleEnergyError,
    NetworkConfig,
    fit_loglog,
    hop_sum,
    hop_sum_closed,
    network_report,
    optimal_density,
    sweep_energy_fixed_all,
    sweep_fixed_density,
    sweep_fixed_pernode_energy,
    sweep_infinite_density,
    sweep_spacing,
    total_energy,
)


def brute_force_hops(n):
    c = n // 2
    return sum(abs(i - c) + abs(j - c) for i in range(n) for j in range(n))


BASE = NetworkConfig(n=33, dn=1.0, es=1.0, e0=1.0, nu=2.0, alpha=1.0, beta=10.0)


class TestEnergy:
    @pytest.mark.parametrize("n,expect", [(1, 0), (2, 4), (3, 12)])
    def test_hop_sum_small(self, n, expect):
        assert hop_sum(n) == expect

    @pytest.mark.parametrize("n", [4, 5, 10, 17, 32, 64])
    def test_hop_sum_matches_enumeration(self, n):
        assert hop_sum(n) == brute_force_hops(n)

    def test_hop_sum_closed_matches_odd(self):
        assert hop_sum_closed(5.0) == hop_sum(5)

    def test_total_energy_examples(self):
        assert total_energy(NetworkConfig(n=2, dn=1.0, es=0.0, e0=1.0, nu=2.0,
                                          alpha=1.0, beta=1.0)) == 4.0
        assert total_energy(NetworkConfig(n=3, dn=1.0, es=1.0, e0=1e-300, nu=2.0,
                                          alpha=1.0, beta=1.0)) == pytest.approx(9.0)

    def test_communication_term_reference_point(self):
        # n = 20, dn = 0.1, e0 = 0.1, nu = 2: hop term is 0.5*20^3*0.1*0.01 = 4 J
        cfg = NetworkConfig(n=20, dn=0.1, es=0.0, e0=0.1, nu=2.0, alpha=100.0, beta=1.0)
        assert total_energy(cfg) == pytest.approx(4.0, rel=1e-12)

    def test_fusion_energy(self):
        cfg = NetworkConfig(n=10, dn=1.0, es=0.0, e0=1.0, nu=2.0, alpha=1.0,
                            beta=1.0, fusion=True)
        assert total_energy(cfg) == 100.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            NetworkConfig(n=1, dn=1.0, es=1.0, e0=1.0, nu=2.0, alpha=1.0, beta=1.0)
        with pytest.raises(ValueError):
            NetworkConfig(n=4, dn=1.0, es=1.0, e0=1.0, nu=1.5, alpha=1.0, beta=1.0)


class TestReport:
    def test_wide_spacing_mi_closed_form(self):
        cfg = NetworkConfig(n=8, dn=50.0, es=1.0, e0=1.0, nu=2.0, alpha=1.0, beta=1.0)
        rep = network_report(cfg, "mi")
        assert rep.per_node_info == pytest.approx(0.5 * math.log(2.0), abs=1e-4)

    def test_zero_sensing_energy(self):
        cfg = NetworkConfig(n=8, dn=1.0, es=0.0, e0=1.0, nu=2.0, alpha=1.0, beta=1.0)
        rep = network_report(cfg)
        assert rep.snr == 0.0
        assert rep.total_info == 0.0

    def test_doubling_n_quadruples_info(self):
        r1 = network_report(replace(BASE, n=16))
        r2 = network_report(replace(BASE, n=32))
        assert r2.per_node_info == pytest.approx(r1.per_node_info, rel=1e-12)
        assert r2.total_info == pytest.approx(4.0 * r1.total_info, rel=1e-12)

    def test_identities(self):
        rep = network_report(BASE)
        assert rep.efficiency * rep.total_energy == pytest.approx(rep.total_info, rel=1e-12)
        assert rep.total_info == pytest.approx(rep.n**2 * rep.per_node_info, rel=1e-12)


class TestFixedDensity:
    def test_area_and_energy_exponents(self):
        sweep = sweep_fixed_density(BASE, [33, 65, 129, 257])
        assert sweep.eta_vs_area.slope == pytest.approx(-0.5, abs=0.05)
        assert sweep.info_vs_energy.slope == pytest.approx(2.0 / 3.0, abs=0.03)
        assert sweep.eta_vs_area.r2 > 0.999

    def test_fusion_restores_linear_info(self):
        sweep = sweep_fixed_density(replace(BASE, fusion=True), [33, 65, 129, 257])
        assert sweep.info_vs_energy.slope == pytest.approx(1.0, abs=0.01)

    def test_threads_do_not_change_results(self):
        a = sweep_fixed_density(BASE, [17, 33, 65], threads=1)
        b = sweep_fixed_density(BASE, [17, 33, 65], threads=4)
        assert a == b


class TestPernodeEnergy:
    def test_minus_one_third_exponent(self):
        sweep = sweep_fixed_pernode_energy(BASE, [33, 65, 129, 257])
        assert sweep.info_vs_nodes.slope == pytest.approx(-1.0 / 3.0, abs=0.05)

    def test_smallest_network_exhausts_budget(self):
        sweep = sweep_fixed_pernode_energy(BASE, [33, 65, 129])
        assert sweep.gathered_side[0] == pytest.approx(33.0, abs=1e-6)
        assert all(m < n for m, n in zip(sweep.gathered_side[1:], sweep.n_list[1:]))


class TestSpacing:
    def test_wide_spacing_reaches_limit(self):
        sweep = sweep_spacing(BASE, [40.0, 50.0])
        assert abs(sweep.limit - sweep.rates[-1]) < 1e-6

    def test_rate_nondecreasing_at_high_snr(self):
        sweep = sweep_spacing(BASE, list(np.linspace(0.5, 10.0, 16)))
        assert all(b >= a - 1e-12 for a, b in zip(sweep.rates, sweep.rates[1:]))

    def test_gap_decay_rate(self):
        # the gap to the limit decays like rho^2 ~ dn exp(-2 alpha dn), so the
        # sqrt(dn) e^{-alpha dn} regression slope estimates 2 alpha (the
        # first-order term in zeta integrates to zero over the spectrum)
        sweep = sweep_spacing(BASE, list(np.linspace(3.0, 8.0, 11)))
        assert sweep.alpha_estimate == pytest.approx(2.0 * BASE.alpha, rel=0.05)
        assert sweep.gap_fit.r2 > 0.999

    @pytest.mark.xfail(
        strict=True,
        reason="the per-node rate has zero slope in zeta at zeta = 0, so the "
               "gap closes like rho^2 and the regression recovers 2*alpha, "
               "not alpha",
    )
    def test_gap_fit_recovers_alpha(self):
        sweep = sweep_spacing(BASE, list(np.linspace(3.0, 8.0, 11)))
        assert sweep.alpha_estimate == pytest.approx(BASE.alpha, rel=0.1)


class TestInfiniteDensity:
    def test_products_increase_but_rate_decays(self):
        sweep = sweep_infinite_density(4.0, list(np.logspace(-1, 1, 12)), "kli", 1.0, 1.0)
        assert all(b < a for a, b in zip(sweep.rates[3:], sweep.rates[4:]))

    @pytest.mark.xfail(
        strict=True,
        reason="mu * rate drifts logarithmically (the physical correlation has "
               "a dn^2 log(1/dn) flat top, and the zeta -> rate map is "
               "exponentially degenerate at full correlation), so no 5% "
               "plateau exists at any reachable density",
    )
    def test_plateau(self):
        sweep = sweep_infinite_density(4.0, list(np.logspace(-1, 1, 12)), "kli", 1.0, 1.0)
        assert sweep.plateau_variation < 0.05

    @pytest.mark.xfail(
        strict=True,
        reason="same logarithmic drift: quartering the density changes the "
               "rate by a factor visibly above 1/4 at any density where the "
               "edge dependence is still numerically resolvable",
    )
    def test_halving_spacing_quarters_rate(self):
        sweep = sweep_infinite_density(4.0, [0.5, 2.0, 8.0], "kli", 1.0, 1.0)
        ratio = sweep.rates[-1] / sweep.rates[-2]
        assert ratio == pytest.approx(0.25, rel=0.1)

    def test_mi_products_also_drift_up(self):
        sweep = sweep_infinite_density(4.0, list(np.logspace(-1, 1, 10)), "mi", 1.0, 1.0)
        assert all(b > a for a, b in zip(sweep.per_area_info, sweep.per_area_info[1:]))


class TestEnergySweep:
    CFG = NetworkConfig(n=21, dn=0.1, es=1.0, e0=0.1, nu=2.0, alpha=100.0, beta=1.0)

    def test_infeasible_budget(self):
        floor = hop_sum(21) * 0.1 * 0.01
        with pytest.raises(InfeasibleEnergyError):
            sweep_energy_fixed_all(self.CFG, [0.9 * floor])

    def test_log_linear_growth(self):
        sweep = sweep_energy_fixed_all(self.CFG, [1e4, 1e5, 1e6, 1e7, 1e8])
        inc = sweep.increments
        for a, b in zip(inc, inc[1:]):
            assert b / a == pytest.approx(1.0, abs=0.1)

    def test_area_growth_beats_sensing_growth(self):
        # at a matched budget, spending on coverage (fixed density) must beat
        # spending on sensing quality (fixed coverage)
        fixed_area = sweep_energy_fixed_all(self.CFG, [1e6], "kli")
        grown = sweep_fixed_density(BASE, [33, 65, 129, 257])
        budgets = [r.total_energy for r in grown.reports]
        infos = [r.total_info for r in grown.reports]
        interp = np.interp(math.log(1e6), np.log(budgets), np.log(infos))
        assert math.exp(interp) > fixed_area.total_info[0]


class TestOptimalDensity:
    ARGS = dict(L=2.0, et=50.0, alpha=100.0, beta=1.0, e0=0.1, nu=2.0)

    def test_interior_maximum(self):
        res = optimal_density(**self.ARGS, mu_grid=np.logspace(0, 4, 201))
        assert res.info_star > res.total_info[0]
        assert res.info_star > res.total_info[-1]
        assert res.local_maxima

    def test_grid_refinement_stability(self):
        coarse = optimal_density(**self.ARGS, mu_grid=np.logspace(0, 4, 201))
        fine = optimal_density(**self.ARGS, mu_grid=np.logspace(0, 4, 401))
        assert coarse.mu_star == pytest.approx(fine.mu_star, rel=0.02)

    def test_all_infeasible(self):
        with pytest.raises(InfeasibleEnergyError):
            optimal_density(L=2.0, et=1e-6, alpha=100.0, beta=1.0, e0=0.1, nu=2.0,
                            mu_grid=np.logspace(2, 4, 20))

    def test_kli_tail_inverse_density(self):
        mus = np.logspace(math.log10(50), math.log10(2000), 20)
        res = optimal_density(**self.ARGS, measure="kli", mu_grid=mus)
        fit = fit_loglog(res.mu_list, res.total_info, drop_smallest=0.0)
        assert fit.slope == pytest.approx(-1.0, abs=0.15)

    def test_mi_tail_flat(self):
        mus = np.logspace(math.log10(50), math.log10(2000), 20)
        res = optimal_density(**self.ARGS, measure="mi", mu_grid=mus)
        fit = fit_loglog(res.mu_list, res.total_info, drop_smallest=0.0)
        assert abs(fit.slope) < 0.3


class TestFitLoglog:
    def test_recovers_power_law(self):
        x = np.logspace(0, 3, 12)
        y = 2.5 * x**-0.75
        fit = fit_loglog(x, y)
        assert fit.slope == pytest.approx(-0.75, rel=1e-12)
        assert fit.r2 == pytest.approx(1.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fit_loglog([1.0, 2.0], [1.0, -1.0])
