import math

import numpy as np
import pytest
from scipy.stats import chi2

from fracbd.errors import ConditioningError
from fracbd.mittag import MLDistribution, ml, ml_survival
from fracbd.processes import (
    ProcessKind,
    ProcessParams,
    _death_ensemble,
    death_pmf,
    linear_death_mean,
    linear_death_var,
    population_at,
    simulate_linear_death,
    simulate_sublinear_death,
    simulate_yule,
    simulate_yule_horizon,
    step_rows,
    sublinear_death_mean,
    sublinear_death_var,
    yule_mean,
    yule_pmf,
    yule_var,
)
from fracbd.variates import RandomSource, sample_ml

from oracles import classical_death_chain, ks_statistic, mc_standard_error


class TestParams:
    def test_yule_single_progenitor(self):
        with pytest.raises(ValueError):
            ProcessParams(ProcessKind.YULE, 0.5, 1.0, n0=3)

    def test_validation(self):
        with pytest.raises(ValueError):
            ProcessParams(ProcessKind.LINEAR_DEATH, 1.5, 1.0, 4)
        with pytest.raises(ValueError):
            ProcessParams(ProcessKind.LINEAR_DEATH, 0.5, 0.0, 4)
        with pytest.raises(ValueError):
            ProcessParams(ProcessKind.LINEAR_DEATH, 0.5, 1.0, 0)

    def test_rate_schedules(self):
        yule = ProcessParams(ProcessKind.YULE, 0.5, 2.0)
        assert np.array_equal(yule.rate_schedule(4), [2.0, 4.0, 6.0, 8.0])
        lin = ProcessParams(ProcessKind.LINEAR_DEATH, 0.5, 1.5, 3)
        assert np.array_equal(lin.rate_schedule(), [4.5, 3.0, 1.5])
        sub = ProcessParams(ProcessKind.SUBLINEAR_DEATH, 0.5, 1.5, 3)
        assert np.array_equal(sub.rate_schedule(), [1.5, 3.0, 4.5])


class TestSimulation:
    def test_path_invariants(self):
        path = simulate_yule(0.7, 1.0, 50, RandomSource(1, 0))
        assert path.n_events == 50
        assert np.all(path.inter_times > 0.0)
        assert np.allclose(path.event_times, np.cumsum(path.inter_times))
        assert np.all(np.diff(path.event_times) > 0.0)

    def test_death_paths_have_n0_events(self):
        for sim in (simulate_linear_death, simulate_sublinear_death):
            path = sim(0.6, 1.0, 25, RandomSource(2, 0))
            assert path.n_events == 25

    def test_determinism(self):
        a = simulate_yule(0.5, 0.5, 20, RandomSource(9, 3))
        b = simulate_yule(0.5, 0.5, 20, RandomSource(9, 3))
        assert np.array_equal(a.inter_times, b.inter_times)

    def test_figure_style_death_path_shape(self):
        # 40-event strictly decreasing trajectory from 40 to 0
        path = simulate_linear_death(0.75, 1.0, 40, RandomSource(4, 0))
        rows = step_rows(path)
        pops = [p for _, p in rows]
        assert pops == list(range(40, -1, -1))
        assert rows[0] == (0.0, 40)

    def test_classical_extinction_time_means(self):
        # nu=1 linear death n0=2: mean total extinction 1/2 + 1
        reps = 100000
        inter = _death_ensemble(ProcessKind.LINEAR_DEATH, 1.0, 1.0, 2, reps, RandomSource(5, 0))
        total = inter.sum(axis=1)
        assert abs(total.mean() - 1.5) < 4 * mc_standard_error(total)
        # nu=1 sublinear mu=2 n0=3: (1/2)(1 + 1/2 + 1/3)
        inter = _death_ensemble(ProcessKind.SUBLINEAR_DEATH, 1.0, 2.0, 3, reps, RandomSource(6, 0))
        total = inter.sum(axis=1)
        want = 0.5 * (1 + 0.5 + 1 / 3)
        assert abs(total.mean() - want) < 4 * mc_standard_error(total)

    def test_first_interdeath_survival(self):
        # linear death (nu=0.5, mu=1, n0=5): P(T0 > 1) = E_{1/2,1}(-5)
        inter = _death_ensemble(ProcessKind.LINEAR_DEATH, 0.5, 1.0, 5, 100000, RandomSource(7, 0))
        t0 = inter[:, 0]
        emp = (t0 > 1.0).mean()
        want = ml(0.5, 1.0, -5.0)
        se = math.sqrt(want * (1 - want) / t0.size)
        assert abs(emp - want) < 4 * se

    def test_yule_no_birth_probability(self):
        # P(no birth by t=1) = E_{3/4,1}(-1)
        d = MLDistribution(nu=0.75, theta=1.0)
        t1 = sample_ml(d, RandomSource(8, 0), 100000)
        emp = (t1 > 1.0).mean()
        want = ml(0.75, 1.0, -1.0)
        se = math.sqrt(want * (1 - want) / t1.size)
        assert abs(emp - want) < 4 * se

    def test_sublinear_single_individual_is_ml(self):
        inter = _death_ensemble(ProcessKind.SUBLINEAR_DEATH, 0.6, 1.0, 1, 20000, RandomSource(9, 0))
        draws = np.sort(inter[:, 0])
        stat = ks_statistic(draws, 1.0 - ml_survival(0.6, 1.0, draws))
        assert stat < 0.015

    def test_horizon_wrapper(self):
        path = simulate_yule_horizon(0.8, 1.0, 2.0, RandomSource(10, 0))
        assert path.event_times[-1] > 2.0
        assert np.all(path.event_times[:-1] <= 2.0) or path.n_events == 1

    def test_horizon_cap(self):
        with pytest.raises(RuntimeError):
            simulate_yule_horizon(1.0, 100.0, 50.0, RandomSource(11, 0), max_events=64)


class TestPmf:
    def test_yule_at_zero(self):
        assert yule_pmf(0.6, 1.0, 0.0, 1) == 1.0
        assert yule_pmf(0.6, 1.0, 0.0, 5) == 0.0

    def test_yule_classical_geometric(self):
        want = math.exp(-1.0) * (1.0 - math.exp(-1.0))
        assert yule_pmf(1.0, 1.0, 1.0, 2) == pytest.approx(want, rel=1e-10)
        for i in range(1, 20):
            geo = math.exp(-1.0) * (1.0 - math.exp(-1.0)) ** (i - 1)
            assert yule_pmf(1.0, 1.0, 1.0, i) == pytest.approx(geo, rel=1e-9)

    def test_yule_truncated_normalization(self):
        # accumulate until the cumulative mass is within tolerance of 1; the
        # binomial alternating sum amplifies the ML evaluator's ~1e-13 noise
        # by C(i, i/2), so the tight tolerance needs the mass to concentrate
        # at small i
        for t, tol in ((0.125, 1e-8), (0.5, 1e-7)):
            total = 0.0
            for i in range(1, 61):
                total += yule_pmf(0.8, 1.0, t, i)
                if total >= 1.0 - tol:
                    break
            assert total == pytest.approx(1.0, abs=tol)

    def test_yule_mean_consistency(self):
        # small lambda t^nu: truncated sum of i * pmf matches the closed form
        partial = 0.0
        mean_partial = 0.0
        for i in range(1, 61):
            p = yule_pmf(0.5, 0.5, 0.2, i)
            partial += p
            mean_partial += i * p
            if partial >= 1.0 - 1e-8:
                break
        assert mean_partial == pytest.approx(yule_mean(0.5, 0.5, 0.2), abs=1e-6)

    def test_death_at_zero(self):
        assert death_pmf(0.7, 1.0, 6, 0.0, 6) == 1.0
        assert death_pmf(0.7, 1.0, 6, 0.0, 3) == 0.0

    def test_death_classical_binomial(self):
        want = 3 * math.exp(-1.0) * (1.0 - math.exp(-1.0)) ** 2
        assert death_pmf(1.0, 1.0, 3, 1.0, 1) == pytest.approx(want, rel=1e-10)
        for i in range(0, 4):
            p = math.exp(-1.0)
            want = math.comb(3, i) * p ** i * (1 - p) ** (3 - i)
            assert death_pmf(1.0, 1.0, 3, 1.0, i) == pytest.approx(want, rel=1e-9)

    def test_death_normalization_exact(self):
        total = math.fsum(death_pmf(0.7, 2.0, 10, 0.5, i) for i in range(0, 11))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_death_mean_consistency(self):
        for (nu, mu, n0, t) in [(0.7, 2.0, 10, 0.5), (0.5, 1.0, 20, 1.0)]:
            mean = math.fsum(i * death_pmf(nu, mu, n0, t, i) for i in range(0, n0 + 1))
            assert mean == pytest.approx(linear_death_mean(nu, mu, n0, t), abs=1e-6)

    def test_conditioning_caps(self):
        with pytest.raises(ConditioningError):
            yule_pmf(0.8, 1.0, 1.0, 61)
        with pytest.raises(ConditioningError):
            death_pmf(0.8, 1.0, 61, 1.0, 10)
        with pytest.raises(ConditioningError):
            sublinear_death_mean(0.8, 1.0, 51, 1.0)
        with pytest.raises(ConditioningError):
            sublinear_death_var(0.8, 1.0, 51, 1.0)


class TestMoments:
    def test_classical_yule(self):
        assert yule_mean(1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-12)
        assert yule_var(1.0, 1.0, 1.0) == pytest.approx(math.e ** 2 - math.e, rel=1e-12)

    def test_classical_linear_death_variance(self):
        for mu in (0.5, 1.0, 2.0):
            for n0 in (2, 5, 17):
                for t in (0.3, 1.0, 2.5):
                    want = n0 * math.exp(-mu * t) * (1 - math.exp(-mu * t))
                    assert linear_death_var(1.0, mu, n0, t) == pytest.approx(want, rel=1e-10)

    def test_at_time_zero(self):
        assert linear_death_mean(0.6, 1.0, 7, 0.0) == 7.0
        assert linear_death_var(0.6, 1.0, 7, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert sublinear_death_mean(0.6, 1.0, 7, 0.0) == 7.0
        assert sublinear_death_var(0.6, 1.0, 7, 0.0) == 0.0

    def test_sublinear_mean_against_markov_chain(self):
        # classical (nu=1) sublinear death: rate mu(n0-m+1) out of state m
        for n0, mu, t in [(2, 1.0, 0.7), (5, 0.8, 0.5), (10, 1.0, 1.2)]:
            p = classical_death_chain(lambda m: mu * (n0 - m + 1), n0, t)
            states = np.arange(n0 + 1)
            want_mean = float((states * p).sum())
            want_var = float((states ** 2 * p).sum() - want_mean ** 2)
            assert sublinear_death_mean(1.0, mu, n0, t) == pytest.approx(want_mean, rel=1e-10)
            assert sublinear_death_var(1.0, mu, n0, t) == pytest.approx(want_var, rel=1e-9)

    def test_sublinear_moments_against_simulation(self):
        nu, mu, n0, t = 0.6, 1.0, 10, 1.0
        reps = 300000
        inter = _death_ensemble(ProcessKind.SUBLINEAR_DEATH, nu, mu, n0, reps, RandomSource(12, 0))
        events = np.cumsum(inter, axis=1)
        pops = n0 - (events <= t).sum(axis=1)
        se_mean = mc_standard_error(pops.astype(float))
        assert abs(pops.mean() - sublinear_death_mean(nu, mu, n0, t)) < 4 * se_mean
        want_var = sublinear_death_var(nu, mu, n0, t)
        centered = (pops - pops.mean()) ** 2
        se_var = mc_standard_error(centered.astype(float))
        assert abs(pops.var(ddof=1) - want_var) < 4 * se_var

    def test_linear_death_var_against_simulation(self):
        nu, mu, n0, t = 0.75, 1.0, 40, 1.0
        reps = 100000
        inter = _death_ensemble(ProcessKind.LINEAR_DEATH, nu, mu, n0, reps, RandomSource(13, 0))
        events = np.cumsum(inter, axis=1)
        pops = n0 - (events <= t).sum(axis=1)
        centered = (pops - pops.mean()) ** 2
        se_var = mc_standard_error(centered.astype(float))
        assert abs(pops.var(ddof=1) - linear_death_var(nu, mu, n0, t)) < 4 * se_var

    def test_yule_mean_against_simulation(self):
        nu, lam, t = 0.8, 0.5, 2.0
        reps = 30000
        pops = np.empty(reps)
        for r in range(reps):
            path = simulate_yule_horizon(nu, lam, t, RandomSource(14, r))
            pops[r] = population_at(path, t)
        want = yule_mean(nu, lam, t)
        assert abs(pops.mean() - want) < 4 * mc_standard_error(pops)

    def test_monotonicity_in_time(self):
        ts = np.linspace(0.0, 4.0, 40)
        dm = [linear_death_mean(0.7, 1.0, 12, t) for t in ts]
        assert np.all(np.diff(dm) < 0.0)
        sm = [sublinear_death_mean(0.7, 1.0, 12, t) for t in ts]
        assert np.all(np.diff(sm) < 0.0)
        ym = [yule_mean(0.7, 1.0, t) for t in ts]
        assert np.all(np.diff(ym) > 0.0)


class TestPopulationAt:
    def test_trivia(self):
        path = simulate_linear_death(0.8, 1.0, 9, RandomSource(15, 0))
        assert population_at(path, 0.0) == 9
        yule = simulate_yule(0.8, 1.0, 5, RandomSource(15, 1))
        assert population_at(yule, 0.0) == 1

    def test_counts_events(self):
        process = ProcessParams(ProcessKind.YULE, 1.0, 1.0)
        from fracbd.processes import SamplePath

        path = SamplePath(
            inter_times=np.array([1.0, 1.0, 1.0]),
            event_times=np.array([1.0, 2.0, 3.0]),
            process=process,
        )
        assert population_at(path, 2.5) == 3
        assert population_at(path, 1.0) == 2  # boundary counts the event

    def test_negative_time_rejected(self):
        path = simulate_yule(0.8, 1.0, 3, RandomSource(16, 0))
        with pytest.raises(ValueError):
            population_at(path, -1.0)

    def test_distribution_matches_pmf_chi_square(self):
        nu, mu, n0, t = 0.7, 1.0, 10, 1.0
        reps = 100000
        inter = _death_ensemble(ProcessKind.LINEAR_DEATH, nu, mu, n0, reps, RandomSource(17, 0))
        events = np.cumsum(inter, axis=1)
        pops = n0 - (events <= t).sum(axis=1)
        observed = np.bincount(pops, minlength=n0 + 1).astype(float)
        expected = np.array([reps * death_pmf(nu, mu, n0, t, i) for i in range(n0 + 1)])
        # merge states with tiny expectation into their neighbor
        keep = expected >= 5.0
        obs_m = [observed[keep].tolist(), observed[~keep].sum()]
        exp_m = [expected[keep].tolist(), expected[~keep].sum()]
        obs = np.array(obs_m[0] + ([obs_m[1]] if exp_m[1] > 0 else []))
        exp = np.array(exp_m[0] + ([exp_m[1]] if exp_m[1] > 0 else []))
        stat = ((obs - exp) ** 2 / exp).sum()
        crit = chi2.ppf(0.99, df=len(exp) - 1)
        assert stat < crit


def test_step_rows_structure():
    path = simulate_sublinear_death(0.9, 1.0, 4, RandomSource(18, 0))
    rows = step_rows(path)
    assert rows[0] == (0.0, 4)
    assert [p for _, p in rows] == [4, 3, 2, 1, 0]
    assert [t for t, _ in rows] == [0.0] + list(path.event_times)
