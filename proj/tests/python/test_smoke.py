import math

import pytest

import steinewma as sw


def test_distribution_and_moments():
    d = sw.CountDistribution.poisson(2.0)
    assert d.pmf(0) == pytest.approx(math.exp(-2.0), rel=1e-14)
    m = sw.from_mean_dispersion(sw.Family.NegBinomial, 2.0, 5.0 / 3.0).moments()
    assert m.mean == pytest.approx(2.0)
    assert m.dispersion_index == pytest.approx(5.0 / 3.0)
    draws = d.sample(20000, seed=3)
    assert len(draws) == 20000
    assert sum(draws) / len(draws) == pytest.approx(2.0, abs=0.05)
    assert d.sample(5, seed=3) == draws[:5]


def test_infeasible_target_raises():
    with pytest.raises(sw.FeasibilityError):
        sw.from_mean_dispersion(sw.Family.ZIPoisson, 2.0, 0.5)


def test_generate_is_seeded():
    model = sw.ProcessModel.poisson_inar1(2.1, 0.78)
    a = sw.generate(model, 500, seed=11)
    assert a == sw.generate(model, 500, seed=11)
    assert a != sw.generate(model, 500, seed=12)
    assert min(a) >= 0


def test_run_series_and_first_alarm():
    design = sw.ChartDesign.shewhart(sw.CountDistribution.poisson(2.1), 0, 6)
    out = sw.run_series(design, [2, 3, 7, 1])
    assert out["first_alarm"] == 3
    assert out["alarm"] == [False, False, True, False]

    stein = sw.ChartDesign.stein(sw.CountDistribution.poisson(2.0), sw.WeightFunction.linear(), 0.1, 0.5)
    assert stein.center == 1.0
    assert stein.lcl == pytest.approx(0.5)
    with pytest.raises(sw.DataError):
        sw.run_series(stein, [1, -2])


def test_exact_and_simulated_arl_agree():
    model = sw.ProcessModel.poisson_inar1(2.1, 0.78)
    exact = sw.exact_arl_markov(0, 6, model)
    assert exact == pytest.approx(326.2024, abs=1e-4)
    design = sw.ChartDesign.shewhart(sw.CountDistribution.poisson(2.1), 0, 6)
    est = sw.estimate_arl(design, model, replications=20000, seed=5)
    assert abs(est.arl - exact) <= 3 * est.se
    again = sw.estimate_arl(design, model, replications=20000, seed=5, workers=1)
    assert again.arl == est.arl and again.se == est.se


def test_calibration():
    model = sw.ProcessModel.iid(sw.CountDistribution.poisson(2.0))
    design = sw.ChartDesign.ewma(sw.CountDistribution.poisson(2.0), 0.2, 1.0)
    res = sw.calibrate_limit(design, model, target=100.0, replications=2000, seed=1)
    assert res.within_tolerance
    assert abs(res.achieved.arl - 100.0) <= 2 * res.achieved.se
    with pytest.raises(sw.FeasibilityError):
        sw.calibrate_limit(design, model, target=1.0)
    with pytest.raises(sw.NumericalError):
        sw.exact_arl_markov(-math.inf, math.inf, model)


def test_builtin_cell():
    assert "table1a-mu2" in sw.scenario_ids()
    r = sw.run_cell("table1a-mu2", "stein-root:ZIB:0", replications=2000)
    assert r["reference"] == 19.1
    assert abs(r["arl"] - 19.1) <= 4 * r["se"] + 0.5
    with pytest.raises(KeyError):
        sw.run_cell("table1a-mu2", "nope")
