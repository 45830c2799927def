import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import lambertw

from qprobe.attenuation import AttenuationResult, attenuation_comb_beta, attenuation_comb_ohmic, lorentzian_exact_J
from qprobe.control import CPMG, CW, FID, ZENO
from qprobe.fisher import (
    FlatObjectiveError,
    beta_n_condition,
    bound_constants,
    classical_fisher,
    error_factor,
    maximize_qfi_numeric,
    maximize_qfi_per_time,
    ohmic_n_condition,
    optimal_control,
    qfi,
    relative_error,
    t_opt_beta,
    t_opt_ohmic,
    t_opt_powerlaw,
    t_opt_zeno,
    ultimate_bound,
    zeno_n_condition,
)
from qprobe.model import PowerLawProbe, ProbeModel
from qprobe.spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum, PowerLawAttenuationModel


def _eps1_factor(J):
    return math.sqrt(1 - math.exp(-2 * J)) / (J * abs(math.log(J)) * math.exp(-J))


def test_bound_constants_vs_scipy_oracle():
    bc = bound_constants()
    J0 = 1 + 0.5 * lambertw(-2 * math.exp(-2)).real
    assert bc.J0 == pytest.approx(J0, rel=1e-13)
    assert bc.eps0 == pytest.approx(math.sqrt(1 - math.exp(-2 * J0)) / (J0 * math.exp(-J0)), rel=1e-13)
    res = minimize_scalar(_eps1_factor, bounds=(1e-4, 0.9), method="bounded", options={"xatol": 1e-12})
    assert bc.J1 == pytest.approx(res.x, rel=1e-6)
    assert bc.eps1 == pytest.approx(res.fun, rel=1e-10)


def test_bound_constants_printed_values():
    bc = bound_constants()
    assert bc.J0 == pytest.approx(0.7968, abs=5e-4)
    assert bc.eps0 == pytest.approx(2.484, abs=5e-3)
    assert bc.J1 == pytest.approx(0.106, abs=1e-3)
    assert bc.eps1 == pytest.approx(2.042, abs=1e-3)
    assert bc.J1 == pytest.approx(math.exp(-2.246), rel=2e-3)


def test_error_factor_unique_minimum():
    J = np.geomspace(1e-3, 20, 20001)
    slope = np.diff(error_factor(J))
    changes = np.count_nonzero(np.diff(np.sign(slope)) != 0)
    assert changes == 1
    assert J[np.argmin(error_factor(J))] == pytest.approx(bound_constants().J0, rel=1e-3)


def test_qfi_values():
    assert qfi(AttenuationResult(0.3, 0.0)) == 0.0
    assert qfi(AttenuationResult(0.8, 1.6)) == pytest.approx(0.6477, abs=1e-4)
    assert qfi(AttenuationResult(0.0, 1.0)) == math.inf
    assert qfi(AttenuationResult(400.0, 1.0)) == pytest.approx(math.exp(-800.0))
    assert qfi(AttenuationResult(1e-9, 2e-5)) == pytest.approx(4e-10 / 2e-9, rel=1e-8)
    with pytest.raises(ValueError):
        qfi(AttenuationResult(-1.0, 1.0))


@pytest.mark.parametrize("J", [1e-6, 1e-3, 0.1, 0.7968, 2.0, 7.0, 20.0])
def test_qfi_equals_classical_fisher(J):
    dJ = 0.37
    assert qfi(AttenuationResult(J, dJ)) == pytest.approx(classical_fisher(J, dJ), rel=1e-10)


def test_relative_error():
    f = 0.6477
    assert relative_error(f, 1.0, 4) == pytest.approx(relative_error(f, 1.0) / 2)
    assert relative_error(qfi(AttenuationResult(0.8, 1.6)), 1.0) == pytest.approx(1.2426, abs=1e-4)
    assert relative_error(0.0, 1.0) == math.inf
    with pytest.raises(ValueError):
        relative_error(1.0, 1.0, 0)
    assert ultimate_bound(1, 100) == pytest.approx(0.2484, abs=2e-4)


def test_ultimate_bound_values():
    assert ultimate_bound(2) == pytest.approx(1.242, abs=1e-3)
    assert ultimate_bound(1) == pytest.approx(2.484, abs=2e-3)
    assert ultimate_bound(3) == pytest.approx(0.828, abs=1e-3)
    with pytest.raises(ValueError):
        ultimate_bound(0)


def test_t_opt_zeno():
    t = t_opt_zeno(0.03, 500)
    assert t == pytest.approx(math.sqrt(1000 * bound_constants().J0) / 0.03, rel=1e-14)
    # the printed 942.8 / 1.886 use J0 rounded to 0.8
    assert t == pytest.approx(942.8, rel=3e-3)
    assert t / 500 == pytest.approx(1.89, abs=0.05)
    assert t_opt_zeno(1.0, 400) / t_opt_zeno(1.0, 100) == pytest.approx(2.0)
    assert zeno_n_condition(0.03, 10.0, 500)
    assert not zeno_n_condition(0.03, 10.0, 50)


def test_t_opt_zeno_hits_j0_in_flat_regime():
    g, tau, N = 0.03, 10.0, 40000
    t = t_opt_zeno(g, N)
    assert lorentzian_exact_J(g, tau, ZENO, N, t) == pytest.approx(bound_constants().J0, rel=0.01)


def test_t_opt_beta():
    t = t_opt_beta(1.0, 10.0, 2, 8, CPMG)
    assert t == pytest.approx(18.25, rel=0.01)
    for beta in (2, 4):
        ratio = t_opt_beta(1.0, 10.0, beta, 24, CPMG) / t_opt_beta(1.0, 10.0, beta, 8, CPMG)
        assert ratio == pytest.approx(3 ** (beta / (beta + 1)), rel=1e-12)
        t = t_opt_beta(0.5, 3.0, beta, 16, CW)
        assert attenuation_comb_beta(0.5, 3.0, beta, 16, t, CW).J == pytest.approx(bound_constants().J0, rel=1e-12)


def test_t_opt_ohmic():
    tau, N = 10.0, 20
    for s, g in ((0.5, 0.003), (2.0, 0.01), (3.0, 0.01)):
        assert ohmic_n_condition(g, tau, s, N, CW)
        t = t_opt_ohmic(g, tau, s, N, CW)
        assert t / (math.pi * N) > tau
        assert attenuation_comb_ohmic(g, tau, s, N, t, CW).J == pytest.approx(bound_constants().J0, rel=1e-10)
    with pytest.raises(ValueError):
        t_opt_ohmic(0.01, tau, 1.0, N)
    assert not ohmic_n_condition(0.01, tau, 0.5, N, CW)


def test_t_opt_powerlaw_and_eps1():
    bc = bound_constants()
    assert t_opt_powerlaw(10.0, 1.0) == pytest.approx(10 * 0.106, rel=2e-3)
    law = PowerLawAttenuationModel(7.0, 1.6)
    t = t_opt_powerlaw(7.0, 1.6)
    assert law(t) == pytest.approx(bc.J1, rel=1e-12)
    probe = PowerLawProbe(law)
    eps = relative_error(qfi(probe.result(t)), 1.6, 9)
    assert eps == pytest.approx(bc.eps1 / 3, rel=1e-10)


def test_numeric_zeno_matches_analytic():
    g, tau, N = 0.03, 10.0, 40000
    m = ProbeModel(OrnsteinUhlenbeckSpectrum(g, tau, 2), ZENO, N, target="g")
    rep = maximize_qfi_numeric(m, (100.0, 1e5))
    assert rep.t_opt == pytest.approx(t_opt_zeno(g, N), rel=5e-3)
    assert rep.ratio_to_bound == pytest.approx(1.0, abs=1e-9)  # g-homogeneity is exact


def test_numeric_cpmg_matches_closed_form():
    g, tau, N = 1.0, 10.0, 64
    assert beta_n_condition(g, tau, 2, N)
    m = ProbeModel(OrnsteinUhlenbeckSpectrum(g, tau, 2), CPMG, N)
    rep = maximize_qfi_numeric(m, (10.0, 500.0))
    assert rep.t_opt == pytest.approx(t_opt_beta(g, tau, 2, N), rel=0.02)
    assert rep.relative_error >= rep.ultimate_bound * (1 - 1e-9)
    assert rep.ratio_to_bound < 1.03


def test_fid_cannot_reach_bound():
    sp = OrnsteinUhlenbeckSpectrum(1.0, 10.0, 2)
    rep = maximize_qfi_numeric(ProbeModel(sp, FID), (0.01, 1e3))
    assert rep.relative_error > rep.ultimate_bound * 2


def test_per_time_optimum():
    m = ProbeModel(OrnsteinUhlenbeckSpectrum(1.0, 10.0, 2), CPMG, 8)
    rep = maximize_qfi_per_time(m, (1.0, 300.0))
    obj = lambda t: qfi(m.result(t)) / t
    assert obj(rep.t_opt) >= obj(0.9 * rep.t_opt)
    assert obj(rep.t_opt) >= obj(1.1 * rep.t_opt)
    per_shot = maximize_qfi_numeric(m, (1.0, 300.0))
    assert abs(rep.t_opt / per_shot.t_opt - 1) > 0.05


def test_per_time_powerlaw_oracle():
    law = PowerLawAttenuationModel(5.0, 2.0)
    probe = PowerLawProbe(law)

    def neg(logt):
        t = math.exp(logt)
        J, dJ = law(t), law.d_dgamma(t)
        return -dJ * dJ / math.expm1(2 * J) / t

    ref = math.exp(minimize_scalar(neg, bounds=(math.log(0.05), math.log(50)), method="bounded",
                                   options={"xatol": 1e-12}).x)
    rep = maximize_qfi_per_time(probe, (0.05, 50.0))
    assert rep.t_opt == pytest.approx(ref, rel=0.01)
    assert rep.ultimate_bound == pytest.approx(bound_constants().eps1)


def test_flat_objective_reported():
    m = ProbeModel(OhmicSpectrum(0.01, 10.0, 1.0), CW, 20, backend="closed")
    with pytest.raises(FlatObjectiveError):
        maximize_qfi_numeric(m, (1e3, 1e5))
    with pytest.raises(ValueError):
        maximize_qfi_numeric(m, (0.0, 1.0))


@pytest.mark.parametrize("g_tau", [0.3, 3.0, 30.0])
def test_optimal_control_meets_conditions(g_tau):
    tau = 10.0
    kind, n, t = optimal_control(OrnsteinUhlenbeckSpectrum(g_tau / tau, tau, 2))
    assert kind == CPMG and beta_n_condition(g_tau / tau, tau, 2, n)
    kind, n, t = optimal_control(OhmicSpectrum(g_tau / tau, tau, 2.0))
    assert kind == CW and ohmic_n_condition(g_tau / tau, tau, 2.0, n, CW)
    assert t >= 3 * math.pi * n * tau
