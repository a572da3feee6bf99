import math

import pytest

import pefcert


def test_model_sizes():
    assert len(pefcert.model_vertices("ns")) == 24
    assert len(pefcert.model_vertices("tsirelson")) == 80


def test_werner_chsh():
    nu = pefcert.family_werner(1.0)
    assert len(nu) == 16
    assert math.isclose(sum(nu), 1.0, abs_tol=1e-12)
    assert math.isclose(pefcert.chsh_expectation(nu), 2 * math.sqrt(2), rel_tol=1e-10)


def test_strength_matches_certificate_rate():
    nu = pefcert.family_werner(1.0)
    s = pefcert.statistical_strength(nu)
    gamma, beta0 = pefcert.certificate_rate(nu)
    assert abs(s - gamma) < 1e-6
    assert beta0 > 0


def test_pef_and_rates():
    nu = pefcert.family_werner(0.9)
    sol = pefcert.optimize_pef(nu, 0.2)
    assert sol["converged"]
    assert sol["objective_bits"] > 0
    curve = pefcert.rate_curve(nu, [0.05, 0.2, 1.0], jobs=2)
    assert [round(b, 3) for b, _, _ in curve] == [0.05, 0.2, 1.0]
    assert curve[0][1] >= curve[1][1] >= curve[2][1]


def test_plan():
    plan = pefcert.improvement_factors(pefcert.family_werner(1.0), b=0, epsilon=1e-6, kappa=1)
    assert abs(plan["f_pm"] - 4.36) < 0.02
    assert abs(plan["f_eat"] - 86.35) < 0.5


def test_simulate_and_certify():
    nu = pefcert.family_werner(1.0)
    trials = pefcert.simulate_trials(nu, 3000, 7)
    assert trials == pefcert.simulate_trials(nu, 3000, 7)
    cert = pefcert.certify(trials, nu, beta=0.2, epsilon=1e-3, kappa=0.5, b=16)
    assert cert["success"]
    assert cert["entropy_bits"] == pytest.approx(16.0)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        pefcert.family_werner(2.0)
    with pytest.raises(pefcert.ValidationError):
        pefcert.optimize_pef(pefcert.family_werner(1.0), -1.0)


def test_cli_entry():
    code, out, err = pefcert.cli(["family", "--family", "werner", "--p", "2", "--error-json"])
    assert code == 1
    assert "validation" in err
