import math
import os

import numpy as np
import pytest

import swo


def test_swf_values():
    assert swo.evaluate("utilitarian", [1.0, 2.0, 3.0]) == pytest.approx(6.0)
    assert swo.evaluate("maximin", [4.0, 2.0, 3.0]) == pytest.approx(2.0)
    assert swo.evaluate("gini", [1.0, 1.0, 1.0]) == pytest.approx(1.0)
    assert swo.evaluate("pf", [1.0, math.e]) == pytest.approx(1.0)
    assert swo.canonical_spec("cv") == "coefficient-of-variation"


def test_kalai_smorodinsky_needs_u_max():
    assert swo.evaluate("ks", [1.0, 2.0], [2.0, 4.0]) == pytest.approx(3.0)
    with pytest.raises(swo.SwoError):
        swo.evaluate("ks", [1.0, 2.0])


def test_bad_spec_raises():
    with pytest.raises(swo.SwoError):
        swo.evaluate("not-a-family", [1.0])


def test_leximax_compare():
    assert swo.leximax_compare([1.0, 5.0], [2.0, 2.0]) == -1
    assert swo.leximax_compare([2.0, 1.0], [1.0, 2.0]) == 0


def test_maximin_two_applicants():
    sol = swo.solve([0.5, 1.0], [100.0, 100.0], 30.0, "maximin")
    assert sol["granted"] == pytest.approx([20.0, 10.0])
    assert sum(sol["granted"]) <= 30.0 + 1e-9


def test_solver_agrees_with_oracle():
    p, r, b = [0.9, 0.5, 0.7], [10.0, 20.0, 30.0], 30.0
    sol = swo.solve(p, r, b, "alpha:alpha=0.5")
    oracle = swo.brute_force_oracle(p, r, b, "alpha:alpha=0.5", 0.5)
    assert sol["objective"] >= oracle["objective"] - 1e-9


def test_proportional_ignores_p_hat():
    r, b = [10.0, 20.0, 30.0], 30.0
    a = swo.solve([0.2, 0.9, 0.4], r, b, "proportional")["granted"]
    c = swo.solve([0.8, 0.1, 0.6], r, b, "proportional")["granted"]
    assert a == pytest.approx(c, abs=1e-9)


def test_outcome_utilities():
    assert swo.outcome_utility(1, 1) == pytest.approx(0.75)
    assert swo.outcome_utility(-1, -1) == pytest.approx(0.5)
    assert swo.outcome_utility(1, -1) == pytest.approx(0.25)
    assert swo.outcome_utility(-1, 1) == pytest.approx(0.0)


def test_train_separable_toy():
    x = np.array([[1.0, -1.0], [1.0, 1.0]])
    y = np.array([-1.0, 1.0])
    theta = swo.train(x, y)
    probs = swo.predict_prob(theta, x)
    assert probs[0] < 0.5 < probs[1]


def test_lambda2_zero_matches_standard():
    rng = np.random.default_rng(3)
    x = np.hstack([np.ones((40, 1)), rng.normal(size=(40, 3))])
    y = np.where(x[:, 1] + 0.3 * rng.normal(size=40) > 0, 1.0, -1.0)
    a = swo.train(x, y, lambda2=0.0, swf="maximin")
    b = swo.train(x, y)
    assert np.array_equal(a, b)


@pytest.mark.skipif("SWO_DATASET" not in os.environ, reason="SWO_DATASET not set")
def test_dataset_facts():
    facts = swo.dataset_facts(os.environ["SWO_DATASET"])
    assert (facts["records"], facts["young"], facts["old"]) == (1000, 548, 452)
    assert round(100 * facts["young_positive_share"]) == 65
    assert round(100 * facts["old_positive_share"]) == 76
    x, y, young, names = swo.encode_german_credit(os.environ["SWO_DATASET"])
    assert x.shape == (1000, len(names))
    assert np.all(x[:, 0] == 1.0)
