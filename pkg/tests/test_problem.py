import warnings

import numpy as np
import pytest

from fraclab.grid import Field, make_grid
from fraclab.problem import (
    HypothesisParams, HypothesisWarning, PotentialFamily, alpha_window, build_problem,
    check_hypotheses, critical_exponent, limit_problem, read_field, write_field,
)


@pytest.fixture
def g1():
    return make_grid(1, 32.0, 256)


def test_limit_problem_is_flagged(g1):
    prob = build_problem(0.5, 3, g1, PotentialFamily(), PotentialFamily())
    assert prob.is_limit
    assert np.all(prob.v_field.values == 1) and np.all(prob.q_field.values == 1)
    rep = check_hypotheses(prob)
    assert rep.passed and rep.violations == []


def test_limit_hypotheses_sharp_margins(g1):
    prob = build_problem(0.5, 3, g1, hyp=HypothesisParams(0, 0, 2.5))
    rep = check_hypotheses(prob)
    assert rep.passed
    assert rep.margins["H_V"] == 0.0 and rep.margins["H_Q"] == 0.0


def test_exponent_range():
    assert critical_exponent(1, 0.5) == np.inf
    assert critical_exponent(3, 0.5) == 3.0
    g = make_grid(1, 8.0, 64)
    build_problem(0.5, 7, g)  # 2s >= N: every p > 2 admissible
    with pytest.raises(ValueError):
        build_problem(0.5, 3.0, make_grid(3, 4.0, 16))
    with pytest.raises(ValueError):
        build_problem(0.5, 2.0, g)
    with pytest.raises(ValueError):
        build_problem(1.0, 3.0, g)


def test_nonpositive_potentials_rejected(g1):
    with pytest.raises(ValueError, match="V must be positive"):
        build_problem(0.5, 3, g1, PotentialFamily("gaussian", -1.0))
    with pytest.raises(ValueError, match="Q must be nonnegative"):
        build_problem(0.5, 3, g1, q_family=PotentialFamily("algebraic_dip", 1.5, 2.0))


def test_algebraic_bump_satisfies_upper_bound(g1):
    a = 1 + 2 * 0.5 + 0.5
    prob = build_problem(0.5, 3, g1, PotentialFamily("algebraic_bump", 0.5, a),
                         hyp=HypothesisParams(0.5, 0.0, a))
    rep = check_hypotheses(prob)
    assert rep.h_upper_v and rep.passed


def test_slow_tail_fails_hypothesis(g1):
    # V - 1 ~ |x|^-(N+2s-0.1) decays too slowly for any admissible alpha
    a = 2 - 0.1
    prob = build_problem(0.5, 3, g1, PotentialFamily("algebraic_bump", 1.0, a),
                         hyp=HypothesisParams(1.0, 0.0, 2.5))
    rep = check_hypotheses(prob)
    assert not rep.passed
    assert "H:V<=1+kappa1|x|^-alpha" in rep.violations


def test_dip_q_inside_window_no_warning(g1):
    lo, hi = alpha_window(1, 0.5, 3)
    a = 0.5 * (lo + hi)
    with warnings.catch_warnings():
        warnings.simplefilter("error", HypothesisWarning)
        prob = build_problem(0.5, 3, g1, q_family=PotentialFamily("algebraic_dip", 0.3, a),
                             hyp=HypothesisParams(0.0, 0.3, a))
    rep = check_hypotheses(prob)
    assert rep.passed and rep.alpha_in_window


def test_alpha_outside_window_warns(g1):
    with pytest.warns(HypothesisWarning):
        build_problem(0.5, 3, g1, hyp=HypothesisParams(0, 0, 10.0))


def test_gaussian_family_and_center():
    g = make_grid(2, 8.0, 32)
    f = PotentialFamily("gaussian", -0.5, center=(1.0, -2.0)).sample(g)
    i = np.unravel_index(np.argmin(f.values), g.shape)
    assert np.isclose(g.axis[i[0]], 1.0) and np.isclose(g.axis[i[1]], -2.0)
    assert np.isclose(f.values.min(), 0.5)
    with pytest.raises(ValueError):
        PotentialFamily("gaussian", 1.0, center=(1.0,)).sample(g)
    with pytest.raises(ValueError):
        PotentialFamily("spiky")


def test_field_file_roundtrip(tmp_path, rng):
    g = make_grid(2, 3.5, 16)
    u = Field(g, rng.normal(size=g.shape))
    write_field(tmp_path / "u.txt", u)
    g2, v = read_field(tmp_path / "u.txt")
    assert g2 == g and np.array_equal(v.values, u.values)


def test_field_file_errors(tmp_path):
    (tmp_path / "a.txt").write_text("1.0\n2.0\n")
    with pytest.raises(ValueError, match="header"):
        read_field(tmp_path / "a.txt")
    (tmp_path / "b.txt").write_text("# grid 1 4.0 16\n" + "1.0\n" * 15)
    with pytest.raises(ValueError, match="expected 16"):
        read_field(tmp_path / "b.txt")


def test_custom_table_family(tmp_path):
    g = make_grid(1, 4.0, 32)
    v = Field(g, 1.0 + 0.1 * np.cos(np.pi * g.axis / 4))
    write_field(tmp_path / "v.txt", v)
    prob = build_problem(0.5, 3, g, PotentialFamily("custom_table", table=str(tmp_path / "v.txt")))
    assert np.array_equal(prob.v_field.values, v.values)
    with pytest.raises(ValueError, match="does not match"):
        PotentialFamily("custom_table", table=str(tmp_path / "v.txt")).sample(make_grid(1, 4.0, 64))


def test_digest_distinguishes_problems(g1):
    a = limit_problem(0.5, 3, g1)
    b = build_problem(0.5, 3, g1, PotentialFamily("gaussian", 0.1))
    assert a.digest() == limit_problem(0.5, 3, g1).digest()
    assert a.digest() != b.digest()
