import math

import numpy as np
import pytest

from fhn_atlas import (DomainError, Params, classify_equilibrium, closed_form_eigenvalues,
                       eval_field, find_equilibria)
from fhn_atlas.equilibria import belyakov_crossing, classify_matrix, cubic_data
from fhn_atlas.errors import NotAnEquilibrium, RootFindingFailure


@pytest.mark.parametrize("p", [Params(0, 2, 1), Params(0, -1, 0.5), Params(0.3, 2, 1.5),
                               Params(-0.7, 0.0, 2), Params(0.2, 0.5, -1)])
def test_equilibria_are_zeros_of_the_field(p):
    for e in find_equilibria(p):
        assert max(abs(v) for v in eval_field(p, e.location)) < 1e-10


def test_counts_on_both_sides_of_the_pitchfork():
    assert len(find_equilibria(Params(0, 0.5, 1))) == 1
    assert len(find_equilibria(Params(0, 3, 1))) == 3
    assert len(find_equilibria(Params(0, -2, 1))) == 3


def test_labels_and_kappa_pairing():
    eqs = {e.label: e for e in find_equilibria(Params(0, 3, 2))}
    assert set(eqs) == {"E1", "E2", "E3"}
    e2, e3 = eqs["E2"].location, eqs["E3"].location
    assert e2.x == pytest.approx(-e3.x) and e2.y == pytest.approx(-e3.y)
    assert eqs["E1"].classification == "saddle"


def test_cubic_discriminant_sign_sets_root_count():
    three = cubic_data(Params(0.1, 3, 1))
    one = cubic_data(Params(2.0, 3, 1))
    assert three.discriminant > 0 and len(three.real_roots) == 3
    assert one.discriminant < 0 and len(one.real_roots) == 1
    with pytest.raises(DomainError):
        cubic_data(Params(0.1, 0, 1))


def test_closed_forms_for_e1_and_e2():
    p = Params(0, 3, 1.7)
    for label in ("E1", "E2", "E3"):
        e = [q for q in find_equilibria(p) if q.label == label][0]
        for u, v in zip(closed_form_eigenvalues(p, label), e.eigenvalues):
            assert abs(u - v) < 1e-12
    with pytest.raises(DomainError):
        closed_form_eigenvalues(Params(0, 0.5, 1), "E2")
    with pytest.raises(DomainError):
        closed_form_eigenvalues(Params(0.1, 0.5, 1), "E1")


@pytest.mark.parametrize("m,cls", [
    ([[-1, 0], [0, 2]], "saddle"),
    ([[-1, 0], [0, -2]], "stable-node"),
    ([[1, 0], [0, 2]], "unstable-node"),
    ([[-1, -3], [3, -1]], "stable-focus"),
    ([[1, -3], [3, 1]], "unstable-focus"),
    ([[0, -1], [1, 0]], "non-hyperbolic-pure-imaginary"),
    ([[1, 1], [-1, -1]], "non-hyperbolic-double-zero"),
    ([[0, 0], [0, -1]], "semi-hyperbolic"),
])
def test_classify_matrix(m, cls):
    assert classify_matrix(m) == cls


def test_non_equilibrium_is_rejected():
    with pytest.raises(NotAnEquilibrium):
        classify_equilibrium(Params(0, 1, 1), (1.0, 1.0))


def test_belyakov_crossing_on_tf1():
    c = 0.5
    path = [Params(0, b, c) for b in np.linspace(0.6, 0.9, 4)]
    hits = belyakov_crossing(path, "E1")
    assert len(hits) == 1
    # E1 discriminant (c^2 + b)^2 - 4c^2 vanishes at b = 2|c| - c^2
    assert hits[0].b == pytest.approx(2 * c - c * c, abs=1e-9)


def test_belyakov_skips_hopf_crossings():
    c = 0.5
    path = [Params(0, b, c) for b in np.linspace(0.2, 0.3, 3)]
    assert belyakov_crossing(path, "E1") == []


def test_small_b_keeps_the_equilibrium_on_the_cubic():
    # y = (a - x)/b would lose every digit here
    p = Params(1.0, 4e-91, 1.0)
    (e,) = find_equilibria(p)
    assert e.location.y == pytest.approx(-2 / 3)


def test_equilibria_beyond_float_range_raise():
    with pytest.raises(RootFindingFailure):
        find_equilibria(Params(0.0, -1e-244, 1.0))
