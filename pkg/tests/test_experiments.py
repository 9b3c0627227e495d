import json
import math

import numpy as np
import pytest

from jpairs import linalg as la
from jpairs.experiments import (
    ExperimentConfig,
    ExperimentReport,
    example_r4,
    example_r4_boundary,
    r4_pair,
    run_trials,
    sample_pair,
    verify_conjugation_invariance,
    verify_negation_invariance,
)
from jpairs.intersection import OrientedPlane, is_transverse, plane_to_unit_quaternion
from jpairs.structures import StructurePair


@pytest.mark.parametrize("kwargs", [
    dict(mode="bogus", n=2, k=1),
    dict(mode="orth-same", n=2, k=3),
    dict(mode="orth-same", n=2, k=0),
    dict(mode="orth-same", n=2, k=1, trials=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


@pytest.mark.parametrize("mode", ["orth-same", "orth-opposite", "general-same", "general-opposite"])
@pytest.mark.parametrize("n", [2, 3])
def test_sampled_orientation(mode, n):
    pair = sample_pair(ExperimentConfig(mode, n, 1), 4)
    assert pair.same_orientation == mode.endswith("same")
    assert pair.is_orthogonal == mode.startswith("orth")


def test_trial_seeds_are_order_independent():
    cfg = ExperimentConfig("general-same", 3, 1, trials=5, seed=11)
    bigger = ExperimentConfig("general-same", 3, 1, trials=8, seed=11)
    for i in range(5):
        np.testing.assert_array_equal(sample_pair(cfg, i).J1.J, sample_pair(bigger, i).J1.J)


def test_run_trials_deterministic():
    cfg = ExperimentConfig("general-same", 2, 1, trials=10, seed=3)
    a, b = run_trials(cfg).to_dict(), run_trials(cfg).to_dict()
    a.pop("duration"), b.pop("duration")
    assert a == b


def test_orth_same_example():
    rep = run_trials(ExperimentConfig("orth-same", 4, 2, trials=100, seed=7))
    assert rep.pass_count == 100
    assert all(o.raw_count_same == 2 for o in rep.outcomes)
    assert rep.pass_count + rep.fail_count + rep.skipped_count == 100


def test_orth_opposite_example():
    rep = run_trials(ExperimentConfig("orth-opposite", 3, 1, trials=100, seed=1))
    assert rep.ok and rep.skipped_count == 0
    assert all((o.raw_count_same, o.raw_count_opposite) == (0, 1) for o in rep.outcomes)


def test_general_same_line_in_r4():
    rep = run_trials(ExperimentConfig("general-same", 2, 1, trials=200, seed=5))
    assert rep.ok
    for o in rep.outcomes:
        if o.status == "pass":
            assert o.signed_count_same == 0
            assert o.raw_count_same in (0, 2)


@pytest.mark.parametrize("mode", ["general-same", "general-opposite"])
def test_general_raw_counts_parity(mode):
    rep = run_trials(ExperimentConfig(mode, 4, 2, trials=20, seed=2))
    assert rep.ok
    exp = rep.expected_signed
    for o in rep.outcomes:
        if o.status == "pass":
            assert o.raw_count_same >= abs(exp[0])
            assert (o.raw_count_same - abs(exp[0])) % 2 == 0


def test_report_json_roundtrip():
    rep = run_trials(ExperimentConfig("orth-opposite", 2, 1, trials=3, seed=0))
    doc = json.loads(rep.to_json())
    assert ExperimentReport.from_dict(doc).to_dict() == doc
    assert "pass 3/3" in rep.summary()


@pytest.mark.parametrize("g_kind", ["identity", "orthogonal", "invertible"])
@pytest.mark.parametrize("pair_kind", ["orthogonal", "general"])
def test_conjugation_invariance(pair_kind, g_kind):
    assert all(verify_conjugation_invariance(s, 100 + s, 3, 1, pair_kind, g_kind) for s in range(3))


def test_negation_invariance():
    assert all(verify_negation_invariance(s, 2, 1, "orthogonal-opposite") for s in range(3))


# the example in R^4 --------------------------------------------------------------

def test_example_r4_main():
    rep = example_r4(1.2, 0.8)
    assert not rep.degenerate
    assert len(rep.planes) == 2 and all(rep.transverse)
    assert sorted(rep.signs) == [-1, 1] and rep.signed_total == 0
    projectors = sorted(np.round(np.diag(p.projector)).tolist() for p in rep.planes)
    assert projectors == [[0, 0, 1, 1], [1, 1, 0, 0]]
    assert all(q.allclose(la.QI, atol=1e-10) for q in rep.quaternions)
    assert rep.describe() == "2 points, signs +1 -1, signed total 0"


def test_example_r4_unbalanced():
    rep = example_r4(1.0, 2.0)
    assert len(rep.planes) == 2 and rep.signed_total == 0


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (0.8, 0.8), (2.0, 0.5)])
def test_example_r4_degenerate(a, b):
    rep = example_r4(a, b)
    assert rep.degenerate and rep.signed_total is None


def test_boundary_value():
    assert abs(example_r4_boundary(1 / math.sqrt(2)) - 0.6) <= 1e-6


def test_boundary_grid_oracle():
    b = 0.8
    xs = np.linspace(-5, 5, 2001)
    X, Y = np.meshgrid(xs, xs)
    c = (1 / b**2 - b**2) * np.max(Y / (X**2 + Y**2 + 1))
    assert abs(example_r4_boundary(b) - c / math.sqrt(1 + c * c)) < 1e-5


def test_boundary_monotone_and_limit():
    bs = np.linspace(0.5, 0.99, 12)
    us = [example_r4_boundary(b) for b in bs]
    assert all(u1 > u2 for u1, u2 in zip(us, us[1:]))
    assert example_r4_boundary(0.999999) < 1e-5


def test_boundary_outside_safe_interval_warns():
    with pytest.warns(UserWarning):
        example_r4_boundary(0.3)
    with pytest.raises(ValueError):
        example_r4_boundary(1.5)


def test_boundary_plane_is_not_transverse():
    """At a = b the line through (x, y) = (0, 1) reaches latitude u_max and is tangent."""
    b = 1 / math.sqrt(2)
    pair = r4_pair(b, b)
    F = np.array([[0, b, 1 / b, 0], [-1 / b, 0, 0, b]]).T
    P = OrientedPlane.from_frame(F, pair.J1)
    assert P.is_invariant(pair.J1)
    alpha = plane_to_unit_quaternion(P)
    assert abs(alpha.y - example_r4_boundary(b)) < 1e-9
    fiber_pair = StructurePair(la.left_mult_matrix(alpha), pair.J1.J)
    assert not is_transverse(fiber_pair, P)[0]
