import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jpairs import linalg as la
from jpairs.errors import (
    ClusterAmbiguity,
    EmptySubspace,
    InvalidSignature,
    NotOrthogonal,
    OddDimension,
    SamplingExhausted,
    SingularConjugator,
)
from jpairs.structures import (
    R90,
    ComplexStructure,
    PairSignature,
    StructurePair,
    canonical_block_pair,
    classify_orthogonal_pair,
    commutant_dimension,
    conjugate,
    construct_canonical_pair,
    find_antiholomorphic_subspace,
    haar_orthogonal,
    is_complex_structure,
    load_pair,
    negate,
    orientation_sign,
    pairs_isomorphic,
    random_general_J,
    random_orthogonal_J,
    reflected_J,
    save_pair,
    standard_J,
)


def test_standard_structure():
    J = standard_J(3)
    assert J.is_valid() and J.is_orthogonal()
    assert J.orientation == 1
    assert J.dim == 6 and J.n == 3


def test_is_complex_structure():
    assert is_complex_structure(R90)
    assert not is_complex_structure(np.eye(2))
    with pytest.raises(OddDimension):
        is_complex_structure(np.eye(3))


def test_invalid_structure_detected():
    assert not ComplexStructure(np.eye(2)).is_valid()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_negation_orientation(n):
    # -J reverses orientation exactly when n is odd
    assert orientation_sign(negate(standard_J(n))) == (-1) ** n
    assert reflected_J(n).orientation == -1


def test_conjugate_by_diagonal():
    g = np.diag([1 / 1.2, 1.2, 1 / 0.8, 0.8])
    J = conjugate(standard_J(2), g)
    np.testing.assert_allclose(J.J @ J.J, -np.eye(4), atol=1e-12)
    np.testing.assert_allclose(J.J, g @ standard_J(2).J @ np.linalg.inv(g))
    assert not J.is_orthogonal()
    assert J.orientation == 1


def test_conjugate_singular():
    with pytest.raises(SingularConjugator):
        conjugate(standard_J(1), np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_haar_is_special_orthogonal(rng):
    Q = haar_orthogonal(6, rng)
    np.testing.assert_allclose(Q.T @ Q, np.eye(6), atol=1e-12)
    assert np.linalg.det(Q) > 0


@pytest.mark.parametrize("orientation", [1, -1])
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_random_orthogonal_J(n, orientation):
    J = random_orthogonal_J(n, orientation, seed=n)
    assert J.is_valid() and J.is_orthogonal()
    assert J.orientation == orientation


@pytest.mark.parametrize("orientation", [1, -1])
def test_random_general_J(orientation):
    J = random_general_J(3, orientation, seed=4)
    assert J.is_valid(1e-9)
    assert J.orientation == orientation


def test_random_general_J_deterministic():
    np.testing.assert_array_equal(random_general_J(2, 1, 9).J, random_general_J(2, 1, 9).J)


def test_random_general_J_exhausted():
    with pytest.raises(SamplingExhausted):
        random_general_J(4, 1, seed=0, cond_bound=1.01, max_tries=5)


def test_pair_K_relations():
    pair = StructurePair(random_general_J(2, 1, 1), random_general_J(2, 1, 2))
    J0, J1, K = pair.J0.J, pair.J1.J, pair.K
    np.testing.assert_allclose(J0 @ K @ np.linalg.inv(J0), np.linalg.inv(K), atol=1e-9)
    np.testing.assert_allclose(J0 @ K, J1, atol=1e-9)


def test_pair_dimension_mismatch():
    with pytest.raises(ValueError):
        StructurePair(standard_J(1), standard_J(2))


def test_pair_roundtrip(tmp_path):
    pair = StructurePair(random_orthogonal_J(2, 1, 3), random_orthogonal_J(2, -1, 4))
    path = tmp_path / "pair.json"
    save_pair(pair, path)
    back = load_pair(path)
    np.testing.assert_array_equal(back.J0.J, pair.J0.J)
    np.testing.assert_array_equal(back.J1.J, pair.J1.J)
    assert not back.same_orientation


def test_pair_from_dict_rejects_bad_matrix():
    with pytest.raises(ValueError):
        StructurePair.from_dict({"dim": 2, "J0": R90.tolist(), "J1": np.eye(2).tolist()})
    with pytest.raises(ValueError):
        StructurePair.from_dict({"dim": 4, "J0": R90.tolist(), "J1": R90.tolist()})


# signatures ----------------------------------------------------------------

@pytest.mark.parametrize("text,sig", [
    ("1.5:1;l=2;s=0", PairSignature(((1.5, 1),), 2, 0)),
    ("0.5:2,2.0:1;l=0;s=1", PairSignature(((0.5, 2), (2.0, 1)), 0, 1)),
    ("l=3", PairSignature((), 3, 0)),
])
def test_signature_parse(text, sig):
    assert PairSignature.parse(text) == sig
    assert PairSignature.parse(sig.format()) == sig


@pytest.mark.parametrize("text", ["3.5:1;l=0;s=0", "1.0:0;l=1", "2.0:1,1.0:1", "l=0;s=0", "x:1"])
def test_signature_parse_rejects(text):
    with pytest.raises((InvalidSignature, ValueError)):
        PairSignature.parse(text)


def test_signature_json_roundtrip():
    sig = PairSignature(((0.7, 2),), 1, 3)
    assert PairSignature.from_dict(json.loads(json.dumps(sig.to_dict()))) == sig
    assert sig.dim == 16 and sig.n == 8 and not sig.same_orientation


def test_block_pair_eigenvalues():
    theta = 1.1
    a, b = canonical_block_pair(theta)
    K = -a @ b
    vals = np.sort_complex(np.linalg.eigvals(K))
    expected = np.sort_complex(np.array([np.exp(-1j * theta)] * 2 + [np.exp(1j * theta)] * 2))
    np.testing.assert_allclose(vals, expected, atol=1e-12)
    np.testing.assert_allclose(K, la.left_mult_matrix(la.quat_exp_j(theta)), atol=1e-15)


@pytest.mark.parametrize("text", ["l=2;s=0", "1.5707963267948966:1;l=0;s=0", "0.3:1;l=0;s=1"])
def test_classify_simple(text):
    sig = PairSignature.parse(text)
    assert classify_orthogonal_pair(construct_canonical_pair(sig)).matches(sig, 1e-12)


def test_classify_identical_pair():
    sig = classify_orthogonal_pair(StructurePair(standard_J(2), standard_J(2)))
    assert sig == PairSignature((), 2, 0)


def test_classify_rejects_general_pair():
    pair = StructurePair(random_general_J(2, 1, 1), random_general_J(2, 1, 2))
    with pytest.raises(NotOrthogonal):
        classify_orthogonal_pair(pair)


def test_classify_ambiguous_cluster():
    a, b = canonical_block_pair(1.0)
    a2, b2 = canonical_block_pair(1.0 + 5e-7)
    pair = StructurePair(la.block_diag(a, a2), la.block_diag(b, b2))
    with pytest.raises(ClusterAmbiguity):
        classify_orthogonal_pair(pair)


def test_classify_near_degenerate_flag():
    sig = PairSignature(((5e-7, 1),), 0, 0)
    assert classify_orthogonal_pair(construct_canonical_pair(sig)).near_degenerate


@st.composite
def signatures(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    nblocks = draw(st.integers(0, n // 2))
    thetas = sorted(draw(st.lists(st.floats(0.05, math.pi - 0.05), min_size=nblocks,
                                  max_size=nblocks, unique=True)))
    # keep clusters well separated
    if any(b - a < 1e-3 for a, b in zip(thetas, thetas[1:])):
        thetas = thetas[:1]
    mults, used = [], 0
    for _ in thetas:
        r = draw(st.integers(1, max(1, (n - used) // 2)))
        if used + 2 * r > n:
            break
        mults.append(r)
        used += 2 * r
    thetas = thetas[:len(mults)]
    l = draw(st.integers(0, n - used))
    s = n - used - l
    return PairSignature(tuple(zip(thetas, mults)), l, s)


@given(signatures(), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_classify_roundtrip_under_conjugation(sig, seed):
    pair = construct_canonical_pair(sig)
    g = haar_orthogonal(pair.dim, np.random.default_rng(seed))
    got = classify_orthogonal_pair(pair.conjugated(g))
    assert got.matches(sig, 1e-9)
    assert got.same_orientation == pair.same_orientation


@given(signatures(max_n=4))
@settings(max_examples=40, deadline=None)
def test_commutant_dimension(sig):
    # each C-isotypic part C^l gives gl(l, C); each H block multiplicity r gives gl(r, H)
    expected = 2 * sig.l ** 2 + 2 * sig.s ** 2 + sum(4 * r * r for _, r in sig.blocks)
    assert commutant_dimension(construct_canonical_pair(sig)) == expected


def test_pairs_isomorphic():
    sig = PairSignature(((0.9, 1),), 1, 0)
    pair = construct_canonical_pair(sig)
    g = haar_orthogonal(6, np.random.default_rng(1))
    assert pairs_isomorphic(pair, pair.conjugated(g))
    assert not pairs_isomorphic(pair, construct_canonical_pair(PairSignature(((1.0, 1),), 1, 0)))


def test_antiholomorphic_subspace_canonical(c_plus_cbar):
    pair = StructurePair(*c_plus_cbar)
    plane, m = find_antiholomorphic_subspace(pair)
    assert m == 1
    np.testing.assert_allclose(plane.projector, np.diag([0, 0, 1, 1]), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_antiholomorphic_subspace_random(n):
    pair = StructurePair(random_orthogonal_J(n, 1, 10 + n), random_orthogonal_J(n, -1, 20 + n))
    plane, m = find_antiholomorphic_subspace(pair)
    # opposite orientation forces an odd number of antiholomorphic lines
    assert m % 2 == 1
    F = plane.frame
    assert np.linalg.norm((pair.J0.J + pair.J1.J) @ F, 2) <= 1e-8


def test_antiholomorphic_subspace_empty():
    with pytest.raises(EmptySubspace):
        find_antiholomorphic_subspace(StructurePair(standard_J(2), standard_J(2)))
