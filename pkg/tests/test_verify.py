"""Verification battery internals: the published-table permutation search,
fault injection through corrupted correction tables, and result plumbing.

The battery's pass/fail gates themselves are exercised in
``test_acceptance.py``; here we check that the machinery can also fail.
"""

import numpy as np
import pytest

from bqtsim.corrections import load_table
from bqtsim.protocol import EprInput
from bqtsim.verify import (
    CRITERIA,
    DEFAULT_SEED,
    criterion_reconstruction,
    find_reference_permutations,
    reference_branch_terms,
    run_all,
)

CANONICAL_SLOTS = ("A1", "B1", "b1", "b2", "a2", "a3")


def test_default_seed_value():
    assert DEFAULT_SEED == 0xB97


def test_reference_branch_terms_worked_branch():
    rows = reference_branch_terms(0, "+", 0, "+")
    assert rows == [
        (1, (0, 0), "000000"),
        (1, (0, 1), "010011"),
        (1, (1, 0), "101100"),
        (1, (1, 1), "111111"),
    ]


def test_reference_branch_terms_sign_rows():
    signs = [row[0] for row in reference_branch_terms(1, "-", 1, "-")]
    assert signs == [1, -1, -1, 1]
    kets = [row[2] for row in reference_branch_terms(1, "-", 1, "-")]
    assert kets == ["001111", "011100", "100011", "110000"]


def test_permutation_search_finds_canonical_assignment():
    rng = np.random.default_rng(DEFAULT_SEED)
    v = rng.normal(size=8)
    alice = EprInput.normalized(complex(v[0], v[1]), complex(v[2], v[3]))
    bob = EprInput.normalized(complex(v[4], v[5]), complex(v[6], v[7]))
    perms = find_reference_permutations(alice, bob)
    assert CANONICAL_SLOTS in perms
    # the published strings only pin the qubits up to the symmetric pairs
    # (b1, b2) and (a2, a3), so exactly four assignments survive
    assert len(perms) == 4
    for perm in perms:
        assert perm[0] == "A1" and perm[1] == "B1"
        assert set(perm[2:4]) == {"b1", "b2"}
        assert set(perm[4:6]) == {"a2", "a3"}


def test_permutation_search_excludes_register_order():
    # the published ket strings do NOT follow the simulator's remainder
    # register order (b1, b2, a2, a3, A1, B1); the search must reject it
    rng = np.random.default_rng(3)
    v = rng.normal(size=8)
    alice = EprInput.normalized(complex(v[0], v[1]), complex(v[2], v[3]))
    bob = EprInput.normalized(complex(v[4], v[5]), complex(v[6], v[7]))
    perms = find_reference_permutations(alice, bob)
    assert ("b1", "b2", "a2", "a3", "A1", "B1") not in perms


def test_reconstruction_criterion_passes_with_packaged_table():
    result = criterion_reconstruction(DEFAULT_SEED, n_inputs=2)
    assert result.passed
    assert result.name == "bidirectional-reconstruction"
    assert result.line().startswith("PASS  bidirectional-reconstruction")


def test_reconstruction_criterion_fails_with_corrupted_table():
    table = dict(load_table())
    table[(0, "+", 0, "+", "+", "+")] = ("XX", "II")  # sabotage one leaf
    result = criterion_reconstruction(DEFAULT_SEED, n_inputs=1, table=table)
    assert not result.passed
    assert result.line().startswith("FAIL")


def test_reconstruction_criterion_fails_on_crash():
    table = dict(load_table())
    del table[(0, "+", 0, "+", "+", "+")]  # missing key crashes enumeration
    result = criterion_reconstruction(DEFAULT_SEED, n_inputs=1, table=table)
    assert not result.passed
    assert "KeyError" in result.detail


def test_run_all_shape_and_names():
    results = run_all(seed=DEFAULT_SEED)
    assert tuple(r.name for r in results) == CRITERIA
    assert len(results) == 9
    for r in results:
        assert r.elapsed >= 0.0
        assert isinstance(r.detail, str) and r.detail


def test_run_all_propagates_bad_table():
    table = dict(load_table())
    table[(1, "-", 1, "-", "-", "-")] = ("II", "II")
    results = run_all(seed=DEFAULT_SEED, table=table)
    by_name = {r.name: r for r in results}
    assert not by_name["bidirectional-reconstruction"].passed
    # criteria that do not consult the injected table still pass
    assert by_name["swap-reference-pairing"].passed
    assert by_name["branch-uniformity"].passed
