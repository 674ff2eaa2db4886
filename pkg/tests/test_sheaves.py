"""Scalar-stalk sheaves: restriction tables, coboundaries, consistency."""

import numpy as np
import pytest

from perslap.complexes import FilteredComplex
from perslap.laplacians import persistent_laplacian
from perslap.sheaves import (
    CellularSheaf,
    check_composition,
    is_sheaf_doc,
    load_sheaf_json,
    persistent_sheaf_laplacian,
    sheaf_coboundary,
    sheaf_from_dict,
    sheaf_to_dict,
    weighted_complex,
)

# per-cell scalars on the full triangle; restriction = coface / face payload
TRI_PAYLOAD = ([1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [6.0])

TRI_RESTRICTIONS = {
    (0, 0, 0): 1.0, (0, 1, 0): 1.0,
    (0, 0, 1): 2.0, (0, 2, 1): 2.0,
    (0, 1, 2): 2.0, (0, 2, 2): 2.0,
    (1, 0, 0): 6.0, (1, 1, 0): 3.0, (1, 2, 0): 3.0,
}


@pytest.fixture
def payload_sheaf(filtered_triangle):
    return CellularSheaf.from_payload(filtered_triangle, TRI_PAYLOAD)


# -- construction -------------------------------------------------------------

def test_payload_rule_produces_quotient_restrictions(payload_sheaf):
    assert payload_sheaf.restrictions == TRI_RESTRICTIONS


def test_from_table_accepts_mapping_or_pairs(filtered_triangle):
    a = CellularSheaf.from_table(filtered_triangle, TRI_RESTRICTIONS)
    b = CellularSheaf.from_table(filtered_triangle, list(TRI_RESTRICTIONS.items()))
    assert a.restrictions == b.restrictions == TRI_RESTRICTIONS


def test_from_callback_runs_once_per_incidence(filtered_triangle):
    seen = []

    def rule(base, n, r, c, payload):
        seen.append((n, r, c))
        return payload[n + 1][c] / payload[n][r]

    sh = CellularSheaf.from_callback(filtered_triangle, rule,
                                     payload=TRI_PAYLOAD, serial=True)
    assert sh.restrictions == TRI_RESTRICTIONS
    assert sorted(seen) == sorted(TRI_RESTRICTIONS)
    assert sh.serial_restriction


def test_missing_restriction_rejected(filtered_triangle):
    table = dict(TRI_RESTRICTIONS)
    del table[(1, 2, 0)]
    with pytest.raises(ValueError, match="missing restriction value"):
        CellularSheaf(filtered_triangle, table)


def test_restriction_without_incidence_rejected(filtered_triangle):
    table = dict(TRI_RESTRICTIONS)
    table[(0, 2, 0)] = 1.0  # vertex 2 is not a face of edge 0
    with pytest.raises(ValueError, match="without incidence"):
        CellularSheaf(filtered_triangle, table)


def test_non_strict_base_rejected():
    weighted = FilteredComplex([np.array([[2.0], [-2.0]])], [[0.0, 0.0], [0.0]])
    with pytest.raises(ValueError, match="strict simplicial"):
        CellularSheaf.constant(weighted)


def test_zero_payload_rejected(filtered_triangle):
    with pytest.raises(ValueError, match="nonzero"):
        CellularSheaf.from_payload(
            filtered_triangle, ([1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [1.0]))


def test_payload_shape_must_match_cell_counts(filtered_triangle):
    with pytest.raises(ValueError, match="payload shape"):
        CellularSheaf(filtered_triangle, dict(TRI_RESTRICTIONS),
                      payload=([1.0, 1.0], [1.0, 1.0, 1.0], [1.0]))


# -- coboundaries -------------------------------------------------------------

def test_payload_coboundary_entries(payload_sheaf):
    d0 = sheaf_coboundary(payload_sheaf, 0).toarray()
    assert np.array_equal(d0, [[-1.0, 1.0, 0.0],
                               [-2.0, 0.0, 2.0],
                               [0.0, -2.0, 2.0]])
    d1 = sheaf_coboundary(payload_sheaf, 1).toarray()
    assert np.array_equal(d1, [[6.0, -3.0, 3.0]])


def test_constant_coboundary_is_transposed_boundary(filtered_triangle):
    sh = CellularSheaf.constant(filtered_triangle)
    for n in range(2):
        got = sheaf_coboundary(sh, n).toarray()
        assert np.array_equal(got, filtered_triangle.boundaries[n].toarray().T)


def test_top_and_trivial_coboundaries(payload_sheaf):
    assert sheaf_coboundary(payload_sheaf, 2).shape == (0, 1)
    lone = CellularSheaf.constant(FilteredComplex([], [[0.0]]))
    assert sheaf_coboundary(lone, 0).shape == (0, 1)


def test_coboundary_of_coboundary_vanishes(payload_sheaf, diamond):
    d0 = sheaf_coboundary(payload_sheaf, 0).toarray()
    d1 = sheaf_coboundary(payload_sheaf, 1).toarray()
    assert np.array_equal(d1 @ d0, np.zeros((1, 3)))
    rng = np.random.default_rng(23)
    for _ in range(5):
        payload = tuple(rng.uniform(0.5, 2.0, size=c) for c in diamond.cell_counts())
        sh = CellularSheaf.from_payload(diamond, payload)
        e0 = sheaf_coboundary(sh, 0).toarray()
        e1 = sheaf_coboundary(sh, 1).toarray()
        assert np.abs(e1 @ e0).max() <= 1e-12


# -- composition consistency --------------------------------------------------

def test_payload_sheaf_is_composition_consistent(payload_sheaf):
    assert check_composition(payload_sheaf).ok


def test_inconsistent_table_reports_both_paths(filtered_triangle):
    table = dict(TRI_RESTRICTIONS)
    table[(0, 0, 1)] = 3.0
    sh = CellularSheaf.from_table(filtered_triangle, table)
    report = check_composition(sh)
    assert not report.ok
    (v,) = report.violations
    assert v.rule == "composition"
    assert v.location == "dim-0 cell 0 <= dim-2 cell 0"
    assert v.message == "product via cell 0 is 6 but via cell 1 is 9"


def test_inconsistent_sheaf_refused_without_force(filtered_triangle):
    table = dict(TRI_RESTRICTIONS)
    table[(0, 0, 1)] = 3.0
    sh = CellularSheaf.from_table(filtered_triangle, table)
    with pytest.raises(ValueError, match="composition-consistent"):
        persistent_sheaf_laplacian(sh, 1, 1.4)
    with pytest.warns(UserWarning, match="composition-inconsistent"):
        L = persistent_sheaf_laplacian(sh, 1, 1.4, force=True)
    assert L.shape == (3, 3)


# -- Laplacians ---------------------------------------------------------------

def test_payload_sheaf_laplacian_spectrum(payload_sheaf):
    L = persistent_sheaf_laplacian(payload_sheaf, 1, 1.4)
    assert np.allclose(np.linalg.eigvalsh(L), [6.0, 12.0, 54.0], atol=1e-9)


def test_constant_sheaf_laplacian_equals_plain(diamond_filtered):
    sh = CellularSheaf.constant(diamond_filtered)
    levels = diamond_filtered.filtration_grid()
    for n in range(3):
        for ia, a in enumerate(levels):
            for b in levels[ia:]:
                Ls = persistent_sheaf_laplacian(sh, n, a, b)
                Lp = persistent_laplacian(diamond_filtered, n, a, b)
                assert Ls.shape == Lp.shape
                if Ls.size:
                    assert np.abs(Ls - Lp).max() <= 1e-12


def test_weighted_complex_is_a_valid_float_complex(payload_sheaf):
    wc = weighted_complex(payload_sheaf)
    assert wc.validate().ok
    assert wc.boundaries[0].dtype == np.float64
    assert all(np.array_equal(p, q) for p, q in
               zip(wc.filtrations, payload_sheaf.base.filtrations))
    # chain convention: boundary of the face lists weighted edge coefficients
    assert np.array_equal(wc.boundaries[1].toarray(), [[6.0], [-3.0], [3.0]])


# -- serialization ------------------------------------------------------------

def test_sheaf_doc_round_trip(payload_sheaf):
    doc = sheaf_to_dict(payload_sheaf)
    assert is_sheaf_doc(doc)
    back = sheaf_from_dict(doc)
    assert back.restrictions == payload_sheaf.restrictions
    assert back.payload is not None
    assert all(np.array_equal(p, q) for p, q in zip(back.payload, payload_sheaf.payload))


def test_sheaf_rule_documents(filtered_triangle):
    doc = filtered_triangle.to_dict()
    doc["rule"] = "payload"
    doc["payload"] = [list(p) for p in TRI_PAYLOAD]
    sh = sheaf_from_dict(doc)
    assert sh.restrictions == TRI_RESTRICTIONS
    doc = filtered_triangle.to_dict()
    doc["rule"] = "constant"
    sh = sheaf_from_dict(doc)
    assert set(sh.restrictions.values()) == {1.0}


def test_sheaf_doc_validation(filtered_triangle):
    doc = filtered_triangle.to_dict()
    assert not is_sheaf_doc(doc)
    doc["rule"] = "random"
    with pytest.raises(ValueError, match="unknown restriction rule"):
        sheaf_from_dict(doc)
    doc = filtered_triangle.to_dict()
    doc["rule"] = "payload"
    with pytest.raises(ValueError, match='requires a "payload"'):
        sheaf_from_dict(doc)
    doc = sheaf_to_dict(CellularSheaf.constant(filtered_triangle))
    doc["restrictions"][0] = [0, 0]
    with pytest.raises(ValueError, match="dim, face, coface, scalar"):
        sheaf_from_dict(doc)


def test_load_sheaf_json(tmp_path, payload_sheaf):
    import json

    path = tmp_path / "sheaf.json"
    path.write_text(json.dumps(sheaf_to_dict(payload_sheaf)))
    sh = load_sheaf_json(str(path))
    assert sh.restrictions == TRI_RESTRICTIONS
