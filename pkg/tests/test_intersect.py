"""Tests for algebraic intersection numbers against independent oracles.

The flat torus gives a complete oracle (the determinant of winding vectors);
the octagon and staircase surfaces check the corner rule, the homological
intersection form, and their mutual consistency on full enumerations.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from kvol.field import CycloReal
from kvol.intersect import (
    ClosedCurve,
    IntersectionForm,
    homology_class,
    intersect,
    intersection_form,
)
from kvol.saddle import edge_connection, enumerate_saddle_connections
from kvol.surface import build_ngon, build_staircase, staircase_lengths


def F(n, v):
    return CycloReal.from_rational(n, v)


def as_int_pair(hol):
    x, y = hol
    assert x.is_rational() and y.is_rational()
    fx, fy = x.coeffs[0], y.coeffs[0]
    assert fx.denominator == 1 and fy.denominator == 1
    return int(fx), int(fy)


@pytest.fixture(scope="module")
def torus():
    return build_ngon(4)


@pytest.fixture(scope="module")
def torus_curves(torus):
    """Winding curves indexed by (p, q), |p|, |q| <= 3."""
    scs = enumerate_saddle_connections(torus, 4.25)
    by_hol = {}
    for sc in scs:
        by_hol[as_int_pair(sc.holonomy)] = sc
        rev = sc.reversed()
        by_hol[as_int_pair(rev.holonomy)] = rev
    curves = {}
    for p in range(-3, 4):
        for q in range(-3, 4):
            if (p, q) == (0, 0):
                continue
            g = math.gcd(abs(p), abs(q))
            prim = by_hol[(p // g, q // g)]
            curves[(p, q)] = ClosedCurve([prim] * g)
    return curves


@pytest.fixture(scope="module")
def octagon():
    return build_ngon(8)


@pytest.fixture(scope="module")
def octagon_scs(octagon):
    return enumerate_saddle_connections(octagon, 3)


@pytest.fixture(scope="module")
def octagon_form(octagon):
    return intersection_form(octagon)


class TestTorusOracle:
    def test_axis_pair_is_plus_one(self, torus_curves):
        r = intersect(torus_curves[(1, 0)], torus_curves[(0, 1)])
        assert r.total == 1
        assert r.interior == 0 and r.singular == 1

    def test_diagonals_split_interior_and_singular(self, torus_curves):
        r = intersect(torus_curves[(1, 1)], torus_curves[(1, -1)])
        assert r.total == -2
        assert r.interior == -1 and r.singular == -1
        assert len(r.interior_witnesses) == 1

    def test_determinant_oracle(self, torus_curves):
        vecs = [
            (p, q)
            for p in range(-2, 3)
            for q in range(-2, 3)
            if (p, q) != (0, 0)
        ] + [(3, 1), (-3, 2), (3, 3), (0, 3), (-3, -3)]
        for p, q in vecs:
            for r, s in vecs:
                got = intersect(torus_curves[(p, q)], torus_curves[(r, s)]).total
                assert got == p * s - q * r, ((p, q), (r, s))

    def test_determinant_oracle_other_perturbation_side(self, torus_curves):
        vecs = [(1, 0), (0, 1), (1, 1), (2, 1), (-1, 2), (2, 2), (3, -2), (-2, -2)]
        for p, q in vecs:
            for r, s in vecs:
                got = intersect(
                    torus_curves[(p, q)], torus_curves[(r, s)], positive_side=False
                ).total
                assert got == p * s - q * r, ((p, q), (r, s))

    def test_homology_classes(self, torus, torus_curves):
        e0 = homology_class(edge_connection(torus, 0))
        e1 = homology_class(edge_connection(torus, 1))
        assert sorted(map(tuple, [e0, e1])) == [(0, 1), (1, 0)]
        h = homology_class(torus_curves[(1, 0)])
        v = homology_class(torus_curves[(0, 1)])
        for p, q in [(2, 1), (-3, 2), (3, 3), (0, -2), (1, -1)]:
            got = homology_class(torus_curves[(p, q)])
            assert np.array_equal(got, p * h + q * v), (p, q)

    def test_form_matrix(self, torus):
        form = intersection_form(torus)
        m = form.matrix
        assert m.shape == (2, 2)
        assert m[0, 0] == 0 and m[1, 1] == 0
        assert abs(m[0, 1]) == 1 and m[1, 0] == -m[0, 1]

    def test_form_matches_geometry(self, torus, torus_curves):
        form = intersection_form(torus)
        sample = [(1, 0), (0, 1), (1, 1), (2, -1), (3, 2), (-2, -2)]
        for a in sample:
            for b in sample:
                ca, cb = torus_curves[a], torus_curves[b]
                assert form.pair(ca, cb) == intersect(ca, cb).total


class TestOctagonForm:
    def test_shape_and_entries(self, octagon_form):
        m = octagon_form.matrix
        assert m.shape == (4, 4)
        assert np.array_equal(m, -m.T)
        off = [m[i, j] for i in range(4) for j in range(4) if i != j]
        assert all(abs(x) == 1 for x in off)

    def test_unimodular(self, octagon_form):
        det = round(float(np.linalg.det(octagon_form.matrix.astype(float))))
        assert det == 1

    def test_basis_is_edge_curves(self, octagon, octagon_form):
        # one vertex class: the spanning tree is empty and every edge pair
        # contributes its own curve, in pair order
        assert octagon_form.tree_pairs == []
        assert octagon_form.basis_pairs == list(range(len(octagon.edge_pairs)))

    def test_side_pairs_meet_once_at_the_cone_point(self, octagon):
        edges = [edge_connection(octagon, pid) for pid in range(4)]
        for i in range(4):
            for j in range(4):
                r = intersect(edges[i], edges[j])
                assert r.interior == 0
                if i == j:
                    assert r.total == 0
                else:
                    assert abs(r.total) == 1


class TestOctagonGeometryVsForm:
    def test_enumeration_pairs_agree_with_form(self, octagon_scs, octagon_form):
        scs = octagon_scs
        assert len(scs) == 32
        gram = octagon_form.gram(scs)
        assert np.array_equal(gram, -gram.T)
        for i, a in enumerate(scs):
            for j in range(i, len(scs)):
                b = scs[j]
                r = intersect(a, b)
                assert r.total == gram[i, j], (i, j)

    def test_perturbation_side_independence(self, octagon_scs):
        scs = octagon_scs
        for i, a in enumerate(scs):
            for j in range(i, len(scs)):
                b = scs[j]
                left = intersect(a, b, positive_side=True)
                right = intersect(a, b, positive_side=False)
                assert left.total == right.total, (i, j)

    def test_reversal_negates(self, octagon_scs):
        scs = octagon_scs
        sample = scs[:6] + scs[13:19] + scs[-4:]
        for a in sample[:8]:
            for b in sample[8:]:
                assert intersect(a.reversed(), b).total == -intersect(a, b).total
                assert intersect(a, b.reversed()).total == -intersect(a, b).total

    def test_bilinearity_under_concatenation(self, octagon_scs):
        scs = octagon_scs
        triples = [
            (scs[0], scs[7], scs[15]),
            (scs[3], scs[11], scs[25]),
            (scs[8], scs[8], scs[30]),
            (scs[6], scs[21], scs[21]),
        ]
        for a, b, c in triples:
            joined = ClosedCurve([a, b])
            assert (
                intersect(joined, c).total
                == intersect(a, c).total + intersect(b, c).total
            )

    def test_backtrack_curve_is_null(self, octagon_scs, octagon_form):
        a = octagon_scs[5]
        wiggle = ClosedCurve([a, a.reversed()])
        assert not homology_class(wiggle).any()
        for b in octagon_scs[:10]:
            assert intersect(wiggle, b).total == 0
            assert intersect(b, wiggle).total == 0


class TestHomologyClasses:
    def test_edge_curves_are_standard_basis(self, octagon):
        E = len(octagon.edge_pairs)
        for pid in range(E):
            vec = homology_class(edge_connection(octagon, pid))
            expect = np.zeros(E, dtype=np.int64)
            expect[pid] = 1
            assert np.array_equal(vec, expect)

    def test_staircase_edge_curves_are_standard_basis(self):
        S = build_staircase(8)
        E = len(S.edge_pairs)
        for pid in range(E):
            vec = homology_class(edge_connection(S, pid))
            expect = np.zeros(E, dtype=np.int64)
            expect[pid] = 1
            assert np.array_equal(vec, expect)

    def test_class_is_reversal_antisymmetric(self, octagon_scs):
        for sc in octagon_scs[:12]:
            assert np.array_equal(
                homology_class(sc), -homology_class(sc.reversed())
            )


class TestStaircase:
    def test_parallel_connections_do_not_intersect(self):
        S = build_staircase(8)
        widths, _ = staircase_lengths(8)
        total_w = widths[0]
        for w in widths[1:]:
            total_w = total_w + w
        scs = enumerate_saddle_connections(S, total_w * 2, direction="inf")
        assert len(scs) >= 3
        for a in scs:
            for b in scs:
                r = intersect(a, b)
                assert r.total == 0, (a, b)

    def test_parallel_slanted_connections_do_not_intersect(self):
        S = build_staircase(8)
        phi = CycloReal.phi(8)
        scs = enumerate_saddle_connections(S, 3, direction=phi.inverse())
        assert len(scs) >= 2
        for a in scs:
            for b in scs:
                assert intersect(a, b).total == 0

    def test_two_class_surface_form_matches_geometry(self):
        S = build_staircase(10)
        assert len(S.vertex_classes) == 2
        form = intersection_form(S)
        assert len(form.tree_pairs) == 1
        scs = enumerate_saddle_connections(S, 1.2)
        closed = [sc for sc in scs if sc.start.class_id == sc.end.class_id]
        open_scs = [sc for sc in scs if sc.start.class_id != sc.end.class_id]
        curves = [ClosedCurve([sc]) for sc in closed[:6]]
        for sigma in open_scs[:5]:
            for tau in open_scs[:5]:
                if sigma.end.class_id == tau.start.class_id and tau.end.class_id == sigma.start.class_id:
                    curves.append(ClosedCurve([sigma, tau]))
        assert len(curves) > 8
        for a in curves:
            for b in curves:
                geo = intersect(a, b)
                assert geo.total == form.pair(a, b)
                assert geo.total == -intersect(b, a).total
                other = intersect(a, b, positive_side=False)
                assert geo.total == other.total

    def test_forms_build_on_all_models(self):
        for n in (8, 10, 12, 14):
            stair = intersection_form(build_staircase(n))
            assert np.array_equal(stair.matrix, -stair.matrix.T)
            poly = intersection_form(build_ngon(n))
            assert np.array_equal(poly.matrix, -poly.matrix.T)
            assert 2 * build_ngon(n).genus == len(poly.basis_pairs)


class TestValidation:
    def test_open_connection_rejected(self):
        S = build_staircase(10)
        scs = enumerate_saddle_connections(S, 1.2)
        open_sc = next(
            sc for sc in scs if sc.start.class_id != sc.end.class_id
        )
        with pytest.raises(ValueError):
            ClosedCurve([open_sc])

    def test_mismatched_surfaces_rejected(self, octagon, octagon_scs):
        other = build_ngon(8)
        sc = enumerate_saddle_connections(other, 1.1)[0]
        with pytest.raises(ValueError):
            intersect(octagon_scs[0], sc)

    def test_report_invariant(self, octagon_scs):
        for a in octagon_scs[:8]:
            for b in octagon_scs[8:16]:
                r = intersect(a, b)
                assert r.total == r.interior + r.singular
