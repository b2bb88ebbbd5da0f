"""Orientations, DoF permutations, lattices, and nodal interpolation."""

import itertools
import random

import numpy as np
import pytest

from nmck.element import (
    LagrangeElement,
    cone_vertex_order,
    dof_permutation,
    entity_node_coords,
    entity_orientation,
    interpolate,
    lattice_tuples,
    orientation_compose,
    reference_cell,
)
from nmck.errors import NoDofsOnEntity, NotAPermutation, UnsupportedElement
from nmck.harness import MeshSpec, gen_mesh
from nmck.section import build_local_section

from fixtures_threecell import serial_mesh, two_rank_coords, two_rank_mesh


class TestOrientation:
    def test_edge_cases(self):
        assert entity_orientation(["a", "b"], ["a", "b"]) == 0
        assert entity_orientation(["a", "b"], ["b", "a"]) == 1

    def test_triangle_identity(self):
        assert entity_orientation(["a", "b", "c"], ["a", "b", "c"]) == 0

    def test_six_rearrangements_hit_every_code(self):
        mesh = ("a", "b", "c")
        codes = {
            entity_orientation(mesh, ref)
            for ref in itertools.permutations(mesh)
        }
        assert codes == set(range(6))

    def test_not_a_permutation(self):
        with pytest.raises(NotAPermutation):
            entity_orientation(["a", "b"], ["a", "c"])
        with pytest.raises(NotAPermutation):
            entity_orientation(["a", "a"], ["a", "a"])
        with pytest.raises(NotAPermutation):
            entity_orientation(["a"], ["a"])


class TestDofPermutation:
    def test_edge_degree4(self):
        el = LagrangeElement("P", 4)
        assert dof_permutation(el, 1, 0) == (0, 1, 2)
        assert dof_permutation(el, 1, 1) == (2, 1, 0)

    def test_triangle_interior_rotation(self):
        # rotating the cell once so its cone lists cycle by one position
        el = LagrangeElement("P", 4)
        assert dof_permutation(el, 2, 2) == (2, 0, 1)

    def test_edge_reversal_is_involution(self):
        for k in (2, 3, 4):
            el = LagrangeElement("P", k)
            pi = dof_permutation(el, 1, 1)
            assert [pi[pi[i]] for i in range(len(pi))] == list(range(len(pi)))

    def test_triangle_group_law(self):
        el = LagrangeElement("P", 4)
        perms = {o: dof_permutation(el, 2, o) for o in range(6)}
        for o1 in range(6):
            for o2 in range(6):
                o12 = orientation_compose(2, o1, o2)
                composed = tuple(perms[o1][perms[o2][i]] for i in range(3))
                assert composed == perms[o12], (o1, o2, o12)

    def test_edge_group_law(self):
        el = LagrangeElement("P", 3)
        perms = {o: dof_permutation(el, 1, o) for o in range(2)}
        for o1 in range(2):
            for o2 in range(2):
                o12 = orientation_compose(1, o1, o2)
                composed = tuple(perms[o1][perms[o2][i]] for i in range(len(perms[0])))
                assert composed == perms[o12]

    def test_no_dofs_on_entity(self):
        with pytest.raises(NoDofsOnEntity):
            dof_permutation(LagrangeElement("P", 1), 1, 0)
        with pytest.raises(NoDofsOnEntity):
            dof_permutation(LagrangeElement("P", 2), 2, 0)

    def test_dp_full_lattice_group_law(self):
        el = LagrangeElement("DP", 2)
        perms = {o: dof_permutation(el, 2, o) for o in range(6)}
        n = len(perms[0])
        assert n == 6
        for o1 in range(6):
            for o2 in range(6):
                o12 = orientation_compose(2, o1, o2)
                assert tuple(perms[o1][perms[o2][i]] for i in range(n)) == perms[o12]

    def test_vertex_trivial(self):
        assert dof_permutation(LagrangeElement("P", 3), 0, 0) == (0,)


class TestLagrangeCounts:
    @pytest.mark.parametrize("degree", [1, 2, 3, 4])
    def test_p_closed_forms(self, degree):
        el = LagrangeElement("P", degree)
        k = degree
        assert el.entity_dof_count(0, 3) == 1
        assert el.entity_dof_count(1, 3) == k - 1
        assert el.entity_dof_count(2, 3) == (k - 1) * (k - 2) // 2
        assert el.entity_dof_count(3, 3) == (k - 1) * (k - 2) * (k - 3) // 6

    @pytest.mark.parametrize("degree", [0, 1, 2, 3, 4])
    def test_dp_total_on_cell(self, degree):
        el = LagrangeElement("DP", degree)
        k = degree
        assert el.entity_dof_count(2, 2) == (k + 1) * (k + 2) // 2
        assert el.entity_dof_count(1, 2) == 0
        assert el.entity_dof_count(0, 2) == 0
        assert el.entity_dof_count(3, 3) == (k + 1) * (k + 2) * (k + 3) // 6

    def test_p_total_matches_simplex_dimension(self):
        # space dimension of degree-k polynomials on a triangle
        for k in (1, 2, 3, 4):
            el = LagrangeElement("P", k)
            plex = reference_cell("triangle").plex
            total = sum(
                el.entity_dof_count(plex.depth_of[p], 2)
                for p in range(plex.npoints)
            )
            assert total == (k + 1) * (k + 2) // 2

    def test_invalid_elements(self):
        with pytest.raises(UnsupportedElement):
            LagrangeElement("P", 0)
        with pytest.raises(UnsupportedElement):
            LagrangeElement("Q", 1)
        with pytest.raises(UnsupportedElement):
            LagrangeElement("DP", 5)

    def test_tag_roundtrip(self):
        for fam, deg in (("P", 4), ("DP", 0), ("DP", 2)):
            el = LagrangeElement(fam, deg)
            assert LagrangeElement.from_tag(el.tag()) == el


class TestLattices:
    def test_descending_order(self):
        lat = lattice_tuples(3, 4, interior=True)
        assert lat == [(2, 1, 1), (1, 2, 1), (1, 1, 2)]
        assert lattice_tuples(2, 4, interior=True) == [(3, 1), (2, 2), (1, 3)]

    def test_full_lattice_dp0(self):
        assert lattice_tuples(3, 0, interior=False) == [(0, 0, 0)]

    def test_reference_cell_nodes(self):
        ref = reference_cell("triangle")
        el = LagrangeElement("P", 2)
        nodes = ref.entity_nodes(el)
        flat = np.array([c for chunk in nodes.values() for c in chunk])
        assert len(flat) == 6
        # vertices plus edge midpoints of the unit triangle
        expect = {(0, 0), (1, 0), (0, 1), (0.5, 0.5), (0, 0.5), (0.5, 0)}
        got = {tuple(round(v, 12) for v in row) for row in flat}
        assert got == expect


class TestConeVertexOrder:
    def test_vertex_opposite_cone_member(self):
        ref = reference_cell("triangle")
        plex = ref.plex
        cell = plex.cells()[0]
        order = cone_vertex_order(plex, cell)
        for i, e in enumerate(plex.cones[cell]):
            assert order[i] not in plex.cones[e]

    def test_tet_faces(self):
        ref = reference_cell("tetrahedron")
        plex = ref.plex
        cell = plex.cells()[0]
        order = cone_vertex_order(plex, cell)
        assert len(set(order)) == 4
        for i, fpt in enumerate(plex.cones[cell]):
            face_verts = {v for e in plex.cones[fpt] for v in plex.cones[e]}
            assert order[i] not in face_verts


def interpolant_eval_oracle(plex, coords, el, values, loc_dof, loc_off, cell, pts):
    """Evaluate the interpolant on one cell by an independent route: fit the
    monomial basis of total degree <= k to the cell's own node values."""
    from nmck.plex import plex_closure

    dim = coords.shape[1]
    nodes = []
    vals = []
    for p in plex_closure(plex, cell):
        if loc_dof[p] == 0:
            continue
        chunk = entity_node_coords(plex, coords, p, el)
        for k, x in enumerate(chunk):
            nodes.append(x)
            vals.append(values[loc_off[p] + k])
    nodes = np.array(nodes)
    exps = [
        e
        for e in itertools.product(range(el.degree + 1), repeat=dim)
        if sum(e) <= el.degree
    ]
    vmat = np.array([[np.prod(x ** np.array(e)) for e in exps] for x in nodes])
    coeff = np.linalg.solve(vmat, np.array(vals))
    out = []
    for x in pts:
        out.append(sum(c * np.prod(x ** np.array(e)) for c, e in zip(coeff, exps)))
    return np.array(out)


class TestInterpolate:
    def build(self, spec, el):
        plex, coords = gen_mesh(spec)
        ls = build_local_section([plex], el.dofs_per_dim(plex.dim))
        return plex, coords, ls

    def test_constant_one_is_all_ones(self):
        for k in (1, 2, 3, 4):
            el = LagrangeElement("P", k)
            plex, coords, ls = self.build(MeshSpec("unit-square", 2), el)
            vec = interpolate(plex, coords, ls.loc_dof[0], ls.loc_off[0], el, lambda x: 1.0)
            assert np.all(vec == 1.0)

    def test_p1_reproduces_vertex_coordinates(self):
        el = LagrangeElement("P", 1)
        plex, coords, ls = self.build(MeshSpec("unit-square", 3), el)
        vec = interpolate(plex, coords, ls.loc_dof[0], ls.loc_off[0], el, lambda x: x[0])
        for row, v in enumerate(plex.vertices()):
            assert vec[ls.loc_off[0][v]] == coords[row][0]

    @pytest.mark.parametrize("family,degree", [("P", 2), ("P", 3), ("P", 4), ("DP", 2)])
    def test_polynomial_exactness(self, family, degree):
        el = LagrangeElement(family, degree)
        plex, coords, ls = self.build(MeshSpec("unit-square", 2), el)

        def f(x):
            return (
                0.3 * x[0] ** min(degree, 4)
                + 1.7 * x[1] ** max(degree - 1, 0) * x[0]
                - 2.0 * x[1]
                + 0.5
            )

        vec = interpolate(plex, coords, ls.loc_dof[0], ls.loc_off[0], el, f)
        rng = random.Random(29)
        for cell in plex.cells()[:4]:
            order = cone_vertex_order(plex, cell)
            vrow = {v: i for i, v in enumerate(plex.vertices())}
            xs = np.array([coords[vrow[v]] for v in order])
            pts = []
            for _ in range(3):
                w = np.array([rng.random() for _ in range(3)])
                w /= w.sum()
                pts.append(w @ xs)
            got = interpolant_eval_oracle(
                plex, coords, el, vec, ls.loc_dof[0], ls.loc_off[0], cell, pts
            )
            expect = np.array([f(x) for x in pts])
            assert np.allclose(got, expect, rtol=1e-12, atol=1e-12)

    def test_shared_entity_chunks_identical(self):
        mesh = two_rank_mesh()
        coords = two_rank_coords()
        el = LagrangeElement("P", 4)
        ls = build_local_section(mesh.plexes, el.dofs_per_dim(2))

        def f(x):
            return x[0] ** 4 - 3.0 * x[0] ** 2 * x[1] + x[1] ** 4

        vecs = [
            interpolate(mesh.plexes[r], coords[r], ls.loc_dof[r], ls.loc_off[r], el, f)
            for r in range(2)
        ]
        for r in range(2):
            for i, (r2, j) in mesh.point_sf.leaves[r]:
                nd = ls.loc_dof[r][i]
                assert nd == ls.loc_dof[r2][j]
                a = vecs[r][ls.loc_off[r][i]:ls.loc_off[r][i] + nd]
                b = vecs[r2][ls.loc_off[r2][j]:ls.loc_off[r2][j] + nd]
                assert np.array_equal(a, b), (r, i)

    def test_interval_and_cube(self):
        el = LagrangeElement("P", 2)
        for shape, res in (("interval", 4), ("unit-cube", 1)):
            plex, coords, ls = self.build(MeshSpec(shape, res), el)
            vec = interpolate(
                plex, coords, ls.loc_dof[0], ls.loc_off[0], el,
                lambda x: sum(2.0 * x[i] for i in range(len(x))),
            )
            assert np.all(np.isfinite(vec))

    def test_three_cell_mesh_p4(self):
        from fixtures_threecell import SERIAL_COORDS

        plex = serial_mesh()
        el = LagrangeElement("P", 4)
        ls = build_local_section([plex], el.dofs_per_dim(2))
        vec = interpolate(
            plex, SERIAL_COORDS, ls.loc_dof[0], ls.loc_off[0], el, lambda x: x[1]
        )
        assert len(vec) == 35
        # vertex DoFs carry the vertex y-coordinates
        for row, v in enumerate(plex.vertices()):
            assert vec[ls.loc_off[0][v]] == SERIAL_COORDS[row][1]
