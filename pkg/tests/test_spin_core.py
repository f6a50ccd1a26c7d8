import numpy as np
import pytest

from triplaq.errors import ConfigError, ContractViolationError, NormalizationError
from triplaq.spin_core import (
    SINGLE_EXCITATION_INDICES,
    BondKind,
    BondSpec,
    PlaquetteGeometry,
    build_hamiltonian,
    default_plaquette,
    embed_single_excitation,
    format_geometry_text,
    initial_bell_state,
    parse_geometry_text,
    sector_leak,
    single_excitation_block,
    spin_operator_at,
    swapped_control_plaquette,
    total_sz,
)


def basis_vector(index):
    e = np.zeros(16, dtype=complex)
    e[index] = 1.0
    return e


class TestSpinOperators:
    def test_sz_on_up_spin(self):
        # site 1 is the most significant bit: |1000> = index 8
        out = spin_operator_at(1, "z") @ basis_vector(8)
        np.testing.assert_allclose(out, 0.5 * basis_vector(8), atol=1e-15)

    def test_sz_on_down_spin(self):
        out = spin_operator_at(3, "z") @ basis_vector(8)
        np.testing.assert_allclose(out, -0.5 * basis_vector(8), atol=1e-15)

    def test_sx_flips_one_spin(self):
        out = spin_operator_at(2, "x") @ basis_vector(0)
        np.testing.assert_allclose(out, 0.5 * basis_vector(4), atol=1e-15)

    @pytest.mark.parametrize("site", [0, 5, -1])
    def test_site_out_of_range(self, site):
        with pytest.raises(ValueError):
            spin_operator_at(site, "z")

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            spin_operator_at(1, "q")

    def test_su2_commutator(self):
        # [Sx, Sy] = i Sz on every site
        for site in range(1, 5):
            sx, sy, sz = (spin_operator_at(site, ax) for ax in "xyz")
            np.testing.assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-15)


class TestGeometry:
    def test_default_pattern(self):
        geom = default_plaquette(J=0.7)
        dm_pairs = {(b.from_site, b.to_site) for b in geom.dm_bonds()}
        heis_pairs = {b.unordered_pair for b in geom.heisenberg_bonds()}
        assert dm_pairs == {(1, 2), (2, 3), (3, 4), (4, 1)}
        assert heis_pairs == {(1, 3), (2, 4)}

    def test_empty_bond_list_rejected(self):
        with pytest.raises(ConfigError):
            PlaquetteGeometry(())

    def test_duplicate_bond_rejected(self):
        bonds = (BondSpec(BondKind.DM_Z, 1, 2), BondSpec(BondKind.DM_Z, 2, 1))
        with pytest.raises(ConfigError, match="duplicate"):
            PlaquetteGeometry(bonds)

    def test_same_pair_different_kind_allowed(self):
        bonds = (BondSpec(BondKind.DM_Z, 1, 2),
                 BondSpec(BondKind.HEISENBERG_ISO, 1, 2))
        PlaquetteGeometry(bonds)

    def test_nonpositive_d_rejected(self):
        with pytest.raises(ConfigError):
            default_plaquette(J=0.0, D=0.0)

    def test_bond_site_validation(self):
        with pytest.raises(ValueError):
            BondSpec(BondKind.DM_Z, 1, 1)
        with pytest.raises(ValueError):
            BondSpec(BondKind.DM_Z, 0, 2)

    def test_with_couplings_keeps_pattern(self):
        geom = default_plaquette(J=0.2).with_couplings(J=1.5, D=2.0)
        assert geom.J == 1.5 and geom.D == 2.0
        assert geom.bonds == default_plaquette(J=0.2).bonds


class TestHamiltonian:
    def test_hermitian_and_sector_conserving(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            bonds, seen = [], set()
            for _ in range(rng.integers(1, 7)):
                kind = rng.choice([BondKind.DM_Z, BondKind.HEISENBERG_ISO])
                i, j = rng.choice(range(1, 5), size=2, replace=False)
                key = (kind, tuple(sorted((int(i), int(j)))))
                if key in seen:
                    continue
                seen.add(key)
                bonds.append(BondSpec(kind, int(i), int(j),
                                      float(rng.uniform(-2, 2))))
            if not bonds:
                continue
            geom = PlaquetteGeometry(tuple(bonds), D=float(rng.uniform(0.1, 3)),
                                     J=float(rng.uniform(-2, 2)))
            H = build_hamiltonian(geom)
            assert np.abs(H - H.conj().T).max() == 0.0
            sz = total_sz()
            assert np.abs(H @ sz - sz @ H).max() < 1e-12

    def test_heisenberg_leg_matrix_element(self):
        # <1000|H|0010> couples excitations on sites 1 and 3 through
        # the diagonal bond: value J/2
        H = build_hamiltonian(default_plaquette(J=0.6))
        assert H[8, 2] == pytest.approx(0.3, abs=1e-15)

    def test_single_excitation_spectrum_ring_only(self):
        H = build_hamiltonian(default_plaquette(J=0.0, D=1.0))
        block = single_excitation_block(H)
        np.testing.assert_allclose(np.linalg.eigvalsh(block), [-1, 0, 0, 1],
                                   atol=1e-14)

    def test_block_structure_dm_only(self):
        block = single_excitation_block(build_hamiltonian(default_plaquette(J=0.0)))
        assert np.abs(np.diag(block)).max() == 0.0
        expected = np.zeros((4, 4), dtype=complex)
        for k in range(4):
            expected[(k + 1) % 4, k] = 0.5j
            expected[k, (k + 1) % 4] = -0.5j
        np.testing.assert_allclose(block, expected, atol=1e-15)

    def test_block_structure_heisenberg_only(self):
        geom = PlaquetteGeometry(
            tuple(BondSpec(BondKind.HEISENBERG_ISO, i, j) for i, j in ((1, 3), (2, 4))),
            D=1.0, J=1.0)
        block = single_excitation_block(build_hamiltonian(geom))
        # the two diagonal ZZ contributions cancel in every single-excitation state
        assert np.abs(np.diag(block)).max() < 1e-15
        expected = np.zeros((4, 4))
        for a, b in ((0, 2), (1, 3)):  # slots of (site4,site2) and (site3,site1)
            expected[a, b] = expected[b, a] = 0.5
        np.testing.assert_allclose(block, expected, atol=1e-15)

    def test_block_linear_in_couplings(self):
        d, j = 1.7, -0.8
        blk = single_excitation_block(build_hamiltonian(default_plaquette(J=j, D=d)))
        blk_d = single_excitation_block(build_hamiltonian(default_plaquette(J=0.0, D=1.0)))
        geom_j = PlaquetteGeometry(default_plaquette(J=1.0).bonds, D=1.0, J=1.0)
        blk_j = single_excitation_block(build_hamiltonian(geom_j)) - blk_d
        np.testing.assert_allclose(blk, d * blk_d + j * blk_j, atol=1e-14)

    def test_zero_hamiltonian_block(self):
        assert np.abs(single_excitation_block(np.zeros((16, 16)))).max() == 0.0

    def test_block_rejects_sector_breaking_matrix(self):
        H = np.zeros((16, 16), dtype=complex)
        H[0, 1] = H[1, 0] = 1.0  # couples 0-excitation to 1-excitation
        with pytest.raises(ContractViolationError):
            single_excitation_block(H)

    def test_reversing_dm_bonds_negates_dm_part(self):
        forward = default_plaquette(J=0.0, D=1.3)
        rev = PlaquetteGeometry(tuple(b.reversed() for b in forward.bonds),
                                D=1.3, J=0.0)
        np.testing.assert_allclose(build_hamiltonian(rev),
                                   -build_hamiltonian(forward), atol=1e-15)

    def test_swapped_control_differs(self):
        a = build_hamiltonian(default_plaquette(J=0.5))
        b = build_hamiltonian(swapped_control_plaquette(J=0.5))
        assert np.abs(a - b).max() > 0.3


class TestEmbedding:
    def test_initial_state(self):
        psi = initial_bell_state()
        r = 1 / np.sqrt(2)
        assert psi[4] == pytest.approx(r) and psi[8] == pytest.approx(r)
        assert np.abs(np.delete(psi, [4, 8])).max() == 0.0

    def test_single_basis_state(self):
        psi = embed_single_excitation((1, 0, 0, 0))
        np.testing.assert_allclose(psi, basis_vector(1), atol=1e-15)

    def test_w_state(self):
        psi = embed_single_excitation((0.5, 0.5, 0.5, 0.5))
        assert all(psi[i] == 0.5 for i in SINGLE_EXCITATION_INDICES)
        assert sector_leak(psi) == 0.0

    def test_unnormalized_rejected(self):
        with pytest.raises(NormalizationError, match="norm"):
            embed_single_excitation((1.0, 1.0, 0.0, 0.0))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            embed_single_excitation((1.0, 0.0))


class TestGeometryText:
    def test_round_trip(self):
        geom = default_plaquette(J=0.25, D=1.5)
        parsed = parse_geometry_text(format_geometry_text(geom), D=1.5, J=0.25)
        assert parsed.bonds == geom.bonds

    def test_parse_with_comments(self):
        text = """
        # ring
        dm_z 1 2 1.0
        heisenberg_iso 1 3 1.0  # leg
        """
        geom = parse_geometry_text(text)
        assert len(geom.bonds) == 2

    def test_bad_kind_reports_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_geometry_text("dm_z 1 2 1.0\nnonsense 1 2 1.0\n")

    def test_bad_field_count_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_geometry_text("dm_z 1 2\n")

    def test_empty_file_rejected(self):
        with pytest.raises(ConfigError):
            parse_geometry_text("# nothing here\n")
