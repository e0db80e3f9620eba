import math
import warnings

import numpy as np
import pytest

from osc_engine.basis import ModeTruncation
from osc_engine.config import CouplingSpec, EngineConfig, canonical_config
from osc_engine.coupling import (
    MatrixCacheError,
    assemble_matrix,
    assemble_or_load,
    element_oracle_2d,
    element_parallel,
    element_perpendicular,
    load_matrix,
    matrix_cache_key,
    oracle_table_2d,
    phi_gamma_gaussian,
    save_matrix,
    sigma_kernel,
    xi,
)
from osc_engine.coupling import _sigma_closed_form, _sigma_quadrature
from osc_engine.specfun import cached_rule, gauss_hermite_rule

PAR = CouplingSpec("parallel", -10.0, 0.5)
PERP = CouplingSpec("perpendicular", -10.0, 0.5)


class TestPhiGamma:
    def test_zero_frequency_value(self):
        assert phi_gamma_gaussian(0.0, PAR) == pytest.approx(-5 / math.sqrt(2 * math.pi), rel=1e-14)

    def test_zero_amplitude(self):
        spec = CouplingSpec("parallel", 0.0, 0.5)
        for g in (0.0, 1.0, -3.0):
            assert phi_gamma_gaussian(g, spec) == 0.0

    def test_integral_recovers_phi0(self):
        # integral of Phi_gamma over gamma equals Phi(0) = Phi0
        rule = cached_rule(32)
        scale = PAR.sigma / math.sqrt(2.0)
        total = float(np.sum(rule.scaled_weights * phi_gamma_gaussian(rule.nodes / scale, PAR) / scale))
        assert total == pytest.approx(PAR.phi0, rel=1e-13)

    def test_wrong_geometry(self):
        with pytest.raises(ValueError):
            phi_gamma_gaussian(0.0, PERP)


def _xi_numeric(g, u, j):
    # direct trapezoid integration of psi_u psi_j e^{-i g y}
    from osc_engine.specfun import hermite_functions

    y = np.linspace(-12, 12, 4001)
    h = hermite_functions(max(u, j), y)
    integrand = h[u] * h[j] * np.exp(-1j * g * y)
    return np.trapezoid(integrand, y)


class TestXi:
    def test_ground_pair(self):
        for g in (0.3, 1.0, 2.5):
            assert xi(g, 0, 0) == pytest.approx(math.exp(-g * g / 4), rel=1e-13)

    def test_zero_argument_is_kronecker(self):
        for u in range(5):
            for j in range(5):
                expected = 1.0 if u == j else 0.0
                assert xi(0.0, u, j) == pytest.approx(expected, abs=1e-15)

    def test_first_excited(self):
        for g in (0.5, 1.7):
            expected = -1j * (g / math.sqrt(2)) * math.exp(-g * g / 4)
            assert xi(g, 1, 0) == pytest.approx(expected, rel=1e-13)

    def test_symmetric_in_levels(self):
        for g in (0.9, -1.3):
            for u, j in ((2, 5), (0, 3), (4, 4)):
                assert xi(g, u, j) == xi(g, j, u)

    @pytest.mark.parametrize("u,j", [(0, 0), (1, 0), (2, 2), (5, 1), (7, 6), (10, 4)])
    def test_against_numeric_integral(self, u, j):
        for g in (0.4, 1.6, -2.2):
            assert xi(g, u, j) == pytest.approx(_xi_numeric(g, u, j), abs=1e-10)

    def test_negative_level(self):
        with pytest.raises(ValueError):
            xi(1.0, -1, 0)


class TestSigmaKernel:
    def test_ground_pair(self):
        for a in (0.5, 2.0, 7.0):
            assert sigma_kernel(a, 0, 0) == pytest.approx((1 + a) ** -0.5, rel=1e-13)

    def test_first_excited_pair(self):
        for a in (0.5, 2.0, 7.0):
            assert sigma_kernel(a, 1, 1) == pytest.approx((1 + a) ** -1.5, rel=1e-13)

    def test_cross_term(self):
        assert sigma_kernel(2.0, 2, 0) == pytest.approx(-math.sqrt(2) * 3**-1.5, rel=1e-12)

    def test_odd_sum_exactly_zero(self):
        for u, j in ((1, 0), (2, 1), (5, 0), (30, 25)):
            assert sigma_kernel(2.0, u, j) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            sigma_kernel(0.0, 0, 0)
        with pytest.raises(ValueError):
            sigma_kernel(-1.0, 0, 0)
        with pytest.raises(ValueError):
            sigma_kernel(1.0, -2, 0)

    def test_closed_form_agrees_with_quadrature(self):
        # overlap region of the two evaluation paths
        for a in (0.5, 2.0, 8.0):
            for u in range(0, 21, 4):
                for j in range(u % 2, 21, 2):
                    if (u + j) % 2:
                        continue
                    cf = _sigma_closed_form(a, u, j)
                    qd = _sigma_quadrature(a, u, j)
                    assert cf == pytest.approx(qd, abs=1e-8)

    def test_high_order_uses_quadrature_and_matches_oracle(self):
        # orders above the closed-form cutoff still match the 2D oracle
        spec = CouplingSpec("perpendicular", -10.0, 0.5)
        got = element_perpendicular(24, 0, 22, 0, spec, 1.0)
        want = element_oracle_2d(24, 0, 22, 0, spec, 1.0, grid_points=1201)
        assert got == pytest.approx(want, abs=1e-8)


class TestElementParallel:
    def test_canonical_ground(self):
        assert element_parallel(0, 0, 0, 0, PAR, 1.0) == pytest.approx(-2 * math.sqrt(5), abs=1e-12)

    def test_odd_parity_zero(self):
        assert element_parallel(1, 0, 0, 0, PAR, 1.0) == 0.0
        assert element_parallel(2, 1, 0, 0, PAR, 1.0) == 0.0

    def test_first_excited_pair(self):
        expected = PAR.phi0 * PAR.sigma / (2 * (1 + PAR.sigma**2) ** 1.5)
        assert element_parallel(1, 1, 0, 0, PAR, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_insufficient_nodes(self):
        rule = gauss_hermite_rule(4)
        with pytest.raises(ValueError):
            element_parallel(10, 10, 10, 10, PAR, 1.0, rule=rule)

    def test_wrong_geometry(self):
        with pytest.raises(ValueError):
            element_parallel(0, 0, 0, 0, PERP, 1.0)


class TestElementPerpendicular:
    def test_canonical_ground(self):
        assert element_perpendicular(0, 0, 0, 0, PERP, 1.0) == pytest.approx(-10 / 3, rel=1e-13)

    def test_odd_parity_zero(self):
        assert element_perpendicular(1, 0, 0, 0, PERP, 1.0) == 0.0
        assert element_perpendicular(0, 3, 0, 0, PERP, 1.0) == 0.0

    def test_two_zero_pair(self):
        expected = -10 * (-math.sqrt(2) * 3**-1.5) * 3**-0.5
        assert element_perpendicular(2, 0, 0, 0, PERP, 1.0) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(1.571348, abs=1e-6)

    def test_wrong_geometry(self):
        with pytest.raises(ValueError):
            element_perpendicular(0, 0, 0, 0, PAR, 1.0)


class TestOracleAgreement:
    @pytest.mark.parametrize("geometry", ["parallel", "perpendicular"])
    def test_elements_match_oracle_small_sweep(self, geometry):
        spec = CouplingSpec(geometry, -10.0, 0.5)
        table = oracle_table_2d(7, spec, 1.0)
        for u in range(7):
            for v in range(7):
                for j in range(7):
                    for k in range(7):
                        if geometry == "parallel":
                            got = element_parallel(u, v, j, k, spec, 1.0)
                        else:
                            got = element_perpendicular(u, v, j, k, spec, 1.0)
                        assert got == pytest.approx(table[u, v, j, k], abs=1e-8)

    @pytest.mark.parametrize("geometry", ["parallel", "perpendicular"])
    def test_unequal_length_ratio(self, geometry):
        spec = CouplingSpec(geometry, -4.0, 0.8)
        lam = 1.3
        for u, v, j, k in [(0, 0, 0, 0), (2, 1, 0, 1), (3, 3, 1, 1), (4, 0, 2, 2)]:
            if geometry == "parallel":
                got = element_parallel(u, v, j, k, spec, lam)
            else:
                got = element_perpendicular(u, v, j, k, spec, lam)
            want = element_oracle_2d(u, v, j, k, spec, lam)
            assert got == pytest.approx(want, abs=1e-10)

    def test_oracle_zero_amplitude(self):
        spec = CouplingSpec("parallel", 0.0, 0.5)
        assert element_oracle_2d(1, 1, 1, 1, spec, 1.0) == 0.0


class TestAssembly:
    def test_zero_amplitude_gives_zero_matrix(self):
        cfg = EngineConfig(truncation=ModeTruncation(3), coupling=CouplingSpec("parallel", 0.0, 0.5))
        phi = assemble_matrix(cfg)
        assert np.all(phi.values == 0.0)

    def test_canonical_corner_element(self):
        cfg = canonical_config("parallel", n_max=6)
        phi = assemble_matrix(cfg)
        assert phi.values[0, 0] == pytest.approx(-2 * math.sqrt(5), abs=1e-12)

    @pytest.mark.parametrize("geometry", ["parallel", "perpendicular"])
    def test_small_truncation_matches_oracle(self, geometry):
        cfg = canonical_config(geometry, n_max=1)
        phi = assemble_matrix(cfg)
        oracle = oracle_table_2d(2, cfg.coupling, cfg.lam).reshape(4, 4)
        assert np.abs(phi.values - oracle).max() < 1e-10

    @pytest.mark.parametrize("geometry", ["parallel", "perpendicular"])
    def test_exact_symmetry_and_parity_zeros(self, geometry):
        cfg = canonical_config(geometry, n_max=9)
        phi = assemble_matrix(cfg)
        assert np.array_equal(phi.values, phi.values.T)
        dim = cfg.truncation.dim
        vals = phi.values.reshape(dim, dim, dim, dim)
        for u in range(dim):
            for v in range(dim):
                for j in range(dim):
                    for k in range(dim):
                        if geometry == "parallel":
                            forbidden = ((u - j) + (v - k)) % 2 == 1
                        else:
                            forbidden = (u + j) % 2 == 1 or (v + k) % 2 == 1
                        if forbidden:
                            assert vals[u, v, j, k] == 0.0

    def test_backends_agree(self):
        cfg = canonical_config("parallel", n_max=14)
        a = assemble_matrix(cfg, backend="numpy")
        b = assemble_matrix(cfg, backend="numba")
        assert np.abs(a.values - b.values).max() < 1e-13

    def test_diagonal_bound_both_geometries(self):
        # |<j,k|Phi|j,k>| never exceeds the ground value (the rigorous claim)
        for geometry in ("parallel", "perpendicular"):
            cfg = canonical_config(geometry, n_max=20)
            phi = assemble_matrix(cfg)
            dim = cfg.truncation.dim
            diag = np.abs(phi.values.diagonal().reshape(dim, dim))
            assert np.all(diag <= diag[0, 0] + 1e-12)

    def test_diagonal_structure(self):
        # per-index monotonicity holds for the perpendicular product kernel and
        # along the correlated (j,j) diagonal of the parallel matrix, but NOT
        # per row/column of the parallel matrix: <1,1|Phi|1,1> is deeper than
        # <0,1|Phi|0,1> (exact integrals; see the acceptance suite and the
        # decisions ledger for the corresponding red criterion)
        cfg = canonical_config("perpendicular", n_max=20)
        diag = np.abs(assemble_matrix(cfg).values.diagonal().reshape(21, 21))
        assert np.all(np.diff(diag, axis=0) <= 1e-12)
        assert np.all(np.diff(diag, axis=1) <= 1e-12)

        cfg = canonical_config("parallel", n_max=20)
        diag = np.abs(assemble_matrix(cfg).values.diagonal().reshape(21, 21))
        corr = np.diag(diag)
        assert np.all(np.diff(corr) <= 1e-12)
        assert diag[1, 1] > diag[0, 1]  # the documented monotonicity violation


class TestCache:
    def test_roundtrip_exact(self, tmp_path):
        cfg = canonical_config("parallel", n_max=5)
        phi = assemble_matrix(cfg)
        path = tmp_path / "m.phim"
        save_matrix(phi, path)
        loaded = load_matrix(path, cfg)
        assert np.array_equal(loaded.values, phi.values)
        assert (tmp_path / "m.phim.json").exists()

    def test_key_depends_on_physics(self):
        base = canonical_config("parallel", n_max=5)
        assert matrix_cache_key(base) == matrix_cache_key(canonical_config("parallel", n_max=5))
        assert matrix_cache_key(base) != matrix_cache_key(canonical_config("perpendicular", n_max=5))
        assert matrix_cache_key(base) != matrix_cache_key(canonical_config("parallel", n_max=6))
        bumped = EngineConfig(
            truncation=ModeTruncation(5), coupling=CouplingSpec("parallel", -10.0, 0.51)
        )
        assert matrix_cache_key(base) != matrix_cache_key(bumped)

    def test_mismatched_config_rejected(self, tmp_path):
        cfg = canonical_config("parallel", n_max=5)
        phi = assemble_matrix(cfg)
        path = tmp_path / "m.phim"
        save_matrix(phi, path)
        other = canonical_config("parallel", n_max=6)
        with pytest.raises(MatrixCacheError):
            load_matrix(path, other)

    def test_cache_hit_and_corruption_recovery(self, tmp_path):
        cfg = canonical_config("perpendicular", n_max=4)
        phi1, info1 = assemble_or_load(cfg, cache_dir=tmp_path)
        assert info1["hit"] is False
        phi2, info2 = assemble_or_load(cfg, cache_dir=tmp_path)
        assert info2["hit"] is True
        assert np.array_equal(phi1.values, phi2.values)
        # corrupt the file: recompute with a warning
        path = tmp_path / f"{info1['key']}.phim"
        path.write_bytes(b"PHIMgarbage")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            phi3, info3 = assemble_or_load(cfg, cache_dir=tmp_path)
        assert info3["hit"] is False
        assert any("cache" in str(w.message) for w in caught)
        assert np.array_equal(phi3.values, phi1.values)
        # the corrupt file was replaced by a good one
        _, info4 = assemble_or_load(cfg, cache_dir=tmp_path)
        assert info4["hit"] is True

    def test_no_cache_bypasses_disk(self, tmp_path):
        cfg = canonical_config("parallel", n_max=3)
        _, info = assemble_or_load(cfg, cache_dir=tmp_path, use_cache=False)
        assert info["hit"] is False
        assert not (tmp_path / f"{info['key']}.phim").exists()
