import chz
import numpy as np
import pytest

from becprobe.condensate import (
    BasisConfig,
    GridConfig,
    TrapConfig,
    analytic_reference,
    build_basis,
    export_modes,
    export_spectrum,
    max_safe_modes,
    number_dephasing_rate,
    solve_bdg,
    solve_ground_state,
)
from becprobe.errors import GridResolutionError
from becprobe.storage.tables import read_csv


def _strong_trap() -> TrapConfig:
    return TrapConfig(interaction=200.0, grid=GridConfig(n_points=256, half_width=12.0))


def test_noninteracting_modes_are_hermite_gauss(ideal_trap) -> None:
    mf = solve_ground_state(ideal_trap)
    basis = solve_bdg(mf, ideal_trap, 5)

    assert basis.labels == (1, 2, 3, 4, 5)
    assert not basis.includes_zero_mode
    np.testing.assert_allclose(basis.frequencies, [1, 2, 3, 4, 5], atol=1e-6)
    for row, j in enumerate(basis.labels):
        omega, f_plus, f_minus = analytic_reference("noninteracting", j, mf.grid)
        assert omega == j
        np.testing.assert_allclose(basis.f_plus[row], f_plus, atol=1e-5)
        np.testing.assert_allclose(basis.f_minus[row], f_minus, atol=1e-5)


def test_modes_are_biorthonormal(small_trap) -> None:
    basis = build_basis(small_trap, BasisConfig(modes=6, number_conserving=True))
    np.testing.assert_allclose(basis.overlap(), 0.5 * np.eye(6), atol=1e-8)
    assert np.all(np.diff(basis.frequencies) > 0)


def test_kohn_mode_and_thomas_fermi_spectrum() -> None:
    trap = _strong_trap()
    basis = solve_bdg(solve_ground_state(trap), trap, 3)

    # the dipole mode sits at the trap frequency for any interaction
    assert basis.frequencies[0] == pytest.approx(1.0, abs=1e-5)
    for row, j in enumerate(basis.labels):
        omega, _, _ = analytic_reference("thomas_fermi", j, trap.grid.build(), trap=trap)
        assert basis.frequencies[row] == pytest.approx(omega, rel=5e-2)


def test_reduced_and_dense_solvers_agree(small_trap) -> None:
    mf = solve_ground_state(small_trap)
    reduced = solve_bdg(mf, small_trap, 4, method="reduced")
    dense = solve_bdg(mf, small_trap, 4, method="dense")

    np.testing.assert_allclose(reduced.frequencies, dense.frequencies, rtol=1e-8)
    np.testing.assert_allclose(reduced.f_plus, dense.f_plus, atol=1e-6)
    np.testing.assert_allclose(reduced.f_minus, dense.f_minus, atol=1e-6)


def test_zero_mode_is_prepended_unless_number_conserving(small_trap) -> None:
    full = build_basis(small_trap, BasisConfig(modes=3))
    conserving = build_basis(small_trap, BasisConfig(modes=3, number_conserving=True))

    assert full.labels == (0, 1, 2, 3)
    assert full.J == 3
    assert full.n_modes == 4
    assert full.omega0 == pytest.approx(number_dephasing_rate(small_trap), rel=1e-10)
    np.testing.assert_allclose(full.overlap(), 0.5 * np.eye(4), atol=1e-4)
    np.testing.assert_allclose(full.without_zero_mode().frequencies, conserving.frequencies)

    assert full.index(0) == 0
    assert full.index(2) == 2
    assert conserving.index(2) == 1
    with pytest.raises(IndexError, match="not in the basis"):
        conserving.index(0)
    with pytest.raises(ValueError, match="zero mode"):
        _ = conserving.omega0


def test_truncated_keeps_the_lowest_modes(small_trap) -> None:
    basis = build_basis(small_trap, BasisConfig(modes=4))
    low = basis.truncated(2)
    assert low.labels == (0, 1, 2)
    np.testing.assert_array_equal(low.frequencies, basis.frequencies[:3])


def test_max_safe_modes_limits_the_basis(small_trap) -> None:
    mf = solve_ground_state(small_trap)
    limit = max_safe_modes(mf.grid)
    assert 20 < limit < 40

    issues = dict(BasisConfig(modes=60).validate(small_trap))
    assert "not resolvable" in issues["modes"]
    assert BasisConfig(modes=limit).validate(small_trap) == []
    with pytest.raises(GridResolutionError) as exc:
        solve_bdg(mf, small_trap, 60)
    assert exc.value.max_safe_modes == limit


def test_default_grid_resolves_sixty_modes() -> None:
    assert max_safe_modes(GridConfig().build()) >= 60
    assert BasisConfig(modes=60).validate(TrapConfig()) == []
    coarse = TrapConfig(grid=GridConfig(n_points=256))
    assert "not resolvable" in dict(BasisConfig(modes=60).validate(coarse))["modes"]


def test_high_modes_are_nearly_commensurate_with_low_ones() -> None:
    trap = TrapConfig()
    mf = solve_ground_state(trap)
    basis = solve_bdg(mf, trap, 25)
    omega = dict(zip(basis.labels, basis.frequencies))

    assert mf.mu == pytest.approx(2.0, rel=1e-2)
    assert omega[20] / omega[1] == pytest.approx(19.0005, abs=0.02)
    assert omega[25] / omega[3] == pytest.approx(8.9971, abs=0.01)


def test_spectrum_is_stable_under_grid_refinement(small_trap) -> None:
    refined = chz.replace(small_trap, grid=chz.replace(small_trap.grid, n_points=511))
    coarse = solve_bdg(solve_ground_state(small_trap), small_trap, 8)
    fine = solve_bdg(solve_ground_state(refined), refined, 8)

    np.testing.assert_allclose(fine.frequencies[:4], coarse.frequencies[:4], rtol=1e-5)


def test_basis_config_rejects_bad_fields(small_trap) -> None:
    issues = dict(BasisConfig(modes=0, method="qr").validate(small_trap))  # type: ignore[arg-type]
    assert set(issues) == {"modes", "method"}


def test_analytic_reference_arguments(small_trap) -> None:
    grid = small_trap.grid.build()
    with pytest.raises(ValueError, match="non-negative"):
        analytic_reference("noninteracting", -1, grid)
    with pytest.raises(ValueError, match="needs the trap"):
        analytic_reference("thomas_fermi", 1, grid)
    with pytest.raises(ValueError, match="tabulated"):
        analytic_reference("thomas_fermi", 11, grid, trap=small_trap)


def test_export_spectrum_and_modes(small_trap, tmp_path) -> None:
    basis = build_basis(small_trap, BasisConfig(modes=2))
    spectrum = read_csv(export_spectrum(basis, tmp_path))
    modes = read_csv(export_modes(basis, tmp_path))

    np.testing.assert_array_equal(spectrum["j"], [0, 1, 2])
    np.testing.assert_allclose(spectrum["omega_j"], basis.frequencies, rtol=1e-9)
    assert set(modes) == {"x", "f_plus_0", "f_minus_0", "f_plus_1", "f_minus_1", "f_plus_2", "f_minus_2"}
