import numpy as np
import pytest

from lognls.gausson import analytic_constants
from lognls.linearized import (apply_op, build_L, coercivity, s2_form,
                               sample_R, sample_dR, spectrum)

M1 = analytic_constants(1)["m"]


@pytest.fixture(scope="module")
def Lp():
    return build_L("plus", 1)


@pytest.fixture(scope="module")
def Lm():
    return build_L("minus", 1)


class TestBuildL:
    def test_symmetry(self, Lp, Lm):
        for op in (Lp, Lm):
            scale = np.max(np.abs(op.matrix))
            assert np.max(np.abs(op.matrix - op.matrix.T)) < 1e-12 * scale

    def test_Lminus_annihilates_R(self, Lm):
        R = sample_R(Lm)
        norm = np.linalg.norm(R)
        assert np.linalg.norm(apply_op(Lm, R)) < 1e-6 * norm

    def test_Lplus_eigen_minus_two_on_R(self, Lp):
        R = sample_R(Lp)
        resid = apply_op(Lp, R) - (-2.0) * R
        assert np.linalg.norm(resid) < 1e-6 * np.linalg.norm(R)

    def test_Lplus_kernel_contains_dR(self, Lp):
        dR = sample_dR(Lp)
        assert np.linalg.norm(apply_op(Lp, dR)) < 1e-6 * np.linalg.norm(dR)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            build_L("zero", 1)
        with pytest.raises(ValueError):
            build_L("plus", 3)
        with pytest.raises(ValueError):
            build_L("plus", 2, basis="finite_difference_1d")
        with pytest.raises(ValueError):
            build_L("plus", 1, basis="hermite_tensor")


class TestSpectrum:
    def test_Lplus_lowest_four(self, Lp):
        rep = spectrum(Lp, 4)
        assert np.max(np.abs(rep.eigenvalues - np.array([-2.0, 0.0, 2.0, 4.0]))) < 1e-4

    def test_Lminus_lowest_three(self, Lm):
        rep = spectrum(Lm, 3)
        assert np.max(np.abs(rep.eigenvalues - np.array([0.0, 2.0, 4.0]))) < 1e-4

    def test_exactly_one_negative_eigenvalue(self, Lp):
        rep = spectrum(Lp, 8)
        assert np.sum(rep.eigenvalues < -1e-3) == 1

    def test_kernel_multiplicity_is_N_1d(self, Lp):
        rep = spectrum(Lp, 8)
        assert np.sum(np.abs(rep.eigenvalues) < 1e-3) == 1

    def test_kernel_multiplicity_is_N_2d(self):
        rep = spectrum(build_L("plus", 2, basis="hermite_tensor"), 8)
        assert np.sum(np.abs(rep.eigenvalues) < 1e-3) == 2
        assert np.sum(rep.eigenvalues < -1e-3) == 1

    def test_tensor_values_2d(self):
        rep = spectrum(build_L("plus", 2, basis="hermite_tensor"), 4)
        assert np.max(np.abs(rep.eigenvalues - np.array([-2.0, 0.0, 0.0, 2.0]))) < 1e-4
        rep = spectrum(build_L("minus", 2, basis="hermite_tensor"), 4)
        assert np.max(np.abs(rep.eigenvalues - np.array([0.0, 2.0, 2.0, 4.0]))) < 1e-4

    def test_residuals_small(self, Lp):
        rep = spectrum(Lp, 6)
        assert np.all(rep.residuals < 1e-8 * (1.0 + np.abs(rep.eigenvalues)))

    def test_eigenvalues_ascending(self, Lm):
        rep = spectrum(Lm, 6)
        assert np.all(np.diff(rep.eigenvalues) >= -1e-12)

    def test_refinement_stability(self, Lp):
        coarse = spectrum(Lp, 4).eigenvalues
        fine = spectrum(build_L("plus", 1, n=2048), 4).eigenvalues
        assert np.max(np.abs(coarse - fine)) < 1e-4

    def test_k_too_large(self, Lp):
        with pytest.raises(ValueError):
            spectrum(Lp, Lp.size + 1)


class TestS2Form:
    def test_at_R(self, Lp):
        # <L+ R, R> = -2 m
        val = s2_form(sample_R(Lp).astype(complex))
        assert val == pytest.approx(-2.0 * M1, rel=1e-6)

    def test_at_iR(self, Lm):
        val = s2_form(1j * sample_R(Lm))
        assert abs(val) < 1e-6 * M1

    def test_at_dR(self, Lp):
        val = s2_form(sample_dR(Lp).astype(complex))
        assert abs(val) < 1e-6 * M1


@pytest.fixture(scope="module")
def full():
    return coercivity("full")


class TestCoercivity:

    def test_Lminus_constrained_minimum(self, full):
        assert full["Lminus_L2"] == pytest.approx(2.0, abs=1e-3)

    def test_Lplus_constrained_minimum(self, full):
        assert full["Lplus_L2"] == pytest.approx(2.0, abs=1e-3)

    def test_sigma_minima_positive(self, full):
        assert full["Lminus_sigma"] > 0.0
        assert full["Lplus_sigma"] > 0.0
        assert full["delta_sigma"] > 0.0

    def test_delta_is_min(self, full):
        assert full["delta_L2"] == min(full["Lminus_L2"], full["Lplus_L2"])

    def test_single_operator_modes(self):
        out = coercivity("Lminus")
        assert out["delta_L2"] == pytest.approx(2.0, abs=1e-3)
        with pytest.raises(ValueError):
            coercivity("both")

    def test_form_bounded_below_on_constrained_fields(self, Lp, Lm, full):
        # random w with Re w orthogonal to {R, dR} and Im w orthogonal to R
        rng = np.random.default_rng(9)
        h = Lp.h
        R = sample_R(Lp)
        dR = sample_dR(Lp)
        Qr = np.linalg.qr(np.column_stack([R, dR]))[0]
        for _ in range(100):
            env = np.exp(-Lp.x ** 2 / 4.0)
            u = rng.normal(size=Lp.size) * env
            v = rng.normal(size=Lp.size) * env
            u = u - Qr @ (Qr.T @ u)
            v = v - R * (R @ v) / (R @ R)
            w = u + 1j * v
            norm_sq = h * float(u @ u + v @ v)
            assert s2_form(w) >= full["delta_L2"] * norm_sq - 1e-8
