"""
QVBS v1 - Extended-precision spectral arithmetic tests

Run with:
    pytest tests/unit/test_precise.py
"""

import numpy as np
import pytest

from qvbs.errors import InvalidDeformationError
from qvbs.mpsrep import block, transfer_matrix
from qvbs.precise import (
    eigen_residual,
    precise_block,
    precise_eigenvalue,
    precise_eigenvector,
    refine_eigenvalues,
)
from qvbs.spectral import eigenvalue_closed, eigenvector, jacobi_eigh

Q_WIDE = [0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0]


def as_array(matrix) -> np.ndarray:
    return np.array(matrix.tolist(), dtype=float)


@pytest.mark.unit
class TestPreciseObjects:
    """Blocks, eigenvalues and eigenvectors rebuilt in mpmath"""

    @pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("j", [-2, 0, 1])
    def test_block_matches_double(self, q, j):
        """Test that the extended block rounds to G^{(j)} at S=2."""
        expected = block(transfer_matrix(2, q), j)
        np.testing.assert_allclose(as_array(precise_block(2, j, q)), expected,
                                   rtol=1e-12, atol=1e-13 * np.abs(expected).max())

    @pytest.mark.parametrize("S", [1, 3])
    @pytest.mark.parametrize("q", [0.3, 1.0, 3.0])
    def test_eigenvalue_matches_double(self, S, q):
        """Test lambda_l against the double-precision closed form."""
        for ell in range(S + 1):
            assert float(precise_eigenvalue(S, ell, q)) == pytest.approx(eigenvalue_closed(S, ell, q), rel=1e-13)

    @pytest.mark.parametrize("ell,j", [(2, 2), (2, -1), (3, 0)])
    def test_eigenvector_matches_double(self, ell, j):
        """Test |lambda_l>>_j against the intertwiner chain in double precision at S=3, q=0.7."""
        expected = eigenvector(3, ell, j, 0.7)
        np.testing.assert_allclose(as_array(precise_eigenvector(3, ell, j, 0.7)).ravel(), expected, rtol=1e-12)

    def test_rejects_invalid_q(self):
        """Test that the extended routines validate q."""
        with pytest.raises(InvalidDeformationError):
            precise_block(1, 0, -1.0)


@pytest.mark.unit
class TestEigenResidual:
    """Residuals relative to |lambda_l|"""

    @pytest.mark.parametrize("S", [1, 2, 3, 4])
    @pytest.mark.parametrize("q", Q_WIDE)
    def test_closed_form_eigenvectors(self, S, q):
        """Test ||G v - lambda v|| <= 1e-10 |lambda| ||v|| for every (l, j)."""
        worst = max(
            eigen_residual(S, ell, j, q)
            for ell in range(S + 1)
            for j in range(-ell, ell + 1)
        )
        assert worst <= 1e-10

    def test_smallest_eigenvalue_strong_deformation(self):
        """Test lambda_4 at S=4, q=0.3, ten orders of magnitude below ||G^{(0)}||."""
        assert eigen_residual(4, 4, 0, 0.3) <= 1e-20

    def test_double_precision_falls_short(self):
        """Test that the same residual in double precision is far above rounding at S=4, q=0.3."""
        g_block = block(transfer_matrix(4, 0.3), 0)
        vector = eigenvector(4, 4, 0, 0.3)
        lam = eigenvalue_closed(4, 4, 0.3)
        double = np.linalg.norm(g_block @ vector - lam * vector) / (abs(lam) * np.linalg.norm(vector))
        assert double > eigen_residual(4, 4, 0, 0.3)


@pytest.mark.unit
class TestRefinement:
    """Rayleigh quotient polishing of Jacobi eigenpairs"""

    @pytest.mark.parametrize("q", [0.3, 3.0])
    def test_refined_block_spectrum(self, q):
        """Test that the j=0 eigenvalues at S=4 reach double accuracy, smallest included."""
        result = jacobi_eigh(block(transfer_matrix(4, q), 0))
        refined = sorted(refine_eigenvalues(4, 0, q, result.eigenvalues, result.eigenvectors), key=abs, reverse=True)
        expected = [eigenvalue_closed(4, ell, q) for ell in range(5)]
        assert refined == pytest.approx(expected, rel=1e-12)

    def test_exact_shift(self):
        """Test that an exact eigenvalue as the starting shift is kept."""
        result = jacobi_eigh(block(transfer_matrix(1, 1.0), 1))
        refined = refine_eigenvalues(1, 1, 1.0, np.array([-1.0]), result.eigenvectors)
        assert refined == pytest.approx([-1.0], rel=1e-15)
