import numpy as np
import pytest

from lrising.expfit import PencilError, eval_error, fit_exponential_sum


class TestPencil:
    def test_single_exponential_recovered_exactly(self):
        ks = np.arange(1, 41)
        fit = fit_exponential_sum(sequence=0.5**ks, n=1)
        assert fit.rates[0].real == pytest.approx(0.5, abs=1e-12)
        assert abs(fit.rates[0].imag) < 1e-12
        assert fit.coefficients[0].real == pytest.approx(1.0, abs=1e-12)
        assert fit.max_error < 1e-12

    def test_alpha3_n362_reaches_1e6(self):
        fit = fit_exponential_sum(alpha=3.0, N=362, n=10)
        assert fit.max_error <= 1e-6

    def test_alpha1_n100_with_refinement_oracle(self):
        fit = fit_exponential_sum(alpha=1.0, N=100, n=10)
        assert fit.max_error <= 1e-6

        # independent nonlinear refinement started from the pencil solution:
        # the pencil must already be locally optimal within 10%
        from scipy.optimize import least_squares

        ks = np.arange(1, 101, dtype=float)
        target = ks**-1.0
        n = 10

        def unpack(p):
            c = p[:n] + 1j * p[n : 2 * n]
            lam = p[2 * n : 3 * n] + 1j * p[3 * n :]
            return c, lam

        def resid(p):
            c, lam = unpack(p)
            vals = (lam[None, :] ** ks[:, None]) @ c
            return np.abs(vals.real - target)

        p0 = np.concatenate([
            fit.coefficients.real, fit.coefficients.imag,
            fit.rates.real, fit.rates.imag,
        ])
        sol = least_squares(resid, p0, method="lm", max_nfev=20000)
        c, lam = unpack(sol.x)
        refined = np.max(np.abs(((lam[None, :] ** ks[:, None]) @ c).real - target))
        assert fit.max_error <= 1.1 * max(refined, 1e-300) or fit.max_error < 1e-9

    def test_error_monotone_in_n(self):
        errors = []
        for n in (2, 4, 6, 8, 10):
            fit = fit_exponential_sum(alpha=2.0, N=120, n=n)
            errors.append(fit.max_error)
        assert all(e2 <= e1 * (1 + 1e-9) for e1, e2 in zip(errors, errors[1:]))

    def test_exact_when_input_is_sum_of_exponentials(self):
        ks = np.arange(1, 61)
        seq = 0.8 * 0.9**ks - 0.3 * 0.4**ks + 0.05 * 0.65**ks
        fit = fit_exponential_sum(sequence=seq, n=5)
        assert fit.max_error < 1e-12

    def test_reconstruction_real_with_conjugate_pairs(self):
        fit = fit_exponential_sum(alpha=1.0, N=100, n=10)
        has_complex = np.any(np.abs(fit.rates.imag) > 1e-12)
        recon = fit.reconstruct()
        assert recon.dtype == np.float64
        if has_complex:
            # conjugate symmetry: rates pair up
            conj_sorted = np.sort_complex(np.conj(fit.rates))
            assert np.allclose(np.sort_complex(fit.rates), conj_sorted, atol=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            fit_exponential_sum(alpha=1.0, N=10, n=5)  # n >= N/2
        with pytest.raises(ValueError):
            fit_exponential_sum(alpha=-1.0, N=100, n=5)
        with pytest.raises(ValueError):
            fit_exponential_sum(n=4)


class TestEvalError:
    def test_perfect_fit_error_zero(self):
        ks = np.arange(1, 31)
        fit = fit_exponential_sum(sequence=0.7**ks, n=1)
        max_err, profile = eval_error(fit)
        assert max_err < 1e-13
        assert profile.shape == (30,)

    def test_truncation_increases_error(self):
        full = fit_exponential_sum(alpha=3.0, N=200, n=10)
        short = fit_exponential_sum(alpha=3.0, N=200, n=5)
        assert short.max_error > full.max_error

    def test_error_profile_peaks_at_small_k(self):
        fit = fit_exponential_sum(alpha=3.0, N=362, n=10)
        _max_err, profile = eval_error(fit)
        assert np.argmax(profile) < 36  # regression baseline: head of the sequence
