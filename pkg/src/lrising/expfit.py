"""Sum-of-exponentials compression of decaying coupling sequences.

Approximates f(k) = k^-alpha (or any supplied sequence) on k = 1..N by
sum_i c_i lambda_i^k.  Rates come from a QR-based matrix pencil on the
Hankel matrix A_ij = f(i+j-1); weights from linear least squares.  Rates
may come in complex-conjugate pairs; the reconstruction stays real.

When the pencil produces real rates inside the unit interval (always the
case for the k^-alpha targets), the fit is polished by variable-projection
Gauss-Newton with Lawson reweighting, which pushes the maximum error close
to the minimax optimum for the given number of terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PencilError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExponentialSumFit:
    coefficients: np.ndarray  # complex, length n
    rates: np.ndarray  # complex, length n
    target: np.ndarray  # the sequence that was fitted, k = 1..N
    alpha: float | None
    max_error: float

    @property
    def n_terms(self) -> int:
        return int(self.rates.size)

    def reconstruct(self, ks=None) -> np.ndarray:
        ks = np.arange(1, self.target.size + 1) if ks is None else np.asarray(ks)
        vals = (self.rates[None, :] ** ks[:, None]) @ self.coefficients
        imag = np.max(np.abs(vals.imag)) if vals.size else 0.0
        if imag > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
            raise PencilError(f"reconstruction has imaginary residue {imag:.2e}")
        return vals.real

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "N": int(self.target.size),
            "n": self.n_terms,
            "c": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "lambda": [[float(r.real), float(r.imag)] for r in self.rates],
            "max_error": self.max_error,
        }


def _varpro_polish(target: np.ndarray, lam0: np.ndarray,
                   lawson_rounds: int = 25, gn_iter: int = 60):
    """Minimize max_k |sum c_i lam_i^k - f_k| over real rates in (0, 1).

    Variable projection (coefficients eliminated by weighted least squares)
    with a damped Gauss-Newton inner loop on logit(lambda) and Lawson
    reweighting of the outer problem toward the minimax solution.
    """
    n_pts = target.size
    ks = np.arange(1, n_pts + 1, dtype=float)
    u = np.log(lam0 / (1.0 - lam0))

    def projected_residual(u_vec, w):
        lam = 1.0 / (1.0 + np.exp(-u_vec))
        vander = lam[None, :] ** ks[:, None]
        c, *_ = np.linalg.lstsq(vander * w[:, None], target * w, rcond=None)
        return (vander @ c) - target, lam, c

    w = np.ones(n_pts)
    best = (np.inf, None, None)
    for _round in range(lawson_rounds):
        lm_damp = 1e-8
        r, lam, c = projected_residual(u, w)
        cost = float(np.sum((r * w) ** 2))
        for _it in range(gn_iter):
            jac = np.empty((n_pts, u.size))
            h = 1e-6
            for i in range(u.size):
                up = u.copy()
                up[i] += h
                rp, _, _ = projected_residual(up, w)
                jac[:, i] = (rp - r) / h
            jw = jac * w[:, None]
            rw = r * w
            jtj = jw.T @ jw
            jtr = jw.T @ rw
            moved = False
            for _damp in range(30):
                try:
                    step = np.linalg.solve(jtj + lm_damp * np.diag(np.diag(jtj) + 1e-30), -jtr)
                except np.linalg.LinAlgError:
                    lm_damp *= 10
                    continue
                r_new, lam_new, c_new = projected_residual(u + step, w)
                cost_new = float(np.sum((r_new * w) ** 2))
                if np.isfinite(cost_new) and cost_new < cost:
                    u = u + step
                    r, lam, c, cost = r_new, lam_new, c_new, cost_new
                    lm_damp = max(lm_damp / 10, 1e-12)
                    moved = True
                    break
                lm_damp *= 10
            if not moved or np.linalg.norm(step) < 1e-12:
                break
        prof = np.abs(r)
        if prof.max() < best[0]:
            best = (float(prof.max()), lam.copy(), c.copy())
        w = w * np.sqrt(prof / prof.max() + 1e-4)
        w /= w.max()
    return best


def fit_exponential_sum(alpha: float | None = None, N: int | None = None, n: int = 10,
                        sequence=None, polish: bool = True) -> ExponentialSumFit:
    """Fit k^-alpha (k = 1..N) or a raw `sequence` with n exponential terms."""
    if sequence is None:
        if alpha is None or N is None:
            raise ValueError("give either (alpha, N) or an explicit sequence")
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        ks = np.arange(1, N + 1, dtype=float)
        sequence = ks ** (-float(alpha))
    else:
        sequence = np.asarray(sequence, dtype=float)
        N = sequence.size
    if not n < N / 2:
        raise ValueError(f"need n < N/2 (got n={n}, N={N})")

    rows = N - n + 1
    a = np.empty((rows, n))
    for j in range(n):
        a[:, j] = sequence[j : j + rows]
    v, _r = np.linalg.qr(a, mode="reduced")
    v1 = v[: N - n, :]  # first N-n rows
    v2 = v[1:, :]  # last N-n rows (rows = N-n+1)
    if np.linalg.matrix_rank(v1, tol=1e-12) < n:
        raise PencilError("rank-deficient pencil: reduce n or check the input sequence")
    pencil = np.linalg.pinv(v1, rcond=1e-12) @ v2
    rates = np.linalg.eigvals(pencil)

    ks = np.arange(1, N + 1)
    vander = rates[None, :] ** ks[:, None]
    coeffs, *_ = np.linalg.lstsq(vander, sequence.astype(complex), rcond=None)
    recon = (vander @ coeffs).real
    max_err = float(np.max(np.abs(recon - sequence)))

    real_rates = np.max(np.abs(rates.imag)) < 1e-10
    inside = real_rates and np.all((rates.real > 0) & (rates.real < 1))
    if polish and inside and max_err > 1e-13:
        lam0 = np.clip(np.sort(rates.real), 1e-8, 1 - 1e-10)
        err_p, lam_p, c_p = _varpro_polish(sequence, lam0)
        if err_p < max_err:
            rates = lam_p.astype(complex)
            coeffs = c_p.astype(complex)
            max_err = err_p
    return ExponentialSumFit(coeffs, rates, sequence, alpha, max_err)


def eval_error(fit: ExponentialSumFit) -> tuple[float, np.ndarray]:
    """Recompute the exact error profile over k = 1..N."""
    profile = np.abs(fit.reconstruct() - fit.target)
    return float(profile.max()), profile
