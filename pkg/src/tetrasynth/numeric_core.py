"""Small dense complex linear algebra and boundary quadrature kernels.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy`` arrays of dtype ``complex128``.
"""

import numpy as np

from .exceptions import InvalidInputError, NotIsometricError, OutOfDomainError

__all__ = [
    "as_complex_matrix",
    "hermitian_part",
    "hermitian_min_eigenvalue",
    "operator_norm",
    "orthonormal_complement",
    "extend_isometry_to_unitary",
    "OuterFunction",
    "outer_eval",
    "circle_points",
    "disc_points",
    "haar_unitary",
    "LOG_FLOOR",
]

#: Lower clip for boundary log-moduli, so that zeros of g on the grid stay finite.
LOG_FLOOR = np.log(1e-300)

# Points closer than this to the unit circle are refused by :func:`outer_eval`.
_OUTER_MARGIN = 1e-6


def as_complex_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D ``complex128`` array or raise."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def hermitian_part(M):
    """Symmetrize a numerically Hermitian matrix, ``(M + M*) / 2``."""
    M = as_complex_matrix(M)
    return 0.5 * (M + M.conj().T)


def hermitian_min_eigenvalue(M):
    """Smallest eigenvalue of a Hermitian matrix.

    Only the lower triangle is read (LAPACK ``heevd`` via
    :func:`numpy.linalg.eigvalsh`), so the result is always real.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Hermitian matrix, ``n >= 1``.

    Returns
    -------
    float
    """
    M = as_complex_matrix(M)
    if M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty square matrix, got {M.shape}")
    return float(np.linalg.eigvalsh(M)[0])


def operator_norm(M):
    """Largest singular value of ``M``."""
    M = as_complex_matrix(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def orthonormal_complement(Q, dim):
    """Orthonormal basis of the complement of ``span(Q)`` in ``C^dim``.

    Classical Gram-Schmidt (applied twice) on the standard basis vectors
    in index order; a candidate is kept when its residual norm is at least
    ``0.5 / sqrt(dim)``, which always yields a full basis.  The result is
    deterministic and equals the identity when ``Q`` is empty.
    """
    Q = np.asarray(Q, dtype=np.complex128).reshape(dim, -1)
    need = dim - Q.shape[1]
    basis = [Q[:, j] for j in range(Q.shape[1])]
    out = []
    thresh = 0.5 / np.sqrt(max(dim, 1))
    for i in range(dim):
        if len(out) == need:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[i] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv >= thresh:
            v = v / nv
            basis.append(v)
            out.append(v)
    if len(out) != need:  # pragma: no cover - excluded by the threshold argument
        raise ArithmeticError("complement construction failed")
    if need == 0:
        return np.zeros((dim, 0), dtype=np.complex128)
    return np.column_stack(out)


def _stack_columns(vecs, dim, name):
    if isinstance(vecs, np.ndarray) and vecs.ndim == 2:
        arr = vecs.astype(np.complex128)
    else:
        vecs = list(vecs)
        if not vecs:
            return np.zeros((dim if dim is not None else 0, 0), dtype=np.complex128)
        arr = np.column_stack([np.asarray(v, dtype=np.complex128).ravel() for v in vecs])
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def extend_isometry_to_unitary(domain_vecs, range_vecs, tol=1e-9, p=None, q=None):
    """Extend the partial isometry ``d_i -> r_i`` to a unitary matrix.

    Parameters
    ----------
    domain_vecs, range_vecs : sequence of vectors or 2-D array (vectors as columns)
        Families in ``C^p`` and ``C^q`` with equal Gram matrices.
    tol : float
        Allowed absolute Gram mismatch.
    p, q : int, optional
        Ambient dimensions; needed when the families are empty.

    Returns
    -------
    U : ndarray, shape (r, r)
        Unitary with ``U @ pad(d_i) = pad(r_i)`` where ``r = max(p, q)``.

    Raises
    ------
    NotIsometricError
        If some Gram entry differs by more than ``tol``.
    """
    Dm = _stack_columns(domain_vecs, p, "domain_vecs")
    Rm = _stack_columns(range_vecs, q, "range_vecs")
    p = Dm.shape[0] if p is None else int(p)
    q = Rm.shape[0] if q is None else int(q)
    if Dm.shape[1] != Rm.shape[1]:
        raise InvalidInputError("domain and range families differ in length")
    if Dm.shape[0] != p or Rm.shape[0] != q:
        raise InvalidInputError("vector lengths do not match the stated dimensions")
    r = max(p, q)
    if r == 0:
        raise InvalidInputError("ambient dimension must be positive")
    k = Dm.shape[1]
    Dm = np.vstack([Dm, np.zeros((r - p, k))])
    Rm = np.vstack([Rm, np.zeros((r - q, k))])
    if k == 0:
        return np.eye(r, dtype=np.complex128)

    diff = np.abs(Dm.conj().T @ Dm - Rm.conj().T @ Rm)
    worst = np.unravel_index(int(np.argmax(diff)), diff.shape)
    mismatch = float(diff[worst])
    if mismatch > tol:
        raise NotIsometricError(
            f"Gram mismatch {mismatch:.3e} at pair {tuple(int(i) for i in worst)} exceeds tol {tol:.1e}",
            pair=tuple(int(i) for i in worst),
            mismatch=mismatch,
        )

    Ud, s, Vh = np.linalg.svd(Dm, full_matrices=False)
    scale = max(1.0, float(s[0]) ** 2) if s.size else 1.0
    # Directions with sigma^2 below the Gram noise carry no reliable image.
    cut = np.sqrt(max(mismatch, 64 * np.finfo(float).eps * scale))
    rank = int(np.sum(s > cut))
    Qd = Ud[:, :rank]
    Qr = (Rm @ Vh[:rank].conj().T) / s[:rank]
    if rank:
        X, _, Yh = np.linalg.svd(Qr, full_matrices=False)
        Qr = X @ Yh
    U = Qr @ Qd.conj().T
    U = U + orthonormal_complement(Qr, r) @ orthonormal_complement(Qd, r).conj().T
    return U


class OuterFunction:
    """Outer function ``exp(C)`` built from boundary log-modulus samples.

    ``C`` is the Herglotz integral of ``u`` over the circle.  Its Taylor
    coefficients are ``mean(u)`` and ``2 * u_hat[k]`` for ``k >= 1``, where
    the Fourier coefficients ``u_hat`` come from the trapezoidal rule (FFT) on
    the uniform grid ``theta_j = 2 pi j / m``.  Summing the truncated series
    instead of the kernel sum avoids aliasing near the circle, so values on
    ``|lam| <= 1`` are meaningful whenever ``u`` is smooth.

    Parameters
    ----------
    log_modulus : array_like, shape (m,)
        Samples of ``u`` at ``theta_j``.
    """

    def __init__(self, log_modulus):
        u = np.asarray(log_modulus, dtype=float).ravel()
        if u.size < 2:
            raise InvalidInputError("need at least two boundary samples")
        if not np.all(np.isfinite(u)):
            raise InvalidInputError("log-modulus samples must be finite")
        u = np.maximum(u, LOG_FLOOR)
        m = u.size
        uhat = np.fft.fft(u) / m
        half = m // 2
        coef = np.empty(half + 1, dtype=np.complex128)
        coef[0] = uhat[0].real
        coef[1:half] = 2.0 * uhat[1:half]
        # Nyquist term shared between +-m/2 (even m).
        coef[half] = uhat[half] if m % 2 == 0 else 2.0 * uhat[half]
        self.m = m
        self.coef = coef

    def log(self, lam):
        """``C(lam)``; ``lam`` may be an array, ``|lam| <= 1``."""
        lam = np.asarray(lam, dtype=np.complex128)
        return np.polynomial.polynomial.polyval(lam, self.coef)

    def __call__(self, lam):
        return np.exp(self.log(lam))

    def tail(self, k=32):
        """Sum of the moduli of the last ``k`` coefficients (truncation gauge)."""
        return float(np.sum(np.abs(self.coef[-k:])))


def outer_eval(log_modulus, lam):
    """Value at ``lam`` of the outer function with boundary log-modulus ``u``.

    Parameters
    ----------
    log_modulus : array_like, shape (m,)
        ``u(theta_j)`` on the uniform grid ``theta_j = 2 pi j / m``; values are
        clipped below at ``log(1e-300)``.
    lam : complex
        Evaluation point with ``|lam| <= 1 - 1e-6``.

    Returns
    -------
    complex
        ``exp((1/2pi) * integral((e^{it} + lam) / (e^{it} - lam) * u(t) dt))``.
    """
    lam = complex(lam)
    if abs(lam) > 1.0 - _OUTER_MARGIN:
        raise OutOfDomainError(f"|lam| = {abs(lam):.8f} is too close to the unit circle")
    return complex(OuterFunction(log_modulus)(lam))


def circle_points(m, radius=1.0, offset=0.0):
    """``m`` equispaced points ``radius * exp(2 pi i (j + offset) / m)``."""
    theta = 2.0 * np.pi * (np.arange(m) + offset) / m
    return radius * np.exp(1j * theta)


def disc_points(n, radius=1.0):
    """Deterministic, roughly uniform sample of ``n`` points in ``|z| < radius``.

    A sunflower (golden-angle) pattern; point ``k`` sits at radius
    ``radius * sqrt((k + 0.5) / n)``.
    """
    k = np.arange(n)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return radius * np.sqrt((k + 0.5) / max(n, 1)) * np.exp(1j * golden * k)


def haar_unitary(n, rng):
    """Haar-distributed ``n x n`` unitary drawn from ``rng``."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
