"""Dense linear-algebra and special-function kernels.

Everything here is written against plain numpy arrays and kept free of
simulation-specific assumptions so it can be cross-checked in isolation.
The routines favour predictable, certifiable behaviour over raw speed:
deterministic starting vectors, explicit iteration caps, and hard errors
instead of silent fallbacks.
"""

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError

_INV_E = np.exp(-1.0)

# Taylor truncation at this degree with arguments scaled below _EXPM_THETA
# keeps the series remainder far under double roundoff.
_EXPM_DEGREE = 16
_EXPM_THETA = 0.5


def _require_square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def expm(a, dt=1.0):
    """Matrix exponential ``exp(a * dt)`` by scaling and squaring.

    The scaled argument is pushed below a fixed norm threshold, run through
    a degree-16 Taylor polynomial in Horner form, and squared back up.

    Parameters
    ----------
    a : (n, n) array_like
        Matrix to exponentiate.
    dt : float
        Scalar factor applied to ``a`` before exponentiation.

    Returns
    -------
    (n, n) ndarray
    """
    a = _require_square(a)
    b = a * float(dt)
    if not np.all(np.isfinite(b)):
        raise DomainError("matrix exponential argument contains non-finite entries")
    norm = np.linalg.norm(b, np.inf)
    squarings = 0
    if norm > _EXPM_THETA:
        squarings = int(np.ceil(np.log2(norm / _EXPM_THETA)))
        b = b / (2.0**squarings)
    eye = np.eye(b.shape[0])
    p = eye.copy()
    for k in range(_EXPM_DEGREE, 0, -1):
        p = eye + (b @ p) / k
    for _ in range(squarings):
        p = p @ p
    return p


def spectral_norm(a, tol=1e-12, max_iter=10000):
    """Largest singular value of ``a`` via power iteration on ``aᵀa``.

    The start vector comes from a fixed seed so repeated calls are
    bit-identical.  Convergence is declared on the eigen-residual of the
    Gram matrix, which is scale invariant.

    When the top Gram eigenvalues are nearly degenerate the eigen-residual
    decays like (lam2/lam1)^k and the iteration effectively stalls even
    though the value itself is fine only to the cluster width, which can be
    far coarser than ``tol``.  On stall we escalate to the Jacobi
    eigensolver, which is insensitive to clustering.

    Raises
    ------
    ConvergenceError
        Only from the Jacobi fallback, if its sweeps fail to converge.
    """
    a = _require_square(a)
    if not np.any(a):
        return 0.0
    gram = a.T @ a
    n = gram.shape[0]
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    lam_window = -np.inf
    budget = min(max_iter, 1500)
    for k in range(budget):
        w = gram @ v
        wn = np.linalg.norm(w)
        if wn == 0.0:
            # start vector fell in the null space; redraw
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = w / wn
        lam = float(v @ (gram @ v))
        resid = np.linalg.norm(gram @ v - lam * v)
        if resid <= tol * max(lam, 1e-300):
            return float(np.sqrt(lam))
        # Rayleigh quotients are monotone here (gram is PSD); no measurable
        # gain over 100 iterations while the residual is still large means
        # a clustered top of the spectrum, not slow progress.
        if k % 100 == 99:
            if lam - lam_window <= 1e-13 * lam:
                break
            lam_window = lam
    return float(np.sqrt(max(np.max(sym_eigvals(gram)), 0.0)))


def sym_eigvals(a, tol=None, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    ``a`` is symmetrised as ``(a + aᵀ)/2`` before sweeping, so mildly
    asymmetric input is accepted.  Returns eigenvalues in ascending order.

    The default ``tol`` scales with the dimension because the attainable
    off-diagonal mass after convergence is roundoff noise on every entry.
    The off-diagonal norm is summed directly rather than as a difference of
    totals, which would cancel and floor out near sqrt(eps).
    """
    a = _require_square(a)
    s = (a + a.T) / 2.0
    n = s.shape[0]
    if n == 1:
        return s[0].copy()
    if tol is None:
        tol = 8.0 * n * np.finfo(float).eps
    ref = np.linalg.norm(s)
    if ref == 0.0:
        return np.zeros(n)
    mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(s[mask] ** 2))
        if off <= tol * ref:
            return np.sort(np.diag(s).copy())
        for p in range(n - 1):
            for q in range(p + 1, n):
                spq = s[p, q]
                if abs(spq) <= 1e-300:
                    continue
                theta = (s[q, q] - s[p, p]) / (2.0 * spq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    # asymptotic small root; theta**2 would overflow
                    t = 1.0 / (2.0 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                rp = s[p, :].copy()
                rq = s[q, :].copy()
                s[p, :] = c * rp - sn * rq
                s[q, :] = sn * rp + c * rq
                cp = s[:, p].copy()
                cq = s[:, q].copy()
                s[:, p] = c * cp - sn * cq
                s[:, q] = sn * cp + c * cq
                s[p, q] = 0.0
                s[q, p] = 0.0
    raise ConvergenceError(f"Jacobi sweep limit {max_sweeps} reached")


def log_norm(a):
    """Logarithmic norm (matrix measure) induced by the Euclidean norm.

    Equals the largest eigenvalue of the symmetric part ``(a + aᵀ)/2``.
    Unlike a norm it can be negative, which is what makes it useful for
    one-sided growth bounds on ``‖exp(a t)‖``.
    """
    a = _require_square(a)
    return float(sym_eigvals(a)[-1])


def _halley(x, w, max_iter=100):
    for _ in range(max_iter):
        ew = np.exp(w)
        f = w * ew - x
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 2e-16 * (2.0 + abs(w)):
            return w
    # accept only if the residual is already at roundoff level
    if abs(w * np.exp(w) - x) <= 1e-13 * max(1.0, abs(x)):
        return w
    raise ConvergenceError(f"Halley iteration failed to converge for x={x!r}")


def lambert_w(x, branch="principal"):
    """Real branches of the Lambert W function, ``w e^w = x``.

    ``branch="principal"`` covers ``x >= -1/e`` with ``w >= -1``;
    ``branch="minus_one"`` covers ``-1/e <= x < 0`` with ``w <= -1``.
    Both use Halley iteration from branch-appropriate starting points,
    with a direct series evaluation in a narrow band around the branch
    point ``x = -1/e`` where the iteration loses its footing.
    """
    x = float(x)
    if not np.isfinite(x):
        raise DomainError(f"lambert_w argument must be finite, got {x!r}")
    if x < -_INV_E - 1e-12:
        raise DomainError(f"lambert_w is not real for x={x!r} < -1/e")

    # expansion parameter around the branch point; clamp tiny negative
    # roundoff when x sits on -1/e itself
    p2 = 2.0 * (1.0 + np.e * x)
    p = np.sqrt(p2) if p2 > 0.0 else 0.0

    if branch == "principal":
        if p < 1e-4:
            return -1.0 + p - p2 / 3.0 + 11.0 * p * p2 / 72.0
        if x < -0.2:
            w0 = -1.0 + p - p2 / 3.0 + 11.0 * p * p2 / 72.0
        elif x < 0.0:
            w0 = x / (1.0 + x)
        elif x < np.e:
            w0 = np.log1p(x)
        else:
            l1 = np.log(x)
            l2 = np.log(l1)
            w0 = l1 - l2 + l2 / l1
        w = _halley(x, w0)
        if w < -1.0 - 1e-9:
            raise ConvergenceError(f"principal-branch iteration left its range at x={x!r}")
        return w

    if branch == "minus_one":
        if x >= 0.0:
            raise DomainError(f"minus_one branch requires x < 0, got {x!r}")
        if p < 1e-4:
            return -1.0 - p - p2 / 3.0 - 11.0 * p * p2 / 72.0
        if x < -0.2:
            w0 = -1.0 - p - p2 / 3.0 - 11.0 * p * p2 / 72.0
        else:
            # w = L - log(-w) is a contraction on this part of the branch
            ell = np.log(-x)
            w0 = ell - np.log(-ell)
            for _ in range(32):
                w0 = ell - np.log(-w0)
        w = _halley(x, w0)
        if w > -1.0 + 1e-9:
            raise ConvergenceError(f"minus_one-branch iteration left its range at x={x!r}")
        return w

    raise DomainError(f"unknown branch {branch!r}; use 'principal' or 'minus_one'")
