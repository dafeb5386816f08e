"""
Small numerical primitives shared by the rest of the package.

Lambert W on the two real branches, Cramer's-rule solvers for 2x2 and
3x3 systems, and the scalar / triangular-lattice maximizers used by the
resource allocators.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np

INV_E = math.exp(-1.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# relative to the largest |entry| of the coefficient matrix
SINGULAR_RTOL = 1e-12


class SingularSystemError(ArithmeticError):
    """Raised when a linear system is (numerically) rank deficient."""


@dataclass(frozen=True)
class SearchResult:
    """Best point found by one of the maximizers.

    ``argmax`` is a float for line searches and an ``(a, b)`` pair for
    the planar lattice search.
    """
    argmax: Union[float, Tuple[float, float]]
    value: float
    evaluations: int


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------
def lambert_w(branch: str, x: float) -> float:
    """Real Lambert W, i.e. the ``w`` solving ``w * exp(w) = x``.

    Parameters
    ----------
    branch : {"principal", "minus-one"}
        ``principal`` is defined for ``x >= -1/e`` and returns ``w >= -1``;
        ``minus-one`` is defined for ``-1/e <= x < 0`` and returns
        ``w <= -1``.
    x : float

    Notes
    -----
    ``w * exp(w)`` is monotone on each branch, so the root is bracketed
    and bisected down to adjacent floats, then polished with Newton steps
    that are only accepted when they reduce the residual.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("lambert_w: x must be finite, got %r" % x)
    # tolerate one ulp below the branch point
    if x < -INV_E:
        if x >= -INV_E * (1.0 + 4e-16):
            x = -INV_E
        else:
            raise ValueError("lambert_w: x=%r below branch point -1/e" % x)

    if branch == "principal":
        if x == 0.0:
            return 0.0
        if x == -INV_E:
            return -1.0
        lo, hi = (-1.0, 0.0) if x < 0 else (0.0, math.log1p(x))
        increasing = True
    elif branch == "minus-one":
        if x >= 0.0:
            raise ValueError("lambert_w: minus-one branch needs -1/e <= x < 0, "
                             "got %r" % x)
        if x == -INV_E:
            return -1.0
        # (2 ln(-x) - 1) e^(2 ln(-x) - 1) >= x holds on the whole domain
        lo, hi = 2.0 * math.log(-x) - 1.0, -1.0
        increasing = False
    else:
        raise ValueError("unknown Lambert W branch %r" % branch)

    def f(w):
        return w * math.exp(w) - x

    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    w = 0.5 * (lo + hi)

    best, best_res = w, abs(f(w))
    for _ in range(3):
        deriv = math.exp(w) * (w + 1.0)
        if deriv == 0.0:
            break
        w = w - f(w) / deriv
        res = abs(f(w))
        if res < best_res:
            best, best_res = w, res
        else:
            break
    return best


# ---------------------------------------------------------------------------
# Cramer's rule
# ---------------------------------------------------------------------------
def _det2(a, b, c, d):
    return a * d - b * c


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _scale(A):
    return max(abs(v) for row in A for v in row)


def solve_linear_2(A, b) -> Tuple[float, float]:
    """Solve a 2x2 system by Cramer's rule."""
    (a11, a12), (a21, a22) = A
    det = _det2(a11, a12, a21, a22)
    scale = _scale(A)
    if scale == 0.0 or abs(det) <= SINGULAR_RTOL * scale * scale:
        raise SingularSystemError("2x2 system is singular (det=%g)" % det)
    x0 = _det2(b[0], a12, b[1], a22) / det
    x1 = _det2(a11, b[0], a21, b[1]) / det
    return (x0, x1)


def solve_linear_3(A, b) -> Tuple[float, float, float]:
    """Solve a 3x3 system by Cramer's rule.

    The singularity test is relative: ``|det|`` against the cube of the
    largest absolute coefficient, because channel-gain coefficients can
    span twenty decades.
    """
    A = [[float(v) for v in row] for row in A]
    det = _det3(A)
    scale = _scale(A)
    if scale == 0.0 or abs(det) <= SINGULAR_RTOL * scale ** 3:
        raise SingularSystemError("3x3 system is singular (det=%g)" % det)
    out = []
    for col in range(3):
        m = [row[:] for row in A]
        for i in range(3):
            m[i][col] = float(b[i])
        out.append(_det3(m) / det)
    return tuple(out)


# ---------------------------------------------------------------------------
# Searches
# ---------------------------------------------------------------------------
def golden_section_max(f, lo, hi, tol=1e-9):
    """Golden-section maximization of ``f`` on ``[lo, hi]``.

    Returns ``(x, fx, evaluations)``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    if fc >= fd:
        return c, fc, n
    return d, fd, n


def line_search_max(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-6) -> SearchResult:
    """Maximize a scalar function on ``[lo, hi]``.

    A grid with spacing ``tol`` (capped at 10^5 cells) locates the best
    cell, then golden-section refines inside its two neighbouring cells.
    Works for non-unimodal objectives as long as the peak is not
    narrower than the grid spacing.
    """
    if not lo < hi:
        raise ValueError("line_search_max needs lo < hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = int(min(max(math.ceil((hi - lo) / tol), 2), 100_000))
    xs = np.linspace(lo, hi, n + 1)
    best_i, best_v = 0, -math.inf
    for i, x in enumerate(xs):
        v = f(float(x))
        if v > best_v:
            best_i, best_v = i, v
    evals = len(xs)
    best_x = float(xs[best_i])
    a = float(xs[max(best_i - 1, 0)])
    b = float(xs[min(best_i + 1, n)])
    if b > a:
        x, v, k = golden_section_max(f, a, b, tol=min(tol, (b - a)) * 1e-3)
        evals += k
        if v > best_v:
            best_x, best_v = x, v
    return SearchResult(argmax=best_x, value=best_v, evaluations=evals)


def grid_search_max_2d(f, step: float, exclude_zero_a=False,
                       exclude_zero_b=False, exclude_full=False,
                       chunk_rows: int = 256) -> SearchResult:
    """Maximize ``f(a, b)`` over the triangle ``a, b >= 0, a + b <= 1``.

    ``f`` must accept numpy arrays and return an array of values. Rows of
    constant ``a`` are evaluated in chunks so fine lattices (1e-4) stay
    within memory. Ties resolve to the lexicographically smallest point.
    Non-finite objective values are ignored.
    """
    if not 0 < step < 1:
        raise ValueError("step must lie in (0, 1)")
    n = int(round(1.0 / step))
    best_v, best_pt, evals = -math.inf, None, 0
    i_lo = 1 if exclude_zero_a else 0
    for start in range(i_lo, n + 1, chunk_rows):
        rows = np.arange(start, min(start + chunk_rows, n + 1))
        i, j = np.meshgrid(rows, np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        if exclude_zero_b:
            keep &= j > 0
        if exclude_full:
            keep &= i + j < n
        a = i[keep] / n
        b = j[keep] / n
        if a.size == 0:
            continue
        v = np.asarray(f(a, b), dtype=float)
        evals += a.size
        v = np.where(np.isfinite(v), v, -np.inf)
        k = int(np.argmax(v))
        if v[k] > best_v:
            best_v, best_pt = float(v[k]), (float(a[k]), float(b[k]))
    if best_pt is None:
        return SearchResult(argmax=(math.nan, math.nan), value=-math.inf,
                            evaluations=evals)
    return SearchResult(argmax=best_pt, value=best_v, evaluations=evals)
