"""Quantum derivative operators, their Hilbert-Schmidt size, and the
welding kernel with its classical diagonal limits.

The quantum derivative of a function f is the commutator [J, M_f] of
the conjugation operator with multiplication by f.  In the exponential
basis its matrix couples only modes of opposite sign, which makes it
Hilbert-Schmidt exactly when f lies in the half-order Sobolev space.
The kernel side of the same story evaluates log[(h(x)-h(y))/(x-y)] and
its first two derivative kernels near the diagonal, where they recover
log h', h''/(2h'), and the Schwarzian derivative over six.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .fourier import derivative, evaluate_at, norm_squared, zero_function
from .maps import (
    Compose,
    Identity,
    Inverse,
    Moebius,
    Rotation,
    lift_bandwidth,
    periodic_part,
    periodic_values,
)
from .period import structure_from_map
from .pullback import pullback_matrix

eps = np.finfo(float).eps
two_pi = 2.0 * np.pi

# Half-widths for diagonal extrapolation, small enough that every
# smooth catalog map is in its asymptotic regime.
default_deltas = (0.02, 0.01, 0.005)


@dataclass(frozen=True)
class QuantumOperator:
    """Commutator matrix [J, M_f] on modes m, n in {-N..N}.

    Entry (m, n) is -i(sgn m - sgn n) c_{m-n}(f) with sgn 0 = 0, so the
    matrix vanishes whenever the two modes share a sign.
    """

    cutoff: int
    entries: np.ndarray
    source_bandlimit: int

    def __post_init__(self):
        n = int(self.cutoff)
        if n < 1:
            raise ValidationError("operator cutoff must be at least 1")
        entries = np.asarray(self.entries, np.complex128)
        if entries.shape != (2 * n + 1, 2 * n + 1):
            raise ValidationError(
                "entries must be a (2N+1) x (2N+1) matrix for cutoff N"
            )
        signs = np.sign(np.arange(-n, n + 1))
        same = signs[:, None] == signs[None, :]
        if np.any(entries[same] != 0):
            raise ValidationError(
                "entries must vanish whenever the mode signs agree"
            )
        if not 0 <= int(self.source_bandlimit) <= n:
            raise ValidationError(
                "source bandlimit must lie between 0 and the cutoff"
            )
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "cutoff", n)
        object.__setattr__(self, "source_bandlimit", int(self.source_bandlimit))


def quantum_derivative_matrix(f, cutoff):
    """Matrix of [J, M_f] on the ambient modes {-N..N}.

    Parameters
    ----------
    f : CircleFunction
        Generating function of the multiplication operator.
    cutoff : int
        Ambient half-bandwidth N; must be at least bandlimit(f).

    Returns
    -------
    QuantumOperator
    """
    n = int(cutoff)
    if n != cutoff or n < 1:
        raise ValidationError("ambient cutoff must be a positive integer")
    if n < f.bandlimit:
        raise ValidationError(
            "ambient cutoff must cover the bandlimit of the function"
        )
    idx = np.arange(-n, n + 1)
    signs = np.sign(idx).astype(float)
    padded = np.zeros(4 * n + 1, np.complex128)
    k = f.bandlimit
    padded[2 * n - k : 2 * n + k + 1] = f.coeffs
    lookup = padded[2 * n + (idx[:, None] - idx[None, :])]
    entries = -1j * (signs[:, None] - signs[None, :]) * lookup
    return QuantumOperator(n, entries, f.bandlimit)


def hs_norm(op):
    """Hilbert-Schmidt (Frobenius) norm of a quantum derivative.

    Exact for bandlimited sources once the ambient cutoff is at least
    twice the source bandlimit, so no nonzero entry is truncated away.
    """
    if op.cutoff < 2 * op.source_bandlimit:
        raise ValidationError(
            "ambient cutoff must be at least twice the source bandlimit"
        )
    return float(np.linalg.norm(op.entries))


def hs_bracket_check(f):
    """Check 2 norm(f)^2 <= HS^2 <= 4 norm(f)^2 for a real function.

    The lower constant is attained by first-mode functions and the
    upper one is approached by high single modes; both flags carry a
    few-ulp slack so the attained case does not flap.
    """
    if not f.real:
        raise ValidationError("the bracket is stated for real functions")
    ambient = max(2 * f.bandlimit, 1)
    hs2 = hs_norm(quantum_derivative_matrix(f, ambient)) ** 2
    n2 = norm_squared(f)
    slack = 32.0 * eps * max(1.0, hs2, 4.0 * n2)
    lower_ok = 2.0 * n2 <= hs2 + slack
    upper_ok = hs2 <= 4.0 * n2 + slack
    return bool(lower_ok), bool(upper_ok)


def _scalar_eval(f, x):
    return float(evaluate_at(f, np.array([float(x)]))[0])


def _lift_model(m):
    """Spectral derivatives of the lift, on the certified band.

    The periodic part is truncated a little above its certified
    bandwidth before differentiating; keeping the full grid spectrum
    would amplify the rounding floor by the cube of the top mode.
    """
    band = lift_bandwidth(m)
    nyquist = (m.grid.size - 1) // 2
    if band >= nyquist:
        raise ValidationError(
            "lift spectrum does not resolve on the map grid; kernel "
            "derivatives need a smooth, resolved descriptor"
        )
    # Constant periodic parts (rotations) carry no content; analyzing
    # them would only differentiate rounding noise.
    if band == 0:
        part = zero_function(1)
    else:
        part = periodic_part(m, bandlimit=min(2 * band + 8, nyquist))
    d1 = derivative(part)
    d2 = derivative(d1)
    d3 = derivative(d2)
    return d1, d2, d3


def _kernel_value(m, d1, order, x, y):
    # dh formed from the periodic parts keeps the exact multiple of
    # x - y; differencing raw lift values would shift the kernels by
    # cancellation noise of size eps*|lift|/(x - y).
    dx = x - y
    parts = periodic_values(m.descriptor, np.array([x, y]))
    dh = m.degree * dx + float(parts[0] - parts[1])
    if order == 0:
        return math.log(dh / dx)
    slope_x = m.degree + _scalar_eval(d1, x)
    if order == 1:
        return slope_x / dh - 1.0 / dx
    slope_y = m.degree + _scalar_eval(d1, y)
    return slope_x * slope_y / dh**2 - 1.0 / dx**2


def _check_order(order):
    if order not in (0, 1, 2):
        raise ValidationError("kernel order must be 0, 1, or 2")


def kernel_eval(h, order, x, y):
    """Welding kernel of a circle map, evaluated on its lift.

    Parameters
    ----------
    h : CircleMap
        Map whose lift is used as a real function near the diagonal.
    order : int
        0 for log[(h(x)-h(y))/(x-y)], 1 for h'(x)/(h(x)-h(y)) -
        1/(x-y), 2 for h'(x)h'(y)/(h(x)-h(y))^2 - 1/(x-y)^2.
    x, y : float
        Distinct angles (mod 2 pi); lift derivatives come from
        spectral differentiation of the periodic part.
    """
    _check_order(order)
    x = float(x)
    y = float(y)
    if math.remainder(x - y, two_pi) == 0.0:
        raise ValidationError("kernel requires x != y (mod 2 pi)")
    d1, _, _ = _lift_model(h)
    return _kernel_value(h, d1, order, x, y)


def kernel_eval_line(h, hp, order, x, y):
    """Same kernels for a real map given as callables h and h'."""
    _check_order(order)
    x = float(x)
    y = float(y)
    if x == y:
        raise ValidationError("kernel requires x != y")
    if order == 0:
        return math.log((h(x) - h(y)) / (x - y))
    if order == 1:
        return hp(x) / (h(x) - h(y)) - 1.0 / (x - y)
    return hp(x) * hp(y) / (h(x) - h(y)) ** 2 - 1.0 / (x - y) ** 2


def _checked_deltas(deltas):
    out = [float(d) for d in deltas]
    if len(out) < 2:
        raise ValidationError("extrapolation needs at least two deltas")
    if out[-1] <= 0.0 or any(b >= a for a, b in zip(out, out[1:])):
        raise ValidationError("deltas must be positive and strictly decreasing")
    return out


def _extrapolate(deltas, values):
    # Neville's scheme evaluated at zero; the values follow a power
    # series in delta, so polynomial extrapolation through the sampled
    # half-widths converges at the product of the node sizes.
    work = [float(v) for v in values]
    n = len(work)
    for level in range(1, n):
        for i in range(n - level):
            a, b = deltas[i], deltas[i + level]
            work[i] = (a * work[i + 1] - b * work[i]) / (a - b)
    return work[0]


def _guard_monotone(values):
    diffs = np.diff(values)
    scale = max(1.0, float(np.max(np.abs(values))))
    significant = diffs[np.abs(diffs) > 1e-8 * scale]
    if significant.size and np.any(np.sign(significant) != np.sign(significant[0])):
        raise NumericalError(
            "deltas too large: kernel values do not approach the "
            "diagonal monotonically"
        )


def diagonal_limit(h, order, x, deltas=default_deltas):
    """Extrapolated diagonal limit of the kernel and its classical value.

    Parameters
    ----------
    h : CircleMap
    order : int
        Kernel order; the classical values are log h'(x) for order 0,
        h''(x)/(2 h'(x)) for order 1, and S(h)(x)/6 for order 2 with
        S(h) = h'''/h' - (3/2)(h''/h')^2.
    x : float
        Base angle; the kernel is sampled at y = x + delta.
    deltas : sequence of float
        Strictly decreasing positive half-widths.

    Returns
    -------
    (limit_estimate, classical_value, defect)
    """
    _check_order(order)
    x = float(x)
    deltas = _checked_deltas(deltas)
    d1, d2, d3 = _lift_model(h)
    values = [_kernel_value(h, d1, order, x, x + d) for d in deltas]
    _guard_monotone(values)
    limit = _extrapolate(deltas, values)

    slope = h.degree + _scalar_eval(d1, x)
    if slope <= 0.0:
        raise NumericalError("lift derivative is not positive at the point")
    if order == 0:
        classical = math.log(slope)
    elif order == 1:
        classical = _scalar_eval(d2, x) / (2.0 * slope)
    else:
        curv = _scalar_eval(d2, x) / slope
        classical = (_scalar_eval(d3, x) / slope - 1.5 * curv * curv) / 6.0
    return limit, classical, abs(limit - classical)


def diagonal_limit_line(h, hp, order, x, deltas=default_deltas):
    """Extrapolated diagonal limit for a real map given as callables."""
    _check_order(order)
    x = float(x)
    deltas = _checked_deltas(deltas)
    values = [kernel_eval_line(h, hp, order, x, x + d) for d in deltas]
    _guard_monotone(values)
    return _extrapolate(deltas, values)


def _disk_matrix(d):
    if isinstance(d, Identity):
        return np.eye(2, dtype=np.complex128)
    if isinstance(d, Rotation):
        half = np.exp(0.5j * d.alpha)
        return np.array([[half, 0.0], [0.0, np.conj(half)]])
    if isinstance(d, Moebius):
        scale = 1.0 / math.sqrt(1.0 - abs(d.a) ** 2)
        half = np.exp(0.5j * d.beta)
        return scale * np.array(
            [[half, -d.a * half], [-np.conj(d.a * half), np.conj(half)]]
        )
    if isinstance(d, Compose):
        out = np.eye(2, dtype=np.complex128)
        for item in d.maps:
            out = out @ _disk_matrix(item)
        return out
    if isinstance(d, Inverse):
        return np.linalg.inv(_disk_matrix(d.of))
    raise ValidationError(
        "line realization exists only for moebius-type descriptors"
    )


def moebius_line_coefficients(d):
    """Boundary action of a disk moebius map on the real line.

    The disk automorphism is conjugated by the Cayley transform into
    an automorphism of the upper half plane; its boundary action is a
    real fractional linear map x -> (p x + q)/(r x + s), returned as a
    2 x 2 coefficient matrix with unit determinant.  The order-2
    kernel of such a map vanishes identically; this is the law the
    circle lift cannot see, because lifting through the exponential
    adds (1 - (h')^2)/2 to the Schwarzian.
    """
    disk = _disk_matrix(d)
    cayley = np.array([[1.0, -1j], [1.0, 1j]])
    inverse_cayley = np.array([[1j, 1j], [-1.0, 1.0]])
    raw = inverse_cayley @ disk @ cayley
    pivot = raw.flat[int(np.argmax(np.abs(raw)))]
    aligned = raw / (pivot / abs(pivot))
    if np.max(np.abs(aligned.imag)) > 1e-9 * np.max(np.abs(aligned.real)):
        raise NumericalError(
            "conjugated coefficient matrix is not real; the descriptor "
            "does not act on the line"
        )
    real = aligned.real
    det = real[0, 0] * real[1, 1] - real[0, 1] * real[1, 0]
    if det <= 0.0:
        raise NumericalError("line realization lost orientation")
    return real / math.sqrt(det)


def fractional_linear(coefficients):
    """Callables (h, h') for x -> (p x + q)/(r x + s), det = 1."""
    mat = np.asarray(coefficients, float)
    if mat.shape != (2, 2):
        raise ValidationError("coefficients must form a 2 x 2 matrix")
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if det <= 0.0:
        raise ValidationError("coefficient determinant must be positive")
    p, q, r, s = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]

    def value(x):
        return (p * x + q) / (r * x + s)

    def slope(x):
        return det / (r * x + s) ** 2

    return value, slope


def deformed_structure(h, cutoff, grid):
    """Complex structure T_h J0 T_h^{-1} induced by a circle map.

    The result squares to -I up to truncation and its -i eigenspace is
    the graph of the period matrix of h.
    """
    return structure_from_map(pullback_matrix(h, cutoff, grid))


def diagonal_report(h, order, x, deltas=default_deltas):
    """Diagnostic record for one diagonal limit, JSON-ready."""
    limit, classical, defect = diagonal_limit(h, order, x, deltas)
    return {
        "order": int(order),
        "x": float(x),
        "deltas": [float(d) for d in deltas],
        "limit": limit,
        "classical": classical,
        "defect": defect,
    }


def quantum_operator_to_json(op):
    """Dense JSON object with the index range and the entries."""
    return {
        "cutoff": op.cutoff,
        "source_bandlimit": op.source_bandlimit,
        "entries": [
            [{"re": float(v.real), "im": float(v.imag)} for v in row]
            for row in op.entries
        ],
    }


def quantum_operator_from_json(obj):
    """Inverse of quantum_operator_to_json."""
    if not isinstance(obj, dict) or not {
        "cutoff",
        "source_bandlimit",
        "entries",
    } <= set(obj):
        raise ValidationError(
            "quantum operator object needs cutoff, source_bandlimit, entries"
        )
    try:
        entries = np.array(
            [
                [complex(v["re"], v["im"]) for v in row]
                for row in obj["entries"]
            ],
            np.complex128,
        )
    except (TypeError, KeyError, IndexError) as exc:
        raise ValidationError("malformed quantum operator entries") from exc
    return QuantumOperator(
        int(obj["cutoff"]), entries, int(obj["source_bandlimit"])
    )
