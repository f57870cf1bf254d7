"""Truncated Fourier model of the half-order Sobolev space on the circle.

A function is stored through its Fourier coefficients c_n for
0 < |n| <= N in an array of length 2N+1, with c_n at slot N+n and the
mean slot pinned to zero.  The squared norm is sum |n| |c_n|^2, which
for real functions equals the classical 2 sum_{n>=1} n |c_n|^2.
"""

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import GridError, ValidationError

eps = np.finfo(float).eps


@dataclass(frozen=True)
class SampleGrid:
    """Uniform grid theta_j = offset + 2 pi j / size, j = 0..size-1."""

    size: int
    offset: float = 0.0

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 4:
            raise GridError("grid size must be an integer >= 4")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "offset", float(self.offset))
        cell = 2.0 * np.pi / self.size
        if not 0.0 <= self.offset < cell:
            raise GridError("grid offset must lie in [0, 2*pi/size)")

    def points(self):
        return self.offset + 2.0 * np.pi * np.arange(self.size) / self.size


@dataclass(frozen=True)
class CircleFunction:
    """Bandlimited mean-zero function on the circle.

    coeffs holds c_n at slot bandlimit+n.  real=None asks the
    constructor to detect Hermitian symmetry; real=True asserts it and
    enforces it exactly, rejecting input whose symmetry defect is not
    small.
    """

    bandlimit: int
    coeffs: np.ndarray
    real: bool = None

    def __post_init__(self):
        n = self.bandlimit
        if int(n) != n or n < 1:
            raise ValidationError("bandlimit must be an integer >= 1")
        object.__setattr__(self, "bandlimit", int(n))
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (2 * self.bandlimit + 1,):
            raise ValidationError("coeffs must have length 2*bandlimit+1")
        if c[self.bandlimit] != 0:
            raise ValidationError("mean coefficient must be zero")
        mirror = np.conj(c[::-1])
        if self.real is None:
            object.__setattr__(self, "real", bool(np.array_equal(c, mirror)))
        elif self.real:
            scale = 1.0 + float(np.max(np.abs(c)))
            defect = float(np.max(np.abs(c - mirror)))
            if defect > 1e-9 * scale:
                raise ValidationError(
                    "real flag set but coefficients are not Hermitian "
                    "symmetric (defect %.3e)" % defect
                )
            # Exact symmetrization; a no-op when already symmetric.
            c = 0.5 * (c + mirror)
            c[self.bandlimit] = 0.0
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "real", bool(self.real))

    def coefficient(self, n):
        """Return c_n, zero outside the stored band."""
        if n == 0 or abs(n) > self.bandlimit:
            return 0j
        return complex(self.coeffs[self.bandlimit + n])

    def __add__(self, other):
        a, b, n = _aligned(self, other)
        return CircleFunction(n, a + b)

    def __sub__(self, other):
        a, b, n = _aligned(self, other)
        return CircleFunction(n, a - b)

    def __neg__(self):
        return CircleFunction(self.bandlimit, -self.coeffs)

    def __mul__(self, scalar):
        return CircleFunction(self.bandlimit, self.coeffs * scalar)

    __rmul__ = __mul__

    def conjugate(self):
        """Pointwise complex conjugate; swaps the n and -n slots."""
        return CircleFunction(self.bandlimit, np.conj(self.coeffs[::-1]))


def from_modes(bandlimit, modes, real=None):
    """Build a CircleFunction from a {mode: coefficient} mapping."""
    c = np.zeros(2 * bandlimit + 1, np.complex128)
    for n, value in modes.items():
        if n == 0:
            raise ValidationError("mode 0 is not part of the space")
        if abs(n) > bandlimit:
            raise ValidationError("mode %d exceeds bandlimit %d" % (n, bandlimit))
        c[bandlimit + n] = value
    return CircleFunction(bandlimit, c, real)


def zero_function(bandlimit):
    return CircleFunction(bandlimit, np.zeros(2 * bandlimit + 1, np.complex128))


def _aligned(f, g):
    """Zero-extend two coefficient arrays to a common bandlimit."""
    n = max(f.bandlimit, g.bandlimit)
    return _extended(f, n), _extended(g, n), n


def _extended(f, n):
    if f.bandlimit == n:
        return f.coeffs
    pad = n - f.bandlimit
    return np.pad(f.coeffs, (pad, pad))


def analyze(samples, grid, bandlimit):
    """Fourier coefficients of the trigonometric interpolant.

    Exact (to rounding) for input that is bandlimited below the
    requested bandlimit, which needs grid.size >= 2*bandlimit+1.  The
    mean is discarded.  Real sample arrays produce a real function
    with the Hermitian symmetry enforced exactly.
    """
    samples = np.asarray(samples)
    m = grid.size
    if samples.shape != (m,):
        raise GridError("sample array does not match the grid size")
    if m < 2 * bandlimit + 1:
        raise GridError("grid size %d cannot resolve bandlimit %d" % (m, bandlimit))
    was_real = bool(np.isrealobj(samples))
    raw = np.fft.fft(np.asarray(samples, np.complex128)) / m
    c = np.zeros(2 * bandlimit + 1, np.complex128)
    ns = np.arange(1, bandlimit + 1)
    phase = np.exp(-1j * ns * grid.offset)
    c[bandlimit + ns] = raw[ns] * phase
    if was_real:
        c[bandlimit - ns] = np.conj(c[bandlimit + ns])
    else:
        c[bandlimit - ns] = raw[m - ns] * np.conj(phase)
    return CircleFunction(bandlimit, c, True if was_real else None)


def synthesize(f, grid):
    """Evaluate the function on a grid; real array when f.real."""
    m = grid.size
    buf = np.zeros(m, np.complex128)
    n = f.bandlimit
    for k in range(-n, n + 1):
        buf[k % m] += f.coeffs[n + k] * np.exp(1j * k * grid.offset)
    values = np.fft.ifft(buf) * m
    if f.real:
        return values.real
    return values


def evaluate_at(f, points):
    """Evaluate the function at arbitrary angles."""
    points = np.ascontiguousarray(points, np.float64)
    values = _accel.synth_at(
        np.ascontiguousarray(f.coeffs), f.bandlimit, points
    )
    if f.real:
        return values.real
    return values


def derivative(f):
    """Spectral derivative; coefficient c_n scales by i n."""
    n = f.bandlimit
    ns = np.arange(-n, n + 1)
    return CircleFunction(n, f.coeffs * (1j * ns))


def norm_squared(f):
    """Squared norm sum |n| |c_n|^2, computed without a square root."""
    n = f.bandlimit
    weights = np.abs(np.arange(-n, n + 1)).astype(float)
    c = f.coeffs
    return float(np.sum(weights * (c.real * c.real + c.imag * c.imag)))


def h_half_norm(f):
    """Norm sqrt(sum |n| |c_n|^2)."""
    return float(np.sqrt(norm_squared(f)))


def inner_product(f, g):
    """Hermitian pairing sum |n| c_n(f) conj(c_n(g))."""
    a, b, n = _aligned(f, g)
    weights = np.abs(np.arange(-n, n + 1)).astype(float)
    return complex(np.sum(weights * a * np.conj(b)))


def hilbert_transform(f):
    """Conjugation operator c_n -> -i sgn(n) c_n.

    Exact isometry and exact involution in coefficient arithmetic: the
    multipliers only swap and negate real and imaginary parts.
    """
    n = f.bandlimit
    ns = np.arange(-n, n + 1)
    mult = np.where(ns > 0, -1j, np.where(ns < 0, 1j, 0j))
    return CircleFunction(n, f.coeffs * mult, f.real if f.real else None)


def polarize(f):
    """Split into positive-mode and negative-mode parts (f_plus, f_minus)."""
    n = f.bandlimit
    plus = np.zeros_like(f.coeffs)
    minus = np.zeros_like(f.coeffs)
    plus[n + 1 :] = f.coeffs[n + 1 :]
    minus[:n] = f.coeffs[:n]
    return CircleFunction(n, plus), CircleFunction(n, minus)


def douglas_energy(f, grid):
    """Product-grid quadrature of the Douglas energy integral.

    Approximates (1/16 pi^2) times the double integral of
    |f(theta)-f(phi)|^2 / sin^2((theta-phi)/2).  The second axis is the
    given grid shifted by half a cell so the two axes never meet and
    the removable diagonal singularity is dodged.  The squared
    integrand is a trig polynomial of degree below 2N per axis, so the
    rule is exact to rounding once grid.size exceeds 2*bandlimit.
    """
    if grid.offset <= 0.0:
        raise GridError("douglas quadrature needs a strictly positive offset")
    m = grid.size
    cell = 2.0 * np.pi / m
    shifted = SampleGrid(m, (grid.offset + 0.5 * cell) % cell)
    fx = np.ascontiguousarray(synthesize(f, grid), np.complex128)
    fy = np.ascontiguousarray(synthesize(f, shifted), np.complex128)
    tx = np.ascontiguousarray(grid.points())
    ty = np.ascontiguousarray(shifted.points())
    total = _accel.douglas_pair_sum(fx, fy, tx, ty)
    return total / (4.0 * m * m)


def poisson_evaluate(f, r, theta):
    """Harmonic extension sum c_n r^{|n|} e^{i n theta}."""
    if not 0.0 <= r < 1.0:
        raise ValidationError("radius must lie in [0, 1)")
    n = f.bandlimit
    ns = np.arange(1, n + 1)
    z = r * np.exp(1j * theta)
    powers = z ** ns
    return complex(
        np.sum(f.coeffs[n + ns] * powers)
        + np.sum(f.coeffs[n - ns] * np.conj(powers))
    )


def function_to_json(f):
    """JSON-ready dict; zero coefficients are omitted."""
    entries = []
    for n in range(-f.bandlimit, f.bandlimit + 1):
        if n == 0:
            continue
        value = f.coeffs[f.bandlimit + n]
        if value != 0:
            entries.append({"n": n, "re": float(value.real), "im": float(value.imag)})
    return {"bandlimit": f.bandlimit, "real": bool(f.real), "coeffs": entries}


def function_from_json(obj):
    """Inverse of function_to_json, with validation."""
    try:
        bandlimit = int(obj["bandlimit"])
        entries = obj["coeffs"]
        real = bool(obj.get("real", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("malformed CircleFunction object: %s" % exc)
    c = np.zeros(2 * bandlimit + 1, np.complex128)
    seen = set()
    for entry in entries:
        try:
            n = int(entry["n"])
            value = complex(float(entry["re"]), float(entry.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("malformed coefficient entry: %s" % exc)
        if n == 0:
            raise ValidationError("coefficient entries must have n != 0")
        if abs(n) > bandlimit:
            raise ValidationError("coefficient index %d exceeds bandlimit" % n)
        if n in seen:
            raise ValidationError("duplicate coefficient index %d" % n)
        seen.add(n)
        c[bandlimit + n] = value
    return CircleFunction(bandlimit, c, True if real else None)
