"""Period matrices, the Siegel disc, and deformation diagnostics.

A degree-1 circle map phi sends the holomorphic half W+ to the graph
of the period matrix Z = conj(B) A^{-1} built from the pullback
blocks.  Z is symmetric and strictly contractive, so it lands in the
Siegel disc; right composition acts on it by a fractional-linear rule,
and the derivative of the map in a monomial direction has a closed
form checked here by finite differences.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, ConditioningError, ValidationError
from .fourier import analyze, h_half_norm, synthesize
from .maps import CircleMap, compose, make_map, rauch_flow
from .pullback import BlockOperator, apply_operator, pullback_matrix

condition_limit = 1e12


@dataclass(frozen=True)
class PeriodMatrix:
    """Symmetric contraction Z describing a deformed polarization."""

    cutoff: int
    Z: np.ndarray
    source: object = None
    condition_of_A: float = None

    def __post_init__(self):
        n = self.cutoff
        if int(n) != n or n < 1:
            raise ValidationError("cutoff must be an integer >= 1")
        object.__setattr__(self, "cutoff", int(n))
        z = np.array(self.Z, dtype=np.complex128)
        if z.shape != (self.cutoff, self.cutoff):
            raise ValidationError("Z must be %d x %d" % (n, n))
        z.flags.writeable = False
        object.__setattr__(self, "Z", z)


@dataclass(frozen=True)
class SiegelReport:
    """Membership diagnostics for a candidate period matrix."""

    symmetry_defect: float
    sigma_max: float
    min_eig_I_minus_ZZbar: float
    condition_of_A: float

    @property
    def member(self):
        return self.sigma_max < 1.0 and self.min_eig_I_minus_ZZbar > 0.0


def period_matrix(m, cutoff, grid):
    """Z = conj(B) A^{-1} from the truncated pullback blocks.

    The inverse is applied through a linear solve, and the condition
    number of A is recorded on the result; an A too ill conditioned to
    trust is refused.
    """
    t = pullback_matrix(m, cutoff, grid)
    condition = float(np.linalg.cond(t.A))
    if not condition < condition_limit:
        raise ConditioningError(
            "plus block is numerically singular (cond %.3e)" % condition
        )
    z = np.linalg.solve(t.A.T, np.conj(t.B).T).T
    return PeriodMatrix(cutoff, z, m.descriptor, condition)


def siegel_membership(p, tol=1e-6):
    """Report symmetry and contraction diagnostics for Z.

    The smallest eigenvalue is taken on the Hermitian part of
    I - Z conj(Z), which is the exact matrix whenever the symmetry
    defect is within tol.
    """
    z = p.Z
    defect = float(np.max(np.abs(z - z.T))) if z.size else 0.0
    sigma = float(np.linalg.svd(z, compute_uv=False)[0]) if z.size else 0.0
    gram = np.eye(p.cutoff) - z @ np.conj(z)
    gram = 0.5 * (gram + np.conj(gram.T))
    low = float(np.min(np.linalg.eigvalsh(gram)))
    return SiegelReport(defect, sigma, low, p.condition_of_A)


def siegel_action(t, p):
    """Fractional-linear action of a block operator on Z.

    Returns (conj(B) + conj(A) Z)(A + B Z)^{-1}; the recorded
    condition number is that of the solved denominator.
    """
    if t.cutoff != p.cutoff:
        raise ValidationError("operator and period matrix cutoffs differ")
    z = p.Z
    denominator = t.A + t.B @ z
    numerator = np.conj(t.B) + np.conj(t.A) @ z
    condition = float(np.linalg.cond(denominator))
    if not condition < condition_limit:
        raise ConditioningError(
            "A + B Z is numerically singular (cond %.3e)" % condition
        )
    moved = np.linalg.solve(denominator.T, numerator.T).T
    return PeriodMatrix(p.cutoff, moved, None, condition)


def _graph_basis(z):
    return np.vstack([np.eye(z.shape[0]), z])


def equivariance_defect(outer, inner, cutoff, grid):
    """Principal-angle distance certifying Z(phi o psi) = psi . Z(phi).

    Compares the graph of the composite period matrix with the image
    of the graph of Z(phi) under the block matrix of psi; the value is
    the sine of the largest principal angle between the two column
    spans, so it is basis independent.
    """
    composed = period_matrix(compose(outer, inner), cutoff, grid)
    z_outer = period_matrix(outer, cutoff, grid)
    t_inner = pullback_matrix(inner, cutoff, grid)
    q1 = np.linalg.qr(_graph_basis(composed.Z))[0]
    q2 = np.linalg.qr(t_inner.full() @ _graph_basis(z_outer.Z))[0]
    # The sines of the principal angles are the singular values of the
    # residual of Q2 against span(Q1); unlike sqrt(1 - cos^2) this has
    # no cancellation floor near zero.
    residual = q2 - q1 @ (q1.conj().T @ q2)
    return float(np.linalg.norm(residual, 2))


def rauch_derivative(m, cutoff):
    """Derivative of the period map in the monomial direction z^bar^m.

    Entry (r, s) is sqrt(rs)/(r+s-1) on the antidiagonal r+s-2 = m and
    zero elsewhere; the matrix is symmetric by construction.
    """
    if int(m) != m or m < 0:
        raise ValidationError("monomial degree must be a nonnegative integer")
    out = np.zeros((cutoff, cutoff), dtype=np.complex128)
    for r in range(1, cutoff + 1):
        s = int(m) + 2 - r
        if 1 <= s <= cutoff:
            out[r - 1, s - 1] = np.sqrt(float(r * s)) / (r + s - 1.0)
    return out


def rauch_fd_defect(m, eps, cutoff, grid):
    """Distance between Z(rauch_flow(m, eps))/eps and the closed form.

    Restricted to entries with r + s <= min(cutoff, 10), where the
    first-order finite-difference error dominates; decays linearly in
    eps.
    """
    flow_map = make_map(rauch_flow(m, eps), grid)
    z = period_matrix(flow_map, cutoff, grid).Z
    derivative = rauch_derivative(m, cutoff)
    indices = np.arange(1, cutoff + 1)
    window = indices[:, None] + indices[None, :] <= min(cutoff, 10)
    return float(np.max(np.abs(z / eps - derivative)[window]))


def _resymmetrized(matrix, cutoff):
    # Fold a numerically conjugated structure back onto the exact
    # block-conjugate form so it maps real functions to real functions.
    a = 0.5 * (matrix[:cutoff, :cutoff] + np.conj(matrix[cutoff:, cutoff:]))
    b = 0.5 * (matrix[:cutoff, cutoff:] + np.conj(matrix[cutoff:, :cutoff]))
    return BlockOperator(cutoff, a, b)


def _base_structure(cutoff):
    diag = np.concatenate(
        [np.full(cutoff, -1j), np.full(cutoff, 1j)]
    )
    return np.diag(diag)


def structure_from_map(t):
    """Complex structure T J0 T^{-1} conjugated from the reference one."""
    condition = float(np.linalg.cond(t.full()))
    if not condition < condition_limit:
        raise ConditioningError(
            "operator is numerically singular (cond %.3e)" % condition
        )
    dense = t.full()
    raw = np.linalg.solve(dense.T, (dense @ _base_structure(t.cutoff)).T).T
    return _resymmetrized(raw, t.cutoff)


def structure_from_period(p):
    """Complex structure with the graph of Z as its -i eigenspace."""
    n = p.cutoff
    basis = np.block(
        [[np.eye(n), np.conj(p.Z)], [p.Z, np.eye(n)]]
    )
    condition = float(np.linalg.cond(basis))
    if not condition < condition_limit:
        raise ConditioningError(
            "graph basis is numerically singular (cond %.3e)" % condition
        )
    raw = np.linalg.solve(basis.T, (basis @ _base_structure(n)).T).T
    return _resymmetrized(raw, n)


def _pointwise_product(f, g, grid, cutoff):
    samples = synthesize(f, grid) * synthesize(g, grid)
    return analyze(samples, grid, cutoff)


def integrability_residual(j_source, trial_functions, grid, cutoff=None):
    """Worst multiplicativity defect of a complex structure J.

    For every pair (f, g) of real trial functions the residual
    ||J[fg - (Jf)(Jg)] - f(Jg) - g(Jf)|| / (||f|| ||g||) measures how
    far the -i eigenspace of J is from being multiplication closed;
    it vanishes for structures conjugated from the reference one by a
    composition operator.  The source may be a CircleMap, a pullback
    BlockOperator, or a PeriodMatrix.  Products are formed pointwise
    on the grid, mean removed, and re-truncated to the cutoff.
    """
    if isinstance(j_source, CircleMap):
        if cutoff is None:
            raise ValidationError("map-sourced structures need a cutoff")
        structure = structure_from_map(pullback_matrix(j_source, cutoff, grid))
    elif isinstance(j_source, BlockOperator):
        if cutoff is not None and cutoff != j_source.cutoff:
            raise ValidationError("cutoff disagrees with the operator")
        cutoff = j_source.cutoff
        structure = structure_from_map(j_source)
    elif isinstance(j_source, PeriodMatrix):
        if cutoff is not None and cutoff != j_source.cutoff:
            raise ValidationError("cutoff disagrees with the period matrix")
        cutoff = j_source.cutoff
        structure = structure_from_period(j_source)
    else:
        raise ValidationError(
            "structure source must be a map, an operator, or a Z matrix"
        )
    if grid.size < 8 * cutoff:
        raise AliasingError(
            "grid size %d cannot hold products at cutoff %d"
            % (grid.size, cutoff)
        )
    trials = list(trial_functions)
    for f in trials:
        if not f.real:
            raise ValidationError("trial functions must be real")
        if 2 * f.bandlimit > cutoff:
            raise ValidationError("trial bandlimit exceeds half the cutoff")
        if h_half_norm(f) == 0.0:
            raise ValidationError("trial functions must be nonzero")
    rotated = [apply_operator(structure, f) for f in trials]
    norms = [h_half_norm(f) for f in trials]
    worst = 0.0
    for i in range(len(trials)):
        for j in range(i, len(trials)):
            f, g = trials[i], trials[j]
            jf, jg = rotated[i], rotated[j]
            plain = _pointwise_product(f, g, grid, cutoff)
            twisted = _pointwise_product(jf, jg, grid, cutoff)
            left = apply_operator(structure, plain - twisted)
            right = _pointwise_product(f, jg, grid, cutoff) + (
                _pointwise_product(g, jf, grid, cutoff)
            )
            residual = h_half_norm(left - right) / (norms[i] * norms[j])
            worst = max(worst, residual)
    return worst


def period_to_json(p):
    from .maps import descriptor_to_json

    rows = [
        [{"re": float(v.real), "im": float(v.imag)} for v in row]
        for row in p.Z
    ]
    source = None if p.source is None else descriptor_to_json(p.source)
    return {"cutoff": p.cutoff, "Z": rows, "source": source}


def period_from_json(obj):
    from .maps import descriptor_from_json

    try:
        cutoff = int(obj["cutoff"])
        z = np.array(
            [[complex(v["re"], v["im"]) for v in row] for row in obj["Z"]],
            dtype=np.complex128,
        )
        source = obj.get("source")
        if source is not None:
            source = descriptor_from_json(source)
        return PeriodMatrix(cutoff, z, source)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("malformed PeriodMatrix object: %s" % exc)


def siegel_report_to_json(report):
    return {
        "symmetry_defect": report.symmetry_defect,
        "sigma_max": report.sigma_max,
        "min_eig_I_minus_ZZbar": report.min_eig_I_minus_ZZbar,
        "condition_of_A": report.condition_of_A,
    }
