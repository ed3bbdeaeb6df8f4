"""Exact discrete phase-shift design through a one-hot binary linear program.

Element ``q`` picks a level ``l_q`` of the alphabet ``{0, d, ..., (S-1) d}``
with ``d = 2*pi/S`` (one-hot ``x_q``); each ordered pair picks the phase
difference ``nu_q - nu_i`` from ``{-(S-1) d, ..., (S-1) d}`` (one-hot
``y_{q,i}``). The gain at a sample point is linear in ``y``:

    |a^T w|^2 = sum_{q,i} |A_qi| (cos(ang A_qi) c - sin(ang A_qi) s)^T y_{q,i}

with ``c``/``s`` the cosines/sines of the difference alphabet. Presolve keeps
only ``q < i`` (``y_{i,q}`` is ``y_{q,i}`` reversed, ``y_{q,q}`` selects
zero), which doubles the coefficients of the kept pairs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .array_model import Codeword, IrsGeometry, steering_vector
from .grid import SampleSet

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 2**20
TIE_TOL = 1e-12


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PhaseAlphabet:
    bits: int

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 1:
            raise ValueError(f"bits must be a positive integer, got {self.bits!r}")

    @property
    def levels_count(self) -> int:
        return 2 ** int(self.bits)

    @property
    def delta(self) -> float:
        return 2 * np.pi / self.levels_count

    @property
    def levels(self) -> np.ndarray:
        """Phase values of the alphabet (the vector a-bar)."""
        return self.delta * np.arange(self.levels_count)

    @property
    def differences(self) -> np.ndarray:
        """Possible phase differences, length ``2S - 1``, antisymmetric."""
        S = self.levels_count
        return self.delta * np.arange(-(S - 1), S)

    @property
    def cos(self) -> np.ndarray:
        return np.cos(self.differences)

    @property
    def sin(self) -> np.ndarray:
        return np.sin(self.differences)

    def quantize(self, phases) -> np.ndarray:
        """Nearest level index of each phase."""
        return np.mod(np.round(np.asarray(phases, float) / self.delta), self.levels_count).astype(int)


@dataclass
class BinaryAssignment:
    """One-hot phase selectors ``x`` (Q, S) and difference selectors ``y`` (Q, Q, 2S-1)."""

    x: np.ndarray
    y: np.ndarray

    @classmethod
    def from_levels(cls, levels, alphabet: PhaseAlphabet) -> "BinaryAssignment":
        levels = np.asarray(levels, dtype=int)
        S = alphabet.levels_count
        Q = levels.size
        x = np.zeros((Q, S), dtype=np.int8)
        x[np.arange(Q), levels] = 1
        diff = levels[:, None] - levels[None, :] + S - 1
        y = np.zeros((Q, Q, 2 * S - 1), dtype=np.int8)
        qq, ii = np.meshgrid(np.arange(Q), np.arange(Q), indexing="ij")
        y[qq, ii, diff] = 1
        return cls(x, y)

    def check(self, alphabet: PhaseAlphabet) -> None:
        """Raise ValueError unless C3, C5 and the linking constraint C6 hold."""
        x, y = np.asarray(self.x), np.asarray(self.y)
        if not np.isin(x, (0, 1)).all() or not (x.sum(axis=1) == 1).all():
            raise ValueError("each x_q must be one-hot")
        if not np.isin(y, (0, 1)).all() or not (y.sum(axis=2) == 1).all():
            raise ValueError("each y_{q,i} must be one-hot")
        nu = x @ alphabet.levels
        linked = y @ alphabet.differences
        if not np.allclose(nu[:, None] - nu[None, :], linked, rtol=0, atol=1e-12):
            raise ValueError("linking constraint between x and y violated")

    @property
    def levels(self) -> np.ndarray:
        return np.argmax(np.asarray(self.x), axis=1)


@dataclass
class BnbConfig:
    node_limit: int = 2_000_000
    gap_tolerance: float = 1e-6
    branching: str = "rows"

    def __post_init__(self):
        if self.node_limit < 1:
            raise ValueError("node_limit must be at least 1")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance must be non-negative")
        if self.branching not in ("rows", "lp"):
            raise ValueError("branching must be 'rows' or 'lp'")


@dataclass
class DiscreteProgram:
    """The binary linear program for one sample set.

    ``coef[p, k, u]`` multiplies ``y_{q,i}(u)`` for the ``k``-th kept pair
    ``pairs[k] = (q, i)`` in C1 row ``p``; ``row_const[p]`` collects the
    diagonal terms.
    """

    alphabet: PhaseAlphabet
    n_elements: int
    pairs: np.ndarray
    coef: np.ndarray
    row_const: np.ndarray
    warm_levels: list = field(default_factory=list)
    steering: Optional[np.ndarray] = None

    @property
    def n_rows(self) -> int:
        return self.coef.shape[0]

    def pair_table(self) -> np.ndarray:
        """Coefficients as a dense ``(P, Q, Q, 2S-1)`` array (zero for q >= i)."""
        Q, U = self.n_elements, self.coef.shape[2]
        full = np.zeros((self.n_rows, Q, Q, U))
        full[:, self.pairs[:, 0], self.pairs[:, 1], :] = self.coef
        return full

    def row_values(self, levels) -> np.ndarray:
        """C1 row values of an integral assignment given by its level indices."""
        levels = np.asarray(levels, dtype=int)
        S = self.alphabet.levels_count
        u = levels[self.pairs[:, 0]] - levels[self.pairs[:, 1]] + S - 1
        return self.row_const + self.coef[:, np.arange(len(self.pairs)), u].sum(axis=1)

    def alpha(self, levels) -> float:
        return float(self.row_values(levels).min())

    def exact_alpha(self, levels) -> float:
        """Worst sampled gain evaluated directly from the steering rows."""
        if self.steering is None:
            return self.alpha(levels)
        w = np.exp(1j * self.alphabet.levels)[np.asarray(levels, dtype=int)]
        return float(sampled_gains(self.steering, w[None, :]).min())

    def lp_data(self):
        """Dense LP data of the relaxation over ``[x, y, alpha]``.

        Returns ``(c, A_ub, b_ub, A_eq, b_eq, n_x, n_y)`` for ``linprog``
        (minimizing ``-alpha``).
        """
        Q, S = self.n_elements, self.alphabet.levels_count
        U, K, P = 2 * S - 1, len(self.pairs), self.n_rows
        n_x, n_y = Q * S, K * U
        n = n_x + n_y + 1
        c = np.zeros(n)
        c[-1] = -1.0
        # alpha - row_p(y) <= row_const_p
        A_ub = np.zeros((P, n))
        A_ub[:, n_x:n_x + n_y] = -self.coef.reshape(P, n_y)
        A_ub[:, -1] = 1.0
        b_ub = self.row_const.copy()
        rows, rhs = [], []
        for q in range(Q):
            r = np.zeros(n)
            r[q * S:(q + 1) * S] = 1.0
            rows.append(r)
            rhs.append(1.0)
        abar, a = self.alphabet.levels, self.alphabet.differences
        for k, (q, i) in enumerate(self.pairs):
            sl = slice(n_x + k * U, n_x + (k + 1) * U)
            r = np.zeros(n)
            r[sl] = 1.0
            rows.append(r)
            rhs.append(1.0)
            r = np.zeros(n)
            r[q * S:(q + 1) * S] += abar
            r[i * S:(i + 1) * S] -= abar
            r[sl] = -a
            rows.append(r)
            rhs.append(0.0)
        return c, A_ub, b_ub, np.array(rows), np.array(rhs), n_x, n_y


def build_discrete_program(
    geom: IrsGeometry, samples: SampleSet, alphabet: PhaseAlphabet
) -> DiscreteProgram:
    pts = samples.pairs()
    a = steering_vector(geom, pts[:, 0], pts[:, 1])
    return program_from_steering(a, alphabet)


def program_from_steering(a: np.ndarray, alphabet: PhaseAlphabet) -> DiscreteProgram:
    """Build the program from steering rows ``a`` of shape ``(P, Q)``."""
    a = np.atleast_2d(a)
    P, Q = a.shape
    A = a[:, :, None] * a.conj()[:, None, :]
    mag = np.abs(A)
    if not np.allclose(mag, 1.0, rtol=0, atol=1e-12):
        raise ValueError("steering-derived constraint matrices must have unit-modulus entries")
    ang = np.angle(A)
    q_idx, i_idx = np.triu_indices(Q, k=1)
    pairs = np.column_stack([q_idx, i_idx])
    c, s = alphabet.cos, alphabet.sin
    m = mag[:, q_idx, i_idx, None]
    th = ang[:, q_idx, i_idx, None]
    coef_qi = m * (np.cos(th) * c - np.sin(th) * s)
    # y_{i,q} is y_{q,i} reversed and A_iq = conj(A_qi)
    coef_iq = m * (np.cos(-th) * c - np.sin(-th) * s)
    coef = coef_qi + coef_iq[:, :, ::-1]
    row_const = np.einsum("pqq->p", mag)

    warm = []
    for phases in [np.angle(a.mean(axis=0))] + [np.angle(row) for row in a]:
        lv = alphabet.quantize(-phases)
        warm.append(np.mod(lv - lv[0], alphabet.levels_count))
    return DiscreteProgram(alphabet, Q, pairs, coef, row_const, warm, a)


@dataclass
class BnbResult:
    assignment: BinaryAssignment
    alpha: float
    bound: float
    status: str
    nodes: int
    levels: np.ndarray


def _local_search(program: DiscreteProgram, levels: np.ndarray) -> np.ndarray:
    """Single-element improvement moves, gauge element fixed."""
    S = program.alphabet.levels_count
    levels = levels.copy()
    best = program.alpha(levels)
    improved = True
    while improved:
        improved = False
        for q in range(1, program.n_elements):
            for lv in range(S):
                if lv == levels[q]:
                    continue
                trial = levels.copy()
                trial[q] = lv
                val = program.alpha(trial)
                if val > best + 1e-12:
                    best, levels, improved = val, trial, True
    return levels


def _incumbent(program: DiscreteProgram) -> tuple[np.ndarray, float]:
    best_lv, best = None, -np.inf
    for lv in program.warm_levels:
        lv = _local_search(program, np.asarray(lv, dtype=int))
        val = program.alpha(lv)
        if val > best:
            best_lv, best = lv, val
    return best_lv, best


def solve_exact_bnb(program: DiscreteProgram, cfg: Optional[BnbConfig] = None) -> BnbResult:
    """Maximize the worst C1 row over integral assignments with ``nu_0 = 0``.

    Returns a provably optimal assignment (bound minus incumbent at most
    ``gap_tolerance``) or, when the node limit is hit, the incumbent with
    status ``"node_limit"`` and the best remaining bound.
    """
    cfg = cfg or BnbConfig()
    Q = program.n_elements
    alphabet = program.alphabet
    if Q == 1:
        lv = np.zeros(1, dtype=int)
        val = program.exact_alpha(lv)
        return BnbResult(BinaryAssignment.from_levels(lv, alphabet), val, val, "optimal", 1, lv)
    if cfg.branching == "lp":
        levels, alpha, bound, status, nodes = _bnb_lp(program, cfg)
    else:
        levels, alpha, bound, status, nodes = _bnb_rows(program, cfg)
    alpha = program.exact_alpha(levels)
    return BnbResult(BinaryAssignment.from_levels(levels, alphabet), alpha, max(bound, alpha), status, nodes, levels)


def _bnb_rows(program: DiscreteProgram, cfg: BnbConfig):
    """Depth-first search over element levels with row-decomposition bounds.

    At a node with elements ``0..k-1`` fixed, each C1 row splits into fixed
    pairs (known), fixed-free pairs (bounded by the best level of each free
    element on its own) and free-free pairs (bounded by their largest
    coefficient). The node bound is the minimum over rows.
    """
    Q, S = program.n_elements, program.alphabet.levels_count
    table = program.pair_table()  # (P, Q, Q, U)
    P = table.shape[0]
    lv_idx = np.arange(S)
    # contrib[k][l, p, i, l'] = coefficient of pair (k, i) for levels (l, l'), i > k
    contrib = []
    for k in range(Q):
        u = lv_idx[:, None] - lv_idx[None, :] + S - 1  # (l, l')
        contrib.append(np.transpose(table[:, k, k + 1:, :][:, :, u], (2, 0, 1, 3)))
    pair_max = table.max(axis=3)
    # free_free[p, k] bounds the pairs with both ends in {k, ..., Q-1}
    free_free = np.zeros((P, Q + 1))
    for k in range(Q - 1, -1, -1):
        free_free[:, k] = free_free[:, k + 1] + pair_max[:, k, k + 1:].sum(axis=1)

    inc_levels, incumbent = _incumbent(program)
    gap = cfg.gap_tolerance

    root_fixed = program.row_const.copy()
    root_cross = np.zeros((P, Q, S))
    # element 0 fixed at level 0
    fixed0 = root_fixed
    cross0 = root_cross[:, 1:, :] + contrib[0][0]
    bound0 = float(np.min(fixed0 + cross0.max(axis=2).sum(axis=1) + free_free[:, 1]))
    stack = [(bound0, 1, (0,), fixed0, cross0)]
    nodes = 1
    status = "optimal"
    while stack:
        bound, k, levels, fixed, cross = stack.pop()
        if bound <= incumbent + gap:
            continue
        if nodes >= cfg.node_limit:
            stack.append((bound, k, levels, fixed, cross))
            status = "node_limit"
            break
        # expand element k over all levels: cross[:, 0, :] is element k
        child_fixed = fixed[None, :] + cross[:, 0, :].T  # (S, P)
        if k == Q - 1:
            vals = child_fixed.min(axis=1)
            nodes += S
            l_best = int(np.argmax(vals))
            if vals[l_best] > incumbent:
                incumbent = float(vals[l_best])
                inc_levels = np.array(levels + (l_best,))
            continue
        child_cross = cross[None, :, 1:, :] + contrib[k][:, :, :, :]  # (S, P, F-1, S)
        child_bounds = np.min(
            child_fixed + child_cross.max(axis=3).sum(axis=2) + free_free[None, :, k + 1], axis=1
        )
        nodes += S
        # push worst first so the best-bound child is explored next
        order = sorted(range(S), key=lambda lv: (child_bounds[lv], -lv))
        for lv in order:
            if child_bounds[lv] > incumbent + gap:
                stack.append(
                    (float(child_bounds[lv]), k + 1, levels + (lv,), child_fixed[lv], child_cross[lv])
                )
    if status == "optimal":
        bound = incumbent
    else:
        bound = max([incumbent] + [b for b, *_ in stack])
    return inc_levels, program.alpha(inc_levels), bound, status, nodes


def _bnb_lp(program: DiscreteProgram, cfg: BnbConfig):
    """Branch and bound on the LP relaxation (binaries in [0, 1]).

    Branches on the most fractional ``x`` entry, depth-first, exploring the
    child with the better relaxation bound first.
    """
    Q, S = program.n_elements, program.alphabet.levels_count
    c, A_ub, b_ub, A_eq, b_eq, n_x, n_y = program.lp_data()
    n = c.size
    base_lo = np.zeros(n)
    base_hi = np.ones(n)
    base_lo[-1], base_hi[-1] = -np.inf, np.inf
    base_lo[0] = 1.0  # gauge: element 0 at level 0

    def relax(lo, hi):
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=np.column_stack([lo, hi]), method="highs")
        if res.status != 0:
            return None, -np.inf
        return res.x, -res.fun

    inc_levels, incumbent = _incumbent(program)
    gap = cfg.gap_tolerance
    x0, b0 = relax(base_lo, base_hi)
    stack = [] if x0 is None else [(b0, base_lo, base_hi, x0)]
    nodes = 1
    status = "optimal"
    while stack:
        bound, lo, hi, sol = stack.pop()
        if bound <= incumbent + gap:
            continue
        binaries = sol[:n_x + n_y]
        frac = np.abs(binaries - np.round(binaries))
        if frac.max() < 1e-9:
            lv = np.argmax(sol[:n_x].reshape(Q, S), axis=1)
            val = program.alpha(lv)
            if val > incumbent:
                incumbent, inc_levels = val, lv
            continue
        if nodes >= cfg.node_limit:
            stack.append((bound, lo, hi, sol))
            status = "node_limit"
            break
        # most fractional x entry; y only once every x is integral, since an
        # integral x with fractional y still hides other integer points
        score = -np.abs(binaries - 0.5)
        x_frac = frac[:n_x] >= 1e-9
        j = int(np.argmax(np.where(x_frac, score[:n_x], -np.inf))) if x_frac.any() else int(
            n_x + np.argmax(np.where(frac[n_x:] >= 1e-9, score[n_x:], -np.inf))
        )
        children = []
        for val in (1.0, 0.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = val
            xs, b = relax(clo, chi)
            nodes += 1
            if xs is not None and b > incumbent + gap:
                children.append((b, clo, chi, xs))
        children.sort(key=lambda ch: ch[0])
        stack.extend(children)
    bound = incumbent if status == "optimal" else max([incumbent] + [b for b, *_ in stack])
    return np.asarray(inc_levels), program.alpha(inc_levels), bound, status, nodes


def assignment_to_codeword(
    assignment: BinaryAssignment, alphabet: PhaseAlphabet, achieved_alpha: float = float("nan")
) -> Codeword:
    assignment.check(alphabet)
    phases = np.asarray(assignment.x, dtype=float) @ alphabet.levels
    return Codeword(phases, alphabet.bits, achieved_alpha)


def codeword_to_assignment(codeword: Codeword, alphabet: PhaseAlphabet) -> BinaryAssignment:
    if codeword.bits != alphabet.bits:
        raise ValueError("codeword is not on this alphabet")
    return BinaryAssignment.from_levels(alphabet.quantize(codeword.phases), alphabet)


def sampled_gains(steering: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """|w^T a_p|**2 for weight rows ``(N, Q)`` and steering rows ``(P, Q)``.

    Sums elementwise products in a fixed order, so a given weight vector
    gets bitwise the same gains whatever the batch size.
    """
    prod = np.asarray(weights)[:, :, None] * steering.T[None, :, :]
    return np.abs(prod.sum(axis=1)) ** 2


def enumerate_oracle(
    geom: IrsGeometry, samples: SampleSet, alphabet: PhaseAlphabet, *, chunk: int = 1 << 15
) -> tuple[np.ndarray, float]:
    """Exhaustive search over all gauge-fixed phase vectors.

    Evaluates gains directly from steering vectors. Ties go to the lowest
    lexicographic level vector.
    """
    Q, S = geom.n_elements, alphabet.levels_count
    if S ** (Q - 1) > ORACLE_LIMIT:
        raise InstanceTooLarge(f"{S}**{Q - 1} assignments exceed the oracle limit {ORACLE_LIMIT}")
    pts = samples.pairs()
    a = steering_vector(geom, pts[:, 0], pts[:, 1])  # (P, Q)
    phasors = np.exp(1j * alphabet.levels)
    best_val, best_idx = -np.inf, None
    total = S ** (Q - 1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        # lexicographic digits, most significant first
        digits = np.zeros((idx.size, Q), dtype=int)
        rem = idx.copy()
        for pos in range(Q - 1, 0, -1):
            digits[:, pos] = rem % S
            rem //= S
        gains = sampled_gains(a, phasors[digits])
        vals = gains.min(axis=1)
        top = vals.max()
        # values within rounding of the maximum count as ties
        j = int(np.argmax(vals >= top - TIE_TOL * max(1.0, abs(top))))
        if best_idx is None or vals[j] > best_val + TIE_TOL * max(1.0, abs(best_val)):
            best_val, best_idx = float(vals[j]), digits[j]
    return alphabet.levels[best_idx], best_val


def quantized_steering_levels(geom: IrsGeometry, samples: SampleSet, alphabet: PhaseAlphabet):
    """Conjugate steering towards the sample-set center, rounded to the alphabet."""
    cy = 0.5 * (samples.points_y[0] + samples.points_y[-1])
    cz = 0.5 * (samples.points_z[0] + samples.points_z[-1])
    lv = alphabet.quantize(-np.angle(steering_vector(geom, cy, cz)))
    return np.mod(lv - lv[0], alphabet.levels_count)


def brute_force_levels(n_elements: int, levels_count: int):
    """Iterate gauge-fixed level vectors in lexicographic order (tests, small sizes)."""
    for tail in itertools.product(range(levels_count), repeat=n_elements - 1):
        yield np.array((0,) + tail)
