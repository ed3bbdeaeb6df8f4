"""Pattern metrics, coverage maps and the link-budget Monte Carlo."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .array_model import (
    IrsGeometry,
    direction_cosines_array,
    free_space_factor,
    gain_pattern,
    response_grid,
    to_db,
)
from .codebook import Codebook, codebook_steering_gains

P_REQ_CAP_W = 1e6
DB_FLOOR = 1e-30
SAMPLERS = ("beta-uniform", "angle-uniform")


def dbm(watts) -> np.ndarray:
    """10*log10(p / 1 mW)."""
    return 10.0 * np.log10(np.asarray(watts, dtype=float) / 1e-3)


@dataclass(frozen=True)
class LinkBudget:
    """Required SNR (linear), noise power (W), carrier (Hz) and link distances (m)."""

    gamma_req: float
    noise_power: float
    frequency: float
    d1: float
    d2: float

    def __post_init__(self):
        for name in ("gamma_req", "noise_power", "frequency", "d1", "d2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")

    @classmethod
    def from_engineering(
        cls,
        gamma_db: float,
        freq_ghz: float,
        d1: float,
        d2: float,
        bw_mhz: float,
        noise_dbm_hz: float,
    ) -> "LinkBudget":
        noise = 10.0 ** ((noise_dbm_hz - 30.0) / 10.0) * bw_mhz * 1e6
        return cls(10.0 ** (gamma_db / 10.0), noise, freq_ghz * 1e9, d1, d2)

    @property
    def pl_t(self) -> float:
        return free_space_factor(self.d1, self.frequency)

    @property
    def pl_r(self) -> float:
        return free_space_factor(self.d2, self.frequency)

    def _scale(self, geom: IrsGeometry) -> float:
        return self.gamma_req * self.noise_power / (geom.gain_factor**2 * self.pl_t * self.pl_r)

    def power_for_gain(self, geom: IrsGeometry, gain) -> np.ndarray:
        """Transmit power reaching ``gamma_req`` for normalized gain(s) |w^T a|**2, capped."""
        scale = self._scale(geom)
        gain = np.asarray(gain, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            p = np.where(gain > 0, scale / np.where(gain > 0, gain, 1.0), np.inf)
        return np.minimum(p, P_REQ_CAP_W)

    def p_req_full(self, geom: IrsGeometry) -> float:
        """Bound with fully controllable phases (gain Q**2); never capped."""
        return self._scale(geom) / float(geom.n_elements) ** 2

    def p_req_ideal(self, geom: IrsGeometry, m: int) -> float:
        """Idealized M-codeword bound (gain Q*M)."""
        return self._scale(geom) / (float(geom.n_elements) * m)


@dataclass
class MonteCarloConfig:
    n_trials: int = 10_000
    rng_seed: int = 0
    sampler: str = "beta-uniform"

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")


def best_codeword(gains: np.ndarray) -> np.ndarray:
    """Index of the strongest codeword per row; ties go to the lowest index."""
    return np.argmax(gains, axis=-1)


def required_power(codebook: Codebook, beta_y, beta_z, budget: LinkBudget):
    """Required transmit power (W) and the selected codeword per direction.

    Powers at pattern nulls are capped at ``P_REQ_CAP_W``.
    """
    if codebook.size == 0:
        raise ValueError("codebook is empty")
    by, bz = np.broadcast_arrays(np.atleast_1d(beta_y), np.atleast_1d(beta_z))
    gains = codebook_steering_gains(codebook, by.ravel(), bz.ravel())
    idx = best_codeword(gains)
    best = gains[np.arange(gains.shape[0]), idx]
    p = budget.power_for_gain(codebook.geometry, best)
    return p.reshape(by.shape), idx.reshape(by.shape)


def draw_directions(geom: IrsGeometry, mc: MonteCarloConfig, span_y: float, span_z: float):
    """Per-trial effective directions from independent ``(seed, trial)`` streams."""
    out = np.empty((mc.n_trials, 2))
    for t in range(mc.n_trials):
        rng = np.random.default_rng((mc.rng_seed, t))
        if mc.sampler == "beta-uniform":
            out[t] = rng.uniform(-0.5, 0.5, 2) * (span_y, span_z)
        else:
            th = rng.uniform(0.0, np.pi, 2)
            ph = rng.uniform(-np.pi, np.pi, 2)
            out[t] = direction_cosines_array(th[0], ph[0], th[1], ph[1])
    return out[:, 0], out[:, 1]


TRADEOFF_COLUMNS = (
    "designer",
    "M",
    "mean_p_req_w",
    "mean_p_req_dbm",
    "p_req_f_w",
    "p_req_f_dbm",
    "p_req_i_w",
    "p_req_i_dbm",
    "capped_fraction",
    "stderr_w",
)


def power_tradeoff_curve(codebooks: dict, budget: LinkBudget, mc: MonteCarloConfig) -> list:
    """Mean required power per (designer, M) codebook.

    Args:
        codebooks: mapping ``(designer, M) -> Codebook``, all on the same
            geometry and covered range.

    Every codebook sees the same direction draws.
    """
    if not codebooks:
        return []
    first = next(iter(codebooks.values()))
    geom, grid = first.geometry, first.grid
    by, bz = draw_directions(geom, mc, grid.beta_bar_y, grid.beta_bar_z)
    rows = []
    for (designer, m), cb in codebooks.items():
        p, _ = required_power(cb, by, bz, budget)
        mean = float(p.mean())
        pf, pi = budget.p_req_full(geom), budget.p_req_ideal(geom, m)
        rows.append({
            "designer": designer,
            "M": int(m),
            "mean_p_req_w": mean,
            "mean_p_req_dbm": float(dbm(mean)),
            "p_req_f_w": pf,
            "p_req_f_dbm": float(dbm(pf)),
            "p_req_i_w": pi,
            "p_req_i_dbm": float(dbm(pi)),
            "capped_fraction": float(np.mean(p >= P_REQ_CAP_W)),
            "stderr_w": float(p.std(ddof=1) / np.sqrt(p.size)) if p.size > 1 else 0.0,
        })
    return rows


def _axis_in_interval(fine: np.ndarray, lo: float, hi: float) -> np.ndarray:
    inside = fine[(fine >= lo) & (fine <= hi)]
    return np.unique(np.concatenate([inside, [lo, hi]]))


def pattern_metrics(geom: IrsGeometry, codeword, interval, fine_y, fine_z) -> dict:
    """Coverage metrics of one codeword over its interval.

    ``fine_y``/``fine_z`` are the evaluation axes over the covered range; each
    needs at least ``4*Q_t`` points. In-interval statistics use the fine
    points inside the closed interval plus its edges. The peak sidelobe is
    the largest gain outside the interval dilated by one fine-grid cell,
    relative to the in-interval peak (floored at -300 dB).
    """
    fine_y = np.sort(np.asarray(fine_y, dtype=float).ravel())
    fine_z = np.sort(np.asarray(fine_z, dtype=float).ravel())
    if fine_y.size == 0 or fine_z.size == 0:
        raise ValueError("evaluation grid is empty")
    if fine_y.size < 4 * geom.q_y or fine_z.size < 4 * geom.q_z:
        raise ValueError("evaluation grid needs at least 4*Q_t points per axis")
    (ly, hy), (lz, hz) = interval
    in_y, in_z = _axis_in_interval(fine_y, ly, hy), _axis_in_interval(fine_z, lz, hz)
    g_in = gain_pattern(geom, codeword, in_y, in_z)
    peak_in = float(g_in.max())

    cell_y = np.diff(fine_y).max() if fine_y.size > 1 else 0.0
    cell_z = np.diff(fine_z).max() if fine_z.size > 1 else 0.0
    g_all = gain_pattern(geom, codeword, fine_y, fine_z)
    out_y = (fine_y < ly - cell_y) | (fine_y > hy + cell_y)
    out_z = (fine_z < lz - cell_z) | (fine_z > hz + cell_z)
    outside = out_y[:, None] | out_z[None, :]
    side = float(g_all[outside].max()) if outside.any() else 0.0
    return {
        "min_in_interval_gain": float(g_in.min()),
        "mean_in_interval_gain": float(g_in.mean()),
        "max_in_interval_gain": peak_in,
        "ripple_db": float(to_db(peak_in, DB_FLOOR) - to_db(g_in.min(), DB_FLOOR)),
        "peak_sidelobe_db": float(to_db(max(side, DB_FLOOR * peak_in) / peak_in, DB_FLOOR)),
    }


def axis_samples(span: float, resolution: int) -> np.ndarray:
    """``resolution`` evenly spaced points over ``[-span/2, span/2]`` (center if 1)."""
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    if resolution == 1:
        return np.zeros(1)
    return np.linspace(-span / 2, span / 2, resolution)


def heatmap(codebook: Codebook, resolution: int, per_codeword: bool = False):
    """Composite coverage map ``max_m |g_m|**2 / Q**2`` in dB.

    Returns ``(beta_y, beta_z, composite)`` and, with ``per_codeword``, an
    extra ``(M, n_y, n_z)`` stack of the individual maps.
    """
    geom, grid = codebook.geometry, codebook.grid
    by = axis_samples(grid.beta_bar_y, resolution)
    bz = axis_samples(grid.beta_bar_z, resolution)
    maps = np.stack([
        np.abs(response_grid(geom, cw, by, bz)) ** 2 / geom.n_elements**2 for cw in codebook.codewords
    ])
    composite = to_db(maps.max(axis=0), DB_FLOOR)
    if per_codeword:
        return by, bz, composite, to_db(maps, DB_FLOOR)
    return by, bz, composite


def pattern_cut(codebook: Codebook, axis: str, resolution: int, cut_value: float = 0.0):
    """Normalized gain (dB re Q**2) of every codeword along one axis."""
    geom, grid = codebook.geometry, codebook.grid
    if axis == "y":
        beta = axis_samples(grid.beta_bar_y, resolution)
        fixed = np.array([cut_value])
        gains = [gain_pattern(geom, cw, beta, fixed, normalize=True, db=True)[:, 0] for cw in codebook.codewords]
    elif axis == "z":
        beta = axis_samples(grid.beta_bar_z, resolution)
        fixed = np.array([cut_value])
        gains = [gain_pattern(geom, cw, fixed, beta, normalize=True, db=True)[0] for cw in codebook.codewords]
    else:
        raise ValueError("axis must be 'y' or 'z'")
    return beta, np.stack(gains, axis=1)


# CSV writers: every float goes through repr-precision formatting so that
# equal inputs give byte-identical files.

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write(path, rows, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def write_pattern_csv(path, codebook: Codebook, axis: str, resolution: int, cut_value: float = 0.0) -> str:
    beta, gains = pattern_cut(codebook, axis, resolution, cut_value)
    header = [f"beta_{axis}"] + [f"gain_db_{my}_{mz}" for my, mz in codebook.indices]
    rows = [header] + [[b, *g] for b, g in zip(beta, gains)]
    return _write(path, rows)


def write_tradeoff_csv(path, rows: list) -> str:
    return _write(path, [list(TRADEOFF_COLUMNS)] + [[r[c] for c in TRADEOFF_COLUMNS] for r in rows])


def write_heatmap_csv(path, codebook: Codebook, resolution: int) -> str:
    by, bz, comp = heatmap(codebook, resolution)
    header = (
        f"beta_y {_fmt(by[0])} {_fmt(by[-1])} beta_z {_fmt(bz[0])} {_fmt(bz[-1])}",
        f"resolution {resolution} {resolution} rows beta_y cols beta_z unit dB",
    )
    return _write(path, comp.tolist(), header)


def tradeoff_codebooks(geom, designers, m_values, opts=None, *, jobs: int = 1) -> dict:
    """Build square-grid codebooks ``(designer, M)`` for the trade-off curve."""
    from .codebook import generate_codebook
    from .grid import build_grid

    out = {}
    for designer in designers:
        for m in m_values:
            side = int(round(np.sqrt(m)))
            if side * side != m:
                raise ValueError(f"M={m} is not a square grid size")
            grid = build_grid(geom, side, side)
            out[(designer, m)] = generate_codebook(geom, grid, designer, opts, jobs=jobs)
    return out
