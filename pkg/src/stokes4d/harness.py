"""Monte Carlo experiment engine.

Blocks are the unit of work and of parallelism: each block draws its own
rotation, symbols and noise from a counter-based stream keyed by
(seed, experiment kind, SNR point, block index), so results are byte-identical
for any worker count and any batch schedule.  Detection is vectorized across
the blocks of a batch; the early-stopping rule is evaluated on batch-index
prefixes only, which keeps it scheduler-independent.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .channel import (
    ChannelMatrix,
    JonesPair,
    add_noise,
    apply_channel,
    fading_coefficient_entries,
    sample_channel,
    sample_diagonal_channel,
)
from .constellation import (
    RingPhaseConstellation,
    build_constellation,
    db_to_linear,
    snr_to_noise_sigma_sq,
)
from .detection import MappedAlphabet, bessel_penalty
from .errors import ConfigError, UnbracketedTargetError

DETECTORS = ("sym", "seq", "suc")
MODES = ("exact", "high_snr")
CHANNEL_MODES = ("random", "b_zero", "fixed")
FEEDBACK_MODES = ("decision", "genie")

_KIND_SER = 0
_KIND_RATE = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One resolved experiment: a single constellation and a sweep grid."""

    n_r: int
    n_p: int
    r1: float
    delta_sq: float
    snr_db: Tuple[float, ...]
    block_len: int = 64
    max_blocks: int = 20000
    target_errors: int = 100
    batch_blocks: int = 256
    detectors: Tuple[str, ...] = ("sym",)
    modes: Tuple[str, ...] = ("exact",)
    channel_mode: str = "random"
    channel_a: complex = 1.0 + 0.0j
    channel_b: complex = 0.0 + 0.0j
    feedback: str = "decision"
    seed: int = 0
    threads: int = 1
    rate_max_blocks: int = 400
    gap_target_ser: float = 1e-3
    gap_baseline: str = "sym"
    gap_candidate: str = "suc"

    def validate(self) -> "ExperimentConfig":
        if not self.snr_db:
            raise ConfigError("SNR grid is empty")
        if self.block_len < 1:
            raise ConfigError("block length must be >= 1")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ConfigError(f"unknown detector {d!r}")
        for m in self.modes:
            if m not in MODES:
                raise ConfigError(f"unknown mode {m!r}")
        if self.channel_mode not in CHANNEL_MODES:
            raise ConfigError(f"unknown channel mode {self.channel_mode!r}")
        if self.feedback not in FEEDBACK_MODES:
            raise ConfigError(f"unknown feedback mode {self.feedback!r}")
        if self.max_blocks < 1 or self.batch_blocks < 1:
            raise ConfigError("block budgets must be positive")
        if self.threads < 1:
            raise ConfigError("thread count must be positive")
        try:
            if self.channel_mode == "fixed":
                ChannelMatrix(self.channel_a, self.channel_b)
            self.constellation()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def constellation(self) -> RingPhaseConstellation:
        return build_constellation(self.n_r, self.n_p, self.r1, self.delta_sq)

    def variants(self) -> List[Tuple[str, str]]:
        return [(d, m) for d in self.detectors for m in self.modes]


@dataclass(frozen=True)
class SerPoint:
    """Per-dimension symbol-error tallies of one detector at one SNR."""

    snr_db: float
    detector: str
    mode: str
    errors: Tuple[int, int, int, int]
    trials: int
    ser: Tuple[float, float, float, float]
    ci_low: Tuple[float, float, float, float]
    ci_high: Tuple[float, float, float, float]


@dataclass(frozen=True)
class RatePoint:
    """Monte Carlo mutual-information estimate at one SNR."""

    snr_db: float
    rate_bits: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class GapEntry:
    dimension: int
    target_ser: float
    snr_db_base: float
    snr_db_candidate: float
    gap_db: float


def block_rng(seed: int, kind: int, point_idx: int, block_idx: int) -> np.random.Generator:
    """Counter-based stream for one block; independent of scheduling."""
    sid = (kind << 60) | (point_idx << 40) | block_idx
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, sid & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_channel(config: ExperimentConfig, rng: np.random.Generator) -> ChannelMatrix:
    if config.channel_mode == "random":
        return sample_channel(rng)
    if config.channel_mode == "b_zero":
        return sample_diagonal_channel(rng)
    return ChannelMatrix(config.channel_a, config.channel_b)


@dataclass
class BlockSim:
    """One simulated block: transmitted indices and receiver observables.

    Index arrays cover the ``n`` data slots; observables are the per-slot
    received amplitudes and phase differences, with ``dmy`` the previous
    slot's received Y amplitude (the pilot slot for j = 0).
    """

    h: ChannelMatrix
    rings_x: np.ndarray
    rings_y: np.ndarray
    theta_idx: np.ndarray
    gamma_idx: np.ndarray
    rmx: np.ndarray
    rmy: np.ndarray
    th2: np.ndarray
    gm2: np.ndarray
    dmy: np.ndarray


def simulate_block(
    constellation: RingPhaseConstellation,
    h: ChannelMatrix,
    n: int,
    sigma_sq: float,
    rng: np.random.Generator,
) -> BlockSim:
    """Transmit a pilot plus ``n`` uniform data symbols through ``h`` and
    noise, and compute the receiver observables.

    Draw order per block is fixed: ring indices (n, 2), phase indices (n, 2),
    then the noise samples; changing detectors never changes the stream.
    """
    c = constellation
    rings = rng.integers(0, c.n_r, size=(n, 2))
    phases = rng.integers(0, c.n_p, size=(n, 2))
    theta = c.phases[phases[:, 0]]
    gamma = c.phases[phases[:, 1]]
    # differential encoding: the X phase of slot j is gamma[j] plus the
    # previous Y phase; the Y phase trails it by theta[j]
    phi_y = np.cumsum(gamma - theta)
    phi_x = phi_y + theta
    e_x = np.concatenate(([complex(c.r1)], c.radii[rings[:, 0]] * np.exp(1j * phi_x)))
    e_y = np.concatenate(([complex(c.r1)], c.radii[rings[:, 1]] * np.exp(1j * phi_y)))
    k = apply_channel(h, JonesPair(e_x, e_y))
    r = add_noise(k, sigma_sq, rng)
    rx, ry = r.x, r.y
    return BlockSim(
        h=h,
        rings_x=rings[:, 0],
        rings_y=rings[:, 1],
        theta_idx=phases[:, 0],
        gamma_idx=phases[:, 1],
        rmx=np.abs(rx[1:]),
        rmy=np.abs(ry[1:]),
        th2=np.angle(rx[1:] * np.conj(ry[1:])),
        gm2=np.angle(rx[1:] * np.conj(ry[:-1])),
        dmy=np.abs(ry[:-1]),
    )


class _Batch:
    """Stacked per-block alphabets and observables for vectorized detection."""

    def __init__(self, constellation: RingPhaseConstellation, blocks: List[BlockSim]):
        self.constellation = constellation
        self.blocks = blocks
        alphabets = [MappedAlphabet(constellation, b.h) for b in blocks]
        ref = alphabets[0]
        self.e_mag_x = ref.e_mag_x
        self.e_mag_y = ref.e_mag_y
        self.e_theta = ref.e_theta
        self.gamma_grid = ref.gamma_grid
        self.pilot_sym3 = ref.pilot_sym3
        self.S = ref.sym3_count
        self.P = ref.gamma_count
        self.kmx = np.stack([a.k_mag_x for a in alphabets])  # (B, S)
        self.kmy = np.stack([a.k_mag_y for a in alphabets])
        self.thk = np.stack([a.k_theta for a in alphabets])
        self.a = np.array([b.h.a for b in blocks])
        self.b = np.array([b.h.b for b in blocks])
        self.rmx = np.stack([b.rmx for b in blocks])  # (B, n)
        self.rmy = np.stack([b.rmy for b in blocks])
        self.th2 = np.stack([b.th2 for b in blocks])
        self.gm2 = np.stack([b.gm2 for b in blocks])
        self.dmy = np.stack([b.dmy for b in blocks])
        c = constellation
        self.true_sym3 = (
            np.stack([b.rings_x for b in blocks]) * c.n_r
            + np.stack([b.rings_y for b in blocks])
        ) * c.n_p + np.stack([b.theta_idx for b in blocks])
        self.true_gamma = np.stack([b.gamma_idx for b in blocks])

    @property
    def B(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return self.rmx.shape[1]

    def arg_c_from(self, prev_sym3: np.ndarray) -> np.ndarray:
        """(B, S) fading-coefficient arguments given per-block previous sym3."""
        cur = (self.e_mag_x[None, :], self.e_mag_y[None, :], self.e_theta[None, :])
        prev = (
            self.e_mag_x[prev_sym3][:, None],
            self.e_mag_y[prev_sym3][:, None],
            self.e_theta[prev_sym3][:, None],
        )
        return np.angle(
            fading_coefficient_entries(self.a[:, None], self.b[:, None], cur, prev)
        )

    def split_sym3(self, s: np.ndarray):
        c = self.constellation
        t = s % c.n_p
        rest = s // c.n_p
        return rest // c.n_r, rest % c.n_r, t


def _slot_scores(batch: _Batch, j: int, prev_sym3: np.ndarray, sigma_sq: float, mode: str):
    """Objective values of every (sym3, gamma) candidate at slot j: (B, S, P)."""
    z2 = batch.kmx * batch.rmx[:, j, None] + batch.kmy * batch.rmy[:, j, None] * np.exp(
        1j * (batch.thk - batch.th2[:, j, None])
    )
    dk3 = batch.kmy[np.arange(batch.B), prev_sym3]
    t3 = dk3 * batch.dmy[:, j]
    u = batch.arg_c_from(prev_sym3) - batch.gm2[:, j, None]  # (B, S)
    cos_g, sin_g = np.cos(batch.gamma_grid), np.sin(batch.gamma_grid)
    cu, su = np.cos(u), np.sin(u)
    # cos/sin of (gamma_grid + u) without materializing the angle grid
    cos_xi = cu[:, :, None] * cos_g - su[:, :, None] * sin_g
    sin_xi = su[:, :, None] * cos_g + cu[:, :, None] * sin_g
    corr_sq = (
        (np.abs(z2) ** 2)[:, :, None]
        + (t3**2)[:, None, None]
        + 2.0
        * t3[:, None, None]
        * (z2.real[:, :, None] * cos_xi + z2.imag[:, :, None] * sin_xi)
    )
    corr = np.sqrt(np.clip(corr_sq, 0.0, None))
    norm = (batch.kmx**2 + batch.kmy**2)[:, :, None] + (dk3**2)[:, None, None]
    if mode == "exact":
        return norm - bessel_penalty(corr, sigma_sq)
    return norm - 2.0 * corr


def detect_sym_batch(batch: _Batch, sigma_sq: float, mode: str, feedback: str):
    """Symbol-by-symbol decisions for every block and slot: (B, n) index pairs."""
    B, n, P = batch.B, batch.n, batch.P
    s_dec = np.empty((B, n), dtype=np.int64)
    g_dec = np.empty((B, n), dtype=np.int64)
    prev = np.full(B, batch.pilot_sym3, dtype=np.int64)
    for j in range(n):
        scores = _slot_scores(batch, j, prev, sigma_sq, mode)
        pick = np.argmin(scores.reshape(B, -1), axis=1)
        s_dec[:, j] = pick // P
        g_dec[:, j] = pick % P
        prev = s_dec[:, j] if feedback == "decision" else batch.true_sym3[:, j]
    return s_dec, g_dec


def detect_suc_batch(batch: _Batch, sigma_sq: float, mode: str, feedback: str):
    """Successive decisions (step 1 over sym3, step 2 over gamma) per slot."""
    B, n = batch.B, batch.n
    s_dec = np.empty((B, n), dtype=np.int64)
    g_dec = np.empty((B, n), dtype=np.int64)
    prev = np.full(B, batch.pilot_sym3, dtype=np.int64)
    rows = np.arange(B)
    for j in range(n):
        z2 = batch.kmx * batch.rmx[:, j, None] + batch.kmy * batch.rmy[
            :, j, None
        ] * np.exp(1j * (batch.thk - batch.th2[:, j, None]))
        norm_hat = batch.kmx**2 + batch.kmy**2
        if mode == "exact":
            step1 = norm_hat - bessel_penalty(np.abs(z2), sigma_sq)
        else:
            step1 = norm_hat - 2.0 * np.abs(z2)
        s = np.argmin(step1, axis=1)
        alpha = np.angle(z2[rows, s])
        arg_c = batch.arg_c_from(prev)[rows, s]
        fit = np.cos(
            batch.gamma_grid[None, :]
            + (arg_c - batch.gm2[:, j] - alpha)[:, None]
        )
        g = np.argmax(fit, axis=1)
        s_dec[:, j] = s
        g_dec[:, j] = g
        prev = s if feedback == "decision" else batch.true_sym3[:, j]
    return s_dec, g_dec


def detect_seq_batch(batch: _Batch, sigma_sq: float, mode: str):
    """Viterbi over each block (state = previous slot's sym3), vectorized
    across the batch."""
    B, n, S, P = batch.B, batch.n, batch.S, batch.P
    metric = np.zeros((B, 1))
    active = np.full((B, 1), batch.pilot_sym3, dtype=np.int64)
    bp_prev: List[np.ndarray] = []
    bp_gamma: List[np.ndarray] = []
    all_states = np.broadcast_to(np.arange(S, dtype=np.int64), (B, S))
    cos_g, sin_g = np.cos(batch.gamma_grid), np.sin(batch.gamma_grid)
    rows = np.arange(B)

    for j in range(n):
        A = active.shape[1]
        z2 = batch.kmx * batch.rmx[:, j, None] + batch.kmy * batch.rmy[
            :, j, None
        ] * np.exp(1j * (batch.thk - batch.th2[:, j, None]))  # (B, S)
        norm = batch.kmx**2 + batch.kmy**2  # (B, S)
        # fading-coefficient argument for each (previous, current) pair
        arg_c = np.empty((B, A, S))
        for idx in range(A):
            arg_c[:, idx, :] = batch.arg_c_from(active[:, idx])
        t3 = batch.kmy[rows[:, None], active] * batch.dmy[:, j, None]  # (B, A)
        u = arg_c - batch.gm2[:, j, None, None]  # (B, A, S)
        cu, su = np.cos(u), np.sin(u)
        cos_xi = cu[..., None] * cos_g - su[..., None] * sin_g  # (B, A, S, P)
        sin_xi = su[..., None] * cos_g + cu[..., None] * sin_g
        corr_sq = (
            (np.abs(z2) ** 2)[:, None, :, None]
            + (t3**2)[:, :, None, None]
            + 2.0
            * t3[:, :, None, None]
            * (
                z2.real[:, None, :, None] * cos_xi
                + z2.imag[:, None, :, None] * sin_xi
            )
        )
        corr = np.sqrt(np.clip(corr_sq, 0.0, None))
        if mode == "exact":
            cost = norm[:, None, :, None] - bessel_penalty(corr, sigma_sq)
            cost += bessel_penalty(t3, sigma_sq)[:, :, None, None]
        else:
            cost = norm[:, None, :, None] - 2.0 * corr + (2.0 * t3)[:, :, None, None]
        total = metric[:, :, None, None] + cost  # (B, A, S, P)
        flat = total.transpose(0, 2, 1, 3).reshape(B, S, A * P)
        pick = np.argmin(flat, axis=2)  # (B, S)
        metric = np.take_along_axis(flat, pick[:, :, None], axis=2)[:, :, 0]
        bp_prev.append(np.take_along_axis(active, pick // P, axis=1))
        bp_gamma.append(pick % P)
        active = all_states

    s_dec = np.empty((B, n), dtype=np.int64)
    g_dec = np.empty((B, n), dtype=np.int64)
    s = np.argmin(metric, axis=1)
    for j in range(n - 1, -1, -1):
        g_dec[:, j] = bp_gamma[j][rows, s]
        s_dec[:, j] = s
        s = bp_prev[j][rows, s]
    return s_dec, g_dec


_DETECT_FUNCS = {
    "sym": lambda batch, s2, mode, fb: detect_sym_batch(batch, s2, mode, fb),
    "suc": lambda batch, s2, mode, fb: detect_suc_batch(batch, s2, mode, fb),
    "seq": lambda batch, s2, mode, fb: detect_seq_batch(batch, s2, mode),
}


def _tally_errors(batch: _Batch, s_dec: np.ndarray, g_dec: np.ndarray) -> np.ndarray:
    """Per-dimension error counts; a dimension is wrong iff its own decided
    index differs from the transmitted one."""
    rx_d, ry_d, t_d = batch.split_sym3(s_dec)
    rx_t, ry_t, t_t = batch.split_sym3(batch.true_sym3)
    return np.array(
        [
            int(np.sum(rx_d != rx_t)),
            int(np.sum(ry_d != ry_t)),
            int(np.sum(t_d != t_t)),
            int(np.sum(g_dec != batch.true_gamma)),
        ],
        dtype=np.int64,
    )


def _ser_batch(config: ExperimentConfig, point_idx: int, batch_idx: int) -> Dict:
    const = config.constellation()
    sigma_sq = snr_to_noise_sigma_sq(const, db_to_linear(config.snr_db[point_idx]))
    start = batch_idx * config.batch_blocks
    count = min(config.batch_blocks, config.max_blocks - start)
    blocks = []
    for b in range(start, start + count):
        rng = block_rng(config.seed, _KIND_SER, point_idx, b)
        h = draw_channel(config, rng)
        blocks.append(simulate_block(const, h, config.block_len, sigma_sq, rng))
    batch = _Batch(const, blocks)
    out = {}
    for det, mode in config.variants():
        s_dec, g_dec = _DETECT_FUNCS[det](batch, sigma_sq, mode, config.feedback)
        out[(det, mode)] = _tally_errors(batch, s_dec, g_dec)
    return {"tallies": out, "trials": batch.B * batch.n, "blocks": batch.B}


def _wilson_interval(errors: int, trials: int) -> Tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    z = 1.959963984540054  # two-sided 95%
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(center - half, 0.0), min(center + half, 1.0)


def run_ser_sweep(config: ExperimentConfig) -> Dict[Tuple[str, str], List[SerPoint]]:
    """Per-dimension SER for every configured detector variant and SNR point.

    Stops each point at the smallest batch prefix where every variant has at
    least ``target_errors`` errors in every dimension, or at ``max_blocks``.
    """
    config.validate()
    results: Dict[Tuple[str, str], List[SerPoint]] = {v: [] for v in config.variants()}
    n_batches = math.ceil(config.max_blocks / config.batch_blocks)
    for point_idx, snr_db in enumerate(config.snr_db):
        tallies = _collect_batches(
            lambda bi: _ser_batch(config, point_idx, bi),
            n_batches,
            config.threads,
            lambda acc: all(
                int(acc["tallies"][v][d]) >= config.target_errors
                for v in config.variants()
                for d in range(4)
            ),
            _merge_ser,
            {"tallies": {v: np.zeros(4, dtype=np.int64) for v in config.variants()},
             "trials": 0, "blocks": 0},
        )
        for v in config.variants():
            errors = tuple(int(e) for e in tallies["tallies"][v])
            trials = tallies["trials"]
            ser = tuple(e / trials for e in errors)
            ci = [_wilson_interval(e, trials) for e in errors]
            results[v].append(
                SerPoint(
                    snr_db=snr_db,
                    detector=v[0],
                    mode=v[1],
                    errors=errors,
                    trials=trials,
                    ser=ser,
                    ci_low=tuple(c[0] for c in ci),
                    ci_high=tuple(c[1] for c in ci),
                )
            )
    return results


def _merge_ser(acc: Dict, part: Dict) -> Dict:
    for v, t in part["tallies"].items():
        acc["tallies"][v] = acc["tallies"][v] + t
    acc["trials"] += part["trials"]
    acc["blocks"] += part["blocks"]
    return acc


def _collect_batches(batch_fn, n_batches, threads, stop_fn, merge_fn, acc):
    """Run batches in index order (waves of ``threads``), merging prefix
    results until ``stop_fn`` is satisfied.  Speculative batches computed
    past the stopping prefix are discarded, so the aggregate never depends
    on the worker count."""
    done = 0
    while done < n_batches:
        wave = list(range(done, min(done + max(threads, 1), n_batches)))
        if threads > 1 and len(wave) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(batch_fn, wave))
        else:
            parts = [batch_fn(bi) for bi in wave]
        for part in parts:  # merge in batch-index order
            acc = merge_fn(acc, part)
            done += 1
            if stop_fn(acc):
                return acc
    return acc


def _rate_batch(config: ExperimentConfig, point_idx: int, batch_idx: int) -> Dict:
    """Sum/sum-of-squares of the per-slot information density (bits).

    The numerator is the slot likelihood at the true input; the denominator
    averages it over the whole per-slot alphabet given the true previous
    symbol (the conditioning on the previous amplitudes).  Factors common to
    all hypotheses cancel in the ratio.
    """
    const = config.constellation()
    sigma_sq = snr_to_noise_sigma_sq(const, db_to_linear(config.snr_db[point_idx]))
    start = batch_idx * config.batch_blocks
    count = min(config.batch_blocks, config.rate_max_blocks - start)
    blocks = []
    for b in range(start, start + count):
        rng = block_rng(config.seed, _KIND_RATE, point_idx, b)
        h = draw_channel(config, rng)
        blocks.append(simulate_block(const, h, config.block_len, sigma_sq, rng))
    batch = _Batch(const, blocks)
    B, n, S, P = batch.B, batch.n, batch.S, batch.P
    log_m = math.log(S * P)
    rows = np.arange(B)
    total = 0.0
    total_sq = 0.0
    prev = np.full(B, batch.pilot_sym3, dtype=np.int64)
    for j in range(n):
        scores = _slot_scores(batch, j, prev, sigma_sq, "exact")
        # hypothesis log-likelihood up to common factors: -(score)/2 sigma^2,
        # with the constant pinned third-entry term cancelling throughout
        ll = -scores.reshape(B, -1) / (2.0 * sigma_sq)
        true_flat = batch.true_sym3[:, j] * P + batch.true_gamma[:, j]
        num = ll[rows, true_flat]
        mx = np.max(ll, axis=1)
        lse = mx + np.log(np.sum(np.exp(ll - mx[:, None]), axis=1))
        bits = (num - lse + log_m) / math.log(2.0)
        total += float(np.sum(bits))
        total_sq += float(np.sum(bits * bits))
        prev = batch.true_sym3[:, j]
    return {"sum": total, "sum_sq": total_sq, "count": B * n}


def run_rate_sweep(config: ExperimentConfig) -> List[RatePoint]:
    """Monte Carlo achievable rate (mutual information) per SNR point."""
    config.validate()
    out = []
    n_batches = math.ceil(config.rate_max_blocks / config.batch_blocks)
    for point_idx, snr_db in enumerate(config.snr_db):
        acc = _collect_batches(
            lambda bi: _rate_batch(config, point_idx, bi),
            n_batches,
            config.threads,
            lambda a: False,
            _merge_rate,
            {"sum": 0.0, "sum_sq": 0.0, "count": 0},
        )
        n = acc["count"]
        mean = acc["sum"] / n
        var = max(acc["sum_sq"] / n - mean * mean, 0.0) * n / max(n - 1, 1)
        out.append(
            RatePoint(
                snr_db=snr_db,
                rate_bits=mean,
                stderr=math.sqrt(var / n),
                samples=n,
            )
        )
    return out


def _merge_rate(acc: Dict, part: Dict) -> Dict:
    acc["sum"] += part["sum"]
    acc["sum_sq"] += part["sum_sq"]
    acc["count"] += part["count"]
    return acc


def interpolate_snr_at_ser(points: Sequence[SerPoint], dimension: int, target: float) -> float:
    """SNR (dB) at which the given dimension's SER crosses ``target``,
    linearly interpolated in (snr_db, log10 ser); first crossing wins."""
    if not 1 <= dimension <= 4:
        raise ValueError("dimension must be in 1..4")
    pts = sorted(points, key=lambda p: p.snr_db)
    d = dimension - 1
    for lo, hi in zip(pts, pts[1:]):
        p1, p2 = lo.ser[d], hi.ser[d]
        if p1 <= 0 or p2 <= 0:
            continue
        if (p1 - target) * (p2 - target) <= 0 and p1 != p2:
            frac = (math.log10(target) - math.log10(p1)) / (
                math.log10(p2) - math.log10(p1)
            )
            return lo.snr_db + frac * (hi.snr_db - lo.snr_db)
    raise UnbracketedTargetError(
        f"target SER {target:g} not bracketed for dimension {dimension}"
    )


def compare_successive_gap(
    base_points: Sequence[SerPoint],
    candidate_points: Sequence[SerPoint],
    target_ser: float,
) -> List[GapEntry]:
    """Per-dimension SNR penalty of the candidate detector at the target SER.

    Dimensions whose curves do not bracket the target are skipped (they are
    reported by the caller)."""
    out = []
    for dim in range(1, 5):
        try:
            s_base = interpolate_snr_at_ser(base_points, dim, target_ser)
            s_cand = interpolate_snr_at_ser(candidate_points, dim, target_ser)
        except UnbracketedTargetError:
            continue
        out.append(
            GapEntry(
                dimension=dim,
                target_ser=target_ser,
                snr_db_base=s_base,
                snr_db_candidate=s_cand,
                gap_db=s_cand - s_base,
            )
        )
    return out


def fit_ser_slope(
    points: Sequence[SerPoint],
    dimension: int,
    ser_window: Tuple[float, float] = (1e-4, 0.2),
    min_errors: int = 20,
) -> float:
    """Least-squares slope of log10(SER) against log10(linear SNR) over the
    window; characterizes the fading behaviour of a dimension."""
    d = dimension - 1
    xs, ys = [], []
    for p in points:
        if p.errors[d] >= min_errors and ser_window[0] <= p.ser[d] <= ser_window[1]:
            xs.append(math.log10(db_to_linear(p.snr_db)))
            ys.append(math.log10(p.ser[d]))
    if len(xs) < 2:
        raise UnbracketedTargetError("not enough points in the SER window for a slope fit")
    coeffs = np.polyfit(np.array(xs), np.array(ys), 1)
    return float(coeffs[0])
