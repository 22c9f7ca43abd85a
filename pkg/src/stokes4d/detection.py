"""Likelihood scores and the three detection procedures.

Everything is computed in the log domain.  The received amplitudes are Rician
and the received phases, conditioned on the amplitudes, are von Mises; the
joint slot likelihood reduces to a Bessel function of the correlation
magnitude between the observation vector and the hypothesis vector.  Three
decision procedures are built on it:

* symbol-by-symbol: exhaustive argmin over all per-slot candidates;
* sequence: exact min-sum (Viterbi) over a block, the per-slot costs chained
  through the previous slot's Y magnitude;
* successive: the first three dimensions jointly, then the inter-slot phase
  alone, shrinking the search from ``(n_r*n_p)^2`` to ``(n_r^2+1)*n_p``.

Each procedure has an exact mode and a high-SNR mode that replaces
``2*sigma_sq*ln I0(x/sigma_sq)`` with ``2*x``; the exact mode degrades to the
same expression at ``sigma_sq = 0``, which is its pointwise limit.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import i0e

from .channel import (
    ChannelMatrix,
    fading_coefficient,
    intensity_quad,
    invert_stokes_map,
    recover_gamma,
    stokes_map,
)
from .constellation import FourDSymbol, RingPhaseConstellation, wrap_angle
from .errors import DegeneratePhaseError
from .frontend import DVector

LOG_4PI2 = float(np.log(4.0 * np.pi**2))
LOG_2PI = float(np.log(2.0 * np.pi))


def log_i0(x):
    """ln I0(x) for x >= 0, overflow-free far beyond x = 1e5.

    Uses the exponentially scaled Bessel function, so the linear-domain
    I0 is never formed.  Scalar in, scalar out; arrays broadcast.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("log_i0 requires nonnegative arguments")
    out = arr + np.log(i0e(arr))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def rician_log_pdf(r_mag, k_mag, sigma_sq):
    """Log density of a received amplitude around a noiseless amplitude."""
    r_mag = np.asarray(r_mag, dtype=float)
    k_mag = np.asarray(k_mag, dtype=float)
    lam = r_mag * k_mag / sigma_sq
    return (
        np.log(r_mag / sigma_sq)
        - (r_mag**2 + k_mag**2) / (2.0 * sigma_sq)
        + log_i0(lam)
    )


def radii_likelihood(r_mags, k_mags, sigma_sq):
    """Log density of the two received amplitudes given the hypothesis
    amplitudes (product of two Rician laws)."""
    r_x, r_y = (np.asarray(v, dtype=float) for v in r_mags)
    k_x, k_y = (np.asarray(v, dtype=float) for v in k_mags)
    return rician_log_pdf(r_x, k_x, sigma_sq) + rician_log_pdf(r_y, k_y, sigma_sq)


@dataclass(frozen=True)
class LikelihoodTerms:
    """Scale-free ingredients of the phase likelihood for one
    (hypothesis, observation) pair.

    ``lambda_*`` are amplitude products over the noise variance;
    ``theta_k``/``gamma_k`` are the hypothesis phase entries; ``corr_mag`` is
    |<d_k, d_r>|, ``corr_mag_hat`` its two-entry version, ``alpha`` the
    argument of the hatted correlation and ``beta`` the residual angle closing
    the triangle to the full correlation.
    """

    lambda_x: float
    lambda_y: float
    prev_lambda_y: float
    theta_k: float
    gamma_k: float
    corr_mag: float
    corr_mag_hat: float
    alpha: float
    beta: float

    @classmethod
    def from_vectors(cls, d_k: DVector, d_r: DVector, sigma_sq: float) -> "LikelihoodTerms":
        full = d_k.inner(d_r)
        hat = d_k.hat_inner(d_r)
        return cls(
            lambda_x=float(abs(d_k.c1) * abs(d_r.c1) / sigma_sq),
            lambda_y=float(abs(d_k.c2) * abs(d_r.c2) / sigma_sq),
            prev_lambda_y=float(abs(d_k.c3) * abs(d_r.c3) / sigma_sq),
            theta_k=float(np.angle(d_k.c2)),
            gamma_k=float(np.angle(d_k.c3)),
            corr_mag=float(abs(full)),
            corr_mag_hat=float(abs(hat)),
            alpha=float(np.angle(hat)),
            beta=float(wrap_angle(np.angle(full) - np.angle(hat))),
        )


def phase_likelihood(theta_pp, gamma_pp, terms: LikelihoodTerms):
    """Log density of the two received phase differences given amplitudes and
    hypothesis.  Uniform on the torus when all amplitude products vanish."""
    theta_pp = np.asarray(theta_pp, dtype=float)
    gamma_pp = np.asarray(gamma_pp, dtype=float)
    corr_over_sigma = np.abs(
        terms.lambda_x
        + terms.lambda_y * np.exp(1j * (terms.theta_k - theta_pp))
        + terms.prev_lambda_y * np.exp(1j * (terms.gamma_k - gamma_pp))
    )
    return (
        log_i0(corr_over_sigma)
        - LOG_4PI2
        - log_i0(terms.lambda_x)
        - log_i0(terms.lambda_y)
        - log_i0(terms.prev_lambda_y)
    )


def joint_likelihood(d_r: DVector, d_k: DVector, sigma_sq: float):
    """Log density of the full slot observation (two amplitudes, two phase
    differences) given the hypothesis vector and the previous Y amplitude."""
    r_x, r_y = abs(d_r.c1), abs(d_r.c2)
    k_x, k_y = abs(d_k.c1), abs(d_k.c2)
    corr = abs(d_k.inner(d_r))
    prev_lambda_y = abs(d_k.c3) * abs(d_r.c3) / sigma_sq
    return (
        np.log(r_x * r_y / sigma_sq**2)
        - LOG_4PI2
        + log_i0(corr / sigma_sq)
        - (r_x**2 + r_y**2 + k_x**2 + k_y**2) / (2.0 * sigma_sq)
        - log_i0(prev_lambda_y)
    )


def first_three_likelihood(d_r: DVector, d_k: DVector, sigma_sq: float):
    """Log density of (|r_x|, |r_y|, theta'') given the hatted hypothesis;
    the successive detector's first-step score derives from it."""
    r_x, r_y = abs(d_r.c1), abs(d_r.c2)
    corr_hat = abs(d_k.hat_inner(d_r))
    return (
        np.log(r_x * r_y / sigma_sq**2)
        - LOG_2PI
        - (d_r.hat_norm_sq() + d_k.hat_norm_sq()) / (2.0 * sigma_sq)
        + log_i0(corr_hat / sigma_sq)
    )


def bessel_penalty(corr_mag, sigma_sq):
    """2*sigma_sq*ln I0(corr/sigma_sq); equals 2*corr at sigma_sq = 0 (its
    pointwise limit, used for noiseless blocks)."""
    if sigma_sq == 0.0:
        return 2.0 * np.asarray(corr_mag, dtype=float)
    return 2.0 * sigma_sq * log_i0(np.asarray(corr_mag, dtype=float) / sigma_sq)


def exact_score(norm_sq, corr_mag, sigma_sq):
    """Per-slot decision objective: |d_k|^2 - 2 sigma^2 ln I0(|<d_k,d_r>|/sigma^2)."""
    return np.asarray(norm_sq, dtype=float) - bessel_penalty(corr_mag, sigma_sq)


def high_snr_score(norm_sq, corr_mag):
    """High-SNR objective: |d_k|^2 - 2 |<d_k, d_r>|."""
    return np.asarray(norm_sq, dtype=float) - 2.0 * np.asarray(corr_mag, dtype=float)


def min_distance_score(d_k: DVector, d_r: DVector) -> float:
    """|d_k|^2 - 2 Re<d_k, d_r>: the minimum-distance rule, which is *not*
    the high-SNR ML rule (the correlation enters through its magnitude
    there)."""
    return float(d_k.norm_sq() - 2.0 * d_k.inner(d_r).real)


class SymbolIndices(NamedTuple):
    """Per-slot data indices: amplitude rings per polarization, intra-slot
    phase index, inter-slot phase index."""

    ring_x: int
    ring_y: int
    theta_idx: int
    gamma_idx: int


@dataclass(frozen=True)
class Hypothesis:
    """One candidate vector together with the transmit-domain indices that
    generated it."""

    d_k: DVector
    indices: SymbolIndices


@dataclass(frozen=True)
class DetectionResult:
    """A decided slot: indices, decided vector, the objective value at the
    decision, and how many candidates were scored."""

    indices: SymbolIndices
    d_k: DVector
    score: float
    examined: int


class MappedAlphabet:
    """All per-slot candidates of one block, mapped through a fixed rotation.

    The first-three-dimension candidates (ring_x, ring_y, theta_idx) are
    enumerated lexicographically into a ``sym3`` index of size
    ``n_r^2 * n_p``; the full symbol index is ``sym3 * n_p + gamma_idx``.
    The map from transmit quantities to post-rotation amplitudes and
    intra-slot phase is the intensity-quadruple matrix; the inter-slot phase
    additionally picks up the argument of the fading coefficient, which
    depends on the previous slot's first three dimensions.
    """

    def __init__(self, constellation: RingPhaseConstellation, h: ChannelMatrix):
        c = constellation
        self.constellation = c
        self.h = h
        s = np.arange(c.n_r * c.n_r * c.n_p)
        self.ring_x, self.ring_y, self.theta_idx = np.unravel_index(
            s, (c.n_r, c.n_r, c.n_p)
        )
        self.e_mag_x = c.radii[self.ring_x]
        self.e_mag_y = c.radii[self.ring_y]
        self.e_theta = c.phases[self.theta_idx]
        kq = stokes_map(h).m @ intensity_quad(self.e_mag_x, self.e_mag_y, self.e_theta)
        self.k_mag_x = np.sqrt(np.clip(kq[0], 0.0, None))
        self.k_mag_y = np.sqrt(np.clip(kq[1], 0.0, None))
        self.k_theta = np.arctan2(kq[3], kq[2])
        self.gamma_grid = c.phases

    @property
    def sym3_count(self) -> int:
        return self.e_mag_x.size

    @property
    def gamma_count(self) -> int:
        return self.gamma_grid.size

    @property
    def pilot_sym3(self) -> int:
        # the pilot [r1, r1] is the (ring 0, ring 0, phase 0) grid member
        return self.sym3_index(0, 0, 0)

    def sym3_index(self, ring_x: int, ring_y: int, theta_idx: int) -> int:
        c = self.constellation
        return (ring_x * c.n_r + ring_y) * c.n_p + theta_idx

    def e_triple(self, sym3: int):
        return (
            float(self.e_mag_x[sym3]),
            float(self.e_mag_y[sym3]),
            float(self.e_theta[sym3]),
        )

    def arg_c(self, prev_sym3: int, sym3=None):
        """Argument of the fading coefficient for candidates ``sym3`` (all of
        them by default) given the previous slot's first three dimensions."""
        if sym3 is None:
            cur = (self.e_mag_x, self.e_mag_y, self.e_theta)
        else:
            cur = (self.e_mag_x[sym3], self.e_mag_y[sym3], self.e_theta[sym3])
        return np.angle(fading_coefficient(self.h, cur, self.e_triple(prev_sym3)))

    def d_k(self, sym3: int, gamma_idx: int, prev_sym3: int) -> DVector:
        gamma_k = self.gamma_grid[gamma_idx] + self.arg_c(prev_sym3, sym3)
        return DVector.from_polar(
            self.k_mag_x[sym3],
            self.k_mag_y[sym3],
            self.k_theta[sym3],
            self.k_mag_y[prev_sym3],
            gamma_k,
        )

    def hypotheses(self, prev_sym3: int) -> list:
        """All candidates for one slot, lexicographic in
        (ring_x, ring_y, theta_idx, gamma_idx), with the third entry pinned to
        the previous slot's decided Y amplitude."""
        out = []
        for s in range(self.sym3_count):
            for g in range(self.gamma_count):
                out.append(
                    Hypothesis(
                        d_k=self.d_k(s, g, prev_sym3),
                        indices=SymbolIndices(
                            int(self.ring_x[s]),
                            int(self.ring_y[s]),
                            int(self.theta_idx[s]),
                            g,
                        ),
                    )
                )
        return out


def detect_symbol(
    d_r: DVector,
    hypotheses: Sequence[Hypothesis],
    sigma_sq: float,
    mode: str = "exact",
) -> DetectionResult:
    """Pick the candidate minimizing the slot objective.

    All hypotheses must share the third-entry magnitude (it is fixed by the
    previous slot).  Ties break toward the lowest hypothesis index.
    """
    if not hypotheses:
        raise ValueError("empty hypothesis set")
    _check_mode(mode)
    third = np.array([abs(h.d_k.c3) for h in hypotheses])
    if np.ptp(third) > 1e-9 * max(third.max(), 1.0):
        raise ValueError("hypotheses disagree on the fixed third-entry magnitude")
    norm_sq = np.array([h.d_k.norm_sq() for h in hypotheses])
    corr = np.array([abs(h.d_k.inner(d_r)) for h in hypotheses])
    if mode == "exact":
        scores = exact_score(norm_sq, corr, sigma_sq)
    else:
        scores = high_snr_score(norm_sq, corr)
    best = int(np.argmin(scores))
    return DetectionResult(
        indices=hypotheses[best].indices,
        d_k=hypotheses[best].d_k,
        score=float(scores[best]),
        examined=len(hypotheses),
    )


def detect_successive(
    d_r: DVector,
    alphabet: MappedAlphabet,
    sigma_sq: float,
    prev_sym3: int,
    mode: str = "exact",
) -> DetectionResult:
    """Two-step decision: first three dimensions jointly from the hatted
    vectors, then the inter-slot phase as the feasible value closest to
    ``gamma'' + alpha``.  Scores ``sym3_count + gamma_count`` candidates."""
    _check_mode(mode)
    if abs(d_r.c3) == 0.0:
        raise DegeneratePhaseError(
            "previous-slot Y amplitude is zero: fourth dimension undecidable"
        )
    z2 = alphabet.k_mag_x * abs(d_r.c1) + alphabet.k_mag_y * abs(d_r.c2) * np.exp(
        1j * (alphabet.k_theta - np.angle(d_r.c2))
    )
    norm_hat = alphabet.k_mag_x**2 + alphabet.k_mag_y**2
    if mode == "exact":
        step1 = exact_score(norm_hat, np.abs(z2), sigma_sq)
    else:
        step1 = high_snr_score(norm_hat, np.abs(z2))
    s = int(np.argmin(step1))
    alpha = float(np.angle(z2[s]))
    gamma_k = alphabet.gamma_grid + alphabet.arg_c(prev_sym3)[s]
    fit = np.cos(gamma_k - np.angle(d_r.c3) - alpha)
    g = int(np.argmax(fit))
    return DetectionResult(
        indices=SymbolIndices(
            int(alphabet.ring_x[s]),
            int(alphabet.ring_y[s]),
            int(alphabet.theta_idx[s]),
            g,
        ),
        d_k=alphabet.d_k(s, g, prev_sym3),
        score=float(step1[s]),
        examined=alphabet.sym3_count + alphabet.gamma_count,
    )


def detect_sequence(
    observations: Sequence[DVector],
    alphabet: MappedAlphabet,
    sigma_sq: float,
    mode: str = "exact",
    pilot_sym3: Optional[int] = None,
) -> list:
    """Exact block-wise minimization by min-sum on the chain (Viterbi).

    The chain state after slot ``j`` is that slot's first-three-dimension
    candidate: both the next slot's pinned third-entry magnitude and the
    fading-coefficient argument depend on it (a ring index alone would not
    determine either once the rotation mixes the polarizations).  The factor
    graph is cycle-free, so the result equals the exhaustive minimum.
    """
    _check_mode(mode)
    n = len(observations)
    if n == 0:
        raise ValueError("empty block")
    if pilot_sym3 is None:
        pilot_sym3 = alphabet.pilot_sym3
    S, P = alphabet.sym3_count, alphabet.gamma_count
    kmx, kmy, thk = alphabet.k_mag_x, alphabet.k_mag_y, alphabet.k_theta

    # cumulative path metric over previous-slot sym3; stage 1 starts from the
    # pilot alone, so only one "previous" is active
    metric = np.zeros(1)
    active_prev = np.array([pilot_sym3])
    bp_prev = []
    bp_gamma = []

    for j in range(n):
        d_r = observations[j]
        rmx, rmy = abs(d_r.c1), abs(d_r.c2)
        th2, gm2 = np.angle(d_r.c2), np.angle(d_r.c3)
        dmy = abs(d_r.c3)
        z2 = kmx * rmx + kmy * rmy * np.exp(1j * (thk - th2))  # (S,)
        norm = kmx**2 + kmy**2  # (S,)

        arg_c = np.stack([alphabet.arg_c(int(p)) for p in active_prev])  # (A,S)
        t3 = kmy[active_prev] * dmy  # (A,)
        xi = alphabet.gamma_grid[None, None, :] + arg_c[:, :, None] - gm2  # (A,S,P)
        corr_sq = (
            np.abs(z2)[None, :, None] ** 2
            + (t3**2)[:, None, None]
            + 2.0
            * t3[:, None, None]
            * (z2.real[None, :, None] * np.cos(xi) + z2.imag[None, :, None] * np.sin(xi))
        )
        corr = np.sqrt(np.clip(corr_sq, 0.0, None))
        if mode == "exact":
            cost = norm[None, :, None] - bessel_penalty(corr, sigma_sq)
            cost += bessel_penalty(t3, sigma_sq)[:, None, None]
        else:
            cost = norm[None, :, None] - 2.0 * corr + (2.0 * t3)[:, None, None]
        total = metric[:, None, None] + cost  # (A,S,P)
        flat = total.transpose(1, 0, 2).reshape(S, -1)  # (S, A*P)
        pick = np.argmin(flat, axis=1)
        metric = flat[np.arange(S), pick]
        bp_prev.append(active_prev[pick // P])
        bp_gamma.append(pick % P)
        active_prev = np.arange(S)

    # backtrack
    decided = [None] * n
    s = int(np.argmin(metric))
    for j in range(n - 1, -1, -1):
        g = int(bp_gamma[j][s])
        prev = int(bp_prev[j][s])
        decided[j] = (s, g, prev)
        s = prev

    block_score = float(np.min(metric))  # the minimized block objective
    out = []
    for s, g, prev in decided:
        out.append(
            DetectionResult(
                indices=SymbolIndices(
                    int(alphabet.ring_x[s]),
                    int(alphabet.ring_y[s]),
                    int(alphabet.theta_idx[s]),
                    int(g),
                ),
                d_k=alphabet.d_k(s, g, prev),
                score=block_score,
                examined=S * P,
            )
        )
    return out


def decisions_to_e_domain(
    decided: Sequence[DVector], h: ChannelMatrix, pilot_triple
) -> list:
    """Convert a block of decided vectors to transmit-domain symbols.

    Inverts the intensity-quadruple map for the first three dimensions and
    removes the fading-coefficient rotation for the fourth, feeding decided
    (not true) values forward.  ``pilot_triple`` is the known
    (mag_x, mag_y, theta) of the block opener.
    """
    sm = stokes_map(h)
    prev = tuple(float(v) for v in pilot_triple)
    out = []
    for d_k in decided:
        kq = intensity_quad(abs(d_k.c1), abs(d_k.c2), np.angle(d_k.c2))
        mag_x, mag_y, theta = invert_stokes_map(sm, kq)
        gamma = recover_gamma(
            h,
            (mag_x, mag_y, theta),
            prev,
            float(np.angle(d_k.c3)),
            (abs(d_k.c1), abs(d_k.c3)),
        )
        out.append(FourDSymbol(mag_x, mag_y, theta, gamma))
        prev = (mag_x, mag_y, theta)
    return out


def _check_mode(mode: str):
    if mode not in ("exact", "high_snr"):
        raise ValueError(f"unknown detection mode {mode!r}")
