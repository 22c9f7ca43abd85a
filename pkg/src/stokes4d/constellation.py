"""Ring/phase constellations and the SNR/energy bookkeeping built on them.

A constellation places ``n_r`` amplitude rings with equally spaced *squared*
radii and ``n_p`` equally spaced phases per polarization.  Data rides on four
quantities per slot: the two magnitudes, the intra-slot phase difference
``theta`` and the inter-slot phase difference ``gamma``.
"""

import math
from dataclasses import dataclass, field

import numpy as np


def wrap_angle(x):
    """Wrap an angle (scalar or array) into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class RingPhaseConstellation:
    """An ``n_r``-ring / ``n_p``-ary phase alphabet per polarization.

    Radii are ``r1 * sqrt(1 + m * delta_sq)`` for ``m = 0..n_r-1``; phases are
    ``2*pi*l/n_p`` for ``l = 0..n_p-1``.  ``delta_sq`` is meaningless for a
    single ring and is normalized to 0 there.
    """

    n_r: int
    n_p: int
    r1: float
    delta_sq: float
    radii: np.ndarray = field(init=False, repr=False, compare=False)
    phases: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_r < 1 or self.n_p < 1:
            raise ValueError("ring and phase counts must be positive")
        if not self.r1 > 0:
            raise ValueError("innermost radius must be positive")
        if self.n_r == 1:
            object.__setattr__(self, "delta_sq", 0.0)
        elif not self.delta_sq > 0:
            raise ValueError("squared-radius spacing must be positive")
        m = np.arange(self.n_r)
        object.__setattr__(
            self, "radii", self.r1 * np.sqrt(1.0 + m * float(self.delta_sq))
        )
        object.__setattr__(
            self, "phases", wrap_angle(2.0 * np.pi * np.arange(self.n_p) / self.n_p)
        )

    @property
    def points_per_polarization(self) -> int:
        return self.n_r * self.n_p

    @property
    def joint_alphabet_size(self) -> int:
        """Number of distinct per-slot data symbols (both polarizations)."""
        return (self.n_r * self.n_p) ** 2

    def average_energy(self) -> float:
        """Mean |e|^2 per polarization under uniform signaling."""
        return self.r1**2 * (1.0 + self.delta_sq * (self.n_r - 1) / 2.0)

    def phase_index(self, angle: float) -> int:
        """Index of a phase-grid member; exact up to wrap tolerance 1e-9."""
        step = 2.0 * np.pi / self.n_p
        idx = int(round(float(wrap_angle(angle)) / step)) % self.n_p
        if abs(float(wrap_angle(angle - self.phases[idx]))) > 1e-9:
            raise ValueError(f"angle {angle!r} is not on the phase grid")
        return idx


@dataclass(frozen=True)
class FourDSymbol:
    """The four encoded quantities of one slot.

    ``theta`` is the intra-slot X-Y phase difference, ``gamma`` the phase of
    the current X sample against the previous slot's Y sample.  Angles are
    wrapped into [-pi, pi) at construction.
    """

    mag_x: float
    mag_y: float
    theta: float
    gamma: float

    def __post_init__(self):
        if self.mag_x < 0 or self.mag_y < 0:
            raise ValueError("magnitudes must be nonnegative")
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))
        object.__setattr__(self, "gamma", float(wrap_angle(self.gamma)))


def build_constellation(n_r: int, n_p: int, r1: float, delta_sq: float) -> RingPhaseConstellation:
    """Construct a ring/phase constellation (see :class:`RingPhaseConstellation`)."""
    return RingPhaseConstellation(n_r=n_r, n_p=n_p, r1=r1, delta_sq=delta_sq)


def balanced_delta_sq(n_r: int, n_p: int) -> float:
    """Ring spacing that equalizes the tightest intra-ring and inter-ring gaps.

    The innermost ring's nearest-neighbor distance (2*r1*sin(pi/n_p)) equals
    the radial gap between the two outermost rings at this spacing.
    """
    if n_r < 2:
        raise ValueError("need at least two rings to balance ring spacing")
    if n_p < 2:
        raise ValueError("need at least two phases to balance ring spacing")
    s = math.sin(math.pi / n_p)
    return 4.0 * s * s * (2 * n_r - 3) + 4.0 * s * math.sqrt(
        4.0 * (n_r - 1) * (n_r - 2) * s * s + 1.0
    )


def snr_to_noise_sigma_sq(constellation: RingPhaseConstellation, snr_linear: float) -> float:
    """Per-quadrature noise variance so that SNR = avg energy / (2 sigma^2).

    SNR is the average transmitted energy per polarization over the total
    complex-noise variance per polarization (real and imaginary parts carry
    sigma^2 each).
    """
    if not snr_linear > 0:
        raise ValueError("linear SNR must be positive")
    return constellation.average_energy() / (2.0 * snr_linear)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def pilot_symbol(constellation: RingPhaseConstellation):
    """The known block-opening symbol [r1, r1]^t."""
    from .channel import JonesPair

    return JonesPair(complex(constellation.r1), complex(constellation.r1))


def pilot_four_d(constellation: RingPhaseConstellation) -> FourDSymbol:
    """Pilot as a FourDSymbol; its gamma refers to the (nonexistent) slot
    before the block and is fixed to 0 by convention, never used."""
    return FourDSymbol(constellation.r1, constellation.r1, 0.0, 0.0)
