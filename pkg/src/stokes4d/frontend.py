"""Direct-detection front end: the six photocurrent outputs of one slot and
their conversion to the three-component observation vector.

The front end measures intensities and pairwise interference terms of the
received field, referencing the previous slot's Y sample for the inter-slot
terms.  Given the previous slot's Y magnitude, the six outputs are in
one-to-one correspondence with (|r_x|, |r_y|, theta'', gamma'').
"""

from dataclasses import dataclass

import numpy as np

from .channel import JonesPair
from .errors import DegeneratePhaseError


@dataclass(frozen=True)
class FrontEndObservation:
    """Six real outputs of one slot.  w1, w2 are the two intensities; w3/w4
    (w5/w6) are twice the real/imaginary parts of the intra-slot (inter-slot)
    interference terms."""

    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float


@dataclass(frozen=True)
class DVector:
    """Detection-space vector [magnitude, magnitude*e^{i theta}, magnitude*e^{i gamma}].

    Works identically for transmit-domain, post-rotation and received
    quantities.  The "hatted" view drops the third (inter-slot) entry.
    """

    c1: float
    c2: complex
    c3: complex

    def norm_sq(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2 + abs(self.c3) ** 2

    def hat_norm_sq(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2

    def inner(self, other: "DVector") -> complex:
        """<self, other> with conjugation on the second argument."""
        return (
            self.c1 * np.conj(other.c1)
            + self.c2 * np.conj(other.c2)
            + self.c3 * np.conj(other.c3)
        )

    def hat_inner(self, other: "DVector") -> complex:
        return self.c1 * np.conj(other.c1) + self.c2 * np.conj(other.c2)

    @classmethod
    def from_polar(cls, mag_1, mag_2, theta, mag_3, gamma) -> "DVector":
        return cls(
            float(mag_1),
            mag_2 * np.exp(1j * theta),
            mag_3 * np.exp(1j * gamma),
        )


def front_end(r: JonesPair, prev_r_y: complex) -> FrontEndObservation:
    """The six outputs for the received pair ``r`` given the previous slot's
    Y sample."""
    intra = r.x * np.conj(r.y)
    inter = r.x * np.conj(prev_r_y)
    return FrontEndObservation(
        w1=float(abs(r.x) ** 2),
        w2=float(abs(r.y) ** 2),
        w3=float(2.0 * intra.real),
        w4=float(2.0 * intra.imag),
        w5=float(2.0 * inter.real),
        w6=float(2.0 * inter.imag),
    )


def observation_to_dr(w: FrontEndObservation, prev_mag_r_y: float) -> DVector:
    """Invert the front end into the observation vector.

    Requires the previous slot's Y magnitude (known from that slot's w2).
    Undefined phases (any involved intensity zero) raise
    DegeneratePhaseError instead of being silently set to 0.
    """
    if w.w1 < 0 or w.w2 < 0:
        raise ValueError("intensities cannot be negative")
    if w.w1 * w.w2 == 0.0:
        raise DegeneratePhaseError("intra-slot phase undefined: w1*w2 = 0")
    if w.w1 * prev_mag_r_y == 0.0:
        raise DegeneratePhaseError("inter-slot phase undefined: w1*prev = 0")
    theta_pp = np.arctan2(w.w4, w.w3)
    gamma_pp = np.arctan2(w.w6, w.w5)
    return DVector.from_polar(
        np.sqrt(w.w1), np.sqrt(w.w2), theta_pp, prev_mag_r_y, gamma_pp
    )
