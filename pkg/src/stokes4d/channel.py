"""Fiber rotation channel, additive optical noise, and the intensity-domain
(Stokes-like) view of the rotation.

The channel applies a unitary 2x2 Jones matrix ``[[a, b], [-b*, a*]]`` with
|a|^2 + |b|^2 = 1, then adds circular complex Gaussian noise per polarization
(real and imaginary parts with variance ``sigma_sq`` each).  The rotation also
acts linearly on the intensity quadruple (|v_x|^2, |v_y|^2, 2|v_x||v_y|cos t,
2|v_x||v_y|sin t); that 4x4 real map and the fourth-dimension fading
coefficient live here too.
"""

from dataclasses import dataclass, field

import numpy as np

from .constellation import wrap_angle
from .errors import DeepFadeError, DegeneratePhaseError, InconsistentQuadrupleError

UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class JonesPair:
    """Both polarizations of one slot.  Fields may also hold equally shaped
    complex arrays; every operation in this module broadcasts."""

    x: complex
    y: complex

    def norm_sq(self):
        return np.abs(self.x) ** 2 + np.abs(self.y) ** 2


@dataclass(frozen=True)
class ChannelMatrix:
    """The rotation [[a, b], [-b*, a*]] with |a|^2 + |b|^2 = 1."""

    a: complex
    b: complex

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > UNITARITY_TOL:
            raise ValueError("|a|^2 + |b|^2 must equal 1")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.b], [-np.conj(self.b), np.conj(self.a)]], dtype=complex
        )

    def inverse(self) -> "ChannelMatrix":
        # conjugate transpose, exact for this family
        return ChannelMatrix(np.conj(self.a), -self.b)


@dataclass(frozen=True)
class StokesMap:
    """The 4x4 real matrix carrying the intensity quadruple through the
    rotation (input quadruple in the transmit domain, output after it)."""

    m: np.ndarray = field(repr=False)


def sample_channel(rng: np.random.Generator) -> ChannelMatrix:
    """Draw a rotation uniformly (Haar measure on the matrix family).

    Parameterization: a = cos(phi) e^{i alpha}, b = sin(phi) e^{i beta} with
    cos(2 phi) uniform on [-1, 1] and alpha, beta uniform on [-pi, pi); this
    makes (Re a, Im a, Re b, Im b) uniform on the unit 3-sphere.
    """
    cos_two_phi = rng.uniform(-1.0, 1.0)
    phi = 0.5 * np.arccos(cos_two_phi)
    alpha, beta = rng.uniform(-np.pi, np.pi, size=2)
    return ChannelMatrix(
        np.cos(phi) * np.exp(1j * alpha), np.sin(phi) * np.exp(1j * beta)
    )


def sample_diagonal_channel(rng: np.random.Generator) -> ChannelMatrix:
    """Draw a rotation with b = 0 (pure per-polarization phase, a = e^{i zeta})."""
    zeta = rng.uniform(-np.pi, np.pi)
    return ChannelMatrix(np.exp(1j * zeta), 0.0)


def apply_channel(h: ChannelMatrix, e: JonesPair) -> JonesPair:
    """k = H e; the norm of e is preserved."""
    return JonesPair(
        h.a * e.x + h.b * e.y, -np.conj(h.b) * e.x + np.conj(h.a) * e.y
    )


def add_noise(k: JonesPair, sigma_sq: float, rng: np.random.Generator) -> JonesPair:
    """Add circular complex Gaussian noise, variance sigma_sq per quadrature.

    Draw order is fixed (x real, x imag, y real, y imag) so that seeded
    streams are reproducible.  sigma_sq = 0 returns k unchanged, drawing
    nothing.
    """
    if sigma_sq < 0:
        raise ValueError("noise variance must be nonnegative")
    if sigma_sq == 0.0:
        return k
    s = np.sqrt(sigma_sq)
    shape = np.shape(k.x)
    nxr = rng.standard_normal(shape)
    nxi = rng.standard_normal(shape)
    nyr = rng.standard_normal(shape)
    nyi = rng.standard_normal(shape)
    return JonesPair(k.x + s * (nxr + 1j * nxi), k.y + s * (nyr + 1j * nyi))


def intensity_quad(mag_x, mag_y, theta) -> np.ndarray:
    """Stack the intensity quadruple for given magnitudes and phase difference."""
    mag_x = np.asarray(mag_x, dtype=float)
    mag_y = np.asarray(mag_y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    cross = 2.0 * mag_x * mag_y
    return np.stack(
        [mag_x**2, mag_y**2, cross * np.cos(theta), cross * np.sin(theta)]
    )


def stokes_map(h: ChannelMatrix) -> StokesMap:
    """The 4x4 real matrix mapping the transmit-domain intensity quadruple to
    the post-rotation one."""
    a, b = h.a, h.b
    ab_conj = a * np.conj(b)
    ab = a * b
    return StokesMap(
        np.array(
            [
                [abs(a) ** 2, abs(b) ** 2, ab_conj.real, -ab_conj.imag],
                [abs(b) ** 2, abs(a) ** 2, -ab_conj.real, ab_conj.imag],
                [-2 * ab.real, 2 * ab.real, (a * a - b * b).real, -(a * a + b * b).imag],
                [-2 * ab.imag, 2 * ab.imag, (a * a - b * b).imag, (a * a + b * b).real],
            ]
        )
    )


def invert_stokes_map(m: StokesMap, k_quad, tol: float = 1e-9):
    """Recover (mag_x, mag_y, theta) in the transmit domain from a
    post-rotation intensity quadruple.

    Raises InconsistentQuadrupleError when the solved intensities are negative
    beyond tolerance, and DegeneratePhaseError when a zero magnitude leaves
    theta undefined.
    """
    q = np.linalg.solve(m.m, np.asarray(k_quad, dtype=float))
    scale = max(abs(q[0]), abs(q[1]), 1e-300)
    if q[0] < -tol * scale or q[1] < -tol * scale:
        raise InconsistentQuadrupleError(
            f"quadruple maps to negative intensities {q[0]!r}, {q[1]!r}"
        )
    mag_x = float(np.sqrt(max(q[0], 0.0)))
    mag_y = float(np.sqrt(max(q[1], 0.0)))
    if mag_x * mag_y <= tol * scale:
        raise DegeneratePhaseError("zero magnitude: intra-slot phase undefined")
    theta = float(np.arctan2(q[3], q[2]))
    return mag_x, mag_y, theta


def fading_coefficient_entries(a, b, current, previous):
    """Fading coefficient from raw rotation entries; everything broadcasts
    (used batched, with per-block ``a``/``b`` arrays)."""
    mx, my, th = (np.asarray(v) for v in current)
    pmx, pmy, pth = (np.asarray(v) for v in previous)
    return (
        a * a * mx * pmy
        - b * b * my * pmx * np.exp(-1j * (th + pth))
        - a * b * mx * pmx * np.exp(-1j * pth)
        + a * b * my * pmy * np.exp(-1j * th)
    )


def fading_coefficient(h: ChannelMatrix, current, previous):
    """Fourth-dimension fading coefficient for a (previous, current) slot pair.

    ``current`` and ``previous`` are (mag_x, mag_y, theta) triples in the
    transmit domain; array-valued entries broadcast.  The post-rotation
    inter-slot phase is the transmit one plus the argument of this
    coefficient, and its magnitude equals |k_x| * |previous k_y| in the
    noiseless chain.
    """
    return fading_coefficient_entries(h.a, h.b, current, previous)


def recover_gamma(
    h: ChannelMatrix,
    current,
    previous,
    gamma_prime: float,
    k_mags,
    tol: float = 1e-12,
) -> float:
    """Undo the fading rotation: gamma = gamma' - arg(c).

    ``k_mags`` is (|k_x|, |previous k_y|); both must be positive for gamma'
    to be defined at all.  Raises DeepFadeError when the coefficient is
    numerically zero (fourth dimension unrecoverable).
    """
    kx_mag, prev_ky_mag = k_mags
    if not kx_mag * prev_ky_mag > 0:
        raise DegeneratePhaseError("inter-slot phase undefined at zero magnitude")
    c = fading_coefficient(h, current, previous)
    mx, my, _ = (float(v) for v in current)
    pmx, pmy, _ = (float(v) for v in previous)
    scale = mx * pmy + my * pmx + mx * pmx + my * pmy
    if abs(c) <= tol * max(scale, 1e-300):
        raise DeepFadeError("fading coefficient vanished; deep fade")
    return float(wrap_angle(gamma_prime - np.angle(c)))
