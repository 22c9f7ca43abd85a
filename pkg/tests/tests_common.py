"""Shared builders for detector tests: simulated noisy slots with the true
previous-slot state (so oracle and implementation see identical inputs)."""

from dataclasses import dataclass

from stokes4d.constellation import db_to_linear, snr_to_noise_sigma_sq
from stokes4d.channel import sample_channel
from stokes4d.detection import MappedAlphabet, SymbolIndices
from stokes4d.frontend import DVector
from stokes4d.harness import simulate_block


@dataclass
class Slot:
    alphabet: MappedAlphabet
    d_r: DVector
    prev_sym3: int
    truth: SymbolIndices
    sigma_sq: float

    def __iter__(self):
        return iter((self.alphabet, self.d_r, self.prev_sym3, self.sigma_sq))


def make_noisy_slots(
    constellation,
    rng,
    count,
    snr_db=None,
    sigma_sq=None,
    slots_per_block=4,
):
    """Yield ``count`` independent noisy slots across random channels."""
    if sigma_sq is None:
        sigma_sq = snr_to_noise_sigma_sq(constellation, db_to_linear(snr_db))
    produced = 0
    while produced < count:
        h = sample_channel(rng)
        ma = MappedAlphabet(constellation, h)
        blk = simulate_block(constellation, h, slots_per_block, sigma_sq, rng)
        prev = ma.pilot_sym3
        for j in range(slots_per_block):
            if produced >= count:
                break
            d_r = DVector.from_polar(
                blk.rmx[j], blk.rmy[j], blk.th2[j], blk.dmy[j], blk.gm2[j]
            )
            truth = SymbolIndices(
                int(blk.rings_x[j]),
                int(blk.rings_y[j]),
                int(blk.theta_idx[j]),
                int(blk.gamma_idx[j]),
            )
            yield Slot(ma, d_r, prev, truth, sigma_sq)
            prev = ma.sym3_index(truth.ring_x, truth.ring_y, truth.theta_idx)
            produced += 1
