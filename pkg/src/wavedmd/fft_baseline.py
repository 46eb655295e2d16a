"""Prior-art per-node frequency extraction: thresholded FFT magnitudes.

The trace is zero-padded to the next power of two before the transform, so
frequencies that are not exact bin multiples smear across neighboring bins
(spectral leakage). A magnitude threshold relative to the strongest bin
decides which bins count as real tones; this reproduces the baseline's
behavior, including its failure modes at short trace lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSignalError, InsufficientModesError

DEFAULT_THRESHOLD = 0.01

# Bins 0 and 1 form the DC region: leakage from the constant mode
# contaminates bin 1 even at moderate trace lengths.
DC_BINS = 2


@dataclass(frozen=True)
class FftSpectrum:
    """Non-negative-frequency bins of one node's padded transform.

    ``magnitudes`` are scaled so the maximum equals 1; ``retained`` flags
    bins at or above the threshold. omega of bin k is 2 pi k / t_padded.
    """

    node: int
    t_padded: int
    omegas: np.ndarray
    magnitudes: np.ndarray
    coefficients: np.ndarray
    retained: np.ndarray
    threshold: float

    def retained_bins(self):
        return np.nonzero(self.retained)[0]


def next_power_of_two(n):
    return 1 << max(n - 1, 0).bit_length()


def fft_local_spectrum(trace, threshold=DEFAULT_THRESHOLD, node=-1):
    """Zero-pad, transform, normalize, and threshold one node's trace."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0,1), got {threshold}")
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise DegenerateSignalError("empty trace")
    if not np.any(trace):
        raise DegenerateSignalError("all-zero trace")
    n_pad = next_power_of_two(trace.size)
    coeffs = np.fft.rfft(trace, n=n_pad)
    mags = np.abs(coeffs)
    # scale so the strongest frequency (oscillatory) magnitude is 1; the
    # DC region is excluded from the reference or it swamps every tone
    top = mags[DC_BINS:].max() if mags.size > DC_BINS else mags.max()
    if top <= 0.0:
        top = mags.max()
    mags = mags / top
    omegas = 2.0 * math.pi * np.arange(coeffs.size) / n_pad
    return FftSpectrum(
        node=node,
        t_padded=n_pad,
        omegas=omegas,
        magnitudes=mags,
        coefficients=coeffs,
        retained=mags >= threshold,
        threshold=threshold,
    )


def oscillatory_bins(spectrum):
    """Retained bin indices above the DC region, ascending."""
    bins = spectrum.retained_bins()
    return bins[bins >= DC_BINS]


def fft_omega2_estimate(spectrum):
    """Lowest retained frequency above the DC region."""
    bins = oscillatory_bins(spectrum)
    if bins.size == 0:
        raise InsufficientModesError(
            f"node {spectrum.node}: no oscillatory bin above threshold"
        )
    return float(spectrum.omegas[bins[0]])


def peak_bins(spectrum):
    """Strongest bin of each contiguous retained run above the DC region.

    Leakage smears one tone across a cluster of neighboring bins; the
    cluster's magnitude peak is where the tone dominates the other modes'
    skirts, so signs are read there.
    """
    bins = oscillatory_bins(spectrum)
    peaks = []
    start = 0
    for idx in range(1, bins.size + 1):
        if idx == bins.size or bins[idx] != bins[idx - 1] + 1:
            run = bins[start:idx]
            peaks.append(int(run[np.argmax(spectrum.magnitudes[run])]))
            start = idx
    return np.array(peaks, dtype=int)


def fft_coefficient_row(spectrum, n_modes):
    """Real coefficient parts at the first n_modes oscillatory peaks."""
    peaks = peak_bins(spectrum)
    if peaks.size < n_modes:
        raise InsufficientModesError(
            f"node {spectrum.node}: {peaks.size} oscillatory peaks, need {n_modes}"
        )
    return spectrum.coefficients[peaks[:n_modes]].real.copy()
