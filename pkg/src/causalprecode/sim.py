"""Monte Carlo validation of a precoder over the actual channel Y = X + S + N.

Each trial draws a message and an interference symbol, transmits the
precoded signal level, adds Gaussian noise, and decodes by maximum mixture
likelihood over the code's symbols. Reported alongside the symbol error
rate is a plug-in mutual-information estimate: log2 M minus the mean
entropy of the exact decoder posterior.

Determinism: trial k consumes exactly one Philox counter block (four 64-bit
words), keyed by the seed, and trials are processed in fixed-size batches
whose partial sums are merged in batch order. Reports are therefore
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .model import ChannelSpec, PrecoderCode, snr_db_of

_DRAWS_PER_TRIAL = 4  # one Philox 4x64 block; draw 3 is reserved
_BATCH = 1 << 16


@dataclass(frozen=True)
class SimReport:
    trials: int
    symbol_errors: int
    ser: float
    empirical_mi_bits: float
    seed: int


def _check_inputs(code: PrecoderCode, spec: ChannelSpec) -> np.ndarray:
    if spec.noise_power <= 0.0:
        raise ValueError("degenerate noise; use the noisefree module")
    if code.q != spec.q:
        raise ValueError(f"code has {code.q} components per symbol, spec has {spec.q}")
    if any(i > spec.m for t in code.symbols for i in t):
        raise ValueError("code indexes beyond the constellation")
    x = np.asarray(spec.constellation)
    s = np.asarray(spec.interference_levels)
    idx = np.array(code.symbols) - 1  # (M, Q)
    return x[idx] + s[None, :]  # per-symbol mixture means


def _log_likelihoods(y: np.ndarray, means: np.ndarray, spec: ChannelSpec) -> np.ndarray:
    """Log mixture likelihood of each message, shape (len(y), M).

    The Gaussian normalization constant is dropped; it cancels in both the
    argmax decision and the posterior.
    """
    log_r = np.log(np.asarray(spec.interference_probs))
    z = y[:, None, None] - means[None, :, :]
    log_mix = log_r[None, None, :] - 0.5 * z * z / spec.noise_power
    peak = log_mix.max(axis=2, keepdims=True)
    return peak[..., 0] + np.log(np.exp(log_mix - peak).sum(axis=2))


def decode(y: float, code: PrecoderCode, spec: ChannelSpec) -> int:
    """Maximum-likelihood message for output y; ties go to the smaller index."""
    means = _check_inputs(code, spec)
    loglik = _log_likelihoods(np.asarray([float(y)]), means, spec)
    return int(np.argmax(loglik[0]))


def _run_batch(
    seed: int,
    start: int,
    count: int,
    means: np.ndarray,
    spec: ChannelSpec,
) -> tuple[int, float]:
    """Simulate trials [start, start+count); returns (errors, sum of posterior entropies)."""
    bits = np.random.Philox(key=seed)
    bits.advance(start)  # one counter block per trial
    u = np.random.Generator(bits).random((count, _DRAWS_PER_TRIAL))
    m = means.shape[0]
    messages = np.minimum((u[:, 0] * m).astype(np.int64), m - 1)
    cum_r = np.cumsum(np.asarray(spec.interference_probs))
    states = np.minimum(
        np.searchsorted(cum_r, u[:, 1], side="right"), spec.q - 1
    )
    noise = ndtri(np.clip(u[:, 2], 1e-300, 1.0 - 1e-16)) * math.sqrt(spec.noise_power)
    y = means[messages, states] + noise
    loglik = _log_likelihoods(y, means, spec)
    decoded = np.argmax(loglik, axis=1)
    errors = int(np.count_nonzero(decoded != messages))
    shift = loglik - loglik.max(axis=1, keepdims=True)
    weights = np.exp(shift)
    post = weights / weights.sum(axis=1, keepdims=True)
    safe = np.where(post > 0.0, post, 1.0)
    entropy_bits = -(post * np.log2(safe)).sum(axis=1)
    return errors, float(entropy_bits.sum())


def simulate(
    code: PrecoderCode,
    spec: ChannelSpec,
    trials: int,
    seed: int,
    workers: int = 1,
) -> SimReport:
    """Monte Carlo run of `trials` one-shot transmissions.

    Deterministic given (seed, trials, code, spec); `workers` only
    parallelizes fixed batches and never changes the result.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    means = _check_inputs(code, spec)
    starts = list(range(0, trials, _BATCH))
    jobs = [(s, min(_BATCH, trials - s)) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda job: _run_batch(seed, job[0], job[1], means, spec), jobs)
            )
    else:
        results = [_run_batch(seed, s, n, means, spec) for s, n in jobs]
    errors = sum(r[0] for r in results)
    mean_posterior_entropy = math.fsum(r[1] for r in results) / trials
    mi = math.log2(code.m) - mean_posterior_entropy
    return SimReport(
        trials=trials,
        symbol_errors=errors,
        ser=errors / trials,
        empirical_mi_bits=mi,
        seed=seed,
    )


CSV_HEADER = "seed,trials,snr_db,ser,empirical_mi_bits"


def csv_row(report: SimReport, spec: ChannelSpec) -> str:
    """One CSV row: seed, trials, snr_db, ser, empirical_mi_bits."""
    return ",".join(
        [
            str(report.seed),
            str(report.trials),
            f"{snr_db_of(spec):.12g}",
            f"{report.ser:.12g}",
            f"{report.empirical_mi_bits:.12g}",
        ]
    )
