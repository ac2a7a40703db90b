"""Reference computations that share no code with the package under test."""

import math

import numpy as np
from scipy import integrate, stats


def two_weight_cdf(w1, w2, x):
    """P(w1 G1^2 + w2 G2^2 <= x) by integrating the conditional chi-square(1) CDF."""
    lim = math.sqrt(x / w1)

    def inner(g):
        rest = (x - w1 * g * g) / w2
        return (2.0 * stats.norm.cdf(math.sqrt(max(rest, 0.0))) - 1.0) * stats.norm.pdf(g)

    val, _ = integrate.quad(inner, -lim, lim, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def dense_convolution_cdf(w1, w2, x, h=2e-5):
    """Same probability from a dense grid convolution of the two scaled chi-square(1) densities."""
    # substitute t = s^2 to remove the integrable singularity at 0
    s = np.arange(h / 2, math.sqrt(x / w1), h)
    t = s * s
    rest = (x - w1 * t) / w2
    # P(w1 G^2 in dt) = 2 s f(t) ds, f the chi2(1) density scaled by w1
    dens = stats.chi2.pdf(t, 1) * 2.0 * s
    return float(np.sum(dens * stats.chi2.cdf(rest, 1)) * h)


def rademacher_ball_distance(n, d):
    """Exact sup_r |P(|W| <= r) - P(|Z| <= r)| for i.i.d. Rademacher coordinates.

    |W|^2 = (4/n) sum_j K_j^2 with K_j = Binomial(n, 1/2) - n/2 (n even); the
    law of the integer sum is obtained by FFT convolution.
    """
    if n % 2:
        raise ValueError("n must be even")
    h = n // 2
    ks = np.arange(-h, h + 1)
    pk = stats.binom.pmf(ks + h, n, 0.5)
    keep = pk > 1e-300
    ks, pk = ks[keep], pk[keep]
    mean = d * n / 4.0
    sd = math.sqrt(2.0 * d) * n / 4.0
    size = 1 << max(12, int(math.ceil(math.log2(60.0 * sd))))
    single = np.zeros(size)
    np.add.at(single, (ks * ks) % size, pk)
    total = np.fft.irfft(np.fft.rfft(single) ** d, size)
    lo = int(mean - size // 2)
    idx = np.arange(lo, lo + size)
    mass = np.clip(total[idx % size], 0.0, None)
    cdf = np.cumsum(mass)
    ref = stats.chi2.cdf(4.0 * idx / n, d)
    return float(max(np.max(np.abs(cdf - ref)), np.max(np.abs(cdf - mass - ref))))


def multiplier_limit_distance(n, d, m, seed):
    """KS distance between V chi2_d (V = chi2_n / n) and chi2_d by direct simulation."""
    rng = np.random.default_rng(seed)
    v = rng.chisquare(n, size=m) / n
    samples = v * rng.chisquare(d, size=m)
    return float(stats.kstest(samples, stats.chi2(d).cdf).statistic)


def multiplier_asymptotic_distance():
    """sup_t |Phi(t) - Phi(t / sqrt 2)|, the d = n -> infinity limit with Var(e^2) = 2."""
    t = math.sqrt(2.0 * math.log(2.0))
    return stats.norm.cdf(t) - stats.norm.cdf(t / math.sqrt(2.0))
