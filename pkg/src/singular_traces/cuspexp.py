"""
Fourier expansions of (cz+d)^{-k} g(gamma z) at arbitrary cusps, extracted
numerically by sampling a horocycle and transforming the samples.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from mpmath import mp, mpc, mpf

from .arith import Matrix2Z
from .exceptions import DetectionError, InvalidArgumentError
from .logging_config import get_logger
from .lreg import CuspExpansion, normalized
from .modeval import FormSpec, Growth, available_forms, get_form
from .specfun import power

logger = get_logger(__name__)

MAX_WIDTH = 16
TEST_POINTS = ("0.1", "0.37", "0.73")
DETECTION_TOLERANCE = mp.mpf("1e-8")


def fft(values: Sequence[mpc], inverse: bool = False) -> List[mpc]:
    """Radix-2 Cooley-Tukey transform sum_m v_m e^{-+2 pi i n m / M} (no scaling)."""
    size = len(values)
    if size == 0 or size & (size - 1):
        raise InvalidArgumentError(f"FFT length must be a power of two, got {size}")
    out = [mp.mpc(v) for v in values]
    # bit reversal
    j = 0
    for i in range(1, size):
        bit = size >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            out[i], out[j] = out[j], out[i]
    sign = 1 if inverse else -1
    length = 2
    while length <= size:
        root = mp.expjpi(sign * mp.mpf(2) / length)
        half = length // 2
        twiddles = [mp.mpc(1)]
        for _ in range(half - 1):
            twiddles.append(twiddles[-1] * root)
        for start in range(0, size, length):
            for m in range(half):
                u = out[start + m]
                v = out[start + m + half] * twiddles[m]
                out[start + m] = u + v
                out[start + m + half] = u - v
        length *= 2
    return out


def slashed(g: FormSpec, gamma: Matrix2Z) -> Callable[[mpc], mpc]:
    """tau -> (c tau + d)^{-k} g(gamma tau)."""
    gamma = normalized(gamma)
    k = mp.mpf(g.weight)

    def h(tau: mpc) -> mpc:
        tau = mp.mpc(tau)
        return power(gamma.j(tau), -k) * g.evaluate(gamma.act(tau))

    return h


def detect_width(
    h: Callable[[mpc], mpc], y0: mpf, max_width: int = MAX_WIDTH
) -> Tuple[int, mpf]:
    """Smallest lambda with h(x + lambda) = e^{2 pi i kappa} h(x), and kappa in [0, 1)."""
    points = [mp.mpc(mp.mpf(x), y0) for x in TEST_POINTS]
    base = [h(z) for z in points]
    diagnostics: Dict[str, str] = {}
    for width in range(1, max_width + 1):
        ratios = [h(z + width) / b for z, b in zip(points, base)]
        drift = max(abs(abs(r) - 1) for r in ratios)
        spread = max(abs(r - ratios[0]) for r in ratios)
        diagnostics[str(width)] = f"modulus {mp.nstr(drift, 3)}, spread {mp.nstr(spread, 3)}"
        if drift < DETECTION_TOLERANCE and spread < DETECTION_TOLERANCE:
            kappa = mp.arg(ratios[0]) / (2 * mp.pi)
            kappa = kappa - mp.floor(kappa)
            if kappa > 1 - DETECTION_TOLERANCE or kappa < DETECTION_TOLERANCE:
                kappa = mp.zero
            logger.debug("Detected width %d, kappa %s", width, mp.nstr(kappa, 10))
            return width, kappa
    raise DetectionError(
        f"No period up to {max_width} found for the expansion", diagnostics=diagnostics
    )


def _sample_worker(
    label: str, gamma: Tuple[int, int, int, int], points: List[Tuple[str, str]], dps: int
) -> List[Tuple[str, str]]:
    with mp.workdps(dps):
        h = slashed(get_form(label), Matrix2Z(*gamma))
        out = []
        for x, y in points:
            value = h(mp.mpc(mp.mpf(x), mp.mpf(y)))
            out.append((mp.nstr(value.real, dps), mp.nstr(value.imag, dps)))
        return out


def _samples(
    g: FormSpec, gamma: Matrix2Z, xs: List[mpf], y0: mpf, jobs: int
) -> List[mpc]:
    if jobs <= 1 or g.label not in available_forms():
        h = slashed(g, gamma)
        return [h(mp.mpc(x, y0)) for x in xs]
    dps = mp.dps + 5
    chunk = max(1, len(xs) // jobs)
    batches = [
        [(mp.nstr(x, dps), mp.nstr(y0, dps)) for x in xs[i:i + chunk]]
        for i in range(0, len(xs), chunk)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_sample_worker, g.label, gamma.as_tuple(), batch, dps)
            for batch in batches
        ]
        results = [future.result() for future in futures]
    return [mp.mpc(mp.mpf(re_), mp.mpf(im_)) for batch in results for re_, im_ in batch]


def expand_at_cusp(
    g: FormSpec,
    gamma: Matrix2Z,
    y0: mpf = mp.mpf("0.5"),
    samples: int = 1024,
    count: Optional[int] = None,
    principal: int = 2,
    jobs: int = 1,
) -> CuspExpansion:
    """Expansion of g at the cusp gamma(i*infinity) from samples on Im tau = y0.

    Coefficients n in [-principal, count) are returned; the upper end is
    capped where rounding noise, amplified by e^{2 pi n y0 / lambda}, would
    exceed half the working precision.
    """
    if samples < 4 or samples & (samples - 1):
        raise InvalidArgumentError(f"Sample count must be a power of two >= 4, got {samples}")
    y0 = mp.mpf(y0)
    if y0 <= 0:
        raise InvalidArgumentError("Sampling height must be positive")
    gamma = normalized(gamma)
    h = slashed(g, gamma)
    width, kappa = detect_width(h, y0)
    noise_cap = int(mp.floor(mp.dps / 2 * mp.log(10) * width / (2 * mp.pi * y0)))
    top = min(count if count is not None else samples // 4, noise_cap, samples // 2)
    xs = [mp.mpf(width) * m / samples for m in range(samples)]
    values = _samples(g, gamma, xs, y0, jobs)
    twisted = [v * mp.expjpi(-2 * kappa * m / samples) for m, v in enumerate(values)]
    spectrum = fft(twisted)

    threshold = mp.mpf(10) ** (-(mp.dps // 2))
    coefficients: Dict[int, mpc] = {}
    for n in range(-principal, top):
        c_n = spectrum[n % samples] / samples
        b_n = c_n * mp.exp(2 * mp.pi * (n + kappa) * y0 / width)
        coefficients[n] = b_n if abs(b_n) > threshold else mp.mpc(0)
    while len(coefficients) > 1 and coefficients[min(coefficients)] == 0:
        del coefficients[min(coefficients)]

    peak = max(abs(v) for v in values)
    alias = peak * mp.exp(-2 * mp.pi * (samples // 2 - top) * y0 / width)
    biggest = max(abs(v) for v in coefficients.values())
    logger.info(
        "Expansion of %s at %s: width %d, kappa %s, %d coefficients",
        g.label, gamma, width, mp.nstr(kappa, 8), len(coefficients),
    )
    return CuspExpansion(
        gamma,
        mp.mpf(g.weight),
        lambda n: coefficients.get(n, mp.mpc(0)),
        min(coefficients),
        kappa=kappa,
        lam=width,
        n_max=max(coefficients),
        growth=Growth(biggest, mp.mpf(0)),
        error=alias,
    )


def resynthesis_error(expansion: CuspExpansion, g: FormSpec, y0: mpf, points: int = 8) -> mpf:
    """Largest deviation between the expansion and direct evaluation on Im tau = y0."""
    h = slashed(g, expansion.gamma)
    worst = mp.mpf(0)
    for m in range(points):
        tau = mp.mpc(mp.mpf(expansion.lam) * m / points, y0)
        worst = max(worst, abs(expansion.value(tau) - h(tau)))
    return worst
