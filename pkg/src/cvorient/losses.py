"""Training objectives: angle loss, soft-margin triplet loss, and their combination.

Loss values are plain floats; ``*_grad`` functions return analytic gradients
with respect to their feature-map arguments.  :func:`toy_fit` exercises the
losses end to end with a per-channel affine map fitted by gradient descent.
"""

import math
from dataclasses import dataclass

import numpy as np

from .correlation import align_and_crop, estimate
from .features import fractional_shift

ALPHA = 10.0
BETA = 0.3


@dataclass(frozen=True)
class LossConfig:
    alpha: float = ALPHA
    beta: float = BETA

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")


def angle_loss(w_gt, w_est, width):
    """Orientation error in feature bins as a fraction of the maximum (half-turn) error."""
    if not width > 0:
        raise ValueError(f"feature width must be positive, got {width!r}")
    half = 0.5 * width
    d = np.mod(np.abs(np.asarray(w_gt, dtype=np.float64) - w_est), width)
    out = (half - np.abs(d - half)) / half
    return out if out.ndim else float(out)


# -- cosine distance ------------------------------------------------------------


def _norms(f1, f2):
    f1 = np.asarray(f1, dtype=np.float64)
    f2 = np.asarray(f2, dtype=np.float64)
    if f1.shape != f2.shape:
        raise ValueError(f"shape mismatch: {f1.shape} vs {f2.shape}")
    n1 = math.sqrt(np.sum(f1 * f1))
    n2 = math.sqrt(np.sum(f2 * f2))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("cosine distance of a zero feature map")
    return f1, f2, n1, n2


def cosine_distance(f1, f2):
    """``2 * (1 - cos(f1, f2))``, in ``[0, 4]``."""
    f1, f2, n1, n2 = _norms(f1, f2)
    return 2.0 * (1.0 - float(np.sum(f1 * f2)) / (n1 * n2))


def cosine_distance_grad(f1, f2):
    """Gradients of :func:`cosine_distance` with respect to ``f1`` and ``f2``."""
    f1, f2, n1, n2 = _norms(f1, f2)
    cos = float(np.sum(f1 * f2)) / (n1 * n2)
    g1 = -2.0 * (f2 / (n1 * n2) - cos * f1 / (n1 * n1))
    g2 = -2.0 * (f1 / (n1 * n2) - cos * f2 / (n2 * n2))
    return g1, g2


# -- soft-margin triplet --------------------------------------------------------


def softplus(x):
    """``ln(1 + exp(x))`` without overflow or premature underflow."""
    return np.logaddexp(0.0, x)


def sigmoid(x):
    return np.exp(-np.logaddexp(0.0, -x))


def triplet_loss(fa, fp, fn, alpha=ALPHA):
    """Weighted soft-margin triplet loss on cosine distances."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    margin = cosine_distance(fa, fp) - cosine_distance(fa, fn)
    return float(softplus(alpha * margin))


def triplet_loss_grad(fa, fp, fn, alpha=ALPHA):
    """Gradients of :func:`triplet_loss` with respect to anchor, positive, negative."""
    margin = cosine_distance(fa, fp) - cosine_distance(fa, fn)
    w = alpha * float(sigmoid(alpha * margin))
    ga_p, gp = cosine_distance_grad(fa, fp)
    ga_n, gn = cosine_distance_grad(fa, fn)
    return w * (ga_p - ga_n), w * gp, -w * gn


def combined_loss(triplet_terms, angle_terms, beta=BETA):
    """Matching loss plus ``beta`` times the angle loss (both summed exactly)."""
    if not beta >= 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    match = math.fsum(np.ravel(triplet_terms))
    angle = math.fsum(np.ravel(angle_terms))
    return match + beta * angle


# -- batch construction ---------------------------------------------------------


@dataclass
class TripletBatch:
    """Index-paired street and satellite feature maps.

    ``street`` is ``(B, H, W_g, C)``, ``satellite`` is ``(B, H, W_s, C)``.
    ``shifts[i, j]``, when given, aligns satellite ``j`` to street ``i``;
    otherwise shifts are estimated from the features.
    """

    street: np.ndarray
    satellite: np.ndarray
    w_gt: np.ndarray
    fov: float = 360.0
    shifts: np.ndarray = None

    def __post_init__(self):
        self.street = np.asarray(self.street, dtype=np.float64)
        self.satellite = np.asarray(self.satellite, dtype=np.float64)
        self.w_gt = np.asarray(self.w_gt, dtype=np.float64)
        b = len(self.street)
        if b < 2:
            raise ValueError(f"a triplet batch needs B >= 2, got {b}")
        if len(self.satellite) != b or len(self.w_gt) != b:
            raise ValueError("street, satellite and w_gt must have the same length")

    @property
    def size(self):
        return len(self.street)


@dataclass
class BatchLosses:
    triplet: np.ndarray      # 2B(B-1) soft-margin terms
    angle: np.ndarray        # B angle terms, matched pairs only
    distance: np.ndarray     # distance[i, j] = D(street_i, satellite_j aligned to street_i)
    w_est: np.ndarray        # w_est[i, j]

    def combined(self, beta=BETA):
        return combined_loss(self.triplet, self.angle, beta)


def n_triplets(b):
    return 2 * b * (b - 1)


def triplet_terms(distance, alpha=ALPHA):
    """All batch-all triplet losses from a ``(B, B)`` distance matrix.

    Street-to-satellite terms come first (anchor ``i``, negatives ``j != i``),
    then satellite-to-street terms (anchor ``j``, negatives ``i != j``).
    """
    d = np.asarray(distance, dtype=np.float64)
    b = d.shape[0]
    pos = np.diag(d)
    off = ~np.eye(b, dtype=bool)
    street_anchor = (pos[:, None] - d)[off]
    sat_anchor = (pos[None, :] - d).T[off]
    return softplus(alpha * np.concatenate([street_anchor, sat_anchor]))


def batch_triplets(batch, config=LossConfig(), method="fi", scale=10):
    """Evaluate every triplet and matched-pair angle loss in a batch."""
    b = batch.size
    width = batch.satellite.shape[2]
    if batch.shifts is not None:
        w_est = np.asarray(batch.shifts, dtype=np.float64)
    else:
        w_est = np.array(
            [[estimate(batch.street[i], batch.satellite[j], method, scale).w_est
              for j in range(b)] for i in range(b)]
        )
    dist = np.empty((b, b))
    for i in range(b):
        for j in range(b):
            aligned = align_and_crop(batch.satellite[j], w_est[i, j], batch.fov)
            dist[i, j] = cosine_distance(batch.street[i], aligned)
    return BatchLosses(
        triplet=triplet_terms(dist, config.alpha),
        angle=angle_loss(batch.w_gt, np.diag(w_est), width),
        distance=dist,
        w_est=w_est,
    )


# -- toy optimizer --------------------------------------------------------------


class DivergenceError(RuntimeError):
    def __init__(self, step, value):
        super().__init__(f"loss became non-finite ({value}) at step {step}")
        self.step = step
        self.value = value


@dataclass
class ToyFitResult:
    scale: np.ndarray
    bias: np.ndarray
    triplet_trace: np.ndarray
    angle_trace: np.ndarray
    combined_trace: np.ndarray


def make_toy_pairs(seed, b=8, height=4, width=64, channels=16, noise=0.05, harmonics=6):
    """Separable synthetic batch: street maps are shifted, noisy copies of smooth satellite maps."""
    rng = np.random.default_rng(seed)
    k = np.arange(1, harmonics + 1)
    amp = rng.normal(size=(b, height, channels, harmonics)) / k
    phase = rng.uniform(0, 2 * np.pi, size=(b, height, channels, harmonics))
    x = 2 * np.pi * np.arange(width) / width
    sat = np.einsum("bhck,bhckx->bhxc", amp, np.cos(k[:, None] * x + phase[..., None]))
    sat += rng.normal(size=(b, 1, 1, channels))
    w_gt = rng.integers(0, width * 8, size=b) / 8.0
    street = np.stack([fractional_shift(s, w) for s, w in zip(sat, w_gt)])
    street += noise * rng.normal(size=street.shape)
    return street, sat, w_gt


def _affine_loss_and_grad(street, aligned, scale, bias, alpha):
    """Mean triplet loss and its gradient for street maps ``street * scale + bias``.

    ``aligned[i, j]`` is satellite ``j`` aligned to street ``i`` (held fixed).
    """
    b = street.shape[0]
    mapped = street * scale + bias
    dist = np.empty((b, b))
    grads = np.empty((b, b) + street.shape[1:])
    for i in range(b):
        for j in range(b):
            dist[i, j] = cosine_distance(mapped[i], aligned[i, j])
            grads[i, j] = cosine_distance_grad(mapped[i], aligned[i, j])[0]
    terms = triplet_terms(dist, alpha)
    count = n_triplets(b)

    pos = np.diag(dist)
    off = ~np.eye(b, dtype=bool)
    # dL/d dist[i, j], accumulated over both matching directions
    w_street = alpha * sigmoid(alpha * (pos[:, None] - dist)) * off
    w_sat = alpha * sigmoid(alpha * (pos[None, :] - dist)) * off
    d_dist = -(w_street + w_sat)
    d_dist[np.diag_indices(b)] = w_street.sum(axis=1) + w_sat.sum(axis=0)
    d_dist /= count

    d_mapped = np.einsum("ij,ij...->i...", d_dist, grads)
    d_scale = np.sum(d_mapped * street, axis=(0, 1, 2))
    d_bias = np.sum(d_mapped, axis=(0, 1, 2))
    return math.fsum(terms) / count, d_scale, d_bias


def toy_fit(street, satellite, w_gt, steps=200, lr=0.05, config=LossConfig(),
            init="identity", seed=0, method="fi", scale_factor=10):
    """Fit a per-channel scale and bias on street features by gradient descent.

    Satellite maps are aligned with the known ground truth of each anchor, so
    the matching loss is smooth in the parameters.  The angle loss of the
    matched pairs is re-estimated every step and reported, not optimized.
    Raises :class:`DivergenceError` if the loss stops being finite.
    """
    street = np.asarray(street, dtype=np.float64)
    satellite = np.asarray(satellite, dtype=np.float64)
    w_gt = np.asarray(w_gt, dtype=np.float64)
    b, _, width, channels = satellite.shape
    if b < 2:
        raise ValueError("toy_fit needs at least 2 pairs")
    if steps < 1:
        raise ValueError("steps must be >= 1")

    if init == "identity":
        scale, bias = np.ones(channels), np.zeros(channels)
    elif init == "random":
        rng = np.random.default_rng(seed)
        scale = rng.uniform(-1.0, 1.0, channels)
        bias = rng.normal(0.0, 1.0, channels)
    else:
        raise ValueError(f"unknown init {init!r}")

    aligned = np.stack([[align_and_crop(satellite[j], w_gt[i]) for j in range(b)]
                        for i in range(b)])

    trip, ang, comb = [], [], []
    for step in range(steps + 1):
        with np.errstate(invalid="ignore"):
            loss, d_scale, d_bias = _affine_loss_and_grad(
                street, aligned, scale, bias, config.alpha)
        if not math.isfinite(loss):
            raise DivergenceError(step, loss)
        mapped = street * scale + bias
        est = [estimate(mapped[i], satellite[i], method, scale_factor).w_est for i in range(b)]
        angle = float(np.mean(angle_loss(w_gt, np.array(est), width)))
        total = loss + config.beta * angle
        trip.append(loss)
        ang.append(angle)
        comb.append(total)
        if step < steps:
            scale = scale - lr * d_scale
            bias = bias - lr * d_bias
    return ToyFitResult(scale, bias, np.array(trip), np.array(ang), np.array(comb))


# -- gradient verification ------------------------------------------------------


def finite_difference(fn, x, h=1e-5):
    """Central-difference gradient of scalar ``fn`` at array ``x``."""
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        up = fn(x)
        flat[k] = orig - h
        down = fn(x)
        flat[k] = orig
        g[k] = (up - down) / (2 * h)
    return grad


def relative_error(analytic, numeric):
    """Norm-wise relative discrepancy ``||a - n|| / max(||a||, ||n||)``."""
    diff = np.linalg.norm(np.ravel(analytic) - np.ravel(numeric))
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    return 0.0 if scale == 0.0 else float(diff / scale)


def gradcheck(trials=100, seed=0, shape=(2, 8, 4), alpha=ALPHA, h=1e-5):
    """Largest relative error between analytic and central-difference gradients.

    Returns a dict with the worst errors for the cosine distance and the
    triplet loss over ``trials`` random feature triplets.
    """
    rng = np.random.default_rng(seed)
    worst_cos = worst_trip = 0.0
    for _ in range(trials):
        fa, fp, fn = rng.normal(size=(3,) + tuple(shape))
        g1, g2 = cosine_distance_grad(fa, fp)
        worst_cos = max(
            worst_cos,
            relative_error(g1, finite_difference(lambda x: cosine_distance(x, fp), fa, h)),
            relative_error(g2, finite_difference(lambda x: cosine_distance(fa, x), fp, h)),
        )
        ga, gp, gn = triplet_loss_grad(fa, fp, fn, alpha)
        worst_trip = max(
            worst_trip,
            relative_error(ga, finite_difference(lambda x: triplet_loss(x, fp, fn, alpha), fa, h)),
            relative_error(gp, finite_difference(lambda x: triplet_loss(fa, x, fn, alpha), fp, h)),
            relative_error(gn, finite_difference(lambda x: triplet_loss(fa, fp, x, alpha), fn, h)),
        )
    return {"cosine_distance": worst_cos, "triplet_loss": worst_trip, "trials": trials}
