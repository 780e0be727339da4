"""Mirror (reflection) coupling of two copies of a Markov diffusion in R^d.

Both copies are driven by the same Gaussian increments dB; the second copy
sees them reflected in the hyperplane orthogonal to u = sigma(X')^-1 Y /
||sigma(X')^-1 Y||, with Y = X - X'. Exact coupling is never observed in
discrete time, so the copies are declared coupled (and merged) once the
straight segment between consecutive values of Y passes within delta_c of
the origin.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ArgumentError, SolverError
from .streams import GaussianStream

logger = logging.getLogger(__name__)

_CENSORED, _COUPLED, _SEPARATED = 0, 1, 2
_SINGULAR_RATIO = 1e-12


@dataclass(frozen=True)
class MarkovDiffusion:
    """Coefficients of dX = sigma_pi(X) dB + mu_pi(X) dt under a fixed policy.

    ``sigma_pi`` maps a batch of states of shape (m, d) to (m, d, d) and
    ``mu_pi`` maps it to (m, d).
    """

    d: int
    sigma_pi: Callable[[np.ndarray], np.ndarray]
    mu_pi: Callable[[np.ndarray], np.ndarray]
    lambda_: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentError("Dimensao d deve ser >= 1.")
        if not self.lambda_ > 0:
            raise ArgumentError("lambda deve ser positivo.")

    def sigma(self, states: np.ndarray) -> np.ndarray:
        m = states.shape[0]
        return np.array(
            np.broadcast_to(np.asarray(self.sigma_pi(states), dtype=float), (m, self.d, self.d))
        )

    def mu(self, states: np.ndarray) -> np.ndarray:
        m = states.shape[0]
        return np.array(np.broadcast_to(np.asarray(self.mu_pi(states), dtype=float), (m, self.d)))


def isotropic_diffusion(
    d: int,
    scale: Callable[[np.ndarray], np.ndarray] | None = None,
    lambda_: float = 1.0,
) -> MarkovDiffusion:
    """sigma(x) = scale(x) I and zero drift; scale defaults to 1."""
    identity = np.eye(d)

    def sigma_pi(states):
        if scale is None:
            return np.broadcast_to(identity, (states.shape[0], d, d))
        return np.asarray(scale(states), dtype=float)[:, None, None] * identity

    def mu_pi(states):
        return np.zeros_like(states)

    return MarkovDiffusion(d=d, sigma_pi=sigma_pi, mu_pi=mu_pi, lambda_=lambda_)


def ellipticity_floor(diff: MarkovDiffusion, states: np.ndarray) -> float:
    """Smallest eigenvalue of sigma sigma^T over the sampled states."""
    sig = diff.sigma(np.atleast_2d(np.asarray(states, dtype=float)))
    gram = sig @ np.swapaxes(sig, 1, 2)
    return float(np.min(np.linalg.eigvalsh(gram)))


def check_ellipticity(diff: MarkovDiffusion, states: np.ndarray, tolerance: float = 1e-12) -> float:
    floor = ellipticity_floor(diff, states)
    if floor < diff.lambda_ - tolerance:
        raise ArgumentError(
            f"sigma sigma^T com autovalor {floor} abaixo de lambda={diff.lambda_}."
        )
    return floor


def reflection_matrices(sigma_prime: np.ndarray, y: np.ndarray) -> np.ndarray:
    """H = I - 2 u u^T with u = sigma'^-1 y / ||sigma'^-1 y||, batched over axis 0."""
    sigma_prime = np.asarray(sigma_prime, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y.shape[-1]
    scale = np.max(np.abs(sigma_prime), axis=(1, 2)) ** d
    det = np.abs(np.linalg.det(sigma_prime))
    singular = ~(det > _SINGULAR_RATIO * scale)
    if np.any(singular):
        raise SolverError(
            f"sigma(X') numericamente singular (|det|={det[singular][0]}).",
            node=int(np.argmax(singular)),
        )
    try:
        z = np.linalg.solve(sigma_prime, y[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Falha ao resolver sigma(X') u = Y: {exc}.") from exc
    u = z / np.linalg.norm(z, axis=1, keepdims=True)
    return np.eye(d)[None, :, :] - 2.0 * u[:, :, None] * u[:, None, :]


def _step(
    diff: MarkovDiffusion, x: np.ndarray, x_prime: np.ndarray, dB: np.ndarray, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    sigma_prime = diff.sigma(x_prime)
    h = reflection_matrices(sigma_prime, x - x_prime)
    reflected = np.einsum("mij,mj->mi", h, dB)
    x_next = x + np.einsum("mij,mj->mi", diff.sigma(x), dB) + diff.mu(x) * dt
    x_prime_next = (
        x_prime + np.einsum("mij,mj->mi", sigma_prime, reflected) + diff.mu(x_prime) * dt
    )
    return x_next, x_prime_next


def _euler(diff: MarkovDiffusion, x: np.ndarray, dB: np.ndarray, dt: float) -> np.ndarray:
    return x + np.einsum("mij,mj->mi", diff.sigma(x), dB) + diff.mu(x) * dt


def _segment_distance(y_prev: np.ndarray, y_next: np.ndarray) -> np.ndarray:
    """Distance from the origin to each segment [y_prev, y_next]."""
    step = y_next - y_prev
    length2 = np.einsum("mi,mi->m", step, step)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(length2 > 0, -np.einsum("mi,mi->m", y_prev, step) / length2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(y_prev + t[:, None] * step, axis=1)


def _validate_pair(
    diff: MarkovDiffusion, x, x_prime, phi: float, delta_c: float, dt: float, t_max: float
) -> tuple[np.ndarray, np.ndarray, float]:
    x = np.asarray(x, dtype=float).reshape(-1)
    x_prime = np.asarray(x_prime, dtype=float).reshape(-1)
    if x.shape != (diff.d,) or x_prime.shape != (diff.d,):
        raise ArgumentError(f"Pontos iniciais devem ter dimensao {diff.d}.")
    y0 = float(np.linalg.norm(x - x_prime))
    if not 0 < y0 < phi:
        raise ArgumentError(f"Exige 0 < ||x - x'|| < phi (||x - x'||={y0}, phi={phi}).")
    if not 0 < delta_c <= y0:
        raise ArgumentError(f"Exige 0 < delta_c <= ||x - x'|| (delta_c={delta_c}).")
    if not (dt > 0 and t_max >= dt):
        raise ArgumentError("Exige dt > 0 e t_max >= dt.")
    return x, x_prime, y0


@dataclass(frozen=True)
class _PairBatch:
    status: np.ndarray
    time: np.ndarray
    distance: np.ndarray


def _first_passage(
    diff: MarkovDiffusion,
    x: np.ndarray,
    x_prime: np.ndarray,
    phi: float,
    delta_c: float,
    dt: float,
    t_max: float,
    seed: int,
    path_indices: np.ndarray,
) -> _PairBatch:
    m = len(path_indices)
    xs = np.tile(x, (m, 1))
    xps = np.tile(x_prime, (m, 1))
    status = np.full(m, _CENSORED, dtype=np.int8)
    time = np.full(m, float(t_max))
    distance = np.full(m, float(np.linalg.norm(x - x_prime)))
    if distance[0] <= delta_c:
        status[:] = _COUPLED
        time[:] = 0.0
        distance[:] = 0.0
        return _PairBatch(status, time, distance)

    stream = GaussianStream(seed, diff.d)
    sqrt_dt = math.sqrt(dt)
    n_steps = max(1, int(math.ceil(t_max / dt - 1e-9)))
    active = np.arange(m)
    for k in range(n_steps):
        if active.size == 0:
            break
        dB = stream.increments(k, path_indices[active]) * sqrt_dt
        x_next, x_prime_next = _step(diff, xs[active], xps[active], dB, dt)
        gap = np.linalg.norm(x_next - x_prime_next, axis=1)
        coupled = _segment_distance(xs[active] - xps[active], x_next - x_prime_next) <= delta_c
        separated = ~coupled & (gap >= phi)
        x_prime_next[coupled] = x_next[coupled]
        xs[active] = x_next
        xps[active] = x_prime_next
        distance[active] = np.where(coupled, 0.0, gap)
        finished = coupled | separated
        if np.any(finished):
            done = active[finished]
            status[done] = np.where(coupled[finished], _COUPLED, _SEPARATED)
            time[done] = (k + 1) * dt
            active = active[~finished]
    return _PairBatch(status, time, distance)


@dataclass(frozen=True)
class CouplingOutcome:
    coupled: bool
    separated: bool
    time: float
    final_distance: float


@dataclass(frozen=True)
class CouplingEstimate:
    p_separated: float
    std_error: float
    p_coupled: float
    p_censored: float
    n_paths: int
    mean_coupling_time: float


def simulate_mirror_pair(
    diff: MarkovDiffusion,
    x,
    x_prime,
    phi: float,
    delta_c: float,
    dt: float,
    t_max: float,
    seed: int,
    path_index: int,
) -> CouplingOutcome:
    x, x_prime, _ = _validate_pair(diff, x, x_prime, phi, delta_c, dt, t_max)
    batch = _first_passage(
        diff, x, x_prime, phi, delta_c, dt, t_max, seed, np.array([int(path_index)])
    )
    status = int(batch.status[0])
    return CouplingOutcome(
        coupled=status == _COUPLED,
        separated=status == _SEPARATED,
        time=float(batch.time[0]),
        final_distance=float(batch.distance[0]),
    )


def estimate_coupling_probability(
    diff: MarkovDiffusion,
    x,
    x_prime,
    phi: float,
    delta_c: float,
    dt: float,
    t_max: float,
    n_paths: int,
    seed: int,
) -> CouplingEstimate:
    x, x_prime, y0 = _validate_pair(diff, x, x_prime, phi, delta_c, dt, t_max)
    if int(n_paths) != n_paths or n_paths < 1:
        raise ArgumentError("n_paths deve ser >= 1.")
    batch = _first_passage(
        diff, x, x_prime, phi, delta_c, dt, t_max, seed, np.arange(int(n_paths))
    )
    n = int(n_paths)
    separated = int(np.count_nonzero(batch.status == _SEPARATED))
    coupled_mask = batch.status == _COUPLED
    censored = n - separated - int(np.count_nonzero(coupled_mask))
    p_separated = separated / n
    estimate = CouplingEstimate(
        p_separated=p_separated,
        std_error=math.sqrt(p_separated * (1.0 - p_separated) / n),
        p_coupled=float(np.count_nonzero(coupled_mask)) / n,
        p_censored=censored / n,
        n_paths=n,
        mean_coupling_time=(
            math.fsum(batch.time[coupled_mask]) / np.count_nonzero(coupled_mask)
            if np.any(coupled_mask)
            else math.nan
        ),
    )
    if censored:
        logger.warning(
            "%s de %s pares sem acoplar nem separar ate t_max=%s.", censored, n, t_max
        )
    logger.info(
        "Acoplamento ||x-x'||=%s phi=%s delta_c=%s: P(separar)=%s +- %s",
        y0,
        phi,
        delta_c,
        estimate.p_separated,
        estimate.std_error,
    )
    return estimate


def simulate_mirror_terminal(
    diff: MarkovDiffusion,
    x,
    x_prime,
    delta_c: float,
    dt: float,
    t: float,
    n_paths: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Terminal states (X_t, X'_t) of coupled pairs run without a separation barrier."""
    x = np.asarray(x, dtype=float).reshape(-1)
    x_prime = np.asarray(x_prime, dtype=float).reshape(-1)
    m = int(n_paths)
    xs = np.tile(x, (m, 1))
    xps = np.tile(x_prime, (m, 1))
    merged = np.full(m, float(np.linalg.norm(x - x_prime)) <= delta_c)
    xps[merged] = xs[merged]
    indices = np.arange(m)
    sqrt_dt = math.sqrt(dt)
    stream = GaussianStream(seed, diff.d)
    for k in range(max(1, int(math.ceil(t / dt - 1e-9)))):
        dB = stream.increments(k, indices) * sqrt_dt
        free = ~merged
        if np.any(merged):
            xs[merged] = _euler(diff, xs[merged], dB[merged], dt)
            xps[merged] = xs[merged]
        if np.any(free):
            y_prev = xs[free] - xps[free]
            x_next, x_prime_next = _step(diff, xs[free], xps[free], dB[free], dt)
            xs[free] = x_next
            xps[free] = x_prime_next
            meets = _segment_distance(y_prev, x_next - x_prime_next) <= delta_c
            if np.any(meets):
                joined = np.nonzero(free)[0][meets]
                xps[joined] = xs[joined]
                merged[joined] = True
    return xs, xps


def simulate_diffusion_terminal(
    diff: MarkovDiffusion, x, dt: float, t: float, n_paths: int, seed: int
) -> np.ndarray:
    """Terminal states of independent Euler-Maruyama copies started at x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    m = int(n_paths)
    xs = np.tile(x, (m, 1))
    indices = np.arange(m)
    sqrt_dt = math.sqrt(dt)
    stream = GaussianStream(seed, diff.d)
    for k in range(max(1, int(math.ceil(t / dt - 1e-9)))):
        dB = stream.increments(k, indices) * sqrt_dt
        xs = _euler(diff, xs, dB, dt)
    return xs


def bessel_bound(y0: float, phi: float, eps: float) -> float:
    """Exit probability s(y0)/s(phi) with scale function s(z) = z^((1 - eps)/2)."""
    if not 0 < y0 <= phi:
        raise ArgumentError(f"Exige 0 < y0 <= phi (y0={y0}, phi={phi}).")
    if not 0 <= eps < 1:
        raise ArgumentError(f"Exige 0 <= eps < 1 (eps={eps}).")
    return (y0 / phi) ** ((1.0 - eps) / 2.0)


def coupling_radius(eps: float, lambda_: float, m_x: float) -> float:
    """Largest admissible phi: min{1, eps sqrt(lambda)/M_x, eps (1 - eps) lambda / M_x^2}."""
    if not 0 < eps < 1:
        raise ArgumentError("Exige 0 < eps < 1.")
    if not (lambda_ > 0 and m_x > 0):
        raise ArgumentError("Exige lambda > 0 e M_x > 0.")
    return min(1.0, eps * math.sqrt(lambda_) / m_x, eps * (1.0 - eps) * lambda_ / m_x**2)


def separation_threshold(eps: float, phi: float) -> float:
    """Initial distances below eps * phi keep P(separation) under eps."""
    return eps * phi
