"""Exact and randomized (Schwartz-Zippel) identity testing."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .rational import PoleError, RationalFunction

PRIME = 4611686018427387847  # largest prime below 2**62
DEFAULT_TRIALS = 3
MAX_RESAMPLES = 100


class ResamplingExhausted(RuntimeError):
    """Denominators vanished at too many sampled points."""


@dataclass(frozen=True)
class Certificate:
    mode: str
    seed: Optional[int] = None
    trials: int = 0
    prime: Optional[int] = None
    degree_bound: int = 0
    failure_bound: Fraction = Fraction(0)
    witness: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class EqualityResult:
    equal: bool
    certificate: Certificate

    def __bool__(self):
        return self.equal


class PointSampler:
    """Draws uniform points of F_p^nvars from a seeded generator."""

    def __init__(self, nvars: int, seed: int, prime: int = PRIME):
        self.nvars = nvars
        self.prime = prime
        self.rng = random.Random(seed)

    def draw(self) -> tuple[int, ...]:
        return tuple(self.rng.randrange(self.prime) for _ in range(self.nvars))


def random_trials(
    evaluate: Callable[[tuple[int, ...]], int],
    nvars: int,
    trials: int,
    seed: int,
    prime: int = PRIME,
    max_resamples: int = MAX_RESAMPLES,
) -> Optional[tuple[int, ...]]:
    """Run ``trials`` evaluations of a difference; return a nonzero witness point or None.

    ``evaluate`` raises PoleError when a denominator vanishes; such points are
    redrawn, at most ``max_resamples`` times in total.
    """
    sampler = PointSampler(nvars, seed, prime)
    resamples = 0
    done = 0
    while done < trials:
        pt = sampler.draw()
        try:
            val = evaluate(pt)
        except PoleError:
            resamples += 1
            if resamples > max_resamples:
                raise ResamplingExhausted(
                    f"denominators vanished at {resamples} sampled points; identity looks degenerate"
                ) from None
            continue
        done += 1
        if val % prime:
            return pt
    return None


def rf_equal(
    a: RationalFunction,
    b: RationalFunction,
    mode: str = "exact",
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    prime: int = PRIME,
) -> EqualityResult:
    a.reg.check(b.reg)
    if mode == "exact":
        return EqualityResult(a.equals(b), Certificate("exact"))
    if mode != "random":
        raise ValueError(f"unknown mode {mode!r}")
    deg = max(a.numerator_degree() + b.denominator_degree(), b.numerator_degree() + a.denominator_degree(), 1)

    def diff(pt):
        return (a.evaluate_mod(pt, prime) - b.evaluate_mod(pt, prime)) % prime

    wit = random_trials(diff, a.reg.nvars, trials, seed, prime)
    bound = Fraction(deg, prime) ** trials
    cert = Certificate("random", seed, trials, prime, deg, bound if wit is None else Fraction(0), wit)
    return EqualityResult(wit is None, cert)
