"""Statistical planning of quantum-state transmissions.

Given the signal weight on the code projector, the detector efficiency
factor, the measuring accuracy and a confidence target, this module answers
two questions: how many states the confirmation detector needs to see the
transmission at all, and how many states the decoding detector needs so that
the registered count falls in the decoding interval with the target
confidence.  Counts are evaluated with exact binomial sums; the normal
approximation is deliberately avoided at these sample sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class TransmissionScenario:
    """Decoding scenario for the receiving detector.

    ``margin`` is the half-width applied to expected counts per state; it
    defaults to ``eta_det * accuracy`` but is an explicit field because the
    reference worked examples are only jointly reproducible when it can be
    held fixed while the efficiency changes.
    """

    rho1: float
    eta_det: float
    accuracy: float
    confidence_target: float
    margin: float | None = None

    def __post_init__(self):
        if not 0 <= self.rho1 <= 1:
            raise ValueError("rho1 must lie in [0, 1]")
        if not 0 <= self.eta_det <= 1:
            raise ValueError("eta_det must lie in [0, 1]")
        if self.accuracy <= 0:
            raise ValueError("accuracy must be positive")
        if self.rho1 - self.accuracy < -1e-12 or self.rho1 + self.accuracy > 1 + 1e-12:
            raise ValueError("decoding interval (rho1 - a, rho1 + a) leaves [0, 1]")
        if not 0 < self.confidence_target < 1:
            raise ValueError("confidence_target must lie in (0, 1)")
        if self.margin is None:
            object.__setattr__(self, "margin", self.eta_det * self.accuracy)
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.margin > self.accuracy + 1e-12:
            raise ValueError("margin must not exceed accuracy")

    @property
    def success_probability(self) -> float:
        """Per-state registration probability eta_det * rho1."""
        return self.eta_det * self.rho1

    def with_margin(self, margin: float) -> "TransmissionScenario":
        return replace(self, margin=margin)


@dataclass(frozen=True)
class PlanResult:
    """Outcome of the plan for a fixed number of generated states m."""

    m: int
    i_minus: float
    i_plus: float
    advantageous: range
    confidence: float


def di_confirmation_count(p_reg: float, confidence_target: float) -> int:
    """Smallest n with (1 - p_reg)^n <= 1 - confidence_target.

    ``p_reg`` is the per-state registration probability of the confirmation
    detector; n states guarantee at least one registration at the target
    confidence.
    """
    if not 0 < p_reg < 1:
        raise ValueError("p_reg must lie strictly between 0 and 1")
    if not 0 < confidence_target < 1:
        raise ValueError("confidence_target must lie in (0, 1)")
    miss = 1.0 - p_reg
    allowed = 1.0 - confidence_target
    n = max(1, math.ceil(math.log(allowed) / math.log(miss)))
    # guard against log rounding at exact thresholds
    while miss ** n > allowed:
        n += 1
    while n > 1 and miss ** (n - 1) <= allowed:
        n -= 1
    return n


def interval_expectations(m: int, scenario: TransmissionScenario):
    """Expected-count interval ends (i_minus, i_plus) for m generated states."""
    if m < 1:
        raise ValueError("m must be at least 1")
    center = m * scenario.success_probability
    half = scenario.margin * m
    return center - half, center + half


def minimal_m(scenario: TransmissionScenario) -> int:
    """Smallest m whose expected-count interval is at least one unit wide."""
    return max(1, math.ceil(1.0 / (2.0 * scenario.margin) - 1e-12))


def advantageous_set(m: int, scenario: TransmissionScenario) -> range:
    """Integer counts inside the expected interval, clipped to [0, m].

    Integer interval ends are included; the range is empty when no integer
    falls inside the interval.
    """
    i_minus, i_plus = interval_expectations(m, scenario)
    lo = max(0, math.ceil(i_minus - 1e-9))
    hi = min(m, math.floor(i_plus + 1e-9))
    return range(lo, hi + 1) if lo <= hi else range(lo, lo)


def confidence(m: int, p: float, counts) -> float:
    """Binomial probability of registering a count inside ``counts``.

    Sum over i of C(m, i) p^i (1-p)^(m-i), accumulated in the log domain.
    Exact integer binomial coefficients are used up to m = 64, log-gamma
    beyond.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    total = 0.0
    for i in counts:
        if not 0 <= i <= m:
            raise ValueError(f"count {i} outside [0, {m}]")
        total += _binomial_term(m, i, p)
    return min(total, 1.0)


def _binomial_term(m: int, i: int, p: float) -> float:
    if p == 0.0:
        return 1.0 if i == 0 else 0.0
    if p == 1.0:
        return 1.0 if i == m else 0.0
    if m <= 64:
        log_coeff = math.log(math.comb(m, i))
    else:
        log_coeff = math.lgamma(m + 1) - math.lgamma(i + 1) - math.lgamma(m - i + 1)
    return math.exp(log_coeff + i * math.log(p) + (m - i) * math.log1p(-p))


def plan_for_m(m: int, scenario: TransmissionScenario) -> PlanResult:
    """Interval, advantageous set and confidence for a fixed m."""
    i_minus, i_plus = interval_expectations(m, scenario)
    counts = advantageous_set(m, scenario)
    conf = confidence(m, scenario.success_probability, counts)
    return PlanResult(m, i_minus, i_plus, counts, conf)


def scan_plan(scenario: TransmissionScenario, m_max: int):
    """Plans for every m from minimal_m to m_max.

    Returns (results, first_passing_m); the second element is None when no m
    in the range reaches the confidence target.
    """
    m_lo = minimal_m(scenario)
    if m_max < m_lo:
        raise ValueError(f"m_max = {m_max} below minimal m = {m_lo}")
    results = [plan_for_m(m, scenario) for m in range(m_lo, m_max + 1)]
    first = next(
        (r.m for r in results if r.confidence >= scenario.confidence_target), None
    )
    return results, first


def detect_nonmonotonicity(scenario: TransmissionScenario, m_range) -> list:
    """Values of m in the range where the confidence drops at m + 1.

    Adding states does not always help: a larger m can move the advantageous
    set unfavourably.  Returns every m (except the last of the range) whose
    successor has strictly lower confidence.
    """
    ms = sorted(set(m_range))
    confs = {m: plan_for_m(m, scenario).confidence for m in ms}
    return [m for m, m_next in zip(ms, ms[1:]) if confs[m_next] < confs[m]]


def transmission_speed(bits: int, seconds: float) -> float:
    """Transmission speed in bits per unit time."""
    if seconds <= 0:
        raise ValueError("duration must be positive")
    return bits / seconds


def intelligibility(input_bits, output_bits) -> float:
    """Fraction of bits that differ between sent and decoded messages."""
    input_bits = list(input_bits)
    output_bits = list(output_bits)
    if len(input_bits) != len(output_bits):
        raise ValueError("bit sequences must have equal length")
    if not input_bits:
        raise ValueError("bit sequences must be non-empty")
    mismatches = sum(1 for a, b in zip(input_bits, output_bits) if a != b)
    return mismatches / len(input_bits)
