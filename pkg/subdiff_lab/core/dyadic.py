"""
Exact binary digits of uniform [0,1] samples.

A uniform sample is held as its lazily materialized binary expansion
(`BitStream`) rather than a float, so bit indices far beyond any mantissa
(K_bound(6) = 250, K_bound(24) > 10^8) stay exact.
"""
from dataclasses import dataclass
from decimal import Decimal, ROUND_CEILING, localcontext
from fractions import Fraction
from itertools import product
from numbers import Rational
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from .base import CapacityError, DomainError

logger = logging.getLogger(__name__)

GENERATOR_ID = "numpy.random.Philox(SeedSequence(seed, spawn_key))"

_WORD_BITS = 64
_GROWTH_WORDS = 16


@dataclass(frozen=True)
class Capacity:
    """Size limits shared by every experiment"""
    max_nu: int = 24
    max_bits: int = 2 ** 32
    max_shatter_n: int = 20


DEFAULT_CAPACITY = Capacity()


def make_generator(seed: int, spawn_key: Tuple[int, ...] = ()) -> np.random.Generator:
    """Counter-based generator for (seed, spawn_key)."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, index: int) -> int:
    """Sub-seed of trial `index` under root `seed`: first 64-bit word of SeedSequence(seed, (index,))."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class DyadicRational:
    """numerator / 2**exponent in [0,1), kept in canonical form"""
    numerator: int
    exponent: int

    def __post_init__(self):
        if self.exponent < 0 or self.numerator < 0:
            raise DomainError(f"Invalid dyadic {self.numerator}/2^{self.exponent}")
        if self.numerator >= 1 << self.exponent:
            raise DomainError(f"Dyadic {self.numerator}/2^{self.exponent} is not in [0,1)")
        numerator, exponent = self.numerator, self.exponent
        if numerator == 0:
            exponent = 0
        else:
            trailing = (numerator & -numerator).bit_length() - 1
            numerator >>= trailing
            exponent -= trailing
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicRational":
        value = Fraction(value)
        denominator = value.denominator
        if denominator & (denominator - 1):
            raise DomainError(f"{value} is not a dyadic rational")
        return cls(value.numerator, denominator.bit_length() - 1)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __float__(self) -> float:
        return float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"


class BitStream:
    """
    Lazy binary expansion of one uniform [0,1] sample.

    Bits are drawn in 64-bit words from a Philox generator keyed by
    (seed, stream); bit k sits at position 64 - ((k-1) mod 64) of word
    (k-1) // 64, most significant first. Optional `prefix` bits override
    the first bits of the expansion. An instance mutates on
    materialization and belongs to a single trial.
    """

    def __init__(
        self,
        seed: int,
        stream: int = 0,
        prefix: Sequence[int] = (),
        max_bits: int = DEFAULT_CAPACITY.max_bits
    ):
        if not 0 <= seed < 1 << 64:
            raise DomainError(f"Seed {seed} is not a 64-bit unsigned integer")
        if any(bit not in (0, 1) for bit in prefix):
            raise DomainError("Prefix bits must be 0 or 1")
        self.seed = seed
        self.stream = stream
        self.prefix: Tuple[int, ...] = tuple(int(bit) for bit in prefix)
        self.max_bits = max_bits
        self._bitgen = np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
        )
        self._words = np.zeros(0, dtype=np.uint64)
        self._overlay = self._prefix_overlay(self.prefix)

    @classmethod
    def from_bits(cls, bits: Sequence[int], seed: int = 0, stream: int = 0) -> "BitStream":
        """Stream whose first len(bits) digits are `bits`."""
        return cls(seed=seed, stream=stream, prefix=bits)

    @staticmethod
    def _prefix_overlay(prefix: Tuple[int, ...]) -> Dict[int, Tuple[int, int]]:
        overlay: Dict[int, Tuple[int, int]] = {}
        for position, bit in enumerate(prefix):
            word, offset = divmod(position, _WORD_BITS)
            mask, value = overlay.get(word, (0, 0))
            shift = _WORD_BITS - 1 - offset
            overlay[word] = (mask | (1 << shift), value | (bit << shift))
        return overlay

    @property
    def materialized(self) -> int:
        """Number of bits drawn so far"""
        return len(self._words) * _WORD_BITS

    def _materialize(self, n_bits: int) -> None:
        if n_bits > self.max_bits:
            raise CapacityError(
                f"Bit index {n_bits} exceeds stream budget of {self.max_bits} bits"
            )
        needed = -(-n_bits // _WORD_BITS)
        have = len(self._words)
        if needed <= have:
            return
        extra = max(needed - have, _GROWTH_WORDS)
        if have:
            logger.debug(f"{self!r}: growing to {(have + extra) * _WORD_BITS} bits")
        fresh = np.asarray(self._bitgen.random_raw(extra), dtype=np.uint64)
        for index, (mask, value) in self._overlay.items():
            if have <= index < have + extra:
                word = int(fresh[index - have])
                fresh[index - have] = (word & ~mask & 0xFFFFFFFFFFFFFFFF) | value
        self._words = np.concatenate([self._words, fresh])

    def word(self, index: int) -> int:
        """64 consecutive bits 64*index+1 .. 64*index+64, first bit most significant"""
        self._materialize(index * _WORD_BITS + 1)
        return int(self._words[index])

    def bit(self, k: int) -> int:
        if k < 1:
            raise DomainError(f"Bit index must be positive, got {k}")
        word = self.word((k - 1) // _WORD_BITS)
        return (word >> (_WORD_BITS - 1 - (k - 1) % _WORD_BITS)) & 1

    def bits(self, count: int) -> np.ndarray:
        """First `count` bits as a uint8 array"""
        if count <= 0:
            return np.zeros(0, dtype=np.uint8)
        self._materialize(count)
        n_words = -(-count // _WORD_BITS)
        raw = self._words[:n_words].astype(">u8").view(np.uint8)
        return np.unpackbits(raw)[:count]

    def leading_integer(self, count: int) -> int:
        """Integer whose binary digits are bits 1..count"""
        self._materialize(count)
        n_words = -(-count // _WORD_BITS)
        raw = self._words[:n_words].astype(">u8").tobytes()
        return int.from_bytes(raw, "big") >> (n_words * _WORD_BITS - count)

    def __repr__(self) -> str:
        return f"BitStream(seed={self.seed}, stream={self.stream}, materialized={self.materialized})"


def spawn_streams(seed: int, count: int, max_bits: int = DEFAULT_CAPACITY.max_bits) -> List[BitStream]:
    """`count` independent streams sharing one seed, split by stream index"""
    return [BitStream(seed=seed, stream=index, max_bits=max_bits) for index in range(count)]


Bitwise = Union[DyadicRational, BitStream, Rational, float]


def bit_k(x: Bitwise, k: int) -> int:
    """k-th binary digit, terminating-zeros convention: floor(2^k x) - 2 floor(2^(k-1) x)."""
    if k < 1:
        raise DomainError(f"Bit index must be positive, got {k}")
    if isinstance(x, BitStream):
        return x.bit(k)
    if isinstance(x, DyadicRational):
        if k > x.exponent:
            return 0
        return (x.numerator >> (x.exponent - k)) & 1
    value = Fraction(x)
    if not 0 <= value <= 1:
        raise DomainError(f"{value} is not in [0,1]")
    return math.floor(value * 2 ** k) - 2 * math.floor(value * 2 ** (k - 1))


def expansion_partial_sum(x: BitStream, K: int) -> DyadicRational:
    """sum_{k<=K} 2^-k bit_k(x), so the result v satisfies v <= x < v + 2^-K"""
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    return DyadicRational(x.leading_integer(K), K)


def K_bound(nu: int, capacity: Capacity = DEFAULT_CAPACITY) -> int:
    """
    ceil(2^(nu+1) ln(nu+1)).

    The logarithm is natural: the event-finder estimate needs
    exp(-2^-nu K) <= 1/(nu+1)^2. The ceiling is certified by an interval
    check and precision is doubled until the enclosure excludes integers.
    """
    if nu < 1:
        raise DomainError(f"nu must be positive, got {nu}")
    if nu > capacity.max_nu:
        raise CapacityError(
            f"K_bound overflow: nu={nu} exceeds capacity max_nu={capacity.max_nu}"
        )
    precision = 40
    while True:
        with localcontext() as ctx:
            ctx.prec = precision
            value = Decimal(2) ** (nu + 1) * Decimal(nu + 1).ln()
            error = abs(value) * Decimal(10) ** (3 - precision)
            candidate = int(value.to_integral_value(rounding=ROUND_CEILING))
            if value - error > candidate - 1 and value + error < candidate:
                break
        logger.debug(f"K_bound({nu}): enclosure straddles an integer at precision {precision}")
        precision *= 2
    if candidate >= 1 << 64:
        raise CapacityError(f"K_bound overflow: K_bound({nu}) does not fit in 64 bits")
    if nu * candidate > capacity.max_bits:
        raise CapacityError(
            f"K_bound overflow: nu*K_bound = {nu * candidate} bits exceeds budget {capacity.max_bits}"
        )
    return candidate


def joint_failure_bound(nu: int) -> Fraction:
    """Upper bound 1/(nu+1)^2 on P(no joint one-bit among the first K_bound(nu) indices)"""
    return Fraction(1, (nu + 1) ** 2)


def exact_failure_probability(nu: int, capacity: Capacity = DEFAULT_CAPACITY) -> float:
    """(1 - 2^-nu)^K_bound(nu)"""
    return math.exp(K_bound(nu, capacity) * math.log1p(-(2.0 ** -nu)))


def find_joint_one_bit(samples: Sequence[BitStream], K: int) -> Optional[int]:
    """Smallest k <= K with bit_k = 1 in every sample, or None."""
    if not samples:
        raise DomainError("At least one sample is required")
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    n_words = -(-K // _WORD_BITS)
    for index in range(n_words):
        joint = 0xFFFFFFFFFFFFFFFF
        for stream in samples:
            joint &= stream.word(index)
            if not joint:
                break
        if joint:
            k = index * _WORD_BITS + (_WORD_BITS - joint.bit_length()) + 1
            return k if k <= K else None
    return None


def shatter_witness(n: int, capacity: Capacity = DEFAULT_CAPACITY) -> List[DyadicRational]:
    """
    xi^i = sum_{k=1}^{2^n} 2^-k b^k_i where b^1, ..., b^(2^n) runs through
    {0,1}^n in lexicographic order (b^k is the n-digit binary numeral of
    k-1, first coordinate most significant).
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if n > capacity.max_shatter_n:
        raise CapacityError(f"shatter width n={n} exceeds capacity max_shatter_n={capacity.max_shatter_n}")
    width = 1 << n
    numerators = [0] * n
    for k, pattern in enumerate(product((0, 1), repeat=n), start=1):
        for i, bit in enumerate(pattern):
            if bit:
                numerators[i] |= 1 << (width - k)
    return [DyadicRational(numerator, width) for numerator in numerators]


def verify_shattering(witness: Sequence[DyadicRational]) -> Dict[Tuple[int, ...], Optional[int]]:
    """For every pattern b in {0,1}^n, the smallest k <= 2^n with bit_k(xi^i) = b_i for all i."""
    n = len(witness)
    realized: Dict[Tuple[int, ...], Optional[int]] = {
        pattern: None for pattern in product((0, 1), repeat=n)
    }
    for k in range(1, (1 << n) + 1):
        pattern = tuple(bit_k(xi, k) for xi in witness)
        if realized[pattern] is None:
            realized[pattern] = k
    return realized
