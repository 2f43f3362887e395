"""Block codes used to carry vertical-block and side-channel payloads.

Three code families:

* ``RepetitionCode``   : each message bit repeated r times, per-bit ML decode.
* ``RandomLinearCode`` : seeded random full-rank generator matrix over GF(2),
                         exact ML decoding by exhaustive search (k <= 16).
* ``OracleCode``       : statistical stand-in for an optimal code. Nothing is
                         physically transmitted; ``oracle_transmit`` corrupts
                         the message to a uniformly random wrong one with the
                         random-coding probability p* = exp(-(k/R) Er(R) ln 2)
                         and charges ceil(k/R) channel uses.

Decoding is maximum likelihood under the channel law with ties broken toward
the lexicographically smallest message.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .channel import LN2, ChannelModel

_MAX_EXHAUSTIVE_K = 16


@dataclass(frozen=True)
class DecodeResult:
    message: tuple[int, ...]
    ml_score: float


def _as_bits(message: Sequence[int]) -> tuple[int, ...]:
    bits = tuple(int(b) for b in message)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("message must be a bit vector")
    return bits


@dataclass(frozen=True)
class RepetitionCode:
    """k message bits, each sent ``repeats`` times."""

    k: int
    repeats: int

    kind = "repetition"

    def __post_init__(self) -> None:
        if self.k < 1 or self.repeats < 1:
            raise ValueError("k and repeats must be positive")

    @property
    def codeword_length(self) -> int:
        return self.k * self.repeats

    def encode(self, message: Sequence[int]) -> np.ndarray:
        bits = _as_bits(message)
        if len(bits) != self.k:
            raise ValueError(f"expected {self.k} message bits")
        return np.repeat(np.asarray(bits, dtype=np.int64), self.repeats)

    def decode(self, outputs, channel: ChannelModel) -> DecodeResult:
        ll = channel.bit_log_likelihoods(outputs)
        if ll.shape[0] != self.codeword_length:
            raise ValueError("output length does not match codeword length")
        per_bit = ll.reshape(self.k, self.repeats, 2).sum(axis=1)
        # ties go to 0, the lexicographically smaller bit; the margin absorbs
        # float summation noise on exact ties without touching real decisions
        picks = (per_bit[:, 1] > per_bit[:, 0] + 1e-9).astype(int)
        score = float(per_bit[np.arange(self.k), picks].sum())
        return DecodeResult(tuple(int(b) for b in picks), score)


def _gf2_rank(rows: list[int]) -> int:
    rank = 0
    pivots: list[int] = []
    for row in rows:
        for p in pivots:
            row = min(row, row ^ p)
        if row:
            pivots.append(row)
            rank += 1
    return rank


@lru_cache(maxsize=4096)
def _linear_code_matrix(k: int, b: int, seed: int) -> bytes:
    """Draw generator matrices from successive seeds until one has rank k."""
    attempt = seed
    while True:
        g = np.random.default_rng(attempt).integers(0, 2, size=(k, b), dtype=np.int64)
        as_ints = [int("".join(map(str, row)), 2) if row.any() else 0 for row in g]
        if _gf2_rank(as_ints) == k:
            return g.astype(np.uint8).tobytes()
        attempt += 1


@dataclass(frozen=True)
class RandomLinearCode:
    """Random full-rank linear code over GF(2) with exhaustive ML decoding."""

    k: int
    codeword_length: int
    seed: int = 0

    kind = "linear"

    def __post_init__(self) -> None:
        if not 1 <= self.k <= _MAX_EXHAUSTIVE_K:
            raise ValueError(f"k must be in 1..{_MAX_EXHAUSTIVE_K} for exhaustive ML decoding")
        if self.codeword_length < self.k:
            raise ValueError("codeword must be at least as long as the message")

    @cached_property
    def generator(self) -> np.ndarray:
        raw = _linear_code_matrix(self.k, self.codeword_length, self.seed)
        return np.frombuffer(raw, dtype=np.uint8).reshape(self.k, self.codeword_length).astype(np.int64)

    @cached_property
    def _messages(self) -> np.ndarray:
        ids = np.arange(1 << self.k)[:, None]
        shifts = np.arange(self.k - 1, -1, -1)[None, :]
        return (ids >> shifts) & 1  # row index == message as big-endian integer

    @cached_property
    def _codebook(self) -> np.ndarray:
        return (self._messages @ self.generator) % 2

    def encode(self, message: Sequence[int]) -> np.ndarray:
        bits = _as_bits(message)
        if len(bits) != self.k:
            raise ValueError(f"expected {self.k} message bits")
        return (np.asarray(bits, dtype=np.int64) @ self.generator) % 2

    def decode(self, outputs, channel: ChannelModel) -> DecodeResult:
        ll = channel.bit_log_likelihoods(outputs)
        if ll.shape[0] != self.codeword_length:
            raise ValueError("output length does not match codeword length")
        scores = self._codebook @ ll[:, 1] + (1 - self._codebook) @ ll[:, 0]
        best = int(np.argmax(scores))  # first maximum: lexicographic tie-break
        return DecodeResult(tuple(int(b) for b in self._messages[best]), float(scores[best]))


@dataclass(frozen=True)
class OracleCode:
    """Statistical model of a capacity-approaching block code.

    Rates at or above capacity are allowed and degrade gracefully: the
    exponent is 0 there, so every transmission is corrupted (p* = 1).
    """

    k: int
    rate: float
    channel: ChannelModel

    kind = "oracle"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    @property
    def codeword_length(self) -> int:
        return math.ceil(self.k / self.rate)

    @cached_property
    def corruption_probability(self) -> float:
        er = self.channel.error_exponent(self.rate)
        return math.exp(-(self.k / self.rate) * er * LN2)

    def encode(self, message: Sequence[int]) -> np.ndarray:
        bits = _as_bits(message)
        if len(bits) != self.k:
            raise ValueError(f"expected {self.k} message bits")
        return np.asarray(bits, dtype=np.int64)

    def decode(self, outputs, channel: ChannelModel) -> DecodeResult:
        return DecodeResult(_as_bits(outputs), 0.0)

    def oracle_transmit(self, message: Sequence[int],
                        rng: np.random.Generator) -> tuple[tuple[int, ...], bool]:
        """Return (possibly corrupted message, error flag); always consumes
        exactly one uniform draw for the corruption decision."""
        bits = _as_bits(message)
        if len(bits) != self.k:
            raise ValueError(f"expected {self.k} message bits")
        if rng.random() >= self.corruption_probability:
            return bits, False
        while True:
            wrong = tuple(int(b) for b in rng.integers(0, 2, size=self.k))
            if wrong != bits:
                return wrong, True


BlockCode = RepetitionCode | RandomLinearCode | OracleCode


# ---------------------------------------------------------------------------
# code specs and the transport helper used by the simulation engines

@dataclass(frozen=True)
class CodeSpec:
    """Parsed form of a --code flag.

    * ``oracle:<rate>``   : OracleCode at that rate
    * ``rep:<r>``         : RepetitionCode with r repeats (rate 1/r)
    * ``rlc:<x>``         : RandomLinearCode at rate 1/x, applied to chunks
                            of at most ``chunk`` message bits so exhaustive
                            ML decoding stays tractable
    """

    kind: str
    value: float
    chunk: int = 8

    def __post_init__(self) -> None:
        if self.kind not in ("oracle", "rep", "rlc"):
            raise ValueError(f"unknown code kind {self.kind!r}")
        if self.value <= 0:
            raise ValueError("code parameter must be positive")
        if self.kind == "oracle" and self.value > 1:
            raise ValueError("oracle rate cannot exceed one bit per use")
        if self.kind in ("rep", "rlc") and int(self.value) != self.value:
            raise ValueError(f"{self.kind} parameter must be an integer")

    @classmethod
    def parse(cls, spec: str) -> "CodeSpec":
        try:
            kind, raw = spec.split(":", 1)
            return cls(kind.strip().lower(), float(raw))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"bad code spec {spec!r}") from exc

    @property
    def rate(self) -> float:
        return self.value if self.kind == "oracle" else 1.0 / self.value

    @property
    def name(self) -> str:
        if self.kind == "rep":
            return f"rep:{int(self.value)}"
        return f"{self.kind}:{self.value:g}"


@dataclass(frozen=True)
class TransferResult:
    decoded: tuple[int, ...]
    channel_uses: int
    intact: bool  # ground-truth flag: decoded equals what was sent


def convey(spec: CodeSpec, bits: Sequence[int], ch: ChannelModel,
           rng: np.random.Generator, matrix_seed: int = 0) -> TransferResult:
    """Carry a bit vector from sender to receiver using the configured code.

    ``matrix_seed`` pins the generator matrices of rlc chunks so that both
    parties (and reruns) agree on the code; it must not depend on rng state.
    """
    payload = _as_bits(bits)
    if not payload:
        return TransferResult((), 0, True)
    if spec.kind == "oracle":
        code = OracleCode(len(payload), spec.value, ch)
        out, corrupted = code.oracle_transmit(payload, rng)
        return TransferResult(out, code.codeword_length, not corrupted)
    if spec.kind == "rep":
        code = RepetitionCode(len(payload), int(spec.value))
        received = ch.transmit(code.encode(payload), rng)
        decoded = code.decode(received, ch).message
        return TransferResult(decoded, code.codeword_length, decoded == payload)
    # rlc: one independent code per chunk
    decoded_bits: list[int] = []
    uses = 0
    for idx in range(0, len(payload), spec.chunk):
        part = payload[idx: idx + spec.chunk]
        b = math.ceil(len(part) * spec.value)
        code = RandomLinearCode(len(part), b, seed=matrix_seed * 1000003 + idx)
        received = ch.transmit(code.encode(part), rng)
        decoded_bits.extend(code.decode(received, ch).message)
        uses += code.codeword_length
    decoded = tuple(decoded_bits)
    return TransferResult(decoded, uses, decoded == payload)
