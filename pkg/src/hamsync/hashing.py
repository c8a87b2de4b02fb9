"""Prime sieving, injective mod-prime hashing, and the candidate-set
identification protocols built from them.

The identification problem: Bob holds k distinct words, Alice holds one word
that is promised to be among them, and Bob must learn which one.  A prime
modulus that separates Bob's set lets Alice answer with a short fingerprint
instead of the word itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from random import Random
from typing import Iterable, Sequence

from .bitword import Word, pack_fields, unpack_fields
from .errors import ContractError, InvariantError, RetryLimitError
from .transport import RECV, ProtocolOutcome, run_protocol


@dataclass(frozen=True, slots=True)
class PrimeTable:
    limit: int
    primes: tuple[int, ...]


@lru_cache(maxsize=None)
def sieve_primes(limit: int) -> PrimeTable:
    """All primes up to and including limit, by sieve of Eratosthenes."""
    if limit < 2:
        raise ContractError(f"sieve limit must be >= 2, got {limit}")
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = b"\x00" * len(flags[p * p :: p])
    return PrimeTable(limit, tuple(i for i in range(limit + 1) if flags[i]))


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    for d in range(3, math.isqrt(m) + 1, 2):
        if m % d == 0:
            return False
    return True


@lru_cache(maxsize=None)
def first_primes(count: int) -> tuple[int, ...]:
    """The first `count` primes."""
    if count < 1:
        raise ContractError("count must be >= 1")
    if count < 6:
        return sieve_primes(13).primes[:count]
    # p_count < count*(ln count + ln ln count); pad and grow if the estimate
    # still falls short.
    limit = int(count * (math.log(count) + math.log(math.log(count))) * 1.2) + 10
    while True:
        primes = sieve_primes(limit).primes
        if len(primes) >= count:
            return primes[:count]
        limit = int(limit * 1.3) + 1


@dataclass(frozen=True, slots=True)
class ModHash:
    """x -> x mod q for a prime q."""

    q: int

    def __call__(self, x: int) -> int:
        return x % self.q


def find_injective_prime(values: Iterable[int], n: int) -> ModHash:
    """Smallest prime q <= max(2, k^2 * n) injective on the given k distinct
    n-bit values.  Such a prime always exists; failing to find one means the
    search itself is broken."""
    vals = tuple(values)
    k = len(vals)
    if k < 1:
        raise ContractError("need at least one value")
    if len(set(vals)) != k:
        raise ContractError("values must be distinct")
    if n < 1:
        raise ContractError("n must be >= 1")
    for x in vals:
        if not 0 <= x < (1 << n):
            raise ContractError(f"value {x} is not an n-bit word for n={n}")
    bound = max(2, k * k * n)
    for q in sieve_primes(bound).primes:
        seen = set()
        for x in vals:
            r = x % q
            if r in seen:
                break
            seen.add(r)
        else:
            return ModHash(q)
    raise InvariantError(f"no injective prime up to {bound} for {k} values of {n} bits")


@dataclass(frozen=True, slots=True)
class SecondaryHash:
    """x -> ((s*x) mod v) mod 2k^2, compressing residues mod a prime v down
    to a range quadratic in the set size."""

    v: int
    s: int
    k: int

    def __call__(self, x: int) -> int:
        return ((self.s * x) % self.v) % (2 * self.k * self.k)

    @property
    def range_size(self) -> int:
        return 2 * self.k * self.k


def find_secondary_hash(s_reduced: Iterable[int], v: int, k: int, rng: Random) -> SecondaryHash:
    """Uniformly sample s in [0, v) until the secondary hash is injective on
    the reduced set.  At least half the choices work, so the 64*k retry cap
    is only ever hit with broken inputs or astronomical bad luck."""
    vals = tuple(s_reduced)
    if len(vals) != k or len(set(vals)) != k:
        raise ContractError(f"need exactly k={k} distinct reduced values")
    if not is_prime(v):
        raise ContractError(f"v must be prime, got {v}")
    for x in vals:
        if not 0 <= x < v:
            raise ContractError("reduced values must lie in [0, v)")
    rng_range = 2 * k * k
    for _ in range(64 * k):
        s = rng.randrange(v)
        seen = set()
        for x in vals:
            h = ((s * x) % v) % rng_range
            if h in seen:
                break
            seen.add(h)
        else:
            return SecondaryHash(v, s, k)
    raise RetryLimitError(f"no injective secondary hash found in {64 * k} tries")


@lru_cache(maxsize=None)
def random_prime_pool(n: int, k: int, a: int) -> tuple[int, ...]:
    """The first a*n*k^2 primes: the pool random_prime_hash draws from.

    The pool's largest prime is the smallest bound A with at least a*n*k^2
    primes below it, so a uniform draw collides on any fixed k-set of n-bit
    words with probability at most 1/a.
    """
    if a < 2:
        raise ContractError(f"oversampling factor must be >= 2, got {a}")
    if n < 1 or k < 1:
        raise ContractError("n and k must be >= 1")
    return first_primes(a * n * k * k)


def random_prime_bound(n: int, k: int, a: int) -> int:
    """Largest prime in the pool; public, so fingerprint widths are pre-agreed."""
    return random_prime_pool(n, k, a)[-1]


def random_prime_hash(n: int, k: int, a: int, rng: Random) -> ModHash:
    return ModHash(rng.choice(random_prime_pool(n, k, a)))


# ---------------------------------------------------------------------------
# identification protocols


def _nba_width(k: int, n: int) -> int:
    return max(2, k * k * n).bit_length()


def nba_alice(x: Word):
    """Alice's half: wait for the modulus, answer with her residue.

    The reply reuses the width of the received message, so no length
    negotiation is needed.
    """
    q_msg = yield RECV
    yield Word(x.value % q_msg.value, q_msg.n)
    return None


def nba_bob(candidates: Sequence[Word], n: int):
    """Bob's half: publish a prime separating his set, match the residue."""
    cands = sorted(candidates, key=lambda w: w.value)
    k = len(cands)
    h = find_injective_prime((w.value for w in cands), n)
    width = _nba_width(k, n)
    yield Word(h.q, width)
    reply = yield RECV
    matches = [w for w in cands if w.value % h.q == reply.value]
    diag = {"q": h.q, "set_size": k}
    if len(matches) == 1:
        return matches[0], diag
    # Zero matches means the promise was broken; with an injective modulus
    # more than one match is impossible.
    if len(matches) > 1:
        raise InvariantError("injective modulus produced multiple matches")
    return None, diag


def nba_protocol(x_alice: Word, y_bob: Iterable[Word], n: int) -> ProtocolOutcome:
    """Two-round identification: Bob sends a prime q in exactly
    ceil(log2(k^2*n + 1)) bits, Alice replies with x mod q in the same width.

    If x is among Bob's words he recovers it with certainty; if not, he
    either reports failure (no residue matched) or silently accepts a wrong
    word (a broken promise is undetectable when residues collide).
    """
    cands = list(y_bob)
    _check_candidates(cands, n)
    if x_alice.n != n:
        raise ContractError("alice's word must have length n")
    return run_protocol(nba_alice(x_alice), nba_bob(cands, n))


def _check_candidates(cands: Sequence[Word], n: int) -> None:
    if not cands:
        raise ContractError("bob needs at least one candidate word")
    if any(w.n != n for w in cands):
        raise ContractError("all candidate words must have length n")
    if len({w.value for w in cands}) != len(cands):
        raise ContractError("candidate words must be distinct")


def multi_nba_alice(xs: Sequence[Word], k: int):
    """Alice's half when she holds several words from Bob's set: one packed
    reply carrying a short secondary-hash fingerprint per word."""
    msg = yield RECV
    width_q = msg.n // 2
    q, s = unpack_fields(msg, [width_q, width_q])
    hash_width = max(1, (2 * k * k - 1).bit_length())
    fingerprints = [
        ((((s * (x.value % q)) % q) % (2 * k * k)), hash_width) for x in xs
    ]
    yield pack_fields(fingerprints)
    return None


def multi_nba_bob(candidates: Sequence[Word], n: int, l: int, rng: Random):
    cands = sorted(candidates, key=lambda w: w.value)
    k = len(cands)
    primary = find_injective_prime((w.value for w in cands), n)
    q = primary.q
    reduced = [w.value % q for w in cands]
    secondary = find_secondary_hash(reduced, q, k, rng)
    width_q = _nba_width(k, n)
    yield pack_fields([(q, width_q), (secondary.s, width_q)])
    reply = yield RECV
    hash_width = max(1, (2 * k * k - 1).bit_length())
    values = unpack_fields(reply, [hash_width] * l)
    table = {secondary(w.value % q): w for w in cands}
    recovered: list[Word] = []
    for v in values:
        w = table.get(v)
        if w is None:
            return None, {"q": q, "s": secondary.s, "set_size": k}
        recovered.append(w)
    joined = pack_fields([(w.value, n) for w in recovered])
    return joined, {
        "q": q,
        "s": secondary.s,
        "set_size": k,
        "recovered_values": tuple(w.value for w in recovered),
    }


def multi_nba_protocol(
    xs_alice: Sequence[Word], y_bob: Iterable[Word], n: int, rng: Random
) -> ProtocolOutcome:
    """Identify all l of Alice's words inside Bob's k-word set in two rounds.

    Round 1 carries the primary prime and the secondary multiplier; round 2
    carries l fingerprints of ceil(log2(2k^2)) bits each, so the reply cost
    grows with log k instead of log n per word.  The recovered value is the
    concatenation of the l identified words in Alice's order (low bits
    first); per-word values are in diagnostics.
    """
    cands = list(y_bob)
    _check_candidates(cands, n)
    xs = list(xs_alice)
    if not xs:
        raise ContractError("alice needs at least one word")
    if any(x.n != n for x in xs):
        raise ContractError("all of alice's words must have length n")
    return run_protocol(multi_nba_alice(xs, len(cands)), multi_nba_bob(cands, n, len(xs), rng))
