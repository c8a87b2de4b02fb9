"""Experiment runner: protocol sweeps with exact bit accounting, aggregated
into byte-stable CSV / JSON report rows.

Every run is driven by one experiment seed.  The root generator first feeds
any shared setup (sampled codes), then per-trial seeds in a fixed order, so
the listening and connecting sides of a TCP run rebuild identical trial
sequences, and a repeated run reproduces its report byte for byte.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from random import Random
from typing import Any, Callable, Iterator, Optional

from .bitword import (
    Bounds,
    Word,
    ball_volume,
    binary_entropy,
    lower_bound_bits,
    pack_fields,
    random_word_within,
)
from .errors import ContractError
from .gf2codes import hamming_7_4, min_distance, random_linear_code
from .hashing import multi_nba_alice, multi_nba_bob, nba_alice, nba_bob
from .probproto import (
    INNER_MAX_K,
    ProbParams,
    composite_alice,
    composite_bob,
    next_prime_at_least,
    one_round_prob_alice,
    one_round_prob_bob,
)
from .syncdet import (
    brute_alice,
    brute_bob,
    build_greedy_coloring,
    coloring_alice,
    coloring_bob,
    listdec_alice,
    listdec_bob,
    syndrome_alice,
    syndrome_bob,
)
from .transport import (
    RECV,
    Role,
    outcome_from_party_run,
    run_party,
    run_protocol,
    tcp_channel,
)

_EXHAUSTIVE_LIMIT = 1_000_000


@dataclass
class ExperimentConfig:
    protocol: str
    n: Optional[int] = None
    alpha: Optional[Fraction] = None
    trials: int = 100
    seed: int = 0
    exhaustive: bool = False
    transport: str = "loopback"
    listen: Optional[str] = None
    connect: Optional[str] = None
    out: Optional[str] = None
    fmt: str = "csv"
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class TrialCase:
    """One protocol run: the word Bob must recover plus fresh party factories."""

    truth: Word
    alice: Callable[[], Any]
    bob: Callable[[], Any]


@dataclass(frozen=True)
class ReportRow:
    protocol: str
    n: int
    alpha: str
    trials: int
    success_rate: float
    mean_bits: float
    max_bits: int
    rounds: int
    lower_bound_bits: float
    entropy_reference_bits: float
    diagnostics: str
    wall_time_s: float  # console only; kept out of files so they stay byte-stable


# Emitted column order is frozen; wall_time_s is deliberately absent.
REPORT_FIELDS = (
    "protocol",
    "n",
    "alpha",
    "trials",
    "success_rate",
    "mean_bits",
    "max_bits",
    "rounds",
    "lower_bound_bits",
    "entropy_reference_bits",
    "diagnostics",
)


def _masks_up_to_weight(n: int, r: int) -> tuple[int, ...]:
    masks = []
    for weight in range(r + 1):
        for positions in combinations(range(n), weight):
            m = 0
            for p in positions:
                m |= 1 << p
            masks.append(m)
    return tuple(masks)


def _sync_cases(cfg: ExperimentConfig, n: int, bounds: Bounds, root: Random, make) -> Iterator[TrialCase]:
    """Promise-pair instances: either every (x, y) with d <= radius, or
    `trials` sampled ones.  make(x, y, alice_seed, bob_seed) -> TrialCase."""
    r = bounds.radius
    if cfg.exhaustive:
        if n > 20 or (1 << n) * ball_volume(r, n) > _EXHAUSTIVE_LIMIT:
            raise ContractError("exhaustive sweep exceeds the enumeration budget")
        masks = _masks_up_to_weight(n, r)
        for xv in range(1 << n):
            for mask in masks:
                sa = root.getrandbits(64)
                sb = root.getrandbits(64)
                yield make(Word(xv, n), Word(xv ^ mask, n), sa, sb)
    else:
        for _ in range(cfg.trials):
            si = root.getrandbits(64)
            sa = root.getrandbits(64)
            sb = root.getrandbits(64)
            inst = Random(si)
            y = Word(inst.getrandbits(n), n)
            x = random_word_within(y, r, inst)
            yield make(x, y, sa, sb)


def _distinct_words(inst: Random, n: int, k: int) -> list[Word]:
    seen: set[int] = set()
    words: list[Word] = []
    while len(words) < k:
        v = inst.getrandbits(n)
        if v not in seen:
            seen.add(v)
            words.append(Word(v, n))
    return words


def _no_exhaustive(cfg: ExperimentConfig) -> None:
    if cfg.exhaustive:
        raise ContractError("identification runs have no promise pairs to enumerate")


# ---------------------------------------------------------------------------
# per-protocol case builders


def _naive_alice(x: Word):
    yield x
    return None


def _naive_bob():
    msg = yield RECV
    return msg, {}


def _build_naive(cfg, n, bounds, params, root):
    def make(x, y, sa, sb):
        return TrialCase(x, lambda: _naive_alice(x), lambda: _naive_bob())

    return _sync_cases(cfg, n, bounds, root, make)


def _build_brute(cfg, n, bounds, params, root):
    code = hamming_7_4()
    if n != code.k:
        raise ContractError(f"this runner transfers {code.k}-bit files; got n={n}")
    r = bounds.radius
    if min_distance(code) < 2 * r + 1:
        raise ContractError(f"code does not uniquely correct {r} errors")

    def make(x, y, sa, sb):
        return TrialCase(x, lambda: brute_alice(code, x), lambda: brute_bob(code, y, r))

    return _sync_cases(cfg, n, bounds, root, make)


def _build_syndrome(cfg, n, bounds, params, root):
    code = hamming_7_4()
    if n != code.n:
        raise ContractError(f"this runner syncs {code.n}-bit words; got n={n}")
    r = bounds.radius
    if min_distance(code) < 2 * r + 1:
        raise ContractError(f"code does not uniquely correct {r} errors")

    def make(x, y, sa, sb):
        return TrialCase(x, lambda: syndrome_alice(code, x), lambda: syndrome_bob(code, y, r))

    return _sync_cases(cfg, n, bounds, root, make)


def _build_listdec(cfg, n, bounds, params, root):
    radius = params["radius"] if params["radius"] is not None else bounds.radius
    if radius < bounds.radius:
        raise ContractError("list radius must cover the promise radius")
    code = random_linear_code(n, params["code_k"], root)

    def make(x, y, sa, sb):
        return TrialCase(x, lambda: listdec_alice(code, x), lambda: listdec_bob(code, radius, y))

    return _sync_cases(cfg, n, bounds, root, make)


def _build_coloring(cfg, n, bounds, params, root):
    r = bounds.radius
    build_greedy_coloring(n, min(2 * r, n))  # validates the scale, warms the cache

    def make(x, y, sa, sb):
        return TrialCase(x, lambda: coloring_alice(n, r, x), lambda: coloring_bob(n, r, y))

    return _sync_cases(cfg, n, bounds, root, make)


def _build_nba(cfg, n, bounds, params, root):
    _no_exhaustive(cfg)
    k = params["k"]
    if k < 1:
        raise ContractError("need at least one candidate word")
    for _ in range(cfg.trials):
        si = root.getrandbits(64)
        root.getrandbits(64)  # alice seed, unused: the exchange is deterministic
        root.getrandbits(64)  # bob seed, unused
        inst = Random(si)
        words = _distinct_words(inst, n, k)
        x = words[inst.randrange(k)]
        yield TrialCase(
            x,
            lambda x=x: nba_alice(x),
            lambda ws=tuple(words): nba_bob(ws, n),
        )


def _build_multinba(cfg, n, bounds, params, root):
    _no_exhaustive(cfg)
    k, l = params["k"], params["l"]
    if not 1 <= l <= k:
        raise ContractError("need 1 <= l <= k")
    for _ in range(cfg.trials):
        si = root.getrandbits(64)
        root.getrandbits(64)  # alice seed, unused
        sb = root.getrandbits(64)
        inst = Random(si)
        words = _distinct_words(inst, n, k)
        xs = inst.sample(words, l)
        truth = pack_fields([(w.value, n) for w in xs])
        yield TrialCase(
            truth,
            lambda xs=tuple(xs), k=k: multi_nba_alice(xs, k),
            lambda ws=tuple(words), sb=sb: multi_nba_bob(ws, n, l, Random(sb)),
        )


def _build_problist(cfg, n, bounds, params, root):
    radius = params["radius"] if params["radius"] is not None else bounds.radius
    if radius < bounds.radius:
        raise ContractError("list radius must cover the promise radius")
    oversample, list_cap = params["oversample"], params["list_cap"]
    code = random_linear_code(n, params["code_k"], root)

    def make(x, y, sa, sb):
        return TrialCase(
            x,
            lambda: one_round_prob_alice(code, x, oversample, list_cap, Random(sa)),
            lambda: one_round_prob_bob(code, radius, y, oversample, list_cap),
        )

    return _sync_cases(cfg, n, bounds, root, make)


def _build_smith(cfg, n, bounds, params, root):
    pp = ProbParams(
        k=params["k"], s=params["s"], delta=params["delta"], inner_dim=params["inner_dim"]
    )
    if pp.delta >= Fraction(1, 2) - bounds.alpha:
        raise ContractError("need delta < 1/2 - alpha")
    if pp.k > INNER_MAX_K:
        raise ContractError(f"per-block decoding is capped at k <= {INNER_MAX_K}")
    m = -(-next_prime_at_least(n) // pp.k)
    if (1 << pp.k) <= m + pp.s:
        raise ContractError("field too small for the block count plus extras")

    def make(x, y, sa, sb):
        return TrialCase(
            x,
            lambda: composite_alice(x, pp, Random(sa)),
            lambda: composite_bob(y, pp),
        )

    return _sync_cases(cfg, n, bounds, root, make)


@dataclass(frozen=True)
class _ProtoSpec:
    default_n: int
    default_alpha: Fraction
    default_params: dict[str, Any]
    build: Callable[..., Iterator[TrialCase]]


PROTOCOLS: dict[str, _ProtoSpec] = {
    "naive": _ProtoSpec(8, Fraction(1, 8), {}, _build_naive),
    "brute": _ProtoSpec(4, Fraction(1, 4), {}, _build_brute),
    "syndrome": _ProtoSpec(7, Fraction(1, 7), {}, _build_syndrome),
    "listdec": _ProtoSpec(14, Fraction(3, 14), {"code_k": 5, "radius": None}, _build_listdec),
    "coloring": _ProtoSpec(10, Fraction(1, 10), {}, _build_coloring),
    "nba": _ProtoSpec(16, Fraction(0), {"k": 4}, _build_nba),
    "multinba": _ProtoSpec(256, Fraction(0), {"k": 8, "l": 4}, _build_multinba),
    "problist": _ProtoSpec(
        14,
        Fraction(3, 14),
        {"code_k": 5, "radius": None, "oversample": 16, "list_cap": 16},
        _build_problist,
    ),
    "smith": _ProtoSpec(
        2048,
        Fraction(1, 20),
        {"k": 11, "s": 64, "delta": Fraction(3, 20), "inner_dim": 6},
        _build_smith,
    ),
}


# ---------------------------------------------------------------------------
# execution and aggregation


def _scalar_diags(diag: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in diag.items() if isinstance(v, (bool, int, float, str))}


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    """Run one configured experiment and aggregate it into a single row.

    Over TCP the listening side plays Alice for every trial and returns no
    rows; the connecting side plays Bob and reports.  Both sides must be
    started with identical configurations.
    """
    if cfg.protocol not in PROTOCOLS:
        known = ", ".join(sorted(PROTOCOLS))
        raise ContractError(f"unknown protocol {cfg.protocol!r}; choose from {known}")
    if cfg.trials < 1:
        raise ContractError("need at least one trial")
    spec = PROTOCOLS[cfg.protocol]
    n = cfg.n if cfg.n is not None else spec.default_n
    alpha = cfg.alpha if cfg.alpha is not None else spec.default_alpha
    bounds = Bounds(Fraction(alpha), n)
    unknown = set(cfg.params) - set(spec.default_params)
    if unknown:
        raise ContractError(f"parameters not used by {cfg.protocol}: {sorted(unknown)}")
    params = {**spec.default_params, **cfg.params}
    root = Random(cfg.seed)
    cases = spec.build(cfg, n, bounds, params, root)
    start = time.monotonic()

    if cfg.transport == "loopback":
        if cfg.listen or cfg.connect:
            raise ContractError("listen/connect only apply to the tcp transport")
        pairs = ((case, run_protocol(case.alice(), case.bob())) for case in cases)
        return [_aggregate(cfg, n, bounds, pairs, start)]
    if cfg.transport != "tcp":
        raise ContractError(f"unknown transport {cfg.transport!r}")
    if bool(cfg.listen) == bool(cfg.connect):
        raise ContractError("tcp transport needs exactly one of listen= or connect=")
    if cfg.listen:
        end = tcp_channel("listen:" + cfg.listen)
        try:
            for case in cases:
                run_party(case.alice(), Role.ALICE, end)
        finally:
            end.close()
        return []
    end = tcp_channel("connect:" + cfg.connect)
    try:
        pairs = (
            (case, outcome_from_party_run(run_party(case.bob(), Role.BOB, end)))
            for case in cases
        )
        return [_aggregate(cfg, n, bounds, pairs, start)]
    finally:
        end.close()


def _aggregate(cfg, n, bounds, pairs, start) -> ReportRow:
    count = successes = 0
    bits_sum = bits_max = rounds_max = 0
    diag_first: Optional[dict[str, Any]] = None
    for case, outcome in pairs:
        count += 1
        if outcome.recovered is not None and outcome.recovered == case.truth:
            successes += 1
        bits = outcome.transcript.total_bits
        bits_sum += bits
        bits_max = max(bits_max, bits)
        rounds_max = max(rounds_max, outcome.transcript.rounds)
        if diag_first is None:
            diag_first = outcome.diagnostics
    if count == 0:
        raise ContractError("the experiment produced no trials")
    return ReportRow(
        protocol=cfg.protocol,
        n=n,
        alpha=str(bounds.alpha),
        trials=count,
        success_rate=round(successes / count, 6),
        mean_bits=round(bits_sum / count, 3),
        max_bits=bits_max,
        rounds=rounds_max,
        lower_bound_bits=round(lower_bound_bits(bounds.alpha, n), 6),
        entropy_reference_bits=round(binary_entropy(float(2 * bounds.alpha)) * n, 6),
        diagnostics=json.dumps(_scalar_diags(diag_first or {}), sort_keys=True),
        wall_time_s=time.monotonic() - start,
    )


def emit_report(rows: list[ReportRow], fmt: str, path: str) -> None:
    """Write rows to path; CSV and JSON carry the same fields in the same
    order, and repeated runs under one seed produce identical bytes."""
    if fmt == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(REPORT_FIELDS)
            for row in rows:
                writer.writerow([getattr(row, name) for name in REPORT_FIELDS])
    elif fmt == "json":
        payload = [{name: getattr(row, name) for name in REPORT_FIELDS} for row in rows]
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    else:
        raise ContractError(f"unknown report format {fmt!r}")
