import itertools
import random

import pytest

from hamsync.errors import ContractError
from hamsync.gf2k_rs import (
    IRREDUCIBLE,
    Field,
    field,
    interpolate,
    poly_add,
    poly_deg,
    poly_divmod,
    poly_eval,
    poly_mul,
    poly_trim,
    rs_correct,
    rs_extra_evals,
)


def slow_mul(a: int, b: int, modulus: int, k: int) -> int:
    # Shift-and-xor carryless multiply with reduction, independent of the
    # table-based path under test.
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> k:
            a ^= modulus
    return acc


def test_tables_match_slow_multiplication():
    for k in (2, 3, 4, 8):
        fld = field(k)
        rng = random.Random(50 + k)
        for _ in range(300):
            a = rng.randrange(fld.size)
            b = rng.randrange(fld.size)
            assert fld.mul(a, b) == slow_mul(a, b, fld.modulus, k)


def test_field_axioms_sampled():
    for k in (3, 4, 8):
        fld = field(k)
        rng = random.Random(51)
        for _ in range(200):
            a, b, c = (rng.randrange(fld.size) for _ in range(3))
            assert fld.add(a, b) == fld.add(b, a)
            assert fld.mul(a, b) == fld.mul(b, a)
            assert fld.mul(a, fld.mul(b, c)) == fld.mul(fld.mul(a, b), c)
            assert fld.mul(a, fld.add(b, c)) == fld.add(fld.mul(a, b), fld.mul(a, c))
            assert fld.add(a, 0) == a
            assert fld.mul(a, 1) == a
            if a:
                assert fld.mul(a, fld.inv(a)) == 1
        with pytest.raises(ContractError):
            fld.inv(0)


def test_generator_spans_all_nonzero():
    for k in (2, 3, 4, 6):
        fld = field(k)
        g = fld.exp[1]
        seen = set()
        x = 1
        for _ in range(fld.size - 1):
            seen.add(x)
            x = fld.mul(x, g)
        assert x == 1
        assert len(seen) == fld.size - 1


def test_all_moduli_build():
    for k in IRREDUCIBLE:
        fld = field(k)
        assert fld.size == 1 << k
        top = fld.size - 1
        assert fld.mul(top, fld.inv(top)) == 1


def test_missing_and_reducible_moduli_rejected(monkeypatch):
    with pytest.raises(ContractError):
        field(99)
    monkeypatch.setitem(IRREDUCIBLE, 6, 0b1000001)  # x^6 + 1 = (x^3 + 1)^2
    with pytest.raises(ContractError):
        Field(6)


def test_poly_divmod_identity():
    fld = field(4)
    rng = random.Random(52)
    for _ in range(200):
        a = [rng.randrange(16) for _ in range(rng.randint(0, 8))]
        b = poly_trim([rng.randrange(16) for _ in range(rng.randint(1, 6))])
        if not b:
            continue
        q, r = poly_divmod(fld, a, b)
        assert poly_deg(r) < poly_deg(b)
        recon = poly_add(poly_mul(fld, q, b), r)
        assert poly_trim(recon) == poly_trim(list(a))
    with pytest.raises(ContractError):
        poly_divmod(fld, [1, 2], [0])


def test_poly_eval_matches_power_sum():
    fld = field(5)
    rng = random.Random(53)
    for _ in range(100):
        coeffs = [rng.randrange(32) for _ in range(rng.randint(0, 6))]
        x = rng.randrange(32)
        acc = 0
        for i, c in enumerate(coeffs):
            acc = fld.add(acc, fld.mul(c, fld.pow(x, i)))
        assert poly_eval(fld, coeffs, x) == acc


def test_interpolate_matches_points():
    fld = field(4)
    rng = random.Random(54)
    for _ in range(100):
        npts = rng.randint(1, 16)
        xs = rng.sample(range(16), npts)
        pts = [(x, rng.randrange(16)) for x in xs]
        poly = interpolate(fld, pts)
        assert poly_deg(poly) < npts
        for x, y in pts:
            assert poly_eval(fld, poly, x) == y
    with pytest.raises(ContractError):
        interpolate(fld, [(1, 2), (1, 3)])


def test_interpolation_subsets_agree():
    # any 4 of 8 evaluations of a degree < 4 polynomial recover it exactly
    fld = field(4)
    poly = [3, 7, 0, 9]
    values = [poly_eval(fld, poly, a) for a in range(8)]
    for subset in itertools.combinations(range(8), 4):
        pts = [(a, values[a]) for a in subset]
        assert poly_trim(interpolate(fld, pts)) == poly


def test_extra_evals_of_constant_blocks():
    fld = field(4)
    assert rs_extra_evals(fld, [9, 9, 9, 9], 4) == [9, 9, 9, 9]
    assert rs_extra_evals(fld, [5], 3) == [5, 5, 5]
    assert rs_extra_evals(fld, [1, 2, 3], 0) == []
    with pytest.raises(ContractError):
        rs_extra_evals(fld, [1] * 10, 7)  # 17 points in a 16-element field
    with pytest.raises(ContractError):
        rs_extra_evals(fld, [16], 1)


def test_rs_correct_clean():
    fld = field(8)
    rng = random.Random(55)
    for _ in range(50):
        m = rng.randint(1, 20)
        s = rng.randint(0, 20)
        blocks = [rng.randrange(256) for _ in range(m)]
        extra = rs_extra_evals(fld, blocks, s)
        assert rs_correct(fld, blocks, extra) == blocks


def test_rs_single_error_exhaustive():
    # m=4, s=4 over GF(16): every position (data and redundancy alike), every
    # wrong value, always corrected since floor(s/2) = 2.
    fld = field(4)
    rng = random.Random(56)
    blocks = [rng.randrange(16) for _ in range(4)]
    extra = rs_extra_evals(fld, blocks, 4)
    full = blocks + extra
    for pos in range(8):
        for wrong in range(16):
            if wrong == full[pos]:
                continue
            corrupted = list(full)
            corrupted[pos] = wrong
            assert rs_correct(fld, corrupted[:4], corrupted[4:]) == blocks


def test_rs_two_errors_in_capacity():
    fld = field(4)
    rng = random.Random(57)
    blocks = [rng.randrange(16) for _ in range(4)]
    extra = rs_extra_evals(fld, blocks, 4)
    full = blocks + extra
    for p1, p2 in itertools.combinations(range(8), 2):
        corrupted = list(full)
        corrupted[p1] ^= 5
        corrupted[p2] ^= 9
        assert rs_correct(fld, corrupted[:4], corrupted[4:]) == blocks


def test_rs_gf256_random_errors_in_capacity():
    fld = field(8)
    rng = random.Random(58)
    for _ in range(100):
        m = rng.randint(4, 32)
        s = rng.randint(2, 16)
        blocks = [rng.randrange(256) for _ in range(m)]
        full = blocks + rs_extra_evals(fld, blocks, s)
        for pos in rng.sample(range(m + s), rng.randint(0, s // 2)):
            full[pos] ^= rng.randrange(1, 256)
        assert rs_correct(fld, full[:m], full[m:]) == blocks


def test_rs_output_always_agrees_with_majority():
    # Whatever garbage comes in, a non-None answer interpolates to a
    # polynomial matching at least (m + s + m) / 2 of the given values.
    fld = field(4)
    rng = random.Random(59)
    returned = failed = 0
    for _ in range(300):
        m = rng.randint(1, 6)
        s = rng.randint(0, 10 - m)
        values = [rng.randrange(16) for _ in range(m + s)]
        got = rs_correct(fld, values[:m], values[m:])
        if got is None:
            failed += 1
            continue
        returned += 1
        poly = interpolate(fld, list(enumerate(got)))
        agree = sum(1 for a, v in enumerate(values) if poly_eval(fld, poly, a) == v)
        assert 2 * agree >= 2 * m + s
    assert returned > 0 and failed > 0
