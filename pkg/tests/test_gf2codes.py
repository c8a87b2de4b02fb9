import random

import pytest

from hamsync.bitword import Word
from hamsync.errors import CapabilityError, ContractError
from hamsync.gf2codes import (
    AffineSolver,
    BitMatrix,
    bitmatrix_from_bytes,
    bitmatrix_to_bytes,
    code_from_parity,
    codewords,
    encode,
    extract_message,
    hamming_7_4,
    list_decode_exhaustive,
    mat_vec,
    min_distance,
    random_linear_code,
    rank,
    solve_affine,
    syndrome,
    unique_decode,
)


def mat_vec_oracle(m: BitMatrix, x: int) -> int:
    out = 0
    for r in range(m.rows):
        acc = 0
        for c in range(m.cols):
            acc ^= m.entry(r, c) & ((x >> c) & 1)
        out |= acc << r
    return out


def rank_oracle(masks) -> int:
    span = {0}
    for m in masks:
        span |= {s ^ m for s in span}
    return (len(span) - 1).bit_length()


def test_mat_vec_matches_oracle():
    rng = random.Random(31)
    for _ in range(100):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 12)
        m = BitMatrix(rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows)))
        x = rng.getrandbits(cols)
        assert mat_vec(m, x) == mat_vec_oracle(m, x)


def test_rank_matches_span_size():
    rng = random.Random(32)
    for _ in range(100):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 8)
        masks = tuple(rng.getrandbits(cols) for _ in range(rows))
        assert rank(BitMatrix(rows, cols, masks)) == rank_oracle(masks)


def test_bitmatrix_contracts():
    with pytest.raises(ContractError):
        BitMatrix(0, 3, ())
    with pytest.raises(ContractError):
        BitMatrix(2, 3, (1,))
    with pytest.raises(ContractError):
        BitMatrix(1, 3, (8,))
    with pytest.raises(ContractError):
        BitMatrix(1, 3, (1,)).entry(0, 3)


def test_affine_solver_matches_exhaustive():
    rng = random.Random(34)
    for _ in range(40):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 7)
        h = BitMatrix(rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows)))
        solver = AffineSolver(h)
        for b in range(1 << rows):
            solutions = [t for t in range(1 << cols) if mat_vec(h, t) == b]
            t = solver.solve(b)
            if solutions:
                assert t in solutions
            else:
                assert t is None


def test_solve_affine_word_wrapper():
    h = BitMatrix(2, 3, (0b011, 0b110))
    t = solve_affine(h, Word(0b11, 2))
    assert t is not None and mat_vec(h, t.value) == 0b11
    with pytest.raises(ContractError):
        solve_affine(h, Word(0, 3))


def test_code_from_parity_rejects_dependent_rows():
    with pytest.raises(ContractError):
        code_from_parity((0b101, 0b101), 3)
    with pytest.raises(ContractError):
        code_from_parity((0b0011, 0b0110, 0b0101), 4)


def test_hamming_7_4_frozen_facts():
    code = hamming_7_4()
    assert (code.n, code.k) == (7, 4)
    assert code.message_positions == (2, 4, 5, 6)
    assert code.check_positions == (0, 1, 3)
    assert min_distance(code) == 3
    for i in range(7):
        # the syndrome of a single flip at position i spells out i+1
        assert syndrome(code, Word(1 << i, 7)).value == i + 1


def test_hamming_corrects_every_single_error():
    code = hamming_7_4()
    for msg in range(16):
        c = encode(code, Word(msg, 4))
        assert syndrome(code, c).value == 0
        assert extract_message(code, c) == Word(msg, 4)
        for i in range(7):
            assert unique_decode(code, c.flip([i])) == c


def test_codewords_enumeration():
    rng = random.Random(35)
    for _ in range(20):
        n = rng.randint(3, 9)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        members = [v for v in range(1 << n) if mat_vec(code.h, v) == 0]
        assert list(codewords(code)) == members  # ascending and complete
        assert len(members) == 1 << k


def test_min_distance_matches_pairwise():
    rng = random.Random(36)
    for _ in range(20):
        n = rng.randint(3, 9)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        members = [v for v in range(1 << n) if mat_vec(code.h, v) == 0]
        best = min((a ^ b).bit_count() for a in members for b in members if a != b)
        assert min_distance(code) == best


def test_list_decode_matches_cube_scan():
    rng = random.Random(37)
    for _ in range(30):
        n = rng.randint(4, 10)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        y = Word(rng.getrandbits(n), n)
        r = rng.randint(0, n)
        expected = [
            v
            for v in range(1 << n)
            if mat_vec(code.h, v) == 0 and (v ^ y.value).bit_count() <= r
        ]
        assert [w.value for w in list_decode_exhaustive(code, y, r)] == expected


def test_unique_decode_is_nearest():
    rng = random.Random(38)
    for _ in range(30):
        n = rng.randint(3, 9)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        y = Word(rng.getrandbits(n), n)
        got = unique_decode(code, y)
        best = min((y.value ^ c).bit_count() for c in codewords(code))
        assert (y.value ^ got.value).bit_count() == best


def test_unique_decode_tie_breaks_low():
    code = code_from_parity((0b11,), 2)  # codewords {00, 11}
    assert unique_decode(code, Word(0b01, 2)) == Word(0, 2)
    assert unique_decode(code, Word(0b10, 2)) == Word(0, 2)


def test_random_linear_code_shape():
    rng = random.Random(39)
    for _ in range(30):
        n = rng.randint(2, 16)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        assert (code.n, code.k) == (n, k)
        assert rank(code.h) == n - k
        assert len(code.g_rows) == k
        for g in code.g_rows:
            assert mat_vec(code.h, g) == 0


def test_encode_extract_roundtrip():
    rng = random.Random(40)
    for _ in range(30):
        n = rng.randint(2, 12)
        k = rng.randint(1, n - 1)
        code = random_linear_code(n, k, rng)
        msg = Word(rng.getrandbits(k), k)
        c = encode(code, msg)
        assert syndrome(code, c).value == 0
        assert extract_message(code, c) == msg


def test_enumeration_budget_guards():
    rng = random.Random(41)
    wide = random_linear_code(30, 25, rng)
    with pytest.raises(CapabilityError):
        codewords(wide)
    lowdim = random_linear_code(26, 2, rng)
    with pytest.raises(CapabilityError):
        list_decode_exhaustive(lowdim, Word(0, 26), 1)


def test_bitmatrix_serialization_roundtrip():
    rng = random.Random(42)
    for _ in range(50):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 40)
        m = BitMatrix(rows, cols, tuple(rng.getrandbits(cols) for _ in range(rows)))
        assert bitmatrix_from_bytes(bitmatrix_to_bytes(m)) == m


def test_bitmatrix_serialization_rejects_garbage():
    m = BitMatrix(2, 3, (0b101, 0b010))
    raw = bitmatrix_to_bytes(m)
    with pytest.raises(ContractError):
        bitmatrix_from_bytes(raw[:-1])
    with pytest.raises(ContractError):
        bitmatrix_from_bytes(raw + b"\x00")
    tampered = bytearray(raw)
    tampered[-1] |= 0xC0  # bits beyond rows*cols must be zero
    with pytest.raises(ContractError):
        bitmatrix_from_bytes(bytes(tampered))
