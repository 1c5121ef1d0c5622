"""Tests for systematic codes."""
# pyright: basic

import numpy as np
import pytest

from gqla.core import (
    CodeDimensions,
    DensitySpec,
    GqlaError,
    ParityCheckMatrix,
    build_generator,
    encode,
    sample_w,
    syndrome,
)

from .doubles.codes import HAMMING_W, hamming_code, random_codes


@pytest.mark.parametrize("n, k", [(4, 4), (4, 0), (3, 5)])
def test_code_dimensions_rejects_invalid_pairs(n, k):
    with pytest.raises(GqlaError) as e:
        CodeDimensions(n, k)

    assert e.value.category == "config"


def test_code_dimensions_properties():
    dims = CodeDimensions(32, 16)

    assert dims.m == 16
    assert dims.rate == 0.5
    assert str(dims) == "(32,16)"


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_density_spec_rejects_out_of_range(p):
    with pytest.raises(GqlaError):
        DensitySpec(p)


def test_parity_check_matrix_full_is_w_then_identity():
    h = hamming_code()

    assert h.full.tolist() == [
        [1, 1, 0, 1, 1, 0, 0],
        [1, 0, 1, 1, 0, 1, 0],
        [0, 1, 1, 1, 0, 0, 1],
    ]
    assert h.dims == CodeDimensions(7, 4)


def test_parity_check_matrix_validates_shape_and_alphabet():
    with pytest.raises(GqlaError):
        ParityCheckMatrix(CodeDimensions(7, 4), np.zeros((4, 3), dtype=np.uint8))
    with pytest.raises(GqlaError):
        ParityCheckMatrix.from_w([[0, 2], [1, 0]])


def test_parity_check_matrix_is_immutable():
    h = hamming_code()

    with pytest.raises(ValueError):
        h.w[0, 0] = 0


def test_parity_check_matrix_equality_and_hash():
    assert hamming_code() == ParityCheckMatrix.from_w(HAMMING_W)
    assert hash(hamming_code()) == hash(ParityCheckMatrix.from_w(HAMMING_W))
    assert hamming_code() != ParityCheckMatrix.from_w(np.zeros((3, 4)))


def test_encode_places_message_first():
    g = build_generator(hamming_code())

    codeword = encode(g, [1, 0, 0, 0])

    assert codeword.tolist() == [1, 0, 0, 0, 1, 1, 0]


def test_encode_rejects_wrong_message_length():
    g = build_generator(hamming_code())

    with pytest.raises(GqlaError):
        encode(g, [1, 0, 0])


def test_every_codeword_has_zero_syndrome():
    for code in random_codes(20, 16, seed=1):
        g = build_generator(code)
        rng = np.random.default_rng(0)
        messages = rng.integers(0, 2, (16, code.dims.k))

        codewords = encode(g, messages)

        assert not syndrome(code, codewords).any()
        assert np.array_equal(codewords[:, : code.dims.k], messages)


def test_generator_is_orthogonal_to_h():
    code = hamming_code()
    g = build_generator(code)

    product = g.rows.astype(int) @ code.full.T.astype(int) % 2

    assert not product.any()


def test_syndrome_flags_single_errors():
    code = hamming_code()
    word = np.zeros(7, dtype=np.uint8)
    word[2] = 1

    assert syndrome(code, word).tolist() == [0, 1, 1]


def test_sample_w_extreme_densities():
    dims = CodeDimensions(10, 5)

    assert not sample_w(dims, DensitySpec(0.0), 1).w.any()
    assert sample_w(dims, DensitySpec(1.0), 1).w.all()


def test_sample_w_is_reproducible():
    dims = CodeDimensions(32, 16)

    first = sample_w(dims, DensitySpec(0.3), [4, 2])
    second = sample_w(dims, DensitySpec(0.3), [4, 2])
    other = sample_w(dims, DensitySpec(0.3), [4, 3])

    assert first == second
    assert first != other


@pytest.mark.slow
def test_sample_w_density_matches_bernoulli_moments():
    dims = CodeDimensions(32, 16)
    draws = 10_000
    p = 0.45
    cells = dims.m * dims.k

    total = sum(
        int(sample_w(dims, DensitySpec(p), [7, i]).w.sum()) for i in range(draws)
    )

    mean = total / draws
    sigma = np.sqrt(cells * p * (1 - p) / draws)
    assert abs(mean - p * cells) <= 3 * sigma
