"""Tests for belief propagation and its reverse pass."""
# pyright: basic

import math

import numpy as np
import pytest

from gqla.core import (
    BpConfig,
    GqlaError,
    ParityCheckMatrix,
    backward,
    bce_loss,
    bp_decode,
    bp_decode_gated,
    build_generator,
    encode,
)

from .doubles.codes import hamming_code, random_codes, random_llrs
from .doubles.oracles import (
    finite_difference_gradient,
    gated_loss,
    reference_gradient,
    sparse_sum_product,
)


def _relaxed(h_full: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    relaxed = h_full.astype(np.float64)
    relaxed[:, :k] = rng.uniform(0.2, 0.8, size=(h_full.shape[0], k))
    return relaxed


def test_bp_config_rejects_invalid_values():
    with pytest.raises(GqlaError):
        BpConfig(iterations=0)
    with pytest.raises(GqlaError):
        BpConfig(epsilon=1.0)
    with pytest.raises(GqlaError):
        BpConfig(message_clamp=-1.0)


def test_bp_decode_single_check_matches_hand_computation():
    lambda_out, bits = bp_decode(np.array([[1, 1, 1]]), [2.0, 2.0, -2.0], BpConfig(1))

    mu = 2.0 * math.atanh(math.tanh(1.0) * math.tanh(-1.0))
    assert mu == pytest.approx(-1.3250027, abs=1e-7)
    assert lambda_out[0] == pytest.approx(2.0 + mu, abs=1e-12)
    assert lambda_out[2] == pytest.approx(-2.0 - mu, abs=1e-12)
    assert bits[0] == 0


def test_bp_decode_two_variable_check_swaps_llrs():
    lambda_out, _ = bp_decode(np.array([[1, 1]]), [3.0, -1.0], BpConfig(1))

    assert lambda_out == pytest.approx([2.0, 2.0], abs=1e-9)


def test_bp_decode_all_zero_llrs_give_all_zero_output():
    lambda_out, bits = bp_decode(hamming_code(), np.zeros(7), BpConfig(5))

    assert np.all(lambda_out == 0.0)
    assert np.all(bits == 0)


def test_bp_decode_ties_decode_to_zero():
    _, bits = bp_decode(np.array([[1, 1]]), [0.0, 0.0], BpConfig(1))

    assert bits.tolist() == [0, 0]


def test_bp_decode_matches_sparse_oracle():
    for i, code in enumerate(random_codes(20, 12, seed=3)):
        llr = random_llrs(code.dims.n, seed=i)

        lambda_out, _ = bp_decode(code, llr, BpConfig(3))

        expected = sparse_sum_product(code.full, llr, 3)
        assert lambda_out == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_bp_decode_batch_equals_rows():
    code = hamming_code()
    llrs = random_llrs(7, seed=1, batch=4)

    batch_out, batch_bits = bp_decode(code, llrs, BpConfig(5))

    for row, out, bits in zip(llrs, batch_out, batch_bits):
        single_out, single_bits = bp_decode(code, row, BpConfig(5))
        assert out == pytest.approx(single_out)
        assert np.array_equal(bits, single_bits)


def _even_checks(code: ParityCheckMatrix) -> ParityCheckMatrix:
    w = np.array(code.w)
    w[:, 0] ^= ((w.sum(axis=1) + 1) % 2).astype(np.uint8)
    return ParityCheckMatrix(code.dims, w)


def test_bp_decode_is_odd_in_the_llrs_when_all_ones_is_a_codeword():
    for i, code in enumerate(map(_even_checks, random_codes(10, 16, seed=5))):
        llr = random_llrs(code.dims.n, seed=i)

        positive, _ = bp_decode(code, llr, BpConfig(4))
        negative, _ = bp_decode(code, -llr, BpConfig(4))

        assert negative == pytest.approx(-positive, abs=1e-9)


def test_bp_decode_messages_stay_finite_for_many_iterations():
    code = hamming_code()
    llr = np.array([5.0, -5.0, 5.0, 5.0, -5.0, 5.0, 5.0])

    lambda_out, _ = bp_decode(code, llr, BpConfig(iterations=200))

    assert np.isfinite(lambda_out).all()


def test_bp_decode_recovers_noiseless_codewords():
    code = hamming_code()
    generator = build_generator(code)
    for value in range(16):
        u = np.array([(value >> b) & 1 for b in range(4)], dtype=np.uint8)
        codeword = encode(generator, u)

        _, bits = bp_decode(code, 10.0 * (1.0 - 2.0 * codeword), BpConfig(1))

        assert np.array_equal(bits, codeword)


def test_gated_decode_equals_edge_decode_at_binary_h():
    for i, code in enumerate(random_codes(100, 16, seed=11)):
        llr = random_llrs(code.dims.n, seed=100 + i)

        edge_out, _ = bp_decode(code, llr, BpConfig(3))
        gated_out, _ = bp_decode_gated(code.full, llr, BpConfig(3))

        assert gated_out == pytest.approx(edge_out, abs=1e-9)


def test_gated_decode_equals_edge_decode_with_message_clamp():
    cfg = BpConfig(4, message_clamp=1.0)
    for i, code in enumerate(random_codes(20, 12, seed=5)):
        llr = random_llrs(code.dims.n, seed=300 + i, scale=4.0)

        edge_out, _ = bp_decode(code, llr, cfg)
        gated_out, _ = bp_decode_gated(code.full, llr, cfg)

        assert gated_out == pytest.approx(edge_out, abs=1e-9)


def test_message_clamp_bounds_check_messages():
    code = hamming_code()
    llr = np.full(7, 50.0)
    llr[0] = -50.0

    lambda_out, _ = bp_decode(code, llr, BpConfig(3, message_clamp=0.5))

    # |2 atanh(prod tanh(m/2))| <= 0.5 once every |m| <= 0.5
    degrees = code.full.sum(axis=0)
    assert (np.abs(lambda_out - llr) <= 0.5 * degrees + 1e-9).all()


def test_gated_decode_rejects_entries_outside_unit_interval():
    relaxed = hamming_code().full.astype(np.float64)
    relaxed[0, 0] = 1.5

    with pytest.raises(GqlaError):
        bp_decode_gated(relaxed, np.zeros(7), BpConfig(1))


def test_gated_decode_ignores_a_gated_off_row():
    relaxed = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    llr = [3.0, -1.0, 0.5]

    gated_out, _ = bp_decode_gated(relaxed, llr, BpConfig(2))

    assert gated_out == pytest.approx([2.0, 2.0, 0.5], abs=1e-9)


def test_gated_decode_fully_on_with_zero_llrs_is_zero():
    gated_out, _ = bp_decode_gated(np.ones((3, 6)), np.zeros(6), BpConfig(3))

    assert np.all(gated_out == 0.0)


def test_gated_forward_matches_scalar_oracle():
    code = hamming_code()
    relaxed = _relaxed(code.full, 4, seed=0)
    llr = random_llrs(7, seed=2)

    out, _ = bp_decode_gated(relaxed, llr, BpConfig(2))

    assert bce_loss(out).total == pytest.approx(gated_loss(relaxed, llr, 2), rel=1e-9)


@pytest.mark.parametrize(
    "lambda_out, expected",
    [
        (np.zeros(5), 5 * math.log(2.0)),
        (np.array([1.0, -1.0]), 1.626524),
        (np.array([50.0, 60.0]), 0.0),
    ],
)
def test_bce_loss(lambda_out, expected):
    loss = bce_loss(lambda_out)

    assert loss.total == pytest.approx(expected, abs=1e-6)
    assert loss.total == pytest.approx(loss.per_bit.sum())
    assert np.all(loss.per_bit >= 0)


def test_backward_exact_matches_finite_differences():
    cfg = BpConfig(iterations=2, gradient_mode="exact")
    for i, code in enumerate(random_codes(50, 12, seed=21)):
        k = code.dims.k
        relaxed = _relaxed(code.full, k, seed=i)
        llr = random_llrs(code.dims.n, seed=200 + i, scale=1.5)

        _, tape = bp_decode_gated(relaxed, llr, cfg)
        grad = backward(tape, cfg, reduction="sum")

        def loss(h: np.ndarray) -> float:
            out, _ = bp_decode_gated(h, llr, cfg)
            return bce_loss(out).total

        numeric = finite_difference_gradient(relaxed, loss, k)
        significant = np.abs(grad) > 1e-6
        assert grad.shape == (code.dims.m, k)
        assert np.all(
            np.abs(grad - numeric)[significant]
            <= 1e-4 * np.abs(grad)[significant] + 1e-9
        )


def test_backward_pass_through_matches_reference_reverse_pass():
    cfg = BpConfig(iterations=2, gradient_mode="pass_through")
    for i, code in enumerate(random_codes(50, 12, seed=27)):
        k = code.dims.k
        relaxed = _relaxed(code.full, k, seed=50 + i)
        llr = random_llrs(code.dims.n, seed=400 + i)

        _, tape = bp_decode_gated(relaxed, llr, cfg)
        grad = backward(tape, cfg, reduction="sum")

        expected = reference_gradient(relaxed, llr, 2, k, lambda _: 1.0)
        scale = max(1.0, float(np.max(np.abs(expected))))
        assert np.max(np.abs(grad - expected)) <= 1e-9 * scale


def test_backward_exact_matches_reference_reverse_pass():
    cfg = BpConfig(iterations=3, gradient_mode="exact")
    code = hamming_code()
    relaxed = code.full.astype(np.float64)
    llr = random_llrs(7, seed=9)

    _, tape = bp_decode_gated(relaxed, llr, cfg)
    grad = backward(tape, cfg, reduction="sum")

    expected = reference_gradient(relaxed, llr, 3, 4, lambda p: 1.0 / (1.0 - p * p))
    assert grad == pytest.approx(expected, rel=1e-7, abs=1e-9)


def test_backward_modes_agree_for_small_llrs():
    code = hamming_code()
    relaxed = code.full.astype(np.float64)
    rng = np.random.default_rng(4)
    llr = 0.2 * np.sign(rng.standard_normal(7))

    _, tape = bp_decode_gated(relaxed, llr, BpConfig(2))
    exact = backward(tape, BpConfig(2, gradient_mode="exact"), reduction="sum")
    passed = backward(tape, BpConfig(2, gradient_mode="pass_through"), reduction="sum")

    significant = np.abs(exact) > 1e-6
    assert np.all(
        np.abs(exact - passed)[significant] <= 0.05 * np.abs(exact)[significant]
    )


def test_backward_is_zero_where_the_loss_does_not_depend_on_h():
    # each check holds four zero factors at zero LLRs
    code = hamming_code()
    _, tape = bp_decode_gated(code.full, np.zeros(7), BpConfig(2))

    grad = backward(tape, BpConfig(2, gradient_mode="exact"))

    assert np.all(grad == 0.0)


def test_backward_reductions():
    code = hamming_code()
    llrs = random_llrs(7, seed=12, batch=3)
    cfg = BpConfig(2)
    _, tape = bp_decode_gated(code.full, llrs, cfg)

    per_sample = backward(tape, cfg, reduction="none")
    total = backward(tape, cfg, reduction="sum")
    mean = backward(tape, cfg, reduction="mean")

    assert per_sample.shape == (3, 3, 4)
    assert total == pytest.approx(per_sample.sum(axis=0))
    assert mean == pytest.approx(total / 3)
