"""Tests for the train services."""
# pyright: basic

import csv
import os

import numpy as np
import pytest
from pytest_mock import MockerFixture

from gqla.config import resolve_training_config
from gqla.core import BlerEstimate, ChannelSpec, Stream
from gqla.evaluate import estimate_bler
from gqla.train import (
    TrainingReport,
    code_metadata,
    compute_gradient,
    count_updates,
    session_configs,
    train,
    train_sessions,
    write_session_summary,
    write_training_log,
)

from .doubles.codes import hamming_code, random_llrs
from .doubles.config import tiny_config


def _estimate(p_tilde: float) -> BlerEstimate:
    return BlerEstimate(
        blocks=1000,
        block_errors=10,
        p_tilde=p_tilde,
        half_width=p_tilde / 10,
        converged=True,
    )


@pytest.fixture
def validation(mocker: MockerFixture):
    return mocker.patch("gqla.train.estimate_bler", return_value=_estimate(0.01))


def _push_first_entry_to_one():
    grad = np.zeros((3, 4))
    grad[0, 0] = -1.0
    return grad


def test_train_counts_flushes_and_effective_updates(mocker: MockerFixture, validation):
    mocker.patch("gqla.train.compute_gradient", return_value=_push_first_entry_to_one())

    report = train(tiny_config())

    # one flush every T = 5 steps, only the first flips a bit
    assert report.update_count == 20
    assert report.effective_update_count == 1
    assert count_updates(report) == 20
    assert report.code.w[0, 0] == 1
    assert report.code.w.sum() == 1


def test_train_validates_every_epoch_on_its_own_lane(mocker: MockerFixture, validation):
    mocker.patch("gqla.train.compute_gradient", return_value=np.zeros((3, 4)))

    train(tiny_config(max_epochs=3, patience=3, seed=7))

    assert validation.call_count == 3
    for epoch, call in enumerate(validation.call_args_list):
        assert call.args[5] == "all_zero"
        assert call.kwargs["stream"] == Stream.VALIDATION
        assert call.kwargs["lane"] == epoch
        assert call.args[4] == 7


def test_train_keeps_best_code_and_stops_on_patience(mocker: MockerFixture):
    mocker.patch("gqla.train.compute_gradient", return_value=_push_first_entry_to_one())
    mocker.patch(
        "gqla.train.estimate_bler",
        side_effect=[_estimate(p) for p in (0.1, 0.05, 0.06, 0.07, 0.01)],
    )

    report = train(tiny_config(max_epochs=5, patience=2, steps_per_epoch=3))

    assert len(report.history) == 4
    assert report.best_epoch == 1
    assert report.best_val_bler == 0.05
    # the first flush happens at step 5, during epoch 1
    assert report.code.w[0, 0] == 1
    assert [r.updates for r in report.history] == [0, 1, 1, 2]


def test_train_keeps_first_epoch_without_improvement(mocker: MockerFixture):
    mocker.patch("gqla.train.compute_gradient", return_value=_push_first_entry_to_one())
    mocker.patch("gqla.train.estimate_bler", return_value=_estimate(0.2))

    report = train(tiny_config(max_epochs=4, patience=3, steps_per_epoch=5))

    assert report.best_epoch == 0
    assert report.code.w[0, 0] == 1
    assert len(report.history) == 4


def test_train_dsf_flips_on_first_step(mocker: MockerFixture, validation):
    mocker.patch("gqla.train.compute_gradient", return_value=np.full((3, 4), -0.5))

    report = train(tiny_config(optimizer="dsf"))

    assert report.update_count == 1
    assert report.code.w.all()


def test_train_s_gqla_votes_per_sample(mocker: MockerFixture, validation):
    grads = np.zeros((4, 3, 4))
    grads[:3, 0, 0] = -1.0
    grads[3, 0, 0] = 2.0
    gradient = mocker.patch("gqla.train.compute_gradient", return_value=grads)

    report = train(tiny_config(optimizer="s_gqla_update_matrix"))

    assert report.update_count == 20
    assert report.effective_update_count == 1
    assert gradient.call_args.args[3] is True


def test_train_runs_end_to_end_and_is_reproducible():
    cfg = tiny_config(
        init_density=0.4, threshold_t=2, max_epochs=2, patience=2, steps_per_epoch=4
    )

    first = train(cfg)
    second = train(cfg)

    assert first.code == second.code
    assert first.update_count == second.update_count
    assert len(first.history) == 2
    assert np.isin(first.code.w, (0, 1)).all()
    assert first.best_epoch is not None


def test_compute_gradient_shapes():
    code = hamming_code()
    llrs = random_llrs(7, seed=1, batch=5)

    mean = compute_gradient(code, llrs, tiny_config().train_bp, per_sample=False)
    each = compute_gradient(code, llrs, tiny_config().train_bp, per_sample=True)

    assert mean.shape == (3, 4)
    assert each.shape == (5, 3, 4)
    assert mean == pytest.approx(each.mean(axis=0))


def test_session_configs_use_consecutive_seeds():
    configs = session_configs(tiny_config(seed=10), 3)

    assert [c.seed for c in configs] == [10, 11, 12]


def test_train_sessions_runs_each_seed(mocker: MockerFixture, validation):
    mocker.patch("gqla.train.compute_gradient", return_value=np.zeros((3, 4)))

    reports = train_sessions(tiny_config(seed=2), 2)

    assert [r.config.seed for r in reports] == [2, 3]


def test_training_outputs(tmp_path, mocker: MockerFixture, validation):
    mocker.patch("gqla.train.compute_gradient", return_value=_push_first_entry_to_one())
    report = train(tiny_config(threshold_t=5))
    log_path = os.path.join(tmp_path, "code.train.csv")
    summary_path = os.path.join(tmp_path, "sessions.csv")

    write_training_log(log_path, report)
    write_session_summary(summary_path, [report, report])

    with open(log_path, encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["steps"] == "0-99"
    assert rows[0]["updates"] == "20"
    assert rows[0]["effective_updates"] == "1"
    with open(summary_path, encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [r["session"] for r in rows] == ["0", "1", "total"]
    assert rows[-1]["update_count"] == "40"
    metadata = code_metadata(report)
    assert metadata.threshold_t == 5
    assert metadata.update_count == 20


# Best random (32,16) code found by a full-scale search, BLER at 5 dB.
BEST_RANDOM_BLER = 4.2e-3


@pytest.fixture(scope="module")
def desk_sessions() -> list[TrainingReport]:
    cfg = resolve_training_config({"preset": "32x16", "batch_size": 8})
    return train_sessions(cfg, 5, workers=0)


@pytest.mark.slow
def test_learned_codes_beat_the_best_random_code(desk_sessions):
    blers = sorted(
        estimate_bler(report.code, ChannelSpec(5.0, 0.5), 5, 0.1, 0, workers=0).p_tilde
        for report in desk_sessions
    )

    assert all(bler <= BEST_RANDOM_BLER for bler in blers[:4])
    assert blers[4] <= 2 * BEST_RANDOM_BLER


@pytest.mark.slow
def test_desk_sessions_update_count_is_in_range(desk_sessions):
    for report in desk_sessions:
        assert 60 / 3 <= count_updates(report) <= 106 * 3
