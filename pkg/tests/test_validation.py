import pytest
from pydantic import ValidationError

from reception.params import with_overrides
from reception.queue import ChainSpec, steady_state
from schemas import ValidationSettings
from simulation.validation import render_report, total_variation, validate, validate_chain

QUICK = dict(events=200_000, replications=4, seed=0, workers=1)


def test_total_variation():
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert total_variation([0.2, 0.3, 0.5], [0.3, 0.3, 0.4]) == pytest.approx(0.1)


def test_single_receptor_passes(single_receptor):
    report = validate_chain(single_receptor, ValidationSettings(**QUICK))
    assert report.passed, report.failures
    assert report.tv_median < 0.02
    assert len(report.replication_tv) == 4
    assert report.rejection_rel_error < 0.02
    assert report.expected_interarrival_mean == pytest.approx(0.5)
    assert report.expected_interarrival_var == pytest.approx(0.25)


def test_three_state_passes(three_state):
    report = validate_chain(three_state, ValidationSettings(**QUICK))
    assert report.passed, report.failures
    assert [row.n for row in report.per_state] == [0, 1, 2]
    analytic = steady_state(three_state).probs
    assert [row.analytic for row in report.per_state] == analytic.tolist()


def test_larger_chain_passes():
    chain = ChainSpec.from_rates(30.0, 1.0, Nr=4, Nm=40)
    report = validate_chain(chain, ValidationSettings(**QUICK))
    assert report.passed, report.failures
    assert report.states == 41


def test_perturbed_death_rates_fail(three_state):
    # a 10% error in every death rate moves the distribution by about 0.03
    report = validate_chain(three_state, ValidationSettings(perturb=0.1, **QUICK))
    assert not report.passed
    assert report.failures[0].startswith("total variation")
    assert "largest deviation at state" in report.failures[0]
    assert report.tv_median > 0.02


def test_validation_is_reproducible(three_state):
    settings = ValidationSettings(events=20_000, replications=2, seed=5, workers=1)
    first = validate_chain(three_state, settings)
    second = validate_chain(three_state, settings)
    assert first.replication_tv == second.replication_tv
    assert first.interarrival_mean == second.interarrival_mean


def test_render_report(three_state):
    settings = ValidationSettings(events=20_000, replications=2, seed=5, workers=1, perturb=0.5)
    text = render_report(validate_chain(three_state, settings))
    assert text.startswith("validation: FAIL")
    assert "perturbed by +0.5" in text
    assert "failure: total variation" in text


def test_settings_defaults():
    settings = ValidationSettings()
    assert settings.events == 1_000_000
    assert settings.replications == 8
    assert settings.tv_tolerance == 0.02
    with pytest.raises(ValidationError):
        ValidationSettings(perturb=-1.0)


@pytest.mark.slow
def test_single_receptor_passes_with_default_settings(single_receptor):
    report = validate_chain(single_receptor, ValidationSettings())
    assert report.passed, report.failures


def test_validate_from_configuration(reference):
    # Ra=0.5 nm keeps the reception space at 33 molecules
    params = with_overrides(reference, Ra=0.5)
    report = validate(params, ValidationSettings(**QUICK))
    assert report.states == 34
    assert report.passed, report.failures


@pytest.mark.slow
def test_distance_shrinks_with_longer_runs():
    chain = ChainSpec.from_rates(30.0, 1.0, Nr=4, Nm=40)
    short = validate_chain(chain, ValidationSettings(events=10_000, replications=8, seed=3))
    long = validate_chain(chain, ValidationSettings(events=1_000_000, replications=8, seed=3))
    assert long.tv_median < short.tv_median
    assert long.passed, long.failures
    assert long.tv_median < 0.02
    assert long.rejection_rel_error < 0.02
