import math

import numpy as np
import pytest

from proxybench import (
    EVENTS,
    NoiseModel,
    ProxyProgram,
    SimulatedMachine,
    format_counts,
    parse_counts,
    predict_events,
    simulate,
)
from proxybench.errors import CountsParseError, DocumentFormatError, DuplicateEventError
from proxybench.events import MISS_ACCESS_PAIRS


@pytest.fixture
def program(library):
    return ProxyProgram((("mem_stride64", 50_000), ("br_t448", 80_000), ("fpmix_div8", 20_000)))


class TestNoiseModel:
    def test_epsilon_range(self):
        with pytest.raises(DocumentFormatError):
            NoiseModel.uniform(1.0)
        with pytest.raises(DocumentFormatError):
            NoiseModel("multiplicative_uniform", epsilon=-0.1)

    def test_sigma_range(self):
        with pytest.raises(DocumentFormatError):
            NoiseModel.gaussian(-0.5)

    def test_interaction_matrix_validation(self):
        with pytest.raises(DocumentFormatError):
            NoiseModel.interaction(((0.0, 0.0), (0.0,)))
        with pytest.raises(DocumentFormatError):
            NoiseModel.interaction(((-0.6,),))


class TestSimulate:
    def test_none_equals_prediction_bitwise(self, library, program):
        assert simulate(program, library).counts == predict_events(program, library).counts

    def test_fixed_seed_is_deterministic(self, library, program):
        noise = NoiseModel.uniform(0.05, seed=99)
        first = simulate(program, library, noise, nonce=3)
        second = simulate(program, library, noise, nonce=3)
        assert first.counts == second.counts

    def test_distinct_nonces_differ(self, library, program):
        noise = NoiseModel.uniform(0.05, seed=99)
        assert simulate(program, library, noise, nonce=1).counts != \
            simulate(program, library, noise, nonce=2).counts

    def test_uniform_bound_and_unbiasedness(self, library, program):
        predicted = predict_events(program, library).counts
        n = 1000
        ratios = {event: [] for event in predicted}
        for seed in range(n):
            noisy = simulate(program, library, NoiseModel.uniform(0.05, seed=seed))
            for event, value in noisy.counts.items():
                ratio = value / predicted[event]
                assert 0.95 - 1e-12 <= ratio <= 1.05 + 1e-12
                ratios[event].append(ratio)
        for event, values in ratios.items():
            assert abs(np.mean(values) - 1.0) <= 3.0 / math.sqrt(n)

    def test_gaussian_zero_sigma_equals_prediction(self, library, program):
        noisy = simulate(program, library, NoiseModel.gaussian(0.0, seed=5))
        assert noisy.counts == predict_events(program, library).counts

    def test_zero_interaction_equals_prediction(self, library, program):
        m = len(program.entries)
        matrix = tuple(tuple(0.0 for _ in range(m)) for _ in range(m))
        noisy = simulate(program, library, NoiseModel.interaction(matrix))
        assert noisy.counts == pytest.approx(predict_events(program, library).counts)

    def test_interaction_scales_by_instruction_share(self, library):
        # one block, self-interaction 0.5: every event scaled by 1.5
        program = ProxyProgram((("mem_stride64", 10_000),))
        noisy = simulate(program, library, NoiseModel.interaction(((0.5,),)))
        predicted = predict_events(program, library)
        for event, value in predicted.counts.items():
            assert noisy.counts[event] == pytest.approx(1.5 * value, rel=1e-12)

    def test_interaction_dimension_mismatch(self, library, program):
        with pytest.raises(DocumentFormatError):
            simulate(program, library, NoiseModel.interaction(((0.0,),)))

    def test_miss_never_exceeds_access_under_noise(self, library, program):
        for seed in range(200):
            noisy = simulate(program, library, NoiseModel.gaussian(0.5, seed=seed))
            for miss, access in MISS_ACCESS_PAIRS:
                if miss in noisy.counts and access in noisy.counts:
                    assert noisy.counts[miss] <= noisy.counts[access]

    def test_simulated_machine_wraps_simulate(self, library, program):
        machine = SimulatedMachine(library, NoiseModel.uniform(0.02, seed=1))
        assert machine.measure(program, nonce=7).counts == \
            simulate(program, library, NoiseModel.uniform(0.02, seed=1), nonce=7).counts


class TestCountsDocuments:
    def test_two_line_document(self):
        result = parse_counts("cycles=1200\ninstructions=1000\n")
        assert result.counts == {"cycles": 1200.0, "instructions": 1000.0}
        assert result.provenance == "imported"

    def test_comments_and_blank_lines(self):
        text = "# perf import\n\ncycles = 10\n  # trailing comment line\ninstructions=2e3\n"
        result = parse_counts(text)
        assert result.counts == {"cycles": 10.0, "instructions": 2000.0}

    def test_negative_count_reports_line(self):
        with pytest.raises(CountsParseError) as err:
            parse_counts("cycles=5\ninstructions=-1\n")
        assert err.value.line == 2

    def test_unknown_event_reports_line(self):
        with pytest.raises(CountsParseError) as err:
            parse_counts("cycles=5\nwidgets=1\n")
        assert err.value.line == 2

    def test_duplicate_event(self):
        with pytest.raises(DuplicateEventError):
            parse_counts("cycles=5\ncycles=6\n")

    def test_missing_separator(self):
        with pytest.raises(CountsParseError):
            parse_counts("cycles 5\n")

    def test_bad_value(self):
        with pytest.raises(CountsParseError):
            parse_counts("cycles=many\n")

    def test_nan_rejected(self):
        with pytest.raises(CountsParseError):
            parse_counts("cycles=nan\n")

    def test_all_events_round_trip(self):
        values = {event: float(i + 2) * 100.0 for i, event in enumerate(EVENTS)}
        for miss, access in MISS_ACCESS_PAIRS:
            values[miss] = values[access] * 0.25
        text = "\n".join(f"{event}={value}" for event, value in values.items()) + "\n"
        result = parse_counts(text)
        assert len(result.counts) == 21
        canonical = format_counts(result)
        assert format_counts(parse_counts(canonical)) == canonical
        # a complete document supports every built-in metric
        from proxybench import METRICS, compute_all_metrics

        assert len(compute_all_metrics(result, METRICS)) == 14

    def test_integer_values_stay_integers(self):
        text = format_counts(parse_counts("cycles=1200\n"))
        assert text == "cycles=1200\n"

    def test_float_values_round_trip_exactly(self):
        result = parse_counts("cycles=0.1\ninstructions=1e-3\n")
        again = parse_counts(format_counts(result))
        assert again.counts == result.counts

    def test_pair_invariant_checked(self):
        with pytest.raises(CountsParseError):
            parse_counts("l1d_misses=5\nl1d_accesses=2\n")
