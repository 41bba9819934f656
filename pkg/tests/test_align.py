import numpy as np
import pytest

from proxybench import (
    AlignConfig,
    EVENTS,
    MeasurementResult,
    NoiseModel,
    ProxyProgram,
    SimulatedMachine,
    TargetMetrics,
    align,
    instruction_total,
)
from proxybench.align import dump_trace, load_trace
from proxybench.errors import AlignmentError, DocumentFormatError
from proxybench.report import accuracy
from proxybench.solver import (
    assemble_incremental_system,
    assemble_initial_system,
    counts_from_solution,
    nnls,
    select_blocks,
)
from tests.conftest import hidden_targets


class TestConfig:
    def test_defaults_follow_the_method_constants(self):
        config = AlignConfig()
        assert config.rounds == 10
        assert config.growth == 0.2
        assert config.ins1 == 5e8

    def test_validation(self):
        with pytest.raises(DocumentFormatError):
            AlignConfig(rounds=0)
        with pytest.raises(DocumentFormatError):
            AlignConfig(growth=0.0)
        with pytest.raises(DocumentFormatError):
            AlignConfig(ins1=-1.0)


class TestNoiselessLoop:
    def test_round_one_hits_feasible_targets(self, library, rng):
        for _ in range(5):
            _, targets, ins1 = hidden_targets(library, rng)
            config = AlignConfig(rounds=1, ins1=ins1)
            program, trace = align(library, targets, config, SimulatedMachine(library))
            assert len(trace.rounds) == 1
            assert min(trace.rounds[0].accuracy.values()) >= 0.999

    def test_single_round_equals_manual_solve_path(self, library, rng):
        _, targets, ins1 = hidden_targets(library, rng)
        config = AlignConfig(rounds=1, ins1=ins1)
        program, trace = align(library, targets, config, SimulatedMachine(library))

        system = assemble_initial_system(library, targets, ins1)
        solution = nnls(system, config.tol, config.max_iter)
        eps = config.prune_eps * float(np.max(solution.x))
        working = select_blocks(solution, library, eps)
        counts = dict(zip(library.ids(), counts_from_solution(solution, library.n0)))
        expected = ProxyProgram(tuple((b, counts[b]) for b in working.ids()))
        assert program == expected

    def test_later_rounds_grow_by_twenty_percent(self, library, rng):
        _, targets, ins1 = hidden_targets(library, rng)
        config = AlignConfig(rounds=6, ins1=ins1)
        _, trace = align(library, targets, config, SimulatedMachine(library))
        totals = [r.measured.counts["instructions"] for r in trace.rounds]
        for before, after in zip(totals, totals[1:]):
            assert after / before == pytest.approx(1.2, rel=1e-3)
        # and metrics stay on target while growing
        assert min(trace.rounds[-1].accuracy.values()) >= 0.999

    def test_fixed_point_has_zero_metric_rhs(self, library, rng):
        _, targets, ins1 = hidden_targets(library, rng)
        config = AlignConfig(rounds=1, ins1=ins1)
        program, trace = align(library, targets, config, SimulatedMachine(library))
        working = library.subset(program.block_ids())
        measured = trace.rounds[-1].measured
        system = assemble_incremental_system(
            working, targets, measured, measured.counts["instructions"] * 0.2
        )
        scale = np.abs(system.rhs[-1])
        assert np.all(np.abs(system.rhs[:-1]) <= 1e-3 * scale)


class TestNoisyLoop:
    def test_ten_round_run_stays_accurate(self, library, rng):
        _, targets, _ = hidden_targets(library, rng)
        config = AlignConfig(rounds=10, ins1=5e6)
        machine = SimulatedMachine(library, NoiseModel.uniform(0.03, seed=7))
        _, trace = align(library, targets, config, machine)
        assert len(trace.rounds) == 10
        final = trace.rounds[-1].accuracy
        assert min(final.values()) >= 0.92

    def test_counts_never_decrease(self, library, rng):
        _, targets, _ = hidden_targets(library, rng)
        config = AlignConfig(rounds=8, ins1=5e6)
        machine = SimulatedMachine(library, NoiseModel.uniform(0.03, seed=11))
        _, trace = align(library, targets, config, machine)
        for before, after in zip(trace.rounds, trace.rounds[1:]):
            first = dict(before.program.entries)
            second = dict(after.program.entries)
            assert set(first) == set(second)
            assert all(second[b] >= first[b] for b in first)


class TestTrace:
    def test_trace_fields_are_complete(self, library, rng):
        _, targets, _ = hidden_targets(library, rng)
        config = AlignConfig(rounds=3, ins1=5e6)
        machine = SimulatedMachine(library, NoiseModel.uniform(0.02, seed=3))
        _, trace = align(library, targets, config, machine)
        assert [r.round for r in trace.rounds] == [1, 2, 3]
        for record in trace.rounds:
            assert record.program.runnable
            assert record.measured.counts
            assert set(record.metrics) == set(targets.targets)
            assert set(record.accuracy) == set(targets.targets)
            assert record.residual_norm >= 0.0
            for metric_id, value in record.accuracy.items():
                assert value == accuracy(targets.targets[metric_id], record.metrics[metric_id])
                assert value <= 1.0

    def test_trace_round_trip_is_byte_identical(self, library, rng):
        _, targets, _ = hidden_targets(library, rng)
        config = AlignConfig(rounds=2, ins1=5e6)
        machine = SimulatedMachine(library, NoiseModel.uniform(0.02, seed=4))
        _, trace = align(library, targets, config, machine)
        text = dump_trace(trace)
        assert dump_trace(load_trace(text)) == text

    def test_early_stop_flag(self, library, rng):
        _, targets, ins1 = hidden_targets(library, rng)
        config = AlignConfig(rounds=10, ins1=ins1, stop_threshold=0.999)
        _, trace = align(library, targets, config, SimulatedMachine(library))
        assert len(trace.rounds) == 1  # noiseless round 1 already qualifies


class TestErrors:
    def test_measurer_failure_carries_round_index(self, library, rng):
        class DroppingMeasurer:
            events = EVENTS

            def __init__(self, inner):
                self.inner = inner

            def measure(self, program, nonce=0):
                full = self.inner.measure(program, nonce)
                counts = {e: v for e, v in full.counts.items() if e != "vec_insts"}
                return MeasurementResult(counts, "simulated")

        _, targets, ins1 = hidden_targets(library, rng)
        config = AlignConfig(rounds=3, ins1=ins1)
        with pytest.raises(AlignmentError, match="round 1") as err:
            align(library, targets, config, DroppingMeasurer(SimulatedMachine(library)))
        assert err.value.round_index == 1

    def test_empty_targets_library_mismatch(self, rng, library):
        # a target event absent from every profile surfaces as an alignment
        # error naming the round
        sub = library.subset(["mix_add16"])
        stripped = {
            bid: spec.with_profile(
                type(spec.profile)(
                    {e: c for e, c in spec.profile.counts.items() if e != "cycles"},
                    spec.profile.n0,
                )
            )
            for bid, spec in sub.blocks.items()
        }
        import proxybench.blocks as blocks_mod

        library2 = blocks_mod.BlockLibrary(stripped, sub.n0)
        with pytest.raises(AlignmentError, match="round 1"):
            align(library2, TargetMetrics({"cpi": 1.0}), AlignConfig(rounds=1, ins1=100.0),
                  SimulatedMachine(library2))


class TestInstructionTotal:
    def test_empty_program(self, library):
        assert instruction_total(ProxyProgram(), library) == 0.0

    def test_identity_scaling(self, library):
        block_id = library.ids()[0]
        per_n0 = library.blocks[block_id].profile.counts["instructions"]
        total = instruction_total(ProxyProgram(((block_id, library.n0),)), library)
        assert total == per_n0

    def test_round_one_total_matches_budget(self, library, rng):
        _, targets, _ = hidden_targets(library, rng)
        config = AlignConfig(rounds=1, ins1=5e6)
        program, _ = align(library, targets, config, SimulatedMachine(library))
        assert instruction_total(program, library) == pytest.approx(5e6, rel=0.01)
