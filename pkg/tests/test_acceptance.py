"""Acceptance suite: one test per release criterion, each printing a
``criterion N PASS/FAIL`` line (run with ``pytest -s`` to see them live)."""

import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.optimize import nnls as scipy_nnls

import proxybench as pb
from proxybench.align import dump_trace, load_trace
from proxybench.blocks import (
    dump_library,
    load_library,
    make_arith_block,
    make_branch_block,
    make_function_block,
    make_memory_block,
    calibrate_synthetic,
    library_from_specs,
)
from proxybench.events import dump_targets, load_targets
from proxybench.measure import format_counts, parse_counts
from proxybench.report import dump_report, load_report
from proxybench.solver import LinearSystem, nnls
from tests.conftest import hidden_targets


@contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"criterion {number} FAIL: {description}")
        raise
    print(f"criterion {number} PASS: {description}")


def _ulp_equal(lhs, rhs):
    return abs(lhs - rhs) <= np.spacing(max(abs(lhs), abs(rhs)))


@pytest.fixture(scope="module")
def noiseless_runs(library):
    """50 hidden-program trials, noiseless, single round."""
    rng = np.random.default_rng(31001)
    start = time.perf_counter()
    runs = []
    for _ in range(50):
        _, targets, ins1 = hidden_targets(library, rng)
        config = pb.AlignConfig(rounds=1, ins1=ins1)
        program, trace = pb.align(library, targets, config, pb.SimulatedMachine(library))
        runs.append((targets, ins1, program, trace))
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def noisy_runs(library):
    """20 seeded trials: 3% uniform noise, 14 metrics, 10 rounds, 20% growth,
    test-scale budget of 5e6 instructions."""
    rng = np.random.default_rng(31002)
    start = time.perf_counter()
    runs = []
    for seed in range(20):
        _, targets, _ = hidden_targets(library, rng)
        config = pb.AlignConfig(rounds=10, growth=0.2, ins1=5e6)
        machine = pb.SimulatedMachine(library, pb.NoiseModel.uniform(0.03, seed=seed))
        program, trace = pb.align(library, targets, config, machine)
        runs.append((targets, program, trace))
    return runs, time.perf_counter() - start


def test_criterion_1_linearity(library):
    with criterion(1, "event prediction is additive and homogeneous to 1 ulp"):
        start = time.perf_counter()
        rng = np.random.default_rng(11001)
        ids = library.ids()
        for _ in range(200):
            n1 = rng.integers(0, 32768, size=len(ids))
            n2 = rng.integers(0, 32768, size=len(ids))
            p1 = pb.ProxyProgram(tuple(zip(ids, (int(v) for v in n1))))
            p2 = pb.ProxyProgram(tuple(zip(ids, (int(v) for v in n2))))
            combined = pb.predict_events(p1 + p2, library).counts
            r1 = pb.predict_events(p1, library).counts
            r2 = pb.predict_events(p2, library).counts
            for event, value in combined.items():
                assert _ulp_equal(value, r1[event] + r2[event]), event
            k = int(rng.integers(0, 5))
            scaled = pb.predict_events(p1.scaled(k), library).counts
            for event, value in scaled.items():
                assert _ulp_equal(value, k * r1[event]), event

        # execution counts that are multiples of the calibration base give
        # integer contributions: both sides must then agree bitwise
        for _ in range(20):
            blocks = rng.choice(ids, size=4, replace=False)
            k1 = rng.integers(1, 5, size=4)
            k2 = rng.integers(1, 5, size=4)
            p1 = pb.ProxyProgram(tuple(
                (str(b), int(k) * library.n0) for b, k in zip(blocks, k1)
            ))
            p2 = pb.ProxyProgram(tuple(
                (str(b), int(k) * library.n0) for b, k in zip(blocks, k2)
            ))
            combined = pb.predict_events(p1 + p2, library).counts
            r1 = pb.predict_events(p1, library).counts
            r2 = pb.predict_events(p2, library).counts
            for event, value in combined.items():
                assert value == r1[event] + r2[event], event
            for k in (2, 3):
                scaled = pb.predict_events(p1.scaled(k), library).counts
                for event, value in scaled.items():
                    assert value == k * r1[event], event
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"linearity suite took {elapsed:.1f}s"


def test_criterion_2_nnls_correctness():
    with criterion(2, "NNLS recovers unique generators and satisfies KKT at 1e-8"):
        start = time.perf_counter()
        rng = np.random.default_rng(12001)

        for _ in range(500):
            rows = int(rng.integers(1, 21))
            cols = int(rng.integers(1, rows + 1))
            a = rng.standard_normal((rows, cols))
            x_star = np.where(rng.random(cols) < 0.4, 0.0, rng.random(cols) * 5.0)
            system = LinearSystem(
                a, a @ x_star,
                tuple(f"r{i}" for i in range(rows)),
                tuple(f"c{j}" for j in range(cols)),
                np.ones(rows),
            )
            solution = nnls(system, tol=1e-10)
            scale = max(1.0, float(np.max(np.abs(x_star))))
            assert np.max(np.abs(solution.x - x_star)) <= 1e-6 * scale

        tol = 1e-8
        checked = 0
        while checked < 500:
            rows = int(rng.integers(2, 21))
            cols = int(rng.integers(1, 31))
            a = rng.standard_normal((rows, cols))
            b = rng.standard_normal(rows)
            unconstrained, *_ = np.linalg.lstsq(a, b, rcond=None)
            if np.min(unconstrained) >= 0:
                continue  # constraint would not bind
            checked += 1
            system = LinearSystem(
                a, b,
                tuple(f"r{i}" for i in range(rows)),
                tuple(f"c{j}" for j in range(cols)),
                np.ones(rows),
            )
            solution = nnls(system, tol=tol)
            assert solution.certified
            assert np.all(solution.x >= 0.0)
            # KKT certificate, recomputed with independent arithmetic
            gradient = a.T @ (a @ solution.x - b)
            scale = max(1.0, float(np.max(np.abs(a.T @ b))))
            support = solution.x > 0
            assert np.all(np.abs(gradient[support]) <= tol * scale)
            assert np.all(-gradient[~support] <= tol * scale)
            # any feasible point upper-bounds the optimal residual
            x_ref, _ = scipy_nnls(a, b)
            reference = float(np.linalg.norm(a @ np.maximum(x_ref, 0.0) - b))
            assert solution.residual_norm <= reference + 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"nnls suite took {elapsed:.1f}s"


def test_criterion_3_noiseless_closed_loop(noiseless_runs):
    with criterion(3, "noiseless loop reaches every feasible target in round 1"):
        runs, elapsed = noiseless_runs
        assert len(runs) == 50
        for _, _, _, trace in runs:
            accuracies = trace.rounds[0].accuracy
            assert len(accuracies) == 14
            assert min(accuracies.values()) >= 0.999
        assert elapsed < 20.0, f"noiseless trials took {elapsed:.1f}s"


def test_criterion_4_noisy_closed_loop(noisy_runs):
    with criterion(4, "3% noise, 10 rounds: mean metric accuracy >= 0.92 in >= 90% of trials"):
        runs, elapsed = noisy_runs
        assert len(runs) == 20
        passing = 0
        for targets, _, trace in runs:
            final = trace.rounds[-1].accuracy
            assert len(final) == 14
            if sum(final.values()) / len(final) >= 0.92:
                passing += 1
        assert passing >= 18, f"only {passing}/20 trials reached 0.92 mean accuracy"
        assert elapsed < 60.0, f"noisy trials took {elapsed:.1f}s"


def test_criterion_5_budget_schedule(library, noisy_runs):
    with criterion(5, "instruction totals grow 20%/round within noise; round 1 on budget"):
        runs, _ = noisy_runs
        # measured totals carry one +-3% factor per round; the requested
        # increment is 20% of the previous measurement, so the ratio of
        # consecutive measurements lies in 1.2 * [0.97/1.03, 1.03/0.97],
        # padded 2% for solver and integer-rounding slack
        low = 1.2 * (0.97 / 1.03) * 0.98
        high = 1.2 * (1.03 / 0.97) * 1.02
        for _, _, trace in runs:
            totals = [r.measured.counts["instructions"] for r in trace.rounds]
            for before, after in zip(totals, totals[1:]):
                assert low <= after / before <= high
            round_one = pb.instruction_total(trace.rounds[0].program, library)
            assert abs(round_one - 5e6) <= 0.01 * 5e6


def test_criterion_6_monotone_counts(noiseless_runs, noisy_runs):
    with criterion(6, "execution counts never decrease across rounds"):
        traces = [run[-1] for run in noiseless_runs[0]]
        traces += [run[-1] for run in noisy_runs[0]]
        for trace in traces:
            for before, after in zip(trace.rounds, trace.rounds[1:]):
                first = dict(before.program.entries)
                second = dict(after.program.entries)
                assert set(first) == set(second)
                assert all(second[b] >= first[b] for b in first)


def test_criterion_7_evaluation_arithmetic():
    with criterion(7, "accuracy, correlation, and error fixtures are exact"):
        assert pb.accuracy(0.02, 0.019) == 0.95
        x = (0.5, 1.25, 2.0, 3.5)
        assert pb.pearson(pb.ComparisonSeries(x, x)) == 1.0
        assert pb.mean_abs_rel_error(pb.ComparisonSeries(x, x)) == 0.0
        assert abs(pb.mean_abs_rel_error(pb.ComparisonSeries((1.0, 2.0), (1.1, 1.8))) - 0.1) \
            <= 1e-12
        assert abs(pb.mean_abs_rel_error(pb.ComparisonSeries((4.0,), (5.0,))) - 0.25) \
            <= 1e-12
        per_metric = {
            "l1d_miss_rate": 0.942, "l1i_miss_rate": 0.859,
            "l2_miss_rate": 0.917, "l3_miss_rate": 0.905,
        }
        defs = [pb.METRICS_BY_ID[m] for m in per_metric]
        floors = pb.category_accuracy(per_metric, defs)
        assert floors == {"cache_behavior": 0.859}


def test_criterion_8_format_round_trips(library):
    with criterion(8, "all five document formats round-trip byte-identically"):
        rng = np.random.default_rng(18001)
        count = 0

        def check(dump, load, value):
            nonlocal count
            text = dump(value)
            assert dump(load(text)) == text
            count += 1

        for _ in range(20):
            specs = []
            for i in range(int(rng.integers(1, 6))):
                family = int(rng.integers(0, 4))
                if family == 0:
                    stride = int(rng.integers(1, 4097))
                    spec = make_memory_block(stride, stride * int(rng.integers(1, 1000)),
                                             f"m{i}")
                elif family == 1:
                    spec = make_function_block(int(rng.integers(1, 8192)),
                                               int(rng.integers(2, 2048)), f"f{i}")
                elif family == 2:
                    spec = make_branch_block(int(rng.integers(0, 1025)), f"b{i}")
                else:
                    ops = ("add", "sub", "mul", "div")
                    mix = tuple(
                        (ops[int(rng.integers(0, 4))], int(rng.integers(1, 32)))
                        for _ in range(int(rng.integers(1, 4)))
                    )
                    spec = make_arith_block(mix, fp=bool(rng.integers(0, 2)), block_id=f"a{i}")
                if rng.random() < 0.8:
                    spec = calibrate_synthetic(spec)
                specs.append(spec)
            check(dump_library, load_library, library_from_specs(specs))

        metric_ids = [d.id for d in pb.METRICS]
        for _ in range(20):
            chosen = rng.choice(metric_ids, size=int(rng.integers(1, 15)), replace=False)
            values = {
                str(m): (float(rng.uniform(0.1, 9.0)) if m == "cpi"
                         else float(rng.uniform(1e-6, 1.0)))
                for m in chosen
            }
            check(dump_targets, load_targets, pb.TargetMetrics(values))

        for _ in range(20):
            events = rng.choice(pb.EVENTS, size=int(rng.integers(1, 22)), replace=False)
            counts = {str(e): float(rng.uniform(0, 1e9)) for e in events}
            for miss, access in (("l1d_misses", "l1d_accesses"),
                                 ("l1i_misses", "l1i_accesses"),
                                 ("l2_misses", "l2_accesses"),
                                 ("l3_misses", "l3_accesses"),
                                 ("dtlb_misses", "dtlb_accesses"),
                                 ("itlb_misses", "itlb_accesses"),
                                 ("branch_misses", "branch_insts")):
                if miss in counts and access in counts and counts[miss] > counts[access]:
                    counts[miss], counts[access] = counts[access], counts[miss]
            check(format_counts, parse_counts, pb.MeasurementResult(counts, "imported"))

        trial_rng = np.random.default_rng(18002)
        for seed in range(20):
            _, targets, _ = hidden_targets(library, trial_rng)
            config = pb.AlignConfig(rounds=2, ins1=2e5)
            machine = pb.SimulatedMachine(library, pb.NoiseModel.uniform(0.02, seed=seed))
            _, trace = pb.align(library, targets, config, machine)
            check(dump_trace, load_trace, trace)
            report = pb.build_report(targets, trace, metadata={"seed": seed})
            check(dump_report, load_report, report)

        assert count == 100


def test_criterion_9_rendering(library, tmp_path):
    with criterion(9, "rendering is structural and deterministic; source compiles"):
        ids = library.ids()[:10]
        bounds = [7001 + 13 * i for i in range(10)]
        program = pb.ProxyProgram(tuple(zip(ids, bounds)))
        text = pb.render_program(program, library)
        assert text.count("for (uint64_t it = 0u;") == 10
        for bound in bounds:
            assert f"it < {bound}u;" in text
        assert pb.render_program(program, library) == text

        import shutil
        import subprocess

        if shutil.which("cc") is not None:
            source = tmp_path / "proxy.c"
            source.write_text(text)
            subprocess.run(
                ["cc", "-O0", "-o", str(tmp_path / "proxy"), str(source)],
                check=True, capture_output=True,
            )
