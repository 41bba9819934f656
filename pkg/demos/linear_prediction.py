"""The linear count model: connect programs by adding, scale by multiplying.

A program's predicted count for every hardware event is the sum of its
blocks' calibrated counts scaled by executions/n0.  Ratio metrics follow
from the predicted counts.
"""

import proxybench as pb

library = pb.default_library()
n0 = library.n0

# ----------------------------------------------------------------------
# One block executed n0 times reproduces its calibration profile exactly.

single = pb.ProxyProgram((("mem_stride64", n0),))
predicted = pb.predict_events(single, library)
profile = library.blocks["mem_stride64"].profile
assert predicted.counts["cycles"] == profile.counts["cycles"]
print("single block at n0 executions reproduces its profile")

# ----------------------------------------------------------------------
# Doubling the executions doubles every event count.

doubled = pb.predict_events(single.scaled(2), library)
assert doubled.counts["cycles"] == 2 * predicted.counts["cycles"]
print("scaling by 2 doubles every event count")

# ----------------------------------------------------------------------
# Connecting two programs adds their counts event by event.

other = pb.ProxyProgram((("br_t512", 3 * n0),))
combined = pb.predict_events(single + other, library)
separate = pb.predict_events(single, library).counts["branch_insts"] + \
    pb.predict_events(other, library).counts["branch_insts"]
assert combined.counts["branch_insts"] == separate
print("connecting programs adds counts")

# ----------------------------------------------------------------------
# Metrics are quotients of predicted counts; a blend of a low-CPI and a
# high-CPI block lands in between.

mix = pb.ProxyProgram((("mix_add16", 5 * n0), ("mix_div8", n0)))
metrics = pb.compute_all_metrics(pb.predict_events(mix, library), pb.METRICS)
print("\nblended program metrics:")
for metric_id in ("cpi", "branch_miss_rate", "l1d_miss_rate", "int_ratio"):
    print(f"  {metric_id:<18} {metrics[metric_id]:.5f}")

low = pb.compute_metric(pb.predict_events(pb.ProxyProgram((("mix_add16", n0),)), library),
                        pb.METRICS_BY_ID["cpi"])
high = pb.compute_metric(pb.predict_events(pb.ProxyProgram((("mix_div8", n0),)), library),
                         pb.METRICS_BY_ID["cpi"])
print(f"  cpi bounds: add-only {low:.3f} <= blend {metrics['cpi']:.3f} <= div-only {high:.3f}")
