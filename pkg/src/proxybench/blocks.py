"""Parameterized basic blocks, source rendering, and the default library.

Each block is an interior instruction sequence wrapped in an exterior counted
loop; the loop bound is the block's execution count.  Four families cover the
main micro-architectural levers:

* ``memory_access`` -- walk a buffer at a fixed byte stride (load+store per
  iteration).  Larger strides reduce spatial locality and raise data-side
  cache and DTLB miss rates.
* ``function_access`` -- call one of ``count`` sequentially laid out
  functions, advancing the call target by a fixed byte stride.  Larger
  strides spread the instruction footprint and raise L1I/ITLB miss rates.
* ``branch_predict`` -- draw a pseudo-random value R in [0, 1024) from an
  in-source linear-congruential recurrence (fixed seed, so runs are
  reproducible) and branch iff R > threshold.  Thresholds near 512 make the
  branch hardest to predict.
* ``arithmetic`` -- a loop-carried dependence chain of add/sub/mul/div, so
  slow-operation mixes raise CPI.  Optional floating-point variants also
  model partially vectorized math (not part of the integer families).

Synthetic calibration model
---------------------------

``synthetic_profile`` attaches a deterministic, analytic event profile so the
solver and alignment loop are testable without hardware counters; real
calibration data can replace it through the measurement import path.  All
rates are per interior iteration, counts are ``round(rate * n0)``:

* loop overhead (every family): 5 instructions, 1 load + 1 store (counter
  traffic), 2 integer ops, 1 branch.
* memory_access: a buffer access touches a new cache line with probability
  ``min(stride, 64)/64`` and a new page with probability
  ``min(stride, 4096)/4096``; a new-line (new-page) touch misses L1D (DTLB)
  with the capacity factor ``min(0.9, max(0, 1 - capacity/buffer))`` where
  capacity is 32 KiB for L1D and 256 KiB of DTLB reach.
* function_access: instruction footprint is ``stride * count`` bytes; calls
  touch 2 instruction lines, missing L1I/ITLB with the same capacity-factor
  shape.
* branch_predict: the block's branch misprediction rate is
  ``min(t, 1024 - t) / 1024`` (0.5 at t=512, 0 at the deterministic ends).
* arithmetic: cycles = instructions + sum(reps * (latency - 1)); integer
  latencies add/sub 1, mul 3, div 20; float latencies 3/3/5/25.
* L2 receives both caches' L1 misses and re-misses with probability
  ``min(0.9, stride/128)`` (0.5 for strideless families); L3 likewise with
  ``min(0.9, stride/256)``.
* cycles = instructions + 12*(L1 misses) + 30*(L2 misses) + 150*(L3 misses)
  + 30*(TLB misses) + 15*(branch misses) + arithmetic latency.
* small baseline rates keep every miss event nonzero (cold-start effects):
  1e-4 for L1 misses, 1e-5 for TLB misses, 1e-3 for branch misses.

All miss probabilities are capped at 0.9 so a noisy measurement cannot push
a miss count past its access count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import DocumentFormatError, InvalidParameterError, UnresolvedBlockError
from .events import N0_DEFAULT, EventProfile, ProxyProgram
from .jsonutil import dumps_canonical, loads_document

FAMILIES = ("memory_access", "function_access", "branch_predict", "arithmetic")

ARITH_OPS = ("add", "sub", "mul", "div")

CACHE_LINE = 64
PAGE = 4096
L1_CAPACITY = 32 * 1024
TLB_REACH = 64 * PAGE
RATE_CAP = 0.9
FUNC_SPACING = 64  # emitted functions are 64-byte aligned

_BASE_L1_MISS = 1e-4
_BASE_TLB_MISS = 1e-5
_BASE_BRANCH_MISS = 1e-3

_INT_LATENCY = {"add": 1.0, "sub": 1.0, "mul": 3.0, "div": 20.0}
_FP_LATENCY = {"add": 3.0, "sub": 3.0, "mul": 5.0, "div": 25.0}
# share of each fp op stream modeled as packed-SIMD issue
_FP_VEC_SHARE = {"add": 0.25, "sub": 0.25, "mul": 0.5, "div": 0.5}

_LCG_MUL = 6364136223846793005
_LCG_ADD = 1442695040888963407
_LCG_SEED = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class BlockSpec:
    """One parameterized basic block, optionally calibrated."""

    id: str
    family: str
    params: dict
    profile: EventProfile | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown block family {self.family!r}")
        _validate_params(self.family, self.params)

    def with_profile(self, profile: EventProfile) -> "BlockSpec":
        return BlockSpec(self.id, self.family, dict(self.params), profile)

    def describe(self) -> str:
        params = " ".join(f"{k}={_param_str(v)}" for k, v in sorted(self.params.items()))
        return f"{self.id} {self.family} {params}"


def _param_str(value) -> str:
    if isinstance(value, tuple):
        return ",".join(f"{op}x{reps}" for op, reps in value)
    return str(value)


def _validate_params(family: str, params: dict) -> None:
    def need(keys):
        if set(params) != set(keys):
            raise InvalidParameterError(
                f"{family} params must be exactly {sorted(keys)}, got {sorted(params)}"
            )

    if family == "memory_access":
        need(("stride", "buffer"))
        stride, buffer = params["stride"], params["buffer"]
        if not 1 <= stride <= 2**20:
            raise InvalidParameterError(f"memory stride must be in [1, 2^20], got {stride}")
        if buffer < stride:
            raise InvalidParameterError(f"buffer ({buffer}) must be >= stride ({stride})")
    elif family == "function_access":
        need(("stride", "count"))
        stride, count = params["stride"], params["count"]
        if stride < 1:
            raise InvalidParameterError(f"function stride must be >= 1, got {stride}")
        if not 2 <= count <= 65536:
            raise InvalidParameterError(f"function count must be in [2, 65536], got {count}")
    elif family == "branch_predict":
        need(("threshold",))
        threshold = params["threshold"]
        if not 0 <= threshold <= 1024:
            raise InvalidParameterError(f"threshold must be in [0, 1024], got {threshold}")
    elif family == "arithmetic":
        need(("mix", "fp"))
        mix = params["mix"]
        if not mix:
            raise InvalidParameterError("arithmetic mix must be nonempty")
        for op, reps in mix:
            if op not in ARITH_OPS:
                raise InvalidParameterError(f"unknown arithmetic op {op!r}")
            if reps < 1:
                raise InvalidParameterError(f"repetitions must be >= 1, got {reps} for {op}")


def make_memory_block(stride: int, buffer: int, block_id: str | None = None) -> BlockSpec:
    """Buffer walk at a fixed byte stride, wrapping at the buffer end."""
    block_id = block_id or f"mem_s{stride}_b{buffer}"
    return BlockSpec(block_id, "memory_access", {"stride": int(stride), "buffer": int(buffer)})


def make_function_block(stride: int, count: int, block_id: str | None = None) -> BlockSpec:
    """Calls across ``count`` sequential functions at a fixed byte stride."""
    block_id = block_id or f"fn_s{stride}_c{count}"
    return BlockSpec(block_id, "function_access", {"stride": int(stride), "count": int(count)})


def make_branch_block(threshold: int, block_id: str | None = None) -> BlockSpec:
    """Data-dependent branch taken iff a pseudo-random R > threshold."""
    block_id = block_id or f"br_t{threshold}"
    return BlockSpec(block_id, "branch_predict", {"threshold": int(threshold)})


def make_arith_block(mix, fp: bool = False, block_id: str | None = None) -> BlockSpec:
    """Dependence-chained arithmetic with the given (op, repetitions) mix."""
    mix = tuple((str(op), int(reps)) for op, reps in mix)
    if block_id is None:
        tag = "_".join(f"{op}{reps}" for op, reps in mix)
        block_id = f"{'fpmix' if fp else 'mix'}_{tag}"
    return BlockSpec(block_id, "arithmetic", {"mix": mix, "fp": bool(fp)})


# ---------------------------------------------------------------------------
# synthetic calibration


def _capacity_factor(capacity: float, footprint: float) -> float:
    if footprint <= 0:
        return 0.0
    return min(RATE_CAP, max(0.0, 1.0 - capacity / footprint))


def _line_fraction(stride: int) -> float:
    return min(stride, CACHE_LINE) / CACHE_LINE


def _page_fraction(stride: int) -> float:
    return min(stride, PAGE) / PAGE


def _iteration_rates(spec: BlockSpec) -> dict[str, float]:
    """Per-iteration event rates of the documented analytic model."""
    r = {name: 0.0 for name in (
        "instructions", "load_insts", "store_insts", "int_insts", "fp_insts",
        "vec_insts", "branch_insts", "branch_misses", "l1d_accesses",
        "l1d_misses", "l1i_misses", "dtlb_misses", "itlb_misses",
    )}
    # exterior loop overhead shared by all families
    r["instructions"] = 5.0
    r["load_insts"] = 1.0
    r["store_insts"] = 1.0
    r["int_insts"] = 2.0
    r["branch_insts"] = 1.0
    r["l1d_accesses"] = 2.0

    extra_cycles = 0.0
    l2_p = 0.5
    l3_p = 0.5

    if spec.family == "memory_access":
        stride, buffer = spec.params["stride"], spec.params["buffer"]
        r["instructions"] += 7.0
        r["load_insts"] += 1.0
        r["store_insts"] += 1.0
        r["int_insts"] += 3.0
        r["branch_insts"] += 1.0
        r["l1d_accesses"] += 2.0
        r["l1d_misses"] = _line_fraction(stride) * _capacity_factor(L1_CAPACITY, buffer)
        r["dtlb_misses"] = _page_fraction(stride) * _capacity_factor(TLB_REACH, buffer)
        l2_p = min(RATE_CAP, stride / 128)
        l3_p = min(RATE_CAP, stride / 256)
    elif spec.family == "function_access":
        stride, count = spec.params["stride"], spec.params["count"]
        footprint = stride * count
        r["instructions"] += 11.0
        r["load_insts"] += 2.0
        r["store_insts"] += 1.0
        r["int_insts"] += 5.0
        r["branch_insts"] += 2.0
        r["l1d_accesses"] += 3.0
        r["l1i_misses"] = 2.0 * _line_fraction(stride) * _capacity_factor(L1_CAPACITY, footprint)
        r["itlb_misses"] = _page_fraction(stride) * _capacity_factor(TLB_REACH, footprint)
        r["branch_misses"] = 0.01  # indirect-call target mispredicts
        l2_p = min(RATE_CAP, stride / 128)
        l3_p = min(RATE_CAP, stride / 256)
    elif spec.family == "branch_predict":
        threshold = spec.params["threshold"]
        r["instructions"] += 6.0
        r["int_insts"] += 4.0
        r["branch_insts"] += 1.0
        # block-level misprediction rate: peaks at 0.5 when threshold is 512
        p = min(threshold, 1024 - threshold) / 1024
        r["branch_misses"] = r["branch_insts"] * p
    elif spec.family == "arithmetic":
        mix, fp = spec.params["mix"], spec.params["fp"]
        ops = float(sum(reps for _, reps in mix))
        latency = _FP_LATENCY if fp else _INT_LATENCY
        r["instructions"] += ops
        if fp:
            r["fp_insts"] = ops
            r["vec_insts"] = float(sum(reps * _FP_VEC_SHARE[op] for op, reps in mix))
        else:
            r["int_insts"] += ops
        extra_cycles = float(sum(reps * (latency[op] - 1.0) for op, reps in mix))

    # baseline cold-start misses keep every miss event nonzero
    if spec.family != "branch_predict":
        r["branch_misses"] += _BASE_BRANCH_MISS * r["branch_insts"]
    r["l1d_misses"] += _BASE_L1_MISS * r["l1d_accesses"]
    r["l1i_accesses"] = r["instructions"]
    r["l1i_misses"] += _BASE_L1_MISS * r["l1i_accesses"]
    r["dtlb_accesses"] = r["l1d_accesses"]
    r["dtlb_misses"] += _BASE_TLB_MISS * r["dtlb_accesses"]
    r["itlb_accesses"] = r["instructions"]
    r["itlb_misses"] += _BASE_TLB_MISS * r["itlb_accesses"]

    r["l2_accesses"] = r["l1d_misses"] + r["l1i_misses"]
    r["l2_misses"] = r["l2_accesses"] * l2_p
    r["l3_accesses"] = r["l2_misses"]
    r["l3_misses"] = r["l3_accesses"] * l3_p

    r["cycles"] = (
        r["instructions"]
        + 12.0 * (r["l1d_misses"] + r["l1i_misses"])
        + 30.0 * r["l2_misses"]
        + 150.0 * r["l3_misses"]
        + 30.0 * (r["dtlb_misses"] + r["itlb_misses"])
        + 15.0 * r["branch_misses"]
        + extra_cycles
    )
    return r


def synthetic_profile(spec: BlockSpec, n0: int = N0_DEFAULT) -> EventProfile:
    """Deterministic analytic profile for ``spec``, rounded to whole counts."""
    rates = _iteration_rates(spec)
    counts = {event: float(round(rate * n0)) for event, rate in rates.items()}
    return EventProfile(counts, n0)


def calibrate_synthetic(spec: BlockSpec, n0: int = N0_DEFAULT) -> BlockSpec:
    return spec.with_profile(synthetic_profile(spec, n0))


# ---------------------------------------------------------------------------
# library

MEMORY_STRIDES = (8, 16, 32, 64, 128, 256, 512, 1024, 4096)
MEMORY_BUFFER = 64 * 1024 * 1024
FUNCTION_STRIDES = (64, 256, 1024, 4096)
FUNCTION_COUNT = 512
BRANCH_THRESHOLDS = (0, 128, 256, 384, 448, 512)
ARITH_MIXES = (
    ("add16", (("add", 16),)),
    ("addmul8", (("add", 8), ("mul", 8))),
    ("mul16", (("mul", 16),)),
    ("div8", (("div", 8),)),
)


@dataclass(frozen=True)
class BlockLibrary:
    """An ordered set of blocks sharing one calibration base ``n0``."""

    blocks: dict[str, BlockSpec] = field(default_factory=dict)
    n0: int = N0_DEFAULT

    def __post_init__(self):
        if int(self.n0) <= 0:
            raise DocumentFormatError("library n0 must be positive")
        object.__setattr__(self, "n0", int(self.n0))
        for block_id, spec in self.blocks.items():
            if block_id != spec.id:
                raise DocumentFormatError(f"library key {block_id!r} != block id {spec.id!r}")
            if spec.profile is not None and spec.profile.n0 != self.n0:
                raise DocumentFormatError(
                    f"block {block_id}: profile n0 {spec.profile.n0} != library n0 {self.n0}"
                )

    def __len__(self) -> int:
        return len(self.blocks)

    def ids(self) -> tuple[str, ...]:
        return tuple(self.blocks)

    def require(self, block_id: str) -> BlockSpec:
        spec = self.blocks.get(block_id)
        if spec is None:
            raise UnresolvedBlockError(f"no block {block_id!r} in library")
        return spec

    def subset(self, ids) -> "BlockLibrary":
        keep = set(ids)
        return BlockLibrary(
            {block_id: spec for block_id, spec in self.blocks.items() if block_id in keep},
            self.n0,
        )

    def content_hash(self) -> str:
        return hashlib.sha256(dump_library(self).encode("utf-8")).hexdigest()[:12]


def library_from_specs(specs, n0: int = N0_DEFAULT) -> BlockLibrary:
    blocks: dict[str, BlockSpec] = {}
    for spec in specs:
        if spec.id in blocks:
            raise DocumentFormatError(f"duplicate block id {spec.id!r}")
        blocks[spec.id] = spec
    return BlockLibrary(blocks, n0)


def default_library(n0: int = N0_DEFAULT, fp_variants: bool = True) -> BlockLibrary:
    """The built-in parameter sweep with synthetic profiles attached.

    ``fp_variants`` adds floating-point copies of the arithmetic mixes; they
    are an extension beyond the four integer families (nothing else emits fp
    or vector instructions) and can be disabled.
    """
    specs = []
    for stride in MEMORY_STRIDES:
        specs.append(make_memory_block(stride, MEMORY_BUFFER, f"mem_stride{stride}"))
    for stride in FUNCTION_STRIDES:
        specs.append(make_function_block(stride, FUNCTION_COUNT, f"fn_stride{stride}"))
    for threshold in BRANCH_THRESHOLDS:
        specs.append(make_branch_block(threshold, f"br_t{threshold}"))
    for name, mix in ARITH_MIXES:
        specs.append(make_arith_block(mix, fp=False, block_id=f"mix_{name}"))
    if fp_variants:
        for name, mix in ARITH_MIXES:
            specs.append(make_arith_block(mix, fp=True, block_id=f"fpmix_{name}"))
    return library_from_specs([calibrate_synthetic(s, n0) for s in specs], n0)


# ---------------------------------------------------------------------------
# source rendering


def _c_ident(block_id: str) -> str:
    ident = "".join(c if c.isalnum() or c == "_" else "_" for c in block_id)
    if not ident or ident[0].isdigit():
        ident = "b_" + ident
    return ident


def _memory_parts(ident: str, params: dict):
    stride, buffer = params["stride"], params["buffer"]
    prelude = [f"static unsigned char buf_{ident}[{buffer}u];"]
    decls = [
        f"volatile unsigned char *buf = buf_{ident};",
        "uint64_t off = 0u;",
    ]
    body = [
        "buf[off] = (unsigned char)(buf[off] + 1u);",
        f"off += {stride}u;",
        f"if (off >= {buffer}u) off -= {buffer}u;",
    ]
    return prelude, decls, body, []


def _function_parts(ident: str, params: dict):
    stride, count = params["stride"], params["count"]
    step = max(1, stride // FUNC_SPACING)
    prelude = []
    for i in range(count):
        prelude.append(
            f"static __attribute__((noinline, aligned({FUNC_SPACING}))) "
            f"uint64_t fn_{ident}_{i:04d}(uint64_t x) {{ return x + {i + 1}u; }}"
        )
    names = [f"fn_{ident}_{i:04d}" for i in range(count)]
    prelude.append(f"static uint64_t (*const tab_{ident}[{count}])(uint64_t) = {{")
    for start in range(0, count, 8):
        prelude.append("    " + ", ".join(names[start:start + 8]) + ",")
    prelude.append("};")
    decls = [
        "uint64_t idx = 0u;",
        "uint64_t acc = sink;",
    ]
    body = [
        f"acc = tab_{ident}[idx](acc);",
        f"idx = (idx + {step}u) % {count}u;",
    ]
    return prelude, decls, body, ["sink += acc;"]


def _branch_parts(ident: str, params: dict):
    threshold = params["threshold"]
    decls = [
        f"uint64_t state = {_LCG_SEED}u;",
        "uint64_t acc = 0u;",
    ]
    body = [
        f"state = state * {_LCG_MUL}u + {_LCG_ADD}u;",
        "uint64_t r = (state >> 33) & 1023u;",
        f"if (r > {threshold}u) {{",
        "    acc += r;",
        "}",
    ]
    return [], decls, body, ["sink += acc;"]


def _arith_parts(ident: str, params: dict):
    mix, fp = params["mix"], params["fp"]
    if fp:
        decls = [
            "double a = 1.0;",
            "double b = (double)((sink & 1u) | 1u);",
        ]
        tail = ["sink += (uint64_t)a;"]
    else:
        decls = [
            "uint64_t a = 1u;",
            "uint64_t b = (sink & 1u) | 1u;",
        ]
        tail = ["sink += a;"]
    symbol = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
    body = []
    for op, reps in mix:
        body.extend([f"a = a {symbol[op]} b;"] * reps)
    return [], decls, body, tail


_FAMILY_PARTS = {
    "memory_access": _memory_parts,
    "function_access": _function_parts,
    "branch_predict": _branch_parts,
    "arithmetic": _arith_parts,
}


def block_prelude(spec: BlockSpec) -> list[str]:
    prelude, _, _, _ = _FAMILY_PARTS[spec.family](_c_ident(spec.id), spec.params)
    return prelude


def block_fragment(spec: BlockSpec, iterations: int, indent: str = "") -> list[str]:
    """The exterior counted loop wrapping the family interior."""
    if int(iterations) < 0:
        raise InvalidParameterError(f"iterations must be >= 0, got {iterations}")
    _, decls, body, tail = _FAMILY_PARTS[spec.family](_c_ident(spec.id), spec.params)
    lines = [f"{indent}/* block {spec.id}: {spec.family} */", f"{indent}{{"]
    lines += [f"{indent}    {d}" for d in decls]
    lines.append(f"{indent}    for (uint64_t it = 0u; it < {int(iterations)}u; ++it) {{")
    lines += [f"{indent}        {b}" for b in body]
    lines.append(f"{indent}    }}")
    lines += [f"{indent}    {t}" for t in tail]
    lines.append(f"{indent}}}")
    return lines


def render_block(spec: BlockSpec, iterations: int) -> str:
    """Standalone source text for one block (declarations plus its loop)."""
    lines = ["#include <stdint.h>", "", "static volatile uint64_t sink;", ""]
    prelude = block_prelude(spec)
    if prelude:
        lines += prelude + [""]
    lines.append(f"void run_{_c_ident(spec.id)}(void)")
    lines.append("{")
    lines += block_fragment(spec, iterations, indent="    ")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_program(program: ProxyProgram, library: BlockLibrary) -> str:
    """One compilable translation unit running ``program`` end to end."""
    for block_id, _ in program.entries:
        library.require(block_id)

    lines = [
        "/* generated proxy benchmark */",
        "/* compile: cc -O0 -o proxy this_file.c */",
        "#include <stdint.h>",
        "#include <stdio.h>",
        "#include <time.h>",
        "",
        "static volatile uint64_t sink;",
        "",
    ]
    emitted: set[str] = set()
    for block_id, _ in program.entries:
        if block_id in emitted:
            continue
        emitted.add(block_id)
        prelude = block_prelude(library.blocks[block_id])
        if prelude:
            lines += prelude + [""]
    lines += [
        "int main(void)",
        "{",
        "    struct timespec ts0, ts1;",
        "    clock_gettime(CLOCK_MONOTONIC, &ts0);",
    ]
    for block_id, executions in program.entries:
        lines += block_fragment(library.blocks[block_id], executions, indent="    ")
    lines += [
        "    clock_gettime(CLOCK_MONOTONIC, &ts1);",
        "    double elapsed = (double)(ts1.tv_sec - ts0.tv_sec)",
        "        + 1e-9 * (double)(ts1.tv_nsec - ts0.tv_nsec);",
        '    printf("elapsed_seconds=%.6f sink=%llu\\n", elapsed,',
        "           (unsigned long long)sink);",
        "    return 0;",
        "}",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# library documents


def _params_to_doc(family: str, params: dict) -> dict:
    if family == "arithmetic":
        return {"mix": [[op, reps] for op, reps in params["mix"]], "fp": params["fp"]}
    return dict(params)


def block_to_doc(spec: BlockSpec) -> dict:
    doc = {
        "id": spec.id,
        "family": spec.family,
        "params": _params_to_doc(spec.family, spec.params),
    }
    if spec.profile is not None:
        doc["profile"] = {"n0": spec.profile.n0, "counts": dict(spec.profile.counts)}
    return doc


def block_from_doc(doc: dict) -> BlockSpec:
    from .events import profile_from_doc, _require_keys  # late import, avoids cycle

    _require_keys(doc, {"id", "family", "params", "profile"}, {"id", "family", "params"}, "block")
    family = doc["family"]
    params = doc["params"]
    try:
        if family == "memory_access":
            _require_keys(params, {"stride", "buffer"}, {"stride", "buffer"}, "params")
            spec = make_memory_block(params["stride"], params["buffer"], doc["id"])
        elif family == "function_access":
            _require_keys(params, {"stride", "count"}, {"stride", "count"}, "params")
            spec = make_function_block(params["stride"], params["count"], doc["id"])
        elif family == "branch_predict":
            _require_keys(params, {"threshold"}, {"threshold"}, "params")
            spec = make_branch_block(params["threshold"], doc["id"])
        elif family == "arithmetic":
            _require_keys(params, {"mix", "fp"}, {"mix", "fp"}, "params")
            spec = make_arith_block(params["mix"], params["fp"], doc["id"])
        else:
            raise DocumentFormatError(f"unknown block family {family!r}")
        if "profile" in doc:
            spec = spec.with_profile(profile_from_doc(doc["profile"]))
    except (DocumentFormatError, InvalidParameterError) as exc:
        raise type(exc)(f"block {doc.get('id', '?')}: {exc}") from None
    return spec


def library_to_doc(library: BlockLibrary) -> dict:
    return {
        "n0": library.n0,
        "blocks": [block_to_doc(spec) for spec in library.blocks.values()],
    }


def library_from_doc(doc: dict) -> BlockLibrary:
    from .events import _require_keys

    _require_keys(doc, {"n0", "blocks"}, {"n0", "blocks"}, "library")
    if not isinstance(doc["blocks"], list):
        raise DocumentFormatError("library: 'blocks' must be a list")
    return library_from_specs([block_from_doc(b) for b in doc["blocks"]], doc["n0"])


def dump_library(library: BlockLibrary) -> str:
    return dumps_canonical(library_to_doc(library))


def load_library(text: str) -> BlockLibrary:
    return library_from_doc(loads_document(text))
