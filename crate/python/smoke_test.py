#!/usr/bin/env python3
"""Smoke test for the bellfrag_py extension module.

Builds are not driven from here; compile the extension first with
    cargo build -p bellfrag-py
then run
    python3 python/smoke_test.py
The script locates the compiled cdylib under target/, stages it under the
importable name bellfrag_py.so, and exercises the bound surface.
"""

import math
import shutil
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> Path:
    candidates = [
        REPO / "target" / profile / f"libbellfrag_py{ext}"
        for profile in ("debug", "release")
        for ext in (".so", ".dylib")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no compiled extension found; run `cargo build -p bellfrag-py` first")
    newest = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="bellfrag_py_"))
    shutil.copy2(newest, stage / "bellfrag_py.so")
    return stage


sys.path.insert(0, str(stage_module()))
import bellfrag_py as bf  # noqa: E402

checks = 0


def check(cond: bool, what: str) -> None:
    global checks
    if not cond:
        sys.exit(f"FAIL {what}")
    checks += 1
    print(f"ok   {what}")


# Bell polynomial values, by family name and by explicit weight list.
check(bf.bell(4, 2, "lah") == 36, "bell(4,2,lah) = 36")
check(bf.bell(4, 2, "trees") == 48, "bell(4,2,trees) = 48")
check(
    bf.bell(3, 2, [1, Fraction(1, 2), "1/6"]) == Fraction(3, 2),
    "bell accepts mixed int/Fraction/str weights",
)

# Product-form weights and their positivity range.
check(bf.bc_weights(1, 0, 5) == [1, 2, 9, 64, 625], "bc(1,0) weights are j^(j-1)")
check(bf.bc_valid(4, -1, 2) and not bf.bc_valid(5, -1, 2), "bc(-1,2) valid up to n=4")

# Exact Gibbs laws sum to one and sampling is seed-reproducible.
law = bf.gibbs_law(4, 2, "segments")
check(len(law) == 7, "gibbs_law(4,2) has 7 partitions")
check(sum(p for _, p in law) == 1, "gibbs_law probabilities sum to 1")
draws = bf.gibbs_sample(4, 2, "segments", 50, seed=9)
check(draws == bf.gibbs_sample(4, 2, "segments", 50, seed=9), "gibbs_sample is reproducible")
check(all(d.k == 2 for d in draws), "gibbs_sample draws have 2 blocks")

# Partition objects: construction, order structure, block surgery.
pi = bf.SetPartition(5, [[1, 4], [2], [3, 5]])
check(str(pi) == "{1,4}{2}{3,5}", "SetPartition renders canonically")
check(pi.shape() == [2, 2, 1], "shape sorts block sizes")
check(pi.refines(bf.SetPartition.whole(5)), "every partition refines the whole set")
check(pi.merge(0, 2).k == 2, "merging two blocks drops k by one")
check(bf.SetPartition.singletons(3).blocks() == [[1], [2], [3]], "singletons")

# A splitting-chain path refines downward from the whole set to singletons.
path = bf.fragmentation_path(6, "cycles", seed=3)
check(len(path) == 6, "fragmentation path has n states")
check(path[0] == bf.SetPartition.whole(6), "path starts at the whole set")
check(path[-1] == bf.SetPartition.singletons(6), "path ends at singletons")
check(
    all(b.refines(a) for a, b in zip(path, path[1:])),
    "each fragmentation step refines the last",
)

# A coalescent run merges upward with increasing event times.
events = bf.coalescent_path(5, 0, "1/2", seed=3)
times = [t for t, _ in events]
ks = [state.k for _, state in events]
check(times == sorted(times) and times[0] == 0.0, "coalescent times increase from 0")
check(ks == [5, 4, 3, 2, 1], "coalescent merges one pair per event")

# Coupling existence: uniform weights pass small sizes and fail at 20.
check(bf.exists_coupling(6, "uniform"), "uniform weights couple at n=6")
check(bf.first_failing_size("uniform", 20) == 20, "uniform coupling first fails at n=20")

# Tree counting and total progeny.
check(bf.plane_forest_count(10, 1) == 4862, "plane trees on 10 vertices: Catalan(9)")
check(
    math.isclose(bf.total_progeny_prob(1, 1, 1, 0), math.exp(-1)),
    "single-tree progeny mass at 1 is e^-1",
)
check(
    math.isclose(bf.total_progeny_prob(2, 3, 1, 0), 2 * math.exp(-3)),
    "two-tree progeny mass at 3 is 2e^-3",
)

# Coalescent functionals: first-split law and mutation laws.
fs = bf.first_split_law(4)
check(
    math.isclose(fs[0], 0.5 + math.log(2) - 0.75 * math.log(3)),
    "first-split law at n=4 matches its closed form",
)
check(math.isclose(sum(fs), 1.0), "first-split law sums to 1")
check("ln(2)" in bf.first_split_forms(4)[0], "closed forms are reported exactly")

elaw = bf.ewens_law(4, 1)
check(sum(p for _, p in elaw) == 1, "allelic partition law sums to 1")
check(bf.total_length_laplace(4, 0) == 1, "Laplace transform at 0 is 1")

# One fast release-gate suite end to end.
passed, details = bf.run_suite("non-product-weights")
check(passed and any(d.startswith("ok") for d in details), "release suite runs from Python")

print(f"all {checks} checks passed")
