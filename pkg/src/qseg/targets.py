"""Built-in measurement targets with known cost shapes.

Each target splits into an untimed ``setup`` (deterministic input-data
generation from a seeded RNG) and a timed ``run`` over the prepared
payload.  Workloads batch enough inner iterations to sit comfortably above
clock resolution while keeping their cost shape in the swept variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def binary_search(arr: list, key) -> int:
    """Leftmost insertion index of key in sorted arr (pure Python on
    purpose: the per-level cost is what the profiler measures)."""
    lo, hi = 0, len(arr)
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def merge_sort(items: list) -> list:
    """Non-mutating top-down mergesort."""
    n = len(items)
    if n <= 1:
        return list(items)
    left = merge_sort(items[: n // 2])
    right = merge_sort(items[n // 2:])
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged


def sqrt_depth(n: int) -> int:
    """Number of repeated integer square roots until the value drops
    below 2; grows like log2(log2(n))."""
    depth = 0
    while n >= 2:
        n = math.isqrt(n)
        depth += 1
    return depth


@dataclass(frozen=True)
class ArgSpec:
    """One swept integer argument: its validity floor and default grid.

    ``grid_scale`` picks how default grid points spread between the bounds;
    geometric spacing suits variables whose cost grows logarithmically.
    """

    name: str
    min_value: int = 0
    default_grid: tuple[int, int] = (16, 1024)
    grid_scale: str = "linear"  # "linear" | "geometric"


@dataclass(frozen=True)
class BuiltinTarget:
    name: str
    args: tuple[ArgSpec, ...]
    setup: Callable[[dict, np.random.Generator], tuple]
    run: Callable[[tuple], object]


# --- binary-search(x): one sorted array, a fixed batch of lookups -------

_SEARCH_BATCH = 100000


def _binary_search_setup(args: dict, rng: np.random.Generator) -> tuple:
    x = args["x"]
    arr = list(range(x))
    keys = rng.integers(0, max(x, 1), size=_SEARCH_BATCH).tolist()
    return arr, keys


def _binary_search_run(payload: tuple) -> int:
    arr, keys = payload
    hit = 0
    for key in keys:
        hit ^= binary_search(arr, key)
    return hit


# --- merge-sort(x): a few sorts of one shuffled array --------------------

_SORT_BATCH = 16


def _merge_sort_setup(args: dict, rng: np.random.Generator) -> tuple:
    data = rng.random(args["x"]).tolist()
    return (data,)


def _merge_sort_run(payload: tuple) -> int:
    (data,) = payload
    out = None
    for _ in range(_SORT_BATCH):
        out = merge_sort(data)
    return len(out) if out is not None else 0


# --- search-sort(x, b): batched binary search + linear block scans -------

_SEARCH_SORT_LOOKUPS = 67000
_SEARCH_SORT_SCANS = 15000


def _search_sort_setup(args: dict, rng: np.random.Generator) -> tuple:
    x, b = args["x"], args["b"]
    arr = list(range(x))
    block = rng.random(b).tolist()
    keys = rng.integers(0, max(x, 1), size=_SEARCH_SORT_LOOKUPS).tolist()
    return arr, block, keys


def _search_sort_run(payload: tuple) -> float:
    arr, block, keys = payload
    acc = 0.0
    for key in keys:
        acc += binary_search(arr, key)
    for _ in range(_SEARCH_SORT_SCANS):
        acc += sum(block)
    return acc


# --- custom(m, x, b): m*x multiply-accumulate plus loglog depth loop -----

_CUSTOM_MX_BATCH = 400
_CUSTOM_DEPTH_BATCH = 100000


def _custom_setup(args: dict, rng: np.random.Generator) -> tuple:
    data = rng.random(args["x"]).tolist()
    return data, args["m"], args["b"]


def _custom_run(payload: tuple) -> float:
    data, m, b = payload
    acc = 0.0
    for _ in range(_CUSTOM_MX_BATCH):
        for i in range(m):
            for v in data:
                acc += v * i
    for _ in range(_CUSTOM_DEPTH_BATCH):
        acc += sqrt_depth(b)
    return acc


BUILTIN_TARGETS: dict[str, BuiltinTarget] = {
    "binary-search": BuiltinTarget(
        "binary-search",
        (ArgSpec("x", min_value=0, default_grid=(64, 65536), grid_scale="geometric"),),
        _binary_search_setup,
        _binary_search_run,
    ),
    "merge-sort": BuiltinTarget(
        "merge-sort",
        (ArgSpec("x", min_value=0, default_grid=(64, 8192), grid_scale="geometric"),),
        _merge_sort_setup,
        _merge_sort_run,
    ),
    "search-sort": BuiltinTarget(
        "search-sort",
        (
            ArgSpec("x", min_value=0, default_grid=(16, 65536), grid_scale="geometric"),
            ArgSpec("b", min_value=0, default_grid=(4, 4096), grid_scale="geometric"),
        ),
        _search_sort_setup,
        _search_sort_run,
    ),
    "custom": BuiltinTarget(
        "custom",
        (
            ArgSpec("m", min_value=0, default_grid=(2, 14)),
            ArgSpec("x", min_value=0, default_grid=(16, 208)),
            ArgSpec("b", min_value=2, default_grid=(4, 65536), grid_scale="geometric"),
        ),
        _custom_setup,
        _custom_run,
    ),
}
