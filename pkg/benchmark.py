# -*- coding: utf-8 -*-
"""
基准测试模块 - 闭式解 O(n) 与稠密 Cholesky O(N³) 的耗时对比
"""

import time
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config import (
    BENCH_TRIALS, BENCH_WARMUP, DEFAULT_ORACLE_CAP, DEFAULT_SEED, DEFAULT_TOL,
    SCALING_BATCH_ELEMENTS,
)
from closed_form import closed_form_logdet
from model import DenseSymMatrix, ModelSpec, build_information_matrix, parse_s_sq
from oracle import cholesky_stack, oracle_logdet, sparse_to_dense

logger = logging.getLogger('RepDet.Bench')


@dataclass
class BenchRecord:
    """单个规模的基准结果；oracle 被跳过时相应字段为 None"""
    n: int
    N: int
    closed_form_ns: int
    oracle_ns: Optional[int]
    log_det_primal: float
    oracle_log_det: Optional[float]
    abs_diff: Optional[float]

    @property
    def oracle_ran(self) -> bool:
        return self.oracle_ns is not None

    def within(self, tol: float) -> bool:
        return self.abs_diff is None or self.abs_diff <= tol

    def as_row(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'N': self.N,
            'closed_form_ns': self.closed_form_ns,
            'oracle_ns': self.oracle_ns,
            'log_det_primal': self.log_det_primal,
            'oracle_log_det': self.oracle_log_det,
            'abs_diff': self.abs_diff,
        }


def median_time_ns(fn: Callable[[], Any], trials: int = BENCH_TRIALS,
                   warmup: int = BENCH_WARMUP) -> int:
    """预热若干次后取 trials 次的中位数（纳秒）"""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(max(1, trials)):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
    return int(np.median(samples))


def bench_size(spec: ModelSpec, trials: int = BENCH_TRIALS,
               oracle_cap: int = DEFAULT_ORACLE_CAP) -> BenchRecord:
    """测一个规模；N 超过上限时跳过 oracle"""
    closed_values: List[float] = []
    closed_ns = median_time_ns(lambda: closed_values.append(closed_form_logdet(spec)), trials)
    value = closed_values[-1]

    oracle_ns = oracle_value = diff = None
    if spec.N <= oracle_cap:
        dense = sparse_to_dense(build_information_matrix(spec), cap=oracle_cap)
        oracle_values: List[float] = []
        oracle_ns = median_time_ns(lambda: oracle_values.append(oracle_logdet(dense)), trials)
        oracle_value = -oracle_values[-1]
        diff = abs(value - oracle_value)
    else:
        logger.info(f"n = {spec.n}: N = {spec.N} 超过 oracle 上限 {oracle_cap}，跳过 oracle")

    record = BenchRecord(
        n=spec.n,
        N=spec.N,
        closed_form_ns=closed_ns,
        oracle_ns=oracle_ns,
        log_det_primal=value,
        oracle_log_det=oracle_value,
        abs_diff=diff,
    )
    logger.debug(f"基准 n = {spec.n}: {record.as_row()}")
    return record


def run_bench(sizes: Sequence[int], rho: float, sigma_sq: float, s_sq: Sequence[float],
              trials: int = BENCH_TRIALS, oracle_cap: int = DEFAULT_ORACLE_CAP) -> List[BenchRecord]:
    """按规模升序依次测量；s_sq 为单个值时广播到每个规模"""
    records = []
    for n in sorted(sizes):
        spec = ModelSpec(n=n, rho=rho, sigma_sq=sigma_sq, s_sq=parse_s_sq(s_sq, n))
        records.append(bench_size(spec, trials=trials, oracle_cap=oracle_cap))
    return records


def all_within(records: Sequence[BenchRecord], tol: float = DEFAULT_TOL) -> bool:
    return all(r.within(tol) for r in records)


# 立方复杂度检验

def random_spd(dim: int, seed: int = DEFAULT_SEED) -> DenseSymMatrix:
    """种子固定的良态对称正定矩阵 R·Rᵀ/dim + I"""
    rng = np.random.default_rng(seed)
    r = rng.standard_normal((dim, dim))
    a = r @ r.T / dim + np.eye(dim)
    return DenseSymMatrix.from_array((a + a.T) / 2.0)


def scaling_batch(dim: int, elements: int = SCALING_BATCH_ELEMENTS) -> int:
    """一叠矩阵的个数，使 batch·dim² 约等于 elements"""
    return max(1, round(elements / (dim * dim)))


def time_oracle_dims(dims: Sequence[int], trials: int = BENCH_TRIALS,
                     seed: int = DEFAULT_SEED) -> List[float]:
    """
    各维度下单个矩阵 Cholesky 的摊还耗时（纳秒）

    每个维度分解一叠 scaling_batch(dim) 个矩阵再平均，
    逐列循环的解释器开销由整叠矩阵分担，计时反映 O(dim³) 的运算量。
    """
    times = []
    for dim in dims:
        batch = scaling_batch(dim)
        stack = np.stack([random_spd(dim, seed + b).values for b in range(batch)])
        times.append(median_time_ns(lambda: cholesky_stack(stack), trials) / batch)
        logger.debug(f"Cholesky dim = {dim}, batch = {batch}: {times[-1]:.0f} ns/矩阵")
    return times


def fit_power_law(dims: Sequence[float], times: Sequence[float]) -> float:
    """log(time) 对 log(dim) 的最小二乘斜率"""
    if len(dims) != len(times) or len(dims) < 2:
        raise ValueError("至少需要两个 (dim, time) 点")
    slope, _ = np.polyfit(np.log(np.asarray(dims, dtype=float)),
                          np.log(np.asarray(times, dtype=float)), 1)
    return float(slope)
