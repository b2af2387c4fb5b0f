# -*- coding: utf-8 -*-
"""
闭式解模块 - det(Σₓ) 的闭式表达、齐次特例、极限与原始/对偶关系

全部在对数域计算：det(K)^{|ℰ|} 在 n≈40 时就会下溢，而 det(𝐃) 会很大。
对偶侧使用矩阵行列式引理：
    det(𝐃 + ρσ²·J_n) = (1 + ρσ²·tr 𝐃⁻¹)·det 𝐃
"""

import math
import logging
from dataclasses import dataclass, asdict
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Sequence, Union

import numpy as np

from config import LOG1P_SWITCH, edge_count, variable_count
from model import ModelSpec, ModelSpecError, build_D, check_pairwise_params, is_finite_real

logger = logging.getLogger('RepDet.ClosedForm')

LOG_2PI = math.log(2.0 * math.pi)
LOG_2PI_E = LOG_2PI + 1.0

Rational = Union[int, Fraction]


class ConsistencyError(ArithmeticError):
    """数学上不可能出现的内部不一致（如 1 + ρσ²·tr 𝐃⁻¹ ≤ 0）"""


class Method(Enum):
    """报告的计算方式"""
    CLOSED_FORM = "closed_form"
    HOMOGENEOUS = "homogeneous"
    ORACLE = "oracle"


@dataclass(frozen=True)
class LogDetReport:
    """对数行列式报告（log_det_primal 为 ln det Σₓ，不是 Σ⁻¹ₓ）"""
    n: int
    N: int
    log_det_primal: float
    log_det_dual: float
    log_det_K: float
    duality_residual: float
    method: Method

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['method'] = self.method.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LogDetReport':
        return cls(
            n=int(data['n']),
            N=int(data['N']),
            log_det_primal=float(data['log_det_primal']),
            log_det_dual=float(data['log_det_dual']),
            log_det_K=float(data['log_det_K']),
            duality_residual=float(data['duality_residual']),
            method=Method(data['method']),
        )


def _log_one_plus(x: float) -> float:
    """ln(1 + x)，|x| 较小时走 log1p"""
    if not 1.0 + x > 0.0:
        raise ConsistencyError(f"1 + ρσ²·tr(𝐃⁻¹) = {1.0 + x!r} ≤ 0，与正定性矛盾")
    if abs(x) < LOG1P_SWITCH:
        return math.log1p(x)
    return math.log(1.0 + x)


def log_det_K(rho: float, sigma_sq: float) -> float:
    """ln det(𝐊) = ln(σ⁴(1 − ρ²))"""
    check_pairwise_params(rho, sigma_sq)
    return 2.0 * math.log(sigma_sq) + math.log1p(-rho * rho)


def matrix_determinant_lemma_logdet(diag: Sequence[float], u: Sequence[float],
                                    v: Sequence[float]) -> float:
    """
    ln det(B + u·vᵀ)，B = diag(diag) 为正对角矩阵

    det(B + uvᵀ) = (1 + vᵀB⁻¹u)·det(B)
    """
    b = np.asarray(diag, dtype=np.float64)
    if np.any(b <= 0.0):
        raise ConsistencyError("对角矩阵 B 必须正定")
    correction = float(np.sum(np.asarray(v, dtype=np.float64) * np.asarray(u, dtype=np.float64) / b))
    return _log_one_plus(correction) + float(np.sum(np.log(b)))


def closed_form_logdet(spec: ModelSpec) -> float:
    """
    ln det(Σₓ)，O(n)

    |ℰ|·ln(σ⁴(1−ρ²)) + Σ ln s²ᵢ − ln(1 + ρσ²·Σ 1/dᵢ) − Σ ln dᵢ
    """
    D = build_D(spec)
    t = spec.rho * spec.sigma_sq * D.trace_inverse()
    return (
        spec.edge_count * log_det_K(spec.rho, spec.sigma_sq)
        + float(np.sum(np.log(spec.s_sq_array)))
        - _log_one_plus(t)
        - D.log_det()
    )


def homogeneous_logdet(n: int, rho: float, sigma_sq: float, s_sq: float) -> float:
    """齐次模型 sᵢ = s：|ℰ|·ln det K + n·ln s² − ln(1 + nρσ²/d) − n·ln d"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ModelSpecError(f"n 必须是 ≥ 2 的整数，收到 {n!r}")
    check_pairwise_params(rho, sigma_sq)
    if not (is_finite_real(s_sq) and float(s_sq) > 0.0):
        raise ModelSpecError(f"s_sq 必须为正，收到 {s_sq!r}")
    rho, sigma_sq, s_sq = float(rho), float(sigma_sq), float(s_sq)
    d = s_sq + (n - rho - 1.0) * sigma_sq
    return (
        edge_count(n) * log_det_K(rho, sigma_sq)
        + n * math.log(s_sq)
        - _log_one_plus(n * rho * sigma_sq / d)
        - n * math.log(d)
    )


def asymptotic_logdet_per_variable(rho: float, sigma_sq: float) -> float:
    """lim ln det(Σₓ)/N = 2·ln σ + ½·ln(1 − ρ²)，与 s 无关"""
    check_pairwise_params(rho, sigma_sq)
    return math.log(sigma_sq) + 0.5 * math.log1p(-rho * rho)


def dual_logdet(spec: ModelSpec) -> float:
    """ln det(Σ_ω) = −ln(1 + ρσ²·tr 𝐃⁻¹) − Σ ln dᵢ"""
    D = build_D(spec)
    ones = np.ones(spec.n)
    return -matrix_determinant_lemma_logdet(D.d, spec.rho * spec.sigma_sq * ones, ones)


def duality_scale_log(spec: ModelSpec) -> float:
    """ln[det(Σₓ)/det(Σ_ω)] = |ℰ|·ln det K + Σ ln s²ᵢ"""
    return spec.edge_count * log_det_K(spec.rho, spec.sigma_sq) + float(np.sum(np.log(spec.s_sq_array)))


def duality_residual(spec: ModelSpec) -> float:
    """|ln det Σₓ − ln det Σ_ω − |ℰ|·ln det K − Σ ln s²ᵢ|，只反映浮点误差"""
    return abs(closed_form_logdet(spec) - dual_logdet(spec) - duality_scale_log(spec))


def differential_entropy(spec: ModelSpec) -> float:
    """高斯微分熵 ½·N·ln(2πe) + ½·ln det Σₓ"""
    return 0.5 * spec.N * LOG_2PI_E + 0.5 * closed_form_logdet(spec)


def log_partition_primal(spec: ModelSpec) -> float:
    """ln Zₓ = (N/2)·ln 2π + ½·ln det Σₓ"""
    return 0.5 * spec.N * LOG_2PI + 0.5 * closed_form_logdet(spec)


def log_partition_dual(spec: ModelSpec) -> float:
    """ln Z_ω = (3N/2)·ln 2π + ½·ln det Σ_ω + (|ℰ|/2)·ln det K + Σ ln sᵢ"""
    return (
        1.5 * spec.N * LOG_2PI
        + 0.5 * dual_logdet(spec)
        + 0.5 * spec.edge_count * log_det_K(spec.rho, spec.sigma_sq)
        + 0.5 * float(np.sum(np.log(spec.s_sq_array)))
    )


def partition_scale_residual(spec: ModelSpec) -> float:
    """|ln Z_ω − ln Zₓ − N·ln 2π|，对偶定理给出 Z_ω = (2π)^N·Zₓ"""
    return abs(log_partition_dual(spec) - log_partition_primal(spec) - spec.N * LOG_2PI)


# 精确有理数求值

def exact_det(n: int, rho: Rational, sigma_sq: Rational,
              s_sq: Union[Rational, Sequence[Rational]]) -> Fraction:
    """
    有理参数下的 det(Σₓ) 精确值

    s_sq 为标量时视为齐次模型。
    """
    rho, sigma_sq = Fraction(rho), Fraction(sigma_sq)
    if isinstance(s_sq, (int, float, Fraction)):
        s_values = [Fraction(s_sq)] * n
    else:
        s_values = [Fraction(s) for s in s_sq]
    if n < 2 or len(s_values) != n:
        raise ModelSpecError("exact_det 要求 n ≥ 2 且 s_sq 长度为 n")
    if not (-1 < rho < 1) or sigma_sq <= 0 or any(s <= 0 for s in s_values):
        raise ModelSpecError("参数超出定义域")

    det_k = sigma_sq * sigma_sq * (1 - rho * rho)
    d = [s + (n - rho - 1) * sigma_sq for s in s_values]
    numerator = det_k ** edge_count(n)
    for s in s_values:
        numerator *= s
    denominator = 1 + rho * sigma_sq * sum(Fraction(1) / di for di in d)
    for di in d:
        denominator *= di
    if denominator <= 0:
        raise ConsistencyError("精确分母非正")
    return numerator / denominator


def exact_logdet(n: int, rho: Rational, sigma_sq: Rational,
                 s_sq: Union[Rational, Sequence[Rational]]) -> float:
    """ln exact_det，经由整数分子分母取对数，不会溢出"""
    value = exact_det(n, rho, sigma_sq, s_sq)
    return math.log(value.numerator) - math.log(value.denominator)


# 报告

def build_report(spec: ModelSpec, method: Method = Method.CLOSED_FORM) -> LogDetReport:
    """计算闭式（或齐次）报告"""
    if method is Method.HOMOGENEOUS:
        if not spec.homogeneous():
            raise ModelSpecError("homogeneous 方法要求所有 s²ᵢ 相同")
        primal = homogeneous_logdet(spec.n, spec.rho, spec.sigma_sq, spec.s_sq[0])
    elif method is Method.CLOSED_FORM:
        primal = closed_form_logdet(spec)
    else:
        raise ValueError("oracle 报告请使用 report_from_oracle")
    return _assemble(spec, primal, method)


def report_from_oracle(spec: ModelSpec, oracle_log_det_precision: float) -> LogDetReport:
    """由 Σ⁻¹ₓ 的 oracle 对数行列式生成报告（取负号）"""
    return _assemble(spec, -oracle_log_det_precision, Method.ORACLE)


def _assemble(spec: ModelSpec, primal: float, method: Method) -> LogDetReport:
    dual = dual_logdet(spec)
    residual = abs(primal - (dual + duality_scale_log(spec)))
    report = LogDetReport(
        n=spec.n,
        N=variable_count(spec.n),
        log_det_primal=primal,
        log_det_dual=dual,
        log_det_K=log_det_K(spec.rho, spec.sigma_sq),
        duality_residual=residual,
        method=method,
    )
    logger.debug(f"报告 [{method.value}] n = {spec.n}: ln det Σₓ = {primal:.12g}, 残差 = {residual:.3g}")
    return report
