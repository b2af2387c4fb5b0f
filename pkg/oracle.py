# -*- coding: utf-8 -*-
"""
Oracle 模块 - 稠密 Cholesky 分解与对数行列式（独立的参照实现）

不选主元；输入按构造应为对称正定，分解失败本身就是有意义的检验信号。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import DEFAULT_ORACLE_CAP
from model import DenseSymMatrix, SparseSymMatrix

logger = logging.getLogger('RepDet.Oracle')


class NotPositiveDefinite(np.linalg.LinAlgError):
    """第 row 行（从 0 开始）的主元 ≤ 0 或不是有限数"""

    def __init__(self, row: int, pivot: float):
        super().__init__(f"矩阵不是正定的: 第 {row} 行主元 = {pivot!r}")
        self.row = row
        self.pivot = pivot


class OracleCapExceeded(RuntimeError):
    """维度超过 oracle 上限，调用方应跳过 oracle 比对"""

    def __init__(self, dim: int, cap: int):
        super().__init__(f"维度 {dim} 超过 oracle 上限 {cap}")
        self.dim = dim
        self.cap = cap


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """下三角因子 L，M = L·Lᵀ"""
    dim: int
    lower: np.ndarray

    def diagonal(self) -> np.ndarray:
        return np.diag(self.lower)

    def log_det(self) -> float:
        """ln det(M) = 2·Σ ln L[k, k]"""
        return 2.0 * float(np.sum(np.log(self.diagonal())))

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


def cholesky_stack(stack: np.ndarray) -> np.ndarray:
    """
    左视（逐列）Cholesky 分解，一次处理形如 (batch, dim, dim) 的一叠矩阵，O(batch·dim³)

    第 j 列: v = A[j:, j] − L[j:, :j]·L[j, :j]，主元 v[0] 须为正的有限数，
    L[j, j] = √v[0]，L[j+1:, j] = v[1:] / L[j, j]。
    只读取下三角；运算顺序固定，同一平台上结果逐位可复现。
    """
    a = np.asarray(stack, dtype=np.float64)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError(f"需要 (batch, dim, dim) 形状，收到 {a.shape}")
    batch, n = a.shape[0], a.shape[1]
    lower = np.zeros_like(a, order='C')

    for j in range(n):
        row = lower[:, j, :j].reshape(batch, j, 1)
        v = a[:, j:, j] - np.matmul(lower[:, j:, :j], row)[:, :, 0]
        pivots = v[:, 0]
        bad = ~(np.isfinite(pivots) & (pivots > 0.0))
        if bad.any():
            pivot = float(pivots[int(np.argmax(bad))])
            logger.debug(f"Cholesky 在第 {j} 行失败，主元 = {pivot!r}")
            raise NotPositiveDefinite(j, pivot)
        diag = np.sqrt(pivots)
        lower[:, j, j] = diag
        lower[:, j + 1:, j] = v[:, 1:] / diag[:, np.newaxis]

    return lower


def cholesky(m: DenseSymMatrix) -> CholeskyFactor:
    """单个矩阵的 Cholesky 分解（不选主元）"""
    lower = cholesky_stack(m.values[np.newaxis])[0]
    lower.setflags(write=False)
    return CholeskyFactor(dim=m.dim, lower=lower)


def oracle_logdet(m: DenseSymMatrix) -> float:
    """ln det(m)；对 Σ⁻¹ₓ 取负号即得 ln det Σₓ"""
    return cholesky(m).log_det()


def relative_factor_residual(factor: CholeskyFactor, m: DenseSymMatrix) -> float:
    """‖L·Lᵀ − M‖_F / ‖M‖_F"""
    norm = np.linalg.norm(m.values)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(factor.reconstruct() - m.values) / norm)


def sparse_to_dense(m: SparseSymMatrix, cap: Optional[int] = None) -> DenseSymMatrix:
    """镜像补全为稠密矩阵；维度超过上限时抛出 OracleCapExceeded"""
    cap = DEFAULT_ORACLE_CAP if cap is None else cap
    if m.dim > cap:
        raise OracleCapExceeded(m.dim, cap)
    return DenseSymMatrix.from_array(m.to_scipy().toarray(), check=False)


def sparse_oracle_logdet(m: SparseSymMatrix, cap: Optional[int] = None) -> float:
    """稀疏矩阵 → 稠密 → Cholesky → ln det"""
    return oracle_logdet(sparse_to_dense(m, cap=cap))
