# -*- coding: utf-8 -*-
"""
模型模块 - ModelSpec / 稀疏与稠密对称矩阵 / 原始与对偶信息矩阵的组装

变量 x_{ij}（i 为云，j 为端口，i ≠ j）按云 i 升序、云内端口 j 升序排成
扁平编号 0…N−1，N = n(n−1)。所有组装直接由参数计算，不做矩阵求逆。
"""

import json
import math
import numbers
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from config import RHO_RANGE, VARIANCE_RANGE, edge_count, variable_count

logger = logging.getLogger('RepDet.Model')


class ModelSpecError(ValueError):
    """模型参数超出定义域"""


def is_finite_real(value: Any) -> bool:
    """有限实数（含 numpy 标量与 Fraction），排除 bool"""
    return isinstance(value, numbers.Real) and not isinstance(value, (bool, np.bool_)) and math.isfinite(
        float(value)
    )


def check_pairwise_params(rho: float, sigma_sq: float) -> None:
    """检查 ρ ∈ (−1, 1) 与 σ² > 0"""
    if not is_finite_real(rho) or not -1.0 < float(rho) < 1.0:
        raise ModelSpecError(f"rho 必须在 (-1, 1) 内，收到 {rho!r}")
    if not is_finite_real(sigma_sq) or not float(sigma_sq) > 0.0:
        raise ModelSpecError(f"sigma_sq 必须为正，收到 {sigma_sq!r}")


@dataclass(frozen=True)
class ModelSpec:
    """模型实例 - n 个云、相关系数 ρ、成对方差 σ²、一元方差 s²ᵢ"""
    n: int
    rho: float
    sigma_sq: float
    s_sq: Tuple[float, ...]

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ModelSpecError(f"n 必须是 ≥ 2 的整数，收到 {self.n!r}")
        check_pairwise_params(self.rho, self.sigma_sq)
        s_sq = tuple(self.s_sq)
        if len(s_sq) != self.n:
            raise ModelSpecError(f"s_sq 长度 {len(s_sq)} 与 n = {self.n} 不一致")
        for k, s in enumerate(s_sq):
            if not is_finite_real(s) or not float(s) > 0.0:
                raise ModelSpecError(f"s_sq[{k}] 必须为正，收到 {s!r}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'rho', float(self.rho))
        object.__setattr__(self, 'sigma_sq', float(self.sigma_sq))
        object.__setattr__(self, 's_sq', tuple(float(s) for s in s_sq))

    @classmethod
    def homogeneous_model(cls, n: int, rho: float, sigma_sq: float, s_sq: float) -> 'ModelSpec':
        """所有 s²ᵢ 相同的模型"""
        return cls(n=n, rho=rho, sigma_sq=sigma_sq, s_sq=(s_sq,) * int(n))

    def homogeneous(self) -> bool:
        return all(s == self.s_sq[0] for s in self.s_sq)

    @property
    def N(self) -> int:
        return variable_count(self.n)

    @property
    def edge_count(self) -> int:
        return edge_count(self.n)

    @property
    def s_sq_array(self) -> np.ndarray:
        return np.asarray(self.s_sq, dtype=np.float64)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'rho': self.rho,
            'sigma_sq': self.sigma_sq,
            's_sq': list(self.s_sq),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModelSpec':
        try:
            return cls(
                n=data['n'],
                rho=data['rho'],
                sigma_sq=data['sigma_sq'],
                s_sq=tuple(data['s_sq']),
            )
        except KeyError as e:
            raise ModelSpecError(f"缺少字段: {e}") from None

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class VariableIndex:
    """变量 x_{ij} 的位置：云 i、端口 j（均从 1 开始），扁平行号 flat（从 0 开始）"""
    i: int
    j: int
    flat: int


def flat_index(n: int, i: int, j: int) -> int:
    """x_{ij} 的扁平行号（i, j 从 1 开始），不做校验"""
    rank = j - 1 if j < i else j - 2
    return (i - 1) * (n - 1) + rank


def variable_index(spec: ModelSpec, i: int, j: int) -> VariableIndex:
    """(云 i, 端口 j) → 扁平编号，i ≠ j 且都在 [n] 内"""
    n = spec.n
    if i == j:
        raise ModelSpecError(f"云与端口不能相同: i = j = {i}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ModelSpecError(f"(i, j) = ({i}, {j}) 超出 [1, {n}]")
    return VariableIndex(i=i, j=j, flat=flat_index(n, i, j))


def pair_of_flat(n: int, flat: int) -> Tuple[int, int]:
    """扁平编号 → (i, j)（从 1 开始）"""
    i0, rank = divmod(flat, n - 1)
    j0 = rank if rank < i0 else rank + 1
    return i0 + 1, j0 + 1


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseSymMatrix:
    """
    坐标格式对称矩阵 - 只存上三角 (row ≤ col)，按 (row, col) 排序，值非零

    逻辑矩阵由上三角镜像补全。
    """
    dim: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[Tuple[int, int, float]]) -> 'SparseSymMatrix':
        """从 (row, col, value) 三元组构造；下三角项自动翻转，零值丢弃，重复项报错"""
        triples = list(entries)
        if triples:
            arr = np.asarray(triples, dtype=np.float64)
            rows = arr[:, 0].astype(np.int64)
            cols = arr[:, 1].astype(np.int64)
            vals = arr[:, 2]
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0, dtype=np.float64)
        return cls.from_arrays(dim, rows, cols, vals)

    @classmethod
    def from_arrays(cls, dim: int, rows, cols, values) -> 'SparseSymMatrix':
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if dim < 1:
            raise ValueError(f"维度必须为正: {dim}")
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows / cols / values 长度不一致")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= dim or cols.max() >= dim):
            raise ValueError(f"下标超出 [0, {dim})")

        upper_r = np.minimum(rows, cols)
        upper_c = np.maximum(rows, cols)
        keep = values != 0.0
        upper_r, upper_c, values = upper_r[keep], upper_c[keep], values[keep]

        order = np.lexsort((upper_c, upper_r))
        upper_r, upper_c, values = upper_r[order], upper_c[order], values[order]
        if upper_r.size > 1:
            dup = (upper_r[1:] == upper_r[:-1]) & (upper_c[1:] == upper_c[:-1])
            if np.any(dup):
                k = int(np.argmax(dup))
                raise ValueError(f"重复的项: ({upper_r[k]}, {upper_c[k]})")

        return cls(
            dim=int(dim),
            rows=_readonly(upper_r.copy()),
            cols=_readonly(upper_c.copy()),
            values=_readonly(values.copy()),
        )

    @property
    def entries(self) -> List[Tuple[int, int, float]]:
        return [(int(r), int(c), float(v)) for r, c, v in zip(self.rows, self.cols, self.values)]

    @property
    def nnz_stored(self) -> int:
        return int(self.values.size)

    @property
    def nnz_logical(self) -> int:
        """镜像补全后的非零个数"""
        off = int(np.count_nonzero(self.rows != self.cols))
        return self.nnz_stored + off

    def get(self, row: int, col: int) -> float:
        r, c = min(row, col), max(row, col)
        lo = np.searchsorted(self.rows, r, side='left')
        hi = np.searchsorted(self.rows, r, side='right')
        k = lo + np.searchsorted(self.cols[lo:hi], c)
        if k < hi and self.cols[k] == c:
            return float(self.values[k])
        return 0.0

    def diagonal(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        mask = self.rows == self.cols
        out[self.rows[mask]] = self.values[mask]
        return out

    def row_counts(self) -> np.ndarray:
        """每个逻辑行的非零个数"""
        off = self.rows != self.cols
        counts = np.bincount(self.rows, minlength=self.dim)
        counts += np.bincount(self.cols[off], minlength=self.dim)
        return counts

    def off_diagonal_pattern(self) -> List[Tuple[int, int]]:
        """严格上三角非零位置 (row, col)"""
        off = self.rows != self.cols
        return [(int(r), int(c)) for r, c in zip(self.rows[off], self.cols[off])]

    def to_scipy(self) -> sp.csr_matrix:
        """镜像补全后的 scipy CSR 矩阵"""
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.values, self.values[off]])
        return sp.coo_matrix((v, (r, c)), shape=(self.dim, self.dim)).tocsr()

    def same_entries(self, other: 'SparseSymMatrix') -> bool:
        return (
            self.dim == other.dim
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.values, other.values)
        )

    def with_value(self, row: int, col: int, value: float) -> 'SparseSymMatrix':
        """返回修改单个逻辑项后的新矩阵（原矩阵不变）"""
        r, c = min(row, col), max(row, col)
        entries = {(a, b): v for a, b, v in self.entries}
        entries[(r, c)] = value
        return SparseSymMatrix.from_entries(self.dim, ((a, b, v) for (a, b), v in entries.items()))


@dataclass(frozen=True, eq=False)
class DenseSymMatrix:
    """小型稠密对称矩阵 - 上三角为准，读取时镜像"""
    dim: int
    values: np.ndarray

    @classmethod
    def from_array(cls, array, check: bool = True) -> 'DenseSymMatrix':
        a = np.array(array, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"需要方阵，收到形状 {a.shape}")
        if check and not np.array_equal(a, a.T):
            raise ValueError("矩阵不对称")
        upper = np.triu(a)
        full = upper + np.triu(upper, 1).T
        return cls(dim=a.shape[0], values=_readonly(full))

    def __getitem__(self, key: Tuple[int, int]) -> float:
        i, j = key
        return float(self.values[min(i, j), max(i, j)])

    def as_array(self) -> np.ndarray:
        """可写副本"""
        return np.array(self.values)

    def det(self) -> float:
        return float(np.linalg.det(self.values))

    def to_sparse(self) -> SparseSymMatrix:
        r, c = np.triu_indices(self.dim)
        return SparseSymMatrix.from_arrays(self.dim, r, c, self.values[r, c])


@dataclass(frozen=True, eq=False)
class DiagonalVector:
    """对角矩阵 𝐃 的对角线 dᵢ = s²ᵢ + (n − ρ − 1)σ²"""
    d: np.ndarray

    def __len__(self) -> int:
        return int(self.d.size)

    def trace_inverse(self) -> float:
        """tr(𝐃⁻¹)，numpy 成对求和"""
        return float(np.sum(1.0 / self.d))

    def log_det(self) -> float:
        return float(np.sum(np.log(self.d)))


@dataclass(frozen=True, eq=False)
class Permutation:
    """{0, …, N−1} 上的双射，map[k] 为 k 的像"""
    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64)
        if m.ndim != 1 or not np.array_equal(np.sort(m), np.arange(m.size)):
            raise ValueError("不是 {0, …, N−1} 上的双射")
        object.__setattr__(self, 'map', _readonly(m.copy()))

    @classmethod
    def identity(cls, dim: int) -> 'Permutation':
        return cls(np.arange(dim))

    @classmethod
    def swap(cls, dim: int, a: int, b: int) -> 'Permutation':
        m = np.arange(dim)
        m[a], m[b] = b, a
        return cls(m)

    @property
    def dim(self) -> int:
        return int(self.map.size)

    def inverse(self) -> 'Permutation':
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.dim)
        return Permutation(inv)

    def compose(self, other: 'Permutation') -> 'Permutation':
        """(self ∘ other)(k) = self(other(k))"""
        if other.dim != self.dim:
            raise ValueError("置换维度不一致")
        return Permutation(self.map[other.map])

    def matrix(self) -> np.ndarray:
        """置换矩阵 𝐏，满足 (𝐏M𝐏ᵀ)[p(a), p(b)] = M[a, b]"""
        P = np.zeros((self.dim, self.dim))
        P[self.map, np.arange(self.dim)] = 1.0
        return P


# 局部因子

def local_pairwise_precision(rho: float, sigma_sq: float) -> DenseSymMatrix:
    """成对因子的局部信息矩阵 𝐊⁻¹"""
    check_pairwise_params(rho, sigma_sq)
    scale = 1.0 / (1.0 - rho * rho)
    diag = scale / sigma_sq
    off = -rho * scale / sigma_sq
    return DenseSymMatrix.from_array([[diag, off], [off, diag]])


def local_pairwise_covariance(rho: float, sigma_sq: float) -> DenseSymMatrix:
    """成对因子的局部协方差 𝐊 = [[σ², ρσ²], [ρσ², σ²]]"""
    check_pairwise_params(rho, sigma_sq)
    off = rho * sigma_sq
    return DenseSymMatrix.from_array([[sigma_sq, off], [off, sigma_sq]])


# 原始信息矩阵

def build_information_matrix(spec: ModelSpec) -> SparseSymMatrix:
    """
    组装 Σ⁻¹ₓ = 1/((1−ρ²)σ²)·I_N + 𝐀

    对角块 Sᵢ = (1/s²ᵢ)·J_{n−1}；块 (i, j) 唯一的非零项
    −ρ/((1−ρ²)σ²) 位于 (x_{ij}, x_{ji})。ρ = 0 时跨云项为零，不存储。
    """
    n, m = spec.n, spec.n - 1
    base = 1.0 / ((1.0 - spec.rho * spec.rho) * spec.sigma_sq)
    cross = -spec.rho * base
    inv_s = 1.0 / spec.s_sq_array

    # 云内上三角（含对角）
    tri_a, tri_b = np.triu_indices(m)
    offsets = np.arange(n, dtype=np.int64) * m
    rows = (offsets[:, None] + tri_a[None, :]).ravel()
    cols = (offsets[:, None] + tri_b[None, :]).ravel()
    vals = np.repeat(inv_s, tri_a.size)
    vals = np.where(np.tile(tri_a == tri_b, n), vals + base, vals)

    # 跨云项：i < j 时 x_{ij} 在第 i·m + j − 1 行，x_{ji} 在第 j·m + i 行（从 0 开始）
    if cross != 0.0:
        ci, cj = np.triu_indices(n, k=1)
        rows = np.concatenate([rows, ci * m + cj - 1])
        cols = np.concatenate([cols, cj * m + ci])
        vals = np.concatenate([vals, np.full(ci.size, cross)])

    matrix = SparseSymMatrix.from_arrays(spec.N, rows, cols, vals)
    logger.debug(f"Σ⁻¹ₓ 组装完成: N = {matrix.dim}, 存储项 = {matrix.nnz_stored}")
    return matrix


# 对偶信息矩阵

def build_D(spec: ModelSpec) -> DiagonalVector:
    """𝐃 的对角线 dᵢ = s²ᵢ + (n − ρ − 1)σ²"""
    d = spec.s_sq_array + (spec.n - spec.rho - 1.0) * spec.sigma_sq
    if not np.all(d > 0.0):
        raise ModelSpecError(f"𝐃 出现非正对角项: {d}")
    return DiagonalVector(d=_readonly(d))


def build_dual_information_matrix(spec: ModelSpec) -> DenseSymMatrix:
    """Σ⁻¹_ω = 𝐃 + ρσ²·J_n（对角线沿同一算术路径由 𝐃 得到）"""
    rs = spec.rho * spec.sigma_sq
    values = np.full((spec.n, spec.n), rs)
    values[np.diag_indices(spec.n)] = build_D(spec).d + rs
    return DenseSymMatrix.from_array(values, check=False)


# 置换

def apply_permutation(m: SparseSymMatrix, p: Permutation) -> SparseSymMatrix:
    """𝐏 M 𝐏ᵀ：输出 (r, c) 等于输入 (p⁻¹(r), p⁻¹(c))"""
    if p.dim != m.dim:
        raise ValueError(f"置换维度 {p.dim} 与矩阵维度 {m.dim} 不一致")
    return SparseSymMatrix.from_arrays(m.dim, p.map[m.rows], p.map[m.cols], m.values)


# 随机实例（种子固定，供 verify / bench / 测试使用）

def random_spec(rng: np.random.Generator, n: int, homogeneous: bool = False) -> ModelSpec:
    """ρ ~ U[−0.9, 0.9]，σ² 与 s²ᵢ ~ log-uniform[0.1, 10]"""
    lo, hi = np.log(VARIANCE_RANGE[0]), np.log(VARIANCE_RANGE[1])
    rho = float(rng.uniform(*RHO_RANGE))
    sigma_sq = float(np.exp(rng.uniform(lo, hi)))
    if homogeneous:
        s_sq = (float(np.exp(rng.uniform(lo, hi))),) * n
    else:
        s_sq = tuple(float(v) for v in np.exp(rng.uniform(lo, hi, size=n)))
    return ModelSpec(n=n, rho=rho, sigma_sq=sigma_sq, s_sq=s_sq)


def random_permutation(rng: np.random.Generator, dim: int) -> Permutation:
    return Permutation(rng.permutation(dim))


def parse_s_sq(value: Optional[Sequence[float]], n: int) -> Tuple[float, ...]:
    """标量广播到所有云；列表长度必须为 n"""
    if value is None:
        raise ModelSpecError("缺少 s_sq")
    values = list(value)
    if len(values) == 1:
        return (float(values[0]),) * n
    if len(values) != n:
        raise ModelSpecError(f"s2 列表长度 {len(values)} 与 n = {n} 不一致")
    return tuple(float(v) for v in values)
