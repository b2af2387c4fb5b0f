# -*- coding: utf-8 -*-
"""
配置模块 - 系统参数定义
"""

from typing import List

# 随机性配置
DEFAULT_SEED = 42

# 数值容差
DEFAULT_TOL = 1e-8              # 闭式解 vs Cholesky（相对误差）
DUALITY_RESIDUAL_TOL = 1e-10    # 原始/对偶恒等式残差
PERMUTATION_TOL = 1e-10         # 置换不变性
FACTOR_RESIDUAL_TOL = 1e-12     # ‖LLᵀ − M‖_F / ‖M‖_F，按维度放大
LOG1P_SWITCH = 0.5              # |x| 小于该值时用 log1p 计算 ln(1+x)

# Oracle 配置
DEFAULT_ORACLE_CAP = 5000
ORACLE_CAP_ENV = 'REPDET_ORACLE_CAP'

# 参数采样分布（verify / bench / 属性测试共用）
RHO_RANGE = (-0.9, 0.9)
VARIANCE_RANGE = (0.1, 10.0)    # σ² 与 s²ᵢ 的 log-uniform 区间

# 基准测试配置
BENCH_TRIALS = 5
BENCH_WARMUP = 1
BENCH_DEFAULT_SIZES = [5, 10, 20]
SCALING_DIMS = [100, 200, 400, 800]
MIN_CUBIC_EXPONENT = 2.7
SCALING_BATCH_ELEMENTS = 800 * 800    # 计时时每叠矩阵的元素总数约为常数

# 输出配置
TEXT_SIG_DIGITS = 6
MM_SIG_DIGITS = 17
MM_BANNER = '%%MatrixMarket matrix coordinate real symmetric'
REPORT_KEYS = (
    'n', 'N', 'log_det_primal', 'log_det_dual', 'log_det_K',
    'duality_residual', 'method',
)
BENCH_CSV_HEADER = (
    'n', 'N', 'closed_form_ns', 'oracle_ns',
    'log_det_primal', 'oracle_log_det', 'abs_diff',
)
OUTPUT_FORMATS = ['text', 'json']

# 退出码
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_IO = 3

# 日志配置
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


# 辅助函数

def variable_count(n: int) -> int:
    """变量个数 N = n(n−1)"""
    return n * (n - 1)


def edge_count(n: int) -> int:
    """𝒦ₙ 的边数 |ℰ| = n(n−1)/2"""
    return n * (n - 1) // 2


def parse_float_list(text: str) -> List[float]:
    """解析逗号分隔的实数列表，如 "1,0.5,0.25" """
    parts = [p.strip() for p in str(text).split(',')]
    if not parts or any(p == '' for p in parts):
        raise ValueError(f"无法解析实数列表: {text!r}")
    return [float(p) for p in parts]


def parse_int_list(text: str) -> List[int]:
    """解析逗号分隔的整数列表，如 "10,50,200" """
    parts = [p.strip() for p in str(text).split(',')]
    if not parts or any(p == '' for p in parts):
        raise ValueError(f"无法解析整数列表: {text!r}")
    return [int(p) for p in parts]
