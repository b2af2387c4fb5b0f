# -*- coding: utf-8 -*-
"""
命令行模块 - build / det / dual / verify / limit / bench

用法示例:
    python cli.py det --n 4 --rho 0.5 --sigma2 0.666666667 --s2 1,0.5,0.333333333,0.25 --check-oracle
    python cli.py verify --n 6 --rho 0.3 --sigma2 2 --s2 1 --perms 5
    python cli.py bench --sizes 5,10,20 --rho -0.8 --sigma2 1 --s2 1 --out bench.csv
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DUALITY_RESIDUAL_TOL, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_IO, EXIT_OK,
    LOG_FORMAT, OUTPUT_FORMATS, PERMUTATION_TOL, TEXT_SIG_DIGITS,
    parse_float_list, parse_int_list,
)
from settings_manager import get_settings
from graph_core import GraphError, covariance_selection_graph, export_edge_list
from model import (
    ModelSpec, ModelSpecError, Permutation, apply_permutation,
    build_dual_information_matrix, build_information_matrix, parse_s_sq,
    random_permutation,
)
from closed_form import (
    ConsistencyError, LogDetReport, Method, asymptotic_logdet_per_variable,
    build_report, closed_form_logdet, duality_residual, homogeneous_logdet,
)
from oracle import NotPositiveDefinite, OracleCapExceeded, sparse_oracle_logdet
from matrix_io import (
    MatrixMarketError, export_matrix_market, write_bench_csv, write_report_json,
)
from benchmark import all_within, run_bench

logger = logging.getLogger('RepDet')


@dataclass
class CliConfig:
    """一次命令行调用的全部参数（命令行 > 环境变量 > 设置文件 > 默认值）"""
    subcommand: str
    n: Optional[int] = None
    rho: Optional[float] = None
    sigma2: Optional[float] = None
    s2: Tuple[float, ...] = (1.0,)
    seed: int = 42
    tol: float = 1e-8
    oracle_cap: int = 5000
    out: Optional[str] = None
    format: str = 'text'
    # 子命令专用
    method: str = 'closed_form'
    check_oracle: bool = False
    perms: int = 0
    trace: List[int] = field(default_factory=list)
    sizes: List[int] = field(default_factory=list)
    trials: int = 5
    edges: Optional[str] = None
    corrupt: bool = False

    def spec(self) -> ModelSpec:
        """按 ModelSpec 的规则校验；标量 s2 广播到所有云"""
        if self.n is None or self.rho is None or self.sigma2 is None:
            raise ModelSpecError("需要 --n、--rho 和 --sigma2")
        return ModelSpec(n=self.n, rho=self.rho, sigma_sq=self.sigma2,
                         s_sq=parse_s_sq(self.s2, self.n))


def fmt(value: float) -> str:
    """文本输出保留 6 位有效数字"""
    return format(value, f'.{TEXT_SIG_DIGITS}g')


def _emit(text: str = '') -> None:
    sys.stdout.write(text + '\n')


# 子命令

def cmd_build(cfg: CliConfig) -> int:
    """写出 Σ⁻¹ₓ（Matrix Market），打印 N 与非零个数"""
    if not cfg.out:
        raise ModelSpecError("build 需要 --out")
    spec = cfg.spec()
    matrix = build_information_matrix(spec)
    export_matrix_market(matrix, cfg.out, comments=[
        f"information matrix n={spec.n} rho={spec.rho!r} sigma2={spec.sigma_sq!r}",
    ])
    if cfg.edges:
        export_edge_list(covariance_selection_graph(spec.n), cfg.edges)
    _emit(f"N = {matrix.dim}")
    _emit(f"nnz = {matrix.nnz_logical}")
    return EXIT_OK


def cmd_dual(cfg: CliConfig) -> int:
    """写出 Σ⁻¹_ω（Matrix Market）"""
    if not cfg.out:
        raise ModelSpecError("dual 需要 --out")
    spec = cfg.spec()
    dual = build_dual_information_matrix(spec).to_sparse()
    export_matrix_market(dual, cfg.out, comments=[
        f"dual information matrix n={spec.n} rho={spec.rho!r} sigma2={spec.sigma_sq!r}",
    ])
    _emit(f"n = {dual.dim}")
    _emit(f"nnz = {dual.nnz_logical}")
    return EXIT_OK


def _report_text(report: LogDetReport) -> List[str]:
    return [
        f"method            {report.method.value}",
        f"n                 {report.n}",
        f"N                 {report.N}",
        f"ln det Sigma_x    {fmt(report.log_det_primal)}",
        f"ln det Sigma_w    {fmt(report.log_det_dual)}",
        f"ln det K          {fmt(report.log_det_K)}",
        f"duality residual  {fmt(report.duality_residual)}",
    ]


def cmd_det(cfg: CliConfig) -> int:
    """闭式 ln det Σₓ；--check-oracle 时与稠密 Cholesky 比对"""
    spec = cfg.spec()
    report = build_report(spec, Method(cfg.method))

    lines = _report_text(report)
    status = EXIT_OK
    if cfg.check_oracle:
        if spec.N > cfg.oracle_cap:
            # 先判断上限，避免组装巨大的 Σ⁻¹ₓ
            logger.warning(f"跳过 oracle: {OracleCapExceeded(spec.N, cfg.oracle_cap)}")
            lines.append(f"oracle            skipped (N = {spec.N} > cap {cfg.oracle_cap})")
        else:
            oracle_value = -sparse_oracle_logdet(build_information_matrix(spec), cap=cfg.oracle_cap)
            diff = abs(report.log_det_primal - oracle_value)
            ok = diff <= cfg.tol
            logger.info(f"oracle ln det = {fmt(oracle_value)}, abs_diff = {fmt(diff)} "
                        f"({'PASS' if ok else 'FAIL'}, tol = {cfg.tol:g})")
            lines.append(f"oracle ln det     {fmt(oracle_value)}")
            lines.append(f"abs_diff          {fmt(diff)} ({'PASS' if ok else 'FAIL'})")
            if not ok:
                logger.error(f"闭式解与 oracle 不一致: |Δ| = {diff:.3g} > tol = {cfg.tol:g}")
                status = EXIT_CHECK_FAILED

    if cfg.format == 'json':
        write_report_json(report, cfg.out if cfg.out else sys.stdout)
    elif cfg.out:
        with open(cfg.out, 'w', encoding='utf-8', newline='') as f:
            f.write('\n'.join(lines) + '\n')
    else:
        _emit('\n'.join(lines))
    return status


def _check_line(name: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'}  {name:<22} {detail}"


def cmd_verify(cfg: CliConfig) -> int:
    """(a) oracle 对闭式解 (b) 对偶残差 (c) 置换不变性"""
    spec = cfg.spec()
    if spec.N > cfg.oracle_cap:
        raise ModelSpecError(f"verify 要求 N ≤ oracle 上限: N = {spec.N}, cap = {cfg.oracle_cap}")

    matrix = build_information_matrix(spec)
    checked = matrix
    if cfg.corrupt:
        # 负对照：把第一个对角项加倍，矩阵仍正定但行列式改变
        checked = matrix.with_value(0, 0, 2.0 * matrix.get(0, 0))
        logger.warning("已启用 --corrupt，检查 (a) 应当失败")

    results: List[Tuple[str, bool, str]] = []

    closed = closed_form_logdet(spec)
    try:
        base_precision = sparse_oracle_logdet(checked, cap=cfg.oracle_cap)
    except NotPositiveDefinite as e:
        results.append(('oracle', False, str(e)))
        base_precision = None
    else:
        rel = abs(closed + base_precision) / max(1.0, abs(base_precision))
        results.append(('oracle', rel <= cfg.tol, f"rel = {fmt(rel)} (tol {cfg.tol:g})"))

    residual = duality_residual(spec)
    results.append(('duality', residual <= DUALITY_RESIDUAL_TOL,
                    f"residual = {fmt(residual)} (tol {DUALITY_RESIDUAL_TOL:g})"))

    if base_precision is not None:
        rng = np.random.default_rng(cfg.seed)
        perms = [('perm[identity]', Permutation.identity(spec.N))]
        perms += [(f"perm[{k}]", random_permutation(rng, spec.N)) for k in range(cfg.perms)]
        for name, p in perms:
            value = sparse_oracle_logdet(apply_permutation(checked, p), cap=cfg.oracle_cap)
            diff = abs(value - base_precision) / max(1.0, abs(base_precision))
            results.append((name, diff <= PERMUTATION_TOL, f"rel = {fmt(diff)}"))

    for name, ok, detail in results:
        _emit(_check_line(name, ok, detail))
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        logger.error(f"校验失败: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    logger.info(f"全部 {len(results)} 项校验通过")
    return EXIT_OK


def cmd_limit(cfg: CliConfig) -> int:
    """极限 2 ln σ + ½ ln(1−ρ²)；--trace 给出齐次模型的逐项逼近"""
    if cfg.rho is None or cfg.sigma2 is None:
        raise ModelSpecError("limit 需要 --rho 和 --sigma2")
    limit = asymptotic_logdet_per_variable(cfg.rho, cfg.sigma2)
    _emit(f"limit  {fmt(limit)}")

    if cfg.trace and len(set(cfg.s2)) != 1:
        raise ModelSpecError("limit --trace 只支持齐次模型（标量 --s2）")
    s_sq = cfg.s2[0]
    for n in cfg.trace:
        per_variable = homogeneous_logdet(n, cfg.rho, cfg.sigma2, s_sq) / (n * (n - 1))
        _emit(f"n = {n:<8d} a_n = {fmt(per_variable):<14} |a_n - limit| = {fmt(abs(per_variable - limit))}")
    return EXIT_OK


def cmd_bench(cfg: CliConfig) -> int:
    """CSV 基准；oracle 只在 N ≤ 上限时运行"""
    if not cfg.sizes:
        raise ModelSpecError("bench 需要 --sizes")
    if cfg.rho is None or cfg.sigma2 is None:
        raise ModelSpecError("bench 需要 --rho 和 --sigma2")
    records = run_bench(cfg.sizes, cfg.rho, cfg.sigma2, cfg.s2,
                        trials=cfg.trials, oracle_cap=cfg.oracle_cap)
    write_bench_csv(records, cfg.out if cfg.out else sys.stdout)
    if not all_within(records, cfg.tol):
        logger.error("存在 abs_diff 超出容差的规模")
        return EXIT_CHECK_FAILED
    return EXIT_OK


COMMANDS: Dict[str, Callable[[CliConfig], int]] = {
    'build': cmd_build,
    'det': cmd_det,
    'dual': cmd_dual,
    'verify': cmd_verify,
    'limit': cmd_limit,
    'bench': cmd_bench,
}


# 参数解析

def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(parse_float_list(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _int_list(text: str) -> List[int]:
    try:
        return parse_int_list(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--n', type=int, help='云的个数 n（N = n(n−1)）')
    common.add_argument('--rho', type=float, help='相关系数 ρ ∈ (−1, 1)')
    common.add_argument('--sigma2', type=float, help='成对方差 σ² > 0')
    common.add_argument('--s2', type=_float_list, default=(1.0,),
                        help='一元方差 s²：标量（广播）或逗号分隔列表')
    common.add_argument('--seed', type=int, help='随机种子（默认 42）')
    common.add_argument('--tol', type=float, help='oracle 容差（默认 1e-8）')
    common.add_argument('--oracle-cap', dest='oracle_cap', type=int, help='oracle 最大维度')
    common.add_argument('--out', help='输出文件')
    common.add_argument('--format', choices=OUTPUT_FORMATS, help='输出格式')
    common.add_argument('--settings', help='设置文件（JSON）')
    common.add_argument('-v', '--verbose', action='store_true', help='调试日志')
    common.add_argument('--log-file', dest='log_file', help='同时写入日志文件')

    parser = argparse.ArgumentParser(
        prog='repdet',
        description='𝒦ₙ ∘ 𝒦ₙ₋₁ 高斯图模型的精确对数行列式',
    )
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('build', parents=[common], help='导出 Σ⁻¹ₓ')
    p.add_argument('--edges', help='同时导出协方差选择图的边列表')

    p = sub.add_parser('det', parents=[common], help='闭式 ln det Σₓ')
    p.add_argument('--method', choices=[Method.CLOSED_FORM.value, Method.HOMOGENEOUS.value],
                   default=Method.CLOSED_FORM.value)
    p.add_argument('--check-oracle', dest='check_oracle', action='store_true',
                   help='与稠密 Cholesky 比对')

    sub.add_parser('dual', parents=[common], help='导出 Σ⁻¹_ω')

    p = sub.add_parser('verify', parents=[common], help='oracle / 对偶 / 置换校验')
    p.add_argument('--perms', type=int, default=0, help='随机置换个数')
    p.add_argument('--corrupt', action='store_true', help=argparse.SUPPRESS)

    p = sub.add_parser('limit', parents=[common], help='N → ∞ 的每变量对数行列式')
    p.add_argument('--trace', type=_int_list, default=[], help='逗号分隔的 n 列表')

    p = sub.add_parser('bench', parents=[common], help='闭式解 vs Cholesky 基准')
    p.add_argument('--sizes', type=_int_list, default=[], help='逗号分隔的 n 列表')
    p.add_argument('--trials', type=int, help='每格测量次数（取中位数）')

    return parser


def config_from_args(args: argparse.Namespace) -> CliConfig:
    """合并命令行参数与设置"""
    settings = get_settings()
    if getattr(args, 'settings', None):
        settings.load_from(args.settings)

    def pick(name: str, key: str):
        value = getattr(args, name, None)
        return settings.get(key) if value is None else value

    return CliConfig(
        subcommand=args.subcommand,
        n=args.n,
        rho=args.rho,
        sigma2=args.sigma2,
        s2=tuple(args.s2),
        seed=pick('seed', 'seed'),
        tol=pick('tol', 'tol'),
        oracle_cap=pick('oracle_cap', 'oracle_cap'),
        out=args.out,
        format=pick('format', 'format'),
        method=getattr(args, 'method', Method.CLOSED_FORM.value),
        check_oracle=getattr(args, 'check_oracle', False),
        perms=getattr(args, 'perms', 0),
        trace=getattr(args, 'trace', []),
        sizes=getattr(args, 'sizes', []),
        trials=pick('trials', 'bench_trials'),
        edges=getattr(args, 'edges', None),
        corrupt=getattr(args, 'corrupt', False),
    )


def setup_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    """日志写到 stderr（stdout 留给结果），可选同时写文件"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.verbose, args.log_file)
    except OSError as e:
        setup_logging(args.verbose)
        logger.error(f"无法打开日志文件: {e}")
        return EXIT_IO

    try:
        cfg = config_from_args(args)
        logger.debug(f"配置: {cfg}")
        return COMMANDS[cfg.subcommand](cfg)
    except (ModelSpecError, GraphError, MatrixMarketError) as e:
        logger.error(f"参数无效: {e}")
        return EXIT_INVALID
    except (ConsistencyError, NotPositiveDefinite) as e:
        logger.error(f"数值校验失败: {e}")
        return EXIT_CHECK_FAILED
    except OSError as e:
        logger.error(f"文件读写失败: {e}")
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
