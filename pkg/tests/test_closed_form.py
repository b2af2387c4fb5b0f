# -*- coding: utf-8 -*-
"""
closed_form.py 单元测试
"""

import sys
import os
import math
import time
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
import numpy as np


def example1_spec():
    from model import ModelSpec
    return ModelSpec(n=4, rho=0.5, sigma_sq=2.0 / 3.0, s_sq=(1.0, 1.0 / 2, 1.0 / 3, 1.0 / 4))


def homogeneous_family_log(n):
    """ρ=−4/5、σ²=1、s²=1 族的精确整数公式取对数"""
    numerator = 3 ** (n * (n - 1))
    denominator = (n + 4) * (5 * n + 4) ** (n - 1) * 5 ** (n * (n - 2))
    return math.log(numerator) - math.log(denominator)


class TestLogDetK:
    """ln det 𝐊 测试"""

    def test_values(self):
        """σ⁴(1 − ρ²)"""
        from closed_form import log_det_K

        assert log_det_K(-0.8, 1.0) == pytest.approx(math.log(9 / 25), rel=1e-14)
        assert log_det_K(0.5, 2.0 / 3.0) == pytest.approx(math.log(1 / 3), rel=1e-14)
        assert log_det_K(0.0, 1.0) == 0.0

    def test_invalid(self):
        """ρ 越界报错"""
        from closed_form import log_det_K
        from model import ModelSpecError

        with pytest.raises(ModelSpecError):
            log_det_K(1.0, 1.0)


class TestClosedForm:
    """闭式 ln det Σₓ 测试"""

    def test_example1(self):
        """n=4、ρ=1/2、σ²=2/3、s²ᵢ=1/i → ≈ −13.35"""
        from closed_form import closed_form_logdet, exact_logdet

        value = closed_form_logdet(example1_spec())
        assert value == pytest.approx(-13.35, abs=0.01)
        exact = exact_logdet(4, Fraction(1, 2), Fraction(2, 3),
                             [Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)])
        assert value == pytest.approx(exact, rel=1e-12)

    def test_example1_fast(self):
        """单次求值远小于 10 ms"""
        from closed_form import closed_form_logdet

        spec = example1_spec()
        closed_form_logdet(spec)
        start = time.perf_counter()
        closed_form_logdet(spec)
        assert time.perf_counter() - start < 0.01

    def test_example2(self):
        """n=3、ρ=−4/5 → ln(729/315875)"""
        from closed_form import closed_form_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(3, -0.8, 1.0, 1.0)
        assert closed_form_logdet(spec) == pytest.approx(math.log(729 / 315875), rel=1e-12)

    def test_uncoupled_n2(self):
        """n=2、ρ=0 → ln(1/4)"""
        from closed_form import closed_form_logdet
        from model import ModelSpec

        spec = ModelSpec(n=2, rho=0.0, sigma_sq=1.0, s_sq=(1.0, 1.0))
        assert closed_form_logdet(spec) == pytest.approx(math.log(0.25), abs=1e-15)

    @pytest.mark.parametrize('n', range(3, 13))
    def test_homogeneous_family(self, n):
        """n = 3…12 与精确整数公式的相对误差 ≤ 1e−12"""
        from closed_form import closed_form_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(n, -0.8, 1.0, 1.0)
        expected = homogeneous_family_log(n)
        assert abs(closed_form_logdet(spec) - expected) <= 1e-12 * abs(expected)

    def test_family_matches_exact_det(self):
        """Fraction 精确求值与整数公式一致"""
        from closed_form import exact_det

        for n in range(3, 9):
            value = exact_det(n, Fraction(-4, 5), 1, 1)
            expected = Fraction(
                3 ** (n * (n - 1)),
                (n + 4) * (5 * n + 4) ** (n - 1) * 5 ** (n * (n - 2)),
            )
            assert value == expected
        assert exact_det(3, Fraction(-4, 5), 1, 1) == Fraction(729, 315875)

    def test_n10_integer_formula(self):
        """n=10 → ln(3⁹⁰ / (14·54⁹·5⁸⁰))"""
        from closed_form import closed_form_logdet
        from model import ModelSpec

        expected = math.log(3 ** 90) - math.log(14 * 54 ** 9 * 5 ** 80)
        spec = ModelSpec.homogeneous_model(10, -0.8, 1.0, 1.0)
        assert closed_form_logdet(spec) == pytest.approx(expected, rel=1e-12)

    def test_random_against_exact(self):
        """随机有理参数下与 Fraction 精确值一致"""
        from closed_form import closed_form_logdet, exact_logdet
        from model import ModelSpec

        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 15))
            rho = Fraction(int(rng.integers(-9, 10)), 10)
            sigma_sq = Fraction(int(rng.integers(1, 30)), 4)
            s_sq = [Fraction(int(k), 8) for k in rng.integers(1, 40, size=n)]
            spec = ModelSpec(n=n, rho=float(rho), sigma_sq=float(sigma_sq),
                             s_sq=tuple(float(s) for s in s_sq))
            expected = exact_logdet(n, rho, sigma_sq, s_sq)
            assert closed_form_logdet(spec) == pytest.approx(expected, rel=1e-11, abs=1e-11)

    def test_large_n_fast(self):
        """n = 10⁵ 在 1 秒内完成"""
        from closed_form import closed_form_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(100_000, -0.8, 1.0, 1.0)
        start = time.perf_counter()
        value = closed_form_logdet(spec)
        assert time.perf_counter() - start < 1.0
        assert math.isfinite(value)

    def test_finite_at_1e6(self):
        """n = 10⁶ 时结果仍有限（线性域早已下溢）"""
        from closed_form import closed_form_logdet, dual_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(1_000_000, 0.5, 2.0 / 3.0, 1.0)
        assert math.isfinite(closed_form_logdet(spec))
        assert math.isfinite(dual_logdet(spec))


class TestHomogeneous:
    """齐次特例测试"""

    def test_example2(self):
        """n=3 与一般闭式解一致"""
        from closed_form import homogeneous_logdet

        assert homogeneous_logdet(3, -0.8, 1.0, 1.0) == pytest.approx(math.log(729 / 315875), rel=1e-12)

    def test_uncoupled_n2(self):
        """n=2、ρ=0 → ln(1/4)"""
        from closed_form import homogeneous_logdet

        assert homogeneous_logdet(2, 0.0, 1.0, 1.0) == pytest.approx(math.log(0.25), abs=1e-15)

    @pytest.mark.parametrize('n', [2, 3, 5, 10, 100, 1000, 10_000])
    def test_consistency(self, n):
        """两条独立代码路径一致"""
        from closed_form import closed_form_logdet, homogeneous_logdet
        from model import ModelSpec

        for rho, sigma_sq, s_sq in [(-0.8, 1.0, 1.0), (0.5, 2.0 / 3.0, 0.3), (0.0, 3.0, 7.0)]:
            spec = ModelSpec.homogeneous_model(n, rho, sigma_sq, s_sq)
            a = closed_form_logdet(spec)
            b = homogeneous_logdet(n, rho, sigma_sq, s_sq)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_invalid(self):
        """参数校验与 ModelSpec 相同"""
        from closed_form import homogeneous_logdet
        from model import ModelSpecError

        with pytest.raises(ModelSpecError):
            homogeneous_logdet(1, 0.1, 1.0, 1.0)
        with pytest.raises(ModelSpecError):
            homogeneous_logdet(4, 0.1, 1.0, 0.0)
        with pytest.raises(ModelSpecError):
            homogeneous_logdet(4, 0.1, 1.0, True)
        with pytest.raises(ModelSpecError):
            homogeneous_logdet(4, 0.1, 1.0, '1')

    @pytest.mark.parametrize('s_sq', [1, 1.0, Fraction(1), np.float32(1.0), np.float64(1.0), np.int64(1)])
    def test_accepts_same_numbers_as_model_spec(self, s_sq):
        """与 ModelSpec 接受同样的数值类型，结果一致"""
        from closed_form import closed_form_logdet, homogeneous_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(3, Fraction(-4, 5), np.float32(1.0), s_sq)
        value = homogeneous_logdet(np.int64(3), Fraction(-4, 5), np.float32(1.0), s_sq)
        assert value == pytest.approx(closed_form_logdet(spec), rel=1e-12)
        assert value == pytest.approx(math.log(729 / 315875), rel=1e-12)


class TestAsymptoticLimit:
    """N → ∞ 极限测试"""

    def test_values(self):
        """ρ=−0.8, σ²=1 → ln(3/5)；ρ=0 → 0；ρ=1/2, σ²=2/3 → ½ ln(1/3)"""
        from closed_form import asymptotic_logdet_per_variable

        assert asymptotic_logdet_per_variable(-0.8, 1.0) == pytest.approx(math.log(3 / 5), rel=1e-14)
        assert asymptotic_logdet_per_variable(0.0, 1.0) == 0.0
        assert asymptotic_logdet_per_variable(0.5, 2.0 / 3.0) == pytest.approx(0.5 * math.log(1 / 3), rel=1e-14)

    def test_convergence(self):
        """|aₙ − 极限| 从 n=8 起单调下降，n=200 时 < 0.05"""
        from closed_form import asymptotic_logdet_per_variable, homogeneous_logdet

        limit = asymptotic_logdet_per_variable(-0.8, 1.0)
        gaps = []
        for n in (8, 16, 32, 64, 128, 200):
            a_n = homogeneous_logdet(n, -0.8, 1.0, 1.0) / (n * (n - 1))
            gaps.append(abs(a_n - limit))
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.05

    def test_convergence_example1_params(self):
        """ρ=1/2, σ²=2/3 的齐次模型同样收敛"""
        from closed_form import asymptotic_logdet_per_variable, homogeneous_logdet

        limit = asymptotic_logdet_per_variable(0.5, 2.0 / 3.0)
        a_200 = homogeneous_logdet(200, 0.5, 2.0 / 3.0, 1.0) / (200 * 199)
        assert abs(a_200 - limit) < 0.05


class TestDual:
    """对偶侧与矩阵行列式引理测试"""

    def test_dual_example2(self):
        """n=3 → −ln((7/5)·(19/5)²)，特征值 7/5 与二重 19/5"""
        from closed_form import dual_logdet
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(3, -0.8, 1.0, 1.0)
        assert dual_logdet(spec) == pytest.approx(-math.log(7 / 5 * (19 / 5) ** 2), rel=1e-13)

    def test_dual_example1(self):
        """由 𝐃 的迹与乘积得到"""
        from closed_form import dual_logdet

        d = [8 / 3, 13 / 6, 2, 23 / 12]
        correction = 1 + sum(1 / x for x in d) / 3
        assert correction == pytest.approx(1.619426, abs=1e-6)
        expected = -math.log(correction * 4784 / 216)
        assert dual_logdet(example1_spec()) == pytest.approx(expected, abs=1e-6)

    def test_dual_uncoupled(self):
        """ρ=0 → −Σ ln(s²ᵢ + (n−1)σ²)"""
        from closed_form import dual_logdet
        from model import ModelSpec

        spec = ModelSpec(n=3, rho=0.0, sigma_sq=2.0, s_sq=(1.0, 2.0, 3.0))
        assert dual_logdet(spec) == pytest.approx(-math.log(5 * 6 * 7), rel=1e-14)

    def test_dual_matches_numpy(self):
        """与 numpy slogdet 在稠密 Σ⁻¹_ω 上一致"""
        from closed_form import dual_logdet
        from model import build_dual_information_matrix, random_spec

        rng = np.random.default_rng(9)
        for _ in range(30):
            spec = random_spec(rng, int(rng.integers(2, 20)))
            sign, logdet = np.linalg.slogdet(build_dual_information_matrix(spec).values)
            assert sign > 0
            assert dual_logdet(spec) == pytest.approx(-logdet, rel=1e-10, abs=1e-10)

    def test_lemma(self):
        """det(B + uvᵀ) = (1 + vᵀB⁻¹u)·det B"""
        from closed_form import matrix_determinant_lemma_logdet

        rng = np.random.default_rng(2)
        for _ in range(10):
            b = rng.uniform(0.5, 3.0, size=6)
            u = rng.uniform(0.0, 1.0, size=6)
            v = rng.uniform(0.0, 1.0, size=6)
            _, expected = np.linalg.slogdet(np.diag(b) + np.outer(u, v))
            assert matrix_determinant_lemma_logdet(b, u, v) == pytest.approx(expected, rel=1e-12)

    def test_lemma_non_positive(self):
        """1 + vᵀB⁻¹u ≤ 0 或 B 非正时报 ConsistencyError"""
        from closed_form import ConsistencyError, matrix_determinant_lemma_logdet

        with pytest.raises(ConsistencyError):
            matrix_determinant_lemma_logdet([1.0, 1.0], [-1.0, -1.0], [1.0, 1.0])
        with pytest.raises(ConsistencyError):
            matrix_determinant_lemma_logdet([1.0, 0.0], [1.0, 1.0], [1.0, 1.0])


class TestDuality:
    """原始/对偶关系测试"""

    def test_residual_random(self):
        """500 个随机实例（n ≤ 30）残差 ≤ 1e−10"""
        from closed_form import duality_residual
        from model import random_spec

        rng = np.random.default_rng(42)
        for _ in range(500):
            spec = random_spec(rng, int(rng.integers(2, 31)))
            assert duality_residual(spec) <= 1e-10

    def test_residual_example1(self):
        """数值例子 1 残差 < 1e−12"""
        from closed_form import duality_residual

        assert duality_residual(example1_spec()) < 1e-12

    def test_residual_n500(self):
        """n=500 齐次模型残差 < 1e−9"""
        from closed_form import duality_residual
        from model import ModelSpec

        assert duality_residual(ModelSpec.homogeneous_model(500, -0.8, 1.0, 1.0)) < 1e-9

    def test_scale(self):
        """ln[det Σₓ / det Σ_ω] = |ℰ|·ln det K + Σ ln s²ᵢ"""
        from closed_form import duality_scale_log

        expected = 6 * math.log(1 / 3) + math.log(1 / 24)
        assert duality_scale_log(example1_spec()) == pytest.approx(expected, rel=1e-14)

    def test_partition_functions(self):
        """Z_ω = (2π)^N·Zₓ"""
        from closed_form import LOG_2PI, log_partition_dual, log_partition_primal, partition_scale_residual
        from model import random_spec

        rng = np.random.default_rng(17)
        for _ in range(50):
            spec = random_spec(rng, int(rng.integers(2, 31)))
            assert partition_scale_residual(spec) <= 1e-9
            gap = log_partition_dual(spec) - log_partition_primal(spec)
            assert gap == pytest.approx(spec.N * LOG_2PI, rel=1e-12)


class TestEntropy:
    """微分熵测试"""

    def test_uncoupled_n2(self):
        """ln(2πe) + ½·ln(1/4)"""
        from closed_form import differential_entropy
        from model import ModelSpec

        spec = ModelSpec(n=2, rho=0.0, sigma_sq=1.0, s_sq=(1.0, 1.0))
        expected = math.log(2 * math.pi * math.e) + 0.5 * math.log(0.25)
        assert differential_entropy(spec) == pytest.approx(expected, rel=1e-14)

    def test_example1(self):
        """6·ln(2πe) − 13.35/2 ± 0.005"""
        from closed_form import differential_entropy

        expected = 6 * math.log(2 * math.pi * math.e) - 13.35 / 2
        assert differential_entropy(example1_spec()) == pytest.approx(expected, abs=0.005)

    def test_example2(self):
        """3·ln(2πe) + ½·ln(729/315875)"""
        from closed_form import differential_entropy
        from model import ModelSpec

        spec = ModelSpec.homogeneous_model(3, -0.8, 1.0, 1.0)
        expected = 3 * math.log(2 * math.pi * math.e) + 0.5 * math.log(729 / 315875)
        assert differential_entropy(spec) == pytest.approx(expected, rel=1e-12)


class TestReport:
    """报告测试"""

    def test_closed_form_report(self):
        """字段与各函数一致"""
        from closed_form import Method, build_report, closed_form_logdet, dual_logdet

        spec = example1_spec()
        r = build_report(spec)
        assert r.method is Method.CLOSED_FORM
        assert (r.n, r.N) == (4, 12)
        assert r.log_det_primal == closed_form_logdet(spec)
        assert r.log_det_dual == dual_logdet(spec)
        assert r.log_det_K == pytest.approx(math.log(1 / 3))
        assert r.duality_residual < 1e-12

    def test_homogeneous_report(self):
        """homogeneous 方法只接受齐次模型"""
        from closed_form import Method, build_report
        from model import ModelSpec, ModelSpecError

        spec = ModelSpec.homogeneous_model(3, -0.8, 1.0, 1.0)
        r = build_report(spec, Method.HOMOGENEOUS)
        assert r.log_det_primal == pytest.approx(math.log(729 / 315875), rel=1e-12)
        with pytest.raises(ModelSpecError):
            build_report(example1_spec(), Method.HOMOGENEOUS)

    def test_oracle_method_rejected(self):
        """oracle 报告需走 report_from_oracle"""
        from closed_form import Method, build_report, report_from_oracle

        with pytest.raises(ValueError):
            build_report(example1_spec(), Method.ORACLE)
        r = report_from_oracle(example1_spec(), 13.3497)
        assert r.method is Method.ORACLE
        assert r.log_det_primal == -13.3497

    def test_dict_roundtrip(self):
        """to_dict / from_dict"""
        from closed_form import LogDetReport, build_report

        r = build_report(example1_spec())
        data = r.to_dict()
        assert data['method'] == 'closed_form'
        assert LogDetReport.from_dict(data) == r


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
