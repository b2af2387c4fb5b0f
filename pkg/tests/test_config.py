# -*- coding: utf-8 -*-
"""
config.py 单元测试 - 测试辅助函数
"""

import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
from config import (
    variable_count,
    edge_count,
    parse_float_list,
    parse_int_list,
    BENCH_CSV_HEADER,
    REPORT_KEYS,
    DEFAULT_SEED,
    DEFAULT_ORACLE_CAP,
)


class TestCounts:
    """变量数与边数测试"""

    def test_variable_count(self):
        """N = n(n−1)"""
        assert variable_count(2) == 2
        assert variable_count(4) == 12
        assert variable_count(30) == 870

    def test_edge_count(self):
        """|ℰ| = n(n−1)/2，N = 2|ℰ|"""
        for n in range(2, 20):
            assert 2 * edge_count(n) == variable_count(n)
        assert edge_count(7) == 21


class TestParseLists:
    """逗号分隔列表解析测试"""

    def test_floats(self):
        """实数列表，允许空格"""
        assert parse_float_list('1, 0.5,0.25') == [1.0, 0.5, 0.25]
        assert parse_float_list('2') == [2.0]

    def test_ints(self):
        """整数列表"""
        assert parse_int_list('5,10,20') == [5, 10, 20]

    @pytest.mark.parametrize('text', ['', '1,,2', '1,', 'a,b'])
    def test_invalid(self, text):
        """空项或非数字报 ValueError"""
        with pytest.raises(ValueError):
            parse_float_list(text)
        with pytest.raises(ValueError):
            parse_int_list(text)

    def test_int_rejects_float(self):
        """整数列表不接受小数"""
        with pytest.raises(ValueError):
            parse_int_list('1.5')


class TestConstants:
    """常量测试"""

    def test_defaults(self):
        """默认种子与 oracle 上限"""
        assert DEFAULT_SEED == 42
        assert DEFAULT_ORACLE_CAP == 5000

    def test_schemas(self):
        """报告与 CSV 的字段顺序"""
        assert ','.join(BENCH_CSV_HEADER) == 'n,N,closed_form_ns,oracle_ns,log_det_primal,oracle_log_det,abs_diff'
        assert len(REPORT_KEYS) == 7


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
