# -*- coding: utf-8 -*-
"""
设置管理器模块 - 运行参数的设置文件与环境变量覆盖
"""

import json
import os
import logging
from typing import Any, Dict

from config import (
    DEFAULT_SEED, DEFAULT_TOL, DEFAULT_ORACLE_CAP, ORACLE_CAP_ENV,
    BENCH_TRIALS, OUTPUT_FORMATS,
)

logger = logging.getLogger('RepDet.Settings')

# 设置文件路径
SETTINGS_FILE = 'repdet_settings.json'
SETTINGS_ENV = 'REPDET_SETTINGS'

# 默认设置
DEFAULT_SETTINGS = {
    # 随机性
    'seed': DEFAULT_SEED,

    # 校验
    'tol': DEFAULT_TOL,
    'oracle_cap': DEFAULT_ORACLE_CAP,

    # 基准测试
    'bench_trials': BENCH_TRIALS,

    # 输出
    'format': 'text',
}

# 设置验证规则
SETTINGS_VALIDATORS = {
    'seed': lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
    'tol': lambda v: isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0,
    'oracle_cap': lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1,
    'bench_trials': lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 1,
    'format': lambda v: v in OUTPUT_FORMATS,
}


class SettingsManager:
    """
    设置管理器 - 负责运行设置的加载和验证（只读）

    优先级：命令行参数 > 环境变量 > 设置文件 > 默认值
    （命令行覆盖在 cli 中完成）
    """

    _instance = None

    def __new__(cls):
        """单例模式"""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._settings_file = os.environ.get(SETTINGS_ENV, SETTINGS_FILE)
        self._settings: Dict[str, Any] = {}
        self._load_settings()
        self._apply_env_overrides()
        self._initialized = True

    @property
    def settings_file(self) -> str:
        return self._settings_file

    def _load_settings(self) -> None:
        """从文件加载设置"""
        try:
            if os.path.exists(self._settings_file):
                with open(self._settings_file, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)

                # 合并加载的设置和默认设置
                self._settings = DEFAULT_SETTINGS.copy()
                for key, value in loaded.items():
                    if key in DEFAULT_SETTINGS and self._validate_setting(key, value):
                        self._settings[key] = value
                    else:
                        logger.warning(f"忽略无效设置项: {key}={value!r}")

                logger.info(f"设置已从 {self._settings_file} 加载")
            else:
                self._settings = DEFAULT_SETTINGS.copy()
                logger.debug("使用默认设置")

        except json.JSONDecodeError as e:
            logger.error(f"设置文件格式错误: {e}")
            self._settings = DEFAULT_SETTINGS.copy()
        except OSError as e:
            logger.error(f"加载设置失败: {e}")
            self._settings = DEFAULT_SETTINGS.copy()

    def _apply_env_overrides(self) -> None:
        """应用环境变量覆盖（目前只有 oracle 上限）"""
        raw = os.environ.get(ORACLE_CAP_ENV)
        if raw is None:
            return
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"{ORACLE_CAP_ENV}={raw!r} 不是整数，已忽略")
            return
        if self._validate_setting('oracle_cap', value):
            self._settings['oracle_cap'] = value
            logger.debug(f"oracle_cap 被环境变量覆盖为 {value}")
        else:
            logger.warning(f"{ORACLE_CAP_ENV}={raw!r} 超出范围，已忽略")

    def _validate_setting(self, key: str, value: Any) -> bool:
        """验证单个设置值"""
        if key in SETTINGS_VALIDATORS:
            try:
                return SETTINGS_VALIDATORS[key](value)
            except Exception:
                return False
        return True

    def load_from(self, path: str) -> None:
        """切换到另一个设置文件并重新加载"""
        self._settings_file = path
        self._load_settings()
        self._apply_env_overrides()

    def get(self, key: str, default: Any = None) -> Any:
        """获取设置值"""
        return self._settings.get(key, default if default is not None else DEFAULT_SETTINGS.get(key))


def get_settings() -> SettingsManager:
    """获取设置管理器实例（首次调用时加载）"""
    return SettingsManager()
