# report_generator.py
"""
Report generation: canonical JSON text and trajectory tables
"""

import logging
import math
import os
import sys
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from ..config.data_structures import RDESolution

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '.17g'


def format_number(value: float) -> str:
    """17 significant digits; non-finite values become null"""
    if not math.isfinite(value):
        return 'null'
    return format(value, FLOAT_FORMAT)


def _string(text: str) -> str:
    escaped = (text.replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n')
               .replace('\r', '\\r').replace('\t', '\\t'))
    return f'"{escaped}"'


def to_json_text(value: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialize reports with every float at 17 significant digits and keys in insertion order"""
    pad = ' ' * (indent * (_level + 1))
    close = ' ' * (indent * _level)

    if value is None:
        return 'null'
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(float(value))
    if isinstance(value, str):
        return _string(value)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        if not value:
            return '{}'
        items = [f"{pad}{_string(str(k))}: {to_json_text(v, indent, _level + 1)}" for k, v in value.items()]
        return '{\n' + ',\n'.join(items) + '\n' + close + '}'
    if isinstance(value, (list, tuple)):
        if not value:
            return '[]'
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in value):
            return '[' + ', '.join(to_json_text(v, indent, _level + 1) for v in value) + ']'
        items = [pad + to_json_text(v, indent, _level + 1) for v in value]
        return '[\n' + ',\n'.join(items) + '\n' + close + ']'
    raise TypeError(f"cannot serialize {type(value).__name__} in a report")


class ReportGenerator:
    """Writes one subcommand report to stdout or a file"""

    def __init__(self, report: Dict[str, Any]):
        self.report = report

    def render(self) -> str:
        return to_json_text(self.report) + '\n'

    def write(self, output_path: Optional[str] = None):
        text = self.render()
        if output_path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info("✅ Report written to %s", output_path)

    @staticmethod
    def trajectory_frame(solution: RDESolution) -> pd.DataFrame:
        columns = {'time': solution.times}
        for i in range(solution.states.shape[1]):
            columns[f'y{i + 1}'] = solution.states[:, i]
        return pd.DataFrame(columns)

    @staticmethod
    def export_trajectory_csv(solution: RDESolution, csv_path: str) -> str:
        """Time and state columns, one row per sample time"""
        directory = os.path.dirname(csv_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        ReportGenerator.trajectory_frame(solution).to_csv(csv_path, index=False, float_format='%.17g')
        logger.info("✅ Trajectory table written to %s", csv_path)
        return csv_path
