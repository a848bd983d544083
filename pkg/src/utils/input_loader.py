# input_loader.py
"""
Loading and checking of JSON inputs: files given to --vf, --path, --rough
and inline vectors such as --start "[1, 0]"
"""

import json
import logging
import os
from typing import Any, List

import numpy as np

from ..config.data_structures import PiecewiseLinearPath, RoughPathL2
from ..core.exceptions import InputError, ToolkitError
from ..fields.vector_fields import FamilyFactory, VectorFieldFamily

logger = logging.getLogger(__name__)


def parse_json_text(text: str, source: str = "<input>") -> Any:
    """json.loads with decode errors turned into position-bearing InputErrors"""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{source}: malformed JSON: {e.msg}", e.lineno, e.colno) from None


def load_json_file(path: str) -> Any:
    if not os.path.isfile(path):
        raise InputError(f"input file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    logger.debug("Loaded %s (%d bytes)", path, len(text))
    return parse_json_text(text, path)


def load_vector(text: str, name: str = "vector") -> np.ndarray:
    """A JSON array given inline or as the path of a file holding one"""
    data = load_json_file(text) if os.path.isfile(text) else parse_json_text(text, name)
    if not isinstance(data, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                             for v in data):
        raise InputError(f"{name} must be a JSON array of numbers")
    vector = np.array(data, dtype=float)
    if not np.all(np.isfinite(vector)):
        raise InputError(f"{name} must be finite")
    return vector


def _convert(loader, data: Any, path: str):
    try:
        return loader(data)
    except InputError:
        raise
    except ToolkitError as e:
        # Structural problems keep their kind; the message names the file
        raise type(e)(*_with_source(e, path)) from None
    except (TypeError, ValueError, KeyError) as e:
        raise InputError(f"{path}: malformed content: {e}") from None


def _with_source(error: ToolkitError, path: str) -> List[Any]:
    if hasattr(error, 'position'):
        return [f"{path}: {error.detail}", error.position]
    return [f"{path}: {error}"]


def load_family(path: str) -> VectorFieldFamily:
    return _convert(FamilyFactory.create_family, load_json_file(path), path)


def load_path(path: str) -> PiecewiseLinearPath:
    return _convert(PiecewiseLinearPath.from_json, load_json_file(path), path)


def load_rough_path(path: str) -> RoughPathL2:
    return _convert(RoughPathL2.from_json, load_json_file(path), path)

