# Copyright (C) 2024 netclosure contributors. All rights reserved.

import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional, Text

import yaml

from .errors import FormatError, InvariantError

__all__ = [
    'Limits',
    'DEFAULT_LIMITS',
    'load_limits',
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Limits:
    max_digraph_vertices: int = 24
    max_closure_vertices: int = 16
    max_predicate_words: int = 2 ** 20
    max_materialized_words: int = 4096
    max_alpha_words: int = 4096
    max_chi_words: int = 512
    max_brute_vertices: int = 10
    max_protocol_vertices: int = 4
    max_protocol_in_degree: int = 2

    @classmethod
    def from_dict(cls, data: Any) -> "Limits":
        if not isinstance(data, dict):
            raise FormatError(f"limits must be a mapping, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = {str(k) for k in data if k not in known}
        if unknown:
            raise InvariantError("unknown limits keys", ', '.join(sorted(unknown)))
        values: Dict[Text, int] = {}
        for key, value in data.items():
            # bool is an int subclass
            if isinstance(value, bool) or not isinstance(value, int):
                raise FormatError(f"limit {key} must be an integer, got {value!r}")
            if value < 0:
                raise InvariantError("limits are non-negative", f"{key} = {value}")
            values[key] = value
        return replace(DEFAULT_LIMITS, **values)

    @classmethod
    def from_yaml(cls, path: Text) -> "Limits":
        with open(path) as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                mark = getattr(e, 'problem_mark', None)
                raise FormatError(f"invalid YAML in {path}", None if mark is None else mark.line + 1)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise FormatError(f"{path} must hold a mapping with a limits section")
        limits = data.get('limits')
        logger.debug("Loaded limits from %s: %s", path, limits)
        return cls.from_dict({} if limits is None else limits)


DEFAULT_LIMITS = Limits()


def load_limits(path: Optional[Text] = None) -> Limits:
    if path is None:
        return DEFAULT_LIMITS
    return Limits.from_yaml(path)
