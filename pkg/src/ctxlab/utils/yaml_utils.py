"""YAML helpers"""

from collections import defaultdict
from fractions import Fraction

import numpy as np
import yaml
from munch import Munch


def stringify_fraction(data: Fraction) -> str:
    """Represent an exact rational as ``p/q``, or as a plain integer when the denominator is 1.

    >>> stringify_fraction(Fraction(1, 2))
    '1/2'
    >>> stringify_fraction(Fraction(12))
    '12'
    """
    return str(data.numerator) if data.denominator == 1 else f"{data.numerator}/{data.denominator}"


def yaml_dump_cozy(data, stream=None, **kwargs) -> str:
    """Dump data to YAML with readable scalars for the report types used in this project.

    - Fraction --> 'p/q' string (or int when integral)
    - numpy floating / integer / bool scalars --> Python float / int / bool
    - tuple --> list
    - Munch, defaultdict --> regular dict

    Args:
        data: Python data structure to dump to YAML
        stream: File-like object to write to (or None to return string)
        **kwargs: Additional arguments passed to yaml.dump()

    Returns:
        YAML string if stream is None, otherwise None

    Example:
        >>> print(yaml_dump_cozy({"bound": Fraction(18), "S": Fraction(1, 2)}).strip())
        S: 1/2
        bound: 18
    """

    class CozyDumper(yaml.SafeDumper):
        """Custom YAML dumper for exact and numpy scalars."""

    def _represent_fraction(dumper, data: Fraction):
        if data.denominator == 1:
            return dumper.represent_int(data.numerator)
        return dumper.represent_scalar("tag:yaml.org,2002:str", stringify_fraction(data))

    def _represent_np_float(dumper, data):
        return dumper.represent_float(float(data))

    def _represent_np_int(dumper, data):
        return dumper.represent_int(int(data))

    def _represent_np_bool(dumper, data):
        return dumper.represent_bool(bool(data))

    def _represent_tuple(dumper, data):
        return dumper.represent_list(list(data))

    def _represent_mapping(dumper, data):
        return dumper.represent_dict(dict(data))

    CozyDumper.add_representer(Fraction, _represent_fraction)
    CozyDumper.add_multi_representer(np.floating, _represent_np_float)
    CozyDumper.add_multi_representer(np.integer, _represent_np_int)
    CozyDumper.add_representer(np.bool_, _represent_np_bool)
    CozyDumper.add_representer(tuple, _represent_tuple)
    CozyDumper.add_representer(Munch, _represent_mapping)
    CozyDumper.add_representer(defaultdict, _represent_mapping)

    return yaml.dump(data, stream, Dumper=CozyDumper, **kwargs)
